#pragma once

namespace arz::units {

// Internal convention is SI throughout: veh/m, m/s, veh/s, m, s.
// Traffic units (veh/km, km/h, veh/h) appear only at file/CLI boundaries.

inline double density_from_veh_per_km(double v) { return v / 1000.0; }
inline double density_to_veh_per_km(double v) { return v * 1000.0; }

inline double speed_from_km_per_h(double v) { return v / 3.6; }
inline double speed_to_km_per_h(double v) { return v * 3.6; }

inline double flow_from_veh_per_h(double v) { return v / 3600.0; }
inline double flow_to_veh_per_h(double v) { return v * 3600.0; }

}  // namespace arz::units
