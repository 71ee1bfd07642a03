#pragma once

#include <optional>
#include <vector>

#include "arz/fd.hpp"
#include "arz/linearize.hpp"
#include "arz/solver.hpp"

namespace arz::observer {

/// Boundary sensing series driving the observer: inlet flux, outlet flux,
/// outlet velocity. Linear interpolation in time; querying across a sample
/// gap wider than max_gap raises DataError.
class BoundaryMeasurements {
  public:
    BoundaryMeasurements(std::vector<double> times, std::vector<double> q_in,
                         std::vector<double> q_out, std::vector<double> v_out, double max_gap);

    double q_in_at(double t) const;
    double q_out_at(double t) const;
    double v_out_at(double t) const;

    double start_time() const { return times_.front(); }
    double end_time() const { return times_.back(); }
    std::size_t size() const { return times_.size(); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& q_in() const { return q_in_; }
    const std::vector<double>& q_out() const { return q_out_; }
    const std::vector<double>& v_out() const { return v_out_; }

  private:
    double interp(const std::vector<double>& ys, double t) const;
    std::vector<double> times_, q_in_, q_out_, v_out_;
    double max_gap_;
};

/// Injection fields E_w(x), E_v(x) = gain * (w_bar(L) - w_hat(L)).
struct InjectionTerms {
    std::vector<double> e_w;
    std::vector<double> e_v;
};

InjectionTerms injection_terms(double w_bar_outlet, double w_hat_outlet,
                               const lin::GainProfile& gains);

/// w_bar(L,t) built from the observer's own outlet estimate via the forward
/// transform chain (deviation -> Riemann -> scaling at x = L).
double outlet_estimate_scaled(double rho_hat_last, double v_hat_last,
                              const lin::ReferenceState& ref, double tau, double length);

struct ObserverOptions {
    lin::GainFormulation formulation = lin::GainFormulation::Exact;
    double eps_speed = 1e-6;          // [m/s] regime-classification tolerance
    bool x_varying_exponent = false;  // use exp(-x/(tau l1)) instead of exp(-L/(tau l1))
    double v_floor = 0.1;             // [m/s] inlet boundary division guard
    double cfl_safety = 0.9;
    double speed_headroom = 1.3;      // margin over setpoint speeds for dt
    int output_every = 1;
    std::optional<double> fixed_dt;   // e.g. share the plant dt in twin runs
};

/// Mutable observer state advanced step by step.
struct ObserverState {
    solver::ConservativeField cons;
    lin::GainProfile gains;
    lin::ReferenceState ref;
    double t = 0.0;
};

struct MeasurementSample {
    double q_in;   // [veh/s]
    double q_out;  // [veh/s]
    double v_out;  // [m/s]
};

/// One Lax-Wendroff advance of the observer PDEs: boundary-driven ghosts, the
/// relaxation source, then the cellwise output injections.
void observer_step(ObserverState& state, const MeasurementSample& meas, double dt,
                   const solver::SpeedLaw& law, double tau, const solver::Grid& grid,
                   const ObserverOptions& options);

/// Full observer run over the measurement span. init = setpoint field unless
/// an explicit field is provided.
solver::Trajectory run_observer(const BoundaryMeasurements& meas,
                                const std::optional<solver::StateField>& init,
                                const fd::FundamentalDiagram& fd, double tau,
                                const lin::ReferenceState& ref, const solver::Grid& grid,
                                double total_time, const ObserverOptions& options);

/// Measurements read off a plant trajectory's outlet cell; inlet flux is the
/// setpoint value when `setpoint_inlet` (the twin-experiment convention),
/// otherwise the plant's first-cell flux.
BoundaryMeasurements measurements_from_trajectory(const solver::Trajectory& plant,
                                                  const lin::ReferenceState& ref,
                                                  bool setpoint_inlet = true);

/// Linear error-system oracle for the finite-time convergence property:
/// upwind advance of
///   w_t + l1 w_x = -r(x) w(L),  v_t + l2 v_x = c(x) w - s(x) w(L),
///   w(0) = (l2/l1) v(0), v(L) = 0,
/// where (r, s) are the observer-side gains (the subtraction plant-minus-
/// observer flips their sign into the error dynamics).
struct LinearErrorRun {
    std::vector<double> times;
    std::vector<double> l2_norm;  // combined sqrt(int (w^2 + v^2) dx)
};

LinearErrorRun simulate_linear_error_system(const std::vector<double>& ic_w,
                                            const std::vector<double>& ic_v,
                                            const lin::GainProfile& gains,
                                            const lin::ReferenceState& ref, double tau,
                                            const solver::Grid& grid, double total_time,
                                            double cfl = 1.0);

}  // namespace arz::observer
