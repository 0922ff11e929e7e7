#pragma once

#include <stdexcept>
#include <vector>

namespace debond::onedim {

struct UnsupportedDriveClass : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Piecewise-linear function of time given by (t_k, v_k) samples.
struct PiecewiseLinear {
    std::vector<double> t;
    std::vector<double> v;

    double value(double s) const;
    double running_max(double s) const;  // max over [t0, s]
    double t_end() const { return t.back(); }
    void validate() const;
};

/// Closed-form toughness profile on (0, L) with exact integrals.
struct ToughnessProfile {
    enum class Kind { Constant, InverseSquareCapped } kind = Kind::Constant;
    double c = 1.0;      // constant value, or numerator of c/x^2
    double alpha = 0.0;  // cap: c/x^2 on (0, alpha], c/alpha^2 beyond

    static ToughnessProfile constant(double c);
    static ToughnessProfile inverse_square_capped(double c, double alpha);
    double value(double x) const;
    double integral(double a, double b) const;
};

/// Debonding front trajectory on (0, L): piecewise phases of a stuck front,
/// a front moving with the drive envelope, and full detachment.
struct FrontTrajectory {
    enum class Phase { Stuck, Moving, Full };
    struct Segment {
        double t0, t1;
        Phase phase;
        double ell0, ell1;  // front at segment ends (equal when stuck)
    };
    double length = 1.0;  // L
    double ell_start = 0.0;
    PiecewiseLinear drive;
    double kappa_const = 0.0;
    std::vector<Segment> segments;
    std::vector<double> jump_times;

    double ell(double s) const;  // right-continuous at jumps
    double t_end() const { return segments.back().t1; }
};

/// Membrane profile for a front at ell under boundary value w.
double front_field(double ell, double w, double x, double L);

struct StabilityMargin1D {
    double worst = 0.0;
    double worst_rho = 0.0;
    bool passed = true;
};

/// Global-stability margins of the state (ell, w): growing the front to rho
/// must not pay off, and neither must full detachment. Exact toughness
/// integrals; rho sampled densely plus at profile breakpoints.
StabilityMargin1D check_global_stability(double ell, double w, const ToughnessProfile& kappa,
                                         double L, int rho_samples = 1000);

struct BalanceSeries {
    std::vector<double> t;
    std::vector<double> front;
    std::vector<double> energy;      // stored energy F(t, ell(t))
    std::vector<double> dissipated;  // toughness integral from ell_start
    std::vector<double> work;        // cumulative power integral
    std::vector<double> residual;
    double max_abs = 0.0;
};

/// Energy-balance residual along the trajectory: stored plus dissipated
/// energy minus initial energy minus the exact work integral, evaluated at
/// every phase and drive breakpoint (both sides of jumps).
BalanceSeries check_energy_balance(const FrontTrajectory& traj);

/// Exact trajectory for constant toughness under a nonnegative
/// piecewise-linear drive: front follows max(ell0, w*(t)/sqrt(2 kappa))
/// until the detachment threshold is reached, then jumps to L.
FrontTrajectory constant_toughness_front(const PiecewiseLinear& drive, double kappa_c, double ell0,
                                         double L);

/// Drive made of tents of height a_j on [t_{j+1}, t_j], t_1 = T, both
/// sequences strictly decreasing; vanishes outside the tents.
PiecewiseLinear build_spiky_drive(const std::vector<double>& tent_times,
                                  const std::vector<double>& tent_peaks);

/// (2 kappa)^(1/4) * integral of |w'| / sqrt(w*) dt, the L1-in-time norm of
/// the power-datum gradient along the envelope front; exact piecewise value.
double drive_gradient_l1(const PiecewiseLinear& drive, double kappa_c);

}  // namespace debond::onedim
