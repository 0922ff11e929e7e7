#include "debond/onedim.hpp"

#include <algorithm>
#include <cmath>

namespace debond::onedim {

void PiecewiseLinear::validate() const {
    if (t.size() < 2 || t.size() != v.size())
        throw UnsupportedDriveClass("drive needs at least two samples");
    for (size_t k = 0; k + 1 < t.size(); ++k)
        if (!(t[k] < t[k + 1])) throw UnsupportedDriveClass("drive times must increase");
    for (double w : v)
        if (!(w >= 0.0)) throw UnsupportedDriveClass("drive must be nonnegative");
}

double PiecewiseLinear::value(double s) const {
    if (s <= t.front()) return v.front();
    for (size_t k = 0; k + 1 < t.size(); ++k) {
        if (s <= t[k + 1]) {
            double a = (s - t[k]) / (t[k + 1] - t[k]);
            return v[k] + a * (v[k + 1] - v[k]);
        }
    }
    return v.back();
}

double PiecewiseLinear::running_max(double s) const {
    double m = v.front();
    for (size_t k = 1; k < t.size() && t[k] <= s; ++k) m = std::max(m, v[k]);
    return std::max(m, value(s));
}

ToughnessProfile ToughnessProfile::constant(double c) {
    ToughnessProfile p;
    p.kind = Kind::Constant;
    p.c = c;
    return p;
}

ToughnessProfile ToughnessProfile::inverse_square_capped(double c, double alpha) {
    ToughnessProfile p;
    p.kind = Kind::InverseSquareCapped;
    p.c = c;
    p.alpha = alpha;
    return p;
}

double ToughnessProfile::value(double x) const {
    if (kind == Kind::Constant) return c;
    double xe = std::min(std::max(x, 1e-300), alpha);
    return c / (xe * xe);
}

double ToughnessProfile::integral(double a, double b) const {
    if (b < a) return -integral(b, a);
    if (kind == Kind::Constant) return c * (b - a);
    double lo = std::max(a, 1e-300), hi = std::max(b, lo);
    double s = 0.0;
    double lo1 = std::min(lo, alpha), hi1 = std::min(hi, alpha);
    if (hi1 > lo1) s += c * (1.0 / lo1 - 1.0 / hi1);
    if (hi > alpha) s += c / (alpha * alpha) * (hi - std::max(lo, alpha));
    return s;
}

double front_field(double ell, double w, double x, double L) {
    if (ell <= 0.0) return 0.0;
    if (ell >= L) return w;
    double r = 1.0 - x / ell;
    return r > 0.0 ? w * r : 0.0;
}

StabilityMargin1D check_global_stability(double ell, double w, const ToughnessProfile& kappa,
                                         double L, int rho_samples) {
    if (!(ell > 0.0 && ell < L)) throw std::invalid_argument("front must lie strictly inside (0, L)");
    StabilityMargin1D out;
    double base = 0.5 * w * w / ell;
    auto margin = [&](double rho) { return 0.5 * w * w / rho + kappa.integral(ell, rho) - base; };

    std::vector<double> rhos;
    rhos.reserve(rho_samples + 2);
    for (int k = 1; k <= rho_samples; ++k)
        rhos.push_back(ell + (L - ell) * double(k) / double(rho_samples + 1));
    if (kappa.kind == ToughnessProfile::Kind::InverseSquareCapped && kappa.alpha > ell &&
        kappa.alpha < L)
        rhos.push_back(kappa.alpha);

    bool first = true;
    for (double rho : rhos) {
        double m = margin(rho);
        if (first || m < out.worst) {
            out.worst = m;
            out.worst_rho = rho;
            first = false;
        }
    }
    double end_margin = kappa.integral(ell, L) - base;
    if (first || end_margin < out.worst) {
        out.worst = end_margin;
        out.worst_rho = L;
    }
    out.passed = out.worst >= -1e-12 * (1.0 + base);
    return out;
}

double FrontTrajectory::ell(double s) const {
    for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
        if (s >= it->t0 || std::next(it) == segments.rend()) {
            if (it->phase == Phase::Full) return length;
            if (it->t1 == it->t0) return it->ell1;
            double a = std::clamp((s - it->t0) / (it->t1 - it->t0), 0.0, 1.0);
            return it->ell0 + a * (it->ell1 - it->ell0);
        }
    }
    return ell_start;
}

FrontTrajectory constant_toughness_front(const PiecewiseLinear& drive, double kappa_c, double ell0,
                                         double L) {
    drive.validate();
    if (!(kappa_c > 0.0)) throw UnsupportedDriveClass("constant toughness must be positive");
    if (!(L > 0.0) || ell0 < 0.0 || ell0 > L) throw UnsupportedDriveClass("front start outside [0, L]");

    const double s2k = std::sqrt(2.0 * kappa_c);
    const double w_move = s2k * ell0;
    const double w_jump = (ell0 < 0.5 * L) ? s2k * 0.5 * L : std::sqrt(2.0 * kappa_c * ell0 * (L - ell0));
    if (drive.v.front() > w_move + 1e-12 * (1.0 + w_move))
        throw UnsupportedDriveClass("initial state is not stable under the starting drive value");

    FrontTrajectory traj;
    traj.length = L;
    traj.ell_start = ell0;
    traj.drive = drive;
    traj.kappa_const = kappa_c;

    double wstar = drive.v.front();
    double ell = std::max(ell0, wstar / s2k);
    bool full = ell0 >= L;
    double t_full = full ? drive.t.front() : 0.0;

    auto push = [&](double t0, double t1, FrontTrajectory::Phase ph, double e0, double e1) {
        if (t1 <= t0) return;
        traj.segments.push_back({t0, t1, ph, e0, e1});
    };

    for (size_t k = 0; k + 1 < drive.t.size() && !full; ++k) {
        double ta = drive.t[k], tb = drive.t[k + 1];
        double wa = drive.v[k], wb = drive.v[k + 1];
        double t = ta;

        // Detachment: first time the drive reaches the jump threshold.
        double tc = tb + 1.0;
        if (wa >= w_jump)
            tc = ta;
        else if (wb >= w_jump)
            tc = ta + (w_jump - wa) / (wb - wa) * (tb - ta);
        double stop = std::min(tb, tc);

        // Envelope: the front moves only where the drive exceeds both its own
        // running max and the threshold for the current front.
        double w_push = std::max(wstar, s2k * ell);
        if (wb > wa && wb > w_push && stop > t) {
            double tm = (wa >= w_push) ? ta : ta + (w_push - wa) / (wb - wa) * (tb - ta);
            tm = std::min(tm, stop);
            push(t, tm, FrontTrajectory::Phase::Stuck, ell, ell);
            double w_at_stop = wa + (wb - wa) * (stop - ta) / (tb - ta);
            double e1 = std::max(ell, w_at_stop / s2k);
            push(tm, stop, FrontTrajectory::Phase::Moving, ell, e1);
            ell = e1;
        } else {
            push(t, stop, FrontTrajectory::Phase::Stuck, ell, ell);
        }

        if (tc <= tb) {
            traj.jump_times.push_back(tc);
            full = true;
            t_full = tc;
            break;
        }
        wstar = std::max({wstar, wa, wb});
    }

    if (full) {
        if (drive.t_end() > t_full)
            push(t_full, drive.t_end(), FrontTrajectory::Phase::Full, L, L);
        else
            traj.segments.push_back({t_full, t_full, FrontTrajectory::Phase::Full, L, L});
    }
    if (traj.segments.empty())
        push(drive.t.front(), drive.t_end(), FrontTrajectory::Phase::Stuck, ell, ell);
    return traj;
}

BalanceSeries check_energy_balance(const FrontTrajectory& traj) {
    BalanceSeries out;
    const double L = traj.length;
    const ToughnessProfile prof = ToughnessProfile::constant(traj.kappa_const);
    const double s2k = std::sqrt(2.0 * traj.kappa_const);

    auto F = [&](double t, double ell) {
        if (ell <= 0.0 || ell >= L) return 0.0;
        double w = traj.drive.value(t);
        return 0.5 * w * w / ell;
    };
    double F0 = F(traj.segments.front().t0, traj.ell_start);

    double work = 0.0;
    auto record = [&](double t, double ell) {
        double D = prof.integral(traj.ell_start, ell >= L ? L : ell);
        double Fv = F(t, ell);
        double r = Fv + D - F0 - work;
        out.t.push_back(t);
        out.front.push_back(ell);
        out.energy.push_back(Fv);
        out.dissipated.push_back(D);
        out.work.push_back(work);
        out.residual.push_back(r);
        out.max_abs = std::max(out.max_abs, std::abs(r));
    };

    record(traj.segments.front().t0, traj.ell_start);
    for (const auto& seg : traj.segments) {
        // Work on the segment; exact for each phase.
        double w0 = traj.drive.value(seg.t0), w1 = traj.drive.value(seg.t1);
        double mid_t = 0.5 * (seg.t0 + seg.t1);
        switch (seg.phase) {
            case FrontTrajectory::Phase::Stuck: {
                if (seg.ell0 > 0.0) {
                    double wm = traj.drive.value(mid_t);
                    double w_half = (wm * wm - w0 * w0) / (2.0 * seg.ell0);
                    work += w_half;
                    record(mid_t, seg.ell0);
                    work += (w1 * w1 - wm * wm) / (2.0 * seg.ell0);
                } else {
                    record(mid_t, seg.ell0);
                }
                record(seg.t1, seg.ell1);
                break;
            }
            case FrontTrajectory::Phase::Moving: {
                double wm = traj.drive.value(mid_t);
                work += s2k * (wm - w0);
                record(mid_t, wm / s2k);
                work += s2k * (w1 - wm);
                record(seg.t1, seg.ell1);
                break;
            }
            case FrontTrajectory::Phase::Full: {
                record(mid_t, L);
                record(seg.t1, L);
                break;
            }
        }
    }
    return out;
}

PiecewiseLinear build_spiky_drive(const std::vector<double>& tent_times,
                                  const std::vector<double>& tent_peaks) {
    if (tent_times.size() != tent_peaks.size() + 1 || tent_peaks.empty())
        throw UnsupportedDriveClass("need J+1 tent times for J peaks");
    for (size_t j = 0; j + 1 < tent_times.size(); ++j)
        if (!(tent_times[j] > tent_times[j + 1]))
            throw UnsupportedDriveClass("tent times must strictly decrease");
    if (tent_times.back() < 0.0) throw UnsupportedDriveClass("tent times must be nonnegative");
    for (size_t j = 0; j + 1 < tent_peaks.size(); ++j)
        if (!(tent_peaks[j] > tent_peaks[j + 1]))
            throw UnsupportedDriveClass("tent peaks must strictly decrease");
    if (!(tent_peaks.back() > 0.0)) throw UnsupportedDriveClass("tent peaks must be positive");

    PiecewiseLinear w;
    size_t J = tent_peaks.size();
    if (tent_times.back() > 0.0) {
        w.t.push_back(0.0);
        w.v.push_back(0.0);
    }
    w.t.push_back(tent_times[J]);
    w.v.push_back(0.0);
    for (size_t j = J; j-- > 0;) {
        double lo = tent_times[j + 1], hi = tent_times[j];
        w.t.push_back(0.5 * (lo + hi));
        w.v.push_back(tent_peaks[j]);
        w.t.push_back(hi);
        w.v.push_back(0.0);
    }
    w.validate();
    return w;
}

double drive_gradient_l1(const PiecewiseLinear& drive, double kappa_c) {
    drive.validate();
    if (!(kappa_c > 0.0)) throw UnsupportedDriveClass("constant toughness must be positive");
    double W = drive.v.front();
    double total = 0.0;
    for (size_t k = 0; k + 1 < drive.t.size(); ++k) {
        double wa = drive.v[k], wb = drive.v[k + 1];
        if (wb > wa) {
            if (wb <= W) {
                if (W > 0) total += (wb - wa) / std::sqrt(W);
            } else {
                if (W > wa && W > 0) total += (W - wa) / std::sqrt(W);
                double base = std::max(W, wa);
                total += 2.0 * (std::sqrt(wb) - std::sqrt(base));
                W = wb;
            }
        } else if (wb < wa) {
            if (W > 0) total += (wa - wb) / std::sqrt(W);
        }
        W = std::max(W, wb);
    }
    return std::pow(2.0 * kappa_c, 0.25) * total;
}

}  // namespace debond::onedim
