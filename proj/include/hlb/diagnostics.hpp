#pragma once
// Blow-up functionals, their time derivatives by independent routes, the BKM
// integral, blow-up time fits and the comparison ODE.
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hlb/biot_savart.hpp"
#include "hlb/evolution.hpp"
#include "hlb/flow_map.hpp"
#include "hlb/grid.hpp"

namespace hlb::diagnostics {

using evolution::DiagnosticsSample;
using evolution::Profile;
using grid::GridField;
using grid::pi;

inline double compute_I(const GridField& theta) {
    require(theta.domain.mode == grid::Mode::periodic, "invalid-config", "periodic mode required");
    const auto& w = grid::half_period_weights(theta.domain);
    double mu = theta.domain.mu(), s = 0;
    for (int j = 0; j < theta.size(); ++j) s += w[j] * theta[j] / std::tan(mu * theta.domain.node(j));
    return s;
}

inline double compute_J(const GridField& theta, const GridField& omega) {
    require(theta.domain == omega.domain, "invalid-config", "fields on different grids");
    require(theta.domain.mode == grid::Mode::periodic, "invalid-config", "periodic mode required");
    const auto& w = grid::half_period_weights(theta.domain);
    double mu = theta.domain.mu(), s = 0;
    for (int j = 0; j < theta.size(); ++j) s += w[j] * theta[j] * omega[j] / std::tan(mu * theta.domain.node(j));
    return 2.0 / pi * s;
}

// a of the kernel in force for the F route; +inf for HL.
inline double kernel_a(const kernels::KernelSpec& spec) {
    if (spec.family == kernels::Family::HL) return std::numeric_limits<double>::infinity();
    require(spec.family == kernels::Family::modifiedHL, "invalid-config",
            "F route needs the HL or modified kernel");
    return spec.a;
}

// -int_0^{L/2} theta_x(x) (u cot)(x) dx with u cot from the F double integral.
inline double dI_formula(const Profile& p) {
    biot_savart::MappedSamples ms{p.domain, p.x, p.jac, p.omega};
    auto ucot = biot_savart::cot_weighted_velocity(ms, kernel_a(p.spec));
    double s = 0;
    for (int j = 0; j < p.size() / 2; ++j) s += p.dtheta[j] * ucot[j];
    return -s * p.h();
}

// -int_0^{L/2} u theta_x cot dx with u from the velocity operator.
inline double dI_single(const Profile& p) {
    double s = 0;
    for (int j = 0; j < p.size() / 2; ++j) s += p.dtheta[j] * p.u[j] * p.weight(p.x[j]);
    return -s * p.h();
}

struct Consistency {
    double fd_value = 0, formula_value = 0, diff = 0, single_value = 0;
};

// Centered difference (I(t+2dt) - I(t)) / 2dt against the F route at t+dt.
template <class Scheme>
Consistency dI_consistency(const Scheme& scheme, const typename Scheme::State& s, double dt = 1e-4) {
    auto s1 = scheme.step(s, dt).first;
    auto s2 = scheme.step(s1, dt).first;
    double I0 = evolution::functional_I(scheme.profile(s));
    double I2 = evolution::functional_I(scheme.profile(s2));
    auto p1 = scheme.profile(s1);
    Consistency c;
    c.fd_value = (I2 - I0) / (2 * dt);
    c.formula_value = dI_formula(p1);
    c.single_value = dI_single(p1);
    c.diff = std::abs(c.fd_value - c.formula_value);
    return c;
}

namespace detail {
// Label alpha with phi(alpha) = y, phi = alpha + (x - alpha) sampled.
inline double label_of(const Profile& p, double y) {
    const auto& d = p.domain;
    bool identity = true;
    for (int j = 0; j < p.size() && identity; ++j) identity = p.x[j] == d.node(j);
    if (identity) return y;
    std::vector<double> disp(p.size());
    for (int j = 0; j < p.size(); ++j) disp[j] = p.x[j] - d.node(j);
    grid::TrigInterpolant D(GridField(d, disp));
    // bracket on the samples, then Newton
    double a = y;
    for (int j = 0; j + 1 < p.size() / 2; ++j)
        if (p.x[j] <= y && y <= p.x[j + 1]) {
            double f = (y - p.x[j]) / (p.x[j + 1] - p.x[j]);
            a = d.node(j) + f * d.dx();
        }
    for (int it = 0; it < 50; ++it) {
        double f = a + D(a) - y, fp = 1.0 + D.derivative(a);
        double da = f / fp;
        a -= da;
        if (std::abs(da) < 1e-15 * d.L) break;
    }
    return a;
}
}  // namespace detail

// B(y) = int_y^{L/2} w (u cot)_x dx, summed in label space with the cell
// containing phi^{-1}(y) weighted by its overlap.
inline double bracket_positivity(const Profile& p, double y) {
    const auto& d = p.domain;
    double L = d.L, mu = d.mu(), h = d.dx();
    require(y > 0 && y <= L / 2, "invalid-config", "probe must lie in (0, L/2]");
    if (y >= L / 2) return 0.0;
    double astar = detail::label_of(p, y);
    double s = 0;
    for (int j = 0; j < p.size() / 2; ++j) {
        double lo = d.node(j) - h / 2, hi = lo + h;
        double frac = std::clamp((hi - astar) / h, 0.0, 1.0);
        if (frac == 0) continue;
        double sn = std::sin(mu * p.x[j]);
        double ducot = p.du[j] / std::tan(mu * p.x[j]) - mu * p.jac[j] * p.u[j] / (sn * sn);
        s += frac * p.omega[j] * ducot;
    }
    return s * h;
}

inline std::vector<double> bkm_accumulate(const std::vector<DiagnosticsSample>& s) {
    std::vector<double> out(s.size(), 0.0);
    for (size_t i = 1; i < s.size(); ++i) {
        require(s[i].t >= s[i - 1].t, "unordered-samples", "samples must be ordered in t");
        out[i] = out[i - 1] + 0.5 * (s[i].t - s[i - 1].t) * (s[i].max_ux + s[i - 1].max_ux);
    }
    return out;
}

struct BlowupFit {
    double T_est = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();  // relative RMS of the linear fit
    bool failed = true;
    bool poor = true;
    std::string reason;
};

// I ~ c (T - t)^{-2}  <=>  I^{-1/2} linear in t, vanishing at T. Fitted over
// the last quartile of samples.
inline BlowupFit estimate_blowup_time(const std::vector<double>& t, const std::vector<double>& I) {
    BlowupFit r;
    size_t n = t.size();
    if (n != I.size() || n < 8) {
        r.reason = "fewer than 8 samples";
        return r;
    }
    size_t k0 = n - std::max<size_t>(4, n / 4);
    std::vector<double> tt, yy;
    for (size_t i = k0; i < n; ++i) {
        if (!(I[i] > 0) || (i > k0 && !(I[i] > I[i - 1]))) {
            r.reason = "I not monotone on the fit window";
            return r;
        }
        tt.push_back(t[i]);
        yy.push_back(1.0 / std::sqrt(I[i]));
    }
    double m = static_cast<double>(tt.size());
    double st = 0, sy = 0;
    for (size_t i = 0; i < tt.size(); ++i) {
        st += tt[i];
        sy += yy[i];
    }
    double tb = st / m, yb = sy / m, stt = 0, sty = 0;
    for (size_t i = 0; i < tt.size(); ++i) {
        stt += (tt[i] - tb) * (tt[i] - tb);
        sty += (tt[i] - tb) * (yy[i] - yb);
    }
    double slope = sty / stt, icpt = yb - slope * tb;
    double rss = 0;
    for (size_t i = 0; i < tt.size(); ++i) {
        double e = yy[i] - (icpt + slope * tt[i]);
        rss += e * e;
    }
    r.residual = std::sqrt(rss / m) / std::max(std::abs(yb), 1e-300);
    if (!(slope < 0)) {
        r.reason = "I^{-1/2} not decreasing";
        return r;
    }
    r.T_est = -icpt / slope;
    double window = tt.back() - tt.front();
    if (r.T_est - tt.back() > 2.0 * window) {
        r.reason = "extrapolated blow-up time far beyond the fit window";
        return r;
    }
    r.failed = false;
    r.poor = r.residual > 1e-3;
    r.reason = r.poor ? "poor fit" : "ok";
    return r;
}

struct OdeRun {
    double C = 0, I0 = 0, dt = 0, T_blowup = 0;
    BlowupFit fit;
    long steps = 0;
};

// I' = C Q, Q' = I^2, Q(0) = 0, by RK4 with step dt / sqrt(C I) until I > 1e12.
inline OdeRun ode_comparator(double C, double I0, double dt) {
    require(C > 0 && I0 > 0 && dt > 0, "invalid-config", "C, I0, dt must be positive");
    OdeRun r{C, I0, dt, 0, {}, 0};
    double t = 0, I = I0, Q = 0;
    std::vector<double> ts{t}, Is{I};
    auto f = [&](double i, double q) { return std::pair{C * q, i * i}; };
    while (I <= 1e12 && r.steps < 10'000'000) {
        double h = dt / std::sqrt(C * I);
        auto [a1, b1] = f(I, Q);
        auto [a2, b2] = f(I + h / 2 * a1, Q + h / 2 * b1);
        auto [a3, b3] = f(I + h / 2 * a2, Q + h / 2 * b2);
        auto [a4, b4] = f(I + h * a3, Q + h * b3);
        I += h / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
        Q += h / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
        t += h;
        ++r.steps;
        ts.push_back(t);
        Is.push_back(I);
    }
    r.fit = estimate_blowup_time(ts, Is);
    r.T_blowup = r.fit.T_est;
    return r;
}

// Exact blow-up time of I'' = C I^2, I(0) = I0, I'(0) = 0:
// sqrt(3/(2C)) I0^{-1/2} int_1^inf (u^3 - 1)^{-1/2} du.
inline double ode_exact_T(double C, double I0, double beta_integral) {
    return std::sqrt(3.0 / (2.0 * C)) / std::sqrt(I0) * beta_integral;
}

// Rates along a run, collected from profiles.
struct RateSample {
    double t = 0, I = 0, J = 0, mass_half = 0, dI_dt = 0, dJ_dt = 0;
};

inline RateSample rate_sample(const Profile& p) {
    return {p.t, evolution::functional_I(p), evolution::functional_J(p), evolution::mass_half(p), p.dI_dt,
            p.dJ_dt};
}

struct AuditRow {
    double t = 0, margin_I = 0, margin_J = 0, scale_I = 1, scale_J = 1;
};

struct AuditReport {
    std::vector<AuditRow> rows;
    double worst_I = 0, worst_J = 0;  // min of margin / max(1, scale)
    bool pass = true;
};

// dI/dt >= J - C M m   and   dJ/dt >= (2/L^2) I^2 - C M m^2,  m = mass_half.
inline AuditReport perturbed_inequality_audit(const std::vector<RateSample>& series, double Cf, double M,
                                              double L, double tol = 1e-6) {
    AuditReport rep;
    rep.worst_I = rep.worst_J = std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        AuditRow r;
        r.t = s.t;
        double rhsI = s.J - Cf * M * s.mass_half;
        double rhsJ = 2.0 / (L * L) * s.I * s.I - Cf * M * s.mass_half * s.mass_half;
        r.margin_I = s.dI_dt - rhsI;
        r.margin_J = s.dJ_dt - rhsJ;
        r.scale_I = std::max({1.0, std::abs(s.dI_dt), std::abs(rhsI)});
        r.scale_J = std::max({1.0, std::abs(s.dJ_dt), std::abs(rhsJ)});
        rep.worst_I = std::min(rep.worst_I, r.margin_I / r.scale_I);
        rep.worst_J = std::min(rep.worst_J, r.margin_J / r.scale_J);
        rep.rows.push_back(r);
    }
    if (series.empty()) rep.worst_I = rep.worst_J = 0;
    rep.pass = rep.worst_I >= -tol && rep.worst_J >= -tol;
    return rep;
}

// min over interior samples of (I_{k+1} - 2 I_k + I_{k-1}) style curvature
// on a nonuniform time grid, normalised by max(1, |I|).
inline double min_second_difference(const std::vector<DiagnosticsSample>& s) {
    double m = std::numeric_limits<double>::infinity();
    for (size_t k = 1; k + 1 < s.size(); ++k) {
        double h0 = s[k].t - s[k - 1].t, h1 = s[k + 1].t - s[k].t;
        if (h0 <= 0 || h1 <= 0) continue;
        double d2 = 2.0 * ((s[k + 1].I - s[k].I) / h1 - (s[k].I - s[k - 1].I) / h0) / (h0 + h1);
        m = std::min(m, d2 / std::max(1.0, std::abs(s[k].I)));
    }
    return m;
}

}  // namespace hlb::diagnostics
