#pragma once
// Admissible initial data and the smallness constants of the perturbed theory.
#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hlb/biot_savart.hpp"
#include "hlb/diagnostics.hpp"
#include "hlb/evolution.hpp"
#include "hlb/kernels.hpp"

namespace hlb::scenarios {

using evolution::SystemState;
using grid::DomainConfig;
using grid::GridField;
using grid::pi;
using kernels::KernelSpec;
using kernels::PerturbationFn;

// exp(1 - 1/(1 - s^2)), s = (2x - c)/c, supported on (0, c).
inline double bump(double x, double c) {
    if (!(x > 0 && x < c)) return 0.0;
    double s = (2 * x - c) / c;
    double q = 1 - s * s;
    if (q <= 0) return 0.0;
    return std::exp(1 - 1 / q);
}

// int_0^x bump(., c), cellwise Gauss-Legendre (the bump is analytic inside).
class BumpIntegral {
public:
    explicit BumpIntegral(double c, int cells = 512) : c_(c), h_(c / cells), cum_(cells + 1, 0.0) {
        for (int k = 0; k < cells; ++k) cum_[k + 1] = cum_[k] + piece(k * h_, (k + 1) * h_);
    }
    double operator()(double x) const {
        if (x <= 0) return 0.0;
        if (x >= c_) return cum_.back();
        int k = std::min(static_cast<int>(x / h_), static_cast<int>(cum_.size()) - 2);
        return cum_[k] + piece(k * h_, x);
    }
    double total() const { return cum_.back(); }

private:
    double piece(double a, double b) const {
        if (b <= a) return 0.0;
        return boost::math::quadrature::gauss<double, 30>::integrate([&](double x) { return bump(x, c_); }, a, b);
    }
    double c_, h_;
    std::vector<double> cum_;
};

enum class Class { zero, sec3, sec4, realline };

inline std::string to_string(Class c) {
    switch (c) {
        case Class::zero: return "zero";
        case Class::sec3: return "sec3";
        case Class::sec4: return "sec4";
        case Class::realline: return "realline";
    }
    return "?";
}

struct ScenarioSpec {
    Class cls = Class::sec3;
    DomainConfig domain;
    double M = 1.0;          // sup theta0
    double A_omega = 1.0;    // omega0 = A_omega * bump
    double c_omega = -1;     // bump width for omega0 (< 0: default)
    double c_theta = -1;     // bump width for theta0_x (< 0: default)
    double eps = -1;         // sec4 support radius (< 0: min(eps1, eps2)/2)
    KernelSpec kernel;
};

struct Built {
    SystemState state;
    GridField theta_x;   // exact theta0_x samples
    double I0 = 0;
    double threshold = 0;
    bool threshold_met = true;
    int compressions = 0;
    double c_theta = 0, c_omega = 0, eps = 0;
    std::vector<std::string> notes;
};

namespace detail {
// Odd omega0 and even theta0 built from bumps on the positive half.
inline Built assemble(const DomainConfig& d, const KernelSpec& k, double M, double A_omega, double c_omega,
                      double c_theta) {
    Built b;
    b.c_omega = c_omega;
    b.c_theta = c_theta;
    BumpIntegral Bi(c_theta);
    double A_theta = M == 0 ? 0.0 : M / Bi.total();
    b.state.spec = k;
    b.state.omega = GridField(d);
    b.state.theta = GridField(d);
    b.theta_x = GridField(d);
    for (int j = 0; j < d.N; ++j) {
        double x = d.node(j);
        double ax = d.mode == grid::Mode::periodic ? std::min(std::abs(x), std::abs(d.L - x)) : std::abs(x);
        double sgn = d.mode == grid::Mode::periodic ? (x < d.L / 2 ? 1.0 : -1.0) : (x > 0 ? 1.0 : -1.0);
        b.state.omega[j] = sgn * A_omega * bump(ax, c_omega);
        b.theta_x[j] = sgn * A_theta * bump(ax, c_theta);
        b.state.theta[j] = A_theta * Bi(ax);
    }
    return b;
}

inline void validate_sec3(const Built& b, double M) {
    const auto& w = b.state.omega;
    const auto& th = b.state.theta;
    require(grid::has_symmetry(w, grid::Symmetry::odd), "invalid-spec", "omega0 not odd");
    require(grid::has_symmetry(b.theta_x, grid::Symmetry::odd), "invalid-spec", "theta0_x not odd");
    require(th.max_abs() <= M * (1 + 1e-12), "invalid-spec", "sup theta0 exceeds M");
    int half = w.size() / 2;
    bool per = w.domain.mode == grid::Mode::periodic;
    for (int j = 0; j < w.size(); ++j) {
        bool pos_half = per ? j < half : j >= half;
        if (pos_half) {
            require(w[j] >= 0 && b.theta_x[j] >= 0, "invalid-spec", "omega0 or theta0_x negative on the half period");
        }
    }
    if (per) {
        require(std::abs(grid::mean(w)) <= 1e-14 * std::max(1.0, w.max_abs()), "invalid-spec", "omega0 mean nonzero");
        // theta0(0) = 0 holds by construction (theta0 = A Bi(|x|), Bi(0) = 0)
    }
}
}  // namespace detail

inline Built build_sec3(const ScenarioSpec& s) {
    require(s.cls == Class::sec3 || s.cls == Class::zero, "invalid-spec", "build_sec3 needs a sec3 spec");
    s.domain.validate();
    require(s.M >= 0 && s.A_omega >= 0, "invalid-spec", "amplitudes must be non-negative");
    double half = s.domain.L / 2;
    double cw = s.c_omega > 0 ? s.c_omega : half, ct = s.c_theta > 0 ? s.c_theta : half;
    require(cw <= half && ct <= half, "invalid-spec", "bump width exceeds L/2");
    double M = s.cls == Class::zero ? 0.0 : s.M;
    double Aw = s.cls == Class::zero ? 0.0 : s.A_omega;
    Built b = detail::assemble(s.domain, s.kernel, M, Aw, cw, ct);
    detail::validate_sec3(b, M);
    b.I0 = diagnostics::compute_I(b.state.theta);
    return b;
}

// ---- perturbations ---------------------------------------------------------

struct Norms {
    double c1 = 0, c2 = 0;
};

namespace detail {
inline Norms fd_norms(const std::function<double(double, double)>& f, double lo, double hi, int n) {
    double h = (hi - lo) / n, s = h / 4;
    Norms r;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double x = lo + (i + 0.5) * h, y = lo + (j + 0.5) * h;
            double f0 = f(x, y);
            double fxp = f(x + s, y), fxm = f(x - s, y), fyp = f(x, y + s), fym = f(x, y - s);
            double fx = (fxp - fxm) / (2 * s), fy = (fyp - fym) / (2 * s);
            double fxx = (fxp - 2 * f0 + fxm) / (s * s), fyy = (fyp - 2 * f0 + fym) / (s * s);
            double fxy = (f(x + s, y + s) - f(x + s, y - s) - f(x - s, y + s) + f(x - s, y - s)) / (4 * s * s);
            double c1 = std::max({std::abs(f0), std::abs(fx), std::abs(fy)});
            r.c1 = std::max(r.c1, c1);
            r.c2 = std::max({r.c2, c1, std::abs(fxx), std::abs(fyy), std::abs(fxy)});
        }
    return r;
}
}  // namespace detail

// Symmetry f(x,y) = f(-x,-y), periodicity (or support in [-1,1]^2) and C^1/C^2
// norm estimates at two resolutions.
inline PerturbationFn validate_perturbation(std::function<double(double, double)> raw, bool periodic, double L,
                                            std::string name = "f", int n = 256) {
    PerturbationFn p;
    p.f = raw;
    p.name = std::move(name);
    p.periodic = periodic;
    p.L = L;
    double lo = periodic ? -L / 2 : -1.5, hi = periodic ? L / 2 : 1.5;
    double h = (hi - lo) / n;
    double fmax = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double x = lo + (i + 0.5) * h, y = lo + (j + 0.5) * h;
            double v = raw(x, y);
            require(std::isfinite(v), "non-smooth", "f is not finite on the validation grid");
            fmax = std::max(fmax, std::abs(v));
            require(std::abs(v - raw(-x, -y)) <= 1e-10, "symmetry-violation", "f(x,y) != f(-x,-y)");
            if (periodic) {
                require(std::abs(v - raw(x + L, y)) <= 1e-10 && std::abs(v - raw(x, y + L)) <= 1e-10,
                        "periodicity-violation", "f is not L-periodic in both variables");
            } else if (std::abs(x) > 1 || std::abs(y) > 1) {
                require(std::abs(v) <= 1e-10, "support-violation", "f must vanish outside [-1,1]^2");
            }
        }
    Norms a = detail::fd_norms(raw, lo, hi, n / 2), b = detail::fd_norms(raw, lo, hi, n);
    auto close = [](double u, double v) { return std::abs(u - v) <= 0.05 * std::max({u, v, 1e-12}); };
    require(close(a.c1, b.c1) && close(a.c2, b.c2), "non-smooth", "norm estimates diverge under refinement");
    p.norm_c1 = b.c1;
    p.norm_c2 = b.c2;
    p.validated = true;
    return p;
}

inline std::shared_ptr<const PerturbationFn> zero_perturbation(double L) {
    auto p = std::make_shared<PerturbationFn>();
    p->name = "zero";
    p->L = L;
    p->validated = true;
    return p;
}

// c cos(2 mu (x - y)); unit_c1 rescales to ||f||_C1 = 1.
inline std::shared_ptr<const PerturbationFn> cos_perturbation(double L, double c = 1.0, bool unit_c1 = false) {
    double mu = pi / L;
    auto raw = [mu, c](double x, double y) { return c * std::cos(2 * mu * (x - y)); };
    PerturbationFn p = validate_perturbation(raw, true, L, "cos");
    if (unit_c1) {
        double k = c / p.norm_c1;
        p = validate_perturbation([mu, k](double x, double y) { return k * std::cos(2 * mu * (x - y)); }, true, L,
                                  "cos");
    }
    return std::make_shared<PerturbationFn>(p);
}

// -log sqrt(sin^2 mu(x-y) + a): HL plus this f is the modified kernel.
inline std::shared_ptr<const PerturbationFn> modified_kernel_perturbation(double L, double a) {
    double mu = pi / L;
    auto raw = [mu, a](double x, double y) {
        double s = std::sin(mu * (x - y));
        return -0.5 * std::log(s * s + a);
    };
    return std::make_shared<PerturbationFn>(validate_perturbation(raw, true, L, "modified"));
}

// ---- smallness constants ---------------------------------------------------

struct SearchOptions {
    int resolution = 64;  // scan points per side of (0, eps]^2
    double rel_width = 1e-3;
};

// Largest eps in a halving-then-bisection search such that pred(eps) holds.
// pred must be down-closed.
inline double largest_admissible(double cap, double floor, double rel, const std::function<bool(double)>& pred) {
    if (pred(cap)) return cap;
    double hi = cap, lo = cap / 2;
    while (lo > floor && !pred(lo)) {
        hi = lo;
        lo /= 2;
    }
    if (lo <= floor) return floor;
    while ((hi - lo) > rel * lo) {
        double mid = 0.5 * (lo + hi);
        (pred(mid) ? lo : hi) = mid;
    }
    return lo;
}

// u < 0 on (0, eps]: log|(tx - ty)/(tx + ty)| + 2 min(x,y) ||f||_C1 < 0 for
// 0 < x, y <= eps, x != y. The mean-value bound uses min(x,y) because
// f(x,y) - f(x,-y) vanishes on both axes.
inline bool eps1_condition(double eps, double norm_c1, double L, int res) {
    double mu = pi / L, h = eps / res;
    for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j) {
            if (i == j) continue;
            double x = (i + 0.5) * h + 0.5 * h * (i + 1 == res), y = (j + 0.5) * h + 0.5 * h * (j + 1 == res);
            double tx = std::tan(mu * x), ty = std::tan(mu * y);
            double v = std::log(std::abs((tx - ty) / (tx + ty))) + 2 * std::min(x, y) * norm_c1;
            if (!(v < 0)) return false;
        }
    return true;
}

inline double estimate_eps1(const PerturbationFn& f, double L, SearchOptions o = {}) {
    double nf = f.is_zero() ? 0.0 : f.norm_c1;
    return largest_admissible(L / 4, 1e-6 * L, o.rel_width,
                              [&](double e) { return eps1_condition(e, nf, L, o.resolution); });
}

// int int [-mu cot mu(x+y) + f_x(x,y) - f_x(x,-y)] w w < 0 needs
// mu cot(mu (x + y)) > 2 ||f||_C1 on (0, eps]^2.
inline bool eps2_condition(double eps, double norm_c1, double L, int res) {
    double mu = pi / L, h = eps / res;
    for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j) {
            double x = (i + 1) * h, y = (j + 1) * h;  // include the corner (eps, eps)
            if (!(mu / std::tan(mu * (x + y)) > 2 * norm_c1)) return false;
        }
    return true;
}

inline double estimate_eps2(const PerturbationFn& f, double L, SearchOptions o = {}) {
    double nf = f.is_zero() ? 0.0 : f.norm_c1;
    return largest_admissible(L / 4, 1e-6 * L, o.rel_width,
                              [&](double e) { return eps2_condition(e, nf, L, o.resolution); });
}

// max over (0, radius]^2 of |h| and |dh/dx|, h = cot(mu x)(f(x,y) - f(x,-y)).
inline double estimate_Cf(const PerturbationFn& f, double L, int resolution = 256, double radius = -1) {
    if (f.is_zero()) return 0.0;
    double R = radius > 0 ? radius : L / 2;
    double mu = pi / L, h = R / resolution, s = h / 4;
    auto hf = [&](double x, double y) { return (f(x, y) - f(x, -y)) / std::tan(mu * x); };
    double c = 0;
    for (int i = 0; i < resolution; ++i)
        for (int j = 0; j < resolution; ++j) {
            double x = (i + 0.5) * h, y = (j + 0.5) * h;
            double v = hf(x, y);
            double dv = (hf(x + s, y) - hf(x - s, y)) / (2 * s);
            c = std::max({c, std::abs(v), std::abs(dv)});
        }
    return c;
}

// C M^2 (1/2 + M/12) + L sqrt(c M^2 + C M^3 / 3) with c = C.
inline double required_I0(double Cf, double M, double L) {
    return Cf * M * M * (0.5 + M / 12) + L * std::sqrt(Cf * M * M + Cf * M * M * M / 3);
}

struct Sec4Constants {
    double eps1 = 0, eps2 = 0, eps = 0, Cf = 0, threshold = 0;
};

inline Sec4Constants sec4_constants(const PerturbationFn& f, double L, double M, SearchOptions o = {},
                                    int cf_resolution = 256) {
    Sec4Constants k;
    k.eps1 = estimate_eps1(f, L, o);
    k.eps2 = estimate_eps2(f, L, o);
    k.eps = std::min(k.eps1, k.eps2) / 2;
    k.Cf = estimate_Cf(f, L, cf_resolution, k.eps);
    k.threshold = required_I0(k.Cf, M, L);
    return k;
}

// Data compressed into [0, eps]. theta0's transition layer is halved until
// I(0) reaches the threshold or the layer would drop below 8 cells.
inline Built build_sec4(const ScenarioSpec& s, const PerturbationFn& f, double threshold, double eps1, double eps2) {
    require(s.cls == Class::sec4, "invalid-spec", "build_sec4 needs a sec4 spec");
    s.domain.validate();
    double eps = s.eps > 0 ? s.eps : std::min(eps1, eps2) / 2;
    require(eps <= std::min(eps1, eps2), "eps-too-large",
            "support radius exceeds the admissible eps (negativity of u near 0 and the mass bound need eps <= "
            "min(eps1, eps2))");
    double dx = s.domain.dx();
    require(eps >= 8 * dx, "invalid-spec", "support radius below 8 grid cells; raise N");
    double cw = s.c_omega > 0 ? std::min(s.c_omega, eps) : eps;
    double ct = s.c_theta > 0 ? std::min(s.c_theta, eps) : eps;
    Built b;
    int k = 0;
    while (true) {
        b = detail::assemble(s.domain, s.kernel, s.M, s.A_omega, cw, ct);
        detail::validate_sec3(b, s.M);
        b.I0 = diagnostics::compute_I(b.state.theta);
        if (b.I0 >= threshold || ct / 2 < 8 * dx) break;
        ct /= 2;
        ++k;
    }
    b.compressions = k;
    b.threshold = threshold;
    b.threshold_met = b.I0 >= threshold;
    b.eps = eps;
    if (!b.threshold_met) b.notes.push_back("I(0) threshold not reached before the 8-cell resolution guard");
    // discrete support check
    for (int j = 0; j < s.domain.N / 2; ++j) {
        double x = s.domain.node(j);
        if (x > eps)
            require(b.state.omega[j] == 0 && b.theta_x[j] == 0, "support-violation", "data leaks beyond eps");
    }
    (void)f;
    return b;
}

inline Built build_realline(const ScenarioSpec& s) {
    require(s.cls == Class::realline, "invalid-spec", "build_realline needs a realline spec");
    require(s.domain.mode == grid::Mode::realline, "invalid-spec", "real-line domain required");
    s.domain.validate();
    require(s.domain.L > 1 + 2 * s.domain.dx(), "invalid-spec", "half-width must exceed the unit support");
    double cw = s.c_omega > 0 ? std::min(s.c_omega, 1.0) : 1.0;
    double ct = s.c_theta > 0 ? std::min(s.c_theta, 1.0) : 1.0;
    Built b = detail::assemble(s.domain, s.kernel, s.M, s.A_omega, cw, ct);
    detail::validate_sec3(b, s.M);
    double I = 0;
    for (int j = s.domain.N / 2; j < s.domain.N; ++j) I += b.state.theta[j] / s.domain.node(j);
    b.I0 = I * s.domain.dx();
    return b;
}

// u(x) < 0 at every sample in (0, eps] (direct evaluation at t = 0).
inline bool velocity_negative_near_zero(const SystemState& st, double eps) {
    auto u = biot_savart::velocity(st.omega, st.spec, st.table.get());
    for (int j = 0; j < st.omega.size() / 2; ++j) {
        double x = st.domain().node(j);
        if (x <= eps && !(u[j] < 0)) return false;
    }
    return true;
}

}  // namespace hlb::scenarios
