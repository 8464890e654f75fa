#pragma once
// Closed forms for the Hou-Luo family of Biot-Savart kernels and the
// kernel-derived functions F, K, G used by the sign lemmas.
#include <cmath>
#include <functional>
#include <memory>
#include <string>

#include "hlb/errors.hpp"
#include "hlb/grid.hpp"

namespace hlb::kernels {

using grid::pi;

struct PerturbationFn {
    std::function<double(double, double)> f;
    std::string name = "none";
    bool periodic = true;
    double L = 1.0;
    double norm_c1 = 0.0;  // max(sup|f|, sup|f_x|, sup|f_y|)
    double norm_c2 = 0.0;  // adds second derivatives
    bool validated = false;

    double operator()(double x, double y) const { return f ? f(x, y) : 0.0; }
    bool is_zero() const { return !f; }
};

enum class Family { HL, modifiedHL, perturbed };
enum class Geometry { periodic, realline };

inline std::string to_string(Family f) {
    switch (f) {
        case Family::HL: return "hl";
        case Family::modifiedHL: return "modified";
        case Family::perturbed: return "perturbed";
    }
    return "?";
}

struct KernelSpec {
    Family family = Family::HL;
    Geometry geometry = Geometry::periodic;
    double a = 0.0;
    std::shared_ptr<const PerturbationFn> f;

    static KernelSpec hl() { return {}; }
    static KernelSpec modified(double a) {
        require(a > 0, "invalid-config", "modified kernel needs a > 0");
        return {Family::modifiedHL, Geometry::periodic, a, nullptr};
    }
    static KernelSpec perturbed(std::shared_ptr<const PerturbationFn> f) {
        require(f != nullptr, "f-invalid", "perturbed kernel needs f");
        return {Family::perturbed, Geometry::periodic, 0.0, std::move(f)};
    }
};

struct QuadCoeffs {
    double A2 = 0, A1 = 0, A0 = 0;
    double scale = 1;  // magnitude of the largest term entering the coefficients
};

namespace detail {
inline double checked_sin(double z, double L) {
    double s = std::sin(pi * z / L);
    if (std::abs(s) < 1e-300) fail("singular-argument", "sin(mu z) vanishes");
    return s;
}

// Open-region checks shared by F, K, G. delta = 0 only rejects exact hits.
inline void check_half_period(double x, double y, double L, double delta) {
    if (!(x > 0 && x < L / 2 && y > 0 && y < L / 2))
        fail("axis-singularity", "arguments must lie in (0, L/2)");
    if (x == y || std::abs(x - y) < delta) fail("diagonal-singularity", "x too close to y");
    if (std::min({x, y, L / 2 - x, L / 2 - y}) < delta)
        fail("axis-singularity", "argument within exclusion of 0 or L/2");
}

inline void check_positive(double x, double y, double delta) {
    if (!(x > 0 && y > 0)) fail("axis-singularity", "arguments must be positive");
    if (x == y || std::abs(x - y) < delta) fail("diagonal-singularity", "x too close to y");
    if (std::min(x, y) < delta) fail("axis-singularity", "argument within exclusion of 0");
}
}  // namespace detail

inline double k_hl_periodic(double z, double L) {
    return std::log(std::abs(detail::checked_sin(z, L))) / pi;
}

// (1/2pi)[log sin^2 - log(sin^2 + a)], written as -log1p(a/sin^2)/2pi so the
// a -> 0 cancellation is exact.
inline double k_mod_periodic(double z, double L, double a) {
    require(a >= 0, "invalid-config", "a must be non-negative");
    double s = detail::checked_sin(z, L);
    return -std::log1p(a / (s * s)) / (2 * pi);
}

// (cosh(2 mu a) - 1)/2 == sinh(mu a)^2, the second form keeps small a exact.
inline double relabel_a(double a_old, double L) {
    require(a_old >= 0, "invalid-config", "a_old must be non-negative");
    double s = std::sinh(pi * a_old / L);
    return s * s;
}

struct PeriodizationResult {
    double truncated_sum, closed_form, diff;
};

// Image sum of the real-line boundary-layer kernel. Terms are grouped in
// +-n pairs and accumulated from the far end so small terms are not lost.
inline PeriodizationResult periodization_check(double z, double a_old, double L, long n_max) {
    require(n_max >= 1, "invalid-config", "n_max >= 1");
    double frac = z / L - std::round(z / L);
    if (std::abs(frac) < 1e-15) fail("singular-argument", "z is a lattice point");
    double a2 = a_old * a_old;
    auto term = [&](double w) { return -std::log1p(a2 / (w * w)) / (2 * pi); };
    double s = 0;
    for (long n = n_max; n >= 1; --n) s += term(z + n * L) + term(z - n * L);
    s += term(z);
    double closed = k_mod_periodic(z, L, relabel_a(a_old, L));
    return {s, closed, std::abs(s - closed)};
}

// (1/pi) log(|x| / sqrt(x^2 + a^2))
inline double boundary_layer_kernel(double x, double a_old) {
    if (x == 0) fail("singular-argument", "x = 0");
    return -std::log1p(a_old * a_old / (x * x)) / (2 * pi);
}

// Midpoint quadrature of the normal derivative of the half-plane Green's
// function, -(1/pi) y / (x^2 + y^2), over y in [0, a_old].
inline double greens_check(double x, double a_old, long n_quad) {
    if (x == 0) fail("singular-argument", "x = 0");
    require(n_quad >= 1, "invalid-config", "n_quad >= 1");
    if (a_old == 0) return std::abs(boundary_layer_kernel(x, 0));
    double h = a_old / n_quad, s = 0;
    for (long i = 0; i < n_quad; ++i) {
        double y = (i + 0.5) * h;
        s += y / (x * x + y * y);
    }
    return std::abs(-s * h / pi - boundary_layer_kernel(x, a_old));
}

// s log|(s+1)/(s-1)| with s = tan(mu y)/tan(mu x), log1p forms on both sides of s = 1.
inline double K_of_s(double s) {
    if (s > 1) return s * std::log1p(2.0 / (s - 1.0));
    return s * std::log1p(2.0 * s / (1.0 - s));
}

inline double eval_K(double x, double y, double L, double delta = 0.0) {
    detail::check_half_period(x, y, L, delta);
    double mu = pi / L;
    return K_of_s(std::tan(mu * y) / std::tan(mu * x));
}

inline double eval_F_periodic(double x, double y, double a, double L, double delta = 0.0) {
    detail::check_half_period(x, y, L, delta);
    double mu = pi / L;
    double p = std::sin(mu * (x - y)), q = std::sin(mu * (x + y));
    p *= p;
    q *= q;
    return std::tan(mu * y) / std::tan(mu * x) * (std::log1p(a / q) - std::log1p(a / p));
}

inline double eval_G_periodic(double x, double y, double a, double L, double delta = 0.0) {
    detail::check_half_period(x, y, L, delta);
    double mu = pi / L;
    double p = std::sin(mu * (x - y)), q = std::sin(mu * (x + y));
    p *= p;
    q *= q;
    double cx = 1 / std::tan(mu * x), cy = 1 / std::tan(mu * y);
    double lam = std::log1p(a / q) - std::log1p(a / p);
    double rp = a / (p + a), rq = a / (q + a);
    return mu * (-(cx * cx + cy * cy + 2) * lam - 2 * cx * cy * (rp + rq) - 2 * (rp - rq));
}

// Coefficients of the a-polynomial
//   (mu^-1) ((p+a)(q+a))^2 dG/da = A2 a^2 + A1 a + A0,
// each multiplied by the positive prefactor used to normalise it:
// tan tan / (cos cos sin sin) for A2 and A1, and the same divided by p q for A0.
inline QuadCoeffs quad_coeffs_periodic(double x, double y, double L, double delta = 0.0) {
    detail::check_half_period(x, y, L, delta);
    double mu = pi / L;
    double sx = std::sin(mu * x), cxs = std::cos(mu * x);
    double sy = std::sin(mu * y), cys = std::cos(mu * y);
    double p = std::sin(mu * (x - y)), q = std::sin(mu * (x + y));
    p *= p;
    q *= q;
    double cx = cxs / sx, cy = cys / sy;
    double C = cx * cx + cy * cy + 2;
    // Expand C (q-p)(p+a)(q+a) - 2 cx cy [p(q+a)^2 + q(p+a)^2] - 2 [p(q+a)^2 - q(p+a)^2].
    double t2a = C * (q - p), t2b = -2 * cx * cy * (p + q), t2c = -2 * (p - q);
    double t1a = C * (q - p) * (p + q), t1b = -2 * cx * cy * 4 * p * q, t1c = -2 * (2 * p * q - 2 * p * q);
    double t0a = C * (q - p) * p * q, t0b = -2 * cx * cy * (p * q * q + q * p * p),
           t0c = -2 * (p * q * q - q * p * p);
    double pre = (sx / cxs) * (sy / cys) / (cxs * cys * sx * sy);
    QuadCoeffs r;
    r.A2 = pre * (t2a + t2b + t2c);
    r.A1 = pre * (t1a + t1b + t1c);
    r.A0 = pre / (p * q) * (t0a + t0b + t0c);
    r.scale = std::max({pre * std::abs(t2a), pre * std::abs(t2b), pre * std::abs(t2c),
                        pre * std::abs(t1a), pre * std::abs(t1b),
                        pre / (p * q) * std::abs(t0a), pre / (p * q) * std::abs(t0b), 1.0});
    return r;
}

inline double eval_F_realline(double x, double y, double a, double delta = 0.0) {
    detail::check_positive(x, y, delta);
    double dm = (x - y) * (x - y), dp = (x + y) * (x + y);
    return y / x * (std::log1p(a / dp) - std::log1p(a / dm));
}

inline double eval_G_realline(double x, double y, double a, double delta = 0.0) {
    detail::check_positive(x, y, delta);
    double dm = (x - y) * (x - y), dp = (x + y) * (x + y);
    double lam = std::log1p(a / dp) - std::log1p(a / dm);
    return -(1 / (x * x) + 1 / (y * y)) * lam - 2 * a / (x * y * (dm + a)) -
           2 * a / (x * y * (dp + a));
}

// Unscaled coefficients of ((x-y)^2+a)^2 ((x+y)^2+a)^2 dG/da.
inline QuadCoeffs quad_coeffs_realline(double x, double y, double delta = 0.0) {
    detail::check_positive(x, y, delta);
    double dm = (x - y) * (x - y), dp = (x + y) * (x + y);
    double C = 1 / (x * x) + 1 / (y * y), D = 2 / (x * y);
    double t2a = C * (dp - dm), t2b = -D * (dm + dp);
    double t1a = C * (dp - dm) * (dp + dm), t1b = -D * 4 * dm * dp;
    double t0a = C * (dp - dm) * dp * dm, t0b = -D * (dm * dp * dp + dp * dm * dm);
    QuadCoeffs r;
    r.A2 = t2a + t2b;
    r.A1 = t1a + t1b;
    r.A0 = t0a + t0b;
    r.scale = std::max({std::abs(t2a), std::abs(t2b), std::abs(t1a), std::abs(t1b),
                        std::abs(t0a), std::abs(t0b), 1.0});
    return r;
}

// g(t) = 2a / (t (t^2 + a)), decreasing for t > 0.
inline double realline_g(double t, double a) { return 2 * a / (t * (t * t + a)); }

}  // namespace hlb::kernels
