#pragma once
// omega -> u under every kernel family, by Fourier multipliers and by direct
// (singularity-corrected) quadrature.
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hlb/errors.hpp"
#include "hlb/fft.hpp"
#include "hlb/grid.hpp"
#include "hlb/kernels.hpp"
#include "hlb/parallel.hpp"

namespace hlb::biot_savart {

using grid::DomainConfig;
using grid::GridField;
using grid::pi;
using kernels::KernelSpec;

namespace detail {
inline void check_mean_zero(const GridField& w) {
    require(w.domain.mode == grid::Mode::periodic, "invalid-config", "periodic mode required");
    require(w.finite(), "nan-detected", "non-finite vorticity");
    double m = std::abs(grid::mean(w));
    require(m <= 1e-12 * std::max(w.max_abs(), 1e-300) || w.max_abs() == 0, "mean-not-zero",
            "omega must have zero mean over the period");
}

// e^{-beta} with cosh(beta) = 1 + 2a, written to avoid cancellation for large a.
inline double exp_minus_beta(double a) {
    double r = std::sqrt(a * a + a);
    return 1.0 / (1.0 + 2.0 * a + 2.0 * r);
}
}  // namespace detail

// Periodic HL law: u_n = -(L / 2 pi |n|) w_n, u_0 = -(L log 2 / pi) w_0.
inline GridField velocity_hl_spectral(const GridField& omega) {
    detail::check_mean_zero(omega);
    double L = omega.domain.L;
    auto u = fft::apply_multiplier(omega.values, [&](int k) {
        return k == 0 ? -L * std::log(2.0) / pi : -L / (2 * pi * k);
    });
    return GridField(omega.domain, std::move(u));
}

// Multiplier of the modified kernel, -(L / 2 pi |n|) (1 - e^{-|n| beta}).
inline double modified_multiplier(int k, double L, double a) {
    double eb = detail::exp_minus_beta(a);
    if (k == 0) {
        // mean of (1/2 pi) log(sin^2/(sin^2 + a)) over a period
        double beta = -std::log(eb);
        return -L * beta / (2 * pi);
    }
    return -L / (2 * pi * k) * (-std::expm1(k * std::log(eb)));
}

inline GridField velocity_modified(const GridField& omega, double a) {
    detail::check_mean_zero(omega);
    require(a > 0, "invalid-config", "a must be positive");
    double L = omega.domain.L;
    auto u = fft::apply_multiplier(omega.values, [&](int k) { return modified_multiplier(k, L, a); });
    return GridField(omega.domain, std::move(u));
}

// Circular midpoint convolution h sum_j k(x_i - x_j) v_j, via FFT of the
// sampled kernel (identical to the direct double loop up to round-off).
template <class Kern>
std::vector<double> periodic_convolution(const GridField& v, Kern&& kern) {
    const auto& d = v.domain;
    int n = d.N;
    double h = d.dx();
    std::vector<double> ks(n);
    for (int m = 0; m < n; ++m) ks[m] = kern(m * h);
    auto kh = fft::rfft(ks);
    auto vh = fft::rfft(v.values);
    for (int k = 0; k <= n / 2; ++k) kh[k] *= vh[k] * h;
    return fft::irfft(kh, n);
}

// Second route for the modified law: HL multiplier plus midpoint convolution
// with the smooth correction -(1/2 pi) log(sin^2 mu z + a).
inline GridField velocity_modified_quadrature(const GridField& omega, double a) {
    GridField u = velocity_hl_spectral(omega);
    double mu = omega.domain.mu();
    auto c = periodic_convolution(omega, [&](double z) {
        double s = std::sin(mu * z);
        return -std::log(s * s + a) / (2 * pi);
    });
    for (int i = 0; i < u.size(); ++i) u[i] += c[i];
    return u;
}

// Dense table f(x_i, x_j) built once per run.
class PerturbationTable {
public:
    PerturbationTable(const DomainConfig& d, const kernels::PerturbationFn& f) : n_(d.N), t_(size_t(d.N) * d.N) {
        auto x = grid::make_grid(d);
        parallel_for(n_, [&](int i) {
            for (int j = 0; j < n_; ++j) t_[size_t(i) * n_ + j] = f(x[i], x[j]);
        });
    }
    double operator()(int i, int j) const { return t_[size_t(i) * n_ + j]; }
    int size() const { return n_; }

private:
    int n_;
    std::vector<double> t_;
};

// (1/pi) h sum_j f(x_i, x_j) w_j
inline std::vector<double> perturbation_velocity(const GridField& omega, const PerturbationTable& t) {
    int n = omega.size();
    require(t.size() == n, "f-invalid", "perturbation table size mismatch");
    double h = omega.domain.dx();
    std::vector<double> u(n);
    parallel_for(n, [&](int i) {
        double s = 0;
        for (int j = 0; j < n; ++j) s += t(i, j) * omega[j];
        u[i] = s * h / pi;
    });
    return u;
}

inline GridField velocity_perturbed(const GridField& omega, const PerturbationTable& t) {
    GridField u = velocity_hl_spectral(omega);
    auto up = perturbation_velocity(omega, t);
    for (int i = 0; i < u.size(); ++i) u[i] += up[i];
    return u;
}

inline GridField velocity_perturbed(const GridField& omega, const kernels::PerturbationFn& f) {
    require(f.validated || f.is_zero(), "f-invalid", "perturbation not validated");
    if (f.is_zero()) return velocity_hl_spectral(omega);
    return velocity_perturbed(omega, PerturbationTable(omega.domain, f));
}

// ---- real line -------------------------------------------------------------

namespace detail {
// log|sin(pi z / P) / z|: the smooth gap between the P-periodic log-sine
// kernel and log|z|, finite for |z| < P.
inline double log_sine_gap(double z, double P) {
    if (z == 0) return std::log(pi / P);
    return std::log(std::abs(std::sin(pi * z / P) / z));
}

inline void check_support(const GridField& w) {
    int n = w.size();
    double tol = 0.0;
    for (int j : {0, 1, n - 2, n - 1})
        require(std::abs(w[j]) <= tol, "support-overflow", "omega reaches the truncation edge");
}

inline double smooth_realline_kernel(const KernelSpec& spec, double x, double y) {
    double v = 0;
    if (spec.family == kernels::Family::modifiedHL) v -= std::log((x - y) * (x - y) + spec.a) / 2;
    if (spec.family == kernels::Family::perturbed && spec.f) v += (*spec.f)(x, y);
    return v;
}
}  // namespace detail

// u(x) = (1/pi) int [log|x-y| + smooth(x,y)] w(y) dy. The data are zero
// padded onto a period P = 2 * (2X), where log|sin(pi z/P)| has the HL
// multiplier; the smooth remainder log|z| - log|sin(pi z/P)| and any smooth
// kernel part go through the midpoint rule, so both pieces stay spectral.
inline GridField velocity_realline(const GridField& omega, const KernelSpec& spec) {
    require(omega.domain.mode == grid::Mode::realline, "invalid-config", "real-line mode required");
    detail::check_support(omega);
    const auto& d = omega.domain;
    int n = d.N;
    double h = d.dx(), P = 2 * d.length();
    std::vector<double> pad(2 * n, 0.0);
    std::copy(omega.values.begin(), omega.values.end(), pad.begin());
    auto up = fft::apply_multiplier(pad, [&](int k) {
        return k == 0 ? -P * std::log(2.0) / pi : -P / (2 * pi * k);
    });
    std::vector<double> gap(n);
    for (int m = 0; m < n; ++m) gap[m] = h * detail::log_sine_gap(m * h, P) / pi;
    auto x = grid::make_grid(d);
    GridField u(d);
    bool smooth = spec.family != kernels::Family::HL;
    parallel_for(n, [&](int i) {
        double s = 0;
        for (int j = 0; j < n; ++j) {
            if (omega[j] == 0) continue;
            double k = -gap[std::abs(i - j)];
            if (smooth) k += h * detail::smooth_realline_kernel(spec, x[i], x[j]) / pi;
            s += k * omega[j];
        }
        u[i] = up[i] + s;
    });
    return u;
}

inline GridField velocity(const GridField& omega, const KernelSpec& spec,
                          const PerturbationTable* table = nullptr) {
    if (omega.domain.mode == grid::Mode::realline) return velocity_realline(omega, spec);
    switch (spec.family) {
        case kernels::Family::HL: return velocity_hl_spectral(omega);
        case kernels::Family::modifiedHL: return velocity_modified(omega, spec.a);
        case kernels::Family::perturbed:
            if (table) return velocity_perturbed(omega, *table);
            return velocity_perturbed(omega, *spec.f);
    }
    return GridField(omega.domain);
}

// Periodic: spectral derivative of u. Real line: discrete Hilbert part with
// weights log|(m+1/2)/(m-1/2)| plus the differentiated smooth kernel.
inline GridField velocity_gradient(const GridField& omega, const KernelSpec& spec,
                                   const PerturbationTable* table = nullptr) {
    if (omega.domain.mode == grid::Mode::periodic)
        return grid::spectral_derivative(velocity(omega, spec, table));
    detail::check_support(omega);
    const auto& d = omega.domain;
    int n = d.N;
    double h = d.dx();
    std::vector<double> w(n);
    w[0] = 0;
    for (int m = 1; m < n; ++m) w[m] = std::log((m + 0.5) / (m - 0.5));
    auto x = grid::make_grid(d);
    double fd = 1e-5 * d.L;
    GridField ux(d);
    parallel_for(n, [&](int i) {
        double s = 0;
        for (int j = 0; j < n; ++j) {
            if (omega[j] == 0) continue;
            double k = i >= j ? w[i - j] : -w[j - i];
            if (spec.family == kernels::Family::modifiedHL) {
                double z = x[i] - x[j];
                k -= h * z / (z * z + spec.a);
            } else if (spec.family == kernels::Family::perturbed && spec.f) {
                k += h * ((*spec.f)(x[i] + fd, x[j]) - (*spec.f)(x[i] - fd, x[j])) / (2 * fd);
            }
            s += k * omega[j];
        }
        ux[i] = s / pi;
    });
    return ux;
}

// ---- weighted velocity u cot(mu x) on (0, L/2) -----------------------------

// Sampling of a periodic odd configuration on uniform staggered labels:
// position x_j, Jacobian dx/dalpha, and w_j. On a fixed grid x = nodes and
// jac = 1; along a flow map x = phi(alpha).
struct MappedSamples {
    DomainConfig domain;
    std::vector<double> x, jac, omega;
};

// (1/2pi) int_0^{L/2} F(x,y,a) w(y) cot(mu y) dy at the half-period samples.
// a = +inf selects the HL kernel (F -> log(p/q) tan/tan). The log singularity
// is removed in label space: sum_{j != i} log sin^2(mu h (i-j)) g_j + D g_i
// with D = -2 h log(2N) integrates the singular part exactly for constant g.
inline std::vector<double> cot_weighted_velocity(const MappedSamples& s, double a) {
    const auto& d = s.domain;
    int n = d.N, half = n / 2;
    double mu = d.mu(), h = d.dx();
    double D = -2.0 * h * std::log(2.0 * n);
    bool hl = std::isinf(a);
    auto SR = [&](double z) {  // (S + R)(z)
        double s2 = std::sin(mu * z);
        s2 *= s2;
        return hl ? std::log(s2) : -std::log1p(a / s2);
    };
    std::vector<double> cot(half), g(half);
    for (int j = 0; j < half; ++j) {
        cot[j] = 1.0 / std::tan(mu * s.x[j]);
        g[j] = s.omega[j] * s.jac[j];
    }
    std::vector<double> out(half);
    parallel_for(half, [&](int i) {
        double xi = s.x[i];
        double acc = 0;
        for (int j = 0; j < half; ++j) {
            if (j == i || g[j] == 0) continue;
            double xj = s.x[j];
            double p = std::sin(mu * (xi - xj)), q = std::sin(mu * (xi + xj));
            p *= p;
            q *= q;
            // F(x_i, x_j) w_j cot_j jac_j == lam * g_j * cot_i
            double lam = hl ? std::log(p / q) : std::log1p(a / q) - std::log1p(a / p);
            acc += h * g[j] * lam * cot[i];
        }
        double diag = D + h * (2.0 * std::log(s.jac[i]) - (hl ? 0.0 : std::log(a)) - SR(2.0 * xi));
        out[i] = (acc + cot[i] * g[i] * diag) / (2 * pi);
    });
    return out;
}

inline std::vector<double> cot_weighted_velocity(const GridField& omega, double a, double L) {
    require(omega.domain.mode == grid::Mode::periodic && omega.domain.L == L, "invalid-config",
            "periodic omega with matching L required");
    require(grid::has_symmetry(omega, grid::Symmetry::odd, 1e-10), "symmetry-violation",
            "omega must be odd");
    MappedSamples s{omega.domain, grid::make_grid(omega.domain), std::vector<double>(omega.size(), 1.0),
                    omega.values};
    return cot_weighted_velocity(s, a);
}

// ---- velocity at moving points ----------------------------------------------

// u at positions phi_i = phi(alpha_i) carried by uniform labels, with
// g = w * dphi/dalpha the label-space vorticity density. The HL part is split
// as (1/pi) log|sin mu(alpha_i - alpha_j)| (Fourier multiplier in alpha) plus
// the smooth remainder (1/pi) log|sin mu(phi_i - phi_j) / sin mu(alpha_i - alpha_j)|,
// whose diagonal limit is (1/pi) log phi'_i. The modified correction and f are
// smooth and summed by the midpoint rule.
inline std::vector<double> velocity_mapped(const DomainConfig& d, const std::vector<double>& phi,
                                           const std::vector<double>& jac, const std::vector<double>& g,
                                           const KernelSpec& spec) {
    require(d.mode == grid::Mode::periodic, "invalid-config", "flow-map velocity is periodic only");
    int n = d.N;
    double L = d.L, mu = d.mu(), h = d.dx();
    auto u = fft::apply_multiplier(g, [&](int k) { return k == 0 ? -L * std::log(2.0) / pi : -L / (2 * pi * k); });
    std::vector<double> sn(n), cs(n), T2(n), ljac(n);
    for (int j = 0; j < n; ++j) {
        sn[j] = std::sin(mu * phi[j]);
        cs[j] = std::cos(mu * phi[j]);
        double t = std::sin(pi * j / n);
        T2[j] = t * t;
        ljac[j] = std::log(jac[j]);
    }
    bool mod = spec.family == kernels::Family::modifiedHL;
    bool pert = spec.family == kernels::Family::perturbed && spec.f && !spec.f->is_zero();
    double a = spec.a;
    parallel_for(n, [&](int i) {
        double acc = 0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            double S = sn[i] * cs[j] - cs[i] * sn[j];
            double S2 = S * S;
            double t2 = T2[i > j ? i - j : j - i];
            acc += g[j] * (mod ? std::log(S2 / (t2 * (S2 + a))) : std::log(S2 / t2));
        }
        acc += g[i] * (mod ? 2.0 * ljac[i] - std::log(a) : 2.0 * ljac[i]);
        double val = acc * h / (2 * pi);
        if (pert) {
            double sf = 0;
            for (int j = 0; j < n; ++j) sf += (*spec.f)(phi[i], phi[j]) * g[j];
            val += sf * h / pi;
        }
        u[i] += val;
    });
    return u;
}

}  // namespace hlb::biot_savart
