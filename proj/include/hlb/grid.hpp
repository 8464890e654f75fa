#pragma once
// Staggered uniform grids, midpoint quadrature, symmetry projection and
// spectral calculus on periodic samples.
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "hlb/errors.hpp"
#include "hlb/fft.hpp"

namespace hlb::grid {

inline constexpr double pi = std::numbers::pi;

enum class Mode { periodic, realline };

inline std::string to_string(Mode m) { return m == Mode::periodic ? "periodic" : "real-line"; }

struct DomainConfig {
    double L = 1.0;  // period, or half-width X in real-line mode
    int N = 64;
    Mode mode = Mode::periodic;

    double mu() const { return pi / L; }
    double length() const { return mode == Mode::periodic ? L : 2.0 * L; }
    double dx() const { return length() / N; }
    double left() const { return mode == Mode::periodic ? 0.0 : -L; }
    double node(int j) const { return left() + (j + 0.5) * dx(); }
    // Sample index of the reflection x -> -x.
    int mirror(int j) const { return N - 1 - j; }

    void validate() const {
        require(std::isfinite(L) && L > 0, "invalid-config", "L must be positive");
        require(N >= 2 && N % 2 == 0, "invalid-config", "N must be even and >= 2");
    }
    bool operator==(const DomainConfig&) const = default;
};

inline std::vector<double> make_grid(const DomainConfig& cfg) {
    cfg.validate();
    std::vector<double> x(cfg.N);
    for (int j = 0; j < cfg.N; ++j) x[j] = cfg.node(j);
    return x;
}

enum class Symmetry { odd, even, none };

inline constexpr double tol_sym = 1e-12;

struct GridField {
    DomainConfig domain;
    std::vector<double> values;

    GridField() = default;
    explicit GridField(const DomainConfig& d) : domain(d), values(d.N, 0.0) {}
    GridField(const DomainConfig& d, std::vector<double> v) : domain(d), values(std::move(v)) {
        require(static_cast<int>(values.size()) == d.N, "invalid-config", "field length != N");
    }
    template <class Fn>
    static GridField sample(const DomainConfig& d, Fn&& f) {
        GridField g(d);
        for (int j = 0; j < d.N; ++j) g.values[j] = f(d.node(j));
        return g;
    }

    int size() const { return domain.N; }
    double& operator[](int j) { return values[j]; }
    double operator[](int j) const { return values[j]; }

    double max_abs() const {
        double m = 0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
    bool finite() const {
        return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
    }
};

// Largest |v(x) + s v(-x)| over mirror pairs: s=+1 measures the odd defect,
// s=-1 the even defect.
inline double symmetry_defect(const GridField& f, Symmetry s) {
    if (s == Symmetry::none) return 0.0;
    double sign = s == Symmetry::odd ? 1.0 : -1.0;
    double d = 0;
    for (int j = 0; j < f.size(); ++j)
        d = std::max(d, std::abs(f[j] + sign * f[f.domain.mirror(j)]));
    return d;
}

inline bool has_symmetry(const GridField& f, Symmetry s, double tol = tol_sym) {
    return symmetry_defect(f, s) <= tol * std::max(f.max_abs(), 1e-300);
}

// Midpoint rule over [p, q] with each cell weighted by its overlap, which
// makes the rule exactly additive over adjacent sub-intervals.
inline double integrate(const GridField& f, double p, double q) {
    require(q > p, "empty-interval", "integrate needs q > p");
    const auto& d = f.domain;
    double lo = d.left(), hi = d.left() + d.length();
    require(p >= lo - 1e-12 * d.length() && q <= hi + 1e-12 * d.length(), "invalid-config",
            "integration interval outside domain");
    double h = d.dx();
    double s = 0;
    int j0 = std::max(0, static_cast<int>(std::floor((p - lo) / h)));
    int j1 = std::min(d.N - 1, static_cast<int>(std::floor((q - lo) / h)));
    for (int j = j0; j <= j1; ++j) {
        double a = lo + j * h, b = a + h;
        double w = std::min(b, q) - std::max(a, p);
        if (w > 0) s += w * f[j];
    }
    return s;
}

inline double integrate(const GridField& f) {
    double s = 0;
    for (double v : f.values) s += v;
    return s * f.domain.dx();
}

inline double mean(const GridField& f) { return integrate(f) / f.domain.length(); }

// Weights W with sum_j W_j f_j = int_0^{L/2} f for every trigonometric
// polynomial of degree < N/2 sampled on the full period (the midpoint rule
// restricted to half a period is only second order). On the truncated line:
// plain midpoint weights on x > 0.
inline const std::vector<double>& half_period_weights(const DomainConfig& d) {
    static std::mutex mtx;
    static std::map<std::pair<double, int>, std::vector<double>> cache[2];
    int m = d.mode == Mode::periodic ? 0 : 1;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(d.L, d.N);
    auto it = cache[m].find(key);
    if (it != cache[m].end()) return it->second;
    int n = d.N;
    double h = d.dx();
    std::vector<double> w(n, 0.0);
    if (m == 1) {
        for (int j = n / 2; j < n; ++j) w[j] = h;
    } else {
        double kappa = 2.0 * pi / d.L;
        // sum over odd k of (4 / (k kappa)) sin(2 pi k (j + 1/2) / N), plus the Nyquist cosine
        double ny = (h / pi) * (1.0 - std::cos(pi * n / 2.0));
        for (int j = 0; j < n; ++j) {
            double s = d.L / 2;
            for (int k = 1; k < n / 2; k += 2) s += 4.0 / (k * kappa) * std::sin(2.0 * pi * k * (j + 0.5) / n);
            s += (j % 2 == 0 ? 1.0 : -1.0) * ny;
            w[j] = s / n;
        }
    }
    return cache[m].emplace(key, std::move(w)).first->second;
}

// int_0^{L/2} f (periodic) or int_0^X f (line).
inline double integrate_half(const GridField& f) {
    const auto& w = half_period_weights(f.domain);
    double s = 0;
    for (int j = 0; j < f.size(); ++j) s += w[j] * f[j];
    return s;
}

inline GridField project_odd(const GridField& f) {
    require(f.domain.mode == Mode::periodic, "invalid-config", "project_odd needs periodic mode");
    GridField g(f.domain);
    for (int j = 0; j < f.size(); ++j) g[j] = 0.5 * (f[j] - f[f.domain.mirror(j)]);
    return g;
}

inline GridField project_even(const GridField& f) {
    GridField g(f.domain);
    for (int j = 0; j < f.size(); ++j) g[j] = 0.5 * (f[j] + f[f.domain.mirror(j)]);
    return g;
}

inline GridField spectral_derivative(const GridField& f) {
    require(f.domain.mode == Mode::periodic, "invalid-config",
            "spectral_derivative needs periodic mode");
    int n = f.size();
    double k0 = 2.0 * pi / f.domain.L;
    auto d = fft::apply_multiplier(f.values, [&](int k) {
        return k == n / 2 ? fft::cplx(0.0) : fft::cplx(0.0, k * k0);
    });
    return GridField(f.domain, std::move(d));
}

// Fourth-order centered differences; samples beyond the ends repeat the edge
// value (fields on the truncated line are constant outside the support).
inline GridField fd4_derivative(const GridField& f) {
    int n = f.size();
    double h = f.domain.dx();
    auto at = [&](int j) { return f[std::clamp(j, 0, n - 1)]; };
    GridField g(f.domain);
    for (int j = 0; j < n; ++j)
        g[j] = (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2)) / (12.0 * h);
    return g;
}

inline GridField derivative(const GridField& f) {
    return f.domain.mode == Mode::periodic ? spectral_derivative(f) : fd4_derivative(f);
}

// Trigonometric interpolant of periodic staggered samples, evaluated at x.
// The Nyquist mode is carried as cos(pi (x/h - 1/2)), which vanishes at 0.
class TrigInterpolant {
public:
    explicit TrigInterpolant(const GridField& f) : d_(f.domain), c_(fft::rfft(f.values)) {
        require(d_.mode == Mode::periodic, "invalid-config", "interpolation needs periodic mode");
    }
    double operator()(double x) const { return eval(x, 0); }
    double derivative(double x) const { return eval(x, 1); }

private:
    double eval(double x, int order) const {
        int n = d_.N;
        double h = d_.dx();
        double theta = 2.0 * pi * (x / h - 0.5) / n;  // phase per unit mode
        double s = order == 0 ? c_[0].real() : 0.0;
        for (int k = 1; k < n / 2; ++k) {
            fft::cplx e(std::cos(k * theta), std::sin(k * theta));
            if (order == 0) {
                s += 2.0 * (c_[k] * e).real();
            } else {
                s += 2.0 * (c_[k] * e * fft::cplx(0.0, 2.0 * pi * k / d_.L)).real();
            }
        }
        double ny = c_[n / 2].real();
        double arg = pi * (x / h - 0.5);
        s += order == 0 ? ny * std::cos(arg) : -ny * std::sin(arg) * pi / h;
        return s / n;
    }

    DomainConfig d_;
    std::vector<fft::cplx> c_;
};

inline double interpolate(const GridField& f, double x) { return TrigInterpolant(f)(x); }

}  // namespace hlb::grid
