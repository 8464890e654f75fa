#pragma once
// Dense grid scans of the kernel sign/monotonicity/positivity properties.
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hlb/kernels.hpp"

namespace hlb::lemma {

using grid::pi;

struct Extremum {
    double value = std::numeric_limits<double>::quiet_NaN();
    double x = 0, y = 0;
    long scanned = 0, excluded = 0;
    double typical = 0;  // median |value| over the scanned set
};

// One sub-property evaluated at one a (or a-free).
struct Check {
    std::string name;        // e.g. "F<0 on x<y"
    std::string region;
    double a = std::numeric_limits<double>::quiet_NaN();
    int resolution = 0;
    double delta = 0;
    Extremum ext;
    double estimated_constant = std::numeric_limits<double>::quiet_NaN();
    double tolerance = 0;
    bool pass = false;
    bool degenerate = false;
    double refinement_ratio = std::numeric_limits<double>::quiet_NaN();
    double fine_value = std::numeric_limits<double>::quiet_NaN();
    std::string note;
};

struct LemmaReport {
    std::string property_id;
    std::vector<Check> checks;
    std::vector<std::string> annotations;

    bool pass() const {
        return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }
    double max_refinement_ratio() const {
        double m = 0;
        for (const auto& c : checks)
            if (std::isfinite(c.refinement_ratio)) m = std::max(m, c.refinement_ratio);
        return m;
    }
    // The check with the smallest slack decides the headline numbers.
    const Check& worst() const {
        for (const auto& c : checks)
            if (!c.pass) return c;
        return checks.front();
    }
};

inline constexpr double refinement_limit = 0.10;

enum class Part { lower, upper, all };  // y < x, x < y, whole square

struct ScanGrid {
    double R;        // side of the square (0, R)^2
    int n;           // points per side
    double delta;    // exclusion radius
    Part part = Part::all;
    bool exclude_far_edges = true;  // also exclude x = R, y = R
};

// Row-major scan; ties keep the first point visited.
template <class Fn>
Extremum scan(const ScanGrid& g, Fn&& fn, bool maximize) {
    Extremum e;
    double h = g.R / g.n;
    std::vector<double> mags;
    mags.reserve(size_t(g.n) * g.n / (g.part == Part::all ? 1 : 2));
    bool have = false;
    for (int i = 0; i < g.n; ++i) {
        double x = (i + 0.5) * h;
        for (int j = 0; j < g.n; ++j) {
            double y = (j + 0.5) * h;
            if (g.part == Part::lower && !(y < x)) continue;
            if (g.part == Part::upper && !(x < y)) continue;
            double edge = std::min(x, y);
            if (g.exclude_far_edges) edge = std::min({edge, g.R - x, g.R - y});
            if (edge < g.delta || std::abs(x - y) < g.delta || x == y) {
                ++e.excluded;
                continue;
            }
            double v = fn(x, y);
            ++e.scanned;
            mags.push_back(std::abs(v));
            if (!have || (maximize ? v > e.value : v < e.value)) {
                e.value = v;
                e.x = x;
                e.y = y;
                have = true;
            }
        }
    }
    if (!mags.empty()) {
        auto mid = mags.begin() + mags.size() / 2;
        std::nth_element(mags.begin(), mid, mags.end());
        e.typical = *mid;
    }
    return e;
}

// Relative change of the extremum under doubling, measured against the
// larger of |extremum| and the median magnitude of the scanned function (the
// infimum of several properties is 0, approached at the excluded corners).
inline double refinement_ratio(const Extremum& coarse, const Extremum& fine) {
    double s = std::max({std::abs(coarse.value), coarse.typical, 1e-300});
    return std::abs(fine.value - coarse.value) / s;
}

template <class Fn>
Check run_check(std::string name, std::string region, double a, ScanGrid g, Fn&& fn, bool maximize,
                const std::function<bool(const Extremum&)>& ok, bool refine) {
    Check c;
    c.name = std::move(name);
    c.region = std::move(region);
    c.a = a;
    c.resolution = g.n;
    c.delta = g.delta;
    c.ext = scan(g, fn, maximize);
    c.pass = c.ext.scanned > 0 && ok(c.ext);
    if (refine) {
        ScanGrid g2 = g;
        g2.n = 2 * g.n;
        g2.delta = g.delta / 2;  // one spacing of the finer grid
        Extremum f = scan(g2, fn, maximize);
        c.fine_value = f.value;
        c.refinement_ratio = refinement_ratio(c.ext, f);
        if (c.refinement_ratio > refinement_limit) {
            c.pass = false;
            c.note = "under-resolved near excluded singular lines";
        }
    }
    return c;
}

inline std::vector<std::string> case_annotations(double a, double L) {
    double mu = pi / L, as = std::min(a, 1.0 / 16);
    return {"a*=" + std::to_string(as), "sqrt(a*)/mu=" + std::to_string(std::sqrt(as) / mu),
            "sqrt(a*)/(2mu)=" + std::to_string(std::sqrt(as) / (2 * mu))};
}

struct ScanOptions {
    int resolution = 400;
    bool refine = true;
    double delta = -1;  // < 0: one grid spacing
};

inline double spacing_delta(const ScanOptions& o, double R) { return o.delta >= 0 ? o.delta : R / o.resolution; }

inline LemmaReport scan_F_sign(double a, double L, ScanOptions o = {}) {
    LemmaReport r{"F_sign", {}, case_annotations(a, L)};
    ScanGrid g{L / 2, o.resolution, spacing_delta(o, L / 2), Part::upper};
    auto fn = [&](double x, double y) { return kernels::eval_F_periodic(x, y, a, L); };
    Check c = run_check("max F on 0<x<y<L/2", "0<x<y<L/2", a, g, fn, true,
                        [](const Extremum& e) { return e.value < 0; }, o.refine && a > 0);
    c.estimated_constant = -c.ext.value;
    if (a <= 0) {
        c.degenerate = true;
        c.pass = false;
        c.note = "a = 0: F vanishes identically";
    }
    r.checks.push_back(c);
    return r;
}

inline LemmaReport scan_F_monotone(double a, double L, ScanOptions o = {}, double hstep = -1) {
    LemmaReport r{"F_monotone", {}, case_annotations(a, L)};
    ScanGrid g{L / 2, o.resolution, spacing_delta(o, L / 2), Part::lower};
    double hs = hstep > 0 ? hstep : (L / 2) / o.resolution / 4;
    require(hs <= (L / 2) / o.resolution / 4 * (1 + 1e-12), "invalid-config", "h must be <= spacing/4");
    auto fn = [&](double x, double y) {
        return (kernels::eval_F_periodic(x + hs, y, a, L) - kernels::eval_F_periodic(x - hs, y, a, L)) / (2 * hs);
    };
    Check c = run_check("min dF/dx on 0<y<x<L/2", "0<y<x<L/2", a, g, fn, false,
                        [](const Extremum& e) { return e.value >= -1e-8 * std::max(1.0, e.typical); },
                        o.refine && a > 0);
    c.estimated_constant = c.ext.value;
    if (a <= 0) {
        c.degenerate = true;
        c.note = "a = 0: differences vanish identically";
    }
    r.checks.push_back(c);
    return r;
}

inline LemmaReport scan_G_positive(double a, double L, ScanOptions o = {}) {
    LemmaReport r{"G_positive", {}, case_annotations(a, L)};
    ScanGrid g{L / 2, o.resolution, spacing_delta(o, L / 2), Part::all};
    auto fn = [&](double x, double y) { return kernels::eval_G_periodic(x, y, a, L); };
    Check c = run_check("min G on (0,L/2)^2", "(0,L/2)^2", a, g, fn, false,
                        [](const Extremum& e) { return e.value > -1e-10 * std::max(1.0, e.typical); },
                        o.refine && a > 0);
    c.estimated_constant = c.ext.value;
    if (a <= 0) {
        c.degenerate = true;
        c.pass = false;
        c.note = "a = 0: G vanishes identically";
    }
    r.checks.push_back(c);
    return r;
}

// Forward differences in a across an increasing sequence of a values.
inline LemmaReport scan_daG(const std::vector<double>& as, double L, ScanOptions o = {}) {
    LemmaReport r{"dG_da", {}, {}};
    require(as.size() >= 2 && std::is_sorted(as.begin(), as.end()), "invalid-config",
            "scan_daG needs an increasing a sequence");
    ScanGrid g{L / 2, o.resolution, spacing_delta(o, L / 2), Part::all};
    for (size_t k = 0; k + 1 < as.size(); ++k) {
        double a0 = as[k], a1 = as[k + 1];
        auto fn = [&](double x, double y) {
            return kernels::eval_G_periodic(x, y, a1, L) - kernels::eval_G_periodic(x, y, a0, L);
        };
        Check c = run_check("min G(a+) - G(a) on (0,L/2)^2", "(0,L/2)^2", a0, g, fn, false,
                            [](const Extremum& e) { return e.value >= -1e-9; }, false);
        c.estimated_constant = c.ext.value;
        c.note = "a step " + std::to_string(a0) + " -> " + std::to_string(a1);
        r.checks.push_back(c);
    }
    return r;
}

inline LemmaReport scan_K_bounds(double L, ScanOptions o = {}) {
    LemmaReport r{"K_bounds", {}, {}};
    double R = L / 2, d = spacing_delta(o, R);
    auto K = [&](double x, double y) { return kernels::eval_K(x, y, L); };
    auto tol = [](const Extremum& e) { return e.value >= -1e-10; };
    Check ca = run_check("min K on (0,L/2)^2", "(0,L/2)^2", NAN, {R, o.resolution, d, Part::all}, K, false, tol,
                         o.refine);
    Check cb = run_check("min K-2 on 0<x<y<L/2", "0<x<y<L/2", NAN, {R, o.resolution, d, Part::upper},
                         [&](double x, double y) { return K(x, y) - 2.0; }, false, tol, o.refine);
    double mu = pi / L;
    Check cc = run_check("min K-2s^2 on 0<y<x<L/2", "0<y<x<L/2", NAN, {R, o.resolution, d, Part::lower},
                         [&](double x, double y) {
                             double s = std::tan(mu * y) / std::tan(mu * x);
                             return K(x, y) - 2 * s * s;
                         },
                         false, tol, o.refine);
    for (Check* c : {&ca, &cb, &cc}) c->estimated_constant = c->ext.value;
    r.checks = {ca, cb, cc};
    return r;
}

enum class Geometry { periodic, realline };

// Periodic: |A2|/scale, |A0|/scale <= 1e-9 and A1 >= 32 - 1e-6.
// Real line: the same with A1 >= -1e-9.
inline LemmaReport scan_quad_coeffs(double R, ScanOptions o, Geometry geo) {
    bool per = geo == Geometry::periodic;
    LemmaReport r{per ? "quad_coeffs_periodic" : "quad_coeffs_realline", {}, {}};
    double side = per ? R / 2 : R;  // R is L (periodic) or X (real line)
    ScanGrid g{side, o.resolution, spacing_delta(o, side), Part::all, per};
    auto coeffs = [&](double x, double y) {
        return per ? kernels::quad_coeffs_periodic(x, y, R) : kernels::quad_coeffs_realline(x, y);
    };
    std::string region = per ? "(0,L/2)^2" : "(0,X)^2";
    Check c2 = run_check("max |A2|/scale", region, NAN, g,
                         [&](double x, double y) {
                             auto q = coeffs(x, y);
                             return std::abs(q.A2) / q.scale;
                         },
                         true, [](const Extremum& e) { return e.value <= 1e-9; }, false);
    Check c0 = run_check("max |A0|/scale", region, NAN, g,
                         [&](double x, double y) {
                             auto q = coeffs(x, y);
                             return std::abs(q.A0) / q.scale;
                         },
                         true, [](const Extremum& e) { return e.value <= 1e-9; }, false);
    double bound = per ? 32.0 - 1e-6 : -1e-9;
    Check c1 = run_check(per ? "min A1 (>= 32)" : "min A1 (>= 0)", region, NAN, g,
                         [&](double x, double y) { return coeffs(x, y).A1; }, false,
                         [bound](const Extremum& e) { return e.value >= bound; }, false);
    for (Check* c : {&c2, &c0, &c1}) {
        c->estimated_constant = c->ext.value;
        c->note = "excluded points: " + std::to_string(c->ext.excluded);
    }
    r.checks = {c2, c1, c0};
    return r;
}

inline LemmaReport scan_realline_lemma(double a, double X, ScanOptions o = {}) {
    LemmaReport r{"realline_lemma", {}, {}};
    double d1 = spacing_delta(o, 1.0), dX = spacing_delta(o, X);
    bool ref = o.refine && a > 0;
    Check ca = run_check("max F on 0<x<y<1", "0<x<y<1", a, {1.0, o.resolution, d1, Part::upper, false},
                         [&](double x, double y) { return kernels::eval_F_realline(x, y, a); }, true,
                         [](const Extremum& e) { return e.value < 0; }, ref);
    ca.estimated_constant = -ca.ext.value;
    double hs = X / o.resolution / 4;
    Check cb = run_check("min dF/dx on 0<y<x<X", "0<y<x<X", a, {X, o.resolution, dX, Part::lower, false},
                         [&](double x, double y) {
                             return (kernels::eval_F_realline(x + hs, y, a) - kernels::eval_F_realline(x - hs, y, a)) /
                                    (2 * hs);
                         },
                         false, [](const Extremum& e) { return e.value >= -1e-8 * std::max(1.0, e.typical); }, ref);
    cb.estimated_constant = cb.ext.value;
    Check cc = run_check("min G on (0,X)^2", "(0,X)^2", a, {X, o.resolution, dX, Part::all, false},
                         [&](double x, double y) { return kernels::eval_G_realline(x, y, a); }, false,
                         [](const Extremum& e) { return e.value > -1e-10 * std::max(1.0, e.typical); }, ref);
    cc.estimated_constant = cc.ext.value;
    // g(t) = 2a/(t(t^2+a)) strictly decreasing on (0, 2X)
    Check cg;
    cg.name = "g decreasing on (0,2X)";
    cg.region = "(0,2X)";
    cg.a = a;
    cg.resolution = 4 * o.resolution;
    double worst = std::numeric_limits<double>::infinity();
    int m = 4 * o.resolution;
    for (int k = 0; k + 1 < m; ++k) {
        double t0 = (k + 0.5) * 2 * X / m, t1 = (k + 1.5) * 2 * X / m;
        double diff = kernels::realline_g(t0, a) - kernels::realline_g(t1, a);
        if (diff < worst) {
            worst = diff;
            cg.ext.x = t0;
        }
    }
    cg.ext.value = worst;
    cg.ext.scanned = m - 1;
    cg.estimated_constant = worst;
    cg.pass = a > 0 && worst > 0;
    if (a <= 0) {
        for (Check* c : {&ca, &cb, &cc, &cg}) {
            c->degenerate = true;
            c->note = "a = 0: all quantities vanish";
        }
        ca.pass = cc.pass = cg.pass = false;
    }
    r.checks = {ca, cb, cc, cg};
    return r;
}

// Default suite: one report per property, each covering every a value.
inline std::vector<LemmaReport> default_suite(double L, const std::vector<double>& as, ScanOptions o = {},
                                              double X = 1.0) {
    std::vector<LemmaReport> out;
    auto merge = [&](const std::string& id, auto&& one) {
        LemmaReport r{id, {}, {}};
        for (double a : as) {
            auto s = one(a);
            for (auto& c : s.checks) r.checks.push_back(c);
            for (auto& n : s.annotations) r.annotations.push_back("a=" + std::to_string(a) + ": " + n);
        }
        out.push_back(std::move(r));
    };
    merge("F_sign", [&](double a) { return scan_F_sign(a, L, o); });
    merge("F_monotone", [&](double a) { return scan_F_monotone(a, L, o); });
    merge("G_positive", [&](double a) { return scan_G_positive(a, L, o); });
    std::vector<double> seq = as;
    std::sort(seq.begin(), seq.end());
    // intermediate a values so each forward difference is a modest step
    std::vector<double> fine;
    for (size_t k = 0; k + 1 < seq.size(); ++k)
        for (int m = 0; m < 4; ++m) fine.push_back(seq[k] * std::pow(seq[k + 1] / seq[k], m / 4.0));
    fine.push_back(seq.back());
    out.push_back(scan_daG(fine, L, o));
    out.push_back(scan_K_bounds(L, o));
    out.push_back(scan_quad_coeffs(L, o, Geometry::periodic));
    out.push_back(scan_quad_coeffs(X, o, Geometry::realline));
    merge("realline_lemma", [&](double a) { return scan_realline_lemma(a, X, o); });
    return out;
}

}  // namespace hlb::lemma
