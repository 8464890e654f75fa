#pragma once
// Time integration of  w_t + u w_x = theta_x,  theta_t + u theta_x = 0.
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hlb/biot_savart.hpp"
#include "hlb/errors.hpp"
#include "hlb/grid.hpp"
#include "hlb/kernels.hpp"

namespace hlb::evolution {

using grid::DomainConfig;
using grid::GridField;
using grid::pi;
using kernels::KernelSpec;

struct SystemState {
    double t = 0;
    GridField omega, theta;
    KernelSpec spec;
    bool odd = true;  // omega odd, theta_x odd
    std::shared_ptr<const biot_savart::PerturbationTable> table;

    const DomainConfig& domain() const { return omega.domain; }
};

struct StepControl {
    double cfl = 0.4;
    double dt_min = 1e-10;
    double bkm_stop = 20;
    double t_max = 1;
    double dealias = 2.0 / 3.0;
    double ux_factor = 0.5;  // dt <= ux_factor / max(1, max|u_x|)

    void validate() const {
        require(cfl > 0 && cfl < 1, "invalid-config", "cfl must lie in (0,1)");
        require(dt_min > 0 && bkm_stop > 0 && t_max > 0 && ux_factor > 0, "invalid-config",
                "step controls must be positive");
        require(dealias > 0 && dealias <= 1, "invalid-config", "dealias must lie in (0,1]");
    }
};

// Everything the diagnostics need at one instant, in label coordinates:
// samples sit at x_j = phi(alpha_j) with alpha_j the staggered nodes and
// jac_j = dphi/dalpha (x = alpha, jac = 1 on a fixed grid).
struct Profile {
    DomainConfig domain;
    KernelSpec spec;
    double t = 0;
    std::vector<double> x, jac, omega, theta;
    std::vector<double> dtheta;  // d theta / d alpha
    std::vector<double> u, du;   // u and du/dalpha
    double dI_dt = 0, dJ_dt = 0;  // exact rates of the discrete I, J along the scheme
    double max_u = 0, max_ux = 0;

    int size() const { return domain.N; }
    double h() const { return domain.dx(); }
    // quadrature weights for integrals over (0, L/2), or (0, X) on the line
    const std::vector<double>& hw() const { return grid::half_period_weights(domain); }
    bool in_half(int j) const {
        return domain.mode == grid::Mode::periodic ? j < domain.N / 2 : j >= domain.N / 2;
    }
    // cot(mu x) on the period, 1/x on the line.
    double weight(double xv) const {
        return domain.mode == grid::Mode::periodic ? 1.0 / std::tan(domain.mu() * xv) : 1.0 / xv;
    }
    double dweight(double xv) const {
        if (domain.mode == grid::Mode::realline) return -1.0 / (xv * xv);
        double s = std::sin(domain.mu() * xv);
        return -domain.mu() / (s * s);
    }
};

struct StepStats {
    double mean_drift = 0;     // |mean w| before re-projection
    double sym_defect = 0;     // relative odd/even defect before re-projection
};

enum class Termination { running, t_max, bkm_stop, dt_floor, nan };

inline std::string to_string(Termination t) {
    switch (t) {
        case Termination::running: return "running";
        case Termination::t_max: return "t-max";
        case Termination::bkm_stop: return "bkm-stop";
        case Termination::dt_floor: return "dt-floor";
        case Termination::nan: return "nan";
    }
    return "?";
}

struct DiagnosticsSample {
    double t = 0, I = 0, J = 0, bkm = 0, max_ux = 0, max_omega = 0, mass_half = 0, supp_edge = 0;
    long step = 0;
};

// ---- sample-level functionals shared by every scheme -----------------------

inline double functional_I(const Profile& p) {
    const auto& w = p.hw();
    double s = 0;
    for (int j = 0; j < p.size(); ++j)
        if (w[j] != 0) s += w[j] * p.jac[j] * p.theta[j] * p.weight(p.x[j]);
    return s;
}

inline double functional_J(const Profile& p) {
    const auto& w = p.hw();
    double s = 0;
    for (int j = 0; j < p.size(); ++j)
        if (w[j] != 0) s += w[j] * p.jac[j] * p.theta[j] * p.omega[j] * p.weight(p.x[j]);
    return 2.0 / pi * s;
}

inline double mass_half(const Profile& p) {
    const auto& w = p.hw();
    double s = 0;
    for (int j = 0; j < p.size(); ++j) s += w[j] * p.jac[j] * p.omega[j];
    return s;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double supp_edge(const Profile& p) {
    double thr = 1e-12 * max_abs(p.omega);
    double e = 0;
    for (int j = 0; j < p.size(); ++j)
        if (p.in_half(j) && std::abs(p.omega[j]) > thr && p.omega[j] != 0) e = std::max(e, std::abs(p.x[j]));
    return e;
}

inline DiagnosticsSample make_sample(const Profile& p, double bkm, long step) {
    DiagnosticsSample s;
    s.t = p.t;
    s.I = functional_I(p);
    s.J = functional_J(p);
    s.bkm = bkm;
    s.max_ux = p.max_ux;
    s.max_omega = max_abs(p.omega);
    s.mass_half = mass_half(p);
    s.supp_edge = supp_edge(p);
    s.step = step;
    return s;
}

// ---- Eulerian pseudo-spectral scheme ---------------------------------------

namespace detail {
inline std::vector<double> dealiased_product(const std::vector<double>& a, const std::vector<double>& b,
                                             double frac) {
    int n = static_cast<int>(a.size());
    std::vector<double> p(n);
    for (int i = 0; i < n; ++i) p[i] = a[i] * b[i];
    int kmax = static_cast<int>(std::floor(frac * n / 2.0));
    return fft::apply_multiplier(p, [&](int k) { return k > kmax ? 0.0 : 1.0; });
}

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}
}  // namespace detail

struct Rates {
    GridField domega, dtheta;
};

struct EulerianEval {
    GridField u, ux, omega_x, theta_x;
    Rates rates;
};

inline EulerianEval evaluate(const SystemState& s, double dealias = 2.0 / 3.0) {
    EulerianEval e;
    e.u = biot_savart::velocity(s.omega, s.spec, s.table.get());
    bool per = s.domain().mode == grid::Mode::periodic;
    e.ux = per ? grid::spectral_derivative(e.u) : biot_savart::velocity_gradient(s.omega, s.spec);
    e.omega_x = grid::derivative(s.omega);
    e.theta_x = grid::derivative(s.theta);
    int n = s.omega.size();
    std::vector<double> uw, ut;
    if (per) {
        uw = detail::dealiased_product(e.u.values, e.omega_x.values, dealias);
        ut = detail::dealiased_product(e.u.values, e.theta_x.values, dealias);
    } else {
        uw.resize(n);
        ut.resize(n);
        for (int i = 0; i < n; ++i) {
            uw[i] = e.u[i] * e.omega_x[i];
            ut[i] = e.u[i] * e.theta_x[i];
        }
    }
    e.rates.domega = GridField(s.domain());
    e.rates.dtheta = GridField(s.domain());
    for (int i = 0; i < n; ++i) {
        e.rates.domega[i] = -uw[i] + e.theta_x[i];
        e.rates.dtheta[i] = -ut[i];
    }
    return e;
}

inline Rates rhs(const SystemState& s, double dealias = 2.0 / 3.0) { return evaluate(s, dealias).rates; }

struct EulerianScheme {
    using State = SystemState;
    double dealias = 2.0 / 3.0;
    static constexpr bool advective = true;

    Profile profile(const State& s) const {
        auto e = evaluate(s, dealias);
        Profile p;
        p.domain = s.domain();
        p.spec = s.spec;
        p.t = s.t;
        p.x = grid::make_grid(p.domain);
        p.jac.assign(p.size(), 1.0);
        p.omega = s.omega.values;
        p.theta = s.theta.values;
        p.dtheta = e.theta_x.values;
        p.u = e.u.values;
        p.du = e.ux.values;
        p.max_u = max_abs(p.u);
        p.max_ux = max_abs(p.du);
        const auto& hw = p.hw();
        double dI = 0, dJ = 0;
        for (int j = 0; j < p.size(); ++j) {
            if (hw[j] == 0) continue;
            double w = hw[j] * p.weight(p.x[j]);
            dI += e.rates.dtheta[j] * w;
            dJ += (e.rates.dtheta[j] * p.omega[j] + p.theta[j] * e.rates.domega[j]) * w;
        }
        p.dI_dt = dI;
        p.dJ_dt = 2.0 / pi * dJ;
        return p;
    }

    std::pair<State, StepStats> step(const State& s, double dt) const {
        require(dt > 0, "invalid-config", "dt must be positive");
        int n = s.omega.size();
        auto axpy = [&](const State& base, const Rates& k, double c) {
            State r = base;
            for (int i = 0; i < n; ++i) {
                r.omega[i] += c * k.domega[i];
                r.theta[i] += c * k.dtheta[i];
            }
            r.t = base.t + c;
            return r;
        };
        Rates k1 = rhs(s, dealias);
        Rates k2 = rhs(axpy(s, k1, dt / 2), dealias);
        Rates k3 = rhs(axpy(s, k2, dt / 2), dealias);
        Rates k4 = rhs(axpy(s, k3, dt), dealias);
        State r = s;
        for (int i = 0; i < n; ++i) {
            r.omega[i] += dt / 6 * (k1.domega[i] + 2 * k2.domega[i] + 2 * k3.domega[i] + k4.domega[i]);
            r.theta[i] += dt / 6 * (k1.dtheta[i] + 2 * k2.dtheta[i] + 2 * k3.dtheta[i] + k4.dtheta[i]);
        }
        r.t = s.t + dt;
        if (!r.omega.finite() || !r.theta.finite()) fail("nan-detected", "non-finite field after step");
        StepStats st;
        bool per = s.domain().mode == grid::Mode::periodic;
        if (per) st.mean_drift = std::abs(grid::mean(r.omega));
        if (s.odd) {
            double so = grid::symmetry_defect(r.omega, grid::Symmetry::odd) / std::max(r.omega.max_abs(), 1e-300);
            double se = grid::symmetry_defect(r.theta, grid::Symmetry::even) / std::max(r.theta.max_abs(), 1e-300);
            st.sym_defect = std::max(r.omega.max_abs() > 0 ? so : 0.0, r.theta.max_abs() > 0 ? se : 0.0);
            if (per) {
                r.omega = grid::project_odd(r.omega);
            } else {
                for (int i = 0; i < n; ++i) r.omega[i] = 0.5 * (r.omega[i] - r.omega[n - 1 - i]);
            }
            r.theta = grid::project_even(r.theta);
        } else if (per) {
            double m = grid::mean(r.omega);
            for (double& v : r.omega.values) v -= m;
        }
        return {std::move(r), st};
    }

    double time(const State& s) const { return s.t; }
};

inline std::pair<SystemState, StepStats> step(const SystemState& s, double dt) {
    return EulerianScheme{}.step(s, dt);
}

// min(cfl dx / max|u|, ux_factor / max(1, max|u_x|), t_max - t)
inline double adaptive_dt(double t, double max_u, double max_ux, double dx, const StepControl& c,
                          bool advective = true) {
    double dt = c.ux_factor / std::max(1.0, max_ux);
    if (advective && max_u > 0) dt = std::min(dt, c.cfl * dx / max_u);
    return std::min(dt, c.t_max - t);
}

inline double adaptive_dt(const SystemState& s, const StepControl& c) {
    auto p = EulerianScheme{c.dealias}.profile(s);
    return adaptive_dt(s.t, p.max_u, p.max_ux, s.domain().dx(), c);
}

// ---- run loop --------------------------------------------------------------

struct Trajectory {
    std::vector<DiagnosticsSample> samples;
    Termination reason = Termination::running;
    long steps = 0;
    double t_end = 0, bkm = 0;
    double max_mean_drift = 0, max_sym_defect = 0;
    std::vector<double> dts;
    std::string message;
};

// Observer sees (state, profile, step index) after every accepted step and at t = t0.
template <class Scheme>
using Observer = std::function<void(const typename Scheme::State&, const Profile&, long)>;

template <class Scheme>
Trajectory run(const Scheme& scheme, typename Scheme::State state, const StepControl& c, int diag_every,
               const Observer<Scheme>& observe = {}) {
    c.validate();
    require(diag_every >= 1, "invalid-config", "diag_every >= 1");
    Trajectory tr;
    Profile prof;
    try {
        prof = scheme.profile(state);
    } catch (const Error& e) {
        if (e.code() != "nan-detected") throw;
        tr.message = e.what();
        tr.reason = Termination::nan;
        tr.t_end = scheme.time(state);
        return tr;
    }
    double dx = prof.domain.dx();
    tr.samples.push_back(make_sample(prof, 0.0, 0));
    if (observe) observe(state, prof, 0);
    auto finish = [&](Termination why) {
        tr.reason = why;
        tr.t_end = scheme.time(state);
        if (tr.samples.back().step != tr.steps) tr.samples.push_back(make_sample(prof, tr.bkm, tr.steps));
        return tr;
    };
    while (true) {
        double t = scheme.time(state);
        if (t >= c.t_max) return finish(Termination::t_max);
        if (tr.bkm >= c.bkm_stop) return finish(Termination::bkm_stop);
        double dt = adaptive_dt(t, prof.max_u, prof.max_ux, dx, c, Scheme::advective);
        bool clipped = dt >= c.t_max - t;
        if (dt < c.dt_min) return finish(Termination::dt_floor);
        double mux_old = prof.max_ux;
        try {
            auto [next, st] = scheme.step(state, dt);
            if (clipped) next.t = c.t_max;
            state = std::move(next);
            tr.max_mean_drift = std::max(tr.max_mean_drift, st.mean_drift);
            tr.max_sym_defect = std::max(tr.max_sym_defect, st.sym_defect);
            prof = scheme.profile(state);
        } catch (const Error& e) {
            if (e.code() != "nan-detected") throw;
            tr.message = e.what();
            tr.reason = Termination::nan;
            tr.t_end = scheme.time(state);
            return tr;
        }
        if (!std::isfinite(prof.max_ux)) {
            tr.reason = Termination::nan;
            tr.t_end = scheme.time(state);
            return tr;
        }
        tr.dts.push_back(dt);
        tr.bkm += 0.5 * dt * (mux_old + prof.max_ux);
        ++tr.steps;
        if (observe) observe(state, prof, tr.steps);
        if (tr.steps % diag_every == 0) tr.samples.push_back(make_sample(prof, tr.bkm, tr.steps));
    }
}

}  // namespace hlb::evolution
