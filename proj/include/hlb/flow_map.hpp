#pragma once
// Flow-map (label-space) integrator for the same system. theta is carried
// exactly as theta0(alpha); the unknowns are the displacement d = phi - alpha
// and w(alpha) = omega(phi(alpha)), with
//   d_t = u(phi),   w_t = theta0'(alpha) / phi'(alpha).
// Gradients that collapse toward the stagnation point in x stay resolved in
// alpha, which is what lets long blow-up runs keep transport invariants.
#include <cmath>
#include <vector>

#include "hlb/biot_savart.hpp"
#include "hlb/evolution.hpp"
#include "hlb/grid.hpp"

namespace hlb::evolution {

struct FlowMapState {
    double t = 0;
    DomainConfig domain;
    KernelSpec spec;
    std::vector<double> d, w;          // displacement, vorticity on labels
    std::vector<double> theta0, dtheta0;  // theta0(alpha), theta0'(alpha)
    bool odd = true;

    const DomainConfig& dom() const { return domain; }
};

// Start a flow map at the identity. dtheta_exact, when given, replaces the
// spectral derivative of theta (scenario builders know it in closed form).
inline FlowMapState flow_map_from(const SystemState& s, const GridField* dtheta_exact = nullptr) {
    require(s.domain().mode == grid::Mode::periodic, "invalid-config", "flow-map scheme is periodic only");
    FlowMapState f;
    f.t = s.t;
    f.domain = s.domain();
    f.spec = s.spec;
    f.d.assign(f.domain.N, 0.0);
    f.w = s.omega.values;
    f.theta0 = s.theta.values;
    f.dtheta0 = dtheta_exact ? dtheta_exact->values : grid::spectral_derivative(s.theta).values;
    f.odd = s.odd;
    return f;
}

struct FlowMapScheme {
    using State = FlowMapState;
    static constexpr bool advective = false;  // no transport term in label space

    struct Eval {
        std::vector<double> phi, jac, g, u, du;
    };

    static std::vector<double> dalpha(const DomainConfig& dom, const std::vector<double>& v) {
        return grid::spectral_derivative(GridField(dom, v)).values;
    }

    Eval eval(const State& s) const {
        const auto& dom = s.domain;
        int n = dom.N;
        Eval e;
        e.phi.resize(n);
        e.g.resize(n);
        e.jac = dalpha(dom, s.d);
        for (int j = 0; j < n; ++j) {
            e.phi[j] = dom.node(j) + s.d[j];
            e.jac[j] += 1.0;
            e.g[j] = s.w[j] * e.jac[j];
        }
        for (double jv : e.jac)
            if (!(jv > 0) || !std::isfinite(jv)) fail("nan-detected", "flow map lost monotonicity");
        e.u = biot_savart::velocity_mapped(dom, e.phi, e.jac, e.g, s.spec);
        e.du = dalpha(dom, e.u);
        return e;
    }

    Profile profile(const State& s) const {
        auto e = eval(s);
        Profile p;
        p.domain = s.domain;
        p.spec = s.spec;
        p.t = s.t;
        p.x = e.phi;
        p.jac = e.jac;
        p.omega = s.w;
        p.theta = s.theta0;
        p.dtheta = s.dtheta0;
        p.u = e.u;
        p.du = e.du;
        p.max_u = max_abs(p.u);
        double mux = 0;
        for (int j = 0; j < p.size(); ++j) mux = std::max(mux, std::abs(e.du[j] / e.jac[j]));
        p.max_ux = mux;
        double mu = p.domain.mu();
        const auto& hw = p.hw();
        double dI = 0, dJ = 0;
        for (int j = 0; j < p.size(); ++j) {
            double cot = 1.0 / std::tan(mu * e.phi[j]);
            double sn = std::sin(mu * e.phi[j]);
            double csc2 = 1.0 / (sn * sn);
            dI += hw[j] * s.theta0[j] * (e.du[j] * cot - mu * e.jac[j] * csc2 * e.u[j]);
            dJ += hw[j] * s.theta0[j] * ((s.dtheta0[j] + s.w[j] * e.du[j]) * cot - mu * e.g[j] * csc2 * e.u[j]);
        }
        p.dI_dt = dI;
        p.dJ_dt = 2.0 / pi * dJ;
        return p;
    }

    struct Deriv {
        std::vector<double> dd, dw;
    };

    Deriv rhs(const State& s) const {
        auto e = eval(s);
        Deriv k;
        k.dd = e.u;
        k.dw.resize(s.domain.N);
        for (int j = 0; j < s.domain.N; ++j) k.dw[j] = s.dtheta0[j] / e.jac[j];
        return k;
    }

    std::pair<State, StepStats> step(const State& s, double dt) const {
        require(dt > 0, "invalid-config", "dt must be positive");
        int n = s.domain.N;
        auto axpy = [&](const Deriv& k, double c) {
            State r = s;
            for (int i = 0; i < n; ++i) {
                r.d[i] += c * k.dd[i];
                r.w[i] += c * k.dw[i];
            }
            r.t = s.t + c;
            return r;
        };
        Deriv k1 = rhs(s);
        Deriv k2 = rhs(axpy(k1, dt / 2));
        Deriv k3 = rhs(axpy(k2, dt / 2));
        Deriv k4 = rhs(axpy(k3, dt));
        State r = s;
        for (int i = 0; i < n; ++i) {
            r.d[i] += dt / 6 * (k1.dd[i] + 2 * k2.dd[i] + 2 * k3.dd[i] + k4.dd[i]);
            r.w[i] += dt / 6 * (k1.dw[i] + 2 * k2.dw[i] + 2 * k3.dw[i] + k4.dw[i]);
        }
        r.t = s.t + dt;
        if (!detail::all_finite(r.d) || !detail::all_finite(r.w)) fail("nan-detected", "non-finite flow map");
        StepStats st;
        // mean of omega over the period, int w phi' dalpha / L
        auto jac = dalpha(s.domain, r.d);
        double m = 0;
        for (int i = 0; i < n; ++i) m += r.w[i] * (1.0 + jac[i]);
        st.mean_drift = std::abs(m * s.domain.dx() / s.domain.L);
        if (s.odd) {
            double md = max_abs(r.d), mw = max_abs(r.w), sd = 0, sw = 0;
            for (int i = 0; i < n; ++i) {
                sd = std::max(sd, std::abs(r.d[i] + r.d[n - 1 - i]));
                sw = std::max(sw, std::abs(r.w[i] + r.w[n - 1 - i]));
            }
            st.sym_defect = std::max(md > 0 ? sd / md : 0.0, mw > 0 ? sw / mw : 0.0);
            for (int i = 0; i < n / 2; ++i) {
                int k = n - 1 - i;
                double a = 0.5 * (r.d[i] - r.d[k]), b = 0.5 * (r.w[i] - r.w[k]);
                r.d[i] = a;
                r.d[k] = -a;
                r.w[i] = b;
                r.w[k] = -b;
            }
        }
        return {std::move(r), st};
    }

    double time(const State& s) const { return s.t; }
};

// Pull the flow-map state back to the fixed grid by inverting phi with Newton
// on its trigonometric interpolant (used for snapshots).
inline SystemState to_eulerian(const FlowMapState& s) {
    const auto& dom = s.domain;
    int n = dom.N;
    grid::TrigInterpolant D(GridField(dom, s.d)), W(GridField(dom, s.w)), T(GridField(dom, s.theta0));
    SystemState r;
    r.t = s.t;
    r.spec = s.spec;
    r.odd = s.odd;
    r.omega = GridField(dom);
    r.theta = GridField(dom);
    for (int j = 0; j < n; ++j) {
        double x = dom.node(j);
        double a = x - D(x);
        for (int it = 0; it < 60; ++it) {
            double f = a + D(a) - x, fp = 1.0 + D.derivative(a);
            double da = f / fp;
            a -= da;
            if (std::abs(da) < 1e-15 * dom.L) break;
        }
        r.omega[j] = W(a);
        r.theta[j] = T(a);
    }
    return r;
}

}  // namespace hlb::evolution
