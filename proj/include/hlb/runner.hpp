#pragma once
// Config files, experiment orchestration and bit-stable output.
#include <fftw3.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/version.hpp>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlb/diagnostics.hpp"
#include "hlb/evolution.hpp"
#include "hlb/flow_map.hpp"
#include "hlb/kernels.hpp"
#include "hlb/lemma_lab.hpp"
#include "hlb/scenarios.hpp"

namespace hlb::runner {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr const char* version = "1.0.0";

// shortest string that parses back to the same double
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline json num(double v) {
    if (std::isfinite(v)) return v;
    return fmt(v);
}

struct RunConfig {
    // [experiment]
    std::string kind = "simulate";
    std::string name = "run";
    // [domain]
    double L = 1.0;
    int N = 256;
    std::string mode = "periodic";
    // [kernel]
    std::string family = "modified";  // hl | modified | perturbed
    double a = 0.1;
    std::string perturbation = "none";  // none | cos | modified
    double f_amplitude = 1.0;
    bool f_unit_c1 = true;
    double f_a = 0.1;
    // [scenario]
    std::string cls = "sec3";  // zero | sec3 | sec4 | realline
    double M = 1.0;
    double A_omega = 1.0;
    double c_omega = -1;
    double c_theta = -1;
    double eps = -1;
    bool require_threshold = false;
    int eps_resolution = 64;
    int cf_resolution = 256;
    // [run]
    std::string scheme = "flow_map";  // flow_map | eulerian
    double t_max = 1.0;
    double bkm_stop = 20;
    double cfl = 0.4;
    double dt_min = 1e-10;
    double ux_factor = 0.05;
    double dealias = 2.0 / 3.0;
    int diag_every = 1;
    int snapshot_every = 0;
    // [lemmas]
    double lem_L = 1.0;
    std::vector<double> lem_a = {0.01, 0.1, 1, 10};
    int lem_resolution = 400;
    bool lem_refine = true;
    double lem_X = 1.0;
    // [ode]
    double ode_C = 1.0;
    double ode_I0 = 1.0;
    double ode_dt = 1e-3;
    // [derive]
    int derive_points = 100;
    long n_max = 10000;
    long n_quad = 10000;
    // [sweep]
    std::string sweep_kind = "simulate";
    std::vector<std::pair<std::string, std::string>> sweep;  // key -> comma list, declaration order
    // command line
    unsigned long seed = 12345;
    int threads = 1;

    template <class V>
    void visit(V&& v) {
        v("experiment.kind", kind);
        v("experiment.name", name);
        v("domain.L", L);
        v("domain.N", N);
        v("domain.mode", mode);
        v("kernel.family", family);
        v("kernel.a", a);
        v("kernel.perturbation", perturbation);
        v("kernel.f_amplitude", f_amplitude);
        v("kernel.f_unit_c1", f_unit_c1);
        v("kernel.f_a", f_a);
        v("scenario.class", cls);
        v("scenario.M", M);
        v("scenario.A_omega", A_omega);
        v("scenario.c_omega", c_omega);
        v("scenario.c_theta", c_theta);
        v("scenario.eps", eps);
        v("scenario.require_threshold", require_threshold);
        v("scenario.eps_resolution", eps_resolution);
        v("scenario.cf_resolution", cf_resolution);
        v("run.scheme", scheme);
        v("run.t_max", t_max);
        v("run.bkm_stop", bkm_stop);
        v("run.cfl", cfl);
        v("run.dt_min", dt_min);
        v("run.ux_factor", ux_factor);
        v("run.dealias", dealias);
        v("run.diag_every", diag_every);
        v("run.snapshot_every", snapshot_every);
        v("lemmas.L", lem_L);
        v("lemmas.a", lem_a);
        v("lemmas.resolution", lem_resolution);
        v("lemmas.refine", lem_refine);
        v("lemmas.X", lem_X);
        v("ode.C", ode_C);
        v("ode.I0", ode_I0);
        v("ode.dt", ode_dt);
        v("derive.points", derive_points);
        v("derive.n_max", n_max);
        v("derive.n_quad", n_quad);
        v("sweep.kind", sweep_kind);
    }
};

// ---- parsing -----------------------------------------------------------------

namespace detail {

inline std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t"), e = s.find_last_not_of(" \t");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline void parse(const std::string& key, const std::string& s, double& out) {
    std::string t = trim(s);
    auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    require(r.ec == std::errc() && r.ptr == t.data() + t.size(), "invalid-config", key + ": not a number: " + s);
}
inline void parse(const std::string& key, const std::string& s, int& out) {
    std::string t = trim(s);
    auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    require(r.ec == std::errc() && r.ptr == t.data() + t.size(), "invalid-config", key + ": not an integer: " + s);
}
inline void parse(const std::string& key, const std::string& s, long& out) {
    std::string t = trim(s);
    auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    require(r.ec == std::errc() && r.ptr == t.data() + t.size(), "invalid-config", key + ": not an integer: " + s);
}
inline void parse(const std::string& key, const std::string& s, bool& out) {
    std::string t = trim(s);
    if (t == "true" || t == "1" || t == "yes") out = true;
    else if (t == "false" || t == "0" || t == "no") out = false;
    else fail("invalid-config", key + ": not a boolean: " + s);
}
inline void parse(const std::string&, const std::string& s, std::string& out) { out = trim(s); }
inline void parse(const std::string& key, const std::string& s, std::vector<double>& out) {
    out.clear();
    for (auto& it : split(s)) {
        double v;
        parse(key, it, v);
        out.push_back(v);
    }
}

inline json to_json(double v) { return num(v); }
inline json to_json(int v) { return v; }
inline json to_json(long v) { return v; }
inline json to_json(bool v) { return v; }
inline json to_json(const std::string& v) { return v; }
inline json to_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

}  // namespace detail

// Set one "section.key" from its textual value.
inline void set_key(RunConfig& c, const std::string& key, const std::string& value) {
    bool found = false;
    c.visit([&](const std::string& k, auto& field) {
        if (k == key) {
            detail::parse(k, value, field);
            found = true;
        }
    });
    require(found, "invalid-config", "unknown key " + key);
}

inline void validate(const RunConfig& c) {
    auto one_of = [](const std::string& v, std::initializer_list<const char*> opts, const std::string& key) {
        for (auto o : opts)
            if (v == o) return;
        fail("invalid-config", key + ": unexpected value '" + v + "'");
    };
    one_of(c.kind, {"simulate", "verify-lemmas", "ode-compare", "sweep", "derive-kernel"}, "experiment.kind");
    one_of(c.mode, {"periodic", "realline"}, "domain.mode");
    one_of(c.family, {"hl", "modified", "perturbed"}, "kernel.family");
    one_of(c.perturbation, {"none", "cos", "modified"}, "kernel.perturbation");
    one_of(c.cls, {"zero", "sec3", "sec4", "realline"}, "scenario.class");
    one_of(c.scheme, {"flow_map", "eulerian"}, "run.scheme");
    one_of(c.sweep_kind, {"simulate", "ode-compare"}, "sweep.kind");
    require(c.L > 0 && std::isfinite(c.L), "invalid-config", "domain.L must be positive");
    require(c.N >= 2 && c.N % 2 == 0, "invalid-config", "domain.N must be even and >= 2");
    require(c.family != "modified" || c.a > 0, "invalid-config", "kernel.a must be positive");
    require(c.family != "perturbed" || c.perturbation != "none" || c.cls == "zero", "invalid-config",
            "perturbed kernel needs kernel.perturbation");
    require(c.M >= 0 && c.A_omega >= 0, "invalid-config", "scenario amplitudes must be non-negative");
    require(c.t_max > 0 && c.bkm_stop > 0 && c.dt_min > 0 && c.ux_factor > 0, "invalid-config",
            "run controls must be positive");
    require(c.cfl > 0 && c.cfl < 1, "invalid-config", "run.cfl must lie in (0,1)");
    require(c.diag_every >= 1 && c.snapshot_every >= 0, "invalid-config", "run.diag_every >= 1");
    require(c.mode != "realline" || c.scheme == "eulerian", "invalid-config", "real-line runs need run.scheme = eulerian");
    require((c.mode == "realline") == (c.cls == "realline") || c.cls == "zero", "invalid-config",
            "scenario.class realline goes with domain.mode realline");
    require(c.cls != "sec4" || c.family == "perturbed", "invalid-config", "sec4 needs kernel.family = perturbed");
    require(c.lem_resolution >= 8 && !c.lem_a.empty() && c.lem_L > 0 && c.lem_X > 0, "invalid-config",
            "lemma settings out of range");
    for (double a : c.lem_a) require(a > 0, "invalid-config", "lemmas.a must be positive");
    require(c.ode_C > 0 && c.ode_I0 > 0 && c.ode_dt > 0, "invalid-config", "ode settings must be positive");
    require(c.derive_points >= 1 && c.n_max >= 1 && c.n_quad >= 1, "invalid-config", "derive settings >= 1");
    require(c.threads >= 0, "invalid-config", "threads >= 0");
}

inline RunConfig load_config(const fs::path& path) {
    require(fs::exists(path), "invalid-config", "config file not found: " + path.string());
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::read_ini(path.string(), pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        fail("invalid-config", e.what());
    }
    RunConfig c;
    for (const auto& [section, body] : pt) {
        require(!body.empty() || body.data().empty(), "invalid-config", "top-level key outside a section: " + section);
        for (const auto& [key, val] : body) {
            if (section == "sweep" && key != "kind") {
                c.sweep.emplace_back(key, val.data());
                continue;
            }
            set_key(c, section + "." + key, val.data());
        }
    }
    validate(c);
    return c;
}

// Every setting, defaults included.
inline json materialize(const RunConfig& c) {
    json j = json::object();
    RunConfig copy = c;
    copy.visit([&](const std::string& k, auto& field) {
        auto dot = k.find('.');
        j[k.substr(0, dot)][k.substr(dot + 1)] = detail::to_json(field);
    });
    json sw = json::object();
    for (auto& [k, v] : c.sweep) sw[k] = v;
    j["sweep"]["grid"] = sw;
    j["cli"]["seed"] = c.seed;
    j["cli"]["threads"] = c.threads;
    return j;
}

// ---- output helpers ------------------------------------------------------------

inline void write_text(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    require(static_cast<bool>(f), "io-error", "cannot write " + p.string());
    f << s;
}

inline void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

inline std::string series_csv(const std::vector<evolution::DiagnosticsSample>& s) {
    std::string out = "t,I,J,bkm,max_ux,max_omega,mass_half,supp_edge\n";
    for (const auto& q : s) {
        for (double v : {q.t, q.I, q.J, q.bkm, q.max_ux, q.max_omega, q.mass_half}) out += fmt(v) + ",";
        out += fmt(q.supp_edge) + "\n";
    }
    return out;
}

inline std::string snapshot_csv(const evolution::Profile& p) {
    std::string out = "x,jac,omega,theta,u\n";
    for (int j = 0; j < p.size(); ++j)
        out += fmt(p.x[j]) + "," + fmt(p.jac[j]) + "," + fmt(p.omega[j]) + "," + fmt(p.theta[j]) + "," + fmt(p.u[j]) +
               "\n";
    return out;
}

inline json report_json(const lemma::LemmaReport& r) {
    json j;
    j["property_id"] = r.property_id;
    j["pass"] = r.pass();
    j["max_refinement_ratio"] = num(r.max_refinement_ratio());
    j["annotations"] = r.annotations;
    if (!r.checks.empty()) {
        // headline: the first failing check, else the first one
        const auto& w = r.worst();
        j["region"] = w.region;
        j["resolution"] = w.resolution;
        j["a"] = num(w.a);
        j["extremal_value"] = num(w.ext.value);
        j["location_x"] = num(w.ext.x);
        j["location_y"] = num(w.ext.y);
        j["estimated_constant"] = num(w.estimated_constant);
        j["refinement_ratio"] = num(w.refinement_ratio);
    }
    json rows = json::array();
    for (const auto& c : r.checks) {
        json k;
        k["property_id"] = r.property_id;
        k["check"] = c.name;
        k["region"] = c.region;
        k["resolution"] = c.resolution;
        k["a"] = num(c.a);
        k["extremal_value"] = num(c.ext.value);
        k["location_x"] = num(c.ext.x);
        k["location_y"] = num(c.ext.y);
        k["estimated_constant"] = num(c.estimated_constant);
        k["pass"] = c.pass;
        k["refinement_ratio"] = num(c.refinement_ratio);
        k["tolerance"] = num(c.tolerance);
        k["degenerate"] = c.degenerate;
        if (!c.note.empty()) k["note"] = c.note;
        rows.push_back(k);
    }
    j["checks"] = rows;
    return j;
}

inline json fit_json(const diagnostics::BlowupFit& f) {
    return {{"T_est", num(f.T_est)}, {"residual", num(f.residual)}, {"failed", f.failed}, {"poor", f.poor},
            {"reason", f.reason}};
}

inline std::string fit_quality(const diagnostics::BlowupFit& f) { return f.failed ? "fit-failed" : f.poor ? "poor" : "ok"; }

// ---- experiments --------------------------------------------------------------

inline kernels::KernelSpec make_kernel(const RunConfig& c, std::shared_ptr<const kernels::PerturbationFn>* fout = nullptr) {
    if (c.family == "hl") return kernels::KernelSpec::hl();
    if (c.family == "modified") return kernels::KernelSpec::modified(c.a);
    std::shared_ptr<const kernels::PerturbationFn> f;
    if (c.perturbation == "cos") f = scenarios::cos_perturbation(c.L, c.f_amplitude, c.f_unit_c1);
    else if (c.perturbation == "modified") f = scenarios::modified_kernel_perturbation(c.L, c.f_a);
    else f = scenarios::zero_perturbation(c.L);
    if (fout) *fout = f;
    return kernels::KernelSpec::perturbed(f);
}

struct SimResult {
    evolution::Trajectory traj;
    scenarios::Built built;
    diagnostics::BlowupFit fit;
    json info;
};

// Builds the scenario from the config and runs it; observer sees every step.
inline SimResult simulate(const RunConfig& c, const fs::path& out,
                          const std::function<void(const evolution::Profile&, long)>& observe = {}) {
    validate(c);
    grid::DomainConfig dom{c.L, c.N, c.mode == "realline" ? grid::Mode::realline : grid::Mode::periodic};
    dom.validate();
    std::shared_ptr<const kernels::PerturbationFn> f;
    scenarios::ScenarioSpec s;
    s.domain = dom;
    s.M = c.M;
    s.A_omega = c.A_omega;
    s.c_omega = c.c_omega;
    s.c_theta = c.c_theta;
    s.eps = c.eps;
    s.kernel = make_kernel(c, &f);
    if (dom.mode == grid::Mode::realline) s.kernel.geometry = kernels::Geometry::realline;
    SimResult r;
    json scen;
    if (c.cls == "sec4") {
        scenarios::SearchOptions so;
        so.resolution = c.eps_resolution;
        auto k = scenarios::sec4_constants(*f, c.L, c.M, so, c.cf_resolution);
        s.cls = scenarios::Class::sec4;
        r.built = scenarios::build_sec4(s, *f, k.threshold, k.eps1, k.eps2);
        require(r.built.threshold_met || !c.require_threshold, "invalid-spec",
                "I(0) below the required threshold at this resolution; raise N");
        scen["eps1"] = num(k.eps1);
        scen["eps2"] = num(k.eps2);
        scen["Cf"] = num(k.Cf);
        scen["f_norm_c1"] = num(f->norm_c1);
    } else if (c.cls == "realline") {
        s.cls = scenarios::Class::realline;
        r.built = scenarios::build_realline(s);
    } else {
        s.cls = c.cls == "zero" ? scenarios::Class::zero : scenarios::Class::sec3;
        r.built = scenarios::build_sec3(s);
    }
    if (f && !f->is_zero() && c.scheme == "eulerian")
        r.built.state.table = std::make_shared<biot_savart::PerturbationTable>(dom, *f);
    scen["class"] = c.cls;
    scen["I0"] = num(r.built.I0);
    scen["threshold"] = num(r.built.threshold);
    scen["threshold_met"] = r.built.threshold_met;
    scen["eps"] = num(r.built.eps);
    scen["c_omega"] = num(r.built.c_omega);
    scen["c_theta"] = num(r.built.c_theta);
    scen["compressions"] = r.built.compressions;
    scen["notes"] = r.built.notes;

    evolution::StepControl ctl;
    ctl.cfl = c.cfl;
    ctl.dt_min = c.dt_min;
    ctl.bkm_stop = c.bkm_stop;
    ctl.t_max = c.t_max;
    ctl.dealias = c.dealias;
    ctl.ux_factor = c.ux_factor;

    auto snap = [&](const evolution::Profile& p, long step) {
        if (c.snapshot_every > 0 && !out.empty() && step % c.snapshot_every == 0) {
            char name[48];
            std::snprintf(name, sizeof name, "step_%08ld.csv", step);
            write_text(out / "snapshots" / name, snapshot_csv(p));
        }
        if (observe) observe(p, step);
    };
    if (c.scheme == "flow_map") {
        auto fm = evolution::flow_map_from(r.built.state, &r.built.theta_x);
        evolution::FlowMapScheme sch;
        r.traj = evolution::run(sch, fm, ctl, c.diag_every,
                                evolution::Observer<evolution::FlowMapScheme>(
                                    [&](const auto&, const evolution::Profile& p, long k) { snap(p, k); }));
    } else {
        evolution::EulerianScheme sch{c.dealias};
        r.traj = evolution::run(sch, r.built.state, ctl, c.diag_every,
                                evolution::Observer<evolution::EulerianScheme>(
                                    [&](const auto&, const evolution::Profile& p, long k) { snap(p, k); }));
    }
    std::vector<double> ts, Is;
    for (const auto& q : r.traj.samples) {
        ts.push_back(q.t);
        Is.push_back(q.I);
    }
    r.fit = diagnostics::estimate_blowup_time(ts, Is);
    json res;
    res["termination"] = evolution::to_string(r.traj.reason);
    res["t_end"] = num(r.traj.t_end);
    res["steps"] = r.traj.steps;
    res["bkm"] = num(r.traj.bkm);
    res["max_mean_drift"] = num(r.traj.max_mean_drift);
    res["max_symmetry_defect"] = num(r.traj.max_sym_defect);
    res["blowup_fit"] = fit_json(r.fit);
    if (!r.traj.message.empty()) res["message"] = r.traj.message;
    r.info["scenario"] = scen;
    r.info["result"] = res;
    if (!out.empty()) write_text(out / "series.csv", series_csv(r.traj.samples));
    return r;
}

inline json verify_lemmas(const RunConfig& c, const fs::path& out) {
    lemma::ScanOptions o;
    o.resolution = c.lem_resolution;
    o.refine = c.lem_refine;
    auto reps = lemma::default_suite(c.lem_L, c.lem_a, o, c.lem_X);
    json summary = json::array();
    for (const auto& r : reps) {
        write_json(out / "reports" / (r.property_id + ".json"), report_json(r));
        summary.push_back({{"property_id", r.property_id}, {"pass", r.pass()},
                           {"max_refinement_ratio", num(r.max_refinement_ratio())}});
    }
    return summary;
}

inline json ode_compare(const RunConfig& c, const fs::path& out) {
    auto r = diagnostics::ode_comparator(c.ode_C, c.ode_I0, c.ode_dt);
    auto h = diagnostics::ode_comparator(c.ode_C, c.ode_I0, c.ode_dt / 2);
    json j{{"C", num(c.ode_C)}, {"I0", num(c.ode_I0)}, {"dt", num(c.ode_dt)}, {"T_blowup", num(r.T_blowup)},
           {"T_blowup_half_dt", num(h.T_blowup)}, {"steps", r.steps}, {"fit", fit_json(r.fit)}};
    write_json(out / "reports" / "ode.json", j);
    return j;
}

inline json derive_kernel(const RunConfig& c, const fs::path& out) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> uz(0.0, 1.0), ua(0.01, 0.1), ux(0.1, 3.0), ug(0.05, 1.0);
    double worst_p = 0, worst_g = 0;
    json rows = json::array();
    for (int k = 0; k < c.derive_points; ++k) {
        double z = c.L * (0.01 + 0.98 * uz(rng)), ao = ua(rng);
        auto p = kernels::periodization_check(z, ao, c.L, c.n_max);
        double x = ux(rng), ag = ug(rng);
        double g = kernels::greens_check(x, ag, c.n_quad);
        worst_p = std::max(worst_p, p.diff);
        worst_g = std::max(worst_g, g);
        rows.push_back({{"z", num(z)}, {"a_old", num(ao)}, {"periodization_diff", num(p.diff)}, {"x", num(x)},
                        {"a_green", num(ag)}, {"greens_diff", num(g)}});
    }
    json j{{"points", c.derive_points}, {"n_max", c.n_max}, {"n_quad", c.n_quad},
           {"max_periodization_diff", num(worst_p)}, {"max_greens_diff", num(worst_g)},
           {"periodization_pass", worst_p <= 1e-6}, {"greens_pass", worst_g <= 1e-8}, {"rows", rows}};
    write_json(out / "reports" / "derive_kernel.json", j);
    return j;
}

inline json base_manifest(const RunConfig& c) {
    json m;
    m["version"] = version;
    m["libraries"]["fftw"] = std::string(fftw_version);
    m["libraries"]["boost"] = std::string(BOOST_LIB_VERSION);
    m["config"] = materialize(c);
    return m;
}

struct SweepRow {
    std::vector<std::pair<std::string, std::string>> params;
    std::string status, reason;
    double bkm = 0, t_end = 0, T_est = std::numeric_limits<double>::quiet_NaN();
    std::string quality;
};

inline std::vector<std::vector<std::pair<std::string, std::string>>> sweep_grid(const RunConfig& c) {
    std::vector<std::vector<std::pair<std::string, std::string>>> rows{{}};
    for (const auto& [k, v] : c.sweep) {
        auto vals = detail::split(v);
        require(!vals.empty(), "invalid-config", "sweep." + k + " has no values");
        std::vector<std::vector<std::pair<std::string, std::string>>> next;
        for (const auto& r : rows)
            for (const auto& x : vals) {
                auto q = r;
                q.emplace_back(k, x);
                next.push_back(q);
            }
        rows = std::move(next);
    }
    return rows;
}

inline std::vector<SweepRow> sweep(const RunConfig& c, const fs::path& out) {
    auto grid = sweep_grid(c);
    // validate every row before running anything
    std::vector<RunConfig> cfgs;
    for (const auto& params : grid) {
        RunConfig r = c;
        r.kind = c.sweep_kind;
        r.sweep.clear();
        for (const auto& [k, v] : params) set_key(r, k, v);
        validate(r);
        cfgs.push_back(r);
    }
    std::vector<SweepRow> rows(grid.size());
    int nt = c.threads;
    auto one = [&](int i) {
        char name[32];
        std::snprintf(name, sizeof name, "row_%03d", i);
        fs::path dir = out / "rows" / name;
        SweepRow& row = rows[i];
        row.params = grid[i];
        try {
            if (cfgs[i].kind == "simulate") {
                auto r = simulate(cfgs[i], dir);
                json m = base_manifest(cfgs[i]);
                m.update(r.info);
                write_json(dir / "manifest.json", m);
                row.reason = evolution::to_string(r.traj.reason);
                row.bkm = r.traj.bkm;
                row.t_end = r.traj.t_end;
                row.T_est = r.fit.T_est;
                row.quality = fit_quality(r.fit);
                row.status = r.traj.reason == evolution::Termination::nan ? "numerical-failure" : "ok";
            } else {
                auto j = ode_compare(cfgs[i], dir);
                json m = base_manifest(cfgs[i]);
                m["result"] = j;
                write_json(dir / "manifest.json", m);
                auto r = diagnostics::ode_comparator(cfgs[i].ode_C, cfgs[i].ode_I0, cfgs[i].ode_dt);
                row.reason = "ode";
                row.T_est = r.T_blowup;
                row.quality = fit_quality(r.fit);
                row.status = "ok";
            }
        } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
        }
    };
    if (nt == 1) {
        for (int i = 0; i < static_cast<int>(rows.size()); ++i) one(i);
    } else {
        parallel_for(static_cast<int>(rows.size()), one, 1);
    }
    std::string csv = "row";
    for (const auto& [k, v] : c.sweep) csv += "," + k;
    csv += ",status,termination,bkm,t_end,T_est,fit_quality\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        csv += std::to_string(i);
        for (const auto& [k, v] : r.params) csv += "," + v;
        std::string st = r.status;
        std::replace(st.begin(), st.end(), ',', ';');
        std::replace(st.begin(), st.end(), '\n', ' ');
        csv += "," + st + "," + r.reason + "," + fmt(r.bkm) + "," + fmt(r.t_end) + "," + fmt(r.T_est) + "," +
               r.quality + "\n";
    }
    write_text(out / "summary.csv", csv);
    return rows;
}

inline int exit_code_for(const Error& e) {
    const auto& c = e.code();
    if (c == "nan-detected" || c == "non-finite" || c == "io-error") return 3;
    return 2;
}

// Runs the experiment declared in c and writes everything under out.
// 0 ok, 2 config/validation, 3 numerical failure.
inline int run_experiment(const RunConfig& c, const fs::path& out) {
    try {
        validate(c);
        set_threads(c.threads);
        fs::create_directories(out);
        json m = base_manifest(c);
        int code = 0;
        if (c.kind == "simulate") {
            auto r = simulate(c, out);
            m.update(r.info);
            if (r.traj.reason == evolution::Termination::nan) code = 3;
        } else if (c.kind == "verify-lemmas") {
            m["result"] = verify_lemmas(c, out);
        } else if (c.kind == "ode-compare") {
            m["result"] = ode_compare(c, out);
        } else if (c.kind == "derive-kernel") {
            m["result"] = derive_kernel(c, out);
        } else {
            auto rows = sweep(c, out);
            json r = json::array();
            for (const auto& row : rows) r.push_back({{"status", row.status}, {"termination", row.reason}});
            m["result"] = r;
        }
        write_json(out / "manifest.json", m);
        return code;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

inline int run_experiment(const fs::path& config, const fs::path& out) {
    RunConfig c;
    try {
        c = load_config(config);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return run_experiment(c, out);
}

}  // namespace hlb::runner
