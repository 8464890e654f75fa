// hlb: command line front end for the experiment runner.
#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "hlb/hlb.hpp"

int main(int argc, char** argv) {
    CLI::App app{"1D Hou-Luo type model: simulations, kernel lemma scans, ODE comparator"};
    app.require_subcommand(1);
    std::string config, out = "out";
    unsigned long seed = 12345;
    int threads = 1;
    std::vector<std::string> sets;
    app.add_option("--config", config, "INI config file")->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", seed, "seed for the sampled kernel checks");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    app.add_option("--set", sets, "override, section.key=value (repeatable)");
    std::vector<std::string> kinds{"simulate", "verify-lemmas", "ode-compare", "sweep", "derive-kernel"};
    // options may sit on either side of the subcommand
    for (const auto& k : kinds) app.add_subcommand(k)->fallthrough();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    hlb::runner::RunConfig c;
    try {
        if (!config.empty()) c = hlb::runner::load_config(config);
        for (const auto& s : sets) {
            auto eq = s.find('=');
            hlb::require(eq != std::string::npos, "invalid-config", "--set expects key=value: " + s);
            hlb::runner::set_key(c, s.substr(0, eq), s.substr(eq + 1));
        }
        c.kind = app.get_subcommands().front()->get_name();
        c.seed = seed;
        c.threads = threads;
        hlb::runner::validate(c);
    } catch (const hlb::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    int rc = hlb::runner::run_experiment(c, out);
    if (rc == 0) std::printf("%s: done, output in %s\n", c.kind.c_str(), out.c_str());
    return rc;
}
