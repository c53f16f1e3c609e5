// Command-line front end: fattn <ed|optimize|benchmark|entropy|scaling> [flags]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fattn/bench.hpp"
#include "fattn/errors.hpp"

namespace {

struct Overrides {
    std::string config;
    std::string out;
    std::string seed;
    std::string dims;
    std::string lambda;
    std::string ansatz;
    std::string max_sweeps;
    std::string tol;
    std::string fit_variable;
    std::string lattice;
    std::vector<std::string> sets;
};

fattn::RunConfig resolve(const Overrides& o) {
    fattn::RunConfig cfg;
    if (!o.config.empty()) cfg = fattn::load_config(o.config, cfg);
    auto apply = [&](const char* key, const std::string& v) {
        if (!v.empty()) fattn::set_config_value(cfg, key, v);
    };
    apply("lattice", o.lattice);
    apply("out", o.out);
    apply("seed", o.seed);
    apply("dims", o.dims);
    apply("lambda", o.lambda);
    apply("ansatz", o.ansatz);
    apply("max_sweeps", o.max_sweeps);
    apply("tol", o.tol);
    apply("fit_variable", o.fit_variable);
    for (const auto& kv : o.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw fattn::ConfigError("--set expects key=value, got '" + kv + "'");
        fattn::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    fattn::validate_config(cfg);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tree tensor network ground states of the 2D transverse-field Ising model"};
    app.require_subcommand(1);
    Overrides o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "flat key = value configuration file");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--dims", o.dims, "comma separated bond dimensions, ascending");
        sub->add_option("--lambda", o.lambda, "transverse field");
        sub->add_option("--ansatz", o.ansatz, "ttn, attn, fattn-l1, fattn-l2, fattn-l1l2 (comma list for benchmark)");
        sub->add_option("--max-sweeps", o.max_sweeps, "sweep limit per bond dimension");
        sub->add_option("--tol", o.tol, "relative energy change per sweep that counts as converged");
        sub->add_option("--fit-variable", o.fit_variable, "extrapolation variable: invD or D");
        sub->add_option("--lattice", o.lattice, "lattice extents, e.g. 8x8");
        sub->add_option("--set", o.sets, "any configuration key as key=value (repeatable)");
    };
    struct Command {
        const char* name;
        const char* help;
        int (*run)(const fattn::RunConfig&, std::ostream&);
    };
    const Command commands[] = {
        {"ed", "exact ground energy (up to 20 sites)", fattn::cmd_ed},
        {"optimize", "optimize one ansatz over the bond-dimension grid", fattn::cmd_optimize},
        {"benchmark", "compare several ansatz kinds against a reference energy", fattn::cmd_benchmark},
        {"entropy", "entanglement budget of cuts and balanced disentangler counts", fattn::cmd_entropy},
        {"scaling", "seconds per sweep against bond dimension", fattn::cmd_scaling},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        add_common(sub);
        subs.emplace_back(sub, &c);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(fattn::ExitCode::config);
    }
    try {
        for (const auto& [sub, cmd] : subs)
            if (sub->parsed()) return cmd->run(resolve(o), std::cout);
    } catch (const fattn::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(fattn::ExitCode::generic);
    }
    return static_cast<int>(fattn::ExitCode::generic);
}
