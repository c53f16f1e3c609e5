#include "fattn/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "fattn/entropy.hpp"
#include "fattn/errors.hpp"
#include "fattn/oracle.hpp"

namespace fattn {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream is(value);
    T v{};
    is >> v;
    if (!is || !(is >> std::ws).eof()) throw ConfigError("invalid value '" + value + "' for " + key);
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("invalid boolean '" + value + "' for " + key);
}

std::string join_kinds(const std::vector<PlanKind>& kinds) {
    std::string s;
    for (std::size_t i = 0; i < kinds.size(); ++i) s += (i ? "," : "") + to_string(kinds[i]);
    return s;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string point_name(PlanKind kind, int D) { return to_string(kind) + "-D" + std::to_string(D); }

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path.string());
    os << text;
}

void prepare_out(const RunConfig& cfg) {
    fs::create_directories(cfg.out);
    write_file(fs::path(cfg.out) / "config.txt", config_to_text(cfg));
}

std::string number(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(16) << v;
    return os.str();
}

}  // namespace

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& item : split(s, ',')) out.push_back(parse_number<int>("list", item));
    if (out.empty()) throw ConfigError("empty list '" + s + "'");
    return out;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "lattice") {
        const auto x = value.find('x');
        if (x == std::string::npos) throw ConfigError("lattice must look like 8x8");
        cfg.lx = parse_number<int>(key, value.substr(0, x));
        cfg.ly = parse_number<int>(key, value.substr(x + 1));
    } else if (key == "lx") {
        cfg.lx = parse_number<int>(key, value);
    } else if (key == "ly") {
        cfg.ly = parse_number<int>(key, value);
    } else if (key == "lambda") {
        cfg.lambda = parse_number<double>(key, value);
    } else if (key == "ansatz") {
        cfg.kinds.clear();
        for (const auto& k : split(value, ',')) cfg.kinds.push_back(parse_plan_kind(k));
    } else if (key == "dims") {
        cfg.dims = parse_int_list(value);
    } else if (key == "max_sweeps") {
        cfg.max_sweeps = parse_number<int>(key, value);
    } else if (key == "tol") {
        cfg.tol = parse_number<double>(key, value);
    } else if (key == "seed") {
        cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "out") {
        cfg.out = value;
    } else if (key == "checkpoint_every") {
        cfg.checkpoint_every = parse_number<int>(key, value);
    } else if (key == "fit_variable") {
        cfg.fit_variable = parse_fit_variable(value);
    } else if (key == "reference") {
        cfg.reference = value;
    } else if (key == "warm_start") {
        cfg.warm_start = parse_bool(key, value);
    } else if (key == "jobs") {
        cfg.jobs = parse_number<int>(key, value);
    } else if (key == "shifted") {
        cfg.shifted = parse_bool(key, value);
    } else if (key == "k") {
        cfg.k = parse_number<double>(key, value);
    } else if (key == "total") {
        cfg.total = parse_number<int>(key, value);
    } else if (key == "timing_sweeps") {
        cfg.timing_sweeps = parse_number<int>(key, value);
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
}

RunConfig parse_config(const std::string& text, RunConfig base) {
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string config_to_text(const RunConfig& cfg) {
    std::ostringstream os;
    os << std::setprecision(16);
    os << "lattice = " << cfg.lx << 'x' << cfg.ly << '\n'
       << "lambda = " << cfg.lambda << '\n'
       << "ansatz = " << join_kinds(cfg.kinds) << '\n'
       << "dims = " << join_ints(cfg.dims) << '\n'
       << "max_sweeps = " << cfg.max_sweeps << '\n'
       << "tol = " << cfg.tol << '\n'
       << "seed = " << cfg.seed << '\n'
       << "out = " << cfg.out << '\n'
       << "checkpoint_every = " << cfg.checkpoint_every << '\n'
       << "fit_variable = " << to_string(cfg.fit_variable) << '\n'
       << "reference = " << cfg.reference << '\n'
       << "warm_start = " << (cfg.warm_start ? "true" : "false") << '\n'
       << "jobs = " << cfg.jobs << '\n'
       << "shifted = " << (cfg.shifted ? "true" : "false") << '\n'
       << "k = " << cfg.k << '\n'
       << "total = " << cfg.total << '\n'
       << "timing_sweeps = " << cfg.timing_sweeps << '\n';
    return os.str();
}

void validate_config(const RunConfig& cfg) {
    const Lattice lat = build_lattice(cfg.lx, cfg.ly);
    if (cfg.kinds.empty()) throw ConfigError("no ansatz kind given");
    for (PlanKind k : cfg.kinds) {
        const PlanReport rep = validate_plan(make_plan(lat, k), lat, k);
        if (!rep.ok) throw ConfigError("plan " + to_string(k) + " is invalid for this lattice");
    }
    if (cfg.dims.empty()) throw ConfigError("no bond dimensions given");
    for (std::size_t i = 0; i < cfg.dims.size(); ++i) {
        if (cfg.dims[i] < 1) throw ConfigError("bond dimensions must be positive");
        if (i > 0 && cfg.dims[i] <= cfg.dims[i - 1]) throw ConfigError("bond dimensions must be strictly ascending");
    }
    if (cfg.max_sweeps < 1) throw ConfigError("max_sweeps must be at least 1");
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
    if (cfg.checkpoint_every < 0) throw ConfigError("checkpoint_every must be non-negative");
    if (cfg.jobs < 1) throw ConfigError("jobs must be at least 1");
    if (!(cfg.k >= 1.0)) throw ConfigError("k must be at least 1");
    if (cfg.total < 3) throw ConfigError("total must be at least 3");
    if (cfg.timing_sweeps < 1) throw ConfigError("timing_sweeps must be at least 1");
    if (cfg.reference != "auto" && cfg.reference != "ed" && cfg.reference != "extrapolation" && cfg.reference != "none")
        throw ConfigError("reference must be auto, ed, extrapolation or none");
    if (!std::isfinite(cfg.lambda)) throw ConfigError("lambda must be finite");
}

std::string bench_rows_to_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os << "kind,D,energy_per_site,reference_per_site,reference_source,relative_error,sweeps,seconds_per_sweep,"
          "converged,status\n";
    for (const auto& r : rows)
        os << to_string(r.kind) << ',' << r.D << ',' << number(r.energy_per_site) << ','
           << number(r.reference_per_site) << ',' << r.reference_source << ',' << number(r.relative_error) << ','
           << r.sweeps << ',' << number(r.seconds_per_sweep) << ',' << (r.converged ? 1 : 0) << ','
           << (r.failed ? "failed" : "ok") << '\n';
    return os.str();
}

namespace {

struct PointJob {
    std::size_t kind_index;
    std::size_t dim_index;
};

GridPoint optimize_point(const RunConfig& cfg, const Lattice& lat, const Hamiltonian& h, PlanKind kind, int D,
                         const std::vector<const AnsatzState*>& warm, bool write, const Logger& log) {
    GridPoint pt;
    pt.row.kind = kind;
    pt.row.D = D;
    pt.row.reference_per_site = std::numeric_limits<double>::quiet_NaN();
    pt.row.relative_error = std::numeric_limits<double>::quiet_NaN();
    const std::string name = point_name(kind, D);
    const fs::path ckpt = fs::path(cfg.out) / "checkpoints" / name;
    std::optional<AnsatzState> state;
    try {
        const PlacementPlan plan = make_plan(lat, kind);
        double best = std::numeric_limits<double>::infinity();
        if (warm.empty()) state = init_state(lat, plan, D, cfg.seed);
        for (const AnsatzState* w : warm) {
            AnsatzState cand = init_state(lat, plan, D, cfg.seed, w);
            const double e = energy(cand, h);
            if (e < best) {
                best = e;
                state = std::move(cand);
            }
        }
        Optimizer opt(*state, h);
        OptimizeOptions o;
        o.max_sweeps = cfg.max_sweeps;
        o.tol = cfg.tol;
        o.shifted = cfg.shifted;
        if (log) o.log = [&](const std::string& m) { log(name + ": " + m); };
        o.on_sweep = [&](const SweepRecord& r) {
            if (write && cfg.checkpoint_every > 0 && r.sweep % cfg.checkpoint_every == 0) save_state(ckpt.string(), *state);
        };
        pt.trace = opt.optimize(o);
        const int n = lat.num_sites();
        pt.row.energy_per_site = pt.trace.final_energy / n;
        pt.row.sweeps = static_cast<int>(pt.trace.records.size());
        double secs = 0.0;
        for (const auto& r : pt.trace.records) secs += r.seconds;
        pt.row.seconds_per_sweep = pt.row.sweeps ? secs / pt.row.sweeps : 0.0;
        pt.row.converged = pt.trace.converged;
        if (write) {
            save_state(ckpt.string(), *state);
            write_file(fs::path(cfg.out) / "traces" / (name + ".csv"), pt.trace.to_csv());
        }
        if (log) {
            std::ostringstream os;
            os << std::setprecision(12) << name << ": E/site = " << pt.row.energy_per_site << " after " << pt.row.sweeps
               << " sweeps (" << std::setprecision(3) << pt.row.seconds_per_sweep << " s/sweep)"
               << (pt.row.converged ? "" : ", not converged");
            log(os.str());
        }
        pt.state = std::move(state);
    } catch (const NumericalHealthError& e) {
        pt.row.failed = true;
        pt.row.error = e.code();
        pt.row.message = e.what();
        if (write && state) save_state((ckpt.string() + "-failed"), *state);
        if (log) log(name + ": failed: " + e.what());
    } catch (const CapacityError& e) {
        pt.row.failed = true;
        pt.row.error = e.code();
        pt.row.message = e.what();
        if (log) log(name + ": failed: " + e.what());
    }
    return pt;
}

}  // namespace

GridResult run_grid(const RunConfig& cfg, bool write, const Logger& log) {
    validate_config(cfg);
    const Lattice lat = build_lattice(cfg.lx, cfg.ly);
    const Hamiltonian h = tfim_hamiltonian(lat, cfg.lambda);
    const std::size_t nk = cfg.kinds.size(), nd = cfg.dims.size();
    std::vector<GridPoint> grid(nk * nd);
    auto at = [&](std::size_t k, std::size_t d) -> GridPoint& { return grid[k * nd + d]; };

    if (cfg.warm_start) {
        for (std::size_t d = 0; d < nd; ++d)
            for (std::size_t k = 0; k < nk; ++k) {
                std::vector<const AnsatzState*> warm;
                if (d > 0 && at(k, d - 1).state) warm.push_back(&*at(k, d - 1).state);
                if (k > 0 && at(k - 1, d).state) warm.push_back(&*at(k - 1, d).state);
                at(k, d) = optimize_point(cfg, lat, h, cfg.kinds[k], cfg.dims[d], warm, write, log);
            }
    } else {
        std::mutex mu;
        Logger safe_log;
        if (log) safe_log = [&](const std::string& m) {
            std::lock_guard<std::mutex> lock(mu);
            log(m);
        };
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < grid.size(); i = next++)
                grid[i] = optimize_point(cfg, lat, h, cfg.kinds[i / nd], cfg.dims[i % nd], {}, write, safe_log);
        };
        std::vector<std::thread> pool;
        for (int j = 1; j < std::min<int>(cfg.jobs, static_cast<int>(grid.size())); ++j) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
    }
    GridResult out;
    out.points = std::move(grid);
    return out;
}

void apply_reference(GridResult& result, const RunConfig& cfg) {
    const Lattice lat = build_lattice(cfg.lx, cfg.ly);
    Reference ref;
    const bool ed_ok = lat.num_sites() <= kEdMaxSites;
    if (cfg.reference == "ed" || (cfg.reference == "auto" && ed_ok)) {
        ref.energy_per_site = ed_ground_energy(lat, cfg.lambda).energy_per_site;
        ref.source = "ed";
    } else if (cfg.reference == "extrapolation" || cfg.reference == "auto") {
        // Fit the kind with the lowest energy at its largest successful D.
        std::optional<std::size_t> best;
        double best_e = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < cfg.kinds.size(); ++k) {
            int count = 0;
            double last = 0.0;
            for (const auto& p : result.points)
                if (p.row.kind == cfg.kinds[k] && !p.row.failed) {
                    ++count;
                    last = p.row.energy_per_site;
                }
            if (count >= 3 && last < best_e) {
                best_e = last;
                best = k;
            }
        }
        if (best) {
            std::vector<int> dims;
            std::vector<double> energies;
            for (const auto& p : result.points)
                if (p.row.kind == cfg.kinds[*best] && !p.row.failed) {
                    dims.push_back(p.row.D);
                    energies.push_back(p.row.energy_per_site);
                }
            ref.fit = extrapolate_energy(dims, energies, cfg.fit_variable);
            ref.energy_per_site = ref.fit->energy;
            ref.source = "extrapolation";
            ref.fitted_kind = cfg.kinds[*best];
        } else if (cfg.reference == "extrapolation") {
            throw ArgumentError("extrapolation needs one ansatz with at least three successful bond dimensions");
        }
    }
    for (auto& p : result.points) {
        p.row.reference_source = ref.source;
        if (ref.source == "none") {
            p.row.reference_per_site = std::numeric_limits<double>::quiet_NaN();
            p.row.relative_error = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        p.row.reference_per_site = ref.energy_per_site;
        if (!p.row.failed)
            p.row.relative_error = std::abs((p.row.energy_per_site - ref.energy_per_site) / ref.energy_per_site);
    }
    result.reference = ref;
}

std::vector<ScalingPoint> measure_scaling(const RunConfig& cfg, const Logger& log) {
    validate_config(cfg);
    const Lattice lat = build_lattice(cfg.lx, cfg.ly);
    const Hamiltonian h = tfim_hamiltonian(lat, cfg.lambda);
    std::vector<ScalingPoint> out;
    for (PlanKind kind : cfg.kinds)
        for (int D : cfg.dims) {
            AnsatzState s = init_state(lat, make_plan(lat, kind), D, cfg.seed);
            Optimizer opt(s, h);
            opt.set_shifted(cfg.shifted);
            opt.sweep();  // untimed: moves disentanglers away from the identity
            const auto t0 = std::chrono::steady_clock::now();
            for (int i = 0; i < cfg.timing_sweeps; ++i) opt.sweep();
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            out.push_back({kind, D, secs / cfg.timing_sweeps});
            if (log) {
                std::ostringstream os;
                os << point_name(kind, D) << ": " << std::setprecision(4) << out.back().seconds_per_sweep << " s/sweep";
                log(os.str());
            }
        }
    return out;
}

std::vector<ScalingFit> fit_scaling(const std::vector<ScalingPoint>& points) {
    std::vector<ScalingFit> fits;
    std::vector<PlanKind> kinds;
    for (const auto& p : points)
        if (std::find(kinds.begin(), kinds.end(), p.kind) == kinds.end()) kinds.push_back(p.kind);
    for (PlanKind k : kinds) {
        std::vector<double> x, y;
        for (const auto& p : points)
            if (p.kind == k && p.seconds_per_sweep > 0) {
                x.push_back(std::log(static_cast<double>(p.D)));
                y.push_back(std::log(p.seconds_per_sweep));
            }
        ScalingFit f;
        f.kind = k;
        f.points = static_cast<int>(x.size());
        const bool distinct = !x.empty() && *std::max_element(x.begin(), x.end()) > *std::min_element(x.begin(), x.end());
        if (x.size() >= 2 && distinct) {
            Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 2);
            Eigen::VectorXd b(static_cast<Eigen::Index>(y.size()));
            for (std::size_t i = 0; i < x.size(); ++i) {
                a(static_cast<Eigen::Index>(i), 0) = 1.0;
                a(static_cast<Eigen::Index>(i), 1) = x[i];
                b(static_cast<Eigen::Index>(i)) = y[i];
            }
            f.slope = a.colPivHouseholderQr().solve(b)(1);
        }
        fits.push_back(f);
    }
    return fits;
}

int cmd_ed(const RunConfig& cfg, std::ostream& msg) {
    validate_config(cfg);
    prepare_out(cfg);
    const Lattice lat = build_lattice(cfg.lx, cfg.ly);
    const auto t0 = std::chrono::steady_clock::now();
    const EdResult r = ed_ground_energy(lat, cfg.lambda);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream os;
    os << "lx,ly,lambda,energy,energy_per_site,iterations,residual,seconds\n"
       << cfg.lx << ',' << cfg.ly << ',' << number(cfg.lambda) << ',' << number(r.energy) << ','
       << number(r.energy_per_site) << ',' << r.iterations << ',' << number(r.residual) << ',' << number(secs) << '\n';
    write_file(fs::path(cfg.out) / "ed.csv", os.str());
    msg << std::setprecision(14) << "ED energy per site " << r.energy_per_site << '\n';
    return 0;
}

namespace {

int grid_command(const RunConfig& cfg, std::ostream& msg, const std::string& file) {
    prepare_out(cfg);
    GridResult res = run_grid(cfg, true, [&](const std::string& m) { msg << m << '\n' << std::flush; });
    apply_reference(res, cfg);
    std::vector<BenchRow> rows;
    for (const auto& p : res.points) rows.push_back(p.row);
    write_file(fs::path(cfg.out) / file, bench_rows_to_csv(rows));

    std::ostringstream ref;
    ref << "source,energy_per_site,fitted_kind,fit_variable,c0,c1,c2,rms_residual\n" << res.reference.source << ','
        << number(res.reference.energy_per_site) << ',';
    if (res.reference.fit) {
        const auto& f = *res.reference.fit;
        ref << to_string(res.reference.fitted_kind) << ',' << to_string(f.variable) << ',' << number(f.coefficients[0])
            << ',' << number(f.coefficients[1]) << ',' << number(f.coefficients[2]) << ',' << number(f.rms_residual);
    } else {
        ref << ",,,,,";
    }
    ref << '\n';
    write_file(fs::path(cfg.out) / "reference.csv", ref.str());

    bool health = false, capacity = false;
    for (const auto& r : rows) {
        if (!r.failed) continue;
        if (r.error == ExitCode::capacity) capacity = true;
        else health = true;
    }
    if (health) return static_cast<int>(ExitCode::numerical_health);
    if (capacity) return static_cast<int>(ExitCode::capacity);
    return 0;
}

}  // namespace

int cmd_optimize(const RunConfig& cfg, std::ostream& msg) {
    validate_config(cfg);
    if (cfg.kinds.size() != 1) throw ConfigError("optimize takes exactly one ansatz kind; use benchmark for several");
    return grid_command(cfg, msg, "optimize.csv");
}

int cmd_benchmark(const RunConfig& cfg, std::ostream& msg) {
    validate_config(cfg);
    return grid_command(cfg, msg, "benchmark.csv");
}

int cmd_entropy(const RunConfig& cfg, std::ostream& msg) {
    validate_config(cfg);
    prepare_out(cfg);
    const Lattice lat = build_lattice(cfg.lx, cfg.ly);
    const TreeLayout tree = build_tree(lat);
    const int D = cfg.dims.back();
    const PlacementPlan plan = make_plan(lat, cfg.kinds.front());
    const auto rows = scan_all_cuts(lat, plan, tree, D, cfg.k);
    write_file(fs::path(cfg.out) / "cuts.csv", cut_reports_to_csv(rows));
    int unsatisfied = 0;
    for (const auto& r : rows) unsatisfied += r.satisfied ? 0 : 1;
    msg << rows.size() << " cuts scanned, " << unsatisfied << " need more than D = " << D << '\n';

    // Balance over the three lowest-crossing named cuts with distinct tree crossings.
    std::vector<CutBudget> named;
    for (const auto& c : named_cuts(lat)) {
        const CutBudget b = budget(lat, c, plan, tree, D);
        bool dup = false;
        for (const auto& o : named) dup = dup || o.m == b.m;
        if (!dup && b.smaller_side * 2 == lat.num_sites()) named.push_back(b);
    }
    std::sort(named.begin(), named.end(), [](const CutBudget& a, const CutBudget& b) { return a.m < b.m; });
    std::ostringstream os;
    os << "rank,cuts,n1,n2,n3,lowest_entropy,lowest_entropy_log_d\n";
    if (named.size() >= 3) {
        const Balance bal = balance_counts({named[0], named[1], named[2]}, cfg.total);
        const std::string names = named[0].cut.name + "/" + named[1].cut.name + "/" + named[2].cut.name;
        for (std::size_t i = 0; i < bal.optima.size(); ++i) {
            const auto& t = bal.optima[i];
            os << i << ',' << names << ',' << t[0] << ',' << t[1] << ',' << t[2] << ',' << number(bal.lowest_entropy)
               << ',' << number(bal.lowest_entropy / std::log(lat.d)) << '\n';
        }
        if (!bal.optima.empty())
            msg << "balanced counts (" << names << "): " << bal.optima.front()[0] << ',' << bal.optima.front()[1] << ','
                << bal.optima.front()[2] << " among " << bal.optima.size() << " optima\n";
    } else {
        msg << "fewer than three equal bipartitions with distinct tree crossings; balance skipped\n";
    }
    write_file(fs::path(cfg.out) / "balance.csv", os.str());
    return 0;
}

int cmd_scaling(const RunConfig& cfg, std::ostream& msg) {
    validate_config(cfg);
    prepare_out(cfg);
    const auto points = measure_scaling(cfg, [&](const std::string& m) { msg << m << '\n' << std::flush; });
    std::ostringstream os;
    os << "kind,D,seconds_per_sweep\n";
    for (const auto& p : points) os << to_string(p.kind) << ',' << p.D << ',' << number(p.seconds_per_sweep) << '\n';
    write_file(fs::path(cfg.out) / "scaling.csv", os.str());
    std::ostringstream fit;
    fit << "kind,points,slope,expected_slope\n";
    for (const auto& f : fit_scaling(points)) {
        fit << to_string(f.kind) << ',' << f.points << ',' << (f.slope ? number(*f.slope) : "unavailable") << ",4\n";
        msg << to_string(f.kind) << ": slope " << (f.slope ? number(*f.slope) : "unavailable")
            << " (expected asymptotic exponent 4)\n";
    }
    write_file(fs::path(cfg.out) / "scaling_fit.csv", fit.str());
    return 0;
}

}  // namespace fattn
