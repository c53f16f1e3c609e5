// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// when a gated criterion fails. Criterion numbers may be passed as arguments
// to run a subset, e.g. `fattn_acceptance 1 2 6`.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fattn/bench.hpp"
#include "fattn/entropy.hpp"
#include "fattn/optimizer.hpp"
#include "fattn/oracle.hpp"
#include "oracles.hpp"

using namespace fattn;

namespace {

struct Outcome {
    bool pass = false;
    bool gated = true;
    std::string detail;
};

// Plan for the lattice, or nothing when the kind does not fit it (too few layers).
std::optional<PlacementPlan> plan_for(const Lattice& lat, PlanKind kind) {
    try {
        PlacementPlan plan = make_plan(lat, kind);
        if (validate_plan(plan, lat, kind).ok) return plan;
    } catch (const Error&) {
    }
    return std::nullopt;
}

std::string fmt(double v, int prec = 3) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

AnsatzState random_state(const Lattice& lat, PlanKind kind, int D, std::uint64_t seed) {
    AnsatzState s = init_state(lat, make_plan(lat, kind), D, seed);
    oracle::randomize_disentanglers(s, seed + 1);
    return s;
}

// Orthogonal curve through t with tangent t * a (Cayley transform).
Eigen::MatrixXd rotate(const Eigen::MatrixXd& t, const Eigen::MatrixXd& a, double eps) {
    const Eigen::Index n = a.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    return t * (id - 0.5 * eps * a).inverse() * (id + 0.5 * eps * a);
}

Outcome constraint_fuzz() {
    std::mt19937_64 rng(20240607);
    const std::vector<std::pair<int, int>> shapes{{2, 2}, {2, 4}, {4, 2}, {4, 4}};
    const std::vector<PlanKind> kinds{PlanKind::ttn, PlanKind::attn, PlanKind::fattn_l1, PlanKind::fattn_l2,
                                      PlanKind::fattn_l1l2};
    std::uniform_real_distribution<double> lambda_dist(0.5, 5.0);
    int sweeps = 0, updates = 0, runs = 0;
    double worst_iso = 0.0, worst_uni = 0.0;
    while (sweeps < 200) {
        const auto [lx, ly] = shapes[rng() % shapes.size()];
        const Lattice lat = build_lattice(lx, ly);
        const PlanKind kind = kinds[rng() % kinds.size()];
        const auto maybe = plan_for(lat, kind);
        if (!maybe) continue;
        const PlacementPlan& plan = *maybe;
        // The two-layer plan lifts many products per term; keep it to small D.
        const int dmax = kind == PlanKind::fattn_l1l2 ? 4 : 16;
        const int D = 1 + static_cast<int>(rng() % dmax);
        const double lambda = lambda_dist(rng);
        AnsatzState s = init_state(lat, plan, D, rng());
        Optimizer opt(s, tfim_hamiltonian(lat, lambda));
        opt.set_shifted(true);
        ++runs;
        const int run_sweeps = std::min(200 - sweeps, 5 + static_cast<int>(rng() % 20));
        for (int k = 0; k < run_sweeps; ++k, ++sweeps) {
            for (std::size_t e = 0; e < s.disentanglers.size(); ++e) {
                opt.update_disentangler(static_cast<int>(e));
                worst_uni = std::max(worst_uni, isometry_residual(s.disentanglers[e]));
                ++updates;
            }
            for (int l = 1; l < s.tree.top(); ++l)
                for (int i = 0; i < s.tree.nodes_in_layer(l); ++i) {
                    opt.update_isometry(l, i);
                    worst_iso = std::max(worst_iso, isometry_residual(s.isometry(l, i)));
                    ++updates;
                }
            opt.update_top();
            worst_iso = std::max(worst_iso, isometry_residual(s.isometry(s.tree.top(), 0)));
            ++updates;
            worst_iso = std::max(worst_iso, s.max_isometry_residual());
            worst_uni = std::max(worst_uni, s.max_unitary_residual());
        }
    }
    Outcome o;
    o.pass = worst_iso < 1e-10 && worst_uni < 1e-10;
    o.detail = std::to_string(runs) + " runs, " + std::to_string(sweeps) + " sweeps, " + std::to_string(updates) +
               " updates, max isometry residual " + fmt(worst_iso) + ", max unitary residual " + fmt(worst_uni);
    return o;
}

Outcome exactness() {
    const Lattice lat = build_lattice(2, 4);
    const Hamiltonian h = tfim_hamiltonian(lat, 3.05);
    AnsatzState s = init_state(lat, ttn_plan(), 16, 7);
    Optimizer opt(s, h);
    OptimizeOptions o;
    o.max_sweeps = 200;
    o.tol = 1e-13;
    const EnergyTrace tr = opt.optimize(o);
    const double ed = ed_ground_energy(lat, 3.05).energy;
    const double err = std::abs((tr.final_energy - ed) / ed);
    Outcome out;
    out.pass = err < 1e-8;
    out.detail = "E = " + fmt(tr.final_energy, 15) + ", ED = " + fmt(ed, 15) + ", relative error " + fmt(err) +
                 " after " + std::to_string(tr.records.size()) + " sweeps";
    return out;
}

Outcome causal_cone() {
    double worst = 0.0;
    int cases = 0;
    for (auto [lx, ly] : {std::pair{2, 4}, std::pair{4, 2}})
        for (PlanKind kind : {PlanKind::ttn, PlanKind::fattn_l1})
            for (int D : {2, 3, 4})
                for (std::uint64_t seed : {11u, 12u, 13u}) {
                    const Lattice lat = build_lattice(lx, ly);
                    const AnsatzState s = random_state(lat, kind, D, seed);
                    const Hamiltonian h = tfim_hamiltonian(lat, 3.05);
                    const double naive = oracle::energy(s, h);
                    worst = std::max(worst, rel(energy(s, h), naive));
                    ++cases;
                }
    Outcome o;
    o.pass = worst <= 1e-11;
    o.detail = std::to_string(cases) + " random states, max deviation " + fmt(worst);
    return o;
}

Outcome containment() {
    RunConfig cfg;
    cfg.lx = cfg.ly = 4;
    cfg.lambda = 3.05;
    cfg.kinds = {PlanKind::ttn, PlanKind::attn, PlanKind::fattn_l1};
    cfg.dims = {8};
    cfg.max_sweeps = 400;
    cfg.tol = 1e-11;
    cfg.warm_start = true;
    const GridResult res = run_grid(cfg, false);
    const double ed = ed_ground_energy(build_lattice(4, 4), 3.05).energy;
    const double n = 16.0;
    const double ttn = res.points[0].row.energy_per_site * n;
    const double attn = res.points[1].row.energy_per_site * n;
    const double fattn = res.points[2].row.energy_per_site * n;
    bool failed = false;
    for (const auto& p : res.points) failed = failed || p.row.failed;
    Outcome o;
    o.pass = !failed && fattn <= attn + 1e-9 && attn <= ttn + 1e-9 && std::min({ttn, attn, fattn}) >= ed - 1e-10;
    o.detail = "E(FATTN-L1) = " + fmt(fattn, 12) + ", E(ATTN) = " + fmt(attn, 12) + ", E(TTN) = " + fmt(ttn, 12) +
               ", ED = " + fmt(ed, 12);
    return o;
}

Outcome desk_scale_benchmark() {
    RunConfig cfg;
    cfg.lx = cfg.ly = 8;
    cfg.lambda = 3.05;
    cfg.kinds = {PlanKind::ttn, PlanKind::fattn_l1};
    cfg.dims = {10, 20, 30};
    cfg.max_sweeps = 200;
    cfg.tol = 1e-8;
    cfg.warm_start = true;
    cfg.reference = "none";
    const auto t0 = std::chrono::steady_clock::now();
    GridResult res = run_grid(cfg, false, [](const std::string& m) { std::cerr << "  [5] " << m << '\n'; });
    const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
    Outcome o;
    for (const auto& p : res.points)
        if (p.row.failed) {
            o.detail = to_string(p.row.kind) + " D=" + std::to_string(p.row.D) + " failed: " + p.row.message;
            return o;
        }
    // Reference: quadratic fit in 1/D of the FATTN grid.
    std::vector<double> fattn_e;
    for (const auto& p : res.points)
        if (p.row.kind == PlanKind::fattn_l1) fattn_e.push_back(p.row.energy_per_site);
    const Extrapolation fit = extrapolate_energy(cfg.dims, fattn_e, FitVariable::inverse_d);
    const double ref = fit.energy;
    std::ostringstream os;
    os.precision(3);
    os << "reference E/site " << std::setprecision(12) << ref << std::setprecision(3);
    bool ok = true;
    double ratio20 = 0.0;
    for (std::size_t d = 0; d < cfg.dims.size(); ++d) {
        const double et = std::abs((res.points[d].row.energy_per_site - ref) / ref);
        const double ef = std::abs((res.points[cfg.dims.size() + d].row.energy_per_site - ref) / ref);
        ok = ok && ef < et;
        if (cfg.dims[d] == 20) ratio20 = ef / et;
        const auto& rt = res.points[d].row;
        const auto& rf = res.points[cfg.dims.size() + d].row;
        os << "; D=" << cfg.dims[d] << " err TTN " << et << " (" << rt.sweeps << (rt.converged ? " sweeps" : " sweeps, capped")
           << ") FATTN " << ef << " (" << rf.sweeps << (rf.converged ? " sweeps" : " sweeps, capped") << ")";
    }
    ok = ok && ratio20 <= 1.0 / 3.0;
    os << "; ratio at D=20 " << ratio20 << "; " << minutes << " min";
    o.pass = ok;
    o.detail = os.str();
    return o;
}

Outcome entropy_formulas() {
    Outcome o;
    bool ok = true;
    std::ostringstream os;
    auto synthetic = [](int L, int n, int m, int d) {
        CutBudget b;
        b.L = L;
        b.n = n;
        b.m = m;
        b.d = d;
        b.p = static_cast<double>(n) / L;
        b.c = static_cast<double>(L) / m;
        return b;
    };
    // The three colored cuts of the 8x8 FATTN-L1 plan against their closed forms.
    const Lattice lat = build_lattice(8, 8);
    const TreeLayout tree = build_tree(lat);
    const PlacementPlan plan = fattn_plan_l1(lat);
    std::array<CutBudget, 3> colored;
    int found = 0;
    for (const auto& c : named_cuts(lat)) {
        const int idx = c.name == "green" ? 0 : c.name == "blue" ? 1 : c.name == "red" ? 2 : -1;
        if (idx >= 0) {
            colored[static_cast<std::size_t>(idx)] = budget(lat, c, plan, tree, 16);
            ++found;
        }
    }
    ok = ok && found == 3;
    for (int d : {2, 3})
        for (int k = 1; k <= 9; ++k)
            for (const auto& b0 : colored) {
                CutBudget b = b0;
                b.d = d;
                const double closed = std::pow(static_cast<double>(d * d), b.c * (1.0 - b.p)) *
                                      std::pow(static_cast<double>(k) / (d * d), b.c);
                const double general = required_D_closed_form(b, k);
                const double direct = std::exp((b.L * std::log(k) - 2.0 * b.n * std::log(d)) / b.m);
                ok = ok && rel(general, closed) < 1e-12 && rel(general, direct) < 1e-12 &&
                     rel(required_D(b, k), std::max(1.0, direct)) < 1e-12;
            }
    const double d14 = required_D(synthetic(20, 10, 4, 2), 4.0);
    const double d15 = required_D(synthetic(16, 8, 2, 2), 4.0);
    ok = ok && std::abs(d14 - 32.0) < 1e-9 && std::abs(d15 - 256.0) < 1e-9;
    os << "colored cuts n = (" << colored[0].n << ',' << colored[1].n << ',' << colored[2].n << "), D = " << d14
       << " and " << d15;
    // General identity on every named cut, for several plans.
    int identities = 0;
    for (PlanKind kind : {PlanKind::ttn, PlanKind::attn, PlanKind::fattn_l1, PlanKind::fattn_l2})
        for (const auto& c : named_cuts(lat)) {
            const CutBudget b = budget(lat, c, make_plan(lat, kind), tree, 16);
            if (b.m <= 0) continue;
            const double direct = std::exp((b.L * std::log(4.0) - 2.0 * b.n * std::log(2.0)) / b.m);
            ok = ok && rel(required_D_closed_form(b, 4.0), direct) < 1e-12;
            ++identities;
        }
    const Balance bal = balance_counts(colored, 32);
    const std::array<int, 3> want{14, 10, 8};
    const bool has = std::find(bal.optima.begin(), bal.optima.end(), want) != bal.optima.end();
    ok = ok && has;
    os << ", " << identities << " named-cut identities, balance optima " << bal.optima.size()
       << (has ? " include (14,10,8)" : " miss (14,10,8)");
    o.pass = ok;
    o.detail = os.str();
    return o;
}

Outcome identity_reduction() {
    double worst_e = 0.0, worst_norm = 0.0;
    int cases = 0;
    for (auto [lx, ly] : {std::pair{2, 2}, std::pair{2, 4}, std::pair{4, 2}, std::pair{4, 4}, std::pair{8, 8}})
        for (PlanKind kind : {PlanKind::attn, PlanKind::fattn_l1, PlanKind::fattn_l2, PlanKind::fattn_l1l2}) {
            const Lattice lat = build_lattice(lx, ly);
            const auto maybe = plan_for(lat, kind);
            if (!maybe || maybe->entries.empty()) continue;
            const PlacementPlan& plan = *maybe;
            const int D = kind == PlanKind::fattn_l1l2 ? 2 : 4;
            const Hamiltonian h = tfim_hamiltonian(lat, 3.05);
            const AnsatzState ttn = init_state(lat, ttn_plan(), D, 5);
            const AnsatzState fat = init_state(lat, plan, D, 5, &ttn);  // identity disentanglers
            worst_e = std::max(worst_e, rel(energy(fat, h), energy(ttn, h)));
            if (lat.num_sites() <= 16) {
                const Eigen::VectorXd a = oracle::state_vector(ttn), b = oracle::state_vector(fat);
                worst_norm = std::max(worst_norm, std::abs(b.norm() - a.norm()));
                worst_norm = std::max(worst_norm, (a - b).norm());
            }
            ++cases;
        }
    Outcome o;
    o.pass = worst_e <= 1e-12 && worst_norm <= 1e-12;
    o.detail = std::to_string(cases) + " lattice/plan pairs, max energy deviation " + fmt(worst_e) +
               ", max state deviation " + fmt(worst_norm);
    return o;
}

Outcome gradient_check() {
    double worst = 0.0;
    int checks = 0;
    for (auto [lx, ly] : {std::pair{2, 4}, std::pair{4, 2}})
        for (std::uint64_t seed : {3u, 4u, 5u}) {
            const Lattice lat = build_lattice(lx, ly);
            AnsatzState s = random_state(lat, PlanKind::fattn_l1, 4, seed);
            const Hamiltonian h = tfim_hamiltonian(lat, 3.05);
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> g;
            for (std::size_t e = 0; e < s.disentanglers.size(); ++e) {
                const Eigen::MatrixXd u = s.disentanglers[e];
                Eigen::MatrixXd a(u.cols(), u.cols());
                for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
                a = a - a.transpose().eval();
                Eigen::MatrixXd y;
                {
                    Optimizer opt(s, h);
                    y = opt.disentangler_environment(static_cast<int>(e), false).y;
                }
                const double analytic = tangent_derivative(y, u, a);
                const double eps = 1e-4;
                s.disentanglers[e] = rotate(u, a, eps);
                const double ep = energy(s, h);
                s.disentanglers[e] = rotate(u, a, -eps);
                const double em = energy(s, h);
                s.disentanglers[e] = u;
                const double fd = (ep - em) / (2 * eps);
                worst = std::max(worst, std::abs(analytic - fd) / std::max(1.0, std::abs(fd)));
                ++checks;
            }
        }
    Outcome o;
    o.pass = checks > 0 && worst <= 1e-5;
    o.detail = std::to_string(checks) + " disentangler tangents, max relative deviation " + fmt(worst);
    return o;
}

Outcome scaling_sanity() {
    RunConfig cfg;
    cfg.lx = cfg.ly = 4;
    cfg.kinds = {PlanKind::ttn};
    cfg.dims = {8, 16, 32, 64};
    cfg.timing_sweeps = 3;
    const auto pts = measure_scaling(cfg);
    const auto fit = fit_scaling(pts);
    std::ostringstream os;
    os.precision(3);
    for (const auto& p : pts) os << "D=" << p.D << " " << p.seconds_per_sweep << " s; ";
    Outcome o;
    o.gated = false;
    const double slope = fit.at(0).slope.value_or(std::nan(""));
    o.pass = slope >= 3.0 && slope <= 5.0;
    os << "slope " << slope;

    // The 4x4 tree caps inner bonds at 16, so also report 8x8 where every bond reaches D.
    cfg.lx = cfg.ly = 8;
    cfg.dims = {8, 16, 32, 64};
    const auto big = fit_scaling(measure_scaling(cfg));
    os << "; 8x8 slope " << big.at(0).slope.value_or(std::nan(""));
    o.detail = os.str();
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* name;
        double limit_seconds;  // 0 = no runtime gate
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {1, "constraint suite", 300, constraint_fuzz},
        {2, "exactness on 2x4", 60, exactness},
        {3, "causal-cone correctness", 60, causal_cone},
        {4, "class containment on 4x4", 600, containment},
        {5, "8x8 FATTN vs TTN accuracy", 0, desk_scale_benchmark},
        {6, "entropy formulas", 1, entropy_formulas},
        {7, "identity reduction", 60, identity_reduction},
        {8, "gradient check", 60, gradient_check},
        {9, "scaling sanity (informational)", 0, scaling_sanity},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    bool all_pass = true;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_seconds > 0 && secs > c.limit_seconds) {
            o.pass = false;
            o.detail += "; exceeded " + fmt(c.limit_seconds) + " s";
        }
        std::printf("%s %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (o.gated && !o.pass) all_pass = false;
    }
    return all_pass ? 0 : 1;
}
