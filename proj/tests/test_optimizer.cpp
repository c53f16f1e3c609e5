#include <doctest.h>

#include "fattn/errors.hpp"
#include "fattn/optimizer.hpp"
#include "fattn/oracle.hpp"
#include "oracles.hpp"

using namespace fattn;

namespace {

AnsatzState random_state(int lx, int ly, PlanKind kind, int D, std::uint64_t seed) {
    const Lattice lat = build_lattice(lx, ly);
    AnsatzState s = init_state(lat, make_plan(lat, kind), D, seed);
    oracle::randomize_disentanglers(s, seed + 1);
    return s;
}

// Orthogonal curve through T with tangent T * A (Cayley transform).
Eigen::MatrixXd rotate(const Eigen::MatrixXd& t, const Eigen::MatrixXd& a, double eps) {
    const Eigen::Index n = a.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    return t * (id - 0.5 * eps * a).inverse() * (id + 0.5 * eps * a);
}

Eigen::MatrixXd random_antisymmetric(Eigen::Index n, unsigned seed) {
    std::srand(seed);
    Eigen::MatrixXd m = Eigen::MatrixXd::Random(n, n);
    return m - m.transpose();
}

struct Target {
    bool isometry;
    int layer;
    int index;
};

Eigen::MatrixXd& tensor(AnsatzState& s, const Target& t) {
    return t.isometry ? s.isometry(t.layer, t.index) : s.disentanglers.at(static_cast<std::size_t>(t.index));
}

Environment environment(AnsatzState& s, const Hamiltonian& h, const Target& t, bool shifted) {
    Optimizer opt(s, h);
    return t.isometry ? opt.isometry_environment(t.layer, t.index, shifted, true)
                      : opt.disentangler_environment(t.index, shifted, true);
}

std::vector<Target> targets(const AnsatzState& s) {
    std::vector<Target> out;
    for (int l = 1; l < s.tree.top(); ++l) out.push_back({true, l, s.tree.nodes_in_layer(l) - 1});
    for (std::size_t e = 0; e < s.plan.entries.size(); e += 5) out.push_back({false, s.plan.entries[e].layer, static_cast<int>(e)});
    return out;
}

}  // namespace

TEST_CASE("environment traces reproduce the energy") {
    for (PlanKind kind : {PlanKind::ttn, PlanKind::fattn_l1, PlanKind::fattn_l2}) {
        CAPTURE(to_string(kind));
        AnsatzState s = random_state(4, 4, kind, 4, 23);
        const Hamiltonian h = tfim_hamiltonian(s.lattice, 2.0);
        const double ref = oracle::energy(s, h);
        for (const Target& t : targets(s)) {
            CAPTURE(t.isometry);
            CAPTURE(t.layer);
            CAPTURE(t.index);
            const Eigen::MatrixXd& x = tensor(s, t);
            const Environment plain = environment(s, h, t, false);
            CHECK(std::abs((plain.y * x).trace() + plain.outside_energy - ref) < 1e-10);
            const Environment shifted = environment(s, h, t, true);
            CHECK(std::abs((shifted.y * x).trace() + shifted.shift + shifted.outside_energy - ref) < 1e-10);
        }
    }
}

TEST_CASE("identity term environment has unit trace") {
    AnsatzState s = random_state(2, 4, PlanKind::ttn, 4, 3);
    Hamiltonian h;
    h.lattice = s.lattice;
    h.one_site.push_back({5, Eigen::MatrixXd::Identity(2, 2), 1.0});
    Optimizer opt(s, h);
    const Environment env = opt.isometry_environment(1, s.tree.parent_of(0, 5), false);
    CHECK(std::abs((env.y * s.isometry(1, s.tree.parent_of(0, 5))).trace() - 1.0) < 1e-12);
}

TEST_CASE("environments are linear in the Hamiltonian") {
    AnsatzState s = random_state(4, 4, PlanKind::fattn_l1, 3, 8);
    auto env_at = [&](double lambda, const Target& t) {
        return environment(s, tfim_hamiltonian(s.lattice, lambda), t, false).y;
    };
    for (const Target& t : {Target{true, 2, 1}, Target{false, 1, 3}}) {
        const Eigen::MatrixXd y0 = env_at(0.0, t), y1 = env_at(1.0, t), y3 = env_at(3.0, t);
        CHECK((y3 - y0 - 3.0 * (y1 - y0)).norm() < 1e-10 * std::max(1.0, y3.norm()));
    }
}

TEST_CASE("environment gradients match central finite differences") {
    for (PlanKind kind : {PlanKind::ttn, PlanKind::fattn_l1, PlanKind::fattn_l2}) {
        CAPTURE(to_string(kind));
        AnsatzState s = random_state(4, 4, kind, 3, 31);
        const Hamiltonian h = tfim_hamiltonian(s.lattice, 3.05);
        unsigned seed = 1;
        for (const Target& t : targets(s)) {
            CAPTURE(t.isometry);
            CAPTURE(t.layer);
            const Eigen::MatrixXd x = tensor(s, t);
            const Eigen::MatrixXd a = random_antisymmetric(x.cols(), seed++);
            const Environment env = environment(s, h, t, false);
            const double analytic = tangent_derivative(env.y, x, a);
            const double eps = 1e-4;
            tensor(s, t) = rotate(x, a, eps);
            const double ep = energy(s, h);
            tensor(s, t) = rotate(x, a, -eps);
            const double em = energy(s, h);
            tensor(s, t) = x;
            const double fd = (ep - em) / (2 * eps);
            CHECK(std::abs(analytic - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("single updates never raise the energy") {
    AnsatzState s = random_state(4, 4, PlanKind::fattn_l1, 4, 41);
    const Hamiltonian h = tfim_hamiltonian(s.lattice, 3.05);
    Optimizer opt(s, h);
    double e = opt.energy();
    for (int entry = 0; entry < static_cast<int>(s.plan.entries.size()); ++entry) {
        opt.update_disentangler(entry);
        const double next = opt.energy();
        CHECK(next <= e + 1e-12 * std::abs(e));
        e = next;
    }
    for (int l = 1; l <= s.tree.top(); ++l)
        for (int i = 0; i < s.tree.nodes_in_layer(l); ++i) {
            opt.update_isometry(l, i);
            const double next = opt.energy();
            CHECK(next <= e + 1e-12 * std::abs(e));
            e = next;
        }
    CHECK(std::abs(e - oracle::energy(s, h)) < 1e-10);
}

TEST_CASE("sweeps of the two-layer plan stay monotone") {
    AnsatzState s = random_state(4, 4, PlanKind::fattn_l2, 3, 2);
    const Hamiltonian h = tfim_hamiltonian(s.lattice, 3.05);
    Optimizer opt(s, h);
    OptimizeOptions o;
    o.max_sweeps = 4;
    o.tol = 1e-14;
    const EnergyTrace tr = opt.optimize(o);
    CHECK(tr.warnings == 0);
    CHECK(tr.final_energy < tr.initial_energy);
    CHECK(std::abs(tr.final_energy - oracle::energy(s, h)) < 1e-10);
}

TEST_CASE("small TTN reaches the exact ground state") {
    const Lattice lat = build_lattice(2, 4);
    AnsatzState s = init_state(lat, ttn_plan(), 16, 5);
    const Hamiltonian h = tfim_hamiltonian(lat, 3.05);
    Optimizer opt(s, h);
    OptimizeOptions o;
    o.max_sweeps = 30;
    o.tol = 1e-13;
    const EnergyTrace tr = opt.optimize(o);
    const double ed = ed_ground_energy(lat, 3.05).energy;
    CHECK(std::abs(tr.final_energy - ed) / std::abs(ed) < 1e-8);
    CHECK(tr.warnings == 0);
}

TEST_CASE("quadratic extrapolation recovers exact polynomials") {
    const std::vector<int> dims{10, 20, 30, 40};
    std::vector<double> e;
    for (int d : dims) e.push_back(-3.0 + 2.0 / d + 5.0 / (d * d));
    const Extrapolation x = extrapolate_energy(dims, e, FitVariable::inverse_d);
    CHECK(x.energy == doctest::Approx(-3.0).epsilon(1e-10));
    CHECK(x.rms_residual < 1e-12);
    std::vector<double> e2;
    for (int d : dims) e2.push_back(1.0 - 0.1 * d + 0.001 * d * d);
    const Extrapolation y = extrapolate_energy(dims, e2, FitVariable::d);
    CHECK(y.energy == doctest::Approx(1.0 - 0.1 * 50 + 0.001 * 2500).epsilon(1e-9));
    CHECK_THROWS_AS(extrapolate_energy({10, 20}, {1.0, 2.0}), ArgumentError);
    CHECK_THROWS_AS(parse_fit_variable("bogus"), ConfigError);
}

TEST_CASE("sweep limits are validated") {
    AnsatzState s = random_state(2, 4, PlanKind::ttn, 2, 1);
    Optimizer opt(s, tfim_hamiltonian(s.lattice, 1.0));
    OptimizeOptions o;
    o.max_sweeps = 0;
    CHECK_THROWS_AS(opt.optimize(o), ConfigError);
    o.max_sweeps = 3;
    o.tol = 0.0;
    CHECK_THROWS_AS(opt.optimize(o), ConfigError);
}

TEST_CASE("a converged state is a fixed point of the sweep") {
    const Lattice lat = build_lattice(2, 4);
    AnsatzState s = init_state(lat, ttn_plan(), 16, 5);
    const Hamiltonian h = tfim_hamiltonian(lat, 3.05);
    Optimizer opt(s, h);
    OptimizeOptions o;
    o.max_sweeps = 40;
    o.tol = 1e-14;
    const double e = opt.optimize(o).final_energy;
    CHECK(std::abs(opt.sweep() - e) < 1e-11);
}

TEST_CASE("identity disentanglers reproduce the tree energy") {
    const Lattice lat = build_lattice(4, 4);
    AnsatzState ttn = init_state(lat, ttn_plan(), 4, 12);
    const Hamiltonian h = tfim_hamiltonian(lat, 3.05);
    {
        Optimizer opt(ttn, h);
        OptimizeOptions o;
        o.max_sweeps = 5;
        opt.optimize(o);
    }
    AnsatzState fattn = init_state(lat, make_plan(lat, PlanKind::fattn_l1), 4, 99, &ttn);
    const double e_ttn = energy(ttn, h);
    CHECK(std::abs(energy(fattn, h) - e_ttn) < 1e-12 * std::abs(e_ttn));
    Optimizer opt(fattn, h);
    opt.sweep();
    CHECK(opt.energy() <= e_ttn + 1e-9);
}

TEST_CASE("optimization is deterministic") {
    auto run = [] {
        AnsatzState s = random_state(4, 4, PlanKind::fattn_l1, 3, 77);
        Optimizer opt(s, tfim_hamiltonian(s.lattice, 3.05));
        OptimizeOptions o;
        o.max_sweeps = 3;
        o.tol = 1e-14;
        EnergyTrace tr = opt.optimize(o);
        for (auto& r : tr.records) r.seconds = 0.0;
        return tr.to_csv();
    };
    CHECK(run() == run());
}

TEST_CASE("trace export uses the documented columns") {
    AnsatzState s = random_state(2, 4, PlanKind::ttn, 2, 4);
    Optimizer opt(s, tfim_hamiltonian(s.lattice, 1.0));
    OptimizeOptions o;
    o.max_sweeps = 2;
    const std::string csv = opt.optimize(o).to_csv();
    CHECK(csv.rfind("sweep,energy_total,energy_per_site,max_isometry_residual,max_unitary_residual,seconds\n", 0) == 0);
}
