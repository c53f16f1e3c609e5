#include <doctest.h>

#include "fattn/effective.hpp"
#include "fattn/engine.hpp"
#include "fattn/errors.hpp"
#include "oracles.hpp"

using namespace fattn;

namespace {

double engine_energy(const AnsatzState& s, const Hamiltonian& h) {
    TreeEngine eng(s);
    eng.rebuild(physical_terms(h));
    return eng.energy();
}

AnsatzState random_state(int lx, int ly, PlanKind kind, int D, std::uint64_t seed) {
    const Lattice lat = build_lattice(lx, ly);
    AnsatzState s = init_state(lat, make_plan(lat, kind), D, seed);
    oracle::randomize_disentanglers(s, seed + 1);
    return s;
}

}  // namespace

TEST_CASE("kernels agree with explicit Kronecker products") {
    const int da = 3, db = 2, dc = 4;
    RowMat w = random_isometry_matrix(da * db, dc, 5);
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(da, da), b = Eigen::MatrixXd::Random(db, db);
    Eigen::MatrixXd kron = Eigen::MatrixXd::Zero(da * db, da * db);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < db; ++j)
            for (int k = 0; k < da; ++k)
                for (int l = 0; l < db; ++l) kron(i * db + j, k * db + l) = a(i, k) * b(j, l);
    const Eigen::MatrixXd wd = w;
    CHECK((Eigen::MatrixXd(kron_apply(w, da, db, &a, &b)) - kron * wd).norm() < 1e-12);
    CHECK((ascend_op(w, da, db, &a, &b) - wd.transpose() * kron * wd).norm() < 1e-12);

    // descend: Tr(env W^T (X (x) B) W) == Tr(desc * X) for random X
    Eigen::MatrixXd env = Eigen::MatrixXd::Random(dc, dc);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(da, da);
    Eigen::MatrixXd kx = Eigen::MatrixXd::Zero(da * db, da * db);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < db; ++j)
            for (int k = 0; k < da; ++k)
                for (int l = 0; l < db; ++l) kx(i * db + j, k * db + l) = x(i, k) * b(j, l);
    const double ref = trace_product(env, wd.transpose() * kx * wd);
    CHECK(std::abs(trace_product(descend_op(w, da, db, env, &b, true), x) - ref) < 1e-12);

    Eigen::MatrixXd y = Eigen::MatrixXd::Random(db, db);
    Eigen::MatrixXd ky = Eigen::MatrixXd::Zero(da * db, da * db);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < db; ++j)
            for (int k = 0; k < da; ++k)
                for (int l = 0; l < db; ++l) ky(i * db + j, k * db + l) = a(i, k) * y(j, l);
    const double ref2 = trace_product(env, wd.transpose() * ky * wd);
    CHECK(std::abs(trace_product(descend_op(w, da, db, env, &a, false), y) - ref2) < 1e-12);
}

TEST_CASE("causal-cone energy matches naive contraction") {
    struct Case {
        int lx, ly;
        PlanKind kind;
        int D;
    };
    for (const Case& c : {Case{2, 4, PlanKind::ttn, 3}, Case{4, 2, PlanKind::ttn, 3}, Case{2, 4, PlanKind::fattn_l1, 3},
                          Case{4, 2, PlanKind::fattn_l1, 3}, Case{4, 4, PlanKind::fattn_l1, 4},
                          Case{4, 4, PlanKind::attn, 4}, Case{4, 4, PlanKind::fattn_l2, 4},
                          Case{4, 4, PlanKind::fattn_l1l2, 2}}) {
        CAPTURE(c.lx);
        CAPTURE(c.ly);
        CAPTURE(to_string(c.kind));
        AnsatzState s = random_state(c.lx, c.ly, c.kind, c.D, 17);
        const Hamiltonian h = tfim_hamiltonian(s.lattice, 3.05);
        const double ref = oracle::energy(s, h);
        const double got = engine_energy(s, h);
        CHECK(std::abs(got - ref) <= 1e-11 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("per-term energies sum to the total") {
    AnsatzState s = random_state(4, 4, PlanKind::fattn_l1, 4, 3);
    const Hamiltonian h = tfim_hamiltonian(s.lattice, 1.0);
    TreeEngine eng(s);
    eng.rebuild(physical_terms(h));
    double sum = 0.0;
    for (std::size_t t = 0; t < eng.terms().size(); ++t) sum += eng.term_energy(static_cast<int>(t));
    CHECK(std::abs(sum - eng.energy()) < 1e-11);
}

TEST_CASE("oversized lifts are rejected with a capacity error") {
    AnsatzState s = random_state(4, 4, PlanKind::fattn_l1l2, 4, 5);
    const Hamiltonian h = tfim_hamiltonian(s.lattice, 1.0);
    TreeEngine eng(s);
    CHECK_THROWS_AS(eng.rebuild(physical_terms(h)), CapacityError);
}
