#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "doctest.h"
#include "fattn/errors.hpp"
#include "fattn/model.hpp"

using namespace fattn;

namespace {

Eigen::MatrixXd reconstruct(const std::vector<ProductFactor>& fs) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(fs.front().left.rows() * fs.front().right.rows(),
                                              fs.front().left.cols() * fs.front().right.cols());
    for (const auto& f : fs) m += f.weight * Eigen::kroneckerProduct(f.left, f.right).eval();
    return m;
}

// Dense Kronecker embedding of a local operator on sites (first, first+1, ...).
Eigen::MatrixXd embed(const std::vector<Eigen::MatrixXd>& ops) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(1, 1);
    for (const auto& o : ops) m = Eigen::kroneckerProduct(m, o).eval();
    return m;
}

}  // namespace

TEST_CASE("tfim_hamiltonian term counts and coefficients") {
    Hamiltonian h = tfim_hamiltonian(build_lattice(8, 8), 3.05);
    CHECK(h.two_site.size() == 128);
    CHECK(h.one_site.size() == 64);
    Hamiltonian h0 = tfim_hamiltonian(build_lattice(4, 4), 0.0);
    for (const auto& t : h0.one_site) CHECK((t.coefficient * t.op).norm() == 0.0);
    Hamiltonian h24 = tfim_hamiltonian(build_lattice(2, 4), 1.0);
    for (const auto& t : h24.two_site) {
        if (t.bond.axis == Axis::x) CHECK(t.coefficient == 2.0);
        else CHECK(t.coefficient == 1.0);
        CHECK((t.op - t.op.transpose()).norm() == 0.0);
    }
    CHECK_THROWS_AS(tfim_hamiltonian(build_lattice(4, 4, 3), 1.0), UnsupportedModelError);
}

TEST_CASE("schmidt_decompose: ranks and reconstruction") {
    Hamiltonian h = tfim_hamiltonian(build_lattice(4, 4), 1.0);
    auto p = schmidt_decompose(h.two_site[0]);
    CHECK(p.factors.size() == 1);
    CHECK((reconstruct(p.factors) - h.two_site[0].coefficient * h.two_site[0].op).norm() < 1e-12);

    Eigen::MatrixXd swap = Eigen::MatrixXd::Zero(4, 4);
    swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 1;
    auto fs = schmidt_decompose(swap, 2);
    CHECK(fs.size() == 4);
    CHECK((reconstruct(fs) - swap).norm() < 1e-12);

    std::mt19937_64 gen(11);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd a(4, 4);
        for (int i = 0; i < 16; ++i) a.data()[i] = dist(gen);
        Eigen::MatrixXd sym = a + a.transpose();
        auto f = schmidt_decompose(sym, 2);
        CHECK(f.size() <= 4);
        CHECK((reconstruct(f) - sym).norm() < 1e-12);
    }
}

TEST_CASE("exact_term_apply: identity, product state and Kronecker oracle") {
    const int n = 6, d = 2;
    std::mt19937_64 gen(12);
    std::normal_distribution<double> dist;
    Eigen::VectorXd psi(1 << n);
    for (auto& v : psi) v = dist(gen);
    OneSiteTerm id{2, Eigen::MatrixXd::Identity(2, 2), 1.0};
    CHECK((exact_term_apply(psi, id, n, d) - psi).norm() == 0.0);

    Eigen::VectorXd up = Eigen::VectorXd::Zero(1 << n);
    up(0) = 1.0;
    for (int s = 0; s < n; ++s) {
        OneSiteTerm z{s, pauli_z(), 1.0};
        CHECK(up.dot(exact_term_apply(up, z, n, d)) == doctest::Approx(1.0));
    }

    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd op(4, 4);
        for (int i = 0; i < 16; ++i) op.data()[i] = dist(gen);
        op = op + op.transpose().eval();
        const int i = trial % 3, j = i + 1 + trial % 2;
        TwoSiteTerm t{Bond{i, j, Axis::x, 1}, op, 0.7};
        // Oracle: permute j next to i via a dense swap-free construction.
        Eigen::MatrixXd full = Eigen::MatrixXd::Zero(1 << n, 1 << n);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int ap = 0; ap < 2; ++ap)
                    for (int bp = 0; bp < 2; ++bp) {
                        std::vector<Eigen::MatrixXd> ops(n, Eigen::MatrixXd::Identity(2, 2));
                        Eigen::MatrixXd ea = Eigen::MatrixXd::Zero(2, 2), eb = Eigen::MatrixXd::Zero(2, 2);
                        ea(a, ap) = 1;
                        eb(b, bp) = 1;
                        ops[i] = ea;
                        ops[j] = eb;
                        full += op(a * 2 + b, ap * 2 + bp) * embed(ops);
                    }
        CHECK((exact_term_apply(psi, t, n, d) - 0.7 * full * psi).norm() < 1e-13 * (1 + psi.norm() * full.norm()));
    }
    Eigen::VectorXd wrong(5);
    CHECK_THROWS_AS(exact_term_apply(wrong, id, n, d), DimensionError);
}

TEST_CASE("product-state energy matches full expectation") {
    Lattice lat = build_lattice(2, 4);
    Hamiltonian h = tfim_hamiltonian(lat, 1.3);
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> ang(0, 6.283185307179586);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Eigen::VectorXd> sites;
        Eigen::VectorXd psi = Eigen::VectorXd::Ones(1);
        for (int s = 0; s < lat.num_sites(); ++s) {
            const double t = ang(gen);
            Eigen::VectorXd v(2);
            v << std::cos(t), std::sin(t);
            sites.push_back(v);
            psi = Eigen::kroneckerProduct(psi, v).eval();
        }
        CHECK(std::abs(psi.dot(apply_hamiltonian(h, psi)) - product_state_energy(h, sites)) < 1e-12);
    }
    // All spins up along z: energy is -lambda per site.
    Hamiltonian h88 = tfim_hamiltonian(build_lattice(8, 8), 2.5);
    std::vector<Eigen::VectorXd> ups(64, Eigen::VectorXd::Unit(2, 0));
    CHECK(product_state_energy(h88, ups) == doctest::Approx(-64 * 2.5));
}
