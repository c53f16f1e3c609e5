#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fattn/lattice.hpp"

namespace fattn {

struct OneSiteTerm {
    int site = 0;
    Eigen::MatrixXd op;      // d x d
    double coefficient = 1.0;
};

// Row/column index of op is (state of bond.i) * d + (state of bond.j).
struct TwoSiteTerm {
    Bond bond;
    Eigen::MatrixXd op;      // d^2 x d^2, symmetric
    double coefficient = 1.0;
};

struct ProductFactor {
    Eigen::MatrixXd left;
    Eigen::MatrixXd right;
    double weight = 1.0;
};

struct ProductDecomposition {
    std::vector<ProductFactor> factors;
    TwoSiteTerm source;
};

struct Hamiltonian {
    Lattice lattice;
    double lambda = 0.0;
    std::vector<TwoSiteTerm> two_site;
    std::vector<OneSiteTerm> one_site;
};

Eigen::MatrixXd pauli_x();
Eigen::MatrixXd pauli_z();

// Two-site terms carry op = -sx (x) sx with coefficient equal to the bond
// multiplicity; field terms carry op = -lambda sz with coefficient 1.
Hamiltonian tfim_hamiltonian(const Lattice& lat, double lambda);

// Operator-Schmidt decomposition; factors whose weight falls below 1e-14 of
// the operator norm are dropped. The term coefficient is folded into the weights.
ProductDecomposition schmidt_decompose(const TwoSiteTerm& term);
// Same for a bare d^2 x d^2 matrix.
std::vector<ProductFactor> schmidt_decompose(const Eigen::MatrixXd& op, int d);

// Basis ordering of full state vectors: site 0 is the most significant digit,
// matching kron(op_0, op_1, ..., op_{N-1}).
Eigen::VectorXd exact_term_apply(const Eigen::VectorXd& psi, const OneSiteTerm& term, int num_sites, int d);
Eigen::VectorXd exact_term_apply(const Eigen::VectorXd& psi, const TwoSiteTerm& term, int num_sites, int d);

// Full H|psi> (terms applied in canonical order).
Eigen::VectorXd apply_hamiltonian(const Hamiltonian& h, const Eigen::VectorXd& psi);

// Expectation value of H in a product state, one normalized d-vector per site.
double product_state_energy(const Hamiltonian& h, const std::vector<Eigen::VectorXd>& sites);

}  // namespace fattn
