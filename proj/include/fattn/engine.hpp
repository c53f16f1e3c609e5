#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fattn/ansatz.hpp"
#include "fattn/effective.hpp"

namespace fattn {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// (A (x) B) W for a (da * db) x dc matrix W; a null operator is the identity.
RowMat kron_apply(const RowMat& w, int da, int db, const Eigen::MatrixXd* a, const Eigen::MatrixXd* b);

// W^T (A (x) B) W.
Eigen::MatrixXd ascend_op(const RowMat& w, int da, int db, const Eigen::MatrixXd* a, const Eigen::MatrixXd* b);

// Environment of one child leg given the environment `env` of the parent leg
// and the operator `sibling` on the other child. Environments follow
// E = Tr(env * X).
Eigen::MatrixXd descend_op(const RowMat& w, int da, int db, const Eigen::MatrixXd& env,
                           const Eigen::MatrixXd* sibling, bool left_child);

inline double trace_product(const Eigen::MatrixXd& env, const Eigen::MatrixXd& x) {
    return env.cwiseProduct(x.transpose()).sum();
}

/**
 * Contraction engine for the pure tree above the base layer.
 *
 * Terms are supplied already lifted to the base layer. Every intermediate
 * (ascended operators, density matrices, aggregated Hamiltonians, descended
 * product environments) is cached together with a stamp, the largest update
 * clock among the isometries it depends on, so that Gauss-Seidel sweeps only
 * recompute what an update actually invalidated.
 */
class TreeEngine {
public:
    explicit TreeEngine(const AnsatzState& s);

    int base() const { return base_; }
    const AnsatzState& state() const { return s_; }

    // Lift the physical terms with the current disentanglers and lower isometries.
    void rebuild(const std::vector<EffectiveTerm>& physical);
    void set_terms(std::vector<EffectiveTerm> lifted);
    const std::vector<EffectiveTerm>& terms() const { return terms_; }

    // Must be called after the state's isometry (layer > base) changed.
    void isometry_changed(int layer, int index);

    double energy();
    double term_energy(int term);

    const Eigen::MatrixXd& rho(int layer, int index);

    struct IsometryEnv {
        Eigen::MatrixXd y;            // d E / d W, shape (D_parent, D_left * D_right)
        double cone_shift = 0.0;      // sum of term shifts inside the cone
        double cone_constant = 0.0;
        std::vector<int> cone_terms;  // terms touching the node's subtree
    };
    IsometryEnv isometry_environment(int layer, int index, bool shifted);

    // Root problem: E = constants + v^T M v with v the root isometry column.
    Eigen::VectorXd root_apply(const Eigen::VectorXd& v);
    Eigen::MatrixXd root_matrix();
    double constants() const { return constant_; }

    // Uncached evaluation of transient products living on base legs.
    double product_expectation(const Product& p);
    Eigen::MatrixXd hole_environment(const Product& p, int hole);
    // J with E = sum J[(a b), (a' b')] X[(a' b'), (a b)] for X on legs p, q.
    Eigen::MatrixXd pair_environment(const Product& rest, int p, int q);

private:
    struct EngineProduct {
        int term = 0;
        double coef = 1.0;
        int lca = 0;
        std::vector<int> path;                // node ids, sorted
        std::vector<Eigen::MatrixXd> asc;     // parallel to path
        std::vector<std::uint64_t> asc_stamp;
        std::vector<Eigen::MatrixXd> q;
        std::vector<std::uint64_t> q_stamp;
        int pos(int node) const;
    };

    int id(int layer, int index) const { return offset_[static_cast<std::size_t>(layer - base_)] + index; }
    int layer_of(int node) const { return node_layer_[static_cast<std::size_t>(node)]; }
    int index_of(int node) const { return node_index_[static_cast<std::size_t>(node)]; }
    int parent_id(int node) const;
    std::pair<int, int> child_ids(int node) const;
    int dim(int node) const { return s_.bond_dims[static_cast<std::size_t>(layer_of(node))]; }
    int leaf_ancestor(int leaf, int layer) const;

    std::uint64_t ensure_rho(int node);
    std::uint64_t ensure_asc(EngineProduct& p, int pos);
    std::uint64_t ensure_q(EngineProduct& p, int pos);
    std::uint64_t ensure_hagg(int node);

    std::optional<Eigen::MatrixXd> ascend_transient(const Product& p, int node);

    const AnsatzState& s_;
    int base_ = 0;
    int top_ = 0;
    std::vector<int> offset_;
    std::vector<int> node_layer_, node_index_;
    std::vector<RowMat> w_;                    // per node (empty at base)
    std::vector<std::uint64_t> wclock_;
    std::uint64_t clock_ = 0;

    std::vector<Eigen::MatrixXd> rho_;
    std::vector<std::uint64_t> rho_stamp_;
    std::vector<Eigen::MatrixXd> hagg_;
    std::vector<std::uint64_t> hagg_stamp_;

    std::vector<EffectiveTerm> terms_;
    std::vector<EngineProduct> products_;
    std::vector<std::vector<int>> lca_products_;   // per node
    std::vector<std::vector<int>> straddle_;       // per node: products passing through below their LCA
    std::vector<std::vector<int>> term_products_;  // per term
    std::vector<std::vector<int>> cone_terms_;     // per node
    std::vector<double> cone_shift_, cone_constant_;
    double constant_ = 0.0;
};

}  // namespace fattn
