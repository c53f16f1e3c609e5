#pragma once

// Independent reference implementations used only by the tests: a naive
// full-state contraction of the network built from generic tensor contractions.

#include <numeric>

#include "fattn/ansatz.hpp"
#include "fattn/model.hpp"
#include "fattn/tensor.hpp"

namespace oracle {

// Apply `op` (rows = new axes, cols = contracted axes) to axes `axes` of `psi`,
// returning the new legs at the positions given by `new_positions`.
inline fattn::DenseTensor contract_full(const fattn::AnsatzState& s) {
    using namespace fattn;
    const TreeLayout& t = s.tree;
    DenseTensor psi(Shape{1}, {1.0});  // the single top leg of dimension 1
    for (int layer = t.top(); layer >= 1; --layer) {
        const std::size_t dl = static_cast<std::size_t>(s.bond_dims[layer - 1]);
        const int nodes = t.nodes_in_layer(layer);
        // Expand each node leg into its two child legs; psi axes are the nodes of `layer` in order.
        for (int i = 0; i < nodes; ++i) {
            DenseTensor w = s.isometry_tensor(layer, i);  // (dl, dl, dp)
            psi = contract(psi, w, {{0, 2}});          // remaining node axes, then (left, right)
        }
        // Axes now: (l_0, r_0, l_1, r_1, ...); reorder to child node indices.
        const int children = t.nodes_in_layer(layer - 1);
        std::vector<std::size_t> order(static_cast<std::size_t>(children));
        for (int i = 0; i < nodes; ++i) {
            auto [l, r] = t.children(layer, i);
            order[l] = static_cast<std::size_t>(2 * i);
            order[r] = static_cast<std::size_t>(2 * i + 1);
        }
        psi = permute(psi, order);
        for (int e : s.plan.entries_in_layer(layer)) {
            const auto& en = s.plan.entries[e];
            DenseTensor u = s.disentangler_tensor(e);  // (lower a, lower b, upper a, upper b)
            DenseTensor moved = contract(psi, u, {{static_cast<std::size_t>(en.a), 2}, {static_cast<std::size_t>(en.b), 3}});
            // moved axes: psi axes without a,b (in order), then lower a, lower b.
            const std::size_t n = psi.rank();
            std::vector<std::size_t> back(n);
            std::size_t k = 0;
            for (std::size_t ax = 0; ax < n; ++ax) {
                if (ax == static_cast<std::size_t>(en.a)) back[ax] = n - 2;
                else if (ax == static_cast<std::size_t>(en.b)) back[ax] = n - 1;
                else back[ax] = k++;
            }
            psi = permute(moved, back);
        }
        (void)dl;
    }
    return psi;
}

inline Eigen::VectorXd state_vector(const fattn::AnsatzState& s) {
    fattn::DenseTensor psi = contract_full(s);
    return Eigen::Map<const Eigen::VectorXd>(psi.data(), static_cast<Eigen::Index>(psi.size()));
}

inline double energy(const fattn::AnsatzState& s, const fattn::Hamiltonian& h) {
    Eigen::VectorXd v = state_vector(s);
    return v.dot(fattn::apply_hamiltonian(h, v));
}

inline void randomize_disentanglers(fattn::AnsatzState& s, std::uint64_t seed) {
    for (std::size_t e = 0; e < s.disentanglers.size(); ++e) {
        const long n = s.disentanglers[e].rows();
        s.disentanglers[e] = fattn::random_isometry_matrix(n, n, seed + 7919 * e);
    }
}

}  // namespace oracle
