#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fattn/ansatz.hpp"
#include "fattn/model.hpp"

namespace fattn {

// One-leg operator. An empty matrix stands for the identity.
struct Factor {
    int leg = 0;
    Eigen::MatrixXd op;
};

// coef * (tensor product of factors), identity on every other leg.
// Factors are kept sorted by leg.
struct Product {
    double coef = 1.0;
    std::vector<Factor> factors;

    const Factor* find(int leg) const;
};

// A Hamiltonian term expressed on the legs of one layer. `support` lists the
// legs the term acts on and every product carries a factor on each of them;
// `constant` collects products that reduced to a multiple of the identity.
struct EffectiveTerm {
    int source = 0;          // index into the canonical physical term list
    int layer = 0;           // legs are nodes of this layer (0 = sites)
    double shift = 0.0;      // largest eigenvalue of the physical term
    double constant = 0.0;
    std::vector<int> support;
    std::vector<Product> products;
};

// Canonical ordering: two-site terms in bond order, then one-site terms.
std::vector<EffectiveTerm> physical_terms(const Hamiltonian& h);

// Replaces one tensor on the ket side only; used to probe environments.
struct KetOverride {
    enum class Kind { isometry, disentangler } kind = Kind::isometry;
    int layer = 0;
    int index = 0;           // node index or plan entry index
    Eigen::MatrixXd ket;
};

// U^T O U for every layer-`layer` disentangler touching the term.
// `skip_entry` excludes one plan entry. `touched` reports whether an override
// tensor acted on the term.
EffectiveTerm absorb_layer(const EffectiveTerm& t, const AnsatzState& s, int layer,
                           const KetOverride* ov = nullptr, bool* touched = nullptr, int skip_entry = -1);

// W^T (A (x) B) W for every layer-`layer` isometry below the term's support.
EffectiveTerm ascend_layer(const EffectiveTerm& t, const AnsatzState& s, int layer,
                           const KetOverride* ov = nullptr, bool* touched = nullptr);

// Layer-1 disentangler absorption of a physical term.
EffectiveTerm absorb_disentanglers(const EffectiveTerm& t, const AnsatzState& s);

// Lowest layer whose legs form the leaves of the pure tree part, i.e. the layer
// below the topmost disentangler layer (0 without disentanglers).
int base_layer(const AnsatzState& s);

// Lift a physical term through every tensor below the base layer. With
// `absorb_top == false` the disentanglers of the topmost layer are left out.
EffectiveTerm lift_to_base(const EffectiveTerm& t, const AnsatzState& s, bool absorb_top = true,
                           const KetOverride* ov = nullptr, bool* touched = nullptr);

// Adds explicit identity factors so every product covers the full support.
void complete_support(EffectiveTerm& t, const std::vector<int>& leg_dims);

}  // namespace fattn
