#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fattn/lattice.hpp"
#include "fattn/tensor.hpp"

namespace fattn {

enum class PlanKind { ttn, attn, fattn_l1, fattn_l2, fattn_l1l2 };

std::string to_string(PlanKind k);
PlanKind parse_plan_kind(const std::string& s);

// A disentangler acting on the legs of nodes `a` and `b` of layer `layer - 1`
// (physical sites when layer == 1). Its matrix maps (upper a, upper b) to
// (lower a, lower b), row index lower_a * D_b + lower_b.
struct PlanEntry {
    int layer = 1;
    int a = 0;
    int b = 0;
    bool operator==(const PlanEntry&) const = default;
};

struct PlacementPlan {
    PlanKind kind = PlanKind::ttn;
    std::vector<PlanEntry> entries;

    int max_layer() const;
    std::vector<int> entries_in_layer(int layer) const;
};

struct PlanViolation {
    PlanEntry first;
    PlanEntry second;
    std::string reason;
};

struct PlanReport {
    bool ok = true;
    std::vector<PlanViolation> violations;
};

PlacementPlan ttn_plan();
PlacementPlan attn_plan(const Lattice& lat);
PlacementPlan fattn_plan_l1(const Lattice& lat);
PlacementPlan fattn_plan_l2(const Lattice& lat);
PlacementPlan combined_plan(const PlacementPlan& p1, const PlacementPlan& p2);
PlacementPlan make_plan(const Lattice& lat, PlanKind kind);

PlanReport validate_plan(const PlacementPlan& plan, const Lattice& lat, PlanKind kind);

// Neighbouring node pairs of the coarse lattice that layer `layer` disentanglers act on.
bool coarse_neighbors(const TreeLayout& tree, int layer, int a, int b);

std::string plan_to_text(const PlacementPlan& plan);
PlacementPlan plan_from_text(const std::string& text);

// Leg dimension above a layer-l node: min(D, d^(2^l)), and 1 at the root.
std::vector<int> bond_schedule(const TreeLayout& tree, int d, int D);

/**
 * The variational state psi = U_1 W_1 U_2 W_2 ... W_top |root>.
 *
 * Isometries are stored as (D_left * D_right) x D_parent matrices with row
 * index left * D_right + right. Disentanglers are square unitary matrices in
 * the PlanEntry convention.
 */
struct AnsatzState {
    Lattice lattice;
    TreeLayout tree;
    PlacementPlan plan;
    int D = 1;
    std::vector<int> bond_dims;
    std::vector<std::vector<Eigen::MatrixXd>> isometries;  // [layer - 1][node]
    std::vector<Eigen::MatrixXd> disentanglers;            // parallel to plan.entries

    Eigen::MatrixXd& isometry(int layer, int index) { return isometries.at(layer - 1).at(index); }
    const Eigen::MatrixXd& isometry(int layer, int index) const { return isometries.at(layer - 1).at(index); }

    DenseTensor isometry_tensor(int layer, int index) const;  // (D_left, D_right, D_parent)
    DenseTensor disentangler_tensor(int entry) const;         // (lower a, lower b, upper a, upper b)

    double max_isometry_residual() const;
    double max_unitary_residual() const;
};

// Random isometries (seeded), identity disentanglers. With `warm`, isometries
// are copied (zero padded and completed to isometries when D grows) and
// disentanglers matching an entry of the warm plan are copied.
AnsatzState init_state(const Lattice& lat, const PlacementPlan& plan, int D, std::uint64_t seed,
                       const AnsatzState* warm = nullptr);

void save_state(const std::string& dir, const AnsatzState& s);
AnsatzState load_state(const std::string& dir);

}  // namespace fattn
