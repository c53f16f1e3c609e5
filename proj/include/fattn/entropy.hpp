#pragma once

#include <array>
#include <string>
#include <vector>

#include "fattn/ansatz.hpp"
#include "fattn/lattice.hpp"

namespace fattn {

// Entanglement budget of one bipartition. Entropies are natural logarithms.
struct CutBudget {
    Cut cut;
    int L = 0;         // lattice bonds crossing the cut
    int n = 0;         // first-layer disentanglers of the plan straddling the cut
    int m = 1;         // tree bonds crossed
    int d = 2;
    int D = 1;
    double p = 0.0;    // n / L
    double c = 0.0;    // L / m
    int capacity = 0;  // straddling entries of the maximal site-disjoint placement
    int smaller_side = 0;  // sites on the smaller side of the cut

    // 2 n log d + m log D
    double entropy_bound() const;
};

// Number of first-layer plan entries whose two sites lie on opposite sides.
int crossing_count(const Cut& cut, const PlacementPlan& plan);

CutBudget budget(const Lattice& lat, const Cut& cut, const PlacementPlan& plan, const TreeLayout& tree, int D);

// Solves k^L = D^m d^(2n) for D, clamped below at 1.
double required_D(const CutBudget& b, double k);

// The same requirement in the form (d^2)^(c(1-p)) (k/d^2)^c, without the clamp.
double required_D_closed_form(const CutBudget& b, double k);

struct Balance {
    std::vector<std::array<int, 3>> optima;  // best first
    double lowest_entropy = 0.0;             // max over triples of min(S_1, S_2, S_3)
};

/**
 * Distributes at most `total` disentanglers over three cuts, ordered from the
 * fewest tree bonds crossed to the most (green, blue, red on 8x8). Triples obey
 * n_1 >= n_2 >= n_3 and n_i <= capacity_i, and the search maximizes the lowest
 * of I_i = d^(2 n_i) D^(m_i). Ties prefer larger n_1, then n_2, then n_3.
 */
Balance balance_counts(const std::array<CutBudget, 3>& cuts, int total);

struct CutReport {
    std::string id;
    CutBudget budget;
    double target_entropy = 0.0;  // min(L log k, smaller_side log d)
    double required_D = 1.0;      // bond dimension needed for the target
    bool satisfied = false;       // required_D <= D
};

/**
 * Evaluates every contiguous rectangular block (periodic wrap, deduplicated by
 * bipartition) and every prefix of the block-recursive site labeling, plus the
 * named cuts. The area-law target L log k is capped by the Hilbert-space bound
 * of the smaller side. Rows are sorted by required_D / D, worst first.
 */
std::vector<CutReport> scan_all_cuts(const Lattice& lat, const PlacementPlan& plan, const TreeLayout& tree, int D,
                                     double k);

// Columns: cut, L, n, m, c, p, entropy_bound, entropy_bound_log_d, required_D, satisfied.
std::string cut_reports_to_csv(const std::vector<CutReport>& rows);

}  // namespace fattn
