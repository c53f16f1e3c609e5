#include "fattn/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fattn/errors.hpp"

namespace fattn {

double CutBudget::entropy_bound() const { return 2.0 * n * std::log(d) + m * std::log(D); }

int crossing_count(const Cut& cut, const PlacementPlan& plan) {
    const std::set<int> a(cut.part_a.begin(), cut.part_a.end());
    int n = 0;
    for (const auto& e : plan.entries)
        if (e.layer == 1 && a.count(e.a) != a.count(e.b)) ++n;
    return n;
}

CutBudget budget(const Lattice& lat, const Cut& cut, const PlacementPlan& plan, const TreeLayout& tree, int D) {
    if (D < 1) throw ArgumentError("bond dimension must be positive");
    CutBudget b;
    b.cut = cut;
    b.L = boundary_length(lat, cut.part_a);
    b.n = crossing_count(cut, plan);
    b.m = tree_bonds_crossed(cut, tree);
    b.d = lat.d;
    b.D = D;
    b.p = b.L > 0 ? static_cast<double>(b.n) / b.L : 0.0;
    b.c = b.m > 0 ? static_cast<double>(b.L) / b.m : 0.0;
    b.capacity = crossing_count(cut, fattn_plan_l1(lat));
    const int size_a = static_cast<int>(cut.part_a.size());
    b.smaller_side = std::min(size_a, lat.num_sites() - size_a);
    return b;
}

namespace {

void check_requirement_inputs(const CutBudget& b, double k) {
    if (b.m <= 0) throw ArgumentError("required bond dimension is undefined for a cut crossing no tree bond");
    if (!(k >= 1.0)) throw ArgumentError("area-law constant k must be at least 1");
}

}  // namespace

double required_D(const CutBudget& b, double k) {
    check_requirement_inputs(b, k);
    const double log_d = (b.L * std::log(k) - 2.0 * b.n * std::log(b.d)) / b.m;
    return std::max(1.0, std::exp(log_d));
}

double required_D_closed_form(const CutBudget& b, double k) {
    check_requirement_inputs(b, k);
    const double d2 = static_cast<double>(b.d) * b.d;
    return std::pow(d2, b.c * (1.0 - b.p)) * std::pow(k / d2, b.c);
}

Balance balance_counts(const std::array<CutBudget, 3>& cuts, int total) {
    if (total < 3) throw ArgumentError("balance_counts needs at least three disentanglers");
    Balance out;
    const double log_d = std::log(cuts[0].d);
    auto entropy = [&](int i, int n) { return 2.0 * n * log_d + cuts[i].m * std::log(cuts[i].D); };
    double best = -1.0;
    const double eps = 1e-12;
    for (int n1 = 0; n1 <= std::min(total, cuts[0].capacity); ++n1)
        for (int n2 = 0; n2 <= std::min(n1, cuts[1].capacity); ++n2)
            for (int n3 = 0; n3 <= std::min(n2, cuts[2].capacity); ++n3) {
                if (n1 + n2 + n3 > total) continue;
                const double low = std::min({entropy(0, n1), entropy(1, n2), entropy(2, n3)});
                if (low > best + eps) {
                    best = low;
                    out.optima.clear();
                }
                if (std::abs(low - best) <= eps) out.optima.push_back({n1, n2, n3});
            }
    std::sort(out.optima.begin(), out.optima.end(), std::greater<>());
    out.lowest_entropy = best;
    return out;
}

namespace {

// Canonical key of a bipartition: the side that does not contain site 0.
std::vector<int> canonical(const std::vector<int>& part_a, int sites) {
    if (!std::binary_search(part_a.begin(), part_a.end(), 0)) return part_a;
    std::vector<int> other;
    for (int s = 0; s < sites; ++s)
        if (!std::binary_search(part_a.begin(), part_a.end(), s)) other.push_back(s);
    return other;
}

}  // namespace

std::vector<CutReport> scan_all_cuts(const Lattice& lat, const PlacementPlan& plan, const TreeLayout& tree, int D,
                                     double k) {
    const int sites = lat.num_sites();
    std::vector<std::pair<std::string, std::vector<int>>> family;
    for (const auto& c : named_cuts(lat)) family.emplace_back(c.name, c.part_a);
    for (int h = 1; h <= lat.ly; ++h)
        for (int w = 1; w <= lat.lx; ++w) {
            if (w == lat.lx && h == lat.ly) continue;
            for (int y0 = 0; y0 < (h == lat.ly ? 1 : lat.ly); ++y0)
                for (int x0 = 0; x0 < (w == lat.lx ? 1 : lat.lx); ++x0) {
                    std::vector<int> part;
                    for (int dy = 0; dy < h; ++dy)
                        for (int dx = 0; dx < w; ++dx) part.push_back(lat.site(x0 + dx, y0 + dy));
                    std::ostringstream id;
                    id << "rect-" << x0 << '-' << y0 << '-' << w << 'x' << h;
                    family.emplace_back(id.str(), std::move(part));
                }
        }
    for (int j = 1; j < sites; ++j)
        family.emplace_back("prefix-" + std::to_string(j),
                            std::vector<int>(tree.label_site.begin(), tree.label_site.begin() + j));

    std::set<std::vector<int>> seen;
    std::vector<CutReport> rows;
    for (auto& [id, part] : family) {
        const Cut cut = make_cut(lat, part, id);
        if (!seen.insert(canonical(cut.part_a, sites)).second) continue;
        CutReport r;
        r.id = id;
        r.budget = budget(lat, cut, plan, tree, D);
        const double log_k = std::log(k), log_d = std::log(lat.d);
        r.target_entropy = std::min(r.budget.L * log_k, r.budget.smaller_side * log_d);
        const double log_req = (r.target_entropy - 2.0 * r.budget.n * log_d) / r.budget.m;
        r.required_D = std::max(1.0, std::exp(log_req));
        r.satisfied = r.required_D <= D * (1.0 + 1e-12);
        rows.push_back(std::move(r));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const CutReport& a, const CutReport& b) { return a.required_D > b.required_D; });
    return rows;
}

std::string cut_reports_to_csv(const std::vector<CutReport>& rows) {
    std::ostringstream os;
    os.precision(12);
    os << "cut,L,n,m,c,p,entropy_bound,entropy_bound_log_d,required_D,satisfied\n";
    for (const auto& r : rows) {
        const auto& b = r.budget;
        os << r.id << ',' << b.L << ',' << b.n << ',' << b.m << ',' << b.c << ',' << b.p << ',' << b.entropy_bound()
           << ',' << b.entropy_bound() / std::log(b.d) << ',' << r.required_D << ',' << (r.satisfied ? 1 : 0) << '\n';
    }
    return os.str();
}

}  // namespace fattn
