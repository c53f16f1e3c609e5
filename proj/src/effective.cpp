#include "fattn/effective.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <unsupported/Eigen/KroneckerProduct>

#include "fattn/errors.hpp"

namespace fattn {

const Factor* Product::find(int leg) const {
    for (const auto& f : factors)
        if (f.leg == leg) return &f;
    return nullptr;
}

std::vector<EffectiveTerm> physical_terms(const Hamiltonian& h) {
    std::vector<EffectiveTerm> out;
    int source = 0;
    for (const auto& t : h.two_site) {
        EffectiveTerm e;
        e.source = source++;
        e.layer = 0;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * t.coefficient * (t.op + t.op.transpose()));
        e.shift = es.eigenvalues().maxCoeff();
        e.support = {std::min(t.bond.i, t.bond.j), std::max(t.bond.i, t.bond.j)};
        for (const auto& f : schmidt_decompose(t).factors) {
            Product p;
            p.coef = f.weight;
            p.factors.push_back({t.bond.i, f.left});
            p.factors.push_back({t.bond.j, f.right});
            std::sort(p.factors.begin(), p.factors.end(), [](const Factor& a, const Factor& b) { return a.leg < b.leg; });
            e.products.push_back(std::move(p));
        }
        out.push_back(std::move(e));
    }
    for (const auto& t : h.one_site) {
        EffectiveTerm e;
        e.source = source++;
        e.layer = 0;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * t.coefficient * (t.op + t.op.transpose()));
        e.shift = es.eigenvalues().maxCoeff();
        e.support = {t.site};
        Product p;
        p.coef = t.coefficient;
        p.factors.push_back({t.site, t.op});
        e.products.push_back(std::move(p));
        out.push_back(std::move(e));
    }
    return out;
}

int base_layer(const AnsatzState& s) { return std::max(s.plan.max_layer() - 1, 0); }

namespace {

Eigen::MatrixXd op_or_identity(const Factor* f, int dim) {
    if (f && f->op.size() > 0) return f->op;
    return Eigen::MatrixXd::Identity(dim, dim);
}

void sort_factors(Product& p) {
    std::sort(p.factors.begin(), p.factors.end(), [](const Factor& a, const Factor& b) { return a.leg < b.leg; });
}

// Upper bound on the number of products a single lifted term may expand into.
constexpr std::size_t kMaxProductsPerTerm = 1u << 16;

// Cartesian product of two product lists; factors on distinct legs.
std::vector<Product> combine(const std::vector<Product>& lhs, const std::vector<Product>& rhs) {
    if (lhs.size() * rhs.size() > kMaxProductsPerTerm)
        throw CapacityError("lifted term expands into more than " + std::to_string(kMaxProductsPerTerm) +
                            " operator products; use a smaller bond dimension or fewer disentangler layers");
    std::vector<Product> out;
    out.reserve(lhs.size() * rhs.size());
    for (const auto& a : lhs)
        for (const auto& b : rhs) {
            Product p;
            p.coef = a.coef * b.coef;
            p.factors = a.factors;
            p.factors.insert(p.factors.end(), b.factors.begin(), b.factors.end());
            out.push_back(std::move(p));
        }
    return out;
}

std::vector<int> merge_sorted(std::vector<int> a, const std::vector<int>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

void finish(EffectiveTerm& out, std::vector<Product>&& products) {
    for (auto& p : products) {
        if (p.factors.empty()) {
            out.constant += p.coef;
            continue;
        }
        sort_factors(p);
        out.products.push_back(std::move(p));
    }
}

}  // namespace

EffectiveTerm absorb_layer(const EffectiveTerm& t, const AnsatzState& s, int layer, const KetOverride* ov,
                           bool* touched, int skip_entry) {
    if (t.layer != layer - 1) throw ArgumentError("absorb_layer: term lives on the wrong layer");
    const int dim = s.bond_dims[static_cast<std::size_t>(layer - 1)];
    const std::set<int> support(t.support.begin(), t.support.end());
    std::vector<int> hit;  // plan entries of this layer touching the support
    for (int e : s.plan.entries_in_layer(layer)) {
        if (e == skip_entry) continue;
        const auto& en = s.plan.entries[static_cast<std::size_t>(e)];
        if (support.count(en.a) || support.count(en.b)) hit.push_back(e);
    }
    const bool ov_here = ov && ov->kind == KetOverride::Kind::disentangler && ov->layer == layer;

    EffectiveTerm out;
    out.source = t.source;
    out.layer = t.layer;
    out.shift = t.shift;
    out.constant = t.constant;
    out.support = t.support;
    for (int e : hit) {
        const auto& en = s.plan.entries[static_cast<std::size_t>(e)];
        out.support = merge_sorted(out.support, {en.a, en.b});
        if (ov_here && ov->index == e && touched) *touched = true;
    }
    if (hit.empty()) {
        out.products = t.products;
        return out;
    }

    std::vector<Product> all;
    for (const auto& p : t.products) {
        Product rest;
        rest.coef = p.coef;
        std::set<int> covered;
        for (int e : hit) {
            const auto& en = s.plan.entries[static_cast<std::size_t>(e)];
            covered.insert(en.a);
            covered.insert(en.b);
        }
        for (const auto& f : p.factors)
            if (!covered.count(f.leg)) rest.factors.push_back(f);
        std::vector<Product> acc{rest};
        for (int e : hit) {
            const auto& en = s.plan.entries[static_cast<std::size_t>(e)];
            const Factor* fa = p.find(en.a);
            const Factor* fb = p.find(en.b);
            const bool asym = ov_here && ov->index == e;
            const Eigen::MatrixXd& u = s.disentanglers[static_cast<std::size_t>(e)];
            const Eigen::MatrixXd& ket = asym ? ov->ket : u;
            std::vector<Product> pieces;
            if (!fa && !fb && !asym) {
                continue;  // identity passes through a unitary
            }
            const Eigen::MatrixXd x = Eigen::kroneckerProduct(op_or_identity(fa, dim), op_or_identity(fb, dim)).eval();
            const Eigen::MatrixXd m = u.transpose() * x * ket;
            for (const auto& f : schmidt_decompose(m, dim)) {
                Product q;
                q.coef = f.weight;
                q.factors.push_back({en.a, f.left});
                q.factors.push_back({en.b, f.right});
                pieces.push_back(std::move(q));
            }
            acc = combine(acc, pieces);
        }
        if (all.size() + acc.size() > kMaxProductsPerTerm)
            throw CapacityError("lifted term expands into more than " + std::to_string(kMaxProductsPerTerm) +
                                " operator products; use a smaller bond dimension or fewer disentangler layers");
        for (auto& q : acc) all.push_back(std::move(q));
    }
    finish(out, std::move(all));
    return out;
}

EffectiveTerm ascend_layer(const EffectiveTerm& t, const AnsatzState& s, int layer, const KetOverride* ov,
                           bool* touched) {
    if (t.layer != layer - 1) throw ArgumentError("ascend_layer: term lives on the wrong layer");
    const TreeLayout& tree = s.tree;
    const int dim = s.bond_dims[static_cast<std::size_t>(layer - 1)];
    const bool ov_here = ov && ov->kind == KetOverride::Kind::isometry && ov->layer == layer;

    EffectiveTerm out;
    out.source = t.source;
    out.layer = layer;
    out.shift = t.shift;
    out.constant = t.constant;
    std::vector<int> parents;
    for (int leg : t.support) parents.push_back(tree.parent_of(layer - 1, leg));
    out.support = merge_sorted({}, parents);
    if (ov_here && touched && std::binary_search(out.support.begin(), out.support.end(), ov->index)) *touched = true;

    std::vector<Product> all;
    for (const auto& p : t.products) {
        Product q;
        q.coef = p.coef;
        for (int parent : out.support) {
            auto [l, r] = tree.children(layer, parent);
            const Factor* fl = p.find(l);
            const Factor* fr = p.find(r);
            const bool asym = ov_here && ov->index == parent;
            if (!fl && !fr && !asym) continue;
            const Eigen::MatrixXd& w = s.isometry(layer, parent);
            const Eigen::MatrixXd& ket = asym ? ov->ket : w;
            const Eigen::MatrixXd x = Eigen::kroneckerProduct(op_or_identity(fl, dim), op_or_identity(fr, dim)).eval();
            q.factors.push_back({parent, w.transpose() * x * ket});
        }
        all.push_back(std::move(q));
    }
    finish(out, std::move(all));
    return out;
}

EffectiveTerm absorb_disentanglers(const EffectiveTerm& t, const AnsatzState& s) {
    if (s.plan.max_layer() < 1) return t;
    return absorb_layer(t, s, 1);
}

EffectiveTerm lift_to_base(const EffectiveTerm& t, const AnsatzState& s, bool absorb_top, const KetOverride* ov,
                           bool* touched) {
    const int kappa = s.plan.max_layer();
    EffectiveTerm cur = t;
    for (int l = 1; l <= kappa; ++l) {
        if (l < kappa || absorb_top) cur = absorb_layer(cur, s, l, ov, touched);
        if (l < kappa) cur = ascend_layer(cur, s, l, ov, touched);
    }
    return cur;
}

void complete_support(EffectiveTerm& t, const std::vector<int>& leg_dims) {
    for (auto& p : t.products) {
        for (int leg : t.support)
            if (!p.find(leg)) {
                const int dim = leg_dims.at(static_cast<std::size_t>(leg));
                p.factors.push_back({leg, Eigen::MatrixXd::Identity(dim, dim)});
            }
        sort_factors(p);
    }
}

}  // namespace fattn
