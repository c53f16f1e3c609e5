#include "fattn/engine.hpp"

#include <algorithm>
#include <limits>

#include <unsupported/Eigen/KroneckerProduct>

#include "fattn/errors.hpp"

namespace fattn {

namespace {
constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();
}

RowMat kron_apply(const RowMat& w, int da, int db, const Eigen::MatrixXd* a, const Eigen::MatrixXd* b) {
    const Eigen::Index dc = w.cols();
    RowMat z;
    if (b) {
        z.resize(w.rows(), dc);
        for (int i = 0; i < da; ++i) z.middleRows(i * db, db).noalias() = (*b) * w.middleRows(i * db, db);
    }
    const RowMat& src = b ? z : w;
    if (!a) return b ? z : w;
    RowMat out(w.rows(), dc);
    Eigen::Map<const RowMat> sm(src.data(), da, db * dc);
    Eigen::Map<RowMat> om(out.data(), da, db * dc);
    om.noalias() = (*a) * sm;
    return out;
}

Eigen::MatrixXd ascend_op(const RowMat& w, int da, int db, const Eigen::MatrixXd* a, const Eigen::MatrixXd* b) {
    if (!a && !b) return Eigen::MatrixXd::Identity(w.cols(), w.cols());
    const RowMat k = kron_apply(w, da, db, a, b);
    Eigen::MatrixXd out = w.transpose() * k;
    return out;
}

Eigen::MatrixXd descend_op(const RowMat& w, int da, int db, const Eigen::MatrixXd& env,
                           const Eigen::MatrixXd* sibling, bool left_child) {
    const Eigen::Index dc = w.cols();
    RowMat t = w * env;
    Eigen::MatrixXd st;
    if (sibling) st = sibling->transpose();
    if (left_child) {
        const RowMat z = kron_apply(w, da, db, nullptr, sibling ? &st : nullptr);
        Eigen::Map<const RowMat> tm(t.data(), da, db * dc);
        Eigen::Map<const RowMat> zm(z.data(), da, db * dc);
        Eigen::MatrixXd out = tm * zm.transpose();
        return out;
    }
    const RowMat z = kron_apply(w, da, db, sibling ? &st : nullptr, nullptr);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(db, db);
    for (int i = 0; i < da; ++i) out.noalias() += t.middleRows(i * db, db) * z.middleRows(i * db, db).transpose();
    return out;
}

int TreeEngine::EngineProduct::pos(int node) const {
    auto it = std::lower_bound(path.begin(), path.end(), node);
    if (it == path.end() || *it != node) return -1;
    return static_cast<int>(it - path.begin());
}

TreeEngine::TreeEngine(const AnsatzState& s) : s_(s) {
    base_ = base_layer(s);
    top_ = s.tree.top();
    int total = 0;
    for (int l = base_; l <= top_; ++l) {
        offset_.push_back(total);
        for (int i = 0; i < s.tree.nodes_in_layer(l); ++i) {
            node_layer_.push_back(l);
            node_index_.push_back(i);
        }
        total += s.tree.nodes_in_layer(l);
    }
    w_.resize(static_cast<std::size_t>(total));
    wclock_.assign(static_cast<std::size_t>(total), 0);
    for (int n = 0; n < total; ++n)
        if (layer_of(n) > base_) w_[static_cast<std::size_t>(n)] = s.isometry(layer_of(n), index_of(n));
    rho_.resize(static_cast<std::size_t>(total));
    rho_stamp_.assign(static_cast<std::size_t>(total), kNever);
    hagg_.resize(static_cast<std::size_t>(total));
    hagg_stamp_.assign(static_cast<std::size_t>(total), kNever);
}

int TreeEngine::parent_id(int node) const {
    const int l = layer_of(node);
    if (l >= top_) return -1;
    return id(l + 1, s_.tree.parent_of(l, index_of(node)));
}

std::pair<int, int> TreeEngine::child_ids(int node) const {
    const int l = layer_of(node);
    auto [a, b] = s_.tree.children(l, index_of(node));
    return {id(l - 1, a), id(l - 1, b)};
}

int TreeEngine::leaf_ancestor(int leaf, int layer) const { return s_.tree.ancestor(base_, leaf, layer); }

void TreeEngine::isometry_changed(int layer, int index) {
    if (layer <= base_) throw ArgumentError("isometry_changed: layer is below the tree engine");
    const int n = id(layer, index);
    w_[static_cast<std::size_t>(n)] = s_.isometry(layer, index);
    wclock_[static_cast<std::size_t>(n)] = ++clock_;
}

void TreeEngine::rebuild(const std::vector<EffectiveTerm>& physical) {
    std::vector<EffectiveTerm> lifted;
    lifted.reserve(physical.size());
    for (const auto& t : physical) lifted.push_back(lift_to_base(t, s_));
    set_terms(std::move(lifted));
}

void TreeEngine::set_terms(std::vector<EffectiveTerm> lifted) {
    const std::size_t total = node_layer_.size();
    const int leaf_dim = s_.bond_dims[static_cast<std::size_t>(base_)];
    std::vector<int> leg_dims(static_cast<std::size_t>(s_.tree.nodes_in_layer(base_)), leaf_dim);
    terms_ = std::move(lifted);
    products_.clear();
    lca_products_.assign(total, {});
    straddle_.assign(total, {});
    term_products_.assign(terms_.size(), {});
    cone_terms_.assign(total, {});
    cone_shift_.assign(total, 0.0);
    cone_constant_.assign(total, 0.0);
    constant_ = 0.0;
    hagg_stamp_.assign(total, kNever);

    for (std::size_t t = 0; t < terms_.size(); ++t) {
        EffectiveTerm& term = terms_[t];
        if (term.layer != base_) throw ArgumentError("set_terms: term is not on the base layer");
        complete_support(term, leg_dims);
        constant_ += term.constant;
        std::vector<int> cone;
        for (int leg : term.support)
            for (int l = base_; l <= top_; ++l) cone.push_back(id(l, leaf_ancestor(leg, l)));
        std::sort(cone.begin(), cone.end());
        cone.erase(std::unique(cone.begin(), cone.end()), cone.end());
        for (int n : cone) {
            cone_terms_[static_cast<std::size_t>(n)].push_back(static_cast<int>(t));
            cone_shift_[static_cast<std::size_t>(n)] += term.shift;
            cone_constant_[static_cast<std::size_t>(n)] += term.constant;
        }
        for (const auto& p : term.products) {
            EngineProduct ep;
            ep.term = static_cast<int>(t);
            ep.coef = p.coef;
            int lca_layer = base_;
            for (; lca_layer <= top_; ++lca_layer) {
                const int first = leaf_ancestor(p.factors.front().leg, lca_layer);
                bool same = true;
                for (const auto& f : p.factors) same = same && leaf_ancestor(f.leg, lca_layer) == first;
                if (same) break;
            }
            ep.lca = id(lca_layer, leaf_ancestor(p.factors.front().leg, lca_layer));
            for (const auto& f : p.factors)
                for (int l = base_; l <= lca_layer; ++l) ep.path.push_back(id(l, leaf_ancestor(f.leg, l)));
            std::sort(ep.path.begin(), ep.path.end());
            ep.path.erase(std::unique(ep.path.begin(), ep.path.end()), ep.path.end());
            ep.asc.resize(ep.path.size());
            ep.asc_stamp.assign(ep.path.size(), kNever);
            ep.q.resize(ep.path.size());
            ep.q_stamp.assign(ep.path.size(), kNever);
            for (const auto& f : p.factors) {
                const int k = ep.pos(id(base_, f.leg));
                ep.asc[static_cast<std::size_t>(k)] = f.op;
                ep.asc_stamp[static_cast<std::size_t>(k)] = 0;
            }
            const int pid = static_cast<int>(products_.size());
            lca_products_[static_cast<std::size_t>(ep.lca)].push_back(pid);
            for (int n : ep.path)
                if (n != ep.lca && layer_of(n) > base_) straddle_[static_cast<std::size_t>(n)].push_back(pid);
            term_products_[t].push_back(pid);
            products_.push_back(std::move(ep));
        }
    }
    for (int leaf = 0; leaf < s_.tree.nodes_in_layer(base_); ++leaf) {
        const int n = id(base_, leaf);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(leaf_dim, leaf_dim);
        for (int pid : lca_products_[static_cast<std::size_t>(n)]) {
            const auto& ep = products_[static_cast<std::size_t>(pid)];
            h += ep.coef * ep.asc[0];
        }
        hagg_[static_cast<std::size_t>(n)] = std::move(h);
        hagg_stamp_[static_cast<std::size_t>(n)] = 0;
    }
}

std::uint64_t TreeEngine::ensure_rho(int node) {
    const std::size_t n = static_cast<std::size_t>(node);
    const int par = parent_id(node);
    if (par < 0) {
        if (rho_stamp_[n] == kNever) {
            rho_[n] = Eigen::MatrixXd::Ones(1, 1);
            rho_stamp_[n] = 0;
        }
        return 0;
    }
    const std::uint64_t stamp = std::max(ensure_rho(par), wclock_[static_cast<std::size_t>(par)]);
    if (rho_stamp_[n] == stamp) return stamp;
    auto [a, b] = child_ids(par);
    rho_[n] = descend_op(w_[static_cast<std::size_t>(par)], dim(a), dim(b), rho_[static_cast<std::size_t>(par)],
                         nullptr, a == node);
    rho_stamp_[n] = stamp;
    return stamp;
}

const Eigen::MatrixXd& TreeEngine::rho(int layer, int index) {
    const int n = id(layer, index);
    ensure_rho(n);
    return rho_[static_cast<std::size_t>(n)];
}

std::uint64_t TreeEngine::ensure_asc(EngineProduct& p, int pos) {
    const std::size_t k = static_cast<std::size_t>(pos);
    const int node = p.path[k];
    if (layer_of(node) == base_) return 0;
    auto [a, b] = child_ids(node);
    const int pa = p.pos(a), pb = p.pos(b);
    std::uint64_t stamp = wclock_[static_cast<std::size_t>(node)];
    if (pa >= 0) stamp = std::max(stamp, ensure_asc(p, pa));
    if (pb >= 0) stamp = std::max(stamp, ensure_asc(p, pb));
    if (p.asc_stamp[k] == stamp) return stamp;
    p.asc[k] = ascend_op(w_[static_cast<std::size_t>(node)], dim(a), dim(b),
                         pa >= 0 ? &p.asc[static_cast<std::size_t>(pa)] : nullptr,
                         pb >= 0 ? &p.asc[static_cast<std::size_t>(pb)] : nullptr);
    p.asc_stamp[k] = stamp;
    return stamp;
}

std::uint64_t TreeEngine::ensure_q(EngineProduct& p, int pos) {
    const std::size_t k = static_cast<std::size_t>(pos);
    const int node = p.path[k];
    const int par = parent_id(node);
    const Eigen::MatrixXd* env = nullptr;
    std::uint64_t stamp = 0;
    if (par == p.lca) {
        stamp = ensure_rho(par);
        env = &rho_[static_cast<std::size_t>(par)];
    } else {
        const int ppos = p.pos(par);
        stamp = ensure_q(p, ppos);
        env = &p.q[static_cast<std::size_t>(ppos)];
    }
    auto [a, b] = child_ids(par);
    const int sib = a == node ? b : a;
    const int spos = p.pos(sib);
    if (spos >= 0) stamp = std::max(stamp, ensure_asc(p, spos));
    stamp = std::max(stamp, wclock_[static_cast<std::size_t>(par)]);
    if (p.q_stamp[k] == stamp) return stamp;
    p.q[k] = descend_op(w_[static_cast<std::size_t>(par)], dim(a), dim(b), *env,
                        spos >= 0 ? &p.asc[static_cast<std::size_t>(spos)] : nullptr, a == node);
    p.q_stamp[k] = stamp;
    return stamp;
}

std::uint64_t TreeEngine::ensure_hagg(int node) {
    const std::size_t n = static_cast<std::size_t>(node);
    if (layer_of(node) == base_) return hagg_stamp_[n];
    auto [a, b] = child_ids(node);
    std::uint64_t stamp = std::max({ensure_hagg(a), ensure_hagg(b), wclock_[n]});
    for (int pid : lca_products_[n]) {
        auto& p = products_[static_cast<std::size_t>(pid)];
        stamp = std::max({stamp, ensure_asc(p, p.pos(a)), ensure_asc(p, p.pos(b))});
    }
    if (hagg_stamp_[n] == stamp) return stamp;
    const RowMat& w = w_[n];
    const int da = dim(a), db = dim(b);
    RowMat k = kron_apply(w, da, db, &hagg_[static_cast<std::size_t>(a)], nullptr);
    k += kron_apply(w, da, db, nullptr, &hagg_[static_cast<std::size_t>(b)]);
    for (int pid : lca_products_[n]) {
        const auto& p = products_[static_cast<std::size_t>(pid)];
        k += p.coef * kron_apply(w, da, db, &p.asc[static_cast<std::size_t>(p.pos(a))],
                                 &p.asc[static_cast<std::size_t>(p.pos(b))]);
    }
    hagg_[n] = w.transpose() * k;
    hagg_stamp_[n] = stamp;
    return stamp;
}

double TreeEngine::energy() {
    const int root = id(top_, 0);
    ensure_hagg(root);
    return constant_ + hagg_[static_cast<std::size_t>(root)](0, 0);
}

double TreeEngine::term_energy(int term) {
    double e = terms_.at(static_cast<std::size_t>(term)).constant;
    for (int pid : term_products_[static_cast<std::size_t>(term)]) {
        auto& p = products_[static_cast<std::size_t>(pid)];
        const int k = p.pos(p.lca);
        ensure_asc(p, k);
        ensure_rho(p.lca);
        e += p.coef * trace_product(rho_[static_cast<std::size_t>(p.lca)], p.asc[static_cast<std::size_t>(k)]);
    }
    return e;
}

TreeEngine::IsometryEnv TreeEngine::isometry_environment(int layer, int index, bool shifted) {
    if (layer <= base_) throw ArgumentError("isometry_environment: layer is below the tree engine");
    const int node = id(layer, index);
    const std::size_t n = static_cast<std::size_t>(node);
    auto [a, b] = child_ids(node);
    const int da = dim(a), db = dim(b);
    const RowMat& w = w_[n];
    ensure_rho(node);
    ensure_hagg(a);
    ensure_hagg(b);
    const Eigen::MatrixXd& rho_v = rho_[n];

    Eigen::MatrixXd ha = hagg_[static_cast<std::size_t>(a)].transpose();
    Eigen::MatrixXd hb = hagg_[static_cast<std::size_t>(b)].transpose();
    RowMat k = kron_apply(w, da, db, &ha, nullptr);
    k += kron_apply(w, da, db, nullptr, &hb);
    for (int pid : lca_products_[n]) {
        auto& p = products_[static_cast<std::size_t>(pid)];
        const int pa = p.pos(a), pb = p.pos(b);
        ensure_asc(p, pa);
        ensure_asc(p, pb);
        const Eigen::MatrixXd at = p.asc[static_cast<std::size_t>(pa)].transpose();
        const Eigen::MatrixXd bt = p.asc[static_cast<std::size_t>(pb)].transpose();
        k += p.coef * kron_apply(w, da, db, &at, &bt);
    }
    const double c = cone_constant_[n] - (shifted ? cone_shift_[n] : 0.0);
    k += c * w;

    IsometryEnv env;
    env.y = rho_v * k.transpose();
    for (int pid : straddle_[n]) {
        auto& p = products_[static_cast<std::size_t>(pid)];
        const int pv = p.pos(node);
        ensure_q(p, pv);
        const int pa = p.pos(a), pb = p.pos(b);
        Eigen::MatrixXd at, bt;
        if (pa >= 0) {
            ensure_asc(p, pa);
            at = p.asc[static_cast<std::size_t>(pa)].transpose();
        }
        if (pb >= 0) {
            ensure_asc(p, pb);
            bt = p.asc[static_cast<std::size_t>(pb)].transpose();
        }
        const RowMat kp = kron_apply(w, da, db, pa >= 0 ? &at : nullptr, pb >= 0 ? &bt : nullptr);
        env.y.noalias() += p.coef * p.q[static_cast<std::size_t>(pv)] * kp.transpose();
    }
    env.cone_shift = cone_shift_[n];
    env.cone_constant = cone_constant_[n];
    env.cone_terms = cone_terms_[n];
    return env;
}

Eigen::VectorXd TreeEngine::root_apply(const Eigen::VectorXd& v) {
    const int root = id(top_, 0);
    auto [a, b] = child_ids(root);
    const int da = dim(a), db = dim(b);
    ensure_hagg(a);
    ensure_hagg(b);
    Eigen::Map<const RowMat> vm(v.data(), da, db);
    RowMat out = hagg_[static_cast<std::size_t>(a)] * vm + vm * hagg_[static_cast<std::size_t>(b)].transpose();
    for (int pid : lca_products_[static_cast<std::size_t>(root)]) {
        auto& p = products_[static_cast<std::size_t>(pid)];
        const int pa = p.pos(a), pb = p.pos(b);
        ensure_asc(p, pa);
        ensure_asc(p, pb);
        out.noalias() += p.coef * (p.asc[static_cast<std::size_t>(pa)] * vm *
                                   p.asc[static_cast<std::size_t>(pb)].transpose());
    }
    return Eigen::Map<const Eigen::VectorXd>(out.data(), out.size());
}

Eigen::MatrixXd TreeEngine::root_matrix() {
    const int root = id(top_, 0);
    auto [a, b] = child_ids(root);
    const int da = dim(a), db = dim(b);
    ensure_hagg(a);
    ensure_hagg(b);
    Eigen::MatrixXd m = Eigen::kroneckerProduct(hagg_[static_cast<std::size_t>(a)], Eigen::MatrixXd::Identity(db, db));
    m += Eigen::kroneckerProduct(Eigen::MatrixXd::Identity(da, da), hagg_[static_cast<std::size_t>(b)]);
    for (int pid : lca_products_[static_cast<std::size_t>(root)]) {
        auto& p = products_[static_cast<std::size_t>(pid)];
        const int pa = p.pos(a), pb = p.pos(b);
        ensure_asc(p, pa);
        ensure_asc(p, pb);
        m += p.coef * Eigen::kroneckerProduct(p.asc[static_cast<std::size_t>(pa)], p.asc[static_cast<std::size_t>(pb)]);
    }
    return m;
}

std::optional<Eigen::MatrixXd> TreeEngine::ascend_transient(const Product& p, int node) {
    const int l = layer_of(node), idx = index_of(node);
    if (l == base_) {
        const Factor* f = p.find(idx);
        if (!f) return std::nullopt;
        if (f->op.size() == 0) return Eigen::MatrixXd::Identity(dim(node), dim(node));
        return f->op;
    }
    bool any = false;
    for (const auto& f : p.factors) any = any || leaf_ancestor(f.leg, l) == idx;
    if (!any) return std::nullopt;
    auto [a, b] = child_ids(node);
    auto oa = ascend_transient(p, a);
    auto ob = ascend_transient(p, b);
    return ascend_op(w_[static_cast<std::size_t>(node)], dim(a), dim(b), oa ? &*oa : nullptr, ob ? &*ob : nullptr);
}

double TreeEngine::product_expectation(const Product& p) {
    if (p.factors.empty()) return p.coef;
    int l = base_;
    for (; l <= top_; ++l) {
        const int first = leaf_ancestor(p.factors.front().leg, l);
        bool same = true;
        for (const auto& f : p.factors) same = same && leaf_ancestor(f.leg, l) == first;
        if (same) break;
    }
    const int lca = id(l, leaf_ancestor(p.factors.front().leg, l));
    ensure_rho(lca);
    const auto op = ascend_transient(p, lca);
    return p.coef * trace_product(rho_[static_cast<std::size_t>(lca)], *op);
}

Eigen::MatrixXd TreeEngine::hole_environment(const Product& p, int hole) {
    int l = base_;
    for (; l <= top_; ++l) {
        const int first = leaf_ancestor(hole, l);
        bool same = true;
        for (const auto& f : p.factors) same = same && leaf_ancestor(f.leg, l) == first;
        if (same) break;
    }
    const int lca = id(l, leaf_ancestor(hole, l));
    ensure_rho(lca);
    Eigen::MatrixXd env = rho_[static_cast<std::size_t>(lca)];
    for (; l > base_; --l) {
        const int m = id(l, leaf_ancestor(hole, l));
        const int c = id(l - 1, leaf_ancestor(hole, l - 1));
        auto [a, b] = child_ids(m);
        const int sib = a == c ? b : a;
        const auto op = ascend_transient(p, sib);
        env = descend_op(w_[static_cast<std::size_t>(m)], dim(a), dim(b), env, op ? &*op : nullptr, a == c);
    }
    return p.coef * env;
}

Eigen::MatrixXd TreeEngine::pair_environment(const Product& rest, int p, int q) {
    const int dp = s_.bond_dims[static_cast<std::size_t>(base_)];
    const int dq = dp;
    if (rest.find(p) || rest.find(q)) throw ArgumentError("pair_environment: rest acts on the pair");
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dp * dq, dp * dq);
    Product probe = rest;
    probe.factors.push_back({q, Eigen::MatrixXd::Zero(dq, dq)});
    const std::size_t qk = probe.factors.size() - 1;
    for (int bp = 0; bp < dq; ++bp)
        for (int b = 0; b < dq; ++b) {
            probe.factors[qk].op.setZero();
            probe.factors[qk].op(bp, b) = 1.0;
            const Eigen::MatrixXd d = hole_environment(probe, p);
            for (int a = 0; a < dp; ++a)
                for (int ap = 0; ap < dp; ++ap) j(a * dq + b, ap * dq + bp) = d(a, ap);
        }
    return j;
}

}  // namespace fattn
