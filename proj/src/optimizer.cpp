#include "fattn/optimizer.hpp"

#include <chrono>
#include <numeric>
#include <optional>
#include <cmath>
#include <iostream>
#include <set>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "fattn/errors.hpp"

namespace fattn {

namespace {

// Lowest eigenpair of a symmetric operator by restarted Lanczos with full
// reorthogonalization, starting from `v`.
double lanczos_lowest(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply, Eigen::VectorXd& v,
                      double tol, int max_matvecs) {
    const Eigen::Index n = v.size();
    const int krylov = static_cast<int>(std::min<Eigen::Index>(n, 40));
    v.normalize();
    double energy = 0.0;
    int matvecs = 0;
    while (true) {
        Eigen::MatrixXd basis(n, krylov);
        Eigen::VectorXd alpha(krylov), beta(krylov);
        basis.col(0) = v;
        int k = 0;
        for (; k < krylov; ++k) {
            Eigen::VectorXd w = apply(basis.col(k));
            ++matvecs;
            alpha(k) = basis.col(k).dot(w);
            for (int pass = 0; pass < 2; ++pass)
                w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).transpose() * w);
            beta(k) = w.norm();
            if (k + 1 == krylov || beta(k) < 1e-14 * std::max(1.0, std::abs(alpha(k)))) {
                ++k;
                break;
            }
            basis.col(k + 1) = w / beta(k);
        }
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) {
            t(i, i) = alpha(i);
            if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta(i);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        v = basis.leftCols(k) * es.eigenvectors().col(0);
        v.normalize();
        const Eigen::VectorXd hv = apply(v);
        ++matvecs;
        energy = v.dot(hv);
        const double residual = (hv - energy * v).norm();
        if (residual < tol * std::max(1.0, std::abs(energy)) || matvecs >= max_matvecs) break;
    }
    return energy;
}

Eigen::MatrixXd op_or_identity(const Factor* f, int dim) {
    if (f && f->op.size() > 0) return f->op;
    return Eigen::MatrixXd::Identity(dim, dim);
}

bool touches(const std::vector<int>& support, int a, int b) {
    for (int leg : support)
        if (leg == a || leg == b) return true;
    return false;
}

}  // namespace

Eigen::MatrixXd update_tensor(const Eigen::MatrixXd& y) { return polar_update(y); }

double tangent_derivative(const Eigen::MatrixXd& y, const Eigen::MatrixXd& t, const Eigen::MatrixXd& a) {
    return 2.0 * (y * t * a).trace();
}

Optimizer::Optimizer(AnsatzState& state, const Hamiltonian& h) : s_(state), h_(h) {
    if (h.lattice.lx != state.lattice.lx || h.lattice.ly != state.lattice.ly || h.lattice.d != state.lattice.d)
        throw ShapeError("Hamiltonian and state live on different lattices");
    phys_ = physical_terms(h);
    engine_ = std::make_unique<TreeEngine>(s_);
}

void Optimizer::ensure_engine() {
    if (!engine_dirty_) return;
    engine_->rebuild(phys_);
    engine_dirty_ = false;
}

void Optimizer::ensure_prelift() {
    if (!prelift_dirty_) return;
    prelift_.clear();
    for (const auto& t : phys_) prelift_.push_back(lift_to_base(t, s_, false));
    prelift_dirty_ = false;
}

void Optimizer::check_health(const Eigen::MatrixXd& t, const std::string& what) const {
    if (!t.allFinite()) throw NumericalHealthError(what + " contains non-finite entries");
    const double r = isometry_residual(t);
    if (r > 1e-8) throw NumericalHealthError(what + " lost isometry, residual " + std::to_string(r));
}

double Optimizer::energy() {
    ensure_engine();
    return engine_->energy();
}

Environment Optimizer::isometry_environment(int layer, int index, bool shifted, bool with_outside) {
    if (layer < 1 || layer > s_.tree.top()) throw ArgumentError("isometry_environment: layer out of range");
    if (layer <= engine_->base())
        return probe_environment(KetOverride::Kind::isometry, layer, index, shifted, with_outside);
    ensure_engine();
    auto env = engine_->isometry_environment(layer, index, shifted);
    Environment out;
    out.y = std::move(env.y);
    out.shift = shifted ? env.cone_shift : 0.0;
    out.terms = env.cone_terms;
    if (with_outside) {
        double inside = 0.0;
        for (int t : out.terms) inside += engine_->term_energy(t);
        out.outside_energy = engine_->energy() - inside;
    }
    return out;
}

Environment Optimizer::disentangler_environment(int entry, bool shifted, bool with_outside) {
    const auto& en = s_.plan.entries.at(static_cast<std::size_t>(entry));
    if (en.layer < s_.plan.max_layer())
        return probe_environment(KetOverride::Kind::disentangler, en.layer, entry, shifted, with_outside);
    return pair_environment(entry, shifted, with_outside);
}

Environment Optimizer::probe_environment(KetOverride::Kind kind, int layer, int index, bool shifted,
                                         bool with_outside) {
    const Eigen::MatrixXd& t = kind == KetOverride::Kind::isometry
                                   ? s_.isometry(layer, index)
                                   : s_.disentanglers.at(static_cast<std::size_t>(index));
    KetOverride ov;
    ov.kind = kind;
    ov.layer = layer;
    ov.index = index;
    ov.ket = t;

    // Terms whose lift passes through the tensor, each with its shift written
    // as an explicit identity product so that it follows the ket replacement.
    Environment out;
    std::vector<EffectiveTerm> probes;
    for (std::size_t k = 0; k < phys_.size(); ++k) {
        bool hit = false;
        lift_to_base(phys_[k], s_, true, &ov, &hit);
        if (!hit) continue;
        EffectiveTerm p = phys_[k];
        if (shifted && p.shift != 0.0) {
            Product id;
            id.coef = -p.shift;
            for (int site : p.support) id.factors.push_back({site, Eigen::MatrixXd::Identity(s_.lattice.d, s_.lattice.d)});
            p.products.push_back(std::move(id));
            out.shift += p.shift;
        }
        probes.push_back(std::move(p));
        out.terms.push_back(static_cast<int>(k));
    }

    out.y = Eigen::MatrixXd::Zero(t.cols(), t.rows());
    for (Eigen::Index i = 0; i < t.rows(); ++i)
        for (Eigen::Index j = 0; j < t.cols(); ++j) {
            ov.ket = Eigen::MatrixXd::Zero(t.rows(), t.cols());
            ov.ket(i, j) = 1.0;
            double e = 0.0;
            for (const auto& p : probes) {
                const EffectiveTerm lifted = lift_to_base(p, s_, true, &ov);
                e += lifted.constant;
                for (const auto& prod : lifted.products) e += engine_->product_expectation(prod);
            }
            out.y(j, i) = e;
        }
    if (with_outside) {
        ensure_engine();
        double inside = 0.0;
        for (int k : out.terms) inside += engine_->term_energy(k);
        out.outside_energy = engine_->energy() - inside;
    }
    return out;
}

Environment Optimizer::pair_environment(int entry, bool shifted, bool with_outside) {
    ensure_prelift();
    const auto& en = s_.plan.entries.at(static_cast<std::size_t>(entry));
    const int p = en.a, q = en.b;
    const int dim = s_.bond_dims[static_cast<std::size_t>(en.layer - 1)];
    const Eigen::MatrixXd& u = s_.disentanglers.at(static_cast<std::size_t>(entry));
    const Eigen::MatrixXd ut = u.transpose();

    Product empty;
    const Eigen::MatrixXd rho_pq = engine_->pair_environment(empty, p, q);
    Environment out;
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(u.rows(), u.cols());
    double constant = 0.0;
    for (std::size_t k = 0; k < prelift_.size(); ++k) {
        const EffectiveTerm& t = prelift_[k];
        if (!touches(t.support, p, q)) continue;
        out.terms.push_back(static_cast<int>(k));
        out.shift += t.shift;
        constant += t.constant;
        for (const auto& prod : t.products) {
            const Eigen::MatrixXd x =
                Eigen::kroneckerProduct(op_or_identity(prod.find(p), dim), op_or_identity(prod.find(q), dim)).eval();
            EffectiveTerm rest;
            rest.source = t.source;
            rest.layer = t.layer;
            Product r;
            r.coef = prod.coef;
            for (const auto& f : prod.factors)
                if (f.leg != p && f.leg != q) {
                    r.factors.push_back(f);
                    rest.support.push_back(f.leg);
                }
            rest.products.push_back(std::move(r));
            const EffectiveTerm absorbed = absorb_layer(rest, s_, en.layer, nullptr, nullptr, entry);
            const Eigen::MatrixXd utx = ut * x;
            if (absorbed.constant != 0.0) y.noalias() += absorbed.constant * rho_pq * utx;
            for (const auto& rp : absorbed.products) y.noalias() += engine_->pair_environment(rp, p, q) * utx;
        }
    }
    const double c = constant - (shifted ? out.shift : 0.0);
    if (c != 0.0) y.noalias() += c * rho_pq * ut;
    if (!shifted) out.shift = 0.0;
    out.y = std::move(y);
    if (with_outside) {
        ensure_engine();
        double inside = 0.0;
        for (int k : out.terms) inside += engine_->term_energy(k);
        out.outside_energy = engine_->energy() - inside;
    }
    return out;
}

void Optimizer::update_isometry(int layer, int index) {
    if (layer == s_.tree.top()) {
        update_top();
        return;
    }
    const Environment env = isometry_environment(layer, index, shifted_);
    Eigen::MatrixXd w = update_tensor(env.y);
    check_health(w, "isometry " + std::to_string(layer) + ":" + std::to_string(index));
    s_.isometry(layer, index) = std::move(w);
    if (layer > engine_->base()) {
        engine_->isometry_changed(layer, index);
    } else {
        engine_dirty_ = true;
        prelift_dirty_ = true;
    }
}

void Optimizer::update_disentangler(int entry) {
    const Environment env = disentangler_environment(entry, shifted_);
    Eigen::MatrixXd u = update_tensor(env.y);
    check_health(u, "disentangler " + std::to_string(entry));
    s_.disentanglers.at(static_cast<std::size_t>(entry)) = std::move(u);
    engine_dirty_ = true;
    if (s_.plan.entries[static_cast<std::size_t>(entry)].layer < s_.plan.max_layer()) prelift_dirty_ = true;
}

void Optimizer::update_top() {
    ensure_engine();
    const int top = s_.tree.top();
    Eigen::MatrixXd& w = s_.isometry(top, 0);
    Eigen::VectorXd v0 = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
    const double current = v0.dot(engine_->root_apply(v0));
    Eigen::VectorXd v;
    double lowest = 0.0;
    if (v0.size() <= 400) {
        const Eigen::MatrixXd m = engine_->root_matrix();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
        v = es.eigenvectors().col(0);
        lowest = es.eigenvalues()(0);
    } else {
        v = v0;
        lowest = lanczos_lowest([this](const Eigen::VectorXd& x) { return engine_->root_apply(x); }, v, 1e-11,
                                4000);
    }
    if (!v.allFinite()) throw NumericalHealthError("top tensor eigenvector is not finite");
    if (lowest >= current) return;
    if (v.dot(v0) < 0) v = -v;
    v.normalize();
    w = Eigen::Map<const Eigen::MatrixXd>(v.data(), w.rows(), w.cols());
    engine_->isometry_changed(top, 0);
}

double Optimizer::sweep() {
    const int kappa = s_.plan.max_layer();
    for (int l = 1; l <= kappa; ++l)
        for (int e : s_.plan.entries_in_layer(l)) update_disentangler(e);
    // Depth-first order inside a layer keeps cached descents of the tree engine valid.
    for (int l = 1; l < s_.tree.top(); ++l) {
        std::vector<int> order(static_cast<std::size_t>(s_.tree.nodes_in_layer(l)));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return s_.tree.label_range(l, a).first < s_.tree.label_range(l, b).first;
        });
        for (int i : order) update_isometry(l, i);
    }
    update_top();
    return energy();
}

EnergyTrace Optimizer::optimize(const OptimizeOptions& opt) {
    if (opt.max_sweeps < 1) throw ConfigError("max_sweeps must be at least 1");
    if (!(opt.tol > 0.0)) throw ConfigError("energy tolerance must be positive");
    auto log = opt.log ? opt.log : [](const std::string& m) { std::cerr << "warning: " << m << "\n"; };
    EnergyTrace trace;
    shifted_ = opt.shifted;
    trace.initial_energy = energy();
    double prev = trace.initial_energy;
    const int n = s_.lattice.num_sites();
    for (int k = 1; k <= opt.max_sweeps; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        std::optional<AnsatzState> saved;
        if (!opt.shifted && opt.shifted_fallback) saved = s_;
        double e = sweep();
        bool redone = false;
        if (saved && std::isfinite(e) && e > prev + opt.monotone_slack * std::abs(prev)) {
            // Redo the sweep with shifted environments, which cannot raise the energy.
            s_ = std::move(*saved);
            engine_dirty_ = true;
            prelift_dirty_ = true;
            shifted_ = true;
            e = sweep();
            shifted_ = false;
            redone = true;
        }
        if (!std::isfinite(e)) throw NumericalHealthError("energy became non-finite in sweep " + std::to_string(k));
        SweepRecord rec;
        rec.sweep = k;
        rec.energy = e;
        rec.energy_per_site = e / n;
        rec.relative_change = std::abs(e - prev) / std::max(std::abs(e), 1e-300);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.max_isometry_residual = s_.max_isometry_residual();
        rec.max_unitary_residual = s_.max_unitary_residual();
        rec.monotone = e <= prev + opt.monotone_slack * std::abs(prev);
        rec.shifted = opt.shifted || redone;
        if (redone) ++trace.fallbacks;
        if (!rec.monotone) {
            ++trace.warnings;
            std::ostringstream os;
            os.precision(15);
            os << "energy increased in sweep " << k << ": " << prev << " -> " << e;
            log(os.str());
        }
        trace.records.push_back(rec);
        if (opt.on_sweep) opt.on_sweep(rec);
        prev = e;
        if (rec.relative_change < opt.tol) {
            trace.converged = true;
            break;
        }
    }
    trace.final_energy = prev;
    if (!trace.converged && opt.throw_on_stall)
        throw ConvergenceError("optimization did not reach the tolerance within " + std::to_string(opt.max_sweeps) +
                               " sweeps");
    return trace;
}

std::string EnergyTrace::to_csv() const {
    std::ostringstream os;
    os.precision(16);
    os << "sweep,energy_total,energy_per_site,max_isometry_residual,max_unitary_residual,seconds\n";
    for (const auto& r : records)
        os << r.sweep << ',' << r.energy << ',' << r.energy_per_site << ',' << r.max_isometry_residual << ','
           << r.max_unitary_residual << ',' << r.seconds << '\n';
    return os.str();
}

double energy(const AnsatzState& s, const Hamiltonian& h) {
    TreeEngine eng(s);
    eng.rebuild(physical_terms(h));
    return eng.energy();
}

FitVariable parse_fit_variable(const std::string& s) {
    if (s == "invD" || s == "1/D" || s == "inverse_d") return FitVariable::inverse_d;
    if (s == "D" || s == "d") return FitVariable::d;
    throw ConfigError("unknown fit variable '" + s + "' (expected invD or D)");
}

std::string to_string(FitVariable v) { return v == FitVariable::inverse_d ? "invD" : "D"; }

Extrapolation extrapolate_energy(const std::vector<int>& dims, const std::vector<double>& energies,
                                 FitVariable variable) {
    if (dims.size() != energies.size()) throw ArgumentError("extrapolate_energy: size mismatch");
    if (std::set<int>(dims.begin(), dims.end()).size() < 3)
        throw ArgumentError("extrapolate_energy: a quadratic fit needs at least three distinct D");
    const Eigen::Index n = static_cast<Eigen::Index>(dims.size());
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int d = dims[static_cast<std::size_t>(i)];
        if (d <= 0) throw ArgumentError("extrapolate_energy: D must be positive");
        const double x = variable == FitVariable::inverse_d ? 1.0 / d : static_cast<double>(d);
        a(i, 0) = 1.0;
        a(i, 1) = x;
        a(i, 2) = x * x;
        b(i) = energies[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
    Extrapolation out;
    out.variable = variable;
    out.coefficients = {c(0), c(1), c(2)};
    out.rms_residual = std::sqrt((a * c - b).squaredNorm() / static_cast<double>(n));
    if (variable == FitVariable::inverse_d) {
        out.energy = c(0);
    } else {
        const double xmax = *std::max_element(dims.begin(), dims.end());
        const double xs = c(2) > 0 ? -c(1) / (2 * c(2)) : -1.0;
        const double x = xs > xmax ? xs : xmax;
        out.energy = c(0) + c(1) * x + c(2) * x * x;
    }
    return out;
}

}  // namespace fattn
