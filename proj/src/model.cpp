#include "fattn/model.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "fattn/errors.hpp"

namespace fattn {

Eigen::MatrixXd pauli_x() {
    Eigen::MatrixXd m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Eigen::MatrixXd pauli_z() {
    Eigen::MatrixXd m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Hamiltonian tfim_hamiltonian(const Lattice& lat, double lambda) {
    if (lat.d != 2) throw UnsupportedModelError("the transverse-field Ising model needs d = 2");
    if (!std::isfinite(lambda)) throw ArgumentError("lambda must be finite");
    Hamiltonian h;
    h.lattice = lat;
    h.lambda = lambda;
    const Eigen::MatrixXd sx = pauli_x();
    const Eigen::MatrixXd xx = -Eigen::kroneckerProduct(sx, sx).eval();
    for (const auto& b : bonds(lat)) h.two_site.push_back(TwoSiteTerm{b, xx, static_cast<double>(b.multiplicity)});
    const Eigen::MatrixXd field = -lambda * pauli_z();
    for (int s = 0; s < lat.num_sites(); ++s) h.one_site.push_back(OneSiteTerm{s, field, 1.0});
    return h;
}

std::vector<ProductFactor> schmidt_decompose(const Eigen::MatrixXd& op, int d) {
    if (op.rows() != d * d || op.cols() != d * d) throw DimensionError("two-site operator must be d^2 x d^2");
    // R[(a a'), (b b')] = op[(a b), (a' b')]
    Eigen::MatrixXd r(d * d, d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int ap = 0; ap < d; ++ap)
                for (int bp = 0; bp < d; ++bp) r(a * d + ap, b * d + bp) = op(a * d + b, ap * d + bp);
    Eigen::JacobiSVD<Eigen::MatrixXd> dec(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = dec.singularValues();
    std::vector<ProductFactor> out;
    const double cutoff = 1e-14 * std::max(1.0, s.size() ? s(0) : 0.0);
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (s(k) <= cutoff) continue;
        ProductFactor f;
        f.left = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            dec.matrixU().col(k).data(), d, d);
        f.right = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            dec.matrixV().col(k).data(), d, d);
        f.weight = s(k);
        // Fold signs so that the largest entry of each left factor is positive.
        Eigen::Index i, j;
        f.left.cwiseAbs().maxCoeff(&i, &j);
        if (f.left(i, j) < 0) {
            f.left = -f.left;
            f.right = -f.right;
        }
        out.push_back(std::move(f));
    }
    return out;
}

ProductDecomposition schmidt_decompose(const TwoSiteTerm& term) {
    const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(term.op.rows()))));
    ProductDecomposition p;
    p.source = term;
    p.factors = schmidt_decompose(term.op, d);
    for (auto& f : p.factors) {
        f.weight *= std::abs(term.coefficient);
        if (term.coefficient < 0) f.right = -f.right;
    }
    return p;
}

namespace {

long long ipow(int base, int e) {
    long long r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

void check_length(const Eigen::VectorXd& psi, int num_sites, int d) {
    if (psi.size() != ipow(d, num_sites)) throw DimensionError("state vector length does not match d^N");
}

}  // namespace

Eigen::VectorXd exact_term_apply(const Eigen::VectorXd& psi, const OneSiteTerm& term, int num_sites, int d) {
    check_length(psi, num_sites, d);
    if (term.site < 0 || term.site >= num_sites) throw DimensionError("site out of range");
    const long long right = ipow(d, num_sites - 1 - term.site);
    const long long left = psi.size() / (right * d);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(psi.size());
    const Eigen::MatrixXd op = term.coefficient * term.op;
    for (long long l = 0; l < left; ++l)
        for (int a = 0; a < d; ++a)
            for (int ap = 0; ap < d; ++ap) {
                const double v = op(a, ap);
                if (v == 0.0) continue;
                const long long dst = (l * d + a) * right, src = (l * d + ap) * right;
                out.segment(dst, right) += v * psi.segment(src, right);
            }
    return out;
}

Eigen::VectorXd exact_term_apply(const Eigen::VectorXd& psi, const TwoSiteTerm& term, int num_sites, int d) {
    check_length(psi, num_sites, d);
    const int i = term.bond.i, j = term.bond.j;
    if (i < 0 || j >= num_sites || i >= j) throw DimensionError("bond sites out of range");
    const long long si = ipow(d, num_sites - 1 - i), sj = ipow(d, num_sites - 1 - j);
    const Eigen::MatrixXd op = term.coefficient * term.op;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(psi.size());
    for (long long idx = 0; idx < psi.size(); ++idx) {
        const int a = static_cast<int>((idx / si) % d), b = static_cast<int>((idx / sj) % d);
        const long long base = idx - a * si - b * sj;
        double acc = 0.0;
        for (int ap = 0; ap < d; ++ap)
            for (int bp = 0; bp < d; ++bp) {
                const double v = op(a * d + b, ap * d + bp);
                if (v != 0.0) acc += v * psi(base + ap * si + bp * sj);
            }
        out(idx) = acc;
    }
    return out;
}

Eigen::VectorXd apply_hamiltonian(const Hamiltonian& h, const Eigen::VectorXd& psi) {
    const int n = h.lattice.num_sites(), d = h.lattice.d;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(psi.size());
    for (const auto& t : h.two_site) out += exact_term_apply(psi, t, n, d);
    for (const auto& t : h.one_site) out += exact_term_apply(psi, t, n, d);
    return out;
}

double product_state_energy(const Hamiltonian& h, const std::vector<Eigen::VectorXd>& sites) {
    double e = 0.0;
    for (const auto& t : h.two_site) {
        Eigen::VectorXd v = Eigen::kroneckerProduct(sites.at(t.bond.i), sites.at(t.bond.j));
        e += t.coefficient * v.dot(t.op * v);
    }
    for (const auto& t : h.one_site) e += t.coefficient * sites.at(t.site).dot(t.op * sites.at(t.site));
    return e;
}

}  // namespace fattn
