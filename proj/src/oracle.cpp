#include "fattn/oracle.hpp"

#include <cmath>
#include <random>

#include "fattn/errors.hpp"

namespace fattn {

Eigen::VectorXd ed_apply(const Hamiltonian& h, const Eigen::VectorXd& psi) {
    const int n = h.lattice.num_sites();
    const long long dim = 1LL << n;
    if (psi.size() != dim) throw DimensionError("ed_apply: vector length does not match 2^N");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
    for (const auto& t : h.two_site) {
        const Eigen::Matrix4d op = t.coefficient * t.op;
        const long long mi = 1LL << (n - 1 - t.bond.i), mj = 1LL << (n - 1 - t.bond.j);
        for (long long idx = 0; idx < dim; ++idx) {
            const int a = (idx & mi) ? 1 : 0, b = (idx & mj) ? 1 : 0;
            const long long base = idx & ~(mi | mj);
            const int row = 2 * a + b;
            double acc = 0.0;
            for (int col = 0; col < 4; ++col) {
                const double v = op(row, col);
                if (v == 0.0) continue;
                acc += v * psi(base | ((col & 2) ? mi : 0) | ((col & 1) ? mj : 0));
            }
            out(idx) += acc;
        }
    }
    for (const auto& t : h.one_site) {
        const Eigen::Matrix2d op = t.coefficient * t.op;
        const long long m = 1LL << (n - 1 - t.site);
        for (long long idx = 0; idx < dim; ++idx) {
            const int a = (idx & m) ? 1 : 0;
            const long long base = idx & ~m;
            out(idx) += op(a, 0) * psi(base) + op(a, 1) * psi(base | m);
        }
    }
    return out;
}

namespace {

EdResult dense_ground_state(const Hamiltonian& h, bool want_vector) {
    const long long dim = 1LL << h.lattice.num_sites();
    Eigen::MatrixXd m(dim, dim);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    for (long long c = 0; c < dim; ++c) {
        e(c) = 1.0;
        m.col(c) = ed_apply(h, e);
        e(c) = 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    EdResult r;
    r.energy = es.eigenvalues()(0);
    Eigen::VectorXd v = es.eigenvectors().col(0);
    r.residual = (ed_apply(h, v) - r.energy * v).norm();
    if (want_vector) r.ground_vector = v;
    return r;
}

// Restarted Lanczos with full reorthogonalization inside each cycle; every
// cycle restarts from the current Ritz vector.
EdResult lanczos_ground_state(const Hamiltonian& h, bool want_vector, std::uint64_t seed, int max_matvecs) {
    const int n = h.lattice.num_sites();
    const long long dim = 1LL << n;
    const int krylov = static_cast<int>(std::min<long long>(dim, n <= 18 ? 40 : 24));
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist;
    Eigen::VectorXd v(dim);
    for (auto& x : v) x = dist(gen);
    v.normalize();

    EdResult r;
    double scale = 1.0;
    while (true) {
        Eigen::MatrixXd basis(dim, krylov);
        Eigen::VectorXd alpha(krylov), beta(krylov);
        basis.col(0) = v;
        int k = 0;
        for (; k < krylov; ++k) {
            Eigen::VectorXd w = ed_apply(h, basis.col(k));
            ++r.iterations;
            alpha(k) = basis.col(k).dot(w);
            for (int pass = 0; pass < 2; ++pass)
                w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).transpose() * w);
            beta(k) = w.norm();
            scale = std::max(scale, std::abs(alpha(k)));
            if (k + 1 == krylov || beta(k) < 1e-14 * scale) {
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
        r.energy = es.eigenvalues()(0);
        Eigen::VectorXd hv = ed_apply(h, v);
        ++r.iterations;
        r.energy = v.dot(hv);
        r.residual = (hv - r.energy * v).norm();
        if (r.residual < 1e-11) break;
        if (r.iterations >= max_matvecs)
            throw ConvergenceError("Lanczos did not converge, residual " + std::to_string(r.residual));
    }
    if (want_vector) r.ground_vector = v;
    return r;
}

}  // namespace

EdResult ed_ground_state(const Hamiltonian& h, bool want_vector, EdMethod method, std::uint64_t seed,
                         int max_matvecs) {
    const int n = h.lattice.num_sites();
    if (h.lattice.d != 2) throw UnsupportedModelError("exact diagonalization supports d = 2 only");
    if (n > kEdMaxSites) throw CapacityError("exact diagonalization is limited to 20 sites");
    if (method == EdMethod::dense && n > kEdDenseMaxSites)
        throw CapacityError("the dense path is limited to 12 sites");
    EdResult r = method == EdMethod::dense ? dense_ground_state(h, want_vector)
                                           : lanczos_ground_state(h, want_vector, seed, max_matvecs);
    r.energy_per_site = r.energy / n;
    return r;
}

EdResult ed_ground_energy(const Lattice& lat, double lambda, bool want_vector, EdMethod method) {
    if (lat.num_sites() > kEdMaxSites) throw CapacityError("exact diagonalization is limited to 20 sites");
    return ed_ground_state(tfim_hamiltonian(lat, lambda), want_vector, method);
}

}  // namespace fattn
