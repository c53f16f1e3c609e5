#include "fattn/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "fattn/errors.hpp"

namespace fattn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_finite(const DenseTensor& t, const char* where) {
    if (!t.all_finite()) throw NumericError(std::string(where) + ": non-finite entries");
}

std::vector<std::size_t> row_major_strides(const Shape& s) {
    std::vector<std::size_t> st(s.size(), 1);
    for (std::size_t i = s.size(); i-- > 1;) st[i - 1] = st[i] * s[i];
    return st;
}

}  // namespace

std::size_t shape_size(const Shape& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
    for (auto e : shape_)
        if (e == 0) throw ArgumentError("tensor extents must be positive");
    data_.assign(shape_size(shape_), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    for (auto e : shape_)
        if (e == 0) throw ArgumentError("tensor extents must be positive");
    if (data_.size() != shape_size(shape_))
        throw DimensionError("element count does not match shape");
}

DenseTensor DenseTensor::identity(std::size_t n) {
    DenseTensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
    return t;
}

DenseTensor DenseTensor::from_matrix(const Eigen::MatrixXd& m) {
    DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    Eigen::Map<RowMat>(t.data(), m.rows(), m.cols()) = m;
    return t;
}

std::size_t DenseTensor::offset(const std::vector<std::size_t>& index) const {
    if (index.size() != shape_.size()) throw DimensionError("index rank mismatch");
    std::size_t off = 0;
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= shape_[i]) throw DimensionError("index out of range");
        off = off * shape_[i] + index[i];
    }
    return off;
}

double& DenseTensor::at(const std::vector<std::size_t>& index) { return data_[offset(index)]; }
double DenseTensor::at(const std::vector<std::size_t>& index) const { return data_[offset(index)]; }

DenseTensor DenseTensor::reshape(Shape shape) const {
    if (shape_size(shape) != data_.size()) throw DimensionError("reshape changes element count");
    return DenseTensor(std::move(shape), data_);
}

Eigen::MatrixXd DenseTensor::to_matrix() const {
    if (rank() != 2) throw DimensionError("to_matrix needs a rank-2 tensor");
    return Eigen::Map<const RowMat>(data(), shape_[0], shape_[1]);
}

bool DenseTensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double DenseTensor::max_abs() const {
    double m = 0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) throw DimensionError("shape mismatch in +");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
    return DenseTensor(a.shape(), std::move(v));
}

DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) throw DimensionError("shape mismatch in -");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
    return DenseTensor(a.shape(), std::move(v));
}

DenseTensor operator*(double alpha, const DenseTensor& a) {
    std::vector<double> v(a.values());
    for (double& x : v) x *= alpha;
    return DenseTensor(a.shape(), std::move(v));
}

DenseTensor permute(const DenseTensor& a, const std::vector<std::size_t>& order) {
    const std::size_t r = a.rank();
    if (order.size() != r) throw ArgumentError("permutation length differs from rank");
    std::vector<bool> seen(r, false);
    for (auto o : order) {
        if (o >= r || seen[o]) throw ArgumentError("invalid permutation");
        seen[o] = true;
    }
    Shape out_shape(r);
    for (std::size_t i = 0; i < r; ++i) out_shape[i] = a.extent(order[i]);
    if (r == 0) return a;

    const auto in_strides = row_major_strides(a.shape());
    std::vector<std::size_t> src_stride(r);
    for (std::size_t i = 0; i < r; ++i) src_stride[i] = in_strides[order[i]];

    std::vector<double> out(a.size());
    std::vector<std::size_t> idx(r, 0);
    std::size_t src = 0;
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        out[flat] = a[src];
        // odometer increment over the output multi-index
        for (std::size_t k = r; k-- > 0;) {
            if (++idx[k] < out_shape[k]) {
                src += src_stride[k];
                break;
            }
            src -= src_stride[k] * (out_shape[k] - 1);
            idx[k] = 0;
        }
    }
    return DenseTensor(std::move(out_shape), std::move(out));
}

DenseTensor matricize(const DenseTensor& a, const std::vector<std::size_t>& row_axes) {
    const std::size_t r = a.rank();
    std::vector<bool> used(r, false);
    for (auto ax : row_axes) {
        if (ax >= r) throw ArgumentError("row axis out of range");
        if (used[ax]) throw ArgumentError("duplicate row axis");
        used[ax] = true;
    }
    std::vector<std::size_t> order(row_axes);
    for (std::size_t i = 0; i < r; ++i)
        if (!used[i]) order.push_back(i);
    std::size_t rows = 1;
    for (auto ax : row_axes) rows *= a.extent(ax);
    const std::size_t cols = a.size() / rows;
    return permute(a, order).reshape({rows, cols});
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b, const AxisPairs& pairs) {
    std::vector<bool> used_a(a.rank(), false), used_b(b.rank(), false);
    for (auto [i, j] : pairs) {
        if (i >= a.rank() || j >= b.rank()) throw ArgumentError("contraction axis out of range");
        if (used_a[i] || used_b[j]) throw ArgumentError("repeated axis in contraction pairs");
        used_a[i] = used_b[j] = true;
        if (a.extent(i) != b.extent(j)) throw DimensionError("contracted extents differ");
    }
    std::vector<std::size_t> a_order, b_order;
    Shape out_shape;
    for (std::size_t i = 0; i < a.rank(); ++i)
        if (!used_a[i]) {
            a_order.push_back(i);
            out_shape.push_back(a.extent(i));
        }
    for (auto [i, j] : pairs) a_order.push_back(i);
    for (auto [i, j] : pairs) b_order.push_back(j);
    for (std::size_t j = 0; j < b.rank(); ++j)
        if (!used_b[j]) {
            b_order.push_back(j);
            out_shape.push_back(b.extent(j));
        }
    std::size_t k = 1;
    for (auto [i, j] : pairs) k *= a.extent(i);
    const std::size_t m = a.size() / k;
    const std::size_t n = b.size() / k;

    const DenseTensor ap = permute(a, a_order);
    const DenseTensor bp = permute(b, b_order);
    RowMat c = Eigen::Map<const RowMat>(ap.data(), m, k) * Eigen::Map<const RowMat>(bp.data(), k, n);
    std::vector<double> out(c.data(), c.data() + c.size());
    if (out_shape.empty()) return DenseTensor(Shape{}, std::move(out));
    return DenseTensor(std::move(out_shape), std::move(out));
}

SvdResult svd(const DenseTensor& m) {
    if (m.rank() != 2) throw DimensionError("svd needs a rank-2 tensor");
    check_finite(m, "svd");
    Eigen::MatrixXd a = m.to_matrix();
    Eigen::BDCSVD<Eigen::MatrixXd> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::MatrixXd u = dec.matrixU();
    Eigen::MatrixXd v = dec.matrixV();
    const Eigen::VectorXd& s = dec.singularValues();
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        Eigen::Index imax = 0;
        u.col(c).cwiseAbs().maxCoeff(&imax);
        if (u(imax, c) < 0) {
            u.col(c) *= -1.0;
            v.col(c) *= -1.0;
        }
    }
    SvdResult r;
    r.u = DenseTensor::from_matrix(u);
    r.s.assign(s.data(), s.data() + s.size());
    r.vt = DenseTensor::from_matrix(v.transpose());
    return r;
}

Eigen::MatrixXd polar_update(const Eigen::MatrixXd& env, bool* degenerate) {
    if (!env.allFinite()) throw NumericError("polar_update: non-finite environment");
    const Eigen::Index r = env.rows(), c = env.cols();
    Eigen::JacobiSVD<Eigen::MatrixXd> dec(env, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = dec.singularValues();
    const double smax = s.size() ? s(0) : 0.0;
    const double smin = s.size() ? s(s.size() - 1) : 0.0;
    if (degenerate) *degenerate = !(smin > 1e-14 * smax) || smax == 0.0;
    if (smax == 0.0) {
        Eigen::MatrixXd w = Eigen::MatrixXd::Identity(c, r);
        return -w;
    }
    return -dec.matrixV() * dec.matrixU().transpose();
}

DenseTensor polar_update(const DenseTensor& env, bool* degenerate) {
    if (env.rank() != 2) throw DimensionError("polar_update needs a rank-2 environment");
    return DenseTensor::from_matrix(polar_update(env.to_matrix(), degenerate));
}

Eigen::MatrixXd random_isometry_matrix(long rows, long cols, std::uint64_t seed) {
    if (rows <= 0 || cols <= 0) throw ArgumentError("random_isometry: dimensions must be positive");
    const bool wide = cols > rows;
    const long tall = wide ? cols : rows, narrow = wide ? rows : cols;
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd g(tall, narrow);
    for (long j = 0; j < narrow; ++j)
        for (long i = 0; i < tall; ++i) g(i, j) = dist(gen);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(tall, narrow);
    const Eigen::MatrixXd& rr = qr.matrixQR();
    for (long j = 0; j < narrow; ++j)
        if (rr(j, j) < 0) q.col(j) *= -1.0;
    if (wide) return q.transpose();
    return q;
}

DenseTensor random_isometry(long rows, long cols, std::uint64_t seed) {
    return DenseTensor::from_matrix(random_isometry_matrix(rows, cols, seed));
}

double isometry_residual(const Eigen::MatrixXd& w) {
    Eigen::MatrixXd g = (w.rows() >= w.cols()) ? Eigen::MatrixXd(w.transpose() * w)
                                               : Eigen::MatrixXd(w * w.transpose());
    g -= Eigen::MatrixXd::Identity(g.rows(), g.cols());
    return g.cwiseAbs().maxCoeff();
}

double isometry_residual(const DenseTensor& w) {
    if (w.rank() < 2) throw DimensionError("isometry_residual needs rank >= 2");
    const std::size_t cols = w.extent(w.rank() - 1);
    return isometry_residual(w.reshape({w.size() / cols, cols}).to_matrix());
}

namespace {

template <class T>
void put_le(std::ostream& os, T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto* p = reinterpret_cast<unsigned char*>(&v);
        std::reverse(p, p + sizeof(T));
    }
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ArgumentError("truncated tensor stream");
    if constexpr (std::endian::native == std::endian::big) {
        auto* p = reinterpret_cast<unsigned char*>(&v);
        std::reverse(p, p + sizeof(T));
    }
    return v;
}

}  // namespace

void write_tensor(std::ostream& os, const DenseTensor& t) {
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
    for (auto e : t.shape()) put_le<std::uint32_t>(os, static_cast<std::uint32_t>(e));
    for (double v : t.values()) put_le<double>(os, v);
}

DenseTensor read_tensor(std::istream& is) {
    const auto rank = get_le<std::uint32_t>(is);
    if (rank > 64) throw ArgumentError("implausible tensor rank in stream");
    Shape shape(rank);
    for (auto& e : shape) e = get_le<std::uint32_t>(is);
    std::vector<double> v(shape_size(shape));
    for (double& x : v) x = get_le<double>(is);
    return DenseTensor(std::move(shape), std::move(v));
}

void save_tensor(const std::string& path, const DenseTensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    write_tensor(os, t);
}

DenseTensor load_tensor(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + path);
    return read_tensor(is);
}

}  // namespace fattn
