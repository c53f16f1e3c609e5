#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fattn {

using Shape = std::vector<std::size_t>;

/**
 * @brief Dense real tensor with a row-major logical layout.
 *
 * The shape is fixed at construction; reshape() returns a new value.
 * A rank-0 tensor holds a single scalar.
 */
class DenseTensor {
public:
    DenseTensor() : data_(1, 0.0) {}
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<double> values);

    static DenseTensor identity(std::size_t n);
    static DenseTensor from_matrix(const Eigen::MatrixXd& m);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

    const double* data() const noexcept { return data_.data(); }
    double* data() noexcept { return data_.data(); }
    const std::vector<double>& values() const noexcept { return data_; }

    double& at(const std::vector<std::size_t>& index);
    double at(const std::vector<std::size_t>& index) const;
    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    DenseTensor reshape(Shape shape) const;

    // Rank-2 only: copy into an Eigen matrix (rows = extent 0).
    Eigen::MatrixXd to_matrix() const;

    bool all_finite() const;
    double max_abs() const;

private:
    std::size_t offset(const std::vector<std::size_t>& index) const;

    Shape shape_;
    std::vector<double> data_;
};

std::size_t shape_size(const Shape& s);

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator-(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator*(double alpha, const DenseTensor& a);

using AxisPairs = std::vector<std::pair<std::size_t, std::size_t>>;

// Sum over the paired axes. Result axes: free axes of a, then free axes of b.
DenseTensor contract(const DenseTensor& a, const DenseTensor& b, const AxisPairs& pairs);

DenseTensor permute(const DenseTensor& a, const std::vector<std::size_t>& order);

// Rows run over row_axes (in the given order), columns over the remaining axes
// in their original order.
DenseTensor matricize(const DenseTensor& a, const std::vector<std::size_t>& row_axes);

struct SvdResult {
    DenseTensor u;           // m x k, orthonormal columns
    std::vector<double> s;   // k values, non-increasing
    DenseTensor vt;          // k x n, orthonormal rows
};

SvdResult svd(const DenseTensor& m);

// Minimiser of trace(env * w) over isometries w, i.e. w = -V U^T for env = U S V^T.
// `degenerate` (optional) reports a rank-deficient or zero environment.
DenseTensor polar_update(const DenseTensor& env, bool* degenerate = nullptr);
Eigen::MatrixXd polar_update(const Eigen::MatrixXd& env, bool* degenerate = nullptr);

DenseTensor random_isometry(long rows, long cols, std::uint64_t seed);
Eigen::MatrixXd random_isometry_matrix(long rows, long cols, std::uint64_t seed);

// max |w^T w - I| (or |w w^T - I| when w is wide).
double isometry_residual(const Eigen::MatrixXd& w);
double isometry_residual(const DenseTensor& w);

// Binary format: u32 rank, u32 extents, then float64 payload, all little-endian.
void write_tensor(std::ostream& os, const DenseTensor& t);
DenseTensor read_tensor(std::istream& is);
void save_tensor(const std::string& path, const DenseTensor& t);
DenseTensor load_tensor(const std::string& path);

}  // namespace fattn
