#pragma once

// Small dense linear algebra for the 2x2 / 3x3 information matrices used
// throughout, plus a central-difference gradient used as a test oracle.

#include <array>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace pics {

/// Fixed-capacity (3) vector of reals. Parameter vectors and gradients never
/// exceed three entries, so this avoids heap traffic in the inner loops.
class ParamVector {
 public:
  static constexpr std::size_t kCapacity = 3;

  ParamVector() = default;
  explicit ParamVector(std::size_t n, double fill = 0.0);
  ParamVector(std::initializer_list<double> values);
  explicit ParamVector(std::span<const double> values);

  [[nodiscard]] std::size_t size() const { return size_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double* data() { return values_.data(); }
  [[nodiscard]] const double* data() const { return values_.data(); }
  double* begin() { return values_.data(); }
  double* end() { return values_.data() + size_; }
  [[nodiscard]] const double* begin() const { return values_.data(); }
  [[nodiscard]] const double* end() const { return values_.data() + size_; }
  [[nodiscard]] std::span<const double> view() const { return {values_.data(), size_}; }
  [[nodiscard]] std::vector<double> to_vector() const { return {begin(), end()}; }

  friend bool operator==(const ParamVector& a, const ParamVector& b);

 private:
  std::array<double, kCapacity> values_{};
  std::size_t size_ = 0;
};

double norm(const ParamVector& v);

/// Symmetric matrix of dimension 1..3. Writes go through set(), which mirrors
/// the entry, so the stored array is symmetric by construction.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim);
  /// Row-major full matrix; the upper triangle is taken and mirrored.
  SymMatrix(std::size_t dim, std::initializer_list<double> row_major);

  static SymMatrix identity(std::size_t dim);
  /// scale * g g^T
  static SymMatrix outer(const ParamVector& g, double scale = 1.0);

  [[nodiscard]] std::size_t dim() const { return dim_; }
  double operator()(std::size_t r, std::size_t c) const { return entries_[r * 3 + c]; }
  void set(std::size_t r, std::size_t c, double value);

  /// this += scale * g g^T
  void add_outer(const ParamVector& g, double scale = 1.0);
  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator*=(double s);
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }

  [[nodiscard]] ParamVector multiply(const ParamVector& x) const;
  [[nodiscard]] double trace() const;

 private:
  std::size_t dim_ = 0;
  std::array<double, 9> entries_{};
};

/// Closed cofactor determinant.
double det(const SymMatrix& m);

/// Lower-triangular Cholesky factor L with M = L L^T.
class Cholesky {
 public:
  static constexpr double kPivotTolerance = 1e-12;

  /// Throws SingularMatrix when a pivot is <= kPivotTolerance.
  explicit Cholesky(const SymMatrix& m);

  [[nodiscard]] std::size_t dim() const { return dim_; }
  double lower(std::size_t r, std::size_t c) const { return l_[r * 3 + c]; }
  [[nodiscard]] ParamVector solve(const ParamVector& b) const;
  /// L^T x, the standardizing transform for a Gaussian with precision M.
  [[nodiscard]] ParamVector transpose_multiply(const ParamVector& x) const;

 private:
  std::size_t dim_ = 0;
  std::array<double, 9> l_{};
};

ParamVector solve_spd(const SymMatrix& m, const ParamVector& b);

using ScalarField = std::function<double(const ParamVector&)>;

/// Central differences; the default step for coordinate k is
/// 1e-6 * max(1, |theta_k|).
ParamVector central_diff_gradient(const ScalarField& f, const ParamVector& theta,
                                  std::optional<double> step = std::nullopt);

}  // namespace pics
