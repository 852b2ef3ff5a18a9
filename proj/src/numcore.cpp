#include "pics/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pics/errors.hpp"

namespace pics {

ParamVector::ParamVector(std::size_t n, double fill) : size_(n) {
  if (n > kCapacity) throw DomainError("ParamVector capacity is 3, requested " + std::to_string(n));
  std::fill_n(values_.begin(), n, fill);
}

ParamVector::ParamVector(std::initializer_list<double> values) : size_(values.size()) {
  if (size_ > kCapacity) throw DomainError("ParamVector capacity is 3");
  std::copy(values.begin(), values.end(), values_.begin());
}

ParamVector::ParamVector(std::span<const double> values) : size_(values.size()) {
  if (size_ > kCapacity) throw DomainError("ParamVector capacity is 3");
  std::copy(values.begin(), values.end(), values_.begin());
}

bool operator==(const ParamVector& a, const ParamVector& b) {
  return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
}

double norm(const ParamVector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

SymMatrix::SymMatrix(std::size_t dim) : dim_(dim) {
  if (dim < 1 || dim > 3) throw DomainError("SymMatrix dimension must be 1..3");
}

SymMatrix::SymMatrix(std::size_t dim, std::initializer_list<double> row_major) : SymMatrix(dim) {
  if (row_major.size() != dim * dim) throw DomainError("SymMatrix initializer has wrong size");
  const double* src = row_major.begin();
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = r; c < dim; ++c) set(r, c, src[r * dim + c]);
}

SymMatrix SymMatrix::identity(std::size_t dim) {
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.set(i, i, 1.0);
  return m;
}

SymMatrix SymMatrix::outer(const ParamVector& g, double scale) {
  SymMatrix m(g.size());
  m.add_outer(g, scale);
  return m;
}

void SymMatrix::set(std::size_t r, std::size_t c, double value) {
  entries_[r * 3 + c] = value;
  entries_[c * 3 + r] = value;
}

void SymMatrix::add_outer(const ParamVector& g, double scale) {
  for (std::size_t r = 0; r < dim_; ++r) {
    const double gr = scale * g[r];
    for (std::size_t c = r; c < dim_; ++c) {
      const double v = entries_[r * 3 + c] + gr * g[c];
      entries_[r * 3 + c] = v;
      entries_[c * 3 + r] = v;
    }
  }
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  if (other.dim_ != dim_) throw DomainError("SymMatrix dimension mismatch");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (double& e : entries_) e *= s;
  return *this;
}

ParamVector SymMatrix::multiply(const ParamVector& x) const {
  ParamVector out(dim_);
  for (std::size_t r = 0; r < dim_; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) s += entries_[r * 3 + c] * x[c];
    out[r] = s;
  }
  return out;
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += entries_[i * 3 + i];
  return t;
}

double det(const SymMatrix& m) {
  switch (m.dim()) {
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default:
      return 0.0;
  }
}

Cholesky::Cholesky(const SymMatrix& m) : dim_(m.dim()) {
  for (std::size_t j = 0; j < dim_; ++j) {
    double pivot = m(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= l_[j * 3 + k] * l_[j * 3 + k];
    if (!(pivot > kPivotTolerance)) {
      throw SingularMatrix("Cholesky pivot " + std::to_string(j) + " is not positive");
    }
    const double ljj = std::sqrt(pivot);
    l_[j * 3 + j] = ljj;
    for (std::size_t i = j + 1; i < dim_; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l_[i * 3 + k] * l_[j * 3 + k];
      l_[i * 3 + j] = s / ljj;
    }
  }
}

ParamVector Cholesky::solve(const ParamVector& b) const {
  ParamVector y(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_[i * 3 + k] * y[k];
    y[i] = s / l_[i * 3 + i];
  }
  ParamVector x(dim_);
  for (std::size_t ii = dim_; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < dim_; ++k) s -= l_[k * 3 + ii] * x[k];
    x[ii] = s / l_[ii * 3 + ii];
  }
  return x;
}

ParamVector Cholesky::transpose_multiply(const ParamVector& x) const {
  ParamVector out(dim_);
  for (std::size_t r = 0; r < dim_; ++r) {
    double s = 0.0;
    for (std::size_t k = r; k < dim_; ++k) s += l_[k * 3 + r] * x[k];
    out[r] = s;
  }
  return out;
}

ParamVector solve_spd(const SymMatrix& m, const ParamVector& b) { return Cholesky(m).solve(b); }

ParamVector central_diff_gradient(const ScalarField& f, const ParamVector& theta,
                                  std::optional<double> step) {
  ParamVector grad(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double h = step.value_or(1e-6 * std::max(1.0, std::abs(theta[k])));
    ParamVector plus = theta;
    ParamVector minus = theta;
    plus[k] += h;
    minus[k] -= h;
    grad[k] = (f(plus) - f(minus)) / (2.0 * h);
  }
  return grad;
}

}  // namespace pics
