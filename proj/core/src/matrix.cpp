#include "ksample/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ksample/errors.hpp"

namespace ksample {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ArgumentError("DenseMatrix: data size " + std::to_string(data_.size()) +
                        " does not match shape " + std::to_string(rows_) + "x" +
                        std::to_string(cols_));
  }
}

double& DenseMatrix::at(std::size_t r, std::size_t c) {
  if (r >= rows_ || c >= cols_) throw IndexError("DenseMatrix index out of range");
  return (*this)(r, c);
}

double DenseMatrix::at(std::size_t r, std::size_t c) const {
  if (r >= rows_ || c >= cols_) throw IndexError("DenseMatrix index out of range");
  return (*this)(r, c);
}

namespace {
void require_same_shape(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) throw ArgumentError("gradient tensors differ in shape");
}
}  // namespace

GradientTensor& GradientTensor::operator+=(const GradientTensor& other) {
  require_same_shape(*this, other);
  auto dst = values();
  auto src = other.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return *this;
}

GradientTensor& GradientTensor::operator-=(const GradientTensor& other) {
  require_same_shape(*this, other);
  auto dst = values();
  auto src = other.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
  return *this;
}

GradientTensor& GradientTensor::operator*=(double s) {
  for (double& x : values()) x *= s;
  return *this;
}

void GradientTensor::add_scaled(const GradientTensor& other, double s) {
  require_same_shape(*this, other);
  auto dst = values();
  auto src = other.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * src[i];
}

double GradientTensor::row_sum(std::size_t r) const {
  double s = 0.0;
  for (double x : row(r)) s += x;
  return s;
}

bool GradientTensor::is_zero() const {
  return std::all_of(values().begin(), values().end(),
                     [](double x) { return x == 0.0; });
}

GradientTensor operator+(GradientTensor a, const GradientTensor& b) { return a += b; }
GradientTensor operator-(GradientTensor a, const GradientTensor& b) { return a -= b; }
GradientTensor operator*(GradientTensor a, double s) { return a *= s; }

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b);
  double m = 0.0;
  auto x = a.values();
  auto y = b.values();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (double x : a.values()) m = std::max(m, std::abs(x));
  return m;
}

void GradientAccumulator::add_entry(std::size_t r, std::size_t c, double x) {
  const std::size_t i = r * cols_ + c;
  const double t = sum_[i] + x;
  if (std::abs(sum_[i]) >= std::abs(x)) {
    comp_[i] += (sum_[i] - t) + x;
  } else {
    comp_[i] += (x - t) + sum_[i];
  }
  sum_[i] = t;
}

void GradientAccumulator::add(const GradientTensor& g, double scale) {
  if (g.rows() != rows_ || g.cols() != cols_) {
    throw ArgumentError("GradientAccumulator: shape mismatch");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      const double x = g(r, c);
      if (x != 0.0) add_entry(r, c, scale * x);
    }
  }
}

GradientTensor GradientAccumulator::result() const {
  GradientTensor out(rows_, cols_);
  auto v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = sum_[i] + comp_[i];
  return out;
}

}  // namespace ksample
