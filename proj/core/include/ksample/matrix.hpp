#ifndef KSAMPLE_MATRIX_HPP_
#define KSAMPLE_MATRIX_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace ksample {

// Row-major dense matrix of doubles indexed [prompt][action].
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Gradient of a scalar objective with respect to the policy logits. Same
// shape as PolicyParams; estimators return ascent directions.
class GradientTensor : public DenseMatrix {
 public:
  using DenseMatrix::DenseMatrix;

  GradientTensor& operator+=(const GradientTensor& other);
  GradientTensor& operator-=(const GradientTensor& other);
  GradientTensor& operator*=(double s);
  void add_scaled(const GradientTensor& other, double s);

  // Sum of entries in one row; zero for any score-function gradient.
  double row_sum(std::size_t r) const;
  bool is_zero() const;
};

GradientTensor operator+(GradientTensor a, const GradientTensor& b);
GradientTensor operator-(GradientTensor a, const GradientTensor& b);
GradientTensor operator*(GradientTensor a, double s);

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
double max_abs(const DenseMatrix& a);

// Per-entry compensated accumulator; sums of many gradient tensors come out
// the same regardless of the order they were added in.
class GradientAccumulator {
 public:
  GradientAccumulator(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), sum_(rows * cols, 0.0), comp_(rows * cols, 0.0) {}

  void add(const GradientTensor& g, double scale = 1.0);
  void add_entry(std::size_t r, std::size_t c, double x);
  GradientTensor result() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> sum_;
  std::vector<double> comp_;
};

}  // namespace ksample

#endif  // KSAMPLE_MATRIX_HPP_
