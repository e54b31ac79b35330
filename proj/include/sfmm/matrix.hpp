#pragma once

#include <cstdint>
#include <vector>

namespace sfmm {

// Dense row-major matrix.  Just enough linear algebra for kernel blocks and
// interpolation operators; no views, no expression templates.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::int64_t rows, std::int64_t cols)
      : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols)) {}

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }

  T& operator()(std::int64_t i, std::int64_t j) { return a_[i * cols_ + j]; }
  const T& operator()(std::int64_t i, std::int64_t j) const { return a_[i * cols_ + j]; }

  T* row(std::int64_t i) { return a_.data() + i * cols_; }
  const T* row(std::int64_t i) const { return a_.data() + i * cols_; }

  T* data() { return a_.data(); }
  const T* data() const { return a_.data(); }

 private:
  std::int64_t rows_ = 0, cols_ = 0;
  std::vector<T> a_;
};

// y += A x
template <class T>
void gemv_add(const Matrix<T>& a, const T* x, T* y) {
  for (std::int64_t i = 0; i < a.rows(); ++i) {
    T acc{};
    const T* ai = a.row(i);
    for (std::int64_t j = 0; j < a.cols(); ++j) acc += ai[j] * x[j];
    y[i] += acc;
  }
}

}  // namespace sfmm
