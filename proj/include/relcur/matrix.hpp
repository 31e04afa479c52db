#pragma once

#include <cstdint>
#include <vector>

namespace relcur {

template <typename T>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, T value = T{}) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, value) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  T& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  const T& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  bool operator==(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_; }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  Mat operator*(const Mat& o) const {
    Mat r(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = 0; k < cols_; ++k) {
        T v = (*this)(i, k);
        if (v == T{}) continue;
        for (int j = 0; j < o.cols_; ++j) r(i, j) += v * o(k, j);
      }
    return r;
  }

  Mat power(int n) const {
    Mat r = identity(rows_);
    Mat b = *this;
    while (n > 0) {
      if (n & 1) r = r * b;
      b = b * b;
      n >>= 1;
    }
    return r;
  }

  std::vector<T> apply(const std::vector<T>& v) const {
    std::vector<T> r(rows_, T{});
    for (int i = 0; i < rows_; ++i) {
      T s{};
      for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
      r[i] = s;
    }
    return r;
  }

  Mat<T> submatrix(const std::vector<int>& rows, const std::vector<int>& cols) const {
    Mat<T> r(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) r(static_cast<int>(i), static_cast<int>(j)) = (*this)(rows[i], cols[j]);
    return r;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<T> a_;
};

using IMat = Mat<long long>;
using DMat = Mat<double>;

inline DMat to_double(const IMat& m) {
  DMat r(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r(i, j) = static_cast<double>(m(i, j));
  return r;
}

}  // namespace relcur
