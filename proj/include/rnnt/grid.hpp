#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rnnt {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)). logaddexp(-inf, x) == x exactly.
inline double log_add_exp(double a, double b) noexcept {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) return b + std::log1p(std::exp(a - b));
  return a + std::log1p(std::exp(b - a));
}

// Row-major 2-D table of doubles.
class Grid2 {
 public:
  Grid2() = default;
  Grid2(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Grid2: negative extent");
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(int r, int c) noexcept { return data_[index(r, c)]; }
  double operator()(int r, int c) const noexcept { return data_[index(r, c)]; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Grid2&) const = default;

 private:
  std::size_t index(int r, int c) const noexcept {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Row-major 3-D tensor of doubles, indexed (i, j, k).
class Grid3 {
 public:
  Grid3() = default;
  Grid3(int d0, int d1, int d2, double fill = 0.0)
      : d0_(d0), d1_(d1), d2_(d2),
        data_(static_cast<std::size_t>(d0) * static_cast<std::size_t>(d1) *
                  static_cast<std::size_t>(d2),
              fill) {
    if (d0 < 0 || d1 < 0 || d2 < 0) throw std::invalid_argument("Grid3: negative extent");
  }

  int dim0() const noexcept { return d0_; }
  int dim1() const noexcept { return d1_; }
  int dim2() const noexcept { return d2_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(int i, int j, int k) noexcept { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const noexcept { return data_[index(i, j, k)]; }

  // Pointer to the contiguous row (i, j, 0..d2).
  double* row(int i, int j) noexcept { return data_.data() + index(i, j, 0); }
  const double* row(int i, int j) const noexcept { return data_.data() + index(i, j, 0); }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Grid3&) const = default;

 private:
  std::size_t index(int i, int j, int k) const noexcept {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(d1_) +
            static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(d2_) +
           static_cast<std::size_t>(k);
  }

  int d0_ = 0;
  int d1_ = 0;
  int d2_ = 0;
  std::vector<double> data_;
};

}  // namespace rnnt
