// Shared value types for the crossbar simulator.
#pragma once

#include <algorithm>
#include <cassert>
#include <compare>
#include <cstddef>
#include <span>
#include <vector>

namespace xhammer {

// Boltzmann constant in eV/K.
inline constexpr double kBoltzmannEv = 8.617333e-5;

struct CellIndex {
  std::size_t row = 0;
  std::size_t col = 0;

  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

// Relative position of one cell with respect to another, (row delta, column delta).
struct Offset {
  int di = 0;
  int dj = 0;

  friend auto operator<=>(const Offset&, const Offset&) = default;
};

// Dense row-major m x n container indexed by crossbar cell.
template <typename T>
class CellGrid {
 public:
  CellGrid() = default;
  CellGrid(std::size_t rows, std::size_t cols, const T& fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(std::size_t rows, std::size_t cols) const { return rows_ == rows && cols_ == cols; }
  template <typename U>
  bool same_shape(const CellGrid<U>& other) const { return same_shape(other.rows(), other.cols()); }

  T& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  const T& operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  T& operator[](CellIndex c) { return (*this)(c.row, c.col); }
  const T& operator[](CellIndex c) const { return (*this)(c.row, c.col); }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const CellGrid&, const CellGrid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace xhammer
