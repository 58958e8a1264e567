#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dsar {

using cdouble = std::complex<double>;

/// Dense row-major complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  cdouble& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cdouble& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<cdouble> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const cdouble> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<cdouble>& data() { return data_; }
  const std::vector<cdouble>& data() const { return data_; }

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cdouble> data_;
};

/// Sample positions along one matrix dimension.
struct Axis {
  std::string name;
  std::string unit;
  std::vector<double> values;

  friend bool operator==(const Axis&, const Axis&) = default;
};

}  // namespace dsar
