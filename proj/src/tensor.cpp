#include "fedkd/tensor.hpp"

#include <cmath>
#include <sstream>

#include "fedkd/errors.hpp"

namespace fedkd {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) {
    n *= extent;
  }
  return shape.empty() ? 0 : n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_product(shape_) != data_.size()) {
    std::ostringstream msg;
    msg << "tensor data has " << data_.size() << " entries but shape " << shape_string(*this)
        << " needs " << shape_product(shape_);
    throw DimensionError(msg.str());
  }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols) {
  return Tensor({rows, cols});
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) {
      throw DimensionError("from_rows requires rows of equal length");
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

std::size_t Tensor::rows() const {
  if (rank() != 2) {
    throw DimensionError("rows() requires a rank-2 tensor, got " + shape_string(*this));
  }
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) {
    throw DimensionError("cols() requires a rank-2 tensor, got " + shape_string(*this));
  }
  return shape_[1];
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

std::string shape_string(const Tensor& t) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < t.shape().size(); ++i) {
    if (i > 0) {
      out << " x ";
    }
    out << t.shape()[i];
  }
  out << "]";
  return out.str();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    std::ostringstream msg;
    msg << what << ": shape " << shape_string(a) << " does not match " << shape_string(b);
    throw DimensionError(msg.str());
  }
}

void require_finite(const Tensor& t, const char* what) {
  if (!t.all_finite()) {
    throw DataError(std::string(what) + ": tensor contains non-finite values");
  }
}

}  // namespace fedkd
