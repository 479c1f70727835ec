#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "dffn/errors.h"

namespace dffn::nn {

inline std::string shape_to_string(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// Dense row-major tensor. The training pipeline uses TensorT<float>
// (accumulations inside reductions run in double); the gradient checker
// instantiates the same layer code with TensorT<double>.
template <class T>
class TensorT {
 public:
  TensorT() = default;

  explicit TensorT(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(checked_numel(shape_), T(0));
  }

  TensorT(std::vector<int> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_numel(shape_) != data_.size()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_to_string(shape_));
    }
  }

  static TensorT zeros(std::vector<int> shape) { return TensorT(std::move(shape)); }

  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // 2-D / 3-D / 4-D indexing helpers (row-major).
  T& at(int a, int b) { return data_[flat(a, b)]; }
  const T& at(int a, int b) const { return data_[flat(a, b)]; }
  T& at(int a, int b, int c) { return data_[flat(a, b, c)]; }
  const T& at(int a, int b, int c) const { return data_[flat(a, b, c)]; }
  T& at(int a, int b, int c, int d) { return data_[flat(a, b, c, d)]; }
  const T& at(int a, int b, int c, int d) const { return data_[flat(a, b, c, d)]; }

  std::size_t flat(int a, int b) const {
    return static_cast<std::size_t>(a) * shape_[1] + b;
  }
  std::size_t flat(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * shape_[1] + b) * shape_[2] + c;
  }
  std::size_t flat(int a, int b, int c, int d) const {
    return ((static_cast<std::size_t>(a) * shape_[1] + b) * shape_[2] + c) *
               shape_[3] +
           d;
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    for (const T& v : data_) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  bool same_shape(const TensorT& other) const { return shape_ == other.shape_; }

 private:
  static std::size_t checked_numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d < 0) throw ShapeError("negative dimension in " + shape_to_string(shape));
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::vector<int> shape_;
  std::vector<T> data_;
};

using Tensor = TensorT<float>;

template <class To, class From>
TensorT<To> tensor_cast(const TensorT<From>& src) {
  TensorT<To> out(src.shape());
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = static_cast<To>(src[i]);
  return out;
}

// Named view over a parameter tensor and its gradient buffer.
template <class T>
struct ParamRef {
  std::string name;
  TensorT<T>* value = nullptr;
  TensorT<T>* grad = nullptr;
};

}  // namespace dffn::nn
