#pragma once

#include <cmath>
#include <vector>

#include "dffn/errors.h"
#include "dffn/tensor.h"

namespace dffn::nn {

// Per-parameter adaptive SGD:
//   accum += g^2
//   param -= lr * g / (sqrt(accum) + eps)
template <class T = float>
class Adagrad {
 public:
  explicit Adagrad(double learning_rate = 0.01, double epsilon = 1e-8)
      : lr_(learning_rate), eps_(epsilon) {}

  void attach(std::vector<ParamRef<T>> params) {
    params_ = std::move(params);
    accumulators_.clear();
    for (const auto& p : params_) {
      accumulators_.emplace_back(p.value->shape());
    }
  }

  void step() {
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
      TensorT<T>& value = *params_[pi].value;
      const TensorT<T>& grad = *params_[pi].grad;
      TensorT<T>& accum = accumulators_[pi];
      for (std::size_t i = 0; i < value.size(); ++i) {
        const double g = static_cast<double>(grad[i]);
        if (!std::isfinite(g)) {
          throw NumericError("non-finite gradient in parameter " + params_[pi].name);
        }
        const double a = static_cast<double>(accum[i]) + g * g;
        accum[i] = static_cast<T>(a);
        value[i] = static_cast<T>(static_cast<double>(value[i]) -
                                  lr_ * g / (std::sqrt(a) + eps_));
      }
    }
  }

  double learning_rate() const { return lr_; }
  const std::vector<TensorT<T>>& accumulators() const { return accumulators_; }

 private:
  double lr_, eps_;
  std::vector<ParamRef<T>> params_;
  std::vector<TensorT<T>> accumulators_;
};

}  // namespace dffn::nn
