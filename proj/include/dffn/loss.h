#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dffn/errors.h"

namespace dffn::nn {

// SmoothL1 over a batch: mean of 0.5*(p-t)^2 where |p-t| < 1, |p-t| - 0.5
// otherwise. Both branches meet at 0.5 for |p-t| = 1.
template <class T>
double smooth_l1(std::span<const T> predicted, std::span<const T> target) {
  if (predicted.size() != target.size()) {
    throw ShapeError("smooth_l1 length mismatch: " +
                     std::to_string(predicted.size()) + " vs " +
                     std::to_string(target.size()));
  }
  if (predicted.empty()) throw DomainError("smooth_l1 over an empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = static_cast<double>(predicted[i]) - static_cast<double>(target[i]);
    total += std::abs(d) < 1.0 ? 0.5 * d * d : std::abs(d) - 0.5;
  }
  return total / static_cast<double>(predicted.size());
}

// d(loss)/d(p_i): (p-t)/n inside the quadratic region, sign(p-t)/n outside.
template <class T>
double smooth_l1_grad(T predicted, T target, std::size_t batch_size) {
  if (batch_size == 0) throw DomainError("smooth_l1 gradient with batch size 0");
  const double d = static_cast<double>(predicted) - static_cast<double>(target);
  const double g = std::abs(d) < 1.0 ? d : (d > 0.0 ? 1.0 : -1.0);
  return g / static_cast<double>(batch_size);
}

}  // namespace dffn::nn
