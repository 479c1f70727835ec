#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dffn/tensor.h"

namespace dffn::nn {

struct GradCheckLayerReport {
  std::string layer;
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  std::size_t parameter_count = 0;
};

struct GradCheckReport {
  std::vector<GradCheckLayerReport> layers;
  double max_rel_error = 0.0;

  bool pass(double tolerance) const { return max_rel_error < tolerance; }
};

// Relative error with a floor so that near-zero gradient pairs do not blow
// up on finite-difference rounding noise.
inline double gradcheck_rel_error(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), 1e-4});
  return std::abs(analytic - numeric) / denom;
}

// Central finite differences against already-computed analytic gradients.
// `loss` must be a pure function of the current parameter values (same Mode,
// same inputs on every call). Parameters are grouped into layers by their
// name up to the last '.'.
template <class T, class LossFn>
GradCheckReport grad_check(const std::vector<ParamRef<T>>& params, LossFn&& loss,
                           double epsilon) {
  std::map<std::string, GradCheckLayerReport> by_layer;
  GradCheckReport report;
  for (const auto& p : params) {
    std::string layer = p.name;
    if (auto pos = layer.rfind('.'); pos != std::string::npos) {
      layer = layer.substr(0, pos);
    }
    auto& entry = by_layer[layer];
    entry.layer = layer;
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      const T saved = (*p.value)[i];
      (*p.value)[i] = saved + static_cast<T>(epsilon);
      const double up = loss();
      (*p.value)[i] = saved - static_cast<T>(epsilon);
      const double down = loss();
      (*p.value)[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double rel =
          gradcheck_rel_error(static_cast<double>((*p.grad)[i]), numeric);
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
      entry.mean_rel_error += rel;
      entry.parameter_count += 1;
    }
  }
  for (auto& [name, entry] : by_layer) {
    if (entry.parameter_count > 0) {
      entry.mean_rel_error /= static_cast<double>(entry.parameter_count);
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.layers.push_back(entry);
  }
  return report;
}

}  // namespace dffn::nn
