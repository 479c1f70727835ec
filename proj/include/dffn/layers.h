#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dffn/errors.h"
#include "dffn/rng.h"
#include "dffn/tensor.h"

namespace dffn::nn {

// Forward-pass mode. Train carries the seed that drives RReLU slope
// sampling; two forward passes with the same Mode sample identical slopes,
// which the finite-difference gradient checker relies on. Eval is a pure
// function of the inputs.
struct Mode {
  bool training = false;
  std::uint64_t seed = 0;

  static Mode train(std::uint64_t seed) { return Mode{true, seed}; }
  static Mode eval() { return Mode{false, 0}; }
};

struct RReluConfig {
  double l = 0.125;
  double u = 0.333;
  // When set, eval divides negative inputs by the mean slope instead of
  // multiplying; see RRelu::forward.
  bool literal_eval = false;

  void validate() const {
    if (!(0.0 <= l && l < u && u < 1.0)) {
      throw ConfigError("rrelu bounds require 0 <= l < u < 1, got l=" +
                        std::to_string(l) + " u=" + std::to_string(u));
    }
  }
  double mean_slope() const { return 0.5 * (l + u); }
};

namespace detail {

inline int conv_out_dim(int in, int k, int stride) {
  return (in - k) / stride + 1;
}

template <class T>
void glorot_init(TensorT<T>& w, int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = static_cast<T>(rng.uniform(-bound, bound));
  }
}

}  // namespace detail

// Valid (no padding) 2-D cross-correlation over ch x h x w inputs.
template <class T>
class Conv2d {
 public:
  Conv2d(int in_ch, int out_ch, int kh, int kw, int sh = 1, int sw = 1)
      : in_ch_(in_ch), out_ch_(out_ch), kh_(kh), kw_(kw), sh_(sh), sw_(sw) {
    if (kh < 1 || kw < 1 || sh < 1 || sw < 1 || in_ch < 1 || out_ch < 1) {
      throw ConfigError("conv2d dims and strides must be >= 1");
    }
    weights_ = TensorT<T>({out_ch, in_ch, kh, kw});
    bias_ = TensorT<T>({out_ch});
    wgrad_ = TensorT<T>({out_ch, in_ch, kh, kw});
    bgrad_ = TensorT<T>({out_ch});
  }

  void init(Rng& rng) {
    detail::glorot_init(weights_, in_ch_ * kh_ * kw_, out_ch_ * kh_ * kw_, rng);
    bias_.fill(T(0));
  }

  std::pair<int, int> output_hw(int h, int w) const {
    if (h < kh_ || w < kw_) {
      throw ShapeError("conv2d kernel " + std::to_string(kh_) + "x" +
                       std::to_string(kw_) + " does not fit input " +
                       std::to_string(h) + "x" + std::to_string(w));
    }
    return {detail::conv_out_dim(h, kh_, sh_), detail::conv_out_dim(w, kw_, sw_)};
  }

  TensorT<T> forward(const TensorT<T>& input) {
    if (input.rank() != 3 || input.dim(0) != in_ch_) {
      throw ShapeError("conv2d expected input [" + std::to_string(in_ch_) +
                       " x h x w], got " + shape_to_string(input.shape()));
    }
    auto [oh, ow] = output_hw(input.dim(1), input.dim(2));
    TensorT<T> out({out_ch_, oh, ow});
    for (int oc = 0; oc < out_ch_; ++oc) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          double acc = static_cast<double>(bias_[oc]);
          const int iy0 = oy * sh_, ix0 = ox * sw_;
          for (int ic = 0; ic < in_ch_; ++ic) {
            for (int ky = 0; ky < kh_; ++ky) {
              for (int kx = 0; kx < kw_; ++kx) {
                acc += static_cast<double>(weights_.at(oc, ic, ky, kx)) *
                       static_cast<double>(input.at(ic, iy0 + ky, ix0 + kx));
              }
            }
          }
          out.at(oc, oy, ox) = static_cast<T>(acc);
        }
      }
    }
    cached_input_ = input;
    return out;
  }

  // Accumulates parameter gradients, returns d(input).
  TensorT<T> backward(const TensorT<T>& dout) {
    if (!cached_input_) throw StateError("conv2d backward without forward");
    const TensorT<T>& input = *cached_input_;
    const int oh = dout.dim(1), ow = dout.dim(2);
    TensorT<T> dinput(input.shape());
    for (int oc = 0; oc < out_ch_; ++oc) {
      double bacc = static_cast<double>(bgrad_[oc]);
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          const double g = static_cast<double>(dout.at(oc, oy, ox));
          bacc += g;
          const int iy0 = oy * sh_, ix0 = ox * sw_;
          for (int ic = 0; ic < in_ch_; ++ic) {
            for (int ky = 0; ky < kh_; ++ky) {
              for (int kx = 0; kx < kw_; ++kx) {
                wgrad_.at(oc, ic, ky, kx) += static_cast<T>(
                    g * static_cast<double>(input.at(ic, iy0 + ky, ix0 + kx)));
                dinput.at(ic, iy0 + ky, ix0 + kx) += static_cast<T>(
                    g * static_cast<double>(weights_.at(oc, ic, ky, kx)));
              }
            }
          }
        }
      }
      bgrad_[oc] = static_cast<T>(bacc);
    }
    return dinput;
  }

  void zero_grads() {
    wgrad_.fill(T(0));
    bgrad_.fill(T(0));
  }

  std::vector<ParamRef<T>> params(const std::string& prefix) {
    return {{prefix + ".weight", &weights_, &wgrad_},
            {prefix + ".bias", &bias_, &bgrad_}};
  }

  TensorT<T>& weights() { return weights_; }
  TensorT<T>& bias() { return bias_; }
  int out_channels() const { return out_ch_; }

 private:
  int in_ch_, out_ch_, kh_, kw_, sh_, sw_;
  TensorT<T> weights_, bias_, wgrad_, bgrad_;
  std::optional<TensorT<T>> cached_input_;
};

// Max pooling with row-major first-index tie breaking. Argmax positions are
// kept for routing gradients.
template <class T>
class MaxPool2d {
 public:
  MaxPool2d(int ph, int pw, int sh, int sw) : ph_(ph), pw_(pw), sh_(sh), sw_(sw) {
    if (ph < 1 || pw < 1 || sh < 1 || sw < 1) {
      throw ConfigError("maxpool window and stride must be >= 1");
    }
  }

  std::pair<int, int> output_hw(int h, int w) const {
    if (h < ph_ || w < pw_) {
      throw ShapeError("maxpool window " + std::to_string(ph_) + "x" +
                       std::to_string(pw_) + " does not fit input " +
                       std::to_string(h) + "x" + std::to_string(w));
    }
    return {detail::conv_out_dim(h, ph_, sh_), detail::conv_out_dim(w, pw_, sw_)};
  }

  TensorT<T> forward(const TensorT<T>& input) {
    if (input.rank() != 3) {
      throw ShapeError("maxpool expected rank-3 input, got " +
                       shape_to_string(input.shape()));
    }
    auto [oh, ow] = output_hw(input.dim(1), input.dim(2));
    const int ch = input.dim(0);
    TensorT<T> out({ch, oh, ow});
    argmax_.assign(out.size(), 0);
    for (int c = 0; c < ch; ++c) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          const int iy0 = oy * sh_, ix0 = ox * sw_;
          T best = input.at(c, iy0, ix0);
          std::size_t best_idx = input.flat(c, iy0, ix0);
          for (int ky = 0; ky < ph_; ++ky) {
            for (int kx = 0; kx < pw_; ++kx) {
              const T v = input.at(c, iy0 + ky, ix0 + kx);
              if (v > best) {
                best = v;
                best_idx = input.flat(c, iy0 + ky, ix0 + kx);
              }
            }
          }
          out.at(c, oy, ox) = best;
          argmax_[out.flat(c, oy, ox)] = best_idx;
        }
      }
    }
    input_shape_ = input.shape();
    has_cache_ = true;
    return out;
  }

  TensorT<T> backward(const TensorT<T>& dout) {
    if (!has_cache_) throw StateError("maxpool backward without forward");
    TensorT<T> dinput(input_shape_);
    for (std::size_t i = 0; i < dout.size(); ++i) {
      dinput[argmax_[i]] += dout[i];
    }
    return dinput;
  }

  const std::vector<std::size_t>& argmax() const { return argmax_; }

 private:
  int ph_, pw_, sh_, sw_;
  std::vector<std::size_t> argmax_;
  std::vector<int> input_shape_;
  bool has_cache_ = false;
};

// Randomized leaky rectifier.
//
//   train: f(x) = x for x >= 0, a*x otherwise with a ~ U(l, u) drawn from a
//          stream derived from (mode.seed, layer_id); slopes are cached for
//          backward and identical across forwards with the same Mode.
//   eval:  f(x) = x for x >= 0, x*(l+u)/2 otherwise. With literal_eval the
//          negative branch is x/((l+u)/2) instead, which amplifies rather
//          than damps; kept only as a config switch.
template <class T>
class RRelu {
 public:
  RRelu(RReluConfig cfg, std::uint64_t layer_id) : cfg_(cfg), layer_id_(layer_id) {
    cfg_.validate();
  }

  TensorT<T> forward(const TensorT<T>& x, const Mode& mode) {
    slopes_ = TensorT<T>(x.shape());
    TensorT<T> out(x.shape());
    if (mode.training) {
      Rng rng(Rng::mix(mode.seed, layer_id_));
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] >= T(0)) {
          slopes_[i] = T(1);
          out[i] = x[i];
        } else {
          const T a = static_cast<T>(rng.uniform(cfg_.l, cfg_.u));
          slopes_[i] = a;
          out[i] = a * x[i];
        }
      }
    } else {
      const double m = cfg_.mean_slope();
      const T neg_slope = static_cast<T>(cfg_.literal_eval ? 1.0 / m : m);
      for (std::size_t i = 0; i < x.size(); ++i) {
        slopes_[i] = x[i] >= T(0) ? T(1) : neg_slope;
        out[i] = slopes_[i] * x[i];
      }
    }
    has_cache_ = true;
    return out;
  }

  TensorT<T> backward(const TensorT<T>& dout) {
    if (!has_cache_) throw StateError("rrelu backward without forward");
    TensorT<T> dx(dout.shape());
    for (std::size_t i = 0; i < dout.size(); ++i) dx[i] = dout[i] * slopes_[i];
    return dx;
  }

  const RReluConfig& config() const { return cfg_; }

 private:
  RReluConfig cfg_;
  std::uint64_t layer_id_;
  TensorT<T> slopes_;
  bool has_cache_ = false;
};

// Fully connected layer y = W x + b over rank-1 tensors.
template <class T>
class Linear {
 public:
  Linear(int in_dim, int out_dim) : in_(in_dim), out_(out_dim) {
    if (in_dim < 1 || out_dim < 1) throw ConfigError("linear dims must be >= 1");
    weights_ = TensorT<T>({out_dim, in_dim});
    bias_ = TensorT<T>({out_dim});
    wgrad_ = TensorT<T>({out_dim, in_dim});
    bgrad_ = TensorT<T>({out_dim});
  }

  void init(Rng& rng) {
    detail::glorot_init(weights_, in_, out_, rng);
    bias_.fill(T(0));
  }

  TensorT<T> forward(const TensorT<T>& x) {
    if (x.rank() != 1 || x.dim(0) != in_) {
      throw ShapeError("linear expected input [" + std::to_string(in_) +
                       "], got " + shape_to_string(x.shape()));
    }
    TensorT<T> y({out_});
    for (int o = 0; o < out_; ++o) {
      double acc = static_cast<double>(bias_[o]);
      for (int i = 0; i < in_; ++i) {
        acc += static_cast<double>(weights_.at(o, i)) * static_cast<double>(x[i]);
      }
      y[o] = static_cast<T>(acc);
    }
    cached_input_ = x;
    return y;
  }

  TensorT<T> backward(const TensorT<T>& dout) {
    if (!cached_input_) throw StateError("linear backward without forward");
    const TensorT<T>& x = *cached_input_;
    TensorT<T> dx({in_});
    for (int o = 0; o < out_; ++o) {
      const double g = static_cast<double>(dout[o]);
      bgrad_[o] += static_cast<T>(g);
      for (int i = 0; i < in_; ++i) {
        wgrad_.at(o, i) += static_cast<T>(g * static_cast<double>(x[i]));
      }
    }
    for (int i = 0; i < in_; ++i) {
      double acc = 0.0;
      for (int o = 0; o < out_; ++o) {
        acc += static_cast<double>(weights_.at(o, i)) * static_cast<double>(dout[o]);
      }
      dx[i] = static_cast<T>(acc);
    }
    return dx;
  }

  void zero_grads() {
    wgrad_.fill(T(0));
    bgrad_.fill(T(0));
  }

  std::vector<ParamRef<T>> params(const std::string& prefix) {
    return {{prefix + ".weight", &weights_, &wgrad_},
            {prefix + ".bias", &bias_, &bgrad_}};
  }

  TensorT<T>& weights() { return weights_; }
  TensorT<T>& bias() { return bias_; }
  int in_dim() const { return in_; }
  int out_dim() const { return out_; }

 private:
  int in_, out_;
  TensorT<T> weights_, bias_, wgrad_, bgrad_;
  std::optional<TensorT<T>> cached_input_;
};

}  // namespace dffn::nn
