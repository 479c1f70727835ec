#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dffn/adagrad.h"
#include "dffn/gradcheck.h"
#include "dffn/layers.h"
#include "dffn/loss.h"
#include "dffn/rng.h"
#include "dffn/tensor.h"

using namespace dffn;
using namespace dffn::nn;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<float>(rng.uniform(lo, hi));
  }
  return t;
}

// Quadruple-loop oracle, written directly from the definition of valid
// cross-correlation. Kept independent of Conv2d.
Tensor naive_conv2d(const Tensor& input, const Tensor& weights,
                    const std::vector<float>& bias, int sh, int sw) {
  const int in_ch = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int out_ch = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
  const int oh = (h - kh) / sh + 1, ow = (w - kw) / sw + 1;
  Tensor out({out_ch, oh, ow});
  for (int oc = 0; oc < out_ch; ++oc)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double acc = bias[oc];
        for (int ic = 0; ic < in_ch; ++ic)
          for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx)
              acc += static_cast<double>(weights.at(oc, ic, ky, kx)) *
                     input.at(ic, oy * sh + ky, ox * sw + kx);
        out.at(oc, oy, ox) = static_cast<float>(acc);
      }
  return out;
}

Tensor naive_maxpool(const Tensor& input, int ph, int pw, int sh, int sw) {
  const int ch = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int oh = (h - ph) / sh + 1, ow = (w - pw) / sw + 1;
  Tensor out({ch, oh, ow});
  for (int c = 0; c < ch; ++c)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        float best = input.at(c, oy * sh, ox * sw);
        for (int ky = 0; ky < ph; ++ky)
          for (int kx = 0; kx < pw; ++kx)
            best = std::max(best, input.at(c, oy * sh + ky, ox * sw + kx));
        out.at(c, oy, ox) = best;
      }
  return out;
}

std::vector<float> naive_fc(const Tensor& weights, const std::vector<float>& bias,
                            const std::vector<float>& x) {
  std::vector<float> y(bias.size());
  for (std::size_t o = 0; o < bias.size(); ++o) {
    double acc = bias[o];
    for (std::size_t i = 0; i < x.size(); ++i) {
      acc += static_cast<double>(weights.at(static_cast<int>(o), static_cast<int>(i))) * x[i];
    }
    y[o] = static_cast<float>(acc);
  }
  return y;
}

void check_close(const Tensor& a, const Tensor& b, double tol) {
  REQUIRE(a.shape() == b.shape());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(static_cast<double>(a[i]) - b[i]) <= tol);
  }
}

}  // namespace

TEST_CASE("conv2d identity kernel passes input through") {
  Conv2d<float> conv(1, 1, 1, 1);
  conv.weights()[0] = 1.0f;
  conv.bias()[0] = 0.0f;
  Rng rng(7);
  Tensor input = random_tensor({1, 4, 5}, rng);
  Tensor out = conv.forward(input);
  check_close(out, input, 0.0);
}

TEST_CASE("conv2d sums a window of ones to 4") {
  Conv2d<float> conv(1, 1, 2, 2);
  conv.weights().fill(1.0f);
  conv.bias()[0] = 0.0f;
  Tensor input({1, 2, 2});
  input.fill(1.0f);
  Tensor out = conv.forward(input);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == doctest::Approx(4.0f));
}

TEST_CASE("conv2d matches the naive oracle on a strided case") {
  Rng rng(11);
  Tensor input = random_tensor({2, 7, 9}, rng);
  Conv2d<float> conv(2, 3, 3, 3, 2, 2);
  conv.init(rng);
  Tensor got = conv.forward(input);
  Tensor want = naive_conv2d(input, conv.weights(),
                             conv.bias().values(), 2, 2);
  check_close(got, want, 1e-6);
}

TEST_CASE("conv2d rejects channel mismatch naming both shapes") {
  Conv2d<float> conv(2, 1, 2, 2);
  Tensor input({1, 4, 4});
  CHECK_THROWS_AS(conv.forward(input), ShapeError);
  try {
    conv.forward(input);
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("[1x4x4]") != std::string::npos);
  }
}

TEST_CASE("conv2d rejects kernels larger than the input") {
  Conv2d<float> conv(1, 1, 5, 5);
  Tensor input({1, 3, 3});
  CHECK_THROWS_AS(conv.forward(input), ShapeError);
}

TEST_CASE("conv/pool/fc match naive oracles on random shapes") {
  Rng rng(1234);
  for (int iter = 0; iter < 60; ++iter) {
    const int in_ch = 1 + static_cast<int>(rng.below(3));
    const int h = 3 + static_cast<int>(rng.below(10));
    const int w = 3 + static_cast<int>(rng.below(10));
    Tensor input = random_tensor({in_ch, h, w}, rng);

    const int kh = 1 + static_cast<int>(rng.below(std::min(h, 4)));
    const int kw = 1 + static_cast<int>(rng.below(std::min(w, 4)));
    const int sh = 1 + static_cast<int>(rng.below(2));
    const int sw = 1 + static_cast<int>(rng.below(2));
    const int out_ch = 1 + static_cast<int>(rng.below(4));
    Conv2d<float> conv(in_ch, out_ch, kh, kw, sh, sw);
    conv.init(rng);
    check_close(conv.forward(input),
                naive_conv2d(input, conv.weights(), conv.bias().values(), sh, sw),
                1e-5);

    MaxPool2d<float> pool(kh, kw, sh, sw);
    check_close(pool.forward(input), naive_maxpool(input, kh, kw, sh, sw), 0.0);

    const int out_dim = 1 + static_cast<int>(rng.below(6));
    Linear<float> fc(h, out_dim);
    fc.init(rng);
    Tensor x = random_tensor({h}, rng);
    Tensor y = fc.forward(x);
    std::vector<float> want = naive_fc(fc.weights(), fc.bias().values(), x.values());
    for (int o = 0; o < out_dim; ++o) {
      CHECK(std::abs(y[o] - want[o]) <= 1e-5);
    }
  }
}

TEST_CASE("maxpool basics") {
  MaxPool2d<float> pool(2, 2, 1, 1);
  Tensor input({1, 2, 2}, {1.0f, 2.0f, 3.0f, 4.0f});
  Tensor out = pool.forward(input);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == 4.0f);

  SUBCASE("ties go to the first row-major index") {
    Tensor flat({1, 2, 2});
    flat.fill(3.5f);
    Tensor pooled = pool.forward(flat);
    CHECK(pooled[0] == 3.5f);
    CHECK(pool.argmax()[0] == 0);
  }

  SUBCASE("window larger than input is a shape error") {
    MaxPool2d<float> big(5, 5, 1, 1);
    CHECK_THROWS_AS(big.forward(input), ShapeError);
  }

  SUBCASE("backward routes gradient to the argmax") {
    Tensor x({1, 2, 2}, {1.0f, 9.0f, 3.0f, 4.0f});
    pool.forward(x);
    Tensor dout({1, 1, 1}, {2.0f});
    Tensor dx = pool.backward(dout);
    CHECK(dx[0] == 0.0f);
    CHECK(dx[1] == 2.0f);
    CHECK(dx[2] == 0.0f);
    CHECK(dx[3] == 0.0f);
  }
}

TEST_CASE("maxpool backward before forward is a state error") {
  MaxPool2d<float> pool(2, 2, 1, 1);
  Tensor dout({1, 1, 1});
  CHECK_THROWS_AS(pool.backward(dout), StateError);
}

TEST_CASE("rrelu passes non-negative values through in both modes") {
  RRelu<float> act(RReluConfig{}, 0);
  Tensor x({1}, {2.0f});
  CHECK(act.forward(x, Mode::train(5))[0] == 2.0f);
  CHECK(act.forward(x, Mode::eval())[0] == 2.0f);
}

TEST_CASE("rrelu eval multiplies negatives by the mean slope") {
  RRelu<float> act(RReluConfig{0.125, 0.375}, 0);
  Tensor x({1}, {-1.0f});
  CHECK(act.forward(x, Mode::eval())[0] == doctest::Approx(-0.25).epsilon(1e-6));
}

TEST_CASE("rrelu literal eval divides by the mean slope") {
  RRelu<float> act(RReluConfig{0.125, 0.375, true}, 0);
  Tensor x({1}, {-1.0f});
  CHECK(act.forward(x, Mode::eval())[0] == doctest::Approx(-4.0).epsilon(1e-6));
}

TEST_CASE("rrelu train slopes stay inside [l, u) and repeat under one seed") {
  RReluConfig cfg{0.125, 0.333};
  RRelu<float> act(cfg, 3);
  Rng rng(99);
  Tensor x = random_tensor({64}, rng, -2.0, 2.0);
  Tensor first = act.forward(x, Mode::train(17));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= 0.0f) {
      CHECK(first[i] == x[i]);
    } else {
      // For negative x, a*x lies in [u*x, l*x].
      CHECK(first[i] >= cfg.u * x[i]);
      CHECK(first[i] <= cfg.l * x[i]);
    }
  }
  Tensor second = act.forward(x, Mode::train(17));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(first[i] == second[i]);

  Tensor eval1 = act.forward(x, Mode::eval());
  Tensor eval2 = act.forward(x, Mode::eval());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(eval1[i] == eval2[i]);
}

TEST_CASE("rrelu rejects invalid slope bounds") {
  CHECK_THROWS_AS(RRelu<float>(RReluConfig{0.5, 0.5}, 0), ConfigError);
  CHECK_THROWS_AS(RRelu<float>(RReluConfig{0.2, 1.0}, 0), ConfigError);
}

TEST_CASE("linear layer basics") {
  SUBCASE("identity weights reproduce the input") {
    Linear<float> fc(3, 3);
    for (int i = 0; i < 3; ++i) fc.weights().at(i, i) = 1.0f;
    Tensor x({3}, {1.0f, -2.0f, 0.5f});
    Tensor y = fc.forward(x);
    for (int i = 0; i < 3; ++i) CHECK(y[i] == x[i]);
  }
  SUBCASE("zero weights yield the bias") {
    Linear<float> fc(3, 2);
    fc.bias().values() = {1.0f, 2.0f};
    Tensor x({3}, {4.0f, 5.0f, 6.0f});
    Tensor y = fc.forward(x);
    CHECK(y[0] == 1.0f);
    CHECK(y[1] == 2.0f);
  }
  SUBCASE("length mismatch is a shape error") {
    Linear<float> fc(3, 2);
    Tensor x({4});
    CHECK_THROWS_AS(fc.forward(x), ShapeError);
  }
}

TEST_CASE("smooth_l1 worked values") {
  std::vector<float> p{1.0f}, t{1.0f};
  CHECK(smooth_l1<float>(p, t) == doctest::Approx(0.0));
  p = {0.0f};
  CHECK(smooth_l1<float>(p, t) == doctest::Approx(0.5));
  p = {0.5f};
  CHECK(smooth_l1<float>(p, t) == doctest::Approx(0.125));
}

TEST_CASE("smooth_l1 branches agree at |p-t| = 1") {
  const double d = 1.0;
  CHECK(0.5 * d * d == doctest::Approx(std::abs(d) - 0.5));
}

TEST_CASE("smooth_l1 rejects an empty batch") {
  std::vector<float> empty;
  CHECK_THROWS_AS(smooth_l1<float>(empty, empty), DomainError);
  CHECK_THROWS_AS(smooth_l1_grad(0.5f, 1.0f, 0), DomainError);
}

TEST_CASE("smooth_l1 gradient clips to +/- 1/n outside the quadratic zone") {
  CHECK(smooth_l1_grad(0.4f, 1.0f, 4) == doctest::Approx(-0.6 / 4.0));
  CHECK(smooth_l1_grad(5.0f, 1.0f, 4) == doctest::Approx(0.25));
  CHECK(smooth_l1_grad(-5.0f, 1.0f, 4) == doctest::Approx(-0.25));
}

TEST_CASE("backprop through a single fc layer gives dL/db = (p-t)/n") {
  Linear<float> fc(2, 1);
  fc.weights().values() = {0.3f, -0.2f};
  fc.bias()[0] = 0.1f;
  Tensor x({2}, {1.0f, 2.0f});
  Tensor p = fc.forward(x);
  const float target = 1.0f;
  REQUIRE(std::abs(p[0] - target) < 1.0f);
  fc.zero_grads();
  Tensor dout({1}, {static_cast<float>(smooth_l1_grad(p[0], target, 1))});
  fc.backward(dout);
  auto params = fc.params("fc");
  CHECK((*params[1].grad)[0] == doctest::Approx(p[0] - target).epsilon(1e-6));
}

TEST_CASE("linear backward before forward is a state error") {
  Linear<float> fc(2, 1);
  Tensor dout({1});
  CHECK_THROWS_AS(fc.backward(dout), StateError);
}

TEST_CASE("adagrad applies the textbook update") {
  Tensor w({1}, {1.0f});
  Tensor g({1}, {0.5f});
  Adagrad<float> opt(0.1, 1e-8);
  opt.attach({{"w", &w, &g}});
  opt.step();
  CHECK(opt.accumulators()[0][0] == doctest::Approx(0.25));
  CHECK(w[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-6));
}

TEST_CASE("adagrad leaves parameters alone on zero gradients") {
  Tensor w({3}, {1.0f, -2.0f, 3.0f});
  Tensor g({3});
  Adagrad<float> opt(0.1);
  opt.attach({{"w", &w, &g}});
  opt.step();
  opt.step();
  CHECK(w[0] == 1.0f);
  CHECK(w[1] == -2.0f);
  CHECK(w[2] == 3.0f);
}

TEST_CASE("adagrad shrinks repeated updates and never shrinks accumulators") {
  Tensor w({1}, {1.0f});
  Tensor g({1}, {0.5f});
  Adagrad<float> opt(0.1);
  opt.attach({{"w", &w, &g}});
  const float w0 = w[0];
  opt.step();
  const float step1 = std::abs(w[0] - w0);
  const float accum1 = opt.accumulators()[0][0];
  const float w1 = w[0];
  opt.step();
  const float step2 = std::abs(w[0] - w1);
  CHECK(step2 < step1);
  CHECK(opt.accumulators()[0][0] > accum1);
}

TEST_CASE("adagrad flags non-finite gradients with the parameter name") {
  Tensor w({1}, {1.0f});
  Tensor g({1}, {std::numeric_limits<float>::quiet_NaN()});
  Adagrad<float> opt(0.1);
  opt.attach({{"layer3.bias", &w, &g}});
  try {
    opt.step();
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("layer3.bias") != std::string::npos);
  }
}

namespace {

// Two stacked fc layers with an optional rrelu in between; double precision
// so the finite-difference probe is exact to rounding.
struct TinyNet {
  Linear<double> fc1;
  RRelu<double> act;
  Linear<double> fc2;
  bool use_act;
  Mode mode;

  TinyNet(int in, int hidden, bool with_act, std::uint64_t seed)
      : fc1(in, hidden), act(RReluConfig{}, 1), fc2(hidden, 1), use_act(with_act),
        mode(Mode::train(seed)) {
    Rng rng(seed);
    fc1.init(rng);
    fc2.init(rng);
  }

  double forward_loss(const TensorT<double>& x, double target) {
    TensorT<double> h = fc1.forward(x);
    if (use_act) h = act.forward(h, mode);
    TensorT<double> p = fc2.forward(h);
    std::vector<double> pv{p[0]}, tv{target};
    return smooth_l1<double>(pv, tv);
  }

  void backward(const TensorT<double>& x, double target) {
    fc1.zero_grads();
    fc2.zero_grads();
    TensorT<double> h = fc1.forward(x);
    if (use_act) h = act.forward(h, mode);
    TensorT<double> p = fc2.forward(h);
    TensorT<double> dp({1}, {smooth_l1_grad(p[0], target, 1)});
    TensorT<double> dh = fc2.backward(dp);
    if (use_act) dh = act.backward(dh);
    fc1.backward(dh);
  }

  std::vector<ParamRef<double>> params() {
    auto out = fc1.params("fc1");
    auto more = fc2.params("fc2");
    out.insert(out.end(), more.begin(), more.end());
    return out;
  }
};

}  // namespace

TEST_CASE("grad_check passes a linear-only network below 1e-5") {
  TinyNet net(5, 4, false, 21);
  Rng rng(22);
  TensorT<double> x({5});
  for (int i = 0; i < 5; ++i) x[i] = rng.uniform(-1.0, 1.0);
  const double target = 0.4;
  net.backward(x, target);
  auto report = grad_check<double>(
      net.params(), [&] { return net.forward_loss(x, target); }, 1e-3);
  CHECK(report.max_rel_error < 1e-5);
  CHECK(report.pass(1e-5));
}

TEST_CASE("grad_check passes a rectified network at 1e-3 and fails at 0") {
  TinyNet net(6, 5, true, 31);
  Rng rng(32);
  TensorT<double> x({6});
  for (int i = 0; i < 6; ++i) x[i] = rng.uniform(-1.0, 1.0);
  const double target = -0.25;
  net.backward(x, target);
  auto report = grad_check<double>(
      net.params(), [&] { return net.forward_loss(x, target); }, 1e-3);
  CHECK(report.pass(1e-3));
  CHECK_FALSE(report.pass(0.0));
  CHECK(report.layers.size() == 2);
  for (const auto& layer : report.layers) {
    CHECK(layer.parameter_count > 0);
    CHECK(layer.mean_rel_error <= layer.max_rel_error);
  }
}
