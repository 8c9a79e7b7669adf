#include "doctest.h"

#include <cmath>
#include <random>

#include "coinfer/neuralnet.hpp"
#include "gradient_checks.hpp"

using namespace coinfer;
using namespace coinfer::nn;

TEST_CASE("forward examples") {
  const Mlp zero = Mlp::zeros({3, 5, 2});
  CHECK(zero.forward(Vector(Vector::Constant(3, 7.0))).isZero());

  Mlp id = Mlp::zeros({3, 3});
  id.layers()[0].weight = Matrix::Identity(3, 3);
  Vector x(3);
  x << -1.0, 2.0, 0.5;
  CHECK(id.forward(x) == x);

  const Mlp net({4, 8, 8, 3}, 5);
  const Vector in = Vector::Random(4);
  CHECK(net.forward(in) == net.forward(in));
  Matrix batch(4, 2);
  batch << in, in;
  const Matrix out = net.forward(batch);
  CHECK(out.col(0) == net.forward(in));
  CHECK_THROWS(net.forward(Vector(Vector::Zero(5))));
  CHECK(net.parameter_count() == 4 * 8 + 8 + 8 * 8 + 8 + 8 * 3 + 3);
}

TEST_CASE("initialization is seeded and bounded") {
  const Mlp a({4, 16, 2}, 3), b({4, 16, 2}, 3), c({4, 16, 2}, 4);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  const double bound = std::sqrt(6.0 / 4.0);
  CHECK(a.layers()[0].weight.cwiseAbs().maxCoeff() <= bound);
  CHECK(a.layers()[0].bias.isZero());
}

TEST_CASE("backward examples") {
  const Mlp net({3, 6, 2}, 1);
  const Matrix x = Matrix::Random(3, 4);
  const auto trace = net.forward_trace(x);
  const Gradients g = net.backward(trace, Matrix::Zero(2, 4));
  CHECK(g.squared_norm() == 0.0);

  // A hidden unit with negative pre-activation passes no gradient back.
  Mlp dead = Mlp::zeros({2, 2, 1});
  dead.layers()[0].weight << 1.0, 1.0, -1.0, -1.0;
  dead.layers()[1].weight << 1.0, 1.0;
  Matrix in(2, 1);
  in << 1.0, 2.0;
  const Gradients gd = dead.backward(dead.forward_trace(in), Matrix::Ones(1, 1));
  CHECK(gd.layers[0].weight.row(1).isZero());
  CHECK(gd.layers[0].bias(1) == 0.0);
  CHECK(gd.layers[0].weight.row(0).norm() > 0.0);
  CHECK_THROWS(net.backward(trace, Matrix::Zero(3, 4)));
}

TEST_CASE("analytic gradients match finite differences") {
  testing::GradientCheck total;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto c = testing::check_mlp_gradients(seed);
    total.coordinates += c.coordinates;
    total.matched += c.matched;
  }
  MESSAGE("matched " << total.matched << " of " << total.coordinates);
  CHECK(total.fraction() >= 0.99);
}

TEST_CASE("adam update rule") {
  Mlp net = Mlp::zeros({1, 1});
  net.layers()[0].weight(0, 0) = 1.0;
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  Adam opt(net, cfg);

  Gradients g = net.zero_gradients();
  opt.step(net, g);
  CHECK(net.layers()[0].weight(0, 0) == 1.0);
  CHECK(net.layers()[0].bias(0) == 0.0);

  // f(w) = w^2 at w = 1: gradient 2.
  g.layers[0].weight(0, 0) = 2.0;
  opt.step(net, g);
  const double w = net.layers()[0].weight(0, 0);
  // Step 2 with moments from steps (0, 2): m = 0.2, v = 0.004.
  const double m_hat = 0.2 / (1.0 - 0.9 * 0.9);
  const double v_hat = 0.004 / (1.0 - 0.999 * 0.999);
  CHECK(w == doctest::Approx(1.0 - 0.1 * m_hat / (std::sqrt(v_hat) + 1e-8)).epsilon(1e-12));
  CHECK(w * w < 1.0);
  CHECK(opt.steps() == 2);

  ScalarAdam s(cfg);
  CHECK(s.step(1.0, 2.0) == doctest::Approx(0.9).epsilon(1e-7));
}

TEST_CASE("adam detects non-finite parameters") {
  Mlp net = Mlp::zeros({1, 1});
  Adam opt(net, {});
  Gradients g = net.zero_gradients();
  g.layers[0].weight(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(opt.step(net, g), NonFiniteError);
}

TEST_CASE("identical training runs give identical parameters") {
  auto run = [] {
    Mlp net({2, 4, 1}, 8);
    Adam opt(net, {});
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
      const Matrix x = testing::random_matrix(rng, 2, 3);
      const auto trace = net.forward_trace(x);
      opt.step(net, net.backward(trace, trace.output));
    }
    return net;
  };
  CHECK(run() == run());
}

TEST_CASE("softmax") {
  const Vector u = softmax(Vector::Constant(5, 0.3));
  for (int i = 0; i < 5; ++i) CHECK(u(i) == doctest::Approx(0.2).epsilon(1e-15));

  Vector big(2);
  big << 1000.0, 0.0;
  const Vector p = softmax(big);
  CHECK(p.allFinite());
  CHECK(p(0) == doctest::Approx(1.0));
  CHECK(p(1) < 1e-300);

  const std::vector<std::uint8_t> mask{1, 0, 1};
  const Vector m = masked_softmax(Vector::Zero(3), mask);
  CHECK(m(0) == 0.5);
  CHECK(m(1) == 0.0);
  CHECK(m(2) == 0.5);
  const Vector lm = masked_log_softmax(Vector::Zero(3), mask);
  CHECK(std::isinf(lm(1)));
  CHECK(lm(0) == doctest::Approx(std::log(0.5)));

  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const Vector z = testing::random_matrix(rng, 7, 1, 30.0);
    std::vector<std::uint8_t> mk(7);
    for (auto& v : mk) v = rng() % 3 != 0;
    mk[t % 7] = 1;
    const Vector q = masked_softmax(z, mk);
    CHECK(std::abs(q.sum() - 1.0) <= 1e-12);
    for (int i = 0; i < 7; ++i) {
      if (!mk[static_cast<std::size_t>(i)]) CHECK(q(i) == 0.0);
    }
  }
  CHECK_THROWS(masked_softmax(Vector::Zero(2), std::vector<std::uint8_t>{0, 0}));
}

TEST_CASE("soft update and serialization") {
  Mlp a({3, 4, 2}, 1);
  const Mlp b({3, 4, 2}, 2);
  const Mlp a0 = a;
  a.soft_update(b, 0.25);
  const auto pa = a.flat_parameters(), p0 = a0.flat_parameters(), pb = b.flat_parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i] == doctest::Approx(0.75 * p0[i] + 0.25 * pb[i]).epsilon(1e-15));
  }
  a.soft_update(b, 1.0);
  CHECK(a == b);

  const Mlp c = Mlp::from_json(nlohmann::json::parse(b.to_json().dump()));
  CHECK(c == b);
  nlohmann::json bad = b.to_json();
  bad["widths"] = {3, 5, 2};
  CHECK_THROWS(Mlp::from_json(bad));
  CHECK_THROWS(Mlp({3}, 1));
}
