#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "lpf/error.hpp"
#include "lpf/optimizer.hpp"
#include "lpf/synthetic.hpp"
#include "support/seeded.hpp"

using namespace lpf;

namespace {

// Scalar Adam trace for f = (theta - 2)^2 from theta = 0, lr 0.1, computed by
// hand-written NumPy in oracles/reference_values.py.
const std::vector<double> kAdamTrace{0.09999999975000008, 0.199833513884299, 0.29937660795353505,
                                     0.39849510471057936, 0.4970442187049883};

FitConfig small_config(int steps) {
  FitConfig cfg;
  cfg.steps = steps;
  cfg.variant = CubicVariant::cubic10;
  cfg.n_graduated = 1;
  cfg.n_elliptical = 1;
  cfg.deterministic = true;
  return cfg;
}

}  // namespace

TEST_CASE("Adam matches the scalar reference trace") {
  AdamState state(1);
  std::vector<double> theta{0.0};
  const AdamConfig cfg{0.1, 0.9, 0.999, 1e-8};
  for (double want : kAdamTrace) {
    const std::vector<double> g{2.0 * (theta[0] - 2.0)};
    adam_step(state, theta, g, cfg);
    CHECK(std::abs(theta[0] - want) < 1e-14);
  }
  CHECK(state.step == 5);
}

TEST_CASE("Adam converges on a scalar quadratic") {
  AdamState state(1);
  std::vector<double> theta{0.0};
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> g{2.0 * (theta[0] - 2.0)};
    adam_step(state, theta, g, {0.1, 0.9, 0.999, 1e-8});
  }
  CHECK(std::abs(theta[0] - 2.0) < 1e-3);
}

TEST_CASE("zero gradients never move parameters") {
  AdamState state(3);
  std::vector<double> theta{0.5, -1.0, 2.0};
  const std::vector<double> zero(3, 0.0);
  for (int i = 0; i < 50; ++i) adam_step(state, theta, zero, {});
  CHECK(theta == std::vector<double>{0.5, -1.0, 2.0});
}

TEST_CASE("non-finite gradients leave state untouched") {
  AdamState state(2);
  std::vector<double> theta{1.0, 1.0};
  adam_step(state, theta, std::vector<double>{0.5, 0.5}, {});
  const AdamState before = state;
  const std::vector<double> theta_before = theta;
  const std::vector<double> bad{0.1, std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(adam_step(state, theta, bad, {}), Error);
  CHECK(state.first == before.first);
  CHECK(state.second == before.second);
  CHECK(state.step == before.step);
  CHECK(theta == theta_before);
}

TEST_CASE("fit configuration validation") {
  FitConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.steps = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.steps = 10;
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.learning_rate = 1e-2;
  cfg.n_elliptical = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("initial stack reproduces the input exactly") {
  const Image input = synthetic_photo(24, 18, 3);
  for (CubicVariant variant : {CubicVariant::cubic10, CubicVariant::cubic20}) {
    FitConfig cfg;
    cfg.variant = variant;
    for (std::uint64_t seed : {0u, 1u, 99u}) {
      const ParamVector p = init_stack(cfg, seed);
      CHECK(p.layout == cfg.layout());
      const PipelineOutput out = pipeline_forward(to_filter_stack(p), input);
      for (double v : out.y3.data()) CHECK(v == 0.0);
      CHECK(out.y_final == input);
    }
  }
}

TEST_CASE("initialization is seeded") {
  const FitConfig cfg;
  CHECK(init_stack(cfg, 5).values == init_stack(cfg, 5).values);
  CHECK(init_stack(cfg, 5).values != init_stack(cfg, 6).values);

  const FilterStack s = to_filter_stack(init_stack(cfg, 12));
  CHECK(s.cubic == CubicParams::identity(cfg.variant));
  for (const GraduatedParams& g : s.graduated) {
    CHECK(g.slope == 0.0);
    CHECK(g.intercept >= 0.25);
    CHECK(g.intercept <= 0.75);
    CHECK(g.offset_top() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(g.offset_bottom() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(g.inv_raw) == 0.1);
  }
  for (const EllipticalParams& e : s.elliptical) {
    CHECK(e.center_x >= 0.25);
    CHECK(e.center_y <= 0.75);
    CHECK(e.angle >= 0.0);
    CHECK(e.angle < 3.14159266);
    CHECK(e.semi_major() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(e.semi_minor() == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("fitting a pair that is already matched stays at the start") {
  const Image img = synthetic_photo(20, 20, 4);
  const FitReport report = fit(img, img, small_config(20));
  CHECK(report.loss_trace.size() == 21);
  CHECK(report.loss_trace.front() == 0.0);
  CHECK(report.best_step == 0);
  CHECK(report.best_loss == 0.0);
  CHECK(render(report.best_params, img) == img);
  CHECK(std::isinf(report.best.psnr));
}

TEST_CASE("best iterate tracking") {
  const Image input = synthetic_photo(24, 24, 7);
  Image target = input;
  for (double& v : target.data()) v = std::min(1.0, v * 1.2 + 0.02);
  const FitConfig cfg = small_config(60);
  const FitReport report = fit(input, target, cfg);
  double min_loss = report.loss_trace.front();
  for (double l : report.loss_trace) min_loss = std::min(min_loss, l);
  CHECK(report.best_loss == min_loss);
  CHECK(report.best_loss == report.loss_trace[static_cast<std::size_t>(report.best_step)]);
  CHECK(report.best_loss <= report.loss_trace.front());
  CHECK(report.best_loss < report.loss_trace.front());
  // The stored best stack reproduces the best loss.
  const LossEvaluator eval(target, cfg.weights, cfg.msssim);
  CHECK(evaluate_loss(report.best_params, input, eval) == report.best_loss);
  CHECK(report.seconds == 0.0);
}

TEST_CASE("more steps never report a worse best loss") {
  const Image input = synthetic_photo(20, 20, 8);
  Image target = input;
  for (double& v : target.data()) v = std::max(0.0, v - 0.05);
  const FitReport shorter = fit(input, target, small_config(25));
  const FitReport longer = fit(input, target, small_config(50));
  CHECK(longer.best_loss <= shorter.best_loss);
  for (std::size_t i = 0; i < shorter.loss_trace.size(); ++i) {
    CHECK(longer.loss_trace[i] == shorter.loss_trace[i]);
  }
}

TEST_CASE("deterministic fits are bit-identical") {
  const Image input = synthetic_photo(20, 16, 9);
  const Image target = synthetic_photo(20, 16, 10);
  const FitReport a = fit(input, target, small_config(30));
  const FitReport b = fit(input, target, small_config(30));
  CHECK(a.loss_trace == b.loss_trace);
  CHECK(a.best_params.values == b.best_params.values);
  CHECK(a.final_params.values == b.final_params.values);
  CHECK(a.seconds == b.seconds);
}

TEST_CASE("restarts keep the best seed") {
  const Image input = synthetic_photo(20, 20, 1);
  const Image target = synthetic_photo(20, 20, 2);
  FitConfig cfg = small_config(15);
  cfg.restarts = 3;
  const FitReport best = fit_with_restarts(input, target, cfg);
  for (int r = 0; r < 3; ++r) {
    FitConfig single = cfg;
    single.restarts = 1;
    single.seed = cfg.seed + static_cast<std::uint64_t>(r);
    CHECK(best.best_loss <= fit(input, target, single).best_loss);
  }
}

TEST_CASE("mismatched pairs are rejected") {
  CHECK_THROWS_AS(fit(Image(8, 8), Image(8, 9), small_config(2)), Error);
}

TEST_CASE("global gain is recovered by the cubic through one full-coverage filter") {
  // With no graduated or elliptical filters the scaling map is zero and the
  // cubic output never reaches the result; one graduated instance is the
  // smallest stack that can express a global gain.
  const Image input = synthetic_photo(32, 32, 21);
  Image target = input;
  for (double& v : target.data()) v = std::min(1.0, 1.3 * v);
  FitConfig cfg;
  cfg.variant = CubicVariant::cubic10;
  cfg.n_graduated = 0;
  cfg.n_elliptical = 0;
  cfg.steps = 50;
  cfg.deterministic = true;
  const FitReport pinned = fit(input, target, cfg);
  CHECK(pinned.best.psnr == doctest::Approx(psnr(input, target)).epsilon(1e-12));

  cfg.n_graduated = 1;
  cfg.steps = 800;
  const FitReport report = fit(input, target, cfg);
  CHECK(report.best.psnr >= 30.0);
}
