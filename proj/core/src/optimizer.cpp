#include "lpf/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "lpf/error.hpp"

namespace lpf {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.first.size()) {
    throw Error(ErrorKind::invalid_argument, "adam_step: size mismatch");
  }
  for (double g : grads) {
    if (!std::isfinite(g)) {
      throw Error(ErrorKind::non_finite, "adam_step: non-finite gradient");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(cfg.beta1, t);
  const double corr2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.first[i] = cfg.beta1 * state.first[i] + (1.0 - cfg.beta1) * grads[i];
    state.second[i] = cfg.beta2 * state.second[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double m_hat = state.first[i] / corr1;
    const double v_hat = state.second[i] / corr2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

void FitConfig::validate() const {
  if (steps < 1) throw Error(ErrorKind::invalid_argument, "steps must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::invalid_argument, "learning rate must be positive");
  }
  if (n_graduated < 0 || n_elliptical < 0) {
    throw Error(ErrorKind::invalid_argument, "filter counts must be >= 0");
  }
  if (restarts < 1) throw Error(ErrorKind::invalid_argument, "restarts must be >= 1");
  weights.validate();
  msssim.validate();
}

ParamVector init_stack(const FitConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mid(0.25, 0.75);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::bernoulli_distribution coin(0.5);

  FilterStack stack;
  stack.cubic = CubicParams::identity(cfg.variant);
  for (int j = 0; j < cfg.n_graduated; ++j) {
    const double s = j == 0 ? 0.0 : 1.0;
    const double intercept = mid(rng);
    const double inv = coin(rng) ? 0.1 : -0.1;
    stack.graduated.push_back(GraduatedParams::from_natural({s, s, s}, 0.0, intercept, 0.25, 0.25, inv));
  }
  for (int j = 0; j < cfg.n_elliptical; ++j) {
    const double s = j == 0 ? 0.0 : 1.0;
    const double h = mid(rng);
    const double k = mid(rng);
    const double theta = angle(rng);
    stack.elliptical.push_back(EllipticalParams::from_natural({s, s, s}, h, k, theta, 0.5, 0.5));
  }
  return to_param_vector(stack);
}

Image render(const ParamVector& params, const Image& input) {
  return pipeline_forward(to_filter_stack(params), input).y_final;
}

namespace {

QualityMetrics quality(const ParamVector& params, const Image& input, const Image& target) {
  const Image out = render(params, input);
  return {psnr(out, target), ssim(out, target)};
}

}  // namespace

FitReport fit(const Image& input, const Image& target, const FitConfig& cfg) {
  cfg.validate();
  if (!input.same_shape(target)) {
    throw Error(ErrorKind::dimension_mismatch, "fit: input and target dimensions differ");
  }
  const auto start = std::chrono::steady_clock::now();
  const LossEvaluator evaluator(target, cfg.weights, cfg.msssim);
  const AdamConfig adam = cfg.adam();

  FitReport report;
  report.seed = cfg.seed;
  report.steps = cfg.steps;
  ParamVector params = init_stack(cfg, cfg.seed);
  AdamState state(params.values.size());
  report.best_params = params;
  report.best_loss = std::numeric_limits<double>::infinity();

  for (int step = 0; step <= cfg.steps; ++step) {
    LossAndGrad lg;
    try {
      lg = loss_and_grad(params, input, evaluator);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::non_finite) throw;
      report.aborted = true;
      report.abort_reason = e.what();
      break;
    }
    if (!std::isfinite(lg.loss)) {
      report.aborted = true;
      report.abort_reason = "non-finite loss at step " + std::to_string(step);
      break;
    }
    report.loss_trace.push_back(lg.loss);
    report.final_params = params;
    if (lg.loss < report.best_loss) {
      report.best_loss = lg.loss;
      report.best_step = step;
      report.best_params = params;
    }
    if (step == cfg.steps) break;
    adam_step(state, params.values, lg.grad.values, adam);
  }
  if (report.loss_trace.empty()) {
    report.final_params = report.best_params;
  }

  report.initial = quality(init_stack(cfg, cfg.seed), input, target);
  report.final = quality(report.final_params, input, target);
  report.best = quality(report.best_params, input, target);
  if (!cfg.deterministic) {
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return report;
}

FitReport fit_with_restarts(const Image& input, const Image& target, const FitConfig& cfg) {
  cfg.validate();
  FitReport best;
  bool have = false;
  double seconds = 0.0;
  for (int r = 0; r < cfg.restarts; ++r) {
    FitConfig run = cfg;
    run.seed = cfg.seed + static_cast<std::uint64_t>(r);
    FitReport report = fit(input, target, run);
    seconds += report.seconds;
    if (!have || report.best_loss < best.best_loss) {
      best = std::move(report);
      have = true;
    }
  }
  best.seconds = seconds;
  return best;
}

}  // namespace lpf
