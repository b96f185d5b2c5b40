#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lpf/gradient.hpp"

namespace lpf {

struct AdamConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Zero-initialized moments; `step` counts completed updates.
struct AdamState {
  explicit AdamState(std::size_t n) : first(n, 0.0), second(n, 0.0) {}

  std::vector<double> first;
  std::vector<double> second;
  long step = 0;
};

/// One bias-corrected Adam update. A non-finite gradient leaves both the
/// state and the parameters untouched and throws Error{non_finite}.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               const AdamConfig& cfg);

struct FitConfig {
  int steps = 2000;
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  LossWeights weights;
  MsssimConfig msssim;
  CubicVariant variant = CubicVariant::cubic20;
  int n_graduated = 3;
  int n_elliptical = 3;
  std::uint64_t seed = 0;
  int restarts = 1;
  /// Zeroes wall-clock fields so reports are reproducible byte for byte.
  bool deterministic = false;

  void validate() const;
  AdamConfig adam() const noexcept { return {learning_rate, beta1, beta2, epsilon}; }
  StackLayout layout() const noexcept { return {variant, n_graduated, n_elliptical}; }
};

struct QualityMetrics {
  double psnr = 0.0;
  double ssim = 0.0;
};

struct FitReport {
  std::vector<double> loss_trace;  // loss of every evaluated iterate, step 0 first
  int best_step = 0;
  double best_loss = 0.0;
  ParamVector best_params;
  ParamVector final_params;
  QualityMetrics initial;
  QualityMetrics final;
  QualityMetrics best;
  double seconds = 0.0;
  std::uint64_t seed = 0;
  int steps = 0;
  bool aborted = false;
  std::string abort_reason;
};

/// Identity-output starting point: identity cubic, zero scale on the first
/// instance of each branch and unit scale on the others, random geometry.
ParamVector init_stack(const FitConfig& cfg, std::uint64_t seed);

/// Runs init -> [loss_and_grad -> adam_step] x steps with best-iterate
/// tracking. On a non-finite loss or gradient the loop stops and the
/// partial report is returned with `aborted` set.
FitReport fit(const Image& input, const Image& target, const FitConfig& cfg);

/// `cfg.restarts` fits with seeds seed, seed + 1, ...; keeps the lowest best loss.
FitReport fit_with_restarts(const Image& input, const Image& target, const FitConfig& cfg);

Image render(const ParamVector& params, const Image& input);

}  // namespace lpf
