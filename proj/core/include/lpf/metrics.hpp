#pragma once

#include <vector>

#include "lpf/color.hpp"
#include "lpf/image.hpp"

namespace lpf {

struct LossWeights {
  double w_lab = 1.0;
  double w_msssim = 1e-3;

  /// Throws Error{invalid_argument} unless both weights are finite and >= 0.
  void validate() const;
};

/// Multi-scale SSIM settings. Defaults are the standard five-scale weights
/// (they sum to 1.0001 as published; plan_msssim renormalizes them),
/// an 11-tap Gaussian window with sigma 1.5, and K1 = 0.01, K2 = 0.03.
struct MsssimConfig {
  int scales = 5;
  std::vector<double> weights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 100.0;

  void validate() const;
};

/// How MS-SSIM is actually evaluated for a given image size. Scales are
/// dropped while the coarsest level would be smaller than the window; for
/// images narrower than the window itself, the window shrinks to the largest
/// odd size that fits (minimum 3).
struct MsssimPlan {
  int scales = 0;
  int window = 0;
  std::vector<double> weights;  // renormalized to sum to 1
  bool reduced = false;
};

MsssimPlan plan_msssim(int width, int height, const MsssimConfig& cfg);

double l1_lab(const Image& pred, const Image& target);
double msssim_l(const Image& pred, const Image& target, const MsssimConfig& cfg = {});
double deeplpf_loss(const Image& pred, const Image& target, const LossWeights& w = {},
                    const MsssimConfig& cfg = {});

/// 10 log10(1 / MSE) over all RGB values; +infinity when MSE is 0.
double psnr(const Image& pred, const Image& target);

/// Single-scale SSIM per RGB channel (dynamic range 1), averaged.
double ssim(const Image& pred, const Image& target, const MsssimConfig& cfg = {});

/// Loss against a fixed target, with the target-side colorimetry cached.
/// `loss` and `loss_and_grad` share one code path, so their values agree
/// bit for bit with each other and with deeplpf_loss.
class LossEvaluator {
 public:
  LossEvaluator(const Image& target, const LossWeights& weights, const MsssimConfig& cfg);

  double loss(const Image& pred) const;
  /// Returns the loss and writes dLoss/dPred into `grad_pred` (resized to pred's shape).
  double loss_and_grad(const Image& pred, Image& grad_pred) const;

  const MsssimPlan& plan() const noexcept { return plan_; }

 private:
  double evaluate(const Image& pred, Image* grad_pred) const;

  LossWeights weights_;
  MsssimConfig cfg_;
  MsssimPlan plan_;
  int width_;
  int height_;
  LabImage target_lab_;
  ScalarField target_l_;
};

}  // namespace lpf
