#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lpf/metrics.hpp"
#include "lpf/pipeline.hpp"

namespace lpf {

/// Shape of a flattened FilterStack: cubic coefficients (channel-major),
/// then per graduated instance [s_r, s_g, s_b, slope, intercept,
/// offset_top_raw, offset_bottom_raw, inv_raw], then per elliptical instance
/// [s_r, s_g, s_b, center_x, center_y, angle, semi_major_raw, semi_minor_raw].
struct StackLayout {
  static constexpr int kGraduatedSize = 8;
  static constexpr int kEllipticalSize = 8;

  enum GraduatedSlot { kScaleR, kScaleG, kScaleB, kSlope, kIntercept, kOffsetTop, kOffsetBottom, kInv };
  enum EllipticalSlot { kEScaleR, kEScaleG, kEScaleB, kCenterX, kCenterY, kAngle, kSemiMajor, kSemiMinor };

  CubicVariant variant = CubicVariant::cubic10;
  int n_graduated = 0;
  int n_elliptical = 0;

  std::size_t cubic_size() const noexcept {
    return 3 * static_cast<std::size_t>(coefficients_per_channel(variant));
  }
  std::size_t graduated_offset(int j) const noexcept {
    return cubic_size() + static_cast<std::size_t>(j) * kGraduatedSize;
  }
  std::size_t elliptical_offset(int j) const noexcept {
    return graduated_offset(n_graduated) + static_cast<std::size_t>(j) * kEllipticalSize;
  }
  std::size_t size() const noexcept { return elliptical_offset(n_elliptical); }

  /// True for inversion logits, whose forward value is piecewise constant.
  bool is_binary(std::size_t index) const noexcept;
  /// Human-readable slot name, e.g. "graduated[1].slope".
  std::string slot_name(std::size_t index) const;

  static StackLayout of(const FilterStack& stack) noexcept;

  friend bool operator==(const StackLayout&, const StackLayout&) = default;
};

struct ParamVector {
  StackLayout layout;
  std::vector<double> values;
};

/// Same layout as ParamVector. Inversion entries hold the straight-through
/// surrogate gradient.
struct GradVector {
  StackLayout layout;
  std::vector<double> values;
};

ParamVector to_param_vector(const FilterStack& stack);
FilterStack to_filter_stack(const ParamVector& params);

struct LossAndGrad {
  double loss = 0.0;
  GradVector grad;
};

/// Loss of pipeline_forward(params) against the evaluator's target and its
/// exact gradient. The output clamp passes gradients inside [0, 1]
/// (boundaries included) and blocks them outside; inversion bits use the
/// identity straight-through rule; raw lengths include the softplus factor.
/// Throws Error{non_finite} if any gradient entry is not finite.
LossAndGrad loss_and_grad(const ParamVector& params, const Image& input,
                          const LossEvaluator& evaluator);

LossAndGrad loss_and_grad(const ParamVector& params, const Image& input, const Image& target,
                          const LossWeights& weights, const MsssimConfig& cfg);

/// Loss only, through the same forward path as loss_and_grad.
double evaluate_loss(const ParamVector& params, const Image& input, const LossEvaluator& evaluator);

inline constexpr double kSkippedGradient = std::numeric_limits<double>::quiet_NaN();
inline bool is_skipped(double g) noexcept { return g != g; }

/// Central differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps) for every
/// coordinate with skip[i] == false; skipped coordinates get kSkippedGradient.
std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double epsilon,
                                       std::span<const bool> skip = {});

/// Finite-difference gradient of the full loss; inversion logits are skipped.
GradVector finite_diff_grad(const ParamVector& params, const Image& input, const Image& target,
                            const LossWeights& weights, const MsssimConfig& cfg, double epsilon);

}  // namespace lpf
