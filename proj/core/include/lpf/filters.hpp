#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "lpf/image.hpp"

namespace lpf {

// Geometric lengths (graduated offsets, ellipse axes) are stored as
// unconstrained reals and mapped through softplus plus a small floor.
inline constexpr double kPositiveFloor = 1e-4;

double positive_from_raw(double raw) noexcept;
double positive_from_raw_derivative(double raw) noexcept;
/// Inverse of positive_from_raw; requires value > kPositiveFloor.
double raw_from_positive(double value);

using ChannelScales = std::array<double, 3>;

/// Three parallel lines: central line y = slope * x + intercept, with the
/// 100% area `offset_bottom` away on one side and the 0% area `offset_top`
/// away on the other. `inv_raw` is the real-valued inversion logit.
struct GraduatedParams {
  ChannelScales scale{};
  double slope = 0.0;
  double intercept = 0.5;
  double offset_top_raw = 0.0;
  double offset_bottom_raw = 0.0;
  double inv_raw = 1.0;

  double offset_top() const noexcept { return positive_from_raw(offset_top_raw); }
  double offset_bottom() const noexcept { return positive_from_raw(offset_bottom_raw); }

  static GraduatedParams from_natural(const ChannelScales& scale, double slope, double intercept,
                                      double offset_top, double offset_bottom, double inv_raw);

  friend bool operator==(const GraduatedParams&, const GraduatedParams&) = default;
};

struct EllipticalParams {
  ChannelScales scale{};
  double center_x = 0.5;
  double center_y = 0.5;
  double angle = 0.0;
  double semi_major_raw = 0.0;
  double semi_minor_raw = 0.0;

  double semi_major() const noexcept { return positive_from_raw(semi_major_raw); }
  double semi_minor() const noexcept { return positive_from_raw(semi_minor_raw); }

  static EllipticalParams from_natural(const ChannelScales& scale, double center_x,
                                       double center_y, double angle, double semi_major,
                                       double semi_minor);

  friend bool operator==(const EllipticalParams&, const EllipticalParams&) = default;
};

enum class CubicVariant { cubic10, cubic20 };

int coefficients_per_channel(CubicVariant variant) noexcept;
std::string_view to_string(CubicVariant variant) noexcept;
/// Accepts "cubic10"/"cubic-10" and "cubic20"/"cubic-20".
CubicVariant parse_cubic_variant(std::string_view text);

/// Per-channel cubic coefficients, channel-major.
///
/// cubic-10 multiplies the intensity by a bivariate cubic in (x, y), with
/// coefficients A..J on x^3, x^2y, xy^2, y^3, x^2, xy, y^2, x, y, 1.
///
/// cubic-20 is the full trivariate cubic in (x, y, i), coefficients A..T on
/// x^3, x^2y, x^2i, x^2, xy^2, xyi, xy, xi^2, xi, x, y^3, y^2i, y^2, yi^2,
/// yi, y, i^3, i^2, i, 1.
struct CubicParams {
  CubicVariant variant = CubicVariant::cubic10;
  std::vector<double> coeffs;

  /// Coefficients that reproduce the input exactly (J = 1, resp. S = 1).
  static CubicParams identity(CubicVariant variant);

  std::span<const double> channel(int c) const;
  /// Throws Error{invalid_argument} if coeffs.size() != 3 * coefficients_per_channel.
  void validate() const;

  friend bool operator==(const CubicParams&, const CubicParams&) = default;
};

/// Hard sign with sgn(0) = +1: returns 1 for inv_raw >= 0, else 0.
/// The gradient engine treats d(result)/d(inv_raw) as 1.
int binarize_inversion(double inv_raw) noexcept;

/// Unit graduated profile in [0, 1] for a fixed inversion bit.
/// Throws Error{degenerate_geometry} when cos(atan(slope)) underflows.
double graduated_profile(const GraduatedParams& p, int inversion, double x, double y);
double graduated_value(const GraduatedParams& p, int channel, double x, double y);
ScalarField graduated_field(const GraduatedParams& p, int width, int height, int channel);

/// Q(x, y) of the rotated ellipse; 1 on the boundary, 0 at the center.
double elliptical_quadric(const EllipticalParams& p, double x, double y) noexcept;
double elliptical_profile(const EllipticalParams& p, double x, double y) noexcept;
double elliptical_value(const EllipticalParams& p, int channel, double x, double y) noexcept;
ScalarField elliptical_field(const EllipticalParams& p, int width, int height, int channel);

/// d(output)/d(coefficient) for every coefficient of one channel at (x, y, i).
/// `out` must hold coefficients_per_channel(variant) values.
void cubic_basis(CubicVariant variant, double x, double y, double intensity,
                 std::span<double> out) noexcept;
double cubic_value(const CubicParams& p, int channel, double x, double y, double intensity);
Image cubic_apply(const CubicParams& p, const Image& image);

}  // namespace lpf
