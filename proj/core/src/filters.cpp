#include "lpf/filters.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lpf/error.hpp"

namespace lpf {

double positive_from_raw(double raw) noexcept {
  const double softplus = raw > 0.0 ? raw + std::log1p(std::exp(-raw)) : std::log1p(std::exp(raw));
  return softplus + kPositiveFloor;
}

double positive_from_raw_derivative(double raw) noexcept {
  if (raw >= 0.0) {
    return 1.0 / (1.0 + std::exp(-raw));
  }
  const double e = std::exp(raw);
  return e / (1.0 + e);
}

double raw_from_positive(double value) {
  const double softplus = value - kPositiveFloor;
  if (!(softplus > 0.0) || !std::isfinite(softplus)) {
    throw Error(ErrorKind::invalid_argument,
                "positive parameter must exceed " + std::to_string(kPositiveFloor));
  }
  // log(exp(s) - 1), rearranged for large s.
  return softplus > 30.0 ? softplus + std::log(-std::expm1(-softplus)) : std::log(std::expm1(softplus));
}

GraduatedParams GraduatedParams::from_natural(const ChannelScales& scale, double slope,
                                              double intercept, double offset_top,
                                              double offset_bottom, double inv_raw) {
  return GraduatedParams{scale, slope, intercept, raw_from_positive(offset_top),
                         raw_from_positive(offset_bottom), inv_raw};
}

EllipticalParams EllipticalParams::from_natural(const ChannelScales& scale, double center_x,
                                                double center_y, double angle,
                                                double semi_major, double semi_minor) {
  return EllipticalParams{scale, center_x, center_y, angle, raw_from_positive(semi_major),
                          raw_from_positive(semi_minor)};
}

int coefficients_per_channel(CubicVariant variant) noexcept {
  return variant == CubicVariant::cubic10 ? 10 : 20;
}

std::string_view to_string(CubicVariant variant) noexcept {
  return variant == CubicVariant::cubic10 ? "cubic10" : "cubic20";
}

CubicVariant parse_cubic_variant(std::string_view text) {
  if (text == "cubic10" || text == "cubic-10") return CubicVariant::cubic10;
  if (text == "cubic20" || text == "cubic-20") return CubicVariant::cubic20;
  throw Error(ErrorKind::invalid_argument, "unknown cubic variant '" + std::string(text) + "'");
}

CubicParams CubicParams::identity(CubicVariant variant) {
  const int n = coefficients_per_channel(variant);
  CubicParams p{variant, std::vector<double>(static_cast<std::size_t>(3 * n), 0.0)};
  // J (constant multiplier of i) for cubic-10, S (linear i term) for cubic-20.
  const int unit = variant == CubicVariant::cubic10 ? 9 : 18;
  for (int c = 0; c < 3; ++c) {
    p.coeffs[static_cast<std::size_t>(c * n + unit)] = 1.0;
  }
  return p;
}

std::span<const double> CubicParams::channel(int c) const {
  const auto n = static_cast<std::size_t>(coefficients_per_channel(variant));
  return std::span<const double>(coeffs).subspan(static_cast<std::size_t>(c) * n, n);
}

void CubicParams::validate() const {
  const std::size_t expected = 3 * static_cast<std::size_t>(coefficients_per_channel(variant));
  if (coeffs.size() != expected) {
    throw Error(ErrorKind::invalid_argument,
                std::string(to_string(variant)) + " expects " + std::to_string(expected) +
                    " coefficients, got " + std::to_string(coeffs.size()));
  }
}

int binarize_inversion(double inv_raw) noexcept { return inv_raw >= 0.0 ? 1 : 0; }

namespace {

double checked_cos_alpha(double slope) {
  const double cos_alpha = std::cos(std::atan(slope));
  if (!(std::abs(cos_alpha) >= 1e-12)) {
    throw Error(ErrorKind::degenerate_geometry, "graduated filter slope is (near) vertical");
  }
  return cos_alpha;
}

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::invalid_argument, "field dimensions must be >= 1");
  }
}

void check_channel(int channel) {
  if (channel < 0 || channel > 2) {
    throw Error(ErrorKind::invalid_argument, "channel must be 0, 1 or 2");
  }
}

// Clamp form shared by both orientations: the signed distance is mirrored
// for inversion 0 and the offset on the 100% side is always offset_bottom.
double graduated_profile_impl(double line_dist, int inversion, double d_top, double d_bottom) {
  const double signed_dist = inversion == 1 ? line_dist : -line_dist;
  const double d = signed_dist >= 0.0 ? d_bottom : d_top;
  return std::clamp(0.5 * (1.0 + signed_dist / d), 0.0, 1.0);
}

}  // namespace

double graduated_profile(const GraduatedParams& p, int inversion, double x, double y) {
  const double cos_alpha = checked_cos_alpha(p.slope);
  const double line_dist = y - (p.slope * x + p.intercept);
  return graduated_profile_impl(line_dist, inversion, p.offset_top() * cos_alpha,
                                p.offset_bottom() * cos_alpha);
}

double graduated_value(const GraduatedParams& p, int channel, double x, double y) {
  check_channel(channel);
  return p.scale[static_cast<std::size_t>(channel)] *
         graduated_profile(p, binarize_inversion(p.inv_raw), x, y);
}

ScalarField graduated_field(const GraduatedParams& p, int width, int height, int channel) {
  check_dims(width, height);
  check_channel(channel);
  const double cos_alpha = checked_cos_alpha(p.slope);
  const double d_top = p.offset_top() * cos_alpha;
  const double d_bottom = p.offset_bottom() * cos_alpha;
  const int inversion = binarize_inversion(p.inv_raw);
  const double scale = p.scale[static_cast<std::size_t>(channel)];
  const NormalizedCoords coords(width, height);
  ScalarField field(width, height);
  for (int row = 0; row < height; ++row) {
    const double y = coords.y(row);
    for (int col = 0; col < width; ++col) {
      const double line_dist = y - (p.slope * coords.x(col) + p.intercept);
      field.at(col, row) = scale * graduated_profile_impl(line_dist, inversion, d_top, d_bottom);
    }
  }
  return field;
}

double elliptical_quadric(const EllipticalParams& p, double x, double y) noexcept {
  const double a = p.semi_major();
  const double b = p.semi_minor();
  const double c = std::cos(p.angle);
  const double s = std::sin(p.angle);
  const double dx = x - p.center_x;
  const double dy = y - p.center_y;
  const double along = dx * c + dy * s;
  const double across = dx * s - dy * c;
  return along * along / (a * a) + across * across / (b * b);
}

double elliptical_profile(const EllipticalParams& p, double x, double y) noexcept {
  return std::max(0.0, 1.0 - elliptical_quadric(p, x, y));
}

double elliptical_value(const EllipticalParams& p, int channel, double x, double y) noexcept {
  return p.scale[static_cast<std::size_t>(channel)] * elliptical_profile(p, x, y);
}

ScalarField elliptical_field(const EllipticalParams& p, int width, int height, int channel) {
  check_dims(width, height);
  check_channel(channel);
  const NormalizedCoords coords(width, height);
  ScalarField field(width, height);
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      field.at(col, row) = elliptical_value(p, channel, coords.x(col), coords.y(row));
    }
  }
  return field;
}

void cubic_basis(CubicVariant variant, double x, double y, double i,
                 std::span<double> out) noexcept {
  const double xx = x * x;
  const double yy = y * y;
  if (variant == CubicVariant::cubic10) {
    const double mono[10] = {xx * x, xx * y, x * yy, yy * y, xx, x * y, yy, x, y, 1.0};
    for (int k = 0; k < 10; ++k) {
      out[static_cast<std::size_t>(k)] = i * mono[k];
    }
    return;
  }
  const double ii = i * i;
  const double mono[20] = {
      xx * x, xx * y, xx * i, xx,     x * yy, x * y * i, x * y, x * ii, x * i, x,
      yy * y, yy * i, yy,     y * ii, y * i,  y,         ii * i, ii,    i,     1.0,
  };
  std::copy(std::begin(mono), std::end(mono), out.begin());
}

namespace {

double cubic10_poly(std::span<const double> k, double x, double y) noexcept {
  const double xx = x * x;
  const double yy = y * y;
  return k[0] * xx * x + k[1] * xx * y + k[2] * x * yy + k[3] * yy * y + k[4] * xx +
         k[5] * x * y + k[6] * yy + k[7] * x + k[8] * y + k[9];
}

double cubic20_poly(std::span<const double> k, double x, double y, double i) noexcept {
  const double xx = x * x;
  const double yy = y * y;
  const double ii = i * i;
  return k[0] * xx * x + k[1] * xx * y + k[2] * xx * i + k[3] * xx + k[4] * x * yy +
         k[5] * x * y * i + k[6] * x * y + k[7] * x * ii + k[8] * x * i + k[9] * x +
         k[10] * yy * y + k[11] * yy * i + k[12] * yy + k[13] * y * ii + k[14] * y * i +
         k[15] * y + k[16] * ii * i + k[17] * ii + k[18] * i + k[19];
}

}  // namespace

double cubic_value(const CubicParams& p, int channel, double x, double y, double intensity) {
  const auto k = p.channel(channel);
  return p.variant == CubicVariant::cubic10 ? intensity * cubic10_poly(k, x, y)
                                            : cubic20_poly(k, x, y, intensity);
}

Image cubic_apply(const CubicParams& p, const Image& image) {
  p.validate();
  const NormalizedCoords coords(image.width(), image.height());
  Image out(image.width(), image.height());
  for (int row = 0; row < image.height(); ++row) {
    const double y = coords.y(row);
    for (int col = 0; col < image.width(); ++col) {
      const double x = coords.x(col);
      for (int c = 0; c < 3; ++c) {
        out.at(col, row, c) = cubic_value(p, c, x, y, image.at(col, row, c));
      }
    }
  }
  return out;
}

}  // namespace lpf
