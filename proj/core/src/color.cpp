#include "lpf/color.hpp"

#include <algorithm>
#include <cmath>

namespace lpf {
namespace {

// Linear sRGB -> XYZ (D65). The reference white is the row sum, so any gray
// maps to a* = b* = 0 up to rounding.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
struct Matrix3 {
  double m[3][3];
};

constexpr Matrix3 invert(const double (&a)[3][3]) {
  const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                     a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                     a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  Matrix3 inv{};
  inv.m[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
  inv.m[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
  inv.m[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
  inv.m[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
  inv.m[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
  inv.m[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
  inv.m[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
  inv.m[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
  inv.m[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
  return inv;
}

constexpr Matrix3 kXyzToRgbM = invert(kRgbToXyz);
constexpr const auto& kXyzToRgb = kXyzToRgbM.m;
constexpr double kWhite[3] = {
    kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
    kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
    kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2],
};

constexpr double kDelta = 6.0 / 29.0;
constexpr double kDelta3 = kDelta * kDelta * kDelta;

double srgb_decode(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double srgb_decode_derivative(double v) {
  return v <= 0.04045 ? 1.0 / 12.92 : 2.4 / 1.055 * std::pow((v + 0.055) / 1.055, 1.4);
}

double srgb_encode(double v) {
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
  return t > kDelta3 ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_derivative(double t) {
  if (t > kDelta3) {
    const double c = std::cbrt(t);
    return 1.0 / (3.0 * c * c);
  }
  return 1.0 / (3.0 * kDelta * kDelta);
}

double lab_f_inverse(double f) {
  return f > kDelta ? f * f * f : 3.0 * kDelta * kDelta * (f - 4.0 / 29.0);
}

}  // namespace

Lab srgb_to_lab(const Rgb& rgb) noexcept {
  double lin[3];
  for (int k = 0; k < 3; ++k) {
    lin[k] = srgb_decode(std::clamp(rgb[k], 0.0, 1.0));
  }
  double f[3];
  for (int i = 0; i < 3; ++i) {
    const double xyz = kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] + kRgbToXyz[i][2] * lin[2];
    f[i] = lab_f(xyz / kWhite[i]);
  }
  return {116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])};
}

Rgb srgb_to_lab_backward(const Rgb& rgb, const Lab& grad_lab) noexcept {
  double clamped[3];
  double lin[3];
  for (int k = 0; k < 3; ++k) {
    clamped[k] = std::clamp(rgb[k], 0.0, 1.0);
    lin[k] = srgb_decode(clamped[k]);
  }
  const double grad_f[3] = {
      500.0 * grad_lab[1],
      116.0 * grad_lab[0] - 500.0 * grad_lab[1] + 200.0 * grad_lab[2],
      -200.0 * grad_lab[2],
  };
  double grad_xyz[3];
  for (int i = 0; i < 3; ++i) {
    const double xyz = kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] + kRgbToXyz[i][2] * lin[2];
    grad_xyz[i] = grad_f[i] * lab_f_derivative(xyz / kWhite[i]) / kWhite[i];
  }
  Rgb out{};
  for (int k = 0; k < 3; ++k) {
    if (rgb[k] < 0.0 || rgb[k] > 1.0) {
      out[k] = 0.0;
      continue;
    }
    const double grad_lin =
        kRgbToXyz[0][k] * grad_xyz[0] + kRgbToXyz[1][k] * grad_xyz[1] + kRgbToXyz[2][k] * grad_xyz[2];
    out[k] = grad_lin * srgb_decode_derivative(clamped[k]);
  }
  return out;
}

Rgb lab_to_srgb(const Lab& lab) noexcept {
  const double fy = (lab[0] + 16.0) / 116.0;
  const double f[3] = {fy + lab[1] / 500.0, fy, fy - lab[2] / 200.0};
  double xyz[3];
  for (int i = 0; i < 3; ++i) {
    xyz[i] = lab_f_inverse(f[i]) * kWhite[i];
  }
  Rgb out{};
  for (int k = 0; k < 3; ++k) {
    const double lin = kXyzToRgb[k][0] * xyz[0] + kXyzToRgb[k][1] * xyz[1] + kXyzToRgb[k][2] * xyz[2];
    out[k] = std::clamp(srgb_encode(std::clamp(lin, 0.0, 1.0)), 0.0, 1.0);
  }
  return out;
}

LabImage rgb_to_lab(const Image& image) {
  Image out(image.width(), image.height());
  const auto src = image.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const Lab lab = srgb_to_lab({src[i], src[i + 1], src[i + 2]});
    dst[i] = lab[0];
    dst[i + 1] = lab[1];
    dst[i + 2] = lab[2];
  }
  return LabImage{std::move(out)};
}

Image lab_to_rgb(const LabImage& image) {
  Image out(image.width(), image.height());
  const auto src = image.lab.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const Rgb rgb = lab_to_srgb({src[i], src[i + 1], src[i + 2]});
    dst[i] = rgb[0];
    dst[i + 1] = rgb[1];
    dst[i + 2] = rgb[2];
  }
  return out;
}

}  // namespace lpf
