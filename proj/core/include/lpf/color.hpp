#pragma once

#include <array>

#include "lpf/image.hpp"

namespace lpf {

/// CIE L*a*b* raster (D65 white, 2 degree observer). Same layout as Image:
/// channel 0 is L* in [0, 100], channels 1 and 2 are a* and b*.
struct LabImage {
  Image lab;

  int width() const noexcept { return lab.width(); }
  int height() const noexcept { return lab.height(); }
};

using Rgb = std::array<double, 3>;
using Lab = std::array<double, 3>;

/// sRGB (IEC 61966-2-1) -> CIELab for one pixel; input is clamped to [0, 1].
Lab srgb_to_lab(const Rgb& rgb) noexcept;

/// CIELab -> sRGB for one pixel; out-of-gamut results are clamped.
Rgb lab_to_srgb(const Lab& lab) noexcept;

/// Vector-Jacobian product of srgb_to_lab at `rgb`: returns dLoss/dRGB given
/// dLoss/dLab. Inside [0, 1] (boundaries included) the input clamp passes the
/// gradient through; outside it is zero.
Rgb srgb_to_lab_backward(const Rgb& rgb, const Lab& grad_lab) noexcept;

LabImage rgb_to_lab(const Image& image);
Image lab_to_rgb(const LabImage& image);

}  // namespace lpf
