#include "lpf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lpf {

Image synthetic_photo(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double horizon = 0.35 + 0.3 * unit(rng);
  const double tilt = 0.2 * (unit(rng) - 0.5);
  double sky_top[3], sky_low[3], ground[3];
  for (int c = 0; c < 3; ++c) {
    sky_top[c] = 0.15 + 0.25 * unit(rng);
    sky_low[c] = 0.35 + 0.25 * unit(rng);
    ground[c] = 0.1 + 0.3 * unit(rng);
  }
  sky_top[2] += 0.15;

  struct Blob { double x, y, r, tint[3]; };
  Blob blobs[4];
  for (Blob& b : blobs) {
    b.x = unit(rng);
    b.y = unit(rng);
    b.r = 0.08 + 0.15 * unit(rng);
    for (double& t : b.tint) t = 0.3 * (unit(rng) - 0.4);
  }
  const double fx = 6.0 + 10.0 * unit(rng);
  const double fy = 6.0 + 10.0 * unit(rng);

  const NormalizedCoords coords(width, height);
  Image img(width, height);
  for (int row = 0; row < height; ++row) {
    const double y = coords.y(row);
    for (int col = 0; col < width; ++col) {
      const double x = coords.x(col);
      const double line = horizon + tilt * (x - 0.5);
      const double sky_w = 1.0 / (1.0 + std::exp((y - line) * 40.0));
      for (int c = 0; c < 3; ++c) {
        const double t = std::clamp(y / std::max(line, 1e-3), 0.0, 1.0);
        const double sky = sky_top[c] + (sky_low[c] - sky_top[c]) * t;
        const double texture = 0.03 * std::sin(fx * x * 6.28318 + c) * std::cos(fy * y * 6.28318);
        double v = sky_w * sky + (1.0 - sky_w) * (ground[c] + texture);
        for (const Blob& b : blobs) {
          const double d2 = ((x - b.x) * (x - b.x) + (y - b.y) * (y - b.y)) / (b.r * b.r);
          v += b.tint[c] * std::exp(-d2);
        }
        img.at(col, row, c) = std::clamp(v, 0.02, 0.9);
      }
    }
  }
  return quantize(img);
}

}  // namespace lpf
