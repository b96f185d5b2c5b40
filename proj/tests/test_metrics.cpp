#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "lpf/color.hpp"
#include "lpf/error.hpp"
#include "lpf/metrics.hpp"
#include "support/seeded.hpp"

using namespace lpf;
using lpf::testing::add_noise;
using lpf::testing::blended_pair;
using lpf::testing::gradient_image;
using lpf::testing::grid_noise;

namespace {

// Frozen outputs of oracles/reference_values.py.
// scikit-image structural_similarity, Gaussian window sigma 1.5, population
// covariance, data_range 1, channel-averaged.
constexpr double kReferenceSsim = 0.9222604270134558;
// Independent NumPy/SciPy MS-SSIM on L*, four scales at 128x128.
constexpr double kReferenceMsssim = 0.9947042227735589;

Image crop(const Image& img, int x0, int y0, int w, int h) {
  Image out(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < 3; ++ch) out.at(c, r, ch) = img.at(x0 + c, y0 + r, ch);
    }
  }
  return out;
}

/// Moves the content by (dx, dy) inside a larger canvas filled with `pad`.
Image translate(const Image& img, int dx, int dy, double pad) {
  Image out(img.width() + dx, img.height() + dy, pad);
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      for (int ch = 0; ch < 3; ++ch) out.at(c + dx, r + dy, ch) = img.at(c, r, ch);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("weights validation") {
  CHECK_NOTHROW(LossWeights{}.validate());
  CHECK_THROWS_AS((LossWeights{-1.0, 0.0}.validate()), Error);
  CHECK_THROWS_AS((LossWeights{1.0, std::numeric_limits<double>::quiet_NaN()}.validate()), Error);
}

TEST_CASE("MS-SSIM plan reduces scales and renormalizes weights") {
  const MsssimPlan full = plan_msssim(256, 256, {});
  CHECK(full.scales == 5);
  CHECK_FALSE(full.reduced);
  double sum = 0.0;
  for (double w : full.weights) sum += w;
  CHECK(std::abs(sum - 1.0) < 1e-12);

  const MsssimPlan four = plan_msssim(128, 128, {});
  CHECK(four.scales == 4);
  CHECK(four.reduced);
  CHECK(four.window == 11);

  const MsssimPlan tiny = plan_msssim(8, 6, {});
  CHECK(tiny.scales == 1);
  CHECK(tiny.window == 5);
  CHECK_THROWS_AS(plan_msssim(2, 9, {}), Error);
}

TEST_CASE("L1 in Lab") {
  const Image img = grid_noise(7, 5, 1);
  CHECK(l1_lab(img, img) == 0.0);
  CHECK(l1_lab(Image(1, 1, 1.0), Image(1, 1, 0.0)) == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
  const Image other = grid_noise(7, 5, 2);
  CHECK(l1_lab(img, other) == l1_lab(other, img));
  CHECK_THROWS_AS(l1_lab(img, Image(5, 7)), Error);
}

TEST_CASE("L1 commutes with cropping") {
  const Image a = grid_noise(20, 16, 3);
  const Image b = grid_noise(20, 16, 4);
  const LabImage la = rgb_to_lab(a);
  const LabImage lb = rgb_to_lab(b);
  double sum = 0.0;
  for (int r = 4; r < 14; ++r) {
    for (int c = 3; c < 15; ++c) {
      for (int ch = 0; ch < 3; ++ch) sum += std::abs(la.lab.at(c, r, ch) - lb.lab.at(c, r, ch));
    }
  }
  const double crop_then_compare = l1_lab(crop(a, 3, 4, 12, 10), crop(b, 3, 4, 12, 10));
  CHECK(crop_then_compare == doctest::Approx(sum / (12 * 10 * 3)).epsilon(1e-13));
}

TEST_CASE("MS-SSIM self-similarity") {
  const Image img = grid_noise(64, 48, 9);
  CHECK(std::abs(msssim_l(img, img) - 1.0) < 1e-9);
  CHECK(std::abs(msssim_l(Image(40, 40, 0.3), Image(40, 40, 0.3)) - 1.0) < 1e-9);
}

TEST_CASE("MS-SSIM on a noisy gradient matches the reference") {
  const Image clean = gradient_image(128, 128);
  const Image noisy = add_noise(clean, 0.01, 5);
  const double v = msssim_l(noisy, clean);
  CHECK(v > 0.9);
  CHECK(v < 1.0);
  CHECK(std::abs(v - kReferenceMsssim) < 1e-9);
}

TEST_CASE("MS-SSIM and SSIM are symmetric") {
  const auto [a, b] = blended_pair(48, 40, 21);
  CHECK(std::abs(msssim_l(a, b) - msssim_l(b, a)) < 1e-12);
  CHECK(std::abs(ssim(a, b) - ssim(b, a)) < 1e-12);
}

TEST_CASE("MS-SSIM rejects unusable sizes") {
  CHECK_THROWS_AS(msssim_l(Image(2, 2), Image(2, 2)), Error);
  CHECK_THROWS_AS(msssim_l(Image(16, 16), Image(16, 12)), Error);
  try {
    msssim_l(Image(2, 30), Image(2, 30));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::image_too_small);
  }
}

TEST_CASE("combined loss") {
  const auto [a, b] = blended_pair(32, 32, 2);
  CHECK(deeplpf_loss(a, a) == 0.0);
  CHECK(deeplpf_loss(a, b, {2.0, 0.0}) == 2.0 * l1_lab(a, b));
  const double hand = 1.0 * l1_lab(a, b) + 1e-3 * (1.0 - msssim_l(a, b));
  CHECK(deeplpf_loss(a, b, {1.0, 1e-3}) == doctest::Approx(hand).epsilon(1e-15));
  CHECK(deeplpf_loss(a, b) >= 0.0);
}

TEST_CASE("loss evaluator agrees with the free function bit for bit") {
  const auto [a, b] = blended_pair(24, 20, 8);
  const LossWeights w{1.0, 0.5};
  const LossEvaluator eval(b, w, {});
  Image grad;
  CHECK(eval.loss(a) == deeplpf_loss(a, b, w));
  CHECK(eval.loss_and_grad(a, grad) == deeplpf_loss(a, b, w));
  CHECK(grad.same_shape(a));
}

TEST_CASE("PSNR closed forms") {
  const Image zero(8, 8, 0.0);
  CHECK(std::isinf(psnr(zero, zero)));
  CHECK(std::abs(psnr(zero, Image(8, 8, 0.1)) - 20.0) < 1e-6);
  CHECK(std::abs(psnr(zero, Image(8, 8, 0.5)) - 6.0206) < 1e-4);
  CHECK(std::abs(psnr(zero, Image(8, 8, 0.5)) - 10.0 * std::log10(4.0)) < 1e-12);
}

TEST_CASE("PSNR decreases as noise grows") {
  const Image clean = gradient_image(64, 64);
  double previous = std::numeric_limits<double>::infinity();
  for (double sigma : {0.005, 0.01, 0.02, 0.04, 0.08}) {
    const double value = psnr(add_noise(clean, sigma, 77), clean);
    CHECK(value < previous);
    previous = value;
  }
}

TEST_CASE("SSIM matches the reference implementation") {
  const auto [a, b] = blended_pair(64, 64, 11);
  CHECK(std::abs(ssim(a, b) - kReferenceSsim) < 1e-6);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  Image inverted = a;
  for (double& v : inverted.data()) v = 1.0 - v;
  CHECK(ssim(inverted, a) < 1.0);
}

TEST_CASE("SSIM is translation invariant on the interior") {
  const auto [a, b] = blended_pair(40, 36, 31);
  const Image ta = translate(a, 5, 3, 0.9);
  const Image tb = translate(b, 5, 3, 0.1);
  const double direct = ssim(crop(a, 4, 4, 30, 26), crop(b, 4, 4, 30, 26));
  const double shifted = ssim(crop(ta, 9, 7, 30, 26), crop(tb, 9, 7, 30, 26));
  CHECK(direct == shifted);
}
