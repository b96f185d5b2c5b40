#include "lpf/metrics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lpf/error.hpp"

namespace lpf {

void LossWeights::validate() const {
  if (!std::isfinite(w_lab) || !std::isfinite(w_msssim) || w_lab < 0.0 || w_msssim < 0.0) {
    throw Error(ErrorKind::invalid_argument, "loss weights must be finite and non-negative");
  }
}

void MsssimConfig::validate() const {
  if (scales < 1 || static_cast<std::size_t>(scales) > weights.size()) {
    throw Error(ErrorKind::invalid_argument, "MS-SSIM scale count must be in [1, weights.size()]");
  }
  for (int j = 0; j < scales; ++j) {
    if (!(weights[static_cast<std::size_t>(j)] > 0.0)) {
      throw Error(ErrorKind::invalid_argument, "MS-SSIM weights must be positive");
    }
  }
  if (window < 3 || window % 2 == 0 || !(sigma > 0.0) || !(dynamic_range > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "MS-SSIM window must be odd >= 3 with sigma > 0");
  }
}

MsssimPlan plan_msssim(int width, int height, const MsssimConfig& cfg) {
  cfg.validate();
  MsssimPlan plan;
  const int min_dim = std::min(width, height);
  plan.window = cfg.window;
  if (min_dim < plan.window) {
    plan.window = min_dim % 2 == 1 ? min_dim : min_dim - 1;
    plan.reduced = true;
  }
  if (plan.window < 3) {
    throw Error(ErrorKind::image_too_small,
                "image of " + std::to_string(width) + "x" + std::to_string(height) +
                    " is smaller than the minimum SSIM window");
  }
  plan.scales = 1;
  int w = width;
  int h = height;
  while (plan.scales < cfg.scales) {
    w /= 2;
    h /= 2;
    if (std::min(w, h) < plan.window) break;
    ++plan.scales;
  }
  if (plan.scales < cfg.scales) plan.reduced = true;
  plan.weights.assign(cfg.weights.begin(), cfg.weights.begin() + plan.scales);
  const double total = std::accumulate(plan.weights.begin(), plan.weights.end(), 0.0);
  for (double& v : plan.weights) v /= total;
  return plan;
}

namespace {

void check_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(ErrorKind::dimension_mismatch,
                std::string(what) + ": image dimensions differ (" + std::to_string(a.width()) +
                    "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()) + ")");
  }
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const double center = (size - 1) / 2.0;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double r = i - center;
    k[static_cast<std::size_t>(i)] = std::exp(-(r * r) / (2.0 * sigma * sigma));
    total += k[static_cast<std::size_t>(i)];
  }
  for (double& v : k) v /= total;
  return k;
}

// Separable "valid" correlation: output is (W - n + 1) x (H - n + 1).
ScalarField filter_valid(const ScalarField& in, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = in.width() - n + 1;
  const int oh = in.height() - n + 1;
  ScalarField horiz(ow, in.height());
  for (int r = 0; r < in.height(); ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int t = 0; t < n; ++t) acc += k[static_cast<std::size_t>(t)] * in.at(c + t, r);
      horiz.at(c, r) = acc;
    }
  }
  ScalarField out(ow, oh);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int t = 0; t < n; ++t) acc += k[static_cast<std::size_t>(t)] * horiz.at(c, r + t);
      out.at(c, r) = acc;
    }
  }
  return out;
}

// Adjoint of filter_valid: scatters a (W - n + 1) x (H - n + 1) gradient back
// onto the W x H input grid.
ScalarField filter_valid_adjoint(const ScalarField& grad, const std::vector<double>& k,
                                 int width, int height) {
  const int n = static_cast<int>(k.size());
  ScalarField horiz(grad.width(), height, 0.0);
  for (int r = 0; r < grad.height(); ++r) {
    for (int c = 0; c < grad.width(); ++c) {
      const double g = grad.at(c, r);
      for (int t = 0; t < n; ++t) horiz.at(c, r + t) += k[static_cast<std::size_t>(t)] * g;
    }
  }
  ScalarField out(width, height, 0.0);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < grad.width(); ++c) {
      const double g = horiz.at(c, r);
      for (int t = 0; t < n; ++t) out.at(c + t, r) += k[static_cast<std::size_t>(t)] * g;
    }
  }
  return out;
}

ScalarField elementwise_product(const ScalarField& a, const ScalarField& b) {
  ScalarField out = a;
  auto dst = out.values();
  const auto src = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= src[i];
  return out;
}

ScalarField downsample2(const ScalarField& in) {
  const int w = in.width() / 2;
  const int h = in.height() / 2;
  ScalarField out(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      out.at(c, r) = 0.25 * (in.at(2 * c, 2 * r) + in.at(2 * c, 2 * r + 1) +
                             in.at(2 * c + 1, 2 * r) + in.at(2 * c + 1, 2 * r + 1));
    }
  }
  return out;
}

void downsample2_adjoint(const ScalarField& grad, ScalarField& into) {
  for (int r = 0; r < grad.height(); ++r) {
    for (int c = 0; c < grad.width(); ++c) {
      const double g = 0.25 * grad.at(c, r);
      into.at(2 * c, 2 * r) += g;
      into.at(2 * c, 2 * r + 1) += g;
      into.at(2 * c + 1, 2 * r) += g;
      into.at(2 * c + 1, 2 * r + 1) += g;
    }
  }
}

struct SsimScale {
  ScalarField mu_x, mu_y, var_x, var_y, cov;
  double mean_ssim = 0.0;
  double mean_cs = 0.0;
};

SsimScale ssim_scale(const ScalarField& x, const ScalarField& y, const std::vector<double>& k,
                     double c1, double c2) {
  SsimScale s;
  s.mu_x = filter_valid(x, k);
  s.mu_y = filter_valid(y, k);
  s.var_x = filter_valid(elementwise_product(x, x), k);
  s.var_y = filter_valid(elementwise_product(y, y), k);
  s.cov = filter_valid(elementwise_product(x, y), k);
  const std::size_t n = s.mu_x.size();
  auto mx = s.mu_x.values();
  auto my = s.mu_y.values();
  auto vx = s.var_x.values();
  auto vy = s.var_y.values();
  auto cv = s.cov.values();
  double sum_ssim = 0.0;
  double sum_cs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    vx[i] -= mx[i] * mx[i];
    vy[i] -= my[i] * my[i];
    cv[i] -= mx[i] * my[i];
    const double lum = (2.0 * mx[i] * my[i] + c1) / (mx[i] * mx[i] + my[i] * my[i] + c1);
    const double cs = (2.0 * cv[i] + c2) / (vx[i] + vy[i] + c2);
    sum_ssim += lum * cs;
    sum_cs += cs;
  }
  s.mean_ssim = sum_ssim / static_cast<double>(n);
  s.mean_cs = sum_cs / static_cast<double>(n);
  return s;
}

// d(g_ssim * mean_ssim + g_cs * mean_cs)/dx for the scale statistics in `s`.
ScalarField ssim_scale_backward(const SsimScale& s, const ScalarField& x, const ScalarField& y,
                                const std::vector<double>& k, double c1, double c2,
                                double g_ssim, double g_cs) {
  const std::size_t n = s.mu_x.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  ScalarField g_mu(s.mu_x.width(), s.mu_x.height());
  ScalarField g_sq(s.mu_x.width(), s.mu_x.height());
  ScalarField g_xy(s.mu_x.width(), s.mu_x.height());
  const auto mx = s.mu_x.values();
  const auto my = s.mu_y.values();
  const auto vx = s.var_x.values();
  const auto vy = s.var_y.values();
  const auto cv = s.cov.values();
  auto gm = g_mu.values();
  auto gs = g_sq.values();
  auto gc = g_xy.values();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * mx[i] * my[i] + c1;
    const double b = mx[i] * mx[i] + my[i] * my[i] + c1;
    const double lum = a / b;
    const double num = 2.0 * cv[i] + c2;
    const double den = vx[i] + vy[i] + c2;
    const double cs = num / den;
    const double dlum_dmx = 2.0 * my[i] / b - a * 2.0 * mx[i] / (b * b);
    const double dcs_dvx = -num / (den * den);
    const double dcs_dcov = 2.0 / den;
    const double g_cs_total = (g_ssim * lum + g_cs) * inv_n;
    const double g_vx = g_cs_total * dcs_dvx;
    const double g_cov = g_cs_total * dcs_dcov;
    // var_x = E[x^2] - mu_x^2 and cov = E[xy] - mu_x mu_y.
    gm[i] = g_ssim * cs * dlum_dmx * inv_n - 2.0 * mx[i] * g_vx - my[i] * g_cov;
    gs[i] = g_vx;
    gc[i] = g_cov;
  }
  ScalarField out = filter_valid_adjoint(g_mu, k, x.width(), x.height());
  const ScalarField back_sq = filter_valid_adjoint(g_sq, k, x.width(), x.height());
  const ScalarField back_xy = filter_valid_adjoint(g_xy, k, x.width(), x.height());
  auto o = out.values();
  const auto bs = back_sq.values();
  const auto bx = back_xy.values();
  const auto xv = x.values();
  const auto yv = y.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] += 2.0 * xv[i] * bs[i] + yv[i] * bx[i];
  }
  return out;
}

// MS-SSIM of two planes; with `grad_x` set, also writes dMS-SSIM/dx.
double msssim_planes(const ScalarField& x, const ScalarField& y, const MsssimPlan& plan,
                     const MsssimConfig& cfg, ScalarField* grad_x) {
  const auto kernel = gaussian_kernel(plan.window, cfg.sigma);
  const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
  const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);
  const int m = plan.scales;

  std::vector<ScalarField> xs{x};
  std::vector<ScalarField> ys{y};
  std::vector<SsimScale> stats;
  std::vector<double> terms(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    if (j > 0) {
      xs.push_back(downsample2(xs.back()));
      ys.push_back(downsample2(ys.back()));
    }
    stats.push_back(ssim_scale(xs.back(), ys.back(), kernel, c1, c2));
    const double raw = j == m - 1 ? stats.back().mean_ssim : stats.back().mean_cs;
    terms[static_cast<std::size_t>(j)] = std::max(raw, 0.0);
  }
  double value = 1.0;
  for (int j = 0; j < m; ++j) {
    value *= std::pow(terms[static_cast<std::size_t>(j)], plan.weights[static_cast<std::size_t>(j)]);
  }
  if (grad_x == nullptr) {
    return value;
  }

  ScalarField carry;
  for (int j = m - 1; j >= 0; --j) {
    const auto uj = static_cast<std::size_t>(j);
    double d_term = 0.0;
    if (terms[uj] > 0.0) {
      d_term = plan.weights[uj] * std::pow(terms[uj], plan.weights[uj] - 1.0);
      for (int i = 0; i < m; ++i) {
        if (i != j) {
          d_term *= std::pow(terms[static_cast<std::size_t>(i)],
                             plan.weights[static_cast<std::size_t>(i)]);
        }
      }
    }
    const double g_ssim = j == m - 1 ? d_term : 0.0;
    const double g_cs = j == m - 1 ? 0.0 : d_term;
    ScalarField g = ssim_scale_backward(stats[uj], xs[uj], ys[uj], kernel, c1, c2, g_ssim, g_cs);
    if (j < m - 1) {
      downsample2_adjoint(carry, g);
    }
    carry = std::move(g);
  }
  *grad_x = std::move(carry);
  return value;
}

ScalarField l_plane(const LabImage& lab) {
  ScalarField out(lab.width(), lab.height());
  for (int r = 0; r < lab.height(); ++r) {
    for (int c = 0; c < lab.width(); ++c) out.at(c, r) = lab.lab.at(c, r, 0);
  }
  return out;
}

ScalarField channel_plane(const Image& image, int channel) {
  ScalarField out(image.width(), image.height());
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) out.at(c, r) = image.at(c, r, channel);
  }
  return out;
}

double l1_between(const LabImage& a, const LabImage& b) {
  const auto av = a.lab.data();
  const auto bv = b.lab.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) sum += std::abs(av[i] - bv[i]);
  return sum / static_cast<double>(av.size());
}

}  // namespace

double l1_lab(const Image& pred, const Image& target) {
  check_same_shape(pred, target, "l1_lab");
  return l1_between(rgb_to_lab(pred), rgb_to_lab(target));
}

double msssim_l(const Image& pred, const Image& target, const MsssimConfig& cfg) {
  check_same_shape(pred, target, "msssim_l");
  const MsssimPlan plan = plan_msssim(pred.width(), pred.height(), cfg);
  return msssim_planes(l_plane(rgb_to_lab(pred)), l_plane(rgb_to_lab(target)), plan, cfg, nullptr);
}

double deeplpf_loss(const Image& pred, const Image& target, const LossWeights& w,
                    const MsssimConfig& cfg) {
  check_same_shape(pred, target, "deeplpf_loss");
  return LossEvaluator(target, w, cfg).loss(pred);
}

double psnr(const Image& pred, const Image& target) {
  check_same_shape(pred, target, "psnr");
  const auto a = pred.data();
  const auto b = target.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.size());
  if (mse == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& pred, const Image& target, const MsssimConfig& cfg) {
  check_same_shape(pred, target, "ssim");
  MsssimConfig single = cfg;
  single.scales = 1;
  single.weights = {1.0};
  single.dynamic_range = 1.0;
  const MsssimPlan plan = plan_msssim(pred.width(), pred.height(), single);
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    total += msssim_planes(channel_plane(pred, c), channel_plane(target, c), plan, single, nullptr);
  }
  return total / 3.0;
}

LossEvaluator::LossEvaluator(const Image& target, const LossWeights& weights,
                             const MsssimConfig& cfg)
    : weights_(weights), cfg_(cfg), width_(target.width()), height_(target.height()),
      target_lab_(rgb_to_lab(target)) {
  weights_.validate();
  if (weights_.w_msssim != 0.0) {
    plan_ = plan_msssim(width_, height_, cfg_);
    target_l_ = l_plane(target_lab_);
  }
}

double LossEvaluator::loss(const Image& pred) const { return evaluate(pred, nullptr); }

double LossEvaluator::loss_and_grad(const Image& pred, Image& grad_pred) const {
  return evaluate(pred, &grad_pred);
}

double LossEvaluator::evaluate(const Image& pred, Image* grad_pred) const {
  if (pred.width() != width_ || pred.height() != height_) {
    throw Error(ErrorKind::dimension_mismatch, "loss: prediction and target dimensions differ");
  }
  const LabImage pred_lab = rgb_to_lab(pred);
  const double l1 = l1_between(pred_lab, target_lab_);
  double loss = weights_.w_lab * l1;
  double similarity = 1.0;
  ScalarField grad_l;
  if (weights_.w_msssim != 0.0) {
    similarity = msssim_planes(l_plane(pred_lab), target_l_, plan_, cfg_,
                               grad_pred != nullptr ? &grad_l : nullptr);
    loss += weights_.w_msssim * (1.0 - similarity);
  }
  if (grad_pred == nullptr) {
    return loss;
  }

  *grad_pred = Image(width_, height_);
  const auto pv = pred.data();
  const auto plab = pred_lab.lab.data();
  const auto tlab = target_lab_.lab.data();
  auto gv = grad_pred->data();
  const double l1_scale = weights_.w_lab / static_cast<double>(plab.size());
  const auto sign = [](double d) { return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0); };
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      const std::size_t i = (static_cast<std::size_t>(r) * static_cast<std::size_t>(width_) +
                             static_cast<std::size_t>(c)) * 3;
      Lab g_lab{l1_scale * sign(plab[i] - tlab[i]), l1_scale * sign(plab[i + 1] - tlab[i + 1]),
                l1_scale * sign(plab[i + 2] - tlab[i + 2])};
      if (weights_.w_msssim != 0.0) {
        g_lab[0] -= weights_.w_msssim * grad_l.at(c, r);
      }
      const Rgb g = srgb_to_lab_backward({pv[i], pv[i + 1], pv[i + 2]}, g_lab);
      gv[i] = g[0];
      gv[i + 1] = g[1];
      gv[i + 2] = g[2];
    }
  }
  return loss;
}

}  // namespace lpf
