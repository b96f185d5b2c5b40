#include "lpf/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "lpf/error.hpp"

namespace lpf {

bool StackLayout::is_binary(std::size_t index) const noexcept {
  if (index < graduated_offset(0) || index >= elliptical_offset(0)) return false;
  return (index - graduated_offset(0)) % kGraduatedSize == kInv;
}

std::string StackLayout::slot_name(std::size_t index) const {
  static constexpr const char* kGraduatedNames[] = {
      "scale_r", "scale_g", "scale_b", "slope", "intercept", "offset_top_raw", "offset_bottom_raw", "inv_raw"};
  static constexpr const char* kEllipticalNames[] = {
      "scale_r", "scale_g", "scale_b", "center_x", "center_y", "angle", "semi_major_raw", "semi_minor_raw"};
  if (index < cubic_size()) {
    const auto per = static_cast<std::size_t>(coefficients_per_channel(variant));
    const char channel = "rgb"[index / per];
    return std::string("cubic.") + channel + "[" + std::to_string(index % per) + "]";
  }
  if (index < elliptical_offset(0)) {
    const std::size_t rel = index - graduated_offset(0);
    return "graduated[" + std::to_string(rel / kGraduatedSize) + "]." + kGraduatedNames[rel % kGraduatedSize];
  }
  if (index < size()) {
    const std::size_t rel = index - elliptical_offset(0);
    return "elliptical[" + std::to_string(rel / kEllipticalSize) + "]." + kEllipticalNames[rel % kEllipticalSize];
  }
  return "out-of-range";
}

StackLayout StackLayout::of(const FilterStack& stack) noexcept {
  return StackLayout{stack.cubic.variant, static_cast<int>(stack.graduated.size()),
                     static_cast<int>(stack.elliptical.size())};
}

ParamVector to_param_vector(const FilterStack& stack) {
  stack.cubic.validate();
  ParamVector out{StackLayout::of(stack), {}};
  out.values.reserve(out.layout.size());
  out.values.insert(out.values.end(), stack.cubic.coeffs.begin(), stack.cubic.coeffs.end());
  for (const auto& g : stack.graduated) {
    out.values.insert(out.values.end(), {g.scale[0], g.scale[1], g.scale[2], g.slope, g.intercept,
                                         g.offset_top_raw, g.offset_bottom_raw, g.inv_raw});
  }
  for (const auto& e : stack.elliptical) {
    out.values.insert(out.values.end(), {e.scale[0], e.scale[1], e.scale[2], e.center_x, e.center_y,
                                         e.angle, e.semi_major_raw, e.semi_minor_raw});
  }
  return out;
}

FilterStack to_filter_stack(const ParamVector& params) {
  const StackLayout& layout = params.layout;
  if (params.values.size() != layout.size()) {
    throw Error(ErrorKind::invalid_argument, "parameter vector length does not match its layout");
  }
  const auto& v = params.values;
  FilterStack stack;
  stack.cubic.variant = layout.variant;
  stack.cubic.coeffs.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(layout.cubic_size()));
  for (int j = 0; j < layout.n_graduated; ++j) {
    const double* p = v.data() + layout.graduated_offset(j);
    stack.graduated.push_back(GraduatedParams{{p[0], p[1], p[2]}, p[3], p[4], p[5], p[6], p[7]});
  }
  for (int j = 0; j < layout.n_elliptical; ++j) {
    const double* p = v.data() + layout.elliptical_offset(j);
    stack.elliptical.push_back(EllipticalParams{{p[0], p[1], p[2]}, p[3], p[4], p[5], p[6], p[7]});
  }
  return stack;
}

namespace {

// Per-pixel state of one graduated instance.
struct GraduatedLocal {
  double profile = 0.0;       // active orientation
  double flip_delta = 0.0;    // profile(inversion 1) - profile(inversion 0)
  double d_slope = 0.0;
  double d_intercept = 0.0;
  double d_top_raw = 0.0;
  double d_bottom_raw = 0.0;
};

struct GraduatedGeometry {
  int inversion;
  double slope_term;  // slope / (1 + slope^2)
  double d_top, d_bottom, o_top, o_bottom, sig_top, sig_bottom;
};

GraduatedGeometry graduated_geometry(const GraduatedParams& p) {
  const double cos_alpha = std::cos(std::atan(p.slope));
  if (!(std::abs(cos_alpha) >= 1e-12)) {
    throw Error(ErrorKind::degenerate_geometry, "graduated filter slope is (near) vertical");
  }
  GraduatedGeometry g{};
  g.inversion = binarize_inversion(p.inv_raw);
  g.slope_term = p.slope / (1.0 + p.slope * p.slope);
  g.o_top = p.offset_top();
  g.o_bottom = p.offset_bottom();
  g.d_top = g.o_top * cos_alpha;
  g.d_bottom = g.o_bottom * cos_alpha;
  g.sig_top = positive_from_raw_derivative(p.offset_top_raw);
  g.sig_bottom = positive_from_raw_derivative(p.offset_bottom_raw);
  return g;
}

double clamp_profile(double line_dist, int inversion, const GraduatedGeometry& g) {
  const double signed_dist = inversion == 1 ? line_dist : -line_dist;
  const double d = signed_dist >= 0.0 ? g.d_bottom : g.d_top;
  return std::clamp(0.5 * (1.0 + signed_dist / d), 0.0, 1.0);
}

GraduatedLocal graduated_local(const GraduatedParams& p, const GraduatedGeometry& g, double x,
                               double y) {
  GraduatedLocal out;
  const double line_dist = y - (p.slope * x + p.intercept);
  out.profile = clamp_profile(line_dist, g.inversion, g);
  out.flip_delta = clamp_profile(line_dist, 1, g) - clamp_profile(line_dist, 0, g);

  const double sigma = g.inversion == 1 ? 1.0 : -1.0;
  const double signed_dist = sigma * line_dist;
  const bool bottom_side = signed_dist >= 0.0;
  const double d = bottom_side ? g.d_bottom : g.d_top;
  const double t = signed_dist / d;
  const double unclamped = 0.5 * (1.0 + t);
  if (unclamped < 0.0 || unclamped > 1.0) {
    return out;
  }
  out.d_slope = 0.5 * (-sigma * x / d + t * g.slope_term);
  out.d_intercept = 0.5 * (-sigma / d);
  if (bottom_side) {
    out.d_bottom_raw = 0.5 * (-t / g.o_bottom) * g.sig_bottom;
  } else {
    out.d_top_raw = 0.5 * (-t / g.o_top) * g.sig_top;
  }
  return out;
}

struct EllipticalLocal {
  double profile = 0.0;
  double d_cx = 0.0;
  double d_cy = 0.0;
  double d_angle = 0.0;
  double d_major_raw = 0.0;
  double d_minor_raw = 0.0;
};

EllipticalLocal elliptical_local(const EllipticalParams& p, double a, double b, double cos_t,
                                 double sin_t, double sig_a, double sig_b, double x, double y) {
  EllipticalLocal out;
  const double dx = x - p.center_x;
  const double dy = y - p.center_y;
  const double along = dx * cos_t + dy * sin_t;
  const double across = dx * sin_t - dy * cos_t;
  const double q = along * along / (a * a) + across * across / (b * b);
  out.profile = std::max(0.0, 1.0 - q);
  if (q > 1.0) {
    return out;
  }
  const double pa = 2.0 * along / (a * a);
  const double pb = 2.0 * across / (b * b);
  // d(profile) = -dQ.
  out.d_cx = pa * cos_t + pb * sin_t;
  out.d_cy = pa * sin_t - pb * cos_t;
  out.d_angle = -2.0 * along * across * (1.0 / (b * b) - 1.0 / (a * a));
  out.d_major_raw = 2.0 * along * along / (a * a * a) * sig_a;
  out.d_minor_raw = 2.0 * across * across / (b * b * b) * sig_b;
  return out;
}

// Products of all factors except index j, for each j.
void exclusive_products(std::span<const double> factors, std::span<double> out) {
  const std::size_t n = factors.size();
  double prefix = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = prefix;
    prefix *= factors[j];
  }
  double suffix = 1.0;
  for (std::size_t j = n; j-- > 0;) {
    out[j] *= suffix;
    suffix *= factors[j];
  }
}

}  // namespace

double evaluate_loss(const ParamVector& params, const Image& input, const LossEvaluator& evaluator) {
  return evaluator.loss(pipeline_forward(to_filter_stack(params), input).y_final);
}

LossAndGrad loss_and_grad(const ParamVector& params, const Image& input, const Image& target,
                          const LossWeights& weights, const MsssimConfig& cfg) {
  return loss_and_grad(params, input, LossEvaluator(target, weights, cfg));
}

LossAndGrad loss_and_grad(const ParamVector& params, const Image& input,
                          const LossEvaluator& evaluator) {
  const FilterStack stack = to_filter_stack(params);
  const StackLayout& layout = params.layout;
  const PipelineOutput fwd = pipeline_forward(stack, input);

  LossAndGrad result;
  Image grad_out;
  result.loss = evaluator.loss_and_grad(fwd.y_final, grad_out);
  result.grad = GradVector{layout, std::vector<double>(layout.size(), 0.0)};
  auto& grad = result.grad.values;

  const int width = input.width();
  const int height = input.height();
  const NormalizedCoords coords(width, height);
  const int per = coefficients_per_channel(layout.variant);
  const auto ng = static_cast<std::size_t>(layout.n_graduated);
  const auto ne = static_cast<std::size_t>(layout.n_elliptical);

  std::vector<GraduatedGeometry> grad_geo;
  for (const auto& g : stack.graduated) grad_geo.push_back(graduated_geometry(g));
  struct EllipseConst { double a, b, cos_t, sin_t, sig_a, sig_b; };
  std::vector<EllipseConst> ell_geo;
  for (const auto& e : stack.elliptical) {
    ell_geo.push_back({e.semi_major(), e.semi_minor(), std::cos(e.angle), std::sin(e.angle),
                       positive_from_raw_derivative(e.semi_major_raw),
                       positive_from_raw_derivative(e.semi_minor_raw)});
  }

  std::vector<double> basis(static_cast<std::size_t>(per));
  std::vector<GraduatedLocal> gl(ng);
  std::vector<EllipticalLocal> el(ne);
  std::vector<double> factors(std::max(ng, ne));
  std::vector<double> excl(std::max(ng, ne));
  std::vector<double> g_profile_g(ng);
  std::vector<double> g_profile_e(ne);

  for (int row = 0; row < height; ++row) {
    const double y = coords.y(row);
    for (int col = 0; col < width; ++col) {
      const double x = coords.x(col);
      double g_s[3];
      bool any = false;
      for (int c = 0; c < 3; ++c) {
        const double pre = fwd.y1.at(col, row, c) + fwd.y3.at(col, row, c);
        const double g_pre = (pre >= 0.0 && pre <= 1.0) ? grad_out.at(col, row, c) : 0.0;
        g_s[c] = g_pre * fwd.y2.at(col, row, c);
        const double g_y2 = g_pre * fwd.s_map[static_cast<std::size_t>(c)].at(col, row);
        if (g_pre != 0.0) any = true;
        if (g_y2 != 0.0) {
          cubic_basis(layout.variant, x, y, fwd.y1.at(col, row, c), basis);
          double* gc = grad.data() + static_cast<std::size_t>(c * per);
          for (int k = 0; k < per; ++k) gc[k] += g_y2 * basis[static_cast<std::size_t>(k)];
        }
      }
      if (!any) continue;

      if (ng > 0) {
        for (std::size_t j = 0; j < ng; ++j) {
          gl[j] = graduated_local(stack.graduated[j], grad_geo[j], x, y);
          g_profile_g[j] = 0.0;
        }
        for (int c = 0; c < 3; ++c) {
          const auto uc = static_cast<std::size_t>(c);
          for (std::size_t j = 0; j < ng; ++j) factors[j] = stack.graduated[j].scale[uc] * gl[j].profile;
          exclusive_products(std::span(factors).first(ng), std::span(excl).first(ng));
          for (std::size_t j = 0; j < ng; ++j) {
            const double upstream = g_s[c] * excl[j];
            grad[layout.graduated_offset(static_cast<int>(j)) + uc] += upstream * gl[j].profile;
            g_profile_g[j] += upstream * stack.graduated[j].scale[uc];
          }
        }
        for (std::size_t j = 0; j < ng; ++j) {
          double* gp = grad.data() + layout.graduated_offset(static_cast<int>(j));
          const double g = g_profile_g[j];
          gp[StackLayout::kSlope] += g * gl[j].d_slope;
          gp[StackLayout::kIntercept] += g * gl[j].d_intercept;
          gp[StackLayout::kOffsetTop] += g * gl[j].d_top_raw;
          gp[StackLayout::kOffsetBottom] += g * gl[j].d_bottom_raw;
          gp[StackLayout::kInv] += g * gl[j].flip_delta;
        }
      }

      if (ne > 0) {
        for (std::size_t j = 0; j < ne; ++j) {
          const EllipseConst& k = ell_geo[j];
          el[j] = elliptical_local(stack.elliptical[j], k.a, k.b, k.cos_t, k.sin_t, k.sig_a, k.sig_b, x, y);
          g_profile_e[j] = 0.0;
        }
        for (int c = 0; c < 3; ++c) {
          const auto uc = static_cast<std::size_t>(c);
          for (std::size_t j = 0; j < ne; ++j) factors[j] = stack.elliptical[j].scale[uc] * el[j].profile;
          exclusive_products(std::span(factors).first(ne), std::span(excl).first(ne));
          for (std::size_t j = 0; j < ne; ++j) {
            const double upstream = g_s[c] * excl[j];
            grad[layout.elliptical_offset(static_cast<int>(j)) + uc] += upstream * el[j].profile;
            g_profile_e[j] += upstream * stack.elliptical[j].scale[uc];
          }
        }
        for (std::size_t j = 0; j < ne; ++j) {
          double* gp = grad.data() + layout.elliptical_offset(static_cast<int>(j));
          const double g = g_profile_e[j];
          gp[StackLayout::kCenterX] += g * el[j].d_cx;
          gp[StackLayout::kCenterY] += g * el[j].d_cy;
          gp[StackLayout::kAngle] += g * el[j].d_angle;
          gp[StackLayout::kSemiMajor] += g * el[j].d_major_raw;
          gp[StackLayout::kSemiMinor] += g * el[j].d_minor_raw;
        }
      }
    }
  }

  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw Error(ErrorKind::non_finite, "non-finite gradient at " + layout.slot_name(i));
    }
  }
  return result;
}

std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double epsilon,
                                       std::span<const bool> skip) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "finite-difference step must be positive");
  }
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> out(x.size(), kSkippedGradient);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!skip.empty() && skip[i]) continue;
    point[i] = x[i] + epsilon;
    const double up = f(point);
    point[i] = x[i] - epsilon;
    const double down = f(point);
    point[i] = x[i];
    out[i] = (up - down) / (2.0 * epsilon);
  }
  return out;
}

GradVector finite_diff_grad(const ParamVector& params, const Image& input, const Image& target,
                            const LossWeights& weights, const MsssimConfig& cfg, double epsilon) {
  const LossEvaluator evaluator(target, weights, cfg);
  const StackLayout layout = params.layout;
  auto skip = std::make_unique<bool[]>(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) skip[i] = layout.is_binary(i);
  const auto f = [&](std::span<const double> v) {
    return evaluate_loss(ParamVector{layout, std::vector<double>(v.begin(), v.end())}, input, evaluator);
  };
  return GradVector{layout, central_difference(f, params.values, epsilon,
                                               std::span<const bool>(skip.get(), layout.size()))};
}

}  // namespace lpf
