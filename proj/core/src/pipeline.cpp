#include "lpf/pipeline.hpp"

#include <algorithm>

#include "lpf/error.hpp"

namespace lpf {

ScalarField fuse_same_type(std::span<const ScalarField> fields) {
  if (fields.empty()) {
    throw Error(ErrorKind::invalid_argument, "fuse_same_type: empty field list");
  }
  ScalarField out = fields.front();
  for (const ScalarField& f : fields.subspan(1)) {
    if (!f.same_shape(out)) {
      throw Error(ErrorKind::dimension_mismatch, "fuse_same_type: field dimensions differ");
    }
    auto dst = out.values();
    const auto src = f.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] *= src[i];
    }
  }
  return out;
}

ScalarField combine_branches(const ScalarField& graduated, const ScalarField& elliptical) {
  if (!graduated.same_shape(elliptical)) {
    throw Error(ErrorKind::dimension_mismatch, "combine_branches: field dimensions differ");
  }
  ScalarField out = graduated;
  auto dst = out.values();
  const auto src = elliptical.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] += src[i];
  }
  return out;
}

ScalarField fused_graduated(std::span<const GraduatedParams> filters, int width, int height,
                            int channel) {
  if (filters.empty()) {
    return ScalarField(width, height, 0.0);
  }
  std::vector<ScalarField> fields;
  fields.reserve(filters.size());
  for (const auto& p : filters) {
    fields.push_back(graduated_field(p, width, height, channel));
  }
  return fuse_same_type(fields);
}

ScalarField fused_elliptical(std::span<const EllipticalParams> filters, int width, int height,
                             int channel) {
  if (filters.empty()) {
    return ScalarField(width, height, 0.0);
  }
  std::vector<ScalarField> fields;
  fields.reserve(filters.size());
  for (const auto& p : filters) {
    fields.push_back(elliptical_field(p, width, height, channel));
  }
  return fuse_same_type(fields);
}

ChannelFields scaling_map(const FilterStack& stack, int width, int height) {
  ChannelFields out;
  for (int c = 0; c < 3; ++c) {
    out[static_cast<std::size_t>(c)] =
        combine_branches(fused_graduated(stack.graduated, width, height, c),
                         fused_elliptical(stack.elliptical, width, height, c));
  }
  return out;
}

PipelineOutput pipeline_forward(const FilterStack& stack, const Image& input) {
  PipelineOutput out;
  out.y1 = input;
  out.y2 = cubic_apply(stack.cubic, out.y1);
  out.s_map = scaling_map(stack, input.width(), input.height());
  out.y3 = Image(input.width(), input.height());
  out.y_final = Image(input.width(), input.height());
  for (int row = 0; row < input.height(); ++row) {
    for (int col = 0; col < input.width(); ++col) {
      for (int c = 0; c < 3; ++c) {
        const double s = out.s_map[static_cast<std::size_t>(c)].at(col, row);
        const double y3 = s * out.y2.at(col, row, c);
        out.y3.at(col, row, c) = y3;
        out.y_final.at(col, row, c) = std::clamp(out.y1.at(col, row, c) + y3, 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace lpf
