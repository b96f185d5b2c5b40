#pragma once

#include <array>
#include <span>
#include <vector>

#include "lpf/filters.hpp"
#include "lpf/image.hpp"

namespace lpf {

struct FilterStack {
  CubicParams cubic = CubicParams::identity(CubicVariant::cubic10);
  std::vector<GraduatedParams> graduated;
  std::vector<EllipticalParams> elliptical;

  friend bool operator==(const FilterStack&, const FilterStack&) = default;
};

using ChannelFields = std::array<ScalarField, 3>;

struct PipelineOutput {
  Image y1;            // backbone output (identity: the input itself)
  Image y2;            // after the cubic filter
  ChannelFields s_map; // fused graduated + elliptical scaling map
  Image y3;            // s_map * y2
  Image y_final;       // clamp(y1 + y3, 0, 1)
};

/// Elementwise product of same-shaped fields. Throws on an empty list or
/// mismatched dimensions.
ScalarField fuse_same_type(std::span<const ScalarField> fields);

/// Elementwise sum of the graduated and elliptical branches.
ScalarField combine_branches(const ScalarField& graduated, const ScalarField& elliptical);

/// Fused graduated map for one channel; all-zero when `filters` is empty.
ScalarField fused_graduated(std::span<const GraduatedParams> filters, int width, int height,
                            int channel);
ScalarField fused_elliptical(std::span<const EllipticalParams> filters, int width, int height,
                             int channel);

/// Scaling map S for all three channels.
ChannelFields scaling_map(const FilterStack& stack, int width, int height);

PipelineOutput pipeline_forward(const FilterStack& stack, const Image& input);

}  // namespace lpf
