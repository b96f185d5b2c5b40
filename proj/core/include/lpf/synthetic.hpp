#pragma once

#include <cstdint>

#include "lpf/image.hpp"

namespace lpf {

/// Deterministic photo-like scene (sky gradient, horizon, soft blobs, mild
/// texture), snapped to the 8-bit grid. Used by tests, benchmarks and demos.
Image synthetic_photo(int width, int height, std::uint64_t seed);

}  // namespace lpf
