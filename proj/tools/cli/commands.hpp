#pragma once

#include <string>
#include <vector>

namespace lpf::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;      // I/O, format, parse or validation failure
inline constexpr int kExitDimensionMismatch = 3;
inline constexpr int kExitNonFinite = 4;

/// Column order of eval-dir output; the header line is exactly this.
inline constexpr const char* kEvalCsvHeader = "id,psnr,ssim,loss,steps,seconds,error";

/// Entry point for `lpf fit | apply | heatmap | eval-dir`.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace lpf::cli
