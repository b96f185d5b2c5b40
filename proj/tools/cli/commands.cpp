#include "cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "lpf/error.hpp"
#include "lpf/image.hpp"
#include "lpf/metrics.hpp"
#include "lpf/optimizer.hpp"
#include "lpf/pipeline.hpp"
#include "lpf/stack_file.hpp"

namespace lpf::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension_mismatch: return kExitDimensionMismatch;
    case ErrorKind::non_finite: return kExitNonFinite;
    default: return kExitInputError;
  }
}

struct FitFlags {
  int steps = 2000;
  double lr = 1e-2;
  std::string variant = "cubic20";
  int n_graduated = 3;
  int n_elliptical = 3;
  double w_lab = 1.0;
  double w_msssim = 1e-3;
  std::uint64_t seed = 0;
  bool deterministic = false;
  int restarts = 1;
  int resize_long_edge = 0;

  FitConfig config() const {
    FitConfig cfg;
    cfg.steps = steps;
    cfg.learning_rate = lr;
    cfg.variant = parse_cubic_variant(variant);
    cfg.n_graduated = n_graduated;
    cfg.n_elliptical = n_elliptical;
    cfg.weights = {w_lab, w_msssim};
    cfg.seed = seed;
    cfg.deterministic = deterministic;
    cfg.restarts = restarts;
    cfg.validate();
    return cfg;
  }
};

void add_fit_flags(CLI::App& cmd, FitFlags& f) {
  cmd.add_option("--steps", f.steps, "Adam iterations")->capture_default_str();
  cmd.add_option("--lr", f.lr, "Learning rate")->capture_default_str();
  cmd.add_option("--variant", f.variant, "Cubic filter variant")
      ->check(CLI::IsMember({"cubic10", "cubic20"}))
      ->capture_default_str();
  cmd.add_option("--n-graduated", f.n_graduated, "Graduated filter instances")->capture_default_str();
  cmd.add_option("--n-elliptical", f.n_elliptical, "Elliptical filter instances")->capture_default_str();
  cmd.add_option("--w-lab", f.w_lab, "Weight of the CIELab L1 term")->capture_default_str();
  cmd.add_option("--w-msssim", f.w_msssim, "Weight of the MS-SSIM term")->capture_default_str();
  cmd.add_option("--seed", f.seed, "Initialization seed")->capture_default_str();
  cmd.add_flag("--deterministic", f.deterministic, "Zero wall-clock fields for byte-reproducible output");
  cmd.add_option("--restarts", f.restarts, "Seeded fits to run; the best is kept")->capture_default_str();
  cmd.add_option("--resize-long-edge", f.resize_long_edge,
                 "Resample inputs so the long edge has this many pixels (0 = off)")
      ->capture_default_str();
}

Image maybe_resize(Image img, int long_edge) {
  return long_edge > 0 ? resize_long_edge(img, long_edge) : img;
}

json metrics_json(double psnr_value, double ssim_value) {
  return {{"psnr", std::isinf(psnr_value) ? json("inf") : json(psnr_value)}, {"ssim", ssim_value}};
}

// ---- fit -------------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string target;
  std::string output = "fit";
  FitFlags flags;
};

int cmd_fit(const FitArgs& args) {
  const FitConfig cfg = args.flags.config();
  const Image input = maybe_resize(load_image(args.input), args.flags.resize_long_edge);
  const Image target = maybe_resize(load_image(args.target), args.flags.resize_long_edge);
  if (!input.same_shape(target)) {
    throw Error(ErrorKind::dimension_mismatch,
                "input is " + std::to_string(input.width()) + "x" + std::to_string(input.height()) +
                    " but target is " + std::to_string(target.width()) + "x" +
                    std::to_string(target.height()));
  }

  const FitReport report = fit_with_restarts(input, target, cfg);
  const Image best = render(report.best_params, input);
  const Image written = quantize(best);

  json doc = report_to_json(report, cfg);
  doc["best_quantized"] = metrics_json(psnr(written, target), ssim(written, target));
  doc["width"] = input.width();
  doc["height"] = input.height();

  const std::string prefix = args.output;
  save_stack_file(report.best_params, prefix + ".stack.json");
  write_json_file(doc, prefix + ".report.json");
  save_image(best, prefix + ".png");

  std::cerr << "fit: best loss " << report.best_loss << " at step " << report.best_step
            << ", PSNR " << report.best.psnr << " dB -> " << prefix << ".{stack.json,report.json,png}\n";
  if (report.aborted) {
    std::cerr << "fit: aborted: " << report.abort_reason << "\n";
    return kExitNonFinite;
  }
  return kExitOk;
}

// ---- apply -----------------------------------------------------------------

struct ApplyArgs {
  std::string stack;
  std::string input;
  std::string output = "applied.png";
  int resize_long_edge = 0;
};

int cmd_apply(const ApplyArgs& args) {
  const ParamVector params = load_stack_file(args.stack);
  const Image input = maybe_resize(load_image(args.input), args.resize_long_edge);
  save_image(render(params, input), args.output);
  return kExitOk;
}

// ---- heatmap ---------------------------------------------------------------

struct HeatmapArgs {
  std::string stack;
  int width = 256;
  int height = 256;
  std::string which = "combined";
  int channel = 0;
  std::string output = "heatmap.png";
};

int cmd_heatmap(const HeatmapArgs& args) {
  if (args.width < 1 || args.height < 1) {
    throw Error(ErrorKind::invalid_argument, "heatmap dimensions must be >= 1");
  }
  const FilterStack stack = to_filter_stack(load_stack_file(args.stack));
  ScalarField field;
  if (args.which == "graduated") {
    field = fused_graduated(stack.graduated, args.width, args.height, args.channel);
  } else if (args.which == "elliptical") {
    field = fused_elliptical(stack.elliptical, args.width, args.height, args.channel);
  } else if (args.which == "combined") {
    field = scaling_map(stack, args.width, args.height)[static_cast<std::size_t>(args.channel)];
  } else {
    throw Error(ErrorKind::invalid_argument, "unknown heatmap selection '" + args.which + "'");
  }
  const auto values = field.values();
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<unsigned char> bytes(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    bytes[i] = hi > lo ? static_cast<unsigned char>(std::lround((values[i] - lo) / (hi - lo) * 255.0))
                       : static_cast<unsigned char>(128);
  }
  save_gray_png(args.width, args.height, bytes, args.output);
  const json sidecar = {{"which", args.which}, {"channel", args.channel}, {"width", args.width},
                        {"height", args.height}, {"min", lo}, {"max", hi}};
  write_json_file(sidecar, args.output + ".json");
  return kExitOk;
}

// ---- eval-dir --------------------------------------------------------------

struct EvalArgs {
  std::string dir;
  std::string stack;
  std::string output;
  int jobs = 1;
  FitFlags flags;
};

struct EvalRow {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
  double loss = 0.0;
  int steps = 0;
  double seconds = 0.0;
  std::string error;
};

std::string format_number(double v, int precision) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_line(const EvalRow& r) {
  if (!r.error.empty()) {
    return csv_quote(r.id) + ",,,,,," + csv_quote(r.error);
  }
  return csv_quote(r.id) + "," + format_number(r.psnr, 6) + "," + format_number(r.ssim, 6) + "," +
         format_number(r.loss, 6) + "," + std::to_string(r.steps) + "," + format_number(r.seconds, 3) + ",";
}

std::vector<std::string> discover_pairs(const fs::path& dir) {
  static constexpr std::string_view kInput = "_input.png";
  if (!fs::is_directory(dir)) {
    throw Error(ErrorKind::io, "'" + dir.string() + "' is not a directory");
  }
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() <= kInput.size() || !name.ends_with(kInput)) continue;
    const std::string id = name.substr(0, name.size() - kInput.size());
    if (fs::exists(dir / (id + "_target.png"))) {
      ids.push_back(id);
    } else {
      std::cerr << "eval-dir: '" << name << "' has no matching _target.png; skipped\n";
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

EvalRow evaluate_pair(const fs::path& dir, const std::string& id, const FitConfig& cfg,
                      const std::optional<ParamVector>& stack, int resize) {
  EvalRow row;
  row.id = id;
  try {
    const Image input = maybe_resize(load_image(dir / (id + "_input.png")), resize);
    const Image target = maybe_resize(load_image(dir / (id + "_target.png")), resize);
    if (!input.same_shape(target)) {
      throw Error(ErrorKind::dimension_mismatch, "input and target dimensions differ");
    }
    Image output;
    if (stack) {
      output = render(*stack, input);
      row.steps = 0;
    } else {
      const FitReport report = fit_with_restarts(input, target, cfg);
      if (report.aborted) throw Error(ErrorKind::non_finite, report.abort_reason);
      output = render(report.best_params, input);
      row.steps = cfg.steps;
      row.seconds = report.seconds;
    }
    row.psnr = psnr(output, target);
    row.ssim = ssim(output, target, cfg.msssim);
    row.loss = deeplpf_loss(output, target, cfg.weights, cfg.msssim);
  } catch (const Error& e) {
    row.error = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return row;
}

int cmd_eval_dir(const EvalArgs& args) {
  const FitConfig cfg = args.flags.config();
  std::optional<ParamVector> stack;
  if (!args.stack.empty()) stack = load_stack_file(args.stack);
  const fs::path dir(args.dir);
  const std::vector<std::string> ids = discover_pairs(dir);
  if (ids.empty()) {
    throw Error(ErrorKind::io, "no <id>_input.png / <id>_target.png pairs in '" + args.dir + "'");
  }

  std::vector<EvalRow> rows(ids.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < ids.size(); i = next++) {
      rows[i] = evaluate_pair(dir, ids[i], cfg, stack, args.flags.resize_long_edge);
    }
  };
  const int jobs = std::clamp(args.jobs, 1, static_cast<int>(ids.size()));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  EvalRow mean;
  mean.id = "mean";
  int ok = 0;
  double steps = 0.0;
  for (const EvalRow& r : rows) {
    if (!r.error.empty()) continue;
    ++ok;
    mean.psnr += r.psnr;
    mean.ssim += r.ssim;
    mean.loss += r.loss;
    mean.seconds += r.seconds;
    steps += r.steps;
  }
  if (ok > 0) {
    mean.psnr /= ok;
    mean.ssim /= ok;
    mean.loss /= ok;
    mean.seconds /= ok;
    mean.steps = static_cast<int>(std::lround(steps / ok));
  } else {
    mean.error = "no successful pairs";
  }

  std::ostringstream csv;
  csv << kEvalCsvHeader << '\n';
  for (const EvalRow& r : rows) csv << csv_line(r) << '\n';
  csv << csv_line(mean) << '\n';
  if (args.output.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(args.output, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + args.output + "' for writing");
    out << csv.str();
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Local parametric image filters: fit, apply, visualize and evaluate", "lpf"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a filter stack mapping INPUT to TARGET");
  fit_cmd->add_option("input", fit_args.input, "Input PNG")->required();
  fit_cmd->add_option("target", fit_args.target, "Target PNG")->required();
  fit_cmd->add_option("-o,--output", fit_args.output,
                      "Output prefix: writes PREFIX.stack.json, PREFIX.report.json, PREFIX.png")
      ->capture_default_str();
  add_fit_flags(*fit_cmd, fit_args.flags);

  ApplyArgs apply_args;
  auto* apply_cmd = app.add_subcommand("apply", "Apply a stack file to an image");
  apply_cmd->add_option("stack", apply_args.stack, "Stack JSON")->required();
  apply_cmd->add_option("input", apply_args.input, "Input PNG")->required();
  apply_cmd->add_option("-o,--output", apply_args.output, "Output PNG")->capture_default_str();
  apply_cmd->add_option("--resize-long-edge", apply_args.resize_long_edge)->capture_default_str();

  HeatmapArgs heat_args;
  auto* heat_cmd = app.add_subcommand("heatmap", "Render a fused scaling map as a grayscale PNG");
  heat_cmd->add_option("stack", heat_args.stack, "Stack JSON")->required();
  heat_cmd->add_option("--width", heat_args.width)->capture_default_str();
  heat_cmd->add_option("--height", heat_args.height)->capture_default_str();
  heat_cmd->add_option("--which", heat_args.which)
      ->check(CLI::IsMember({"graduated", "elliptical", "combined"}))
      ->capture_default_str();
  heat_cmd->add_option("--channel", heat_args.channel, "0 = R, 1 = G, 2 = B")
      ->check(CLI::Range(0, 2))
      ->capture_default_str();
  heat_cmd->add_option("-o,--output", heat_args.output,
                       "Output PNG; the min/max sidecar is written to OUTPUT.json")
      ->capture_default_str();

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval-dir", "Fit (or apply --stack) every <id>_input/_target pair");
  eval_cmd->add_option("dir", eval_args.dir, "Directory of pairs")->required();
  eval_cmd->add_option("--stack", eval_args.stack, "Apply this stack instead of fitting");
  eval_cmd->add_option("--jobs", eval_args.jobs, "Pairs processed in parallel")->capture_default_str();
  eval_cmd->add_option("-o,--output", eval_args.output, "CSV path (default: stdout)");
  add_fit_flags(*eval_cmd, eval_args.flags);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit_args);
    if (*apply_cmd) return cmd_apply(apply_args);
    if (*heat_cmd) return cmd_heatmap(heat_args);
    if (*eval_cmd) return cmd_eval_dir(eval_args);
  } catch (const Error& e) {
    std::cerr << "lpf: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "lpf: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc));
}

}  // namespace lpf::cli
