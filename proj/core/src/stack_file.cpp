#include "lpf/stack_file.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "lpf/error.hpp"

namespace lpf {

using nlohmann::json;

namespace {

constexpr const char* kChannelKeys[3] = {"r", "g", "b"};

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorKind::format, "stack file: " + what);
}

double number(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    invalid(std::string("missing or non-numeric field '") + key + "'");
  }
  return it->get<double>();
}

ChannelScales scales(const json& obj) {
  const auto it = obj.find("scale");
  if (it == obj.end() || !it->is_array() || it->size() != 3) {
    invalid("'scale' must be an array of 3 numbers");
  }
  ChannelScales out{};
  for (std::size_t c = 0; c < 3; ++c) {
    if (!(*it)[c].is_number()) invalid("'scale' must be an array of 3 numbers");
    out[c] = (*it)[c].get<double>();
  }
  return out;
}

double length(const json& obj, const char* key, bool raw_units) {
  const double v = number(obj, key);
  if (raw_units) return v;
  if (!(v > kPositiveFloor)) {
    invalid(std::string("'") + key + "' must exceed " + std::to_string(kPositiveFloor));
  }
  return raw_from_positive(v);
}

}  // namespace

json stack_to_json(const ParamVector& params) {
  const FilterStack stack = to_filter_stack(params);
  json doc;
  doc["version"] = kStackFileVersion;
  doc["units"] = "raw";
  doc["variant"] = std::string(to_string(stack.cubic.variant));
  json cubic = json::object();
  for (int c = 0; c < 3; ++c) {
    const auto k = stack.cubic.channel(c);
    cubic[kChannelKeys[c]] = std::vector<double>(k.begin(), k.end());
  }
  doc["cubic"] = cubic;
  doc["graduated"] = json::array();
  for (const auto& g : stack.graduated) {
    doc["graduated"].push_back({{"scale", g.scale},
                                {"slope", g.slope},
                                {"intercept", g.intercept},
                                {"offset_top", g.offset_top_raw},
                                {"offset_bottom", g.offset_bottom_raw},
                                {"inv", g.inv_raw}});
  }
  doc["elliptical"] = json::array();
  for (const auto& e : stack.elliptical) {
    doc["elliptical"].push_back({{"scale", e.scale},
                                 {"center_x", e.center_x},
                                 {"center_y", e.center_y},
                                 {"angle", e.angle},
                                 {"semi_major", e.semi_major_raw},
                                 {"semi_minor", e.semi_minor_raw}});
  }
  return doc;
}

ParamVector stack_from_json(const json& doc) {
  if (!doc.is_object()) invalid("document must be a JSON object");
  const auto version = doc.find("version");
  if (version == doc.end() || !version->is_number_integer()) invalid("missing integer 'version'");
  if (version->get<int>() != kStackFileVersion) {
    invalid("unsupported version " + version->dump() + " (expected " +
            std::to_string(kStackFileVersion) + ")");
  }
  bool raw_units = true;
  if (const auto units = doc.find("units"); units != doc.end()) {
    if (*units == "raw") {
      raw_units = true;
    } else if (*units == "natural") {
      raw_units = false;
    } else {
      invalid("'units' must be \"raw\" or \"natural\"");
    }
  }
  const auto variant_it = doc.find("variant");
  if (variant_it == doc.end() || !variant_it->is_string()) invalid("missing string 'variant'");
  FilterStack stack;
  try {
    stack.cubic.variant = parse_cubic_variant(variant_it->get<std::string>());
  } catch (const Error& e) {
    invalid(e.what());
  }
  const int per = coefficients_per_channel(stack.cubic.variant);
  stack.cubic.coeffs.clear();
  const auto cubic = doc.find("cubic");
  if (cubic == doc.end() || !cubic->is_object()) invalid("missing object 'cubic'");
  for (const char* key : kChannelKeys) {
    const auto ch = cubic->find(key);
    if (ch == cubic->end() || !ch->is_array()) invalid(std::string("missing cubic channel '") + key + "'");
    if (static_cast<int>(ch->size()) != per) {
      invalid(std::string(to_string(stack.cubic.variant)) + " channel '" + key + "' has " +
              std::to_string(ch->size()) + " coefficients, expected " + std::to_string(per) +
              " (coefficient count mismatch)");
    }
    for (const auto& v : *ch) {
      if (!v.is_number()) invalid("cubic coefficients must be numbers");
      stack.cubic.coeffs.push_back(v.get<double>());
    }
  }
  if (const auto grads = doc.find("graduated"); grads != doc.end()) {
    if (!grads->is_array()) invalid("'graduated' must be an array");
    for (const auto& g : *grads) {
      if (!g.is_object()) invalid("graduated entries must be objects");
      stack.graduated.push_back(GraduatedParams{scales(g), number(g, "slope"), number(g, "intercept"),
                                                length(g, "offset_top", raw_units),
                                                length(g, "offset_bottom", raw_units), number(g, "inv")});
    }
  }
  if (const auto ells = doc.find("elliptical"); ells != doc.end()) {
    if (!ells->is_array()) invalid("'elliptical' must be an array");
    for (const auto& e : *ells) {
      if (!e.is_object()) invalid("elliptical entries must be objects");
      stack.elliptical.push_back(EllipticalParams{scales(e), number(e, "center_x"), number(e, "center_y"),
                                                  number(e, "angle"), length(e, "semi_major", raw_units),
                                                  length(e, "semi_minor", raw_units)});
    }
  }
  return to_param_vector(stack);
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::io, "failed to write '" + path.string() + "'");
}

void save_stack_file(const ParamVector& params, const std::filesystem::path& path) {
  write_json_file(stack_to_json(params), path);
}

ParamVector load_stack_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open stack file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, "stack file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return stack_from_json(doc);
}

json report_to_json(const FitReport& report, const FitConfig& cfg) {
  const auto metrics = [](const QualityMetrics& m) {
    // JSON has no infinity; identical images report psnr as the string "inf".
    json psnr_value = std::isinf(m.psnr) ? json("inf") : json(m.psnr);
    return json{{"psnr", psnr_value}, {"ssim", m.ssim}};
  };
  json doc;
  doc["config"] = {{"steps", cfg.steps},
                   {"learning_rate", cfg.learning_rate},
                   {"beta1", cfg.beta1},
                   {"beta2", cfg.beta2},
                   {"epsilon", cfg.epsilon},
                   {"w_lab", cfg.weights.w_lab},
                   {"w_msssim", cfg.weights.w_msssim},
                   {"variant", std::string(to_string(cfg.variant))},
                   {"n_graduated", cfg.n_graduated},
                   {"n_elliptical", cfg.n_elliptical},
                   {"seed", cfg.seed},
                   {"restarts", cfg.restarts},
                   {"deterministic", cfg.deterministic}};
  doc["seed"] = report.seed;
  doc["steps"] = report.steps;
  doc["best_step"] = report.best_step;
  doc["best_loss"] = report.best_loss;
  doc["initial"] = metrics(report.initial);
  doc["final"] = metrics(report.final);
  doc["best"] = metrics(report.best);
  doc["seconds"] = report.seconds;
  doc["aborted"] = report.aborted;
  if (report.aborted) doc["abort_reason"] = report.abort_reason;
  doc["loss_trace"] = report.loss_trace;
  doc["best_params"] = report.best_params.values;
  return doc;
}

}  // namespace lpf
