#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "doctest.h"
#include "lpf/error.hpp"
#include "lpf/stack_file.hpp"
#include "support/configs.hpp"
#include "support/temp_dir.hpp"

using namespace lpf;
using nlohmann::json;

namespace {

ErrorKind kind_of(const json& doc) {
  try {
    stack_from_json(doc);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected stack_from_json to throw");
  return ErrorKind::io;
}

}  // namespace

TEST_CASE("stack files round trip bit-exactly") {
  lpf::testing::TempDir dir;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto variant = seed % 2 ? CubicVariant::cubic10 : CubicVariant::cubic20;
    ParamVector params = lpf::testing::random_gradient_case(seed, variant, 4).params;
    params.values.back() = 0.1 + 0.2;  // not representable in short decimal form
    const auto path = dir.path() / "stack.json";
    save_stack_file(params, path);
    const ParamVector back = load_stack_file(path);
    CHECK(back.layout == params.layout);
    CHECK(back.values == params.values);
  }
}

TEST_CASE("empty branches serialize as empty arrays") {
  FilterStack stack;
  stack.cubic = CubicParams::identity(CubicVariant::cubic20);
  const json doc = stack_to_json(to_param_vector(stack));
  CHECK(doc["version"] == kStackFileVersion);
  CHECK(doc["units"] == "raw");
  CHECK(doc["variant"] == "cubic20");
  CHECK(doc["graduated"].empty());
  CHECK(doc["elliptical"].empty());
  CHECK(doc["cubic"]["g"].size() == 20);
  CHECK(to_filter_stack(stack_from_json(doc)) == stack);
}

TEST_CASE("natural units are converted through the softplus inverse") {
  json doc = {{"version", 1},
              {"units", "natural"},
              {"variant", "cubic-10"},
              {"cubic", {{"r", std::vector<double>(10, 0.0)}, {"g", std::vector<double>(10, 0.0)},
                         {"b", std::vector<double>(10, 0.0)}}},
              {"graduated", {{{"scale", {0.1, 0.2, 0.3}}, {"slope", 0.0}, {"intercept", 0.5},
                              {"offset_top", 0.25}, {"offset_bottom", 0.4}, {"inv", -1.0}}}},
              {"elliptical", {{{"scale", {1, 1, 1}}, {"center_x", 0.5}, {"center_y", 0.4},
                               {"angle", 0.3}, {"semi_major", 0.6}, {"semi_minor", 0.2}}}}};
  const FilterStack s = to_filter_stack(stack_from_json(doc));
  CHECK(s.graduated.at(0).offset_top() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(s.graduated.at(0).offset_bottom() == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(s.elliptical.at(0).semi_major() == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(s.elliptical.at(0).semi_minor() == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(s.graduated.at(0).scale[2] == 0.3);
}

TEST_CASE("malformed stack files are format errors") {
  const json good = stack_to_json(lpf::testing::random_gradient_case(3, CubicVariant::cubic20, 4).params);
  CHECK_NOTHROW(stack_from_json(good));

  json v = good;
  v["version"] = 2;
  CHECK(kind_of(v) == ErrorKind::format);

  json count = good;
  count["cubic"]["b"].erase(count["cubic"]["b"].size() - 1);
  try {
    stack_from_json(count);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::format);
    CHECK(std::string(e.what()).find("coefficient count") != std::string::npos);
  }

  json variant = good;
  variant["variant"] = "cubic30";
  CHECK(kind_of(variant) == ErrorKind::format);

  json missing = good;
  missing["graduated"][0].erase("slope");
  CHECK(kind_of(missing) == ErrorKind::format);

  json text = good;
  text["elliptical"][0]["angle"] = "wide";
  CHECK(kind_of(text) == ErrorKind::format);

  json units = good;
  units["units"] = "furlongs";
  CHECK(kind_of(units) == ErrorKind::format);

  json nonpositive = good;
  nonpositive["units"] = "natural";
  nonpositive["elliptical"][0]["semi_major"] = 0.0;
  CHECK(kind_of(nonpositive) == ErrorKind::format);

  CHECK(kind_of(json::array()) == ErrorKind::format);
}

TEST_CASE("unreadable and unparsable files") {
  lpf::testing::TempDir dir;
  try {
    load_stack_file(dir.path() / "absent.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
  std::ofstream(dir.path() / "broken.json") << "{\"version\": 1,";
  try {
    load_stack_file(dir.path() / "broken.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::format);
  }
}

TEST_CASE("reports serialize infinite PSNR as a string") {
  FitReport report;
  report.loss_trace = {0.0};
  report.best.psnr = std::numeric_limits<double>::infinity();
  report.best.ssim = 1.0;
  report.best_params = lpf::testing::random_gradient_case(1, CubicVariant::cubic10, 4).params;
  report.final_params = report.best_params;
  const json doc = report_to_json(report, FitConfig{});
  CHECK(doc["best"]["psnr"] == "inf");
  CHECK(doc["config"]["variant"] == "cubic20");
  CHECK(doc["loss_trace"].size() == 1);
}
