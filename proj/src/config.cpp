#include "volex/config.hpp"

#include <cstdlib>

#include "volex/error.hpp"

namespace volex {

namespace {

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCode::kParse, "not a boolean: '" + v + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kOutOfRange, what);
}

}  // namespace

void RunConfig::validate() const {
  require(concepts >= 1, "concepts must be >= 1");
  require(kmeans_restarts >= 1, "kmeans_restarts must be >= 1");
  require(visibility_threshold >= 0.0 && visibility_threshold <= 1.0, "visibility_threshold outside [0,1]");
  require(epsilon > 0.0, "epsilon must be positive");
  require(tau >= 0.0 && tau <= 100.0, "tau outside [0,100]");
  require(quantile > 0.0 && quantile < 1.0, "quantile outside (0,1)");
  require(temperature > 0.0, "temperature must be positive");
  require(canvas_width > 0 && canvas_height > 0, "canvas must be non-empty");
  require(base_focal > 0.0, "base_focal must be positive");
  require(feature_stride >= 1 && canvas_width % feature_stride == 0 && canvas_height % feature_stride == 0,
          "feature_stride must divide the canvas");
  require(view_distance > 0.0, "view_distance must be positive");
  require(merges >= 0 && merges <= 3, "merges outside [0,3]");
}

MatchOptions RunConfig::match_options() const {
  MatchOptions o;
  o.normalize = normalize;
  o.temperature = temperature;
  return o;
}

LrpOptions RunConfig::lrp_options() const {
  LrpOptions o;
  o.epsilon = epsilon;
  o.seed = seed_mode;
  o.match = match_options();
  return o;
}

Pose RunConfig::view_pose() const {
  return Pose{radians(view_azimuth_deg), radians(view_elevation_deg), 0.0, view_distance};
}

KeyValueFile RunConfig::to_keyvalue() const {
  KeyValueFile kv;
  kv.set("seed", std::to_string(seed));
  kv.set("concepts", concepts);
  kv.set("method", std::string(method_name(method)));
  kv.set("kmeans_restarts", kmeans_restarts);
  kv.set("visibility_threshold", visibility_threshold);
  kv.set("epsilon", epsilon);
  kv.set("tau", tau);
  kv.set("quantile", quantile);
  kv.set("temperature", temperature);
  kv.set("normalize", std::string(normalize ? "true" : "false"));
  kv.set("seed_mode", std::string(seed_mode == SeedMode::kScore ? "score" : "softmax"));
  kv.set("canvas_width", canvas_width);
  kv.set("canvas_height", canvas_height);
  kv.set("base_focal", base_focal);
  kv.set("feature_stride", feature_stride);
  kv.set("view_distance", view_distance);
  kv.set("view_azimuth_deg", view_azimuth_deg);
  kv.set("view_elevation_deg", view_elevation_deg);
  kv.set("merges", merges);
  return kv;
}

void RunConfig::apply(const std::string& key, const std::string& v) {
  if (key == "seed") {
    seed = static_cast<std::uint64_t>(parse_int(v));
  } else if (key == "concepts") {
    concepts = static_cast<int>(parse_int(v));
  } else if (key == "method") {
    method = method_from_name(v);
  } else if (key == "kmeans_restarts") {
    kmeans_restarts = static_cast<int>(parse_int(v));
  } else if (key == "visibility_threshold") {
    visibility_threshold = parse_double(v);
  } else if (key == "epsilon") {
    epsilon = parse_double(v);
  } else if (key == "tau") {
    tau = parse_double(v);
  } else if (key == "quantile") {
    quantile = parse_double(v);
  } else if (key == "temperature") {
    temperature = parse_double(v);
  } else if (key == "normalize") {
    normalize = parse_bool(v);
  } else if (key == "seed_mode") {
    if (v == "score") {
      seed_mode = SeedMode::kScore;
    } else if (v == "softmax") {
      seed_mode = SeedMode::kSoftmax;
    } else {
      throw Error(ErrorCode::kParse, "seed_mode must be score or softmax");
    }
  } else if (key == "canvas_width") {
    canvas_width = static_cast<int>(parse_int(v));
  } else if (key == "canvas_height") {
    canvas_height = static_cast<int>(parse_int(v));
  } else if (key == "base_focal") {
    base_focal = parse_double(v);
  } else if (key == "feature_stride") {
    feature_stride = static_cast<int>(parse_int(v));
  } else if (key == "view_distance") {
    view_distance = parse_double(v);
  } else if (key == "view_azimuth_deg") {
    view_azimuth_deg = parse_double(v);
  } else if (key == "view_elevation_deg") {
    view_elevation_deg = parse_double(v);
  } else if (key == "merges") {
    merges = static_cast<int>(parse_int(v));
  } else {
    throw Error(ErrorCode::kParse, "unknown config key '" + key + "'");
  }
}

void RunConfig::apply(const KeyValueFile& kv) {
  for (const auto& [k, v] : kv.entries()) apply(k, v);
}

RunConfig load_run_config(const std::filesystem::path& file) {
  RunConfig c;
  if (const char* env = std::getenv(kSeedEnvironmentVariable); env && *env) {
    c.apply("seed", env);
  }
  if (!file.empty()) {
    // key=value lines are accepted as well as `key value`.
    const auto bytes = read_file_bytes(file);
    std::string text(bytes.begin(), bytes.end());
    for (auto& ch : text) {
      if (ch == '=') ch = ' ';
    }
    c.apply(KeyValueFile::parse(text));
  }
  c.validate();
  return c;
}

}  // namespace volex
