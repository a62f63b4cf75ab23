#include "volex/manifest.hpp"

#include <map>
#include <sstream>

#include "volex/error.hpp"

namespace volex {

namespace {

constexpr const char* kEvalFormat = "volex-eval 1";

std::map<std::string, std::string> attributes(const std::string& record) {
  std::map<std::string, std::string> out;
  std::istringstream in(record);
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::kParse, "bad attribute '" + tok + "'");
    out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

const std::string& need(const std::map<std::string, std::string>& a, const std::string& key,
                        const std::string& what) {
  const auto it = a.find(key);
  if (it == a.end()) throw Error(ErrorCode::kParse, what + " record missing '" + key + "'");
  return it->second;
}

std::string opt(const std::map<std::string, std::string>& a, const std::string& key) {
  const auto it = a.find(key);
  return it == a.end() ? std::string() : it->second;
}

}  // namespace

int EvalManifest::images_of_class(int y) const {
  int n = 0;
  for (const auto& im : images) n += im.label == y;
  return n;
}

EvalManifest load_eval_manifest(const std::filesystem::path& path) {
  const auto kv = KeyValueFile::load(path);
  if (kv.get_or("format", "") != kEvalFormat) {
    throw Error(ErrorCode::kBadVersion, "unsupported eval manifest format");
  }
  EvalManifest m;
  m.root = path.parent_path();
  m.classes = static_cast<int>(kv.get_int("classes"));
  m.tau = kv.get_double("tau");
  if (m.classes < 1) throw Error(ErrorCode::kParse, "manifest declares no classes");
  if (!(m.tau >= 0.0 && m.tau <= 100.0)) throw Error(ErrorCode::kOutOfRange, "tau outside [0,100]");
  m.volumes.resize(m.classes);
  for (const auto& rec : kv.get_all("volume")) {
    const auto a = attributes(rec);
    const auto y = parse_int(need(a, "class", "volume"));
    if (y < 0 || y >= m.classes) throw Error(ErrorCode::kIndexOutOfRange, "volume class out of range");
    m.volumes[y] = need(a, "path", "volume");
  }
  for (int y = 0; y < m.classes; ++y) {
    if (m.volumes[y].empty()) throw Error(ErrorCode::kParse, "no volume for class " + std::to_string(y));
  }
  for (const auto& rec : kv.get_all("part")) {
    const auto a = attributes(rec);
    m.parts.push_back({static_cast<int>(parse_int(need(a, "id", "part"))), need(a, "name", "part")});
  }
  for (const auto& rec : kv.get_all("image")) {
    const auto a = attributes(rec);
    ImageRecord r;
    r.name = need(a, "name", "image");
    r.label = static_cast<int>(parse_int(need(a, "class", "image")));
    if (r.label < 0 || r.label >= m.classes) {
      throw Error(ErrorCode::kIndexOutOfRange, "image " + r.name + ": class out of range");
    }
    r.pose.azimuth = parse_double(need(a, "azimuth", "image"));
    r.pose.elevation = parse_double(need(a, "elevation", "image"));
    r.pose.theta = parse_double(need(a, "theta", "image"));
    r.pose.distance = parse_double(need(a, "distance", "image"));
    r.features = need(a, "features", "image");
    r.occluded_features = opt(a, "occluded_features");
    r.mesh = need(a, "mesh", "image");
    r.cad_axes = opt(a, "axes") == "cad";
    r.object_mask = need(a, "object_mask", "image");
    r.part_mask = opt(a, "part_mask");
    m.images.push_back(std::move(r));
  }
  return m;
}

std::vector<std::pair<std::string, std::string>> config_records(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  const KeyValueFile kv = config.to_keyvalue();
  for (const auto& [k, v] : kv.entries()) out.emplace_back("config." + k, v);
  return out;
}

void embed_config(KeyValueFile& kv, const RunConfig& config) {
  for (const auto& [k, v] : config_records(config)) kv.set(k, v);
}

void save_eval_manifest(const EvalManifest& m, const RunConfig& config, const std::filesystem::path& path) {
  KeyValueFile kv;
  kv.set("format", std::string(kEvalFormat));
  kv.set("classes", m.classes);
  kv.set("tau", m.tau);
  embed_config(kv, config);
  for (std::size_t y = 0; y < m.volumes.size(); ++y) {
    kv.add("volume", "class=" + std::to_string(y) + " path=" + m.volumes[y].generic_string());
  }
  for (const auto& p : m.parts) kv.add("part", "id=" + std::to_string(p.id) + " name=" + p.name);
  for (const auto& r : m.images) {
    std::string s = "name=" + r.name + " class=" + std::to_string(r.label) +
                    " features=" + r.features.generic_string();
    if (!r.occluded_features.empty()) s += " occluded_features=" + r.occluded_features.generic_string();
    s += " azimuth=" + format_double(r.pose.azimuth) + " elevation=" + format_double(r.pose.elevation) +
         " theta=" + format_double(r.pose.theta) + " distance=" + format_double(r.pose.distance) +
         " mesh=" + r.mesh.generic_string();
    if (r.cad_axes) s += " axes=cad";
    s += " object_mask=" + r.object_mask.generic_string();
    if (!r.part_mask.empty()) s += " part_mask=" + r.part_mask.generic_string();
    kv.add("image", s);
  }
  kv.save(path);
}

}  // namespace volex
