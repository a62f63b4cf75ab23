#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "volex/camera.hpp"
#include "volex/config.hpp"
#include "volex/keyvalue.hpp"

namespace volex {

struct PartInfo {
  int id = 0;
  std::string name;
};

struct ImageRecord {
  std::string name;
  int label = 0;
  Pose pose;
  // Relative to the manifest directory.
  std::filesystem::path features;
  std::filesystem::path occluded_features;  // may be empty
  std::filesystem::path mesh;
  bool cad_axes = false;  // mesh is z-up and needs the axis remap
  std::filesystem::path object_mask;
  std::filesystem::path part_mask;  // may be empty
};

// Evaluation manifest:
//   format volex-eval 1
//   classes N / tau T
//   volume class=<y> path=<file>
//   part id=<k> name=<text>
//   image name= class= features= [occluded_features=] azimuth= elevation= theta=
//         distance= mesh= [axes=cad] object_mask= [part_mask=]
// Angles are stored in radians.
struct EvalManifest {
  std::filesystem::path root;
  int classes = 0;
  double tau = 50.0;
  std::vector<std::filesystem::path> volumes;  // index = class id
  std::vector<PartInfo> parts;
  std::vector<ImageRecord> images;

  std::filesystem::path resolve(const std::filesystem::path& p) const { return root / p; }
  int images_of_class(int y) const;
};

EvalManifest load_eval_manifest(const std::filesystem::path& path);
void save_eval_manifest(const EvalManifest& manifest, const RunConfig& config,
                        const std::filesystem::path& path);

// Adds `config.<key> <value>` records for every RunConfig field.
void embed_config(KeyValueFile& kv, const RunConfig& config);
std::vector<std::pair<std::string, std::string>> config_records(const RunConfig& config);

}  // namespace volex
