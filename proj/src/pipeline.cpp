#include "volex/pipeline.hpp"

#include <cmath>
#include <json.hpp>

#include "volex/error.hpp"
#include "volex/feature_map.hpp"
#include "volex/relevance.hpp"
#include "volex/tensor.hpp"

namespace fs = std::filesystem;

namespace volex {

ConceptDictionary extract_dictionary(const NeuralObjectVolume& volume, const RunConfig& config) {
  const NeuralObjectVolume kept = filter_by_visibility(volume, config.visibility_threshold);
  ConceptDictionary d;
  switch (config.method) {
    case ExtractionMethod::kKMeans: {
      KMeansOptions o;
      o.restarts = config.kmeans_restarts;
      d = extract_kmeans(kept.features, config.concepts, config.seed, o);
      break;
    }
    case ExtractionMethod::kNmf:
      d = extract_nmf(kept.features, config.concepts, config.seed);
      break;
    case ExtractionMethod::kPca:
      d = extract_pca(kept.features, config.concepts);
      break;
  }
  d.class_id = volume.class_id;
  return d;
}

std::vector<std::pair<std::string, std::string>> dictionary_diagnostics(const ConceptDictionary& dict,
                                                                        const Matrix& features) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("sparsity", format_double(sparsity(dict.assignment)));
  out.emplace_back("fdd", format_double(fdd(features, reconstruct(dict))));
  if (dict.method == ExtractionMethod::kKMeans) {
    const auto labels = assignment_labels(dict.assignment);
    try {
      out.emplace_back("silhouette", format_double(silhouette(features, labels)));
      out.emplace_back("davies_bouldin", format_double(davies_bouldin(features, labels)));
    } catch (const Error& e) {
      out.emplace_back("cluster_diagnostics", std::string("unavailable: ") + e.what());
    }
  }
  return out;
}

std::vector<ConceptDictionary> extract_dictionaries(const EvalManifest& manifest, const RunConfig& config) {
  std::vector<ConceptDictionary> dicts;
  for (int y = 0; y < manifest.classes; ++y) {
    NeuralObjectVolume v = load_volume(manifest.resolve(manifest.volumes[y]));
    v.class_id = y;
    dicts.push_back(extract_dictionary(v, config));
  }
  return dicts;
}

void save_dictionaries(std::span<const ConceptDictionary> dicts, const EvalManifest& manifest,
                       const RunConfig& config, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& d : dicts) {
    const NeuralObjectVolume kept = filter_by_visibility(
        load_volume(manifest.resolve(manifest.volumes[d.class_id])), config.visibility_threshold);
    auto extra = dictionary_diagnostics(d, kept.features);
    for (auto& rec : config_records(config)) extra.push_back(std::move(rec));
    save_dictionary(d, dir / ("class" + std::to_string(d.class_id) + ".dict"), extra);
  }
}

std::vector<ConceptDictionary> load_dictionaries(const fs::path& dir, int classes) {
  std::vector<ConceptDictionary> dicts;
  for (int y = 0; y < classes; ++y) {
    dicts.push_back(load_dictionary(dir / ("class" + std::to_string(y) + ".dict")));
    if (dicts.back().class_id != y) {
      throw Error(ErrorCode::kInvalidArgument, "dictionary class" + std::to_string(y) + " has the wrong class id");
    }
  }
  return dicts;
}

namespace {

FeatureMap load_features(const EvalManifest& m, const ImageRecord& r, bool occluded) {
  if (occluded && r.occluded_features.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "image " + r.name + " has no occluded features");
  }
  return feature_map_from_tensor(read_tensor(m.resolve(occluded ? r.occluded_features : r.features)));
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : "none"; }

}  // namespace

std::vector<ImagePrediction> classify_manifest(const EvalManifest& manifest,
                                               std::span<const ConceptDictionary> dicts,
                                               const RunConfig& config, bool occluded) {
  std::vector<ImagePrediction> out;
  for (const auto& r : manifest.images) {
    const MatchResult m = match_concepts(load_features(manifest, r, occluded), dicts, config.match_options());
    out.push_back({r.name, r.label, m.predicted, m.scores, m.confidence});
  }
  return out;
}

double prediction_accuracy(std::span<const ImagePrediction> predictions) {
  std::vector<int> p, l;
  for (const auto& x : predictions) {
    p.push_back(x.predicted);
    l.push_back(x.label);
  }
  return accuracy(p, l);
}

Grid canvas_attribution(const Grid& positive_unit, Canvas canvas) {
  return resize_mass_preserving(positive_unit, canvas.width, canvas.height);
}

Mesh load_projection_mesh(const fs::path& path, bool cad_axes) {
  const Mesh m = read_mesh_obj(path);
  return cad_axes ? cad_to_camera_axes(m) : m;
}

EvaluationReport evaluate_manifest(const EvalManifest& manifest, std::span<const ConceptDictionary> dicts,
                                   const RunConfig& config) {
  if (static_cast<int>(dicts.size()) != manifest.classes) {
    throw Error(ErrorCode::kShapeMismatch, "dictionary count does not match manifest classes");
  }
  EvaluationReport rep;
  rep.config = config;
  rep.parts = manifest.parts;
  const Canvas canvas = config.canvas();

  for (int y = 0; y < manifest.classes; ++y) {
    for (Eigen::Index j = 0; j < dicts[y].size(); ++j) {
      ConceptEvaluation c;
      c.id = {y, static_cast<int>(j)};
      rep.concepts.push_back(std::move(c));
    }
  }
  auto concept_slot = [&](int y, int j) -> ConceptEvaluation& {
    std::size_t off = 0;
    for (int k = 0; k < y; ++k) off += static_cast<std::size_t>(dicts[k].size());
    return rep.concepts[off + j];
  };
  // per concept: per-part localisation samples and per-image R_phi sums
  std::vector<std::vector<std::vector<double>>> loc(rep.concepts.size(),
                                                    std::vector<std::vector<double>>(manifest.parts.size()));
  std::vector<std::vector<double>> relevance(rep.concepts.size());
  auto slot_index = [&](int y, int j) { return static_cast<std::size_t>(&concept_slot(y, j) - rep.concepts.data()); };

  std::vector<ImagePrediction> preds;
  for (const auto& r : manifest.images) {
    const FeatureMap f = load_features(manifest, r, false);
    const MatchResult m = match_concepts(f, dicts, config.match_options());
    preds.push_back({r.name, r.label, m.predicted, m.scores, m.confidence});
    const Attribution att = attribute_features(f, dicts, m, r.label, config.lrp_options());

    ImageEvaluation ie;
    ie.name = r.name;
    ie.label = r.label;
    ie.predicted = m.predicted;
    ie.confidence = m.confidence;
    ie.conservation_drift = conservation_report(att.state).drift;

    const Mesh mesh = load_projection_mesh(manifest.resolve(r.mesh), r.cad_axes);
    const PixelFaceMap pfm = rasterize(mesh, camera_from_pose(r.pose, canvas, config.base_focal));
    const Grid object = read_part_mask(manifest.resolve(r.object_mask)).foreground();
    std::vector<Grid> part_grids;
    if (!r.part_mask.empty()) {
      const PartMask parts = read_part_mask(manifest.resolve(r.part_mask));
      for (const auto& p : manifest.parts) part_grids.push_back(parts.indicator(p.id));
    }
    if (object.width != canvas.width || object.height != canvas.height) {
      throw Error(ErrorCode::kShapeMismatch, "object mask of " + r.name + " does not match the canvas");
    }

    std::vector<Grid> maps;
    for (const auto& cm : att.concepts) {
      const int j = cm.concept_id.index;
      const std::size_t s = slot_index(r.label, j);
      relevance[s].push_back(concept_relevance(att.state.phi, att.state.concept_of, j));
      Grid raw = canvas_attribution(cm.positive(false), canvas);
      bool present = false;
      for (int i = 0; i < m.pixels() && !present; ++i) {
        present = m.winner[i] == ConceptRef{r.label, j} && att.state.concept_of[i] == j &&
                  att.state.phi.values[i] > 0.0;
      }
      const double mass = raw.sum();
      if (present && mass > 0.0) {
        ie.present.push_back(j);
        Grid unit = raw;
        for (double& v : unit.values) v /= mass;
        rep.concepts[s].projections.push_back(project_attribution(unit, pfm, mesh.face_count()));
        for (std::size_t p = 0; p < part_grids.size(); ++p) {
          const auto sl = spatial_localisation(unit, part_grids[p]);
          if (sl) loc[s][p].push_back(*sl);
        }
      }
      maps.push_back(std::move(raw));
    }
    ie.coverage = object_coverage(maps, object);
    rep.images.push_back(std::move(ie));
  }
  rep.accuracy = prediction_accuracy(preds);
  bool has_occluded = !manifest.images.empty();
  for (const auto& r : manifest.images) has_occluded = has_occluded && !r.occluded_features.empty();
  if (has_occluded) rep.occluded_accuracy = prediction_accuracy(classify_manifest(manifest, dicts, config, true));

  std::vector<double> scores, sls, covs;
  for (std::size_t s = 0; s < rep.concepts.size(); ++s) {
    auto& c = rep.concepts[s];
    c.consistency = three_d_consistency(c.projections, manifest.images_of_class(c.id.cls), config.tau);
    if (c.consistency.score) {
      scores.push_back(*c.consistency.score);
    } else {
      ++rep.excluded_concepts;
    }
    for (const auto& samples : loc[s]) {
      c.localisation.push_back(mean_of(samples));
      if (c.localisation.back()) sls.push_back(*c.localisation.back());
    }
    c.importance = concept_importance(relevance[s], config.quantile);
  }
  for (const auto& ie : rep.images) {
    if (ie.coverage) covs.push_back(*ie.coverage);
  }
  rep.mean_consistency = mean_of(scores);
  rep.mean_localisation = mean_of(sls);
  rep.mean_coverage = mean_of(covs);
  return rep;
}

std::string report_to_json(const EvaluationReport& rep) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json cfg;
  const KeyValueFile kv = rep.config.to_keyvalue();
  for (const auto& [k, v] : kv.entries()) cfg[k] = v;
  j["config"] = cfg;
  j["accuracy"] = rep.accuracy;
  j["occluded_accuracy"] = opt_json(rep.occluded_accuracy);
  j["mean_consistency"] = opt_json(rep.mean_consistency);
  j["mean_localisation"] = opt_json(rep.mean_localisation);
  j["mean_coverage"] = opt_json(rep.mean_coverage);
  j["excluded_concepts"] = rep.excluded_concepts;
  auto images = nlohmann::ordered_json::array();
  for (const auto& ie : rep.images) {
    nlohmann::ordered_json o;
    o["name"] = ie.name;
    o["label"] = ie.label;
    o["predicted"] = ie.predicted;
    o["confidence"] = ie.confidence;
    o["coverage"] = opt_json(ie.coverage);
    o["conservation_drift"] = ie.conservation_drift;
    o["present_concepts"] = ie.present;
    images.push_back(o);
  }
  j["images"] = images;
  auto concepts = nlohmann::ordered_json::array();
  for (const auto& c : rep.concepts) {
    nlohmann::ordered_json o;
    o["class"] = c.id.cls;
    o["concept"] = c.id.index;
    o["present"] = c.consistency.present;
    o["class_images"] = c.consistency.class_images;
    o["consistency"] = opt_json(c.consistency.score);
    if (!c.consistency.excluded.empty()) o["excluded"] = c.consistency.excluded;
    o["importance"] = opt_json(c.importance);
    nlohmann::ordered_json l;
    for (std::size_t p = 0; p < rep.parts.size() && p < c.localisation.size(); ++p) {
      l[rep.parts[p].name] = opt_json(c.localisation[p]);
    }
    o["localisation"] = l;
    concepts.push_back(o);
  }
  j["concepts"] = concepts;
  return j.dump(2) + "\n";
}

std::string report_to_text(const EvaluationReport& rep) {
  KeyValueFile kv;
  kv.set("format", std::string("volex-report 1"));
  embed_config(kv, rep.config);
  kv.set("accuracy", rep.accuracy);
  kv.set("occluded_accuracy", opt_text(rep.occluded_accuracy));
  kv.set("mean_consistency", opt_text(rep.mean_consistency));
  kv.set("mean_localisation", opt_text(rep.mean_localisation));
  kv.set("mean_coverage", opt_text(rep.mean_coverage));
  kv.set("excluded_concepts", rep.excluded_concepts);
  for (const auto& ie : rep.images) {
    kv.add("image", "name=" + ie.name + " label=" + std::to_string(ie.label) +
                        " predicted=" + std::to_string(ie.predicted) + " coverage=" + opt_text(ie.coverage) +
                        " drift=" + format_double(ie.conservation_drift));
  }
  for (const auto& c : rep.concepts) {
    std::string s = "class=" + std::to_string(c.id.cls) + " concept=" + std::to_string(c.id.index) +
                    " present=" + std::to_string(c.consistency.present) + "/" +
                    std::to_string(c.consistency.class_images) + " consistency=" + opt_text(c.consistency.score) +
                    " importance=" + opt_text(c.importance);
    for (std::size_t p = 0; p < rep.parts.size() && p < c.localisation.size(); ++p) {
      s += " sl_" + rep.parts[p].name + "=" + opt_text(c.localisation[p]);
    }
    kv.add("concept", s);
  }
  return kv.to_string();
}

}  // namespace volex
