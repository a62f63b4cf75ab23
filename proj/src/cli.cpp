#include "volex/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "volex/config.hpp"
#include "volex/error.hpp"
#include "volex/feature_map.hpp"
#include "volex/fixture.hpp"
#include "volex/linalg.hpp"
#include "volex/manifest.hpp"
#include "volex/network.hpp"
#include "volex/pipeline.hpp"
#include "volex/relevance.hpp"
#include "volex/tensor.hpp"

namespace fs = std::filesystem;

namespace volex {

namespace {

struct Common {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;  // key=value

  RunConfig resolve() const {
    RunConfig c = load_run_config(config_file);
    if (seed) c.seed = *seed;
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::kParse, "--set expects key=value, got '" + o + "'");
      c.apply(o.substr(0, eq), o.substr(eq + 1));
    }
    c.validate();
    return c;
  }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_file, "Config file (key=value lines)");
  sub->add_option("--seed", c.seed, "Seed for every random choice");
  sub->add_option("--set", c.overrides, "Override a config key, key=value (repeatable)");
}

Tensor grid_to_tensor(const Grid& g) {
  std::vector<float> data(g.values.begin(), g.values.end());
  return Tensor({static_cast<std::uint32_t>(g.height), static_cast<std::uint32_t>(g.width)}, std::move(data));
}

Grid tensor_to_grid(const Tensor& t) {
  if (t.rank() != 2) throw Error(ErrorCode::kShapeMismatch, "attribution tensor must be rank 2 (H, W)");
  Grid g(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[0]));
  std::copy(t.data.begin(), t.data.end(), g.values.begin());
  return g;
}

Grid read_grid(const fs::path& p) { return tensor_to_grid(read_tensor(p)); }

Grid positive_unit(const Grid& g) {
  Grid out = g;
  double mass = 0.0;
  for (double& v : out.values) {
    v = std::max(0.0, v);
    mass += v;
  }
  if (mass > 0.0) {
    for (double& v : out.values) v /= mass;
  }
  return out;
}

std::vector<ConceptDictionary> load_dictionary_dir(const fs::path& dir) {
  int n = 0;
  while (fs::exists(dir / ("class" + std::to_string(n) + ".dict"))) ++n;
  if (n == 0) throw Error(ErrorCode::kIo, "no class<y>.dict files in " + dir.string());
  return load_dictionaries(dir, n);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void write_config_sidecar(const fs::path& artifact, const RunConfig& config) {
  KeyValueFile kv;
  kv.set("artifact", artifact.filename().string());
  embed_config(kv, config);
  kv.save(artifact.string() + ".config.txt");
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(static_cast<int>(parse_int(tok)));
  }
  return out;
}

struct PoseArgs {
  std::optional<double> azimuth, elevation;
  double theta = 0.0;
  std::optional<double> distance;
  void add(CLI::App* sub) {
    sub->add_option("--azimuth", azimuth, "Azimuth in degrees");
    sub->add_option("--elevation", elevation, "Elevation in degrees");
    sub->add_option("--theta", theta, "In-plane rotation in degrees");
    sub->add_option("--distance", distance, "Camera distance");
  }
  Pose resolve(const RunConfig& c) const {
    Pose p = c.view_pose();
    if (azimuth) p.azimuth = radians(*azimuth);
    if (elevation) p.elevation = radians(*elevation);
    p.theta = radians(theta);
    if (distance) p.distance = *distance;
    if (!(p.distance > 0.0)) throw Error(ErrorCode::kOutOfRange, "distance must be positive");
    return p;
  }
};

// Random dictionaries used when checking conservation without trained concepts.
std::vector<ConceptDictionary> random_dictionaries(int classes, int concepts, int channels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<ConceptDictionary> out;
  for (int y = 0; y < classes; ++y) {
    ConceptDictionary d;
    d.class_id = y;
    d.concepts = Matrix(concepts, channels);
    for (Eigen::Index i = 0; i < d.concepts.size(); ++i) d.concepts.data()[i] = n01(rng);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"volex: concept extraction, attribution and 3-D evaluation on neural object volumes", "volex"};
  app.require_subcommand(1);
  Common common;

  // fixture
  auto* fixture = app.add_subcommand("fixture", "Generate a synthetic dataset");
  add_common(fixture, common);
  std::string fixture_out;
  int fixture_classes = 3, fixture_images = 10;
  fixture->add_option("--out", fixture_out, "Output directory")->required();
  fixture->add_option("--classes", fixture_classes, "Number of classes (>= 2)");
  fixture->add_option("--images", fixture_images, "Images per class");

  // extract
  auto* extract = app.add_subcommand("extract", "Extract concept dictionaries from volumes");
  add_common(extract, common);
  std::string manifest_path, volume_path, out_path, method;
  std::optional<int> concepts_d;
  auto* ex_group = extract->add_option_group("source");
  ex_group->add_option("--manifest", manifest_path, "Evaluation manifest (all classes)");
  ex_group->add_option("--volume", volume_path, "Single volume manifest");
  ex_group->require_option(1);
  extract->add_option("--method", method, "kmeans | nmf | pca");
  extract->add_option("--d", concepts_d, "Concepts per class");
  extract->add_option("--out", out_path, "Output directory (manifest) or .dict path (volume)")->required();

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "Classify feature maps by concept matching");
  add_common(classify_cmd, common);
  std::string dicts_dir, features_path;
  bool occluded = false;
  auto* cl_group = classify_cmd->add_option_group("source");
  cl_group->add_option("--manifest", manifest_path, "Evaluation manifest");
  cl_group->add_option("--features", features_path, "Single H×W×C feature tensor");
  cl_group->require_option(1);
  classify_cmd->add_option("--dicts", dicts_dir, "Directory of class<y>.dict")->required();
  classify_cmd->add_flag("--occluded", occluded, "Use the occluded feature maps");
  classify_cmd->add_option("--out", out_path, "Write predictions here");

  // attribute
  auto* attribute_cmd = app.add_subcommand("attribute", "Concept attributions with LRP");
  add_common(attribute_cmd, common);
  std::string input_path, network_path;
  std::optional<int> target;
  auto* at_group = attribute_cmd->add_option_group("source");
  at_group->add_option("--features", features_path, "Feature tensor (attribute at feature level)");
  at_group->add_option("--input", input_path, "Image tensor H×W×3 (attribute through the backbone)");
  at_group->require_option(1);
  attribute_cmd->add_option("--network", network_path, "Backbone file (default: reference network)");
  attribute_cmd->add_option("--dicts", dicts_dir, "Directory of class<y>.dict")->required();
  attribute_cmd->add_option("--target", target, "Target class (default: predicted)");
  attribute_cmd->add_option("--out", out_path, "Output directory")->required();

  // project
  auto* project_cmd = app.add_subcommand("project", "Project an attribution map onto mesh faces");
  add_common(project_cmd, common);
  std::string attribution_path, mesh_path;
  bool cad = false;
  PoseArgs pose_args;
  project_cmd->add_option("--attribution", attribution_path, "H×W attribution tensor")->required();
  project_cmd->add_option("--mesh", mesh_path, "OBJ mesh")->required();
  project_cmd->add_flag("--cad", cad, "Mesh is z-up; remap axes first");
  pose_args.add(project_cmd);
  project_cmd->add_option("--out", out_path, "Face attribution manifest")->required();

  // eval-3dc
  auto* e3dc = app.add_subcommand("eval-3dc", "3-D consistency of concept projections");
  add_common(e3dc, common);
  std::vector<std::string> faces;
  std::optional<int> class_images;
  auto* e3_group = e3dc->add_option_group("source");
  e3_group->add_option("--faces", faces, "Face attribution manifests, one per present image");
  e3_group->add_option("--manifest", manifest_path, "Evaluation manifest");
  e3_group->require_option(1);
  e3dc->add_option("--class-images", class_images, "Test images of the class (default: number of --faces)");
  e3dc->add_option("--dicts", dicts_dir, "Directory of class<y>.dict (manifest mode)");
  e3dc->add_option("--out", out_path, "Write the JSON report here (manifest mode)");

  // eval-loc
  auto* eloc = app.add_subcommand("eval-loc", "Spatial localisation against a part mask");
  add_common(eloc, common);
  std::string part_mask_path;
  int part_label = 1;
  std::optional<double> support_quantile;
  auto* el_group = eloc->add_option_group("source");
  el_group->add_option("--attribution", attribution_path, "H×W attribution tensor");
  el_group->add_option("--manifest", manifest_path, "Evaluation manifest");
  el_group->require_option(1);
  eloc->add_option("--part-mask", part_mask_path, "Part label image (PGM)");
  eloc->add_option("--part", part_label, "Part label");
  eloc->add_option("--support-quantile", support_quantile, "Count only pixels above this quantile");
  eloc->add_option("--dicts", dicts_dir, "Directory of class<y>.dict (manifest mode)");
  eloc->add_option("--out", out_path, "Write the JSON report here (manifest mode)");

  // eval-cov
  auto* ecov = app.add_subcommand("eval-cov", "Object coverage of concept attributions");
  add_common(ecov, common);
  std::vector<std::string> attributions;
  std::string object_mask_path;
  auto* ec_group = ecov->add_option_group("source");
  ec_group->add_option("--attribution", attributions, "H×W attribution tensors of one image");
  ec_group->add_option("--manifest", manifest_path, "Evaluation manifest");
  ec_group->require_option(1);
  ecov->add_option("--object-mask", object_mask_path, "Object mask (PGM)");
  ecov->add_option("--dicts", dicts_dir, "Directory of class<y>.dict (manifest mode)");
  ecov->add_option("--out", out_path, "Write the JSON report here (manifest mode)");

  // eval-acc
  auto* eacc = app.add_subcommand("eval-acc", "Classification accuracy");
  add_common(eacc, common);
  std::string predictions_list, labels_list;
  auto* ea_group = eacc->add_option_group("source");
  ea_group->add_option("--manifest", manifest_path, "Evaluation manifest");
  ea_group->add_option("--predictions", predictions_list, "Comma-separated predicted classes");
  ea_group->require_option(1);
  eacc->add_option("--labels", labels_list, "Comma-separated true classes");
  eacc->add_option("--dicts", dicts_dir, "Directory of class<y>.dict (manifest mode)");
  eacc->add_flag("--occluded", occluded, "Use the occluded feature maps");

  // render
  auto* render = app.add_subcommand("render", "Render face attributions as a heatmap");
  add_common(render, common);
  std::string colormap = "heat";
  render->add_option("--faces", faces, "Face attribution manifests (aggregated)")->required();
  render->add_option("--mesh", mesh_path, "OBJ mesh")->required();
  render->add_flag("--cad", cad, "Mesh is z-up; remap axes first");
  pose_args.add(render);
  render->add_option("--colormap", colormap, "gray | heat");
  render->add_option("--out", out_path, "Output PPM")->required();

  // check-conservation
  auto* check = app.add_subcommand("check-conservation", "Relevance conservation through the backbone");
  add_common(check, common);
  int inputs = 100, size = 64, classes = 3;
  double max_drift = 1e-4;
  check->add_option("--network", network_path, "Backbone file (default: reference network)");
  check->add_option("--inputs", inputs, "Random inputs to test");
  check->add_option("--size", size, "Input height and width");
  check->add_option("--classes", classes, "Random concept dictionaries");
  check->add_option("--max-drift", max_drift, "Fail when the relative drift reaches this");
  check->add_option("--out", out_path, "Write the report here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const RunConfig config = common.resolve();

    auto need = [&](const std::string& value, const char* flag) {
      if (value.empty()) throw Error(ErrorCode::kInvalidArgument, std::string(flag) + " is required here");
    };
    auto manifest_report = [&]() {
      need(dicts_dir, "--dicts");
      const EvalManifest m = load_eval_manifest(manifest_path);
      const auto dicts = load_dictionaries(dicts_dir, m.classes);
      EvaluationReport rep = evaluate_manifest(m, dicts, config);
      if (!out_path.empty()) write_text(out_path, report_to_json(rep));
      return rep;
    };
    auto opt_text = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("none"); };

    if (*fixture) {
      FixtureOptions o;
      o.seed = config.seed;
      o.classes = fixture_classes;
      o.images_per_class = fixture_images;
      const fs::path manifest = generate_fixture(o, config, fixture_out);
      out << "manifest " << manifest.generic_string() << "\n";
      out << "checksum " << hex64(tree_checksum(fixture_out)) << "\n";
      return kExitOk;
    }

    if (*extract) {
      RunConfig c = config;
      if (!method.empty()) c.method = method_from_name(method);
      if (concepts_d) c.concepts = *concepts_d;
      c.validate();
      if (!manifest_path.empty()) {
        const EvalManifest m = load_eval_manifest(manifest_path);
        const auto dicts = extract_dictionaries(m, c);
        save_dictionaries(dicts, m, c, out_path);
        for (const auto& d : dicts) {
          out << "class " << d.class_id << " concepts " << d.size() << " sparsity "
              << format_double(sparsity(d.assignment)) << "\n";
        }
      } else {
        const NeuralObjectVolume v = load_volume(volume_path);
        const ConceptDictionary d = extract_dictionary(v, c);
        auto extra = dictionary_diagnostics(d, filter_by_visibility(v, c.visibility_threshold).features);
        for (auto& rec : config_records(c)) extra.push_back(std::move(rec));
        save_dictionary(d, out_path, extra);
        for (const auto& [k, val] : dictionary_diagnostics(d, filter_by_visibility(v, c.visibility_threshold).features)) {
          out << k << " " << val << "\n";
        }
      }
      return kExitOk;
    }

    if (*classify_cmd) {
      const auto dicts = load_dictionary_dir(dicts_dir);
      KeyValueFile kv;
      kv.set("format", std::string("volex-predictions 1"));
      embed_config(kv, config);
      if (!manifest_path.empty()) {
        const EvalManifest m = load_eval_manifest(manifest_path);
        const auto preds = classify_manifest(m, dicts, config, occluded);
        for (const auto& p : preds) {
          const std::string line = "name=" + p.name + " label=" + std::to_string(p.label) +
                                   " predicted=" + std::to_string(p.predicted);
          kv.add("image", line);
          out << line << "\n";
        }
        const double acc = prediction_accuracy(preds);
        kv.set("accuracy", acc);
        out << "accuracy " << format_double(acc) << "\n";
      } else {
        const MatchResult r =
            match_concepts(feature_map_from_tensor(read_tensor(features_path)), dicts, config.match_options());
        kv.set("predicted", r.predicted);
        kv.set("scores", r.scores);
        kv.set("confidence", r.confidence);
        out << "predicted " << r.predicted << "\n";
        for (std::size_t y = 0; y < r.scores.size(); ++y) {
          out << "class " << y << " score " << format_double(r.scores[y]) << " confidence "
              << format_double(r.confidence[y]) << "\n";
        }
      }
      if (!out_path.empty()) kv.save(out_path);
      return kExitOk;
    }

    if (*attribute_cmd) {
      const auto dicts = load_dictionary_dir(dicts_dir);
      Attribution a;
      MatchResult match;
      if (!features_path.empty()) {
        const FeatureMap f = feature_map_from_tensor(read_tensor(features_path));
        match = match_concepts(f, dicts, config.match_options());
        a = attribute_features(f, dicts, match, target.value_or(match.predicted), config.lrp_options());
      } else {
        const NetworkSpec spec =
            network_path.empty()
                ? reference_network({config.seed, config.merges, static_cast<int>(dicts.front().channels())})
                : load_network(network_path);
        const ActivationTrace trace = forward(spec, feature_map_from_tensor(read_tensor(input_path)));
        match = match_concepts(trace.features(), dicts, config.match_options());
        a = attribute(spec, trace, dicts, match, target.value_or(match.predicted), config.lrp_options());
      }
      fs::create_directories(out_path);
      const fs::path dir(out_path);
      KeyValueFile kv;
      kv.set("format", std::string("volex-attribution 1"));
      embed_config(kv, config);
      kv.set("target", target.value_or(match.predicted));
      kv.set("predicted", match.predicted);
      kv.set("total", std::string("total.cavt"));
      write_tensor(grid_to_tensor(a.total), dir / "total.cavt");
      for (const auto& cm : a.concepts) {
        const std::string name = "concept" + std::to_string(cm.concept_id.index) + ".cavt";
        write_tensor(grid_to_tensor(cm.relevance), dir / name);
        kv.add("concept", "class=" + std::to_string(cm.concept_id.cls) + " index=" +
                              std::to_string(cm.concept_id.index) + " path=" + name);
      }
      const ConservationReport rep = conservation_report(a.state);
      kv.set("drift", rep.drift);
      kv.set("leakage", rep.leakage);
      kv.save(dir / "attribution.txt");
      write_text(dir / "conservation.txt", rep.to_text());
      out << "target " << target.value_or(match.predicted) << "\n";
      out << "drift " << format_double(rep.drift) << "\n";
      return kExitOk;
    }

    if (*project_cmd) {
      const Mesh mesh = load_projection_mesh(mesh_path, cad);
      const Camera cam = camera_from_pose(pose_args.resolve(config), config.canvas(), config.base_focal);
      const Grid unit = canvas_attribution(positive_unit(read_grid(attribution_path)), config.canvas());
      const FaceAttribution fa = project_attribution(unit, rasterize(mesh, cam), mesh.face_count());
      save_face_attribution(fa, out_path, config_records(config));
      out << "input_mass " << format_double(unit.sum()) << "\n";
      out << "face_mass " << format_double(fa.total() - fa.uncovered) << "\n";
      out << "uncovered " << format_double(fa.uncovered) << "\n";
      return kExitOk;
    }

    if (*e3dc) {
      if (!faces.empty()) {
        std::vector<FaceAttribution> items;
        for (const auto& f : faces) items.push_back(load_face_attribution(f));
        const auto r = three_d_consistency(items, class_images.value_or(static_cast<int>(items.size())), config.tau);
        out << "present " << r.present << "/" << r.class_images << "\n";
        if (r.score) {
          out << "consistency " << format_double(*r.score) << "\n";
        } else {
          out << "excluded " << r.excluded << "\n";
        }
        return kExitOk;
      }
      const EvaluationReport rep = manifest_report();
      for (const auto& c : rep.concepts) {
        out << "class " << c.id.cls << " concept " << c.id.index << " consistency "
            << opt_text(c.consistency.score) << "\n";
      }
      out << "mean_consistency " << opt_text(rep.mean_consistency) << "\n";
      return kExitOk;
    }

    if (*eloc) {
      if (!attribution_path.empty()) {
        need(part_mask_path, "--part-mask");
        const Grid a = positive_unit(read_grid(attribution_path));
        const PartMask parts = read_part_mask(part_mask_path);
        const Grid resized = (a.width == parts.width && a.height == parts.height)
                                 ? a
                                 : canvas_attribution(a, {parts.width, parts.height});
        LocalisationOptions lo;
        lo.support_quantile = support_quantile;
        out << "localisation " << opt_text(spatial_localisation(resized, parts.indicator(part_label), lo)) << "\n";
        return kExitOk;
      }
      const EvaluationReport rep = manifest_report();
      out << "mean_localisation " << opt_text(rep.mean_localisation) << "\n";
      return kExitOk;
    }

    if (*ecov) {
      if (!attributions.empty()) {
        need(object_mask_path, "--object-mask");
        const Grid mask = read_part_mask(object_mask_path).foreground();
        std::vector<Grid> maps;
        for (const auto& p : attributions) {
          Grid g = read_grid(p);
          for (double& v : g.values) v = std::max(0.0, v);
          if (g.width != mask.width || g.height != mask.height) g = canvas_attribution(g, {mask.width, mask.height});
          maps.push_back(std::move(g));
        }
        out << "coverage " << opt_text(object_coverage(maps, mask)) << "\n";
        return kExitOk;
      }
      const EvaluationReport rep = manifest_report();
      out << "mean_coverage " << opt_text(rep.mean_coverage) << "\n";
      return kExitOk;
    }

    if (*eacc) {
      if (!predictions_list.empty()) {
        const auto p = parse_int_list(predictions_list);
        const auto l = parse_int_list(labels_list);
        out << "accuracy " << format_double(accuracy(p, l)) << "\n";
        return kExitOk;
      }
      need(dicts_dir, "--dicts");
      const EvalManifest m = load_eval_manifest(manifest_path);
      const auto dicts = load_dictionaries(dicts_dir, m.classes);
      out << "accuracy " << format_double(prediction_accuracy(classify_manifest(m, dicts, config, occluded)))
          << "\n";
      return kExitOk;
    }

    if (*render) {
      const Mesh mesh = load_projection_mesh(mesh_path, cad);
      std::vector<FaceAttribution> items;
      for (const auto& f : faces) items.push_back(load_face_attribution(f));
      const FaceAttribution agg = aggregate_face_attributions(items);
      if (agg.faces.size() != mesh.face_count()) {
        throw Error(ErrorCode::kShapeMismatch, "face attribution length does not match the mesh");
      }
      const Camera cam = camera_from_pose(pose_args.resolve(config), config.canvas(), config.base_focal);
      write_heatmap(render_face_attribution(agg, rasterize(mesh, cam)), colormap_from_name(colormap), out_path);
      write_config_sidecar(out_path, config);
      out << "wrote " << out_path << "\n";
      return kExitOk;
    }

    if (*check) {
      if (inputs < 1 || size < 1 || classes < 1) throw Error(ErrorCode::kOutOfRange, "inputs, size and classes must be >= 1");
      const NetworkSpec spec =
          network_path.empty() ? reference_network({config.seed, config.merges, 16}) : load_network(network_path);
      const auto dicts = random_dictionaries(classes, config.concepts, spec.feature_channels(), config.seed + 1);
      std::mt19937_64 rng(config.seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      double worst = 0.0, leakage = 0.0;
      for (int n = 0; n < inputs; ++n) {
        FeatureMap x(size, size, spec.input_channels);
        for (double& v : x.values) v = u(rng);
        const ActivationTrace trace = forward(spec, x);
        const MatchResult match = match_concepts(trace.features(), dicts, config.match_options());
        const Attribution a = attribute(spec, trace, dicts, match, match.predicted, config.lrp_options());
        const ConservationReport rep = conservation_report(a.state);
        worst = std::max(worst, rep.drift);
        leakage = std::max(leakage, rep.leakage);
      }
      KeyValueFile kv;
      kv.set("format", std::string("volex-conservation 1"));
      embed_config(kv, config);
      kv.set("network_checksum", hex64(network_checksum(spec)));
      kv.set("inputs", inputs);
      kv.set("max_drift", worst);
      kv.set("max_leakage", leakage);
      kv.set("threshold", max_drift);
      kv.set("status", std::string(worst < max_drift ? "ok" : "fail"));
      if (!out_path.empty()) kv.save(out_path);
      out << "inputs " << inputs << "\n";
      out << "max_drift " << format_double(worst) << "\n";
      out << "status " << (worst < max_drift ? "ok" : "fail") << "\n";
      if (!(worst < max_drift)) {
        err << "error: conservation: drift " << format_double(worst) << " >= " << format_double(max_drift) << "\n";
        return kExitDomainError;
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitUsage;
}

}  // namespace volex
