#include "volex/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "volex/error.hpp"
#include "volex/keyvalue.hpp"

namespace volex {

namespace {

double stabilize(double z, double eps) { return z + (z >= 0.0 ? eps : -eps); }

}  // namespace

std::vector<double> lrp_epsilon(std::span<const double> inputs, const Matrix& weights,
                                std::span<const double> relevance_out, double epsilon) {
  if (static_cast<Eigen::Index>(inputs.size()) != weights.rows() ||
      static_cast<Eigen::Index>(relevance_out.size()) != weights.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "lrp_epsilon: inconsistent shapes");
  }
  std::vector<double> ratio(relevance_out.size());
  for (Eigen::Index j = 0; j < weights.cols(); ++j) {
    double z = 0.0;
    for (Eigen::Index i = 0; i < weights.rows(); ++i) z += inputs[i] * weights(i, j);
    ratio[j] = relevance_out[j] / stabilize(z, epsilon);
  }
  std::vector<double> r_in(inputs.size(), 0.0);
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < weights.cols(); ++j) acc += weights(i, j) * ratio[j];
    r_in[i] = inputs[i] * acc;
  }
  return r_in;
}

ConcatSplit lrp_concat_split(const FeatureMap& relevance, int first_channels,
                             std::span<const std::uint8_t> valid, int merged_height,
                             int merged_width, bool mask_padding) {
  const int second = relevance.channels - first_channels;
  if (first_channels < 0 || second < 0) {
    throw Error(ErrorCode::kChannelMismatch, "concat split: channel count mismatch");
  }
  if (valid.size() != static_cast<std::size_t>(relevance.pixels()) ||
      merged_height > relevance.height || merged_width > relevance.width) {
    throw Error(ErrorCode::kShapeMismatch, "concat split: grid mismatch");
  }
  ConcatSplit out;
  out.merged = FeatureMap(merged_height, merged_width, first_channels);
  out.source = FeatureMap(relevance.height, relevance.width, second);
  for (int y = 0; y < relevance.height; ++y) {
    for (int x = 0; x < relevance.width; ++x) {
      const bool original = valid[static_cast<std::size_t>(y) * relevance.width + x] != 0;
      for (int c = 0; c < first_channels; ++c) {
        const double r = relevance.at(y, x, c);
        if (original) {
          out.merged.at(y, x, c) = r;
        } else if (mask_padding) {
          out.leakage += r;
        }
      }
      for (int c = 0; c < second; ++c) out.source.at(y, x, c) = relevance.at(y, x, first_channels + c);
    }
  }
  return out;
}

FeatureMap lrp_upsample(const FeatureMap& relevance, int factor) {
  if (factor <= 0 || relevance.height % factor || relevance.width % factor) {
    throw Error(ErrorCode::kShapeMismatch, "upsample backward: grid not divisible by factor");
  }
  FeatureMap out(relevance.height / factor, relevance.width / factor, relevance.channels);
  for (int y = 0; y < relevance.height; ++y) {
    for (int x = 0; x < relevance.width; ++x) {
      for (int c = 0; c < relevance.channels; ++c) {
        out.at(y / factor, x / factor, c) += relevance.at(y, x, c);
      }
    }
  }
  return out;
}

FeatureMap lrp_matching(const FeatureMap& features, const Matrix& matched,
                        std::span<const double> relevance_phi, double epsilon) {
  if (matched.rows() != features.pixels() || matched.cols() != features.channels ||
      relevance_phi.size() != static_cast<std::size_t>(features.pixels())) {
    throw Error(ErrorCode::kShapeMismatch, "lrp_matching: inconsistent shapes");
  }
  FeatureMap out(features.height, features.width, features.channels);
  for (int i = 0; i < features.pixels(); ++i) {
    const auto f = features.pixel(i);
    double z = 0.0;
    for (int c = 0; c < features.channels; ++c) z += f[c] * matched(i, c);
    const double scale = relevance_phi[i] / stabilize(z, epsilon);
    auto r = out.pixel(i);
    for (int c = 0; c < features.channels; ++c) r[c] = scale * f[c] * matched(i, c);
  }
  return out;
}

FeatureMap lrp_conv(const ConvLayer& c, const FeatureMap& input, const FeatureMap& relevance,
                    double epsilon) {
  const int pad = c.kernel / 2;
  if (relevance.channels != c.out_channels || input.channels != c.in_channels ||
      relevance.height != (input.height + c.stride - 1) / c.stride ||
      relevance.width != (input.width + c.stride - 1) / c.stride) {
    throw Error(ErrorCode::kShapeMismatch, "conv backward: relevance does not match layer");
  }
  FeatureMap out(input.height, input.width, input.channels);
  std::vector<double> ratio(static_cast<std::size_t>(c.out_channels));
  for (int y = 0; y < relevance.height; ++y) {
    for (int x = 0; x < relevance.width; ++x) {
      for (int o = 0; o < c.out_channels; ++o) {
        double z = 0.0;
        for (int ky = 0; ky < c.kernel; ++ky) {
          const int iy = y * c.stride + ky - pad;
          if (iy < 0 || iy >= input.height) continue;
          for (int kx = 0; kx < c.kernel; ++kx) {
            const int ix = x * c.stride + kx - pad;
            if (ix < 0 || ix >= input.width) continue;
            const double* a = &input.values[input.index(iy, ix, 0)];
            for (int i = 0; i < c.in_channels; ++i) z += a[i] * c.weight(o, ky, kx, i);
          }
        }
        ratio[o] = relevance.at(y, x, o) / stabilize(z, epsilon);
      }
      for (int ky = 0; ky < c.kernel; ++ky) {
        const int iy = y * c.stride + ky - pad;
        if (iy < 0 || iy >= input.height) continue;
        for (int kx = 0; kx < c.kernel; ++kx) {
          const int ix = x * c.stride + kx - pad;
          if (ix < 0 || ix >= input.width) continue;
          const double* a = &input.values[input.index(iy, ix, 0)];
          double* r = &out.values[out.index(iy, ix, 0)];
          for (int o = 0; o < c.out_channels; ++o) {
            if (ratio[o] == 0.0) continue;
            for (int i = 0; i < c.in_channels; ++i) r[i] += a[i] * c.weight(o, ky, kx, i) * ratio[o];
          }
        }
      }
    }
  }
  return out;
}

double RelevanceState::total_leakage() const {
  double s = 0.0;
  for (double v : leakage) s += v;
  return s;
}

Grid AttributionMap::positive(bool normalize) const {
  Grid out = relevance;
  double total = 0.0;
  for (double& v : out.values) {
    v = std::max(0.0, v);
    total += v;
  }
  if (normalize && total > 0.0) {
    for (double& v : out.values) v /= total;
  }
  return out;
}

namespace {

void add_into(FeatureMap& dst, const FeatureMap& src) {
  if (dst.values.empty()) {
    dst = src;
    return;
  }
  for (std::size_t i = 0; i < dst.values.size(); ++i) dst.values[i] += src.values[i];
}

Grid channel_sum(const FeatureMap& f) {
  Grid g(f.width, f.height);
  for (int i = 0; i < f.pixels(); ++i) {
    double s = 0.0;
    for (double v : f.pixel(i)) s += v;
    g.values[i] = s;
  }
  return g;
}

struct Backward {
  std::vector<FeatureMap> layers;
  FeatureMap input;
  std::vector<double> leakage;
  std::vector<LayerSum> sums;
};

// Walks the backbone from the feature relevance down to the input.
Backward backbone_backward(const NetworkSpec& spec, const ActivationTrace& trace,
                           const FeatureMap& feature_relevance, const LrpOptions& options) {
  const int L = static_cast<int>(spec.layers.size());
  Backward b;
  b.layers.resize(L);
  b.leakage.assign(L, 0.0);
  b.layers[L - 1] = feature_relevance;
  auto deposit = [&](int id, const FeatureMap& r) {
    add_into(id == kNetworkInput ? b.input : b.layers[id], r);
  };
  double leak_so_far = 0.0;
  for (int l = L - 1; l >= 0; --l) {
    const Layer& layer = spec.layers[l];
    const FeatureMap& in = trace.activation(l - 1);
    FeatureMap r = b.layers[l];
    if (r.values.empty()) r = FeatureMap(trace.outputs[l].height, trace.outputs[l].width, trace.outputs[l].channels);
    switch (layer.kind) {
      case LayerKind::kConv:
        deposit(l - 1, lrp_conv(layer.conv, in, r, options.epsilon));
        break;
      case LayerKind::kRelu: {
        const FeatureMap& out = trace.outputs[l];
        for (std::size_t k = 0; k < r.values.size(); ++k) {
          if (!(out.values[k] > 0.0)) r.values[k] = 0.0;
        }
        deposit(l - 1, r);
        break;
      }
      case LayerKind::kUpsample:
        deposit(l - 1, lrp_upsample(r, layer.factor));
        break;
      case LayerKind::kConcat: {
        auto split = lrp_concat_split(r, in.channels, trace.valid[l], in.height, in.width,
                                      options.mask_padding);
        b.leakage[l] = split.leakage;
        leak_so_far += split.leakage;
        deposit(l - 1, split.merged);
        deposit(layer.source, split.source);
        break;
      }
    }
    double frontier = b.input.values.empty() ? 0.0 : b.input.sum();
    for (int m = 0; m < l; ++m) {
      if (!b.layers[m].values.empty()) frontier += b.layers[m].sum();
    }
    b.sums.push_back({"layer " + std::to_string(l) + " " + layer_kind_name(layer.kind) + " input",
                      frontier, leak_so_far});
  }
  return b;
}

struct Seeds {
  FeatureMap features;  // as matched (normalised when configured)
  Matrix matched;       // P×C matched concept vector per pixel
  std::vector<double> phi;
  std::vector<int> concept_of;
  int concept_count = 0;
};

Seeds make_seeds(const FeatureMap& raw, std::span<const ConceptDictionary> dictionaries,
                 const MatchResult& match, int target, const LrpOptions& options) {
  if (target < 0 || target >= match.classes || target >= static_cast<int>(dictionaries.size())) {
    throw Error(ErrorCode::kOutOfRange, "target class out of range");
  }
  if (match.height != raw.height || match.width != raw.width) {
    throw Error(ErrorCode::kShapeMismatch, "match result does not belong to these features");
  }
  const auto& dict = dictionaries[target];
  if (dict.channels() != raw.channels) {
    throw Error(ErrorCode::kChannelMismatch, "dictionary width does not match features");
  }
  Seeds s;
  s.features = options.match.normalize && !raw.unit_norm ? normalize_features(raw) : raw;
  const Matrix bank = options.match.normalize ? normalize_rows(dict.concepts) : dict.concepts;
  s.concept_count = static_cast<int>(bank.rows());
  const double scale =
      options.seed == SeedMode::kSoftmax ? softmax(match.scores, options.match.temperature)[target] : 1.0;
  const int P = raw.pixels();
  s.matched.resize(P, raw.channels);
  s.phi.resize(P);
  s.concept_of.resize(P);
  for (int i = 0; i < P; ++i) {
    const int j = match.class_concept(target, i);
    s.concept_of[i] = j;
    s.matched.row(i) = bank.row(j);
    s.phi[i] = scale * match.class_similarity(target, i);
  }
  return s;
}

Attribution attribute_impl(const NetworkSpec* spec, const ActivationTrace* trace,
                           const FeatureMap& raw, std::span<const ConceptDictionary> dictionaries,
                           const MatchResult& match, int target, const LrpOptions& options) {
  const Seeds seeds = make_seeds(raw, dictionaries, match, target, options);
  Attribution a;
  RelevanceState& st = a.state;
  st.phi = Grid(raw.width, raw.height);
  st.phi.values = seeds.phi;
  st.concept_of = seeds.concept_of;
  for (double v : seeds.phi) st.target += v;
  st.features = lrp_matching(seeds.features, seeds.matched, seeds.phi, options.epsilon);
  st.sums.push_back({"matching R_phi", st.phi.sum(), 0.0});
  st.sums.push_back({"features R_F", st.features.sum(), 0.0});

  auto propagate = [&](const FeatureMap& feature_relevance, RelevanceState* full) -> FeatureMap {
    if (!spec) return feature_relevance;
    Backward b = backbone_backward(*spec, *trace, feature_relevance, options);
    if (full) {
      full->layers = std::move(b.layers);
      full->leakage = std::move(b.leakage);
      full->sums.insert(full->sums.end(), b.sums.begin(), b.sums.end());
    }
    return std::move(b.input);
  };

  st.input = propagate(st.features, &st);
  if (!spec) st.layers.push_back(st.features);
  a.total = channel_sum(st.input);

  for (int j = 0; j < seeds.concept_count; ++j) {
    std::vector<double> phi_j(seeds.phi.size(), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < phi_j.size(); ++i) {
      if (seeds.concept_of[i] == j) {
        phi_j[i] = seeds.phi[i];
        any = true;
      }
    }
    AttributionMap map;
    map.concept_id = {target, j};
    if (any) {
      map.relevance = channel_sum(propagate(lrp_matching(seeds.features, seeds.matched, phi_j, options.epsilon), nullptr));
    } else {
      map.relevance = Grid(a.total.width, a.total.height);
    }
    a.concepts.push_back(std::move(map));
  }
  return a;
}

}  // namespace

Attribution attribute(const NetworkSpec& spec, const ActivationTrace& trace,
                      std::span<const ConceptDictionary> dictionaries, const MatchResult& match,
                      int target_class, const LrpOptions& options) {
  if (trace.outputs.size() != spec.layers.size()) {
    throw Error(ErrorCode::kShapeMismatch, "trace/spec mismatch: layer counts differ");
  }
  const auto plan = spec.channel_plan();
  for (std::size_t l = 0; l < plan.size(); ++l) {
    if (trace.outputs[l].channels != plan[l]) {
      throw Error(ErrorCode::kShapeMismatch, "trace/spec mismatch at layer " + std::to_string(l));
    }
  }
  return attribute_impl(&spec, &trace, trace.features(), dictionaries, match, target_class, options);
}

Attribution attribute_features(const FeatureMap& features,
                               std::span<const ConceptDictionary> dictionaries,
                               const MatchResult& match, int target_class,
                               const LrpOptions& options) {
  return attribute_impl(nullptr, nullptr, features, dictionaries, match, target_class, options);
}

double concept_relevance(const Grid& phi, std::span<const int> concept_of, int concept_index) {
  if (concept_of.size() != phi.size()) {
    throw Error(ErrorCode::kShapeMismatch, "concept map does not match R_phi");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (concept_of[i] == concept_index) s += phi.values[i];
  }
  return s;
}

std::optional<double> concept_importance(std::span<const double> per_image, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::kOutOfRange, "quantile outside [0,1]");
  if (per_image.empty()) return std::nullopt;
  std::vector<double> v(per_image.begin(), per_image.end());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ConservationReport conservation_report(const RelevanceState& state) {
  ConservationReport r;
  r.target = state.target;
  r.sums = state.sums;
  r.leakage = state.total_leakage();
  const double denom = std::abs(state.target);
  for (const auto& s : state.sums) {
    const double gap = std::abs(s.sum + s.leakage_so_far - state.target);
    r.drift = std::max(r.drift, denom > 0.0 ? gap / denom : gap);
  }
  return r;
}

std::string ConservationReport::to_text() const {
  std::ostringstream os;
  os << "target " << format_double(target) << '\n';
  os << "drift " << format_double(drift) << '\n';
  os << "leakage " << format_double(leakage) << '\n';
  for (const auto& s : sums) {
    os << "sum " << format_double(s.sum) << " leakage_so_far " << format_double(s.leakage_so_far)
       << " at " << s.label << '\n';
  }
  return os.str();
}

}  // namespace volex
