#include "volex/network.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "volex/error.hpp"
#include "volex/keyvalue.hpp"

namespace volex {

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv: return "conv";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kUpsample: return "upsample";
    case LayerKind::kConcat: return "concat";
  }
  return "?";
}

Layer Layer::make_conv(ConvLayer c) {
  Layer l;
  l.kind = LayerKind::kConv;
  l.conv = std::move(c);
  return l;
}

Layer Layer::relu() { return Layer{}; }

Layer Layer::upsample(int factor) {
  Layer l;
  l.kind = LayerKind::kUpsample;
  l.factor = factor;
  return l;
}

Layer Layer::concat(int source) {
  Layer l;
  l.kind = LayerKind::kConcat;
  l.source = source;
  return l;
}

bool Layer::operator==(const Layer& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case LayerKind::kConv:
      return conv.kernel == o.conv.kernel && conv.stride == o.conv.stride &&
             conv.in_channels == o.conv.in_channels && conv.out_channels == o.conv.out_channels &&
             conv.weights == o.conv.weights && conv.bias == o.conv.bias;
    case LayerKind::kRelu: return true;
    case LayerKind::kUpsample: return factor == o.factor;
    case LayerKind::kConcat: return source == o.source;
  }
  return false;
}

std::vector<int> NetworkSpec::channel_plan() const {
  if (layers.empty()) throw Error(ErrorCode::kInvalidArgument, "network has no layers");
  if (input_channels <= 0) throw Error(ErrorCode::kChannelMismatch, "non-positive input channels");
  std::vector<int> plan;
  int current = input_channels;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" + layer_kind_name(l.kind) + ")";
    switch (l.kind) {
      case LayerKind::kConv: {
        const auto& c = l.conv;
        if (c.in_channels != current) {
          throw Error(ErrorCode::kChannelMismatch,
                      where + ": expects " + std::to_string(c.in_channels) + " channels, got " +
                          std::to_string(current));
        }
        if (c.kernel <= 0 || c.kernel % 2 == 0 || c.stride <= 0 || c.out_channels <= 0) {
          throw Error(ErrorCode::kInvalidArgument, where + ": bad kernel/stride/out channels");
        }
        const std::size_t expected =
            static_cast<std::size_t>(c.out_channels) * c.kernel * c.kernel * c.in_channels;
        if (c.weights.size() != expected || c.bias.size() != static_cast<std::size_t>(c.out_channels)) {
          throw Error(ErrorCode::kChannelMismatch, where + ": weight dims do not match channels");
        }
        current = c.out_channels;
        break;
      }
      case LayerKind::kRelu: break;
      case LayerKind::kUpsample:
        if (l.factor <= 0) throw Error(ErrorCode::kInvalidArgument, where + ": bad factor");
        break;
      case LayerKind::kConcat:
        if (l.source < kNetworkInput || l.source >= static_cast<int>(i)) {
          throw Error(ErrorCode::kChannelMismatch, where + ": source must be an earlier layer");
        }
        current += l.source == kNetworkInput ? input_channels : plan[l.source];
        break;
    }
    plan.push_back(current);
  }
  return plan;
}

int NetworkSpec::total_stride() const {
  int s = 1;
  for (const auto& l : layers) {
    if (l.kind == LayerKind::kConv) s *= l.conv.stride;
  }
  return s;
}

int NetworkSpec::merge_count() const {
  int n = 0;
  for (const auto& l : layers) n += l.kind == LayerKind::kConcat;
  return n;
}

namespace {

FeatureMap conv_forward(const ConvLayer& c, const FeatureMap& in) {
  const int pad = c.kernel / 2;
  const int oh = (in.height + c.stride - 1) / c.stride;
  const int ow = (in.width + c.stride - 1) / c.stride;
  FeatureMap out(oh, ow, c.out_channels);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int o = 0; o < c.out_channels; ++o) {
        double acc = c.bias[o];
        for (int ky = 0; ky < c.kernel; ++ky) {
          const int iy = y * c.stride + ky - pad;
          if (iy < 0 || iy >= in.height) continue;
          for (int kx = 0; kx < c.kernel; ++kx) {
            const int ix = x * c.stride + kx - pad;
            if (ix < 0 || ix >= in.width) continue;
            const double* a = &in.values[in.index(iy, ix, 0)];
            for (int i = 0; i < c.in_channels; ++i) acc += a[i] * c.weight(o, ky, kx, i);
          }
        }
        out.at(y, x, o) = acc;
      }
    }
  }
  return out;
}

FeatureMap upsample_forward(int factor, const FeatureMap& in) {
  FeatureMap out(in.height * factor, in.width * factor, in.channels);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      for (int c = 0; c < in.channels; ++c) out.at(y, x, c) = in.at(y / factor, x / factor, c);
    }
  }
  return out;
}

}  // namespace

ActivationTrace forward(const NetworkSpec& spec, const FeatureMap& input) {
  const auto plan = spec.channel_plan();
  if (input.channels != spec.input_channels) {
    throw Error(ErrorCode::kChannelMismatch, "input has " + std::to_string(input.channels) +
                                                 " channels, network expects " +
                                                 std::to_string(spec.input_channels));
  }
  const int stride = spec.total_stride();
  if (input.height <= 0 || input.width <= 0 || input.height % stride || input.width % stride) {
    throw Error(ErrorCode::kShapeMismatch,
                "input dims must be positive multiples of the total stride " + std::to_string(stride));
  }
  ActivationTrace trace;
  trace.input = input;
  trace.outputs.reserve(spec.layers.size());
  trace.valid.resize(spec.layers.size());
  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    const Layer& l = spec.layers[li];
    const FeatureMap& prev = li == 0 ? trace.input : trace.outputs.back();
    switch (l.kind) {
      case LayerKind::kConv:
        trace.outputs.push_back(conv_forward(l.conv, prev));
        break;
      case LayerKind::kRelu: {
        FeatureMap out = prev;
        out.zero_pixel.clear();
        out.unit_norm = false;
        for (double& v : out.values) v = v > 0.0 ? v : 0.0;
        trace.outputs.push_back(std::move(out));
        break;
      }
      case LayerKind::kUpsample:
        trace.outputs.push_back(upsample_forward(l.factor, prev));
        break;
      case LayerKind::kConcat: {
        const FeatureMap& src = trace.activation(l.source);
        if (prev.height > src.height || prev.width > src.width) {
          throw Error(ErrorCode::kShapeMismatch,
                      "layer " + std::to_string(li) + ": merged branch exceeds source grid");
        }
        FeatureMap out(src.height, src.width, prev.channels + src.channels);
        auto& valid = trace.valid[li];
        valid.assign(static_cast<std::size_t>(src.pixels()), 0);
        for (int y = 0; y < src.height; ++y) {
          for (int x = 0; x < src.width; ++x) {
            const int py = std::min(y, prev.height - 1);
            const int px = std::min(x, prev.width - 1);
            valid[static_cast<std::size_t>(y) * src.width + x] = (py == y && px == x);
            for (int c = 0; c < prev.channels; ++c) out.at(y, x, c) = prev.at(py, px, c);
            for (int c = 0; c < src.channels; ++c) out.at(y, x, prev.channels + c) = src.at(y, x, c);
          }
        }
        trace.outputs.push_back(std::move(out));
        break;
      }
    }
    if (trace.outputs.back().channels != plan[li]) {
      throw Error(ErrorCode::kChannelMismatch, "layer " + std::to_string(li) + ": channel plan violated");
    }
  }
  return trace;
}

ConvLayer random_conv(int kernel, int stride, int in_channels, int out_channels,
                      std::uint64_t seed, bool with_bias) {
  ConvLayer c;
  c.kernel = kernel;
  c.stride = stride;
  c.in_channels = in_channels;
  c.out_channels = out_channels;
  const double bound = 1.0 / std::sqrt(static_cast<double>(kernel * kernel * in_channels));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  c.weights.resize(static_cast<std::size_t>(out_channels) * kernel * kernel * in_channels);
  for (double& w : c.weights) w = static_cast<float>(dist(rng));
  c.bias.resize(static_cast<std::size_t>(out_channels));
  for (double& b : c.bias) b = with_bias ? static_cast<float>(dist(rng)) : 0.0;
  return c;
}

NetworkSpec reference_network(const ReferenceNetworkOptions& options) {
  if (options.merges < 0 || options.merges > 3) {
    throw Error(ErrorCode::kInvalidArgument, "reference network supports 0..3 merges");
  }
  if (options.feature_channels <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "feature channels must be positive");
  }
  NetworkSpec spec;
  spec.input_channels = 3;
  std::uint64_t layer_seed = options.seed * 1000003ULL;
  auto conv = [&](int k, int s, int in, int out) {
    spec.layers.push_back(Layer::make_conv(random_conv(k, s, in, out, layer_seed++)));
  };
  conv(3, 2, 3, 8);
  spec.layers.push_back(Layer::relu());
  conv(3, 2, 8, 16);
  spec.layers.push_back(Layer::relu());
  conv(3, 2, 16, 32);
  spec.layers.push_back(Layer::relu());

  // Skip sources for successive merges: relu after conv2, relu after conv1, input.
  const int skip_source[3] = {3, 1, kNetworkInput};
  const int skip_channels[3] = {16, 8, 3};
  int current = 32;
  if (options.merges == 0) {
    conv(1, 1, current, options.feature_channels);
    return spec;
  }
  for (int m = 0; m < options.merges; ++m) {
    spec.layers.push_back(Layer::upsample(2));
    spec.layers.push_back(Layer::concat(skip_source[m]));
    const bool last = m + 1 == options.merges;
    conv(1, 1, current + skip_channels[m], last ? options.feature_channels : 16);
    if (!last) spec.layers.push_back(Layer::relu());
    current = 16;
  }
  return spec;
}

namespace {

constexpr const char* kNetworkFormat = "volex-network 1";

Tensor conv_weight_tensor(const ConvLayer& c) {
  std::vector<float> data(c.weights.begin(), c.weights.end());
  return Tensor({static_cast<std::uint32_t>(c.out_channels), static_cast<std::uint32_t>(c.kernel),
                 static_cast<std::uint32_t>(c.kernel), static_cast<std::uint32_t>(c.in_channels)},
                std::move(data));
}

Tensor conv_bias_tensor(const ConvLayer& c) {
  std::vector<float> data(c.bias.begin(), c.bias.end());
  return Tensor({static_cast<std::uint32_t>(c.out_channels)}, std::move(data));
}

std::string weight_file(const std::filesystem::path& path, std::size_t i, const char* what) {
  return path.stem().string() + ".L" + std::to_string(i) + "." + what + ".cavt";
}

}  // namespace

void save_network(const NetworkSpec& spec, const std::filesystem::path& path) {
  spec.validate();
  std::ostringstream out;
  out << kNetworkFormat << '\n';
  out << "input_channels " << spec.input_channels << '\n';
  out << "layers " << spec.layers.size() << '\n';
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const Layer& l = spec.layers[i];
    out << "layer " << layer_kind_name(l.kind);
    switch (l.kind) {
      case LayerKind::kConv: {
        const auto w = weight_file(path, i, "weights");
        const auto b = weight_file(path, i, "bias");
        out << " kernel=" << l.conv.kernel << " stride=" << l.conv.stride << " in=" << l.conv.in_channels
            << " out=" << l.conv.out_channels << " weights=" << w << " bias=" << b;
        write_tensor(conv_weight_tensor(l.conv), path.parent_path() / w);
        write_tensor(conv_bias_tensor(l.conv), path.parent_path() / b);
        break;
      }
      case LayerKind::kRelu: break;
      case LayerKind::kUpsample: out << " factor=" << l.factor; break;
      case LayerKind::kConcat: out << " source=" << l.source; break;
    }
    out << '\n';
  }
  const std::string text = out.str();
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

NetworkSpec load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kNetworkFormat) throw Error(ErrorCode::kBadVersion, "version mismatch: '" + line + "'");

  NetworkSpec spec;
  long long declared_layers = -1;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "input_channels") {
      std::string v;
      ls >> v;
      spec.input_channels = static_cast<int>(parse_int(v));
      continue;
    }
    if (tag == "layers") {
      std::string v;
      ls >> v;
      declared_layers = parse_int(v);
      continue;
    }
    if (tag != "layer") throw Error(ErrorCode::kParse, "unexpected record '" + tag + "'");
    std::string kind;
    ls >> kind;
    std::map<std::string, std::string> attrs;
    std::string tok;
    while (ls >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::kParse, "bad layer attribute '" + tok + "'");
      attrs[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    auto attr = [&](const std::string& k) -> const std::string& {
      auto it = attrs.find(k);
      if (it == attrs.end()) throw Error(ErrorCode::kParse, "layer missing '" + k + "'");
      return it->second;
    };
    if (kind == "conv") {
      ConvLayer c;
      c.kernel = static_cast<int>(parse_int(attr("kernel")));
      c.stride = static_cast<int>(parse_int(attr("stride")));
      c.in_channels = static_cast<int>(parse_int(attr("in")));
      c.out_channels = static_cast<int>(parse_int(attr("out")));
      const Tensor w = read_tensor(path.parent_path() / attr("weights"));
      const Tensor b = read_tensor(path.parent_path() / attr("bias"));
      const std::vector<std::uint32_t> wdims = {
          static_cast<std::uint32_t>(c.out_channels), static_cast<std::uint32_t>(c.kernel),
          static_cast<std::uint32_t>(c.kernel), static_cast<std::uint32_t>(c.in_channels)};
      if (w.dims != wdims || b.dims != std::vector<std::uint32_t>{static_cast<std::uint32_t>(c.out_channels)}) {
        throw Error(ErrorCode::kChannelMismatch,
                    "layer " + std::to_string(spec.layers.size()) + ": weight dims do not match header");
      }
      c.weights.assign(w.data.begin(), w.data.end());
      c.bias.assign(b.data.begin(), b.data.end());
      spec.layers.push_back(Layer::make_conv(std::move(c)));
    } else if (kind == "relu") {
      spec.layers.push_back(Layer::relu());
    } else if (kind == "upsample") {
      spec.layers.push_back(Layer::upsample(static_cast<int>(parse_int(attr("factor")))));
    } else if (kind == "concat") {
      spec.layers.push_back(Layer::concat(static_cast<int>(parse_int(attr("source")))));
    } else {
      throw Error(ErrorCode::kParse, "unknown layer kind '" + kind + "'");
    }
  }
  if (declared_layers != static_cast<long long>(spec.layers.size())) {
    throw Error(ErrorCode::kParse, "layer count does not match header");
  }
  spec.validate();
  return spec;
}

std::uint64_t network_checksum(const NetworkSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& l : spec.layers) {
    if (l.kind != LayerKind::kConv) continue;
    h = fnv1a64(encode_tensor(conv_weight_tensor(l.conv)), h);
    h = fnv1a64(encode_tensor(conv_bias_tensor(l.conv)), h);
  }
  return h;
}

}  // namespace volex
