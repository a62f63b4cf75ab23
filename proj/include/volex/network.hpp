#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "volex/feature_map.hpp"

namespace volex {

enum class LayerKind { kConv, kRelu, kUpsample, kConcat };

const char* layer_kind_name(LayerKind kind);

// Square convolution with zero padding kernel/2 (odd kernels), so the output
// grid is ceil(H/stride) × ceil(W/stride).
struct ConvLayer {
  int kernel = 1;
  int stride = 1;
  int in_channels = 0;
  int out_channels = 0;
  std::vector<double> weights;  // [out][ky][kx][in]
  std::vector<double> bias;     // [out]

  double weight(int o, int ky, int kx, int i) const {
    return weights[((static_cast<std::size_t>(o) * kernel + ky) * kernel + kx) * in_channels + i];
  }
};

// Source id for a concat merge that reads the network input.
inline constexpr int kNetworkInput = -1;

struct Layer {
  LayerKind kind = LayerKind::kRelu;
  ConvLayer conv;   // kConv
  int factor = 1;   // kUpsample (nearest neighbour)
  int source = 0;   // kConcat: earlier layer id or kNetworkInput

  static Layer make_conv(ConvLayer c);
  static Layer relu();
  static Layer upsample(int factor);
  static Layer concat(int source);

  bool operator==(const Layer& other) const;
};

struct NetworkSpec {
  int input_channels = 3;
  std::vector<Layer> layers;

  // Channel count after each layer; throws kChannelMismatch on inconsistent
  // arithmetic or a concat that does not read an earlier layer.
  std::vector<int> channel_plan() const;
  void validate() const { (void)channel_plan(); }
  int feature_channels() const { return channel_plan().back(); }
  int total_stride() const;
  int merge_count() const;

  bool operator==(const NetworkSpec& other) const = default;
};

// Per-layer outputs of one forward pass. For concat layers `valid` holds the
// indicator (1 = original, 0 = padded) of the merged branch at the output
// grid; it is empty for every other layer.
struct ActivationTrace {
  FeatureMap input;
  std::vector<FeatureMap> outputs;
  std::vector<std::vector<std::uint8_t>> valid;

  const FeatureMap& features() const { return outputs.back(); }
  // Output of layer `id`, or the network input for kNetworkInput.
  const FeatureMap& activation(int id) const { return id == kNetworkInput ? input : outputs[id]; }
};

// Input is H×W×input_channels with H and W divisible by total_stride().
// A concat merge joins [current | source] along channels at the source grid;
// when the current branch is smaller it is edge-replicate padded.
ActivationTrace forward(const NetworkSpec& spec, const FeatureMap& input);

// Configurable toy backbone:
//   conv3x3/s2(3->8) relu conv3x3/s2(8->16) relu conv3x3/s2(16->32) relu
//   then `merges` stages of [upsample x2, concat(skip), conv1x1, relu], with
//   the trailing relu dropped so features stay signed. merges=2 gives net
//   stride 2; merges=0 gives stride 8 with a final conv1x1(32->C); merges=3
//   adds a full-resolution merge with the input. Biases are zero, so the
//   network is positively homogeneous and a zero image maps to zero features.
struct ReferenceNetworkOptions {
  std::uint64_t seed = 42;
  int merges = 2;
  int feature_channels = 16;
};

NetworkSpec reference_network(const ReferenceNetworkOptions& options = {});

// Seeded uniform init in (-1/sqrt(fan_in), 1/sqrt(fan_in)), rounded to float
// so that save/load round-trips exactly. Biases are zero unless requested.
ConvLayer random_conv(int kernel, int stride, int in_channels, int out_channels,
                      std::uint64_t seed, bool with_bias = false);

// Text header listing the layers; weights in sibling "CAVT" files
// `<stem>.L<i>.weights.cavt` / `<stem>.L<i>.bias.cavt`.
void save_network(const NetworkSpec& spec, const std::filesystem::path& path);
NetworkSpec load_network(const std::filesystem::path& path);

// FNV-1a over the encoded weight and bias tensors in layer order.
std::uint64_t network_checksum(const NetworkSpec& spec);

}  // namespace volex
