#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lge/adam.hpp"
#include "lge/grid.hpp"
#include "lge/prng.hpp"

/// MiniSegNet: a two-level U-Net-style encoder/decoder with hand-written
/// forward and backward passes.
///
///   in(2) -conv1-> 8 -relu-> pool -conv2-> 16 -relu-> pool -conv3-> 16 -relu
///   up(16) ++ conv2 act(16) -conv4-> 8 -relu
///   up(8)  ++ conv1 act(8)  -conv5-> 8 -relu -conv6(1x1)-> 1 -sigmoid
///
/// Channel 0 of the input is the image, channel 1 the myocardium mask.
namespace lge::segnet {

struct LayerSpec {
  const char* name;
  int in_channels;
  int out_channels;
  int kernel;
};

inline constexpr std::array<LayerSpec, 6> kLayers{{
    {"conv1", 2, 8, 3},
    {"conv2", 8, 16, 3},
    {"conv3", 16, 16, 3},
    {"conv4", 32, 8, 3},
    {"conv5", 16, 8, 3},
    {"conv6", 8, 1, 1},
}};

constexpr std::size_t layer_param_count(const LayerSpec& l) {
  return static_cast<std::size_t>(l.out_channels) * l.in_channels * l.kernel * l.kernel +
         l.out_channels;
}

constexpr std::size_t architecture_param_count() {
  std::size_t n = 0;
  for (const auto& l : kLayers) n += layer_param_count(l);
  return n;
}

inline constexpr std::size_t kParamCount = architecture_param_count();
inline constexpr int kTensorCount = 2 * static_cast<int>(kLayers.size());
inline constexpr int kDefaultSize = 64;

/// Canonical order: conv1 kernel, conv1 bias, conv2 kernel, ... conv6 bias.
/// Kernels are stored as Grid(out, in, k*k); biases as Grid(out, 1, 1).
struct ModelParams {
  std::vector<Grid> tensors;

  /// Zero-valued parameters with the architecture's shapes.
  static ModelParams zeros();

  const Grid& kernel(int layer) const { return tensors[2 * layer]; }
  const Grid& bias(int layer) const { return tensors[2 * layer + 1]; }
  Grid& kernel(int layer) { return tensors[2 * layer]; }
  Grid& bias(int layer) { return tensors[2 * layer + 1]; }

  [[nodiscard]] std::size_t count() const;
  [[nodiscard]] std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  /// Round every value to the nearest single-precision float.
  void quantize_to_float();
  /// Decay applies to kernels only.
  [[nodiscard]] static std::array<bool, kTensorCount> decay_mask();
  [[nodiscard]] static std::string tensor_name(int index);
  [[nodiscard]] std::uint64_t fingerprint() const;

  bool operator==(const ModelParams&) const = default;
};

/// He-uniform kernels, bound sqrt(6 / fan_in); zero biases.
ModelParams init_params(PrngStream& stream);

/// Intermediate state kept for the backward pass.
struct ForwardTrace {
  int size = 0;
  std::uint64_t params_fingerprint = 0;
  Grid input;        // 2 x S x S
  Grid act1;         // 8 x S x S (post-ReLU, conv1)
  Grid pool1;        // 8 x S/2
  std::vector<int> pool1_argmax;
  Grid act2;         // 16 x S/2
  Grid pool2;        // 16 x S/4
  std::vector<int> pool2_argmax;
  Grid act3;         // 16 x S/4
  Grid cat4;         // 32 x S/2 (upsampled act3 ++ act2)
  Grid act4;         // 8 x S/2
  Grid cat5;         // 16 x S (upsampled act4 ++ act1)
  Grid act5;         // 8 x S
  Grid prob;         // 1 x S x S, sigmoid output
};

struct ForwardResult {
  Grid prob;
  ForwardTrace trace;
};

/// Requires image and myo of shape 1 x size x size with size a positive
/// multiple of 4 (64 for real data; tests use smaller resolutions).
ForwardResult forward(const ModelParams& params, const Grid& image, const Grid& myo,
                      int size = kDefaultSize);

/// Probability map only.
Grid predict(const ModelParams& params, const Grid& image, const Grid& myo,
             int size = kDefaultSize);

/// Parameter gradients in canonical order for upstream gradient dL/dY.
/// Throws InvalidState if `trace` came from different parameters.
std::vector<Grid> backward(const ModelParams& params, const ForwardTrace& trace,
                           const Grid& grad_prob);

// Checkpoint file.

struct Checkpoint {
  ModelParams params;
  std::optional<AdamState> adam;  // moments and step; hyperparameters defaulted
};

void save_checkpoint(const ModelParams& params, const AdamState* adam,
                     const std::filesystem::path& path);
std::vector<std::uint8_t> encode_checkpoint(const ModelParams& params,
                                            const AdamState* adam);
Checkpoint load_checkpoint(const std::filesystem::path& path);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes,
                             const std::string& origin = "<memory>");

}  // namespace lge::segnet
