#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qlstm/lstm.hpp"

namespace qlstm {

/// Full-precision network parameters as stored on disk, before any
/// quantization. The manifest is a JSON file declaring dims, the
/// alphabet (blank at index 0, stored as the empty string, every other
/// symbol a single code point) and the weight blob file. The blob holds
/// little-endian 32-bit floats, row-major, in the order
///   per direction (forward, then backward):
///     W_candidate W_input W_forget W_output   (each H x I)
///     R_candidate R_input R_forget R_output   (each H x H)
///     b_candidate b_input b_forget b_output   (each H)
///   output layer: fc weights (K x 2H), fc bias (K)
///   batch norm:   gamma beta mean variance (each 2H), epsilon (1)
struct RawNetworkParams {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  std::size_t num_classes = 0;
  LstmDirectionParams forward;
  LstmDirectionParams backward;
  AffineParams fc;
  BatchNormParams batch_norm;
  std::vector<std::string> alphabet;
};

/// Read manifest + blob. Throws ParseError naming the offending field.
RawNetworkParams load_raw_model(const std::filesystem::path& manifest_path);

/// Write manifest and weight blob (manifest stem + ".bin") next to each
/// other. Exact inverse of load_raw_model.
void save_model(const std::filesystem::path& manifest_path, const RawNetworkParams& raw);

/// Apply precision to the full-precision parameters: hidden-layer
/// weights snap onto the signed weight grid (or binarize with the
/// layer-wise 1/sqrt(H+I) scale at 1 bit), batch norm folds into the
/// output layer whose weights snap onto the fixed-width grid. Biases
/// keep full precision.
NetworkModel quantize_network(const RawNetworkParams& raw, const PrecisionConfig& precision);

/// load_raw_model + quantize_network. One file serves every precision.
NetworkModel load_model(const std::filesystem::path& manifest_path,
                        const PrecisionConfig& precision);

}  // namespace qlstm
