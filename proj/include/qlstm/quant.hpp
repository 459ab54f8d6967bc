#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qlstm/errors.hpp"

namespace qlstm {

enum class Signedness { kSigned, kUnsigned };

/// A fixed-point grid with k total bits and f fraction bits. The
/// representable values are {min, min + 2^-f, ..., max}; max - min is an
/// exact multiple of 2^-f.
struct QuantSpec {
  int total_bits = 0;     // k
  int fraction_bits = 0;  // f
  double min_value = 0.0;
  double max_value = 0.0;
  Signedness signedness = Signedness::kSigned;
};

/// Signed grid for tanh-range values: f = k-1, range [-1, 1 - 2^-f].
/// Requires k >= 2; a 1-bit signed grid degenerates (use binarization).
QuantSpec make_signed_spec(int bits);

/// Unsigned grid for sigmoid-range values: f = k, range [0, 1 - 2^-f].
/// Requires k >= 1.
QuantSpec make_unsigned_spec(int bits);

/// Signed cell-state grid keeping 4 integer bits: f = k-4, range
/// [-8, 8 - 2^-f]. Requires k >= 4. The default 8-bit grid spans
/// [-8, 7.9375] with a step of 1/16.
QuantSpec make_cell_spec(int bits);

/// Snap x onto the grid: clip(round(x * 2^f) * 2^-f, min, max).
/// Rounding is half away from zero. Throws QuantError on non-finite x.
double quantize(double x, const QuantSpec& spec);

/// Integer code of quantize(x, spec): value = code * 2^-f.
std::int64_t quantize_to_code(double x, const QuantSpec& spec);

/// Number of representable values (2^k for the grids above).
std::int64_t grid_size(const QuantSpec& spec);

/// True iff x is exactly representable on the grid.
bool on_grid(double x, const QuantSpec& spec);

/// Sign binarization with sign(0) = +1. Result in {-1, +1}.
double binarize_activation(double x);

/// Layer-wise constant scale applied to binarized weights.
struct BinaryWeightSpec {
  double scaling_factor = 0.0;  // 1 / sqrt(cells + inputs)
};

/// scaling_factor = 1 / sqrt(cells + inputs); both counts must be >= 1.
BinaryWeightSpec make_binary_weight_spec(std::size_t cells, std::size_t inputs);

/// sign(x) * scaling_factor, sign(0) = +1. Result in {-s, +s}.
double binarize_weight(double x, const BinaryWeightSpec& spec);
double binarize_weight(double x, std::size_t cells, std::size_t inputs);

struct BinaryActivationPolicy {};

/// Element-wise policy: a fixed-point grid, binary weights with a layer
/// scale, or plain sign binarization.
using QuantPolicy = std::variant<QuantSpec, BinaryWeightSpec, BinaryActivationPolicy>;

/// Apply the matching scalar op to every element; shape (length) is
/// preserved. Scalar errors are rethrown with the offending index.
std::vector<double> quantize_tensor(std::span<const double> values,
                                    const QuantPolicy& policy);

/// Signed-path activation dispatch: bits == 1 binarizes to {-1, +1},
/// otherwise snaps onto the signed grid for that width.
double quantize_signed_activation(double x, int bits);

/// Bit-widths for every quantized aspect of the network. The sweep
/// grammar "W/A/I" or "W/A/I/R" fills the first four; recurrent_bits
/// defaults to output_bits. cell_bits and fc_weight_bits stay at their
/// 8-bit defaults everywhere except diagnostic sweeps that widen the
/// whole datapath.
struct PrecisionConfig {
  int weight_bits = 8;     // hidden-layer weights
  int output_bits = 8;     // activations fed to the output layer
  int input_bits = 8;      // image pixels
  int recurrent_bits = 8;  // activations fed back into the recurrence
  int cell_bits = 8;
  int fc_weight_bits = 8;
};

PrecisionConfig make_precision(int weight_bits, int output_bits, int input_bits);
PrecisionConfig make_precision(int weight_bits, int output_bits, int input_bits,
                               int recurrent_bits);

/// Throws ConfigError if any width is out of range.
void validate(const PrecisionConfig& config);

/// Parse "W/A/I" or "W/A/I/R" (positive integers). Throws ConfigError.
PrecisionConfig parse_precision(const std::string& text);

/// "W/A/I" when recurrent == output, else "W/A/I/R".
std::string precision_label(const PrecisionConfig& config);

}  // namespace qlstm
