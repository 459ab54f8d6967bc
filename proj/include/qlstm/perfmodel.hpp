#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "qlstm/errors.hpp"
#include "qlstm/quant.hpp"

namespace qlstm {

/// Capacity of one 36 Kb memory block; wider blocks count as multiples.
inline constexpr std::uint64_t kBlockBits = 36864;

struct NetworkDims {
  std::size_t input_size = 0;   // pixels per column
  std::size_t hidden_size = 0;  // memory cells per direction
  std::size_t num_classes = 0;  // output-layer units
};

/// Parallelism knobs of the cell datapath. pe replicates the cell;
/// the two simd widths split each gate dot product over
/// fold = input/simd_input = hidden/simd_recurrent cycles.
struct FoldingConfig {
  std::size_t pe = 1;
  std::size_t simd_input = 1;
  std::size_t simd_recurrent = 1;
  std::size_t pipeline_depth = 0;  // fixed latency added to every run
  double frequency_mhz = 200.0;
};

/// Parse "PE/SIMD_INPUT/SIMD_RECURRENT". Throws ConfigError.
FoldingConfig parse_folding(const std::string& text);
std::string folding_label(const FoldingConfig& config);

struct OpCount {
  std::uint64_t bilstm_ops = 0;
  std::uint64_t output_ops = 0;
  std::uint64_t total() const { return bilstm_ops + output_ops; }
};

/// Multiply and add counted separately, both directions, all columns:
///   bilstm = [2*4*(H+I) + 8] * H * 2 * C
///   output = [2*(2*H) + 1] * K * C
OpCount op_count(const NetworkDims& dims, std::size_t columns);

/// Cycles per completed gate dot product. Requires simd_input | input,
/// simd_recurrent | hidden, and equal quotients. Throws ConfigError.
std::size_t fold_factor(const FoldingConfig& config, const NetworkDims& dims);

/// cycles = 2*C * (H/pe) * fold + pipeline_depth. The 2*C term is the
/// interleaved bidirectional schedule; the output layer and decoder are
/// assumed fully overlapped with the hidden layer.
std::uint64_t cycle_estimate(const NetworkDims& dims, const FoldingConfig& config,
                             std::size_t columns);

/// total_ops / runtime / 1e9, runtime = cycles / (frequency_mhz * 1e6).
double throughput_gops(const OpCount& ops, std::uint64_t cycles, double frequency_mhz);

struct MemoryEstimate {
  std::uint64_t weight_bits = 0;
  std::uint64_t memory_blocks = 0;  // ceil(weight_bits / kBlockBits)
};

/// Weight storage only (biases folded into the per-gate fan-in):
///   lstm bits = 2 * 4 * (I + H + 1) * H * WQ
///   fc bits   = (2H + 1) * K * fc_weight_bits
/// Activation and concatenator buffers are excluded; the estimate is a
/// lower bound on placed memory.
MemoryEstimate memory_estimate(const NetworkDims& dims, const PrecisionConfig& precision);

struct SimReport {
  OpCount ops;
  std::size_t fold = 0;
  std::uint64_t cycles = 0;
  double runtime_s = 0.0;
  double gops = 0.0;
  MemoryEstimate memory;
};

/// Compose the estimators for one design point. columns == 0 yields zero
/// ops and pipeline_depth cycles.
SimReport simulate(const NetworkDims& dims, const PrecisionConfig& precision,
                   const FoldingConfig& config, std::size_t columns);

}  // namespace qlstm
