#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qlstm/errors.hpp"
#include "qlstm/matrix.hpp"
#include "qlstm/quant.hpp"

namespace qlstm {

/// One gate's parameters: rectangular input weights (H x I), square
/// recurrent weights (H x H) and a bias per cell. Biases stay at full
/// precision; the accumulator is exact, quantization happens at the
/// activation outputs and the cell-state writeback only.
struct GateParams {
  Matrix input_weights;
  Matrix recurrent_weights;
  Vector bias;
};

/// Parameters of one traversal direction. No peephole connections; the
/// fields are absent, not zeroed.
struct LstmDirectionParams {
  GateParams candidate;    // cell input path, tanh
  GateParams input_gate;   // sigmoid
  GateParams forget_gate;  // sigmoid
  GateParams output_gate;  // sigmoid

  std::size_t hidden_size() const { return candidate.input_weights.rows; }
  std::size_t input_size() const { return candidate.input_weights.cols; }
};

/// Recurrent state: output on the recurrent-activation grid, cell value
/// on the cell grid.
struct LstmState {
  Vector output;
  Vector cell;
};

/// Zero vectors of the right shape, the initial state of every sequence.
LstmState initial_state(std::size_t hidden_size);

/// One timestep's results. `state.output` is quantized for the
/// recurrence; `output` is quantized for the output layer. The two are
/// identical whenever the two activation widths agree.
struct CellStep {
  LstmState state;
  Vector output;
};

/// Single quantized timestep:
///   candidate = tanh(W x + R y' + b)   on the signed activation grid
///   i, f, o   = sigmoid(...)           on the unsigned activation grid
///   c         = i * candidate + f * c' on the cell grid (saturating)
///   y         = o * tanh(c),  tanh on the signed grid, then y snapped
///               onto the output and recurrent grids separately.
/// Accumulation order is fixed: input block, recurrent block, bias, each
/// ascending by index.
CellStep lstm_cell_step(const LstmDirectionParams& params, std::span<const double> input,
                        const LstmState& prev, const PrecisionConfig& precision);

/// Per-feature batch-norm parameters over the concatenated features.
struct BatchNormParams {
  Vector gamma;
  Vector beta;
  Vector mean;
  Vector variance;
  double epsilon = 0.0;
};

/// A plain affine map: logits = weights * z + bias.
struct AffineParams {
  Matrix weights;  // K x F
  Vector bias;     // K
};

/// Merge batch-norm into the affine map so that fc(bn(z)) == folded(z)
/// exactly in real arithmetic:
///   w'[k][j] = w[k][j] * gamma[j] / sqrt(var[j] + eps)
///   b'[k]    = b[k] + sum_j w[k][j] * (beta[j] - gamma[j]*mean[j]/sqrt(var[j]+eps))
/// Throws Error when var[j] + eps is not positive.
AffineParams fold_batchnorm(const AffineParams& fc, const BatchNormParams& bn);

/// Output layer with weights snapped onto the fixed-width grid; the
/// bias keeps full precision.
struct OutputLayerParams {
  Matrix weights;  // K x 2H
  Vector bias;     // K
};

OutputLayerParams quantize_output_layer(const AffineParams& folded, int fc_weight_bits);

/// Index of the blank symbol in every model alphabet.
inline constexpr std::size_t kBlankIndex = 0;

/// Weight-quantized bidirectional network plus the merged output layer.
/// Immutable after construction; concurrent inferences may share one
/// instance.
struct NetworkModel {
  std::size_t input_size = 0;   // I
  std::size_t hidden_size = 0;  // H
  std::size_t num_classes = 0;  // K
  LstmDirectionParams forward;
  LstmDirectionParams backward;
  OutputLayerParams output;
  std::vector<std::string> alphabet;  // K symbols, blank at kBlankIndex
};

/// Both traversals over the column sequence, concatenated per timestep:
/// row t holds [forward_t, backward_t], the backward sub-sequence taken
/// in reverse order so both halves describe column t. Initial states are
/// zero. Empty input gives a 0 x 2H result.
Matrix bilstm_forward(const NetworkModel& model, const std::vector<Vector>& columns,
                      const PrecisionConfig& precision);

/// Result of the interleaved single-datapath schedule. `features` is
/// element-wise identical to bilstm_forward. Round r (1-based) issues
/// forward timestep r-1 and backward timestep C-r on the shared cell
/// datapath; `available_at_round[t]` = max(t+1, C-t) is the round after
/// which both halves of column t exist in the concatenator buffer.
/// `cell_evaluations` counts individual cell invocations, 2*C.
struct InterleavedResult {
  Matrix features;
  std::vector<std::size_t> available_at_round;
  std::size_t cell_evaluations = 0;
};

InterleavedResult interleaved_forward(const NetworkModel& model,
                                      const std::vector<Vector>& columns,
                                      const PrecisionConfig& precision);

/// Affine map per column; no softmax, the decoder takes a plain maximum.
Matrix output_layer(const Matrix& features, const OutputLayerParams& params);

/// First maximal index (ties resolve to the lowest index).
std::size_t argmax_index(std::span<const double> values);

/// Best-path decoding: per-column argmax, collapse consecutive
/// duplicates, then drop blanks.
std::string greedy_decode(const Matrix& logits, const std::vector<std::string>& alphabet,
                          std::size_t blank_index);

/// Snap raw [0,1) pixel columns onto the unsigned input grid.
std::vector<Vector> quantize_columns(const std::vector<Vector>& columns, int input_bits);

/// quantize -> bilstm -> output layer -> greedy decode.
std::string infer(const NetworkModel& model, const std::vector<Vector>& columns,
                  const PrecisionConfig& precision);

}  // namespace qlstm
