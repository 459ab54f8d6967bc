#include "qlstm/lstm.hpp"

#include <cmath>
#include <limits>

namespace qlstm {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_gate_shapes(const GateParams& gate, std::size_t hidden, std::size_t input,
                       const char* name) {
  if (gate.input_weights.rows != hidden || gate.input_weights.cols != input ||
      gate.recurrent_weights.rows != hidden || gate.recurrent_weights.cols != hidden ||
      gate.bias.size() != hidden) {
    throw DimensionError(std::string("lstm: inconsistent shapes in ") + name + " gate");
  }
}

void check_direction(const LstmDirectionParams& params) {
  const std::size_t hidden = params.hidden_size();
  const std::size_t input = params.input_size();
  check_gate_shapes(params.candidate, hidden, input, "candidate");
  check_gate_shapes(params.input_gate, hidden, input, "input");
  check_gate_shapes(params.forget_gate, hidden, input, "forget");
  check_gate_shapes(params.output_gate, hidden, input, "output");
}

// Fixed accumulation order: input block, recurrent block, bias.
double preactivation(const GateParams& gate, std::size_t cell,
                     std::span<const double> input, const Vector& prev_output) {
  double acc = 0.0;
  const auto w = gate.input_weights.row(cell);
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i] * input[i];
  }
  const auto r = gate.recurrent_weights.row(cell);
  for (std::size_t h = 0; h < r.size(); ++h) {
    acc += r[h] * prev_output[h];
  }
  return acc + gate.bias[cell];
}

void check_columns(const std::vector<Vector>& columns, std::size_t input_size) {
  for (std::size_t t = 0; t < columns.size(); ++t) {
    if (columns[t].size() != input_size) {
      throw DimensionError("column " + std::to_string(t) + " has " +
                           std::to_string(columns[t].size()) + " pixels, expected " +
                           std::to_string(input_size));
    }
  }
}

}  // namespace

LstmState initial_state(std::size_t hidden_size) {
  return {Vector(hidden_size, 0.0), Vector(hidden_size, 0.0)};
}

CellStep lstm_cell_step(const LstmDirectionParams& params, std::span<const double> input,
                        const LstmState& prev, const PrecisionConfig& precision) {
  check_direction(params);
  const std::size_t hidden = params.hidden_size();
  if (input.size() != params.input_size()) {
    throw DimensionError("lstm: input column has " + std::to_string(input.size()) +
                         " values, expected " + std::to_string(params.input_size()));
  }
  if (prev.output.size() != hidden || prev.cell.size() != hidden) {
    throw DimensionError("lstm: state size does not match hidden size");
  }
  validate(precision);

  const QuantSpec gate_spec = make_unsigned_spec(precision.output_bits);
  const QuantSpec cell_spec = make_cell_spec(precision.cell_bits);
  const bool shared_output = precision.recurrent_bits == precision.output_bits;

  CellStep step;
  step.state.output.resize(hidden);
  step.state.cell.resize(hidden);
  step.output.resize(hidden);

  for (std::size_t j = 0; j < hidden; ++j) {
    const double candidate = quantize_signed_activation(
        std::tanh(preactivation(params.candidate, j, input, prev.output)),
        precision.output_bits);
    const double in_gate =
        quantize(sigmoid(preactivation(params.input_gate, j, input, prev.output)), gate_spec);
    const double forget_gate =
        quantize(sigmoid(preactivation(params.forget_gate, j, input, prev.output)), gate_spec);
    const double out_gate =
        quantize(sigmoid(preactivation(params.output_gate, j, input, prev.output)), gate_spec);

    const double cell =
        quantize(in_gate * candidate + forget_gate * prev.cell[j], cell_spec);
    const double hidden_act = quantize_signed_activation(std::tanh(cell), precision.output_bits);
    const double raw_output = out_gate * hidden_act;

    step.state.cell[j] = cell;
    step.output[j] = quantize_signed_activation(raw_output, precision.output_bits);
    step.state.output[j] = shared_output
                               ? step.output[j]
                               : quantize_signed_activation(raw_output, precision.recurrent_bits);
  }
  return step;
}

AffineParams fold_batchnorm(const AffineParams& fc, const BatchNormParams& bn) {
  const std::size_t classes = fc.weights.rows;
  const std::size_t features = fc.weights.cols;
  if (fc.bias.size() != classes) {
    throw DimensionError("fold: bias size does not match weight rows");
  }
  if (bn.gamma.size() != features || bn.beta.size() != features ||
      bn.mean.size() != features || bn.variance.size() != features) {
    throw DimensionError("fold: batch-norm vectors do not match weight columns");
  }

  Vector scale(features);
  Vector shift(features);
  for (std::size_t j = 0; j < features; ++j) {
    const double denom_sq = bn.variance[j] + bn.epsilon;
    if (!(denom_sq > 0.0)) {
      throw Error("fold: variance + epsilon must be positive at feature " +
                  std::to_string(j));
    }
    const double inv = 1.0 / std::sqrt(denom_sq);
    scale[j] = bn.gamma[j] * inv;
    shift[j] = bn.beta[j] - bn.gamma[j] * bn.mean[j] * inv;
  }

  AffineParams folded;
  folded.weights = Matrix(classes, features);
  folded.bias = fc.bias;
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t j = 0; j < features; ++j) {
      folded.weights(k, j) = fc.weights(k, j) * scale[j];
      folded.bias[k] += fc.weights(k, j) * shift[j];
    }
  }
  return folded;
}

OutputLayerParams quantize_output_layer(const AffineParams& folded, int fc_weight_bits) {
  const QuantSpec spec = make_signed_spec(fc_weight_bits);
  OutputLayerParams params;
  params.weights = Matrix(folded.weights.rows, folded.weights.cols);
  params.weights.data = quantize_tensor(folded.weights.data, spec);
  params.bias = folded.bias;
  return params;
}

Matrix bilstm_forward(const NetworkModel& model, const std::vector<Vector>& columns,
                      const PrecisionConfig& precision) {
  check_columns(columns, model.input_size);
  const std::size_t hidden = model.hidden_size;
  const std::size_t count = columns.size();

  Matrix features(count, 2 * hidden);

  LstmState state = initial_state(hidden);
  for (std::size_t t = 0; t < count; ++t) {
    CellStep step = lstm_cell_step(model.forward, columns[t], state, precision);
    for (std::size_t j = 0; j < hidden; ++j) {
      features(t, j) = step.output[j];
    }
    state = std::move(step.state);
  }

  state = initial_state(hidden);
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t t = count - 1 - s;  // right-to-left traversal
    CellStep step = lstm_cell_step(model.backward, columns[t], state, precision);
    for (std::size_t j = 0; j < hidden; ++j) {
      features(t, hidden + j) = step.output[j];
    }
    state = std::move(step.state);
  }
  return features;
}

InterleavedResult interleaved_forward(const NetworkModel& model,
                                      const std::vector<Vector>& columns,
                                      const PrecisionConfig& precision) {
  check_columns(columns, model.input_size);
  const std::size_t hidden = model.hidden_size;
  const std::size_t count = columns.size();

  InterleavedResult result;
  result.features = Matrix(count, 2 * hidden);
  result.available_at_round.resize(count);
  result.cell_evaluations = 2 * count;

  LstmState fw_state = initial_state(hidden);
  LstmState bw_state = initial_state(hidden);
  for (std::size_t r = 0; r < count; ++r) {
    // One round keeps the shared datapath busy with two independent
    // timesteps: forward column r, then backward column C-1-r.
    CellStep fw = lstm_cell_step(model.forward, columns[r], fw_state, precision);
    for (std::size_t j = 0; j < hidden; ++j) {
      result.features(r, j) = fw.output[j];
    }
    fw_state = std::move(fw.state);

    const std::size_t bw_col = count - 1 - r;
    CellStep bw = lstm_cell_step(model.backward, columns[bw_col], bw_state, precision);
    for (std::size_t j = 0; j < hidden; ++j) {
      result.features(bw_col, hidden + j) = bw.output[j];
    }
    bw_state = std::move(bw.state);
  }

  for (std::size_t t = 0; t < count; ++t) {
    // Forward covers column t in round t+1, backward in round C-t; the
    // concatenator holds partial rows until the later of the two.
    result.available_at_round[t] = std::max(t + 1, count - t);
  }
  return result;
}

Matrix output_layer(const Matrix& features, const OutputLayerParams& params) {
  if (features.cols != params.weights.cols) {
    throw DimensionError("output layer: feature width " + std::to_string(features.cols) +
                         " != weight columns " + std::to_string(params.weights.cols));
  }
  const std::size_t classes = params.weights.rows;
  if (params.bias.size() != classes) {
    throw DimensionError("output layer: bias size does not match class count");
  }

  Matrix logits(features.rows, classes);
  for (std::size_t t = 0; t < features.rows; ++t) {
    const auto z = features.row(t);
    for (std::size_t k = 0; k < classes; ++k) {
      double acc = 0.0;
      const auto w = params.weights.row(k);
      for (std::size_t j = 0; j < z.size(); ++j) {
        acc += w[j] * z[j];
      }
      logits(t, k) = acc + params.bias[k];
    }
  }
  return logits;
}

std::size_t argmax_index(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) {
      best = i;
    }
  }
  return best;
}

std::string greedy_decode(const Matrix& logits, const std::vector<std::string>& alphabet,
                          std::size_t blank_index) {
  if (logits.rows > 0 && logits.cols != alphabet.size()) {
    throw DimensionError("decode: logit width " + std::to_string(logits.cols) +
                         " != alphabet size " + std::to_string(alphabet.size()));
  }
  if (blank_index >= alphabet.size()) {
    throw DimensionError("decode: blank index out of range");
  }

  std::string decoded;
  std::size_t previous = std::numeric_limits<std::size_t>::max();
  for (std::size_t t = 0; t < logits.rows; ++t) {
    const std::size_t index = argmax_index(logits.row(t));
    if (index != previous && index != blank_index) {
      decoded += alphabet[index];
    }
    previous = index;
  }
  return decoded;
}

std::vector<Vector> quantize_columns(const std::vector<Vector>& columns, int input_bits) {
  const QuantSpec spec = make_unsigned_spec(input_bits);
  std::vector<Vector> out(columns.size());
  for (std::size_t t = 0; t < columns.size(); ++t) {
    out[t] = quantize_tensor(columns[t], spec);
  }
  return out;
}

std::string infer(const NetworkModel& model, const std::vector<Vector>& columns,
                  const PrecisionConfig& precision) {
  const std::vector<Vector> quantized = quantize_columns(columns, precision.input_bits);
  const Matrix features = bilstm_forward(model, quantized, precision);
  const Matrix logits = output_layer(features, model.output);
  return greedy_decode(logits, model.alphabet, kBlankIndex);
}

}  // namespace qlstm
