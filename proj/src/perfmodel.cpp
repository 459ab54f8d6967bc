#include "qlstm/perfmodel.hpp"

#include <charconv>
#include <string_view>

namespace qlstm {

namespace {

std::size_t parse_size(std::string_view part, const std::string& whole) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
  if (ec != std::errc{} || ptr != part.data() + part.size() || value < 1) {
    throw ConfigError("folding '" + whole + "': '" + std::string(part) +
                      "' is not a positive integer");
  }
  return value;
}

void check_dims(const NetworkDims& dims) {
  if (dims.input_size < 1 || dims.hidden_size < 1 || dims.num_classes < 1) {
    throw ConfigError("network dims must all be >= 1");
  }
}

}  // namespace

FoldingConfig parse_folding(const std::string& text) {
  std::vector<std::string_view> parts;
  std::string_view rest = text;
  while (true) {
    const auto slash = rest.find('/');
    if (slash == std::string_view::npos) {
      parts.push_back(rest);
      break;
    }
    parts.push_back(rest.substr(0, slash));
    rest = rest.substr(slash + 1);
  }
  if (parts.size() != 3) {
    throw ConfigError("folding '" + text + "': expected PE/SIMD_INPUT/SIMD_RECURRENT");
  }
  FoldingConfig config;
  config.pe = parse_size(parts[0], text);
  config.simd_input = parse_size(parts[1], text);
  config.simd_recurrent = parse_size(parts[2], text);
  return config;
}

std::string folding_label(const FoldingConfig& config) {
  return std::to_string(config.pe) + "/" + std::to_string(config.simd_input) + "/" +
         std::to_string(config.simd_recurrent);
}

OpCount op_count(const NetworkDims& dims, std::size_t columns) {
  check_dims(dims);
  const std::uint64_t h = dims.hidden_size;
  const std::uint64_t i = dims.input_size;
  const std::uint64_t k = dims.num_classes;
  const std::uint64_t c = columns;
  OpCount ops;
  ops.bilstm_ops = (2 * 4 * (h + i) + 8) * h * 2 * c;
  ops.output_ops = (2 * (2 * h) + 1) * k * c;
  return ops;
}

std::size_t fold_factor(const FoldingConfig& config, const NetworkDims& dims) {
  check_dims(dims);
  if (config.simd_input < 1 || config.simd_recurrent < 1) {
    throw ConfigError("folding: simd widths must be >= 1");
  }
  if (dims.input_size % config.simd_input != 0) {
    throw ConfigError("folding: simd_input " + std::to_string(config.simd_input) +
                      " does not divide input size " + std::to_string(dims.input_size));
  }
  if (dims.hidden_size % config.simd_recurrent != 0) {
    throw ConfigError("folding: simd_recurrent " + std::to_string(config.simd_recurrent) +
                      " does not divide hidden size " + std::to_string(dims.hidden_size));
  }
  const std::size_t input_fold = dims.input_size / config.simd_input;
  const std::size_t recurrent_fold = dims.hidden_size / config.simd_recurrent;
  if (input_fold != recurrent_fold) {
    throw ConfigError("folding: input fold " + std::to_string(input_fold) +
                      " != recurrent fold " + std::to_string(recurrent_fold));
  }
  return input_fold;
}

std::uint64_t cycle_estimate(const NetworkDims& dims, const FoldingConfig& config,
                             std::size_t columns) {
  const std::size_t fold = fold_factor(config, dims);
  if (config.pe < 1 || dims.hidden_size % config.pe != 0) {
    throw ConfigError("folding: pe " + std::to_string(config.pe) +
                      " does not divide hidden size " + std::to_string(dims.hidden_size));
  }
  const std::uint64_t cells_per_pe = dims.hidden_size / config.pe;
  return 2ull * columns * cells_per_pe * fold + config.pipeline_depth;
}

double throughput_gops(const OpCount& ops, std::uint64_t cycles, double frequency_mhz) {
  if (cycles == 0) {
    throw ConfigError("throughput: cycle count must be positive");
  }
  if (!(frequency_mhz > 0.0)) {
    throw ConfigError("throughput: frequency must be positive");
  }
  const double runtime_s = static_cast<double>(cycles) / (frequency_mhz * 1e6);
  return static_cast<double>(ops.total()) / runtime_s / 1e9;
}

MemoryEstimate memory_estimate(const NetworkDims& dims, const PrecisionConfig& precision) {
  check_dims(dims);
  validate(precision);
  const std::uint64_t h = dims.hidden_size;
  const std::uint64_t i = dims.input_size;
  const std::uint64_t k = dims.num_classes;
  MemoryEstimate estimate;
  estimate.weight_bits =
      2 * 4 * (i + h + 1) * h * static_cast<std::uint64_t>(precision.weight_bits) +
      (2 * h + 1) * k * static_cast<std::uint64_t>(precision.fc_weight_bits);
  estimate.memory_blocks = (estimate.weight_bits + kBlockBits - 1) / kBlockBits;
  return estimate;
}

SimReport simulate(const NetworkDims& dims, const PrecisionConfig& precision,
                   const FoldingConfig& config, std::size_t columns) {
  SimReport report;
  report.ops = op_count(dims, columns);
  report.fold = fold_factor(config, dims);
  report.cycles = cycle_estimate(dims, config, columns);
  report.runtime_s = static_cast<double>(report.cycles) / (config.frequency_mhz * 1e6);
  report.gops = report.cycles == 0
                    ? 0.0
                    : throughput_gops(report.ops, report.cycles, config.frequency_mhz);
  report.memory = memory_estimate(dims, precision);
  return report;
}

}  // namespace qlstm
