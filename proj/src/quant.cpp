#include "qlstm/quant.hpp"

#include <cmath>
#include <charconv>
#include <string_view>

namespace qlstm {

namespace {

int parse_positive_int(std::string_view part, const std::string& whole) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
  if (ec != std::errc{} || ptr != part.data() + part.size() || value < 1) {
    throw ConfigError("precision '" + whole + "': '" + std::string(part) +
                      "' is not a positive integer");
  }
  return value;
}

}  // namespace

QuantSpec make_signed_spec(int bits) {
  if (bits < 2) {
    throw QuantError("signed grid needs at least 2 bits, got " + std::to_string(bits));
  }
  const int f = bits - 1;
  const double step = std::exp2(-f);
  return {bits, f, -1.0, 1.0 - step, Signedness::kSigned};
}

QuantSpec make_unsigned_spec(int bits) {
  if (bits < 1) {
    throw QuantError("unsigned grid needs at least 1 bit, got " + std::to_string(bits));
  }
  const int f = bits;
  const double step = std::exp2(-f);
  return {bits, f, 0.0, 1.0 - step, Signedness::kUnsigned};
}

QuantSpec make_cell_spec(int bits) {
  if (bits < 4) {
    throw QuantError("cell grid needs at least 4 bits, got " + std::to_string(bits));
  }
  const int f = bits - 4;
  const double step = std::exp2(-f);
  return {bits, f, -8.0, 8.0 - step, Signedness::kSigned};
}

std::int64_t quantize_to_code(double x, const QuantSpec& spec) {
  if (!std::isfinite(x)) {
    throw QuantError("quantize: input is not finite");
  }
  const double scale = std::exp2(spec.fraction_bits);
  // Round, then clip in the double domain so huge inputs cannot overflow
  // the integer code.
  double code = std::round(x * scale);
  const double min_code = spec.min_value * scale;
  const double max_code = spec.max_value * scale;
  if (code < min_code) code = min_code;
  if (code > max_code) code = max_code;
  return static_cast<std::int64_t>(code);
}

double quantize(double x, const QuantSpec& spec) {
  return std::ldexp(static_cast<double>(quantize_to_code(x, spec)),
                    -spec.fraction_bits);
}

std::int64_t grid_size(const QuantSpec& spec) {
  const double scale = std::exp2(spec.fraction_bits);
  return static_cast<std::int64_t>(spec.max_value * scale) -
         static_cast<std::int64_t>(spec.min_value * scale) + 1;
}

bool on_grid(double x, const QuantSpec& spec) {
  return std::isfinite(x) && quantize(x, spec) == x;
}

double binarize_activation(double x) {
  if (!std::isfinite(x)) {
    throw QuantError("binarize: input is not finite");
  }
  return x < 0.0 ? -1.0 : 1.0;
}

BinaryWeightSpec make_binary_weight_spec(std::size_t cells, std::size_t inputs) {
  if (cells < 1 || inputs < 1) {
    throw QuantError("binary weight scale needs cells >= 1 and inputs >= 1");
  }
  return {1.0 / std::sqrt(static_cast<double>(cells + inputs))};
}

double binarize_weight(double x, const BinaryWeightSpec& spec) {
  return binarize_activation(x) * spec.scaling_factor;
}

double binarize_weight(double x, std::size_t cells, std::size_t inputs) {
  return binarize_weight(x, make_binary_weight_spec(cells, inputs));
}

std::vector<double> quantize_tensor(std::span<const double> values,
                                    const QuantPolicy& policy) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    try {
      out[i] = std::visit(
          [&](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, QuantSpec>) {
              return quantize(values[i], p);
            } else if constexpr (std::is_same_v<P, BinaryWeightSpec>) {
              return binarize_weight(values[i], p);
            } else {
              return binarize_activation(values[i]);
            }
          },
          policy);
    } catch (const Error& e) {
      throw QuantError("element " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

double quantize_signed_activation(double x, int bits) {
  if (bits == 1) {
    return binarize_activation(x);
  }
  return quantize(x, make_signed_spec(bits));
}

PrecisionConfig make_precision(int weight_bits, int output_bits, int input_bits) {
  return make_precision(weight_bits, output_bits, input_bits, output_bits);
}

PrecisionConfig make_precision(int weight_bits, int output_bits, int input_bits,
                               int recurrent_bits) {
  PrecisionConfig config;
  config.weight_bits = weight_bits;
  config.output_bits = output_bits;
  config.input_bits = input_bits;
  config.recurrent_bits = recurrent_bits;
  validate(config);
  return config;
}

void validate(const PrecisionConfig& config) {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("precision: ") + what);
  };
  require(config.weight_bits >= 1, "weight bits must be >= 1");
  require(config.output_bits >= 1, "output-activation bits must be >= 1");
  require(config.input_bits >= 1, "input-activation bits must be >= 1");
  require(config.recurrent_bits >= 1, "recurrent-activation bits must be >= 1");
  require(config.cell_bits >= 4, "cell bits must be >= 4");
  require(config.fc_weight_bits >= 2, "output-layer weight bits must be >= 2");
}

PrecisionConfig parse_precision(const std::string& text) {
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
  if (parts.size() != 3 && parts.size() != 4) {
    throw ConfigError("precision '" + text +
                      "': expected W/A/I or W/A/I/R with 3 or 4 fields");
  }
  const int w = parse_positive_int(parts[0], text);
  const int a = parse_positive_int(parts[1], text);
  const int i = parse_positive_int(parts[2], text);
  const int r = parts.size() == 4 ? parse_positive_int(parts[3], text) : a;
  return make_precision(w, a, i, r);
}

std::string precision_label(const PrecisionConfig& config) {
  std::string label = std::to_string(config.weight_bits) + "/" +
                      std::to_string(config.output_bits) + "/" +
                      std::to_string(config.input_bits);
  if (config.recurrent_bits != config.output_bits) {
    label += "/" + std::to_string(config.recurrent_bits);
  }
  return label;
}

}  // namespace qlstm
