#include "qlstm/model_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <set>

#include <json.hpp>

#include "qlstm/eval.hpp"

namespace qlstm {

namespace {

class FloatReader {
 public:
  FloatReader(std::vector<std::uint8_t> bytes, std::string name)
      : bytes_(std::move(bytes)), name_(std::move(name)) {
    if (bytes_.size() % 4 != 0) {
      throw ParseError("weights " + name_ + ": size is not a multiple of 4 bytes");
    }
  }

  std::size_t remaining() const { return (bytes_.size() - pos_) / 4; }

  double next(const char* field) {
    if (pos_ + 4 > bytes_.size()) {
      throw ParseError("weights " + name_ + ": truncated while reading " + field);
    }
    std::uint32_t u = static_cast<std::uint32_t>(bytes_[pos_]) |
                      (static_cast<std::uint32_t>(bytes_[pos_ + 1]) << 8) |
                      (static_cast<std::uint32_t>(bytes_[pos_ + 2]) << 16) |
                      (static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24);
    pos_ += 4;
    return static_cast<double>(std::bit_cast<float>(u));
  }

  Matrix next_matrix(std::size_t rows, std::size_t cols, const char* field) {
    Matrix m(rows, cols);
    for (double& v : m.data) {
      v = next(field);
    }
    return m;
  }

  Vector next_vector(std::size_t size, const char* field) {
    Vector v(size);
    for (double& x : v) {
      x = next(field);
    }
    return v;
  }

 private:
  std::vector<std::uint8_t> bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

class FloatWriter {
 public:
  void put(double value) {
    const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(value));
    bytes_.push_back(static_cast<std::uint8_t>(u & 0xFF));
    bytes_.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
    bytes_.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
    bytes_.push_back(static_cast<std::uint8_t>((u >> 24) & 0xFF));
  }

  void put(const Matrix& m) {
    for (double v : m.data) {
      put(v);
    }
  }

  void put(const Vector& v) {
    for (double x : v) {
      put(x);
    }
  }

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

LstmDirectionParams read_direction(FloatReader& reader, std::size_t hidden,
                                   std::size_t input, const char* which) {
  LstmDirectionParams params;
  GateParams* gates[] = {&params.candidate, &params.input_gate, &params.forget_gate,
                         &params.output_gate};
  for (GateParams* gate : gates) {
    gate->input_weights = reader.next_matrix(hidden, input, which);
  }
  for (GateParams* gate : gates) {
    gate->recurrent_weights = reader.next_matrix(hidden, hidden, which);
  }
  for (GateParams* gate : gates) {
    gate->bias = reader.next_vector(hidden, which);
  }
  return params;
}

void write_direction(FloatWriter& writer, const LstmDirectionParams& params) {
  const GateParams* gates[] = {&params.candidate, &params.input_gate, &params.forget_gate,
                               &params.output_gate};
  for (const GateParams* gate : gates) {
    writer.put(gate->input_weights);
  }
  for (const GateParams* gate : gates) {
    writer.put(gate->recurrent_weights);
  }
  for (const GateParams* gate : gates) {
    writer.put(gate->bias);
  }
}

void validate_alphabet(const std::vector<std::string>& alphabet) {
  if (alphabet.size() < 2) {
    throw ParseError("manifest: alphabet must hold the blank plus at least one symbol");
  }
  if (!alphabet[kBlankIndex].empty()) {
    throw ParseError("manifest: alphabet entry 0 is the blank and must be empty");
  }
  std::set<std::string> seen;
  for (std::size_t k = 1; k < alphabet.size(); ++k) {
    if (decode_utf8(alphabet[k]).size() != 1) {
      throw ParseError("manifest: alphabet entry " + std::to_string(k) +
                       " must be exactly one code point");
    }
    if (!seen.insert(alphabet[k]).second) {
      throw ParseError("manifest: duplicate alphabet symbol '" + alphabet[k] + "'");
    }
  }
}

void quantize_direction(const LstmDirectionParams& raw, LstmDirectionParams& out,
                        const PrecisionConfig& precision) {
  const std::size_t hidden = raw.hidden_size();
  const std::size_t input = raw.input_size();
  QuantPolicy policy;
  if (precision.weight_bits == 1) {
    policy = make_binary_weight_spec(hidden, input);
  } else {
    policy = make_signed_spec(precision.weight_bits);
  }

  const GateParams* sources[] = {&raw.candidate, &raw.input_gate, &raw.forget_gate,
                                 &raw.output_gate};
  GateParams* targets[] = {&out.candidate, &out.input_gate, &out.forget_gate,
                           &out.output_gate};
  for (std::size_t g = 0; g < 4; ++g) {
    targets[g]->input_weights = sources[g]->input_weights;
    targets[g]->input_weights.data = quantize_tensor(sources[g]->input_weights.data, policy);
    targets[g]->recurrent_weights = sources[g]->recurrent_weights;
    targets[g]->recurrent_weights.data =
        quantize_tensor(sources[g]->recurrent_weights.data, policy);
    targets[g]->bias = sources[g]->bias;
  }
}

}  // namespace

RawNetworkParams load_raw_model(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw ParseError("manifest: cannot open " + manifest_path.string());
  }
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest " + manifest_path.string() + ": " + e.what());
  }

  RawNetworkParams raw;
  try {
    raw.input_size = manifest.at("input_size").get<std::size_t>();
    raw.hidden_size = manifest.at("hidden_size").get<std::size_t>();
    raw.alphabet = manifest.at("alphabet").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest " + manifest_path.string() + ": " + e.what());
  }
  if (raw.input_size < 1 || raw.hidden_size < 1) {
    throw ParseError("manifest: input_size and hidden_size must be >= 1");
  }
  validate_alphabet(raw.alphabet);
  raw.num_classes = raw.alphabet.size();

  std::string weights_name;
  try {
    weights_name = manifest.at("weights_file").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest " + manifest_path.string() + ": " + e.what());
  }
  const std::filesystem::path blob_path = manifest_path.parent_path() / weights_name;
  std::ifstream blob(blob_path, std::ios::binary);
  if (!blob) {
    throw ParseError("weights: cannot open " + blob_path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(blob)),
                                  std::istreambuf_iterator<char>());
  FloatReader reader(std::move(bytes), blob_path.filename().string());

  const std::size_t h = raw.hidden_size;
  const std::size_t i = raw.input_size;
  const std::size_t k = raw.num_classes;
  const std::size_t expected =
      2 * (4 * h * i + 4 * h * h + 4 * h) + k * 2 * h + k + 4 * 2 * h + 1;
  if (reader.remaining() != expected) {
    throw ParseError("weights " + blob_path.filename().string() + ": holds " +
                     std::to_string(reader.remaining()) + " floats, expected " +
                     std::to_string(expected));
  }

  raw.forward = read_direction(reader, h, i, "forward direction");
  raw.backward = read_direction(reader, h, i, "backward direction");
  raw.fc.weights = reader.next_matrix(k, 2 * h, "fc weights");
  raw.fc.bias = reader.next_vector(k, "fc bias");
  raw.batch_norm.gamma = reader.next_vector(2 * h, "bn gamma");
  raw.batch_norm.beta = reader.next_vector(2 * h, "bn beta");
  raw.batch_norm.mean = reader.next_vector(2 * h, "bn mean");
  raw.batch_norm.variance = reader.next_vector(2 * h, "bn variance");
  raw.batch_norm.epsilon = reader.next("bn epsilon");
  return raw;
}

void save_model(const std::filesystem::path& manifest_path, const RawNetworkParams& raw) {
  validate_alphabet(raw.alphabet);
  std::filesystem::path blob_path = manifest_path;
  blob_path.replace_extension(".bin");

  nlohmann::json manifest;
  manifest["input_size"] = raw.input_size;
  manifest["hidden_size"] = raw.hidden_size;
  manifest["alphabet"] = raw.alphabet;
  manifest["weights_file"] = blob_path.filename().string();

  std::ofstream out(manifest_path);
  if (!out) {
    throw ParseError("manifest: cannot write " + manifest_path.string());
  }
  out << manifest.dump(2) << "\n";

  FloatWriter writer;
  write_direction(writer, raw.forward);
  write_direction(writer, raw.backward);
  writer.put(raw.fc.weights);
  writer.put(raw.fc.bias);
  writer.put(raw.batch_norm.gamma);
  writer.put(raw.batch_norm.beta);
  writer.put(raw.batch_norm.mean);
  writer.put(raw.batch_norm.variance);
  writer.put(raw.batch_norm.epsilon);

  std::ofstream blob(blob_path, std::ios::binary);
  if (!blob) {
    throw ParseError("weights: cannot write " + blob_path.string());
  }
  blob.write(reinterpret_cast<const char*>(writer.bytes().data()),
             static_cast<std::streamsize>(writer.bytes().size()));
}

NetworkModel quantize_network(const RawNetworkParams& raw, const PrecisionConfig& precision) {
  validate(precision);
  NetworkModel model;
  model.input_size = raw.input_size;
  model.hidden_size = raw.hidden_size;
  model.num_classes = raw.num_classes;
  model.alphabet = raw.alphabet;
  quantize_direction(raw.forward, model.forward, precision);
  quantize_direction(raw.backward, model.backward, precision);
  model.output = quantize_output_layer(fold_batchnorm(raw.fc, raw.batch_norm),
                                       precision.fc_weight_bits);
  return model;
}

NetworkModel load_model(const std::filesystem::path& manifest_path,
                        const PrecisionConfig& precision) {
  return quantize_network(load_raw_model(manifest_path), precision);
}

}  // namespace qlstm
