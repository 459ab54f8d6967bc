#include "qlstm/toygen.hpp"

#include <fstream>
#include <random>

#include "qlstm/eval.hpp"

namespace qlstm {

namespace {

Matrix random_matrix(std::mt19937& rng, std::size_t rows, std::size_t cols, double range) {
  std::uniform_real_distribution<double> dist(-range, range);
  Matrix m(rows, cols);
  for (double& v : m.data) {
    v = dist(rng);
  }
  return m;
}

Vector random_vector(std::mt19937& rng, std::size_t size, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(size);
  for (double& x : v) {
    x = dist(rng);
  }
  return v;
}

GateParams random_gate(std::mt19937& rng, std::size_t hidden, std::size_t input) {
  GateParams gate;
  gate.input_weights = random_matrix(rng, hidden, input, 0.9);
  gate.recurrent_weights = random_matrix(rng, hidden, hidden, 0.9);
  gate.bias = random_vector(rng, hidden, -0.5, 0.5);
  return gate;
}

LstmDirectionParams random_direction(std::mt19937& rng, std::size_t hidden,
                                     std::size_t input) {
  LstmDirectionParams params;
  params.candidate = random_gate(rng, hidden, input);
  params.input_gate = random_gate(rng, hidden, input);
  params.forget_gate = random_gate(rng, hidden, input);
  params.output_gate = random_gate(rng, hidden, input);
  return params;
}

}  // namespace

RawNetworkParams make_toy_model(const ToySpec& spec) {
  std::mt19937 rng(spec.seed);
  RawNetworkParams raw;
  raw.input_size = spec.input_size;
  raw.hidden_size = spec.hidden_size;
  raw.num_classes = spec.num_symbols + 1;

  raw.alphabet.push_back("");  // blank
  for (std::size_t s = 0; s < spec.num_symbols; ++s) {
    raw.alphabet.push_back(std::string(1, static_cast<char>('a' + (s % 26))));
  }

  raw.forward = random_direction(rng, spec.hidden_size, spec.input_size);
  raw.backward = random_direction(rng, spec.hidden_size, spec.input_size);

  const std::size_t features = 2 * spec.hidden_size;
  raw.fc.weights = random_matrix(rng, raw.num_classes, features, 0.8);
  raw.fc.bias = random_vector(rng, raw.num_classes, -0.3, 0.3);
  // near-identity normalization keeps folded weights inside (-1, 1)
  raw.batch_norm.gamma = random_vector(rng, features, 0.8, 1.1);
  raw.batch_norm.beta = random_vector(rng, features, -0.2, 0.2);
  raw.batch_norm.mean = random_vector(rng, features, -0.2, 0.2);
  raw.batch_norm.variance = random_vector(rng, features, 0.9, 1.5);
  raw.batch_norm.epsilon = 1e-5;
  return raw;
}

std::filesystem::path write_toy_dataset(const std::filesystem::path& dir,
                                        const RawNetworkParams& model, std::size_t count,
                                        std::uint32_t seed) {
  std::filesystem::create_directories(dir);
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pixel(0, 255);
  std::uniform_int_distribution<std::size_t> width(6, 14);
  std::uniform_int_distribution<std::size_t> truth_len(2, 5);
  std::uniform_int_distribution<std::size_t> symbol(1, model.alphabet.size() - 1);

  const std::filesystem::path truth_path = dir / "truth.tsv";
  std::ofstream truth(truth_path);
  if (!truth) {
    throw DatasetError("cannot write " + truth_path.string());
  }

  for (std::size_t n = 0; n < count; ++n) {
    TextLineImage image;
    image.width = width(rng);
    image.height = model.input_size;
    image.columns.assign(image.width, Vector(image.height));
    for (auto& column : image.columns) {
      for (double& v : column) {
        v = static_cast<double>(pixel(rng)) / 256.0;
      }
    }
    const std::string name = "line" + std::to_string(n) + ".pgm";
    save_pgm(dir / name, image);

    std::string text;
    const std::size_t len = truth_len(rng);
    for (std::size_t c = 0; c < len; ++c) {
      text += model.alphabet[symbol(rng)];
    }
    truth << name << "\t" << text << "\n";
  }
  return truth_path;
}

}  // namespace qlstm
