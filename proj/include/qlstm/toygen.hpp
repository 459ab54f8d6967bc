#pragma once

#include <cstdint>
#include <filesystem>

#include "qlstm/model_io.hpp"

namespace qlstm {

/// Shape and seed of a generated demo model.
struct ToySpec {
  std::size_t input_size = 8;
  std::size_t hidden_size = 4;
  std::size_t num_symbols = 3;  // alphabet size is num_symbols + blank
  std::uint32_t seed = 1;
};

/// Deterministic random full-precision model: weights and biases drawn
/// in (-1, 1), batch-norm parameters kept close to the identity so the
/// folded output layer stays on the representable weight range.
RawNetworkParams make_toy_model(const ToySpec& spec);

/// Write `count` random text-line images (width 6..3+3*count capped per
/// image, height = model input size) plus a tab-separated truth file
/// `truth.tsv` into `dir`. Truth strings are non-empty draws from the
/// model alphabet. Returns the truth file path.
std::filesystem::path write_toy_dataset(const std::filesystem::path& dir,
                                        const RawNetworkParams& model, std::size_t count,
                                        std::uint32_t seed);

}  // namespace qlstm
