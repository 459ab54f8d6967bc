// Generates a deterministic demo model plus a small synthetic dataset,
// enough to drive infer/eval/sweep end to end without external data.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qlstm/toygen.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a random demo model and synthetic text-line dataset"};

  std::string out_dir;
  qlstm::ToySpec spec;
  std::size_t images = 5;
  std::uint32_t dataset_seed = 2;

  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--input-size", spec.input_size, "Pixels per column");
  app.add_option("--hidden", spec.hidden_size, "Cells per direction");
  app.add_option("--symbols", spec.num_symbols, "Alphabet size without the blank");
  app.add_option("--seed", spec.seed, "Model seed");
  app.add_option("--images", images, "Number of synthetic text lines");
  app.add_option("--dataset-seed", dataset_seed, "Dataset seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const qlstm::RawNetworkParams raw = qlstm::make_toy_model(spec);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    const auto manifest = dir / "model.json";
    qlstm::save_model(manifest, raw);
    const auto truth = qlstm::write_toy_dataset(dir, raw, images, dataset_seed);
    std::cout << "model:   " << manifest.string() << "\n";
    std::cout << "dataset: " << images << " images + " << truth.string() << "\n";
  } catch (const qlstm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
