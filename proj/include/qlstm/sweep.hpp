#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qlstm/perfmodel.hpp"
#include "qlstm/quant.hpp"

namespace qlstm {

/// One design-space exploration request: every precision crossed with
/// every folding point over a fixed model and dataset.
struct SweepSpec {
  std::filesystem::path model_manifest;
  std::filesystem::path dataset_dir;
  std::filesystem::path truth_file;
  std::vector<PrecisionConfig> precisions;
  std::vector<FoldingConfig> foldings;  // pe/simd widths; frequency and depth below apply
  std::optional<std::size_t> columns;   // default: widest dataset image
  double frequency_mhz = 200.0;
  std::size_t pipeline_depth = 0;
};

struct SweepRow {
  PrecisionConfig precision;
  FoldingConfig folding;
  bool ok = false;
  std::string error;  // set when !ok
  double cer = 0.0;
  SimReport report;
};

/// Evaluate every (precision x folding) pair. Rows come back sorted by
/// (precision, folding); points that fail carry the error instead of
/// aborting the sweep. Accuracy is evaluated once per precision and
/// shared across its folding rows.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// Fixed-order CSV with header
///   precision,folding,cer,total_ops,cycles,gops,weight_bits,memory_blocks
/// Failed points hold the ERR marker in every data cell.
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace qlstm
