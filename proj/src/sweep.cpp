#include "qlstm/sweep.hpp"

#include <algorithm>
#include <tuple>

#include "qlstm/eval.hpp"
#include "qlstm/format.hpp"
#include "qlstm/model_io.hpp"

namespace qlstm {

namespace {

auto precision_key(const PrecisionConfig& p) {
  return std::make_tuple(p.weight_bits, p.output_bits, p.input_bits, p.recurrent_bits);
}

auto folding_key(const FoldingConfig& f) {
  return std::make_tuple(f.pe, f.simd_input, f.simd_recurrent);
}

struct CerResult {
  bool ok = false;
  double cer = 0.0;
  std::string error;
};

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  if (spec.precisions.empty() || spec.foldings.empty()) {
    throw ConfigError("sweep needs at least one precision and one folding point");
  }

  const std::vector<DatasetEntry> entries =
      read_ground_truth(spec.truth_file, spec.dataset_dir);
  if (entries.empty()) {
    throw DatasetError("ground-truth file " + spec.truth_file.string() + " lists no images");
  }

  std::size_t columns = 0;
  if (spec.columns) {
    columns = *spec.columns;
  } else {
    for (const DatasetEntry& entry : entries) {
      columns = std::max(columns, load_pgm(entry.image_path).width);
    }
  }

  const RawNetworkParams raw = load_raw_model(spec.model_manifest);
  const NetworkDims dims{raw.input_size, raw.hidden_size, raw.num_classes};

  std::vector<PrecisionConfig> precisions = spec.precisions;
  std::sort(precisions.begin(), precisions.end(),
            [](const auto& a, const auto& b) { return precision_key(a) < precision_key(b); });
  std::vector<FoldingConfig> foldings = spec.foldings;
  std::sort(foldings.begin(), foldings.end(),
            [](const auto& a, const auto& b) { return folding_key(a) < folding_key(b); });

  std::vector<SweepRow> rows;
  for (const PrecisionConfig& precision : precisions) {
    CerResult accuracy;
    try {
      const NetworkModel model = quantize_network(raw, precision);
      accuracy.cer = evaluate_dataset(model, entries, precision).aggregate_cer;
      accuracy.ok = true;
    } catch (const Error& e) {
      accuracy.error = e.what();
    }

    for (const FoldingConfig& folding_point : foldings) {
      FoldingConfig folding = folding_point;
      folding.frequency_mhz = spec.frequency_mhz;
      folding.pipeline_depth = spec.pipeline_depth;

      SweepRow row;
      row.precision = precision;
      row.folding = folding;
      if (!accuracy.ok) {
        row.error = accuracy.error;
        rows.push_back(std::move(row));
        continue;
      }
      row.cer = accuracy.cer;
      try {
        row.report = simulate(dims, precision, folding, columns);
        row.ok = true;
      } catch (const Error& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string csv = "precision,folding,cer,total_ops,cycles,gops,weight_bits,memory_blocks\n";
  for (const SweepRow& row : rows) {
    csv += precision_label(row.precision);
    csv += ',';
    csv += folding_label(row.folding);
    if (row.ok) {
      csv += ',' + format_real(row.cer);
      csv += ',' + std::to_string(row.report.ops.total());
      csv += ',' + std::to_string(row.report.cycles);
      csv += ',' + format_real(row.report.gops);
      csv += ',' + std::to_string(row.report.memory.weight_bits);
      csv += ',' + std::to_string(row.report.memory.memory_blocks);
    } else {
      csv += ",ERR,ERR,ERR,ERR,ERR,ERR";
    }
    csv += '\n';
  }
  return csv;
}

}  // namespace qlstm
