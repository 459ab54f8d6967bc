// Command-line front end: single-image inference, dataset evaluation,
// precision/parallelism sweeps and performance simulation.
//
// Exit codes: 0 success, 1 usage, 2 data/model error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qlstm/eval.hpp"
#include "qlstm/format.hpp"
#include "qlstm/model_io.hpp"
#include "qlstm/perfmodel.hpp"
#include "qlstm/sweep.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Minimal CSV escaping for free-text cells (predictions may hold commas).
std::string csv_cell(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) {
    return text;
  }
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

struct InferArgs {
  std::string model;
  std::string image;
  std::string precision = "8/8/8";
};

int cmd_infer(const InferArgs& args) {
  const qlstm::PrecisionConfig precision = qlstm::parse_precision(args.precision);
  const qlstm::NetworkModel model = qlstm::load_model(args.model, precision);
  const qlstm::TextLineImage image = qlstm::load_pgm(args.image, model.input_size);
  std::cout << qlstm::infer(model, image.columns, precision) << "\n";
  return 0;
}

struct EvalArgs {
  std::string model;
  std::string dataset_dir;
  std::string truth;
  std::string precision = "8/8/8";
  std::string csv;
};

int cmd_eval(const EvalArgs& args) {
  const qlstm::PrecisionConfig precision = qlstm::parse_precision(args.precision);
  const qlstm::NetworkModel model = qlstm::load_model(args.model, precision);
  const auto entries = qlstm::read_ground_truth(args.truth, args.dataset_dir);
  const qlstm::EvalReport report = qlstm::evaluate_dataset(model, entries, precision);

  std::cout << "image\tdistance\ttruth_len\tpred\n";
  for (const qlstm::ImageResult& row : report.per_image) {
    std::cout << row.image_name << "\t" << row.distance << "\t" << row.truth_length << "\t"
              << row.predicted << "\n";
  }
  std::cout << "aggregate_cer\t" << qlstm::format_real(report.aggregate_cer) << "\n";
  std::cout << "accuracy\t" << qlstm::format_real(report.accuracy) << "\n";

  if (!args.csv.empty()) {
    std::ofstream out(args.csv);
    if (!out) {
      throw qlstm::DatasetError("cannot write csv file " + args.csv);
    }
    out << "image,distance,truth_len,pred\n";
    for (const qlstm::ImageResult& row : report.per_image) {
      out << csv_cell(row.image_name) << "," << row.distance << "," << row.truth_length << ","
          << csv_cell(row.predicted) << "\n";
    }
  }
  return 0;
}

struct SweepArgs {
  std::string model;
  std::string dataset_dir;
  std::string truth;
  std::vector<std::string> precisions;
  std::vector<std::string> foldings;
  std::optional<std::size_t> columns;
  double freq_mhz = 200.0;
  std::size_t pipeline_depth = 0;
  std::string csv;
};

int cmd_sweep(const SweepArgs& args) {
  qlstm::SweepSpec spec;
  spec.model_manifest = args.model;
  spec.dataset_dir = args.dataset_dir;
  spec.truth_file = args.truth;
  for (const std::string& p : args.precisions) {
    spec.precisions.push_back(qlstm::parse_precision(p));
  }
  for (const std::string& f : args.foldings) {
    spec.foldings.push_back(qlstm::parse_folding(f));
  }
  spec.columns = args.columns;
  spec.frequency_mhz = args.freq_mhz;
  spec.pipeline_depth = args.pipeline_depth;

  const auto rows = qlstm::run_sweep(spec);
  const std::string csv = qlstm::sweep_csv(rows);
  std::cout << csv;
  for (const qlstm::SweepRow& row : rows) {
    if (!row.ok) {
      std::cerr << "sweep point " << qlstm::precision_label(row.precision) << " x "
                << qlstm::folding_label(row.folding) << " failed: " << row.error << "\n";
    }
  }
  if (!args.csv.empty()) {
    std::ofstream out(args.csv, std::ios::binary);
    if (!out) {
      throw qlstm::DatasetError("cannot write csv file " + args.csv);
    }
    out << csv;
  }
  return 0;
}

struct SimulateArgs {
  std::string model;
  std::size_t input_size = 0;
  std::size_t hidden = 0;
  std::size_t classes = 0;
  std::size_t columns = 0;
  std::size_t pe = 1;
  std::size_t simd_input = 0;   // 0 = full width
  std::size_t simd_recurrent = 0;
  double freq_mhz = 200.0;
  std::size_t pipeline_depth = 0;
  std::string precision = "8/8/8";
};

int cmd_simulate(const SimulateArgs& args) {
  qlstm::NetworkDims dims{args.input_size, args.hidden, args.classes};
  if (!args.model.empty()) {
    const qlstm::RawNetworkParams raw = qlstm::load_raw_model(args.model);
    dims = {raw.input_size, raw.hidden_size, raw.num_classes};
  } else if (dims.input_size == 0 || dims.hidden_size == 0 || dims.num_classes == 0) {
    throw qlstm::ConfigError(
        "simulate needs --model or all of --input-size/--hidden/--classes");
  }

  qlstm::FoldingConfig folding;
  folding.pe = args.pe;
  folding.simd_input = args.simd_input == 0 ? dims.input_size : args.simd_input;
  folding.simd_recurrent = args.simd_recurrent == 0 ? dims.hidden_size : args.simd_recurrent;
  folding.frequency_mhz = args.freq_mhz;
  folding.pipeline_depth = args.pipeline_depth;

  const qlstm::PrecisionConfig precision = qlstm::parse_precision(args.precision);
  const qlstm::SimReport report = qlstm::simulate(dims, precision, folding, args.columns);

  std::cout << "columns\t" << args.columns << "\n";
  std::cout << "fold_factor\t" << report.fold << "\n";
  std::cout << "ops_bilstm\t" << report.ops.bilstm_ops << "\n";
  std::cout << "ops_output\t" << report.ops.output_ops << "\n";
  std::cout << "ops_total\t" << report.ops.total() << "\n";
  std::cout << "cycles\t" << report.cycles << "\n";
  std::cout << "runtime_s\t" << qlstm::format_real(report.runtime_s) << "\n";
  std::cout << "throughput_gops\t" << qlstm::format_real(report.gops) << "\n";
  std::cout << "weight_bits\t" << report.memory.weight_bits << "\n";
  std::cout << "memory_blocks\t" << report.memory.memory_blocks << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized bidirectional LSTM inference engine and dataflow performance model"};
  app.require_subcommand(1);

  InferArgs infer_args;
  CLI::App* infer = app.add_subcommand("infer", "Decode one text-line image");
  infer->add_option("--model", infer_args.model, "Model manifest (json)")->required();
  infer->add_option("--image", infer_args.image, "Text-line image (pgm)")->required();
  infer->add_option("--precision", infer_args.precision, "W/A/I or W/A/I/R bit-widths");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a dataset and report CER");
  eval->add_option("--model", eval_args.model, "Model manifest (json)")->required();
  eval->add_option("--dataset-dir", eval_args.dataset_dir, "Directory holding the images")
      ->required();
  eval->add_option("--truth", eval_args.truth, "Tab-separated ground-truth file")->required();
  eval->add_option("--precision", eval_args.precision, "W/A/I or W/A/I/R bit-widths");
  eval->add_option("--csv", eval_args.csv, "Write per-image rows to this file");

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep", "Cross precisions with folding points");
  sweep->add_option("--model", sweep_args.model, "Model manifest (json)")->required();
  sweep->add_option("--dataset-dir", sweep_args.dataset_dir, "Directory holding the images")
      ->required();
  sweep->add_option("--truth", sweep_args.truth, "Tab-separated ground-truth file")->required();
  sweep->add_option("--precision", sweep_args.precisions, "Precision point (repeatable)")
      ->required();
  sweep
      ->add_option("--folding", sweep_args.foldings,
                   "Folding point PE/SIMD_INPUT/SIMD_RECURRENT (repeatable)")
      ->required();
  sweep->add_option("--columns", sweep_args.columns,
                    "Sequence length for the cycle model (default: widest image)");
  sweep->add_option("--freq-mhz", sweep_args.freq_mhz, "Clock frequency in MHz");
  sweep->add_option("--pipeline-depth", sweep_args.pipeline_depth, "Fixed pipeline latency");
  sweep->add_option("--csv", sweep_args.csv, "Also write the CSV to this file");

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand("simulate", "Performance model for one design point");
  simulate->add_option("--model", sim_args.model, "Model manifest supplying the dims");
  simulate->add_option("--input-size", sim_args.input_size, "Pixels per column");
  simulate->add_option("--hidden", sim_args.hidden, "Cells per direction");
  simulate->add_option("--classes", sim_args.classes, "Output-layer units");
  simulate->add_option("--columns", sim_args.columns, "Sequence length")->required();
  simulate->add_option("--pe", sim_args.pe, "Cells computed in parallel");
  simulate->add_option("--simd-input", sim_args.simd_input,
                       "Input lanes per gate (default: full width)");
  simulate->add_option("--simd-recurrent", sim_args.simd_recurrent,
                       "Recurrent lanes per gate (default: full width)");
  simulate->add_option("--freq-mhz", sim_args.freq_mhz, "Clock frequency in MHz");
  simulate->add_option("--pipeline-depth", sim_args.pipeline_depth, "Fixed pipeline latency");
  simulate->add_option("--precision", sim_args.precision,
                       "Bit-widths for the memory estimate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (infer->parsed()) return cmd_infer(infer_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (simulate->parsed()) return cmd_simulate(sim_args);
  } catch (const qlstm::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const qlstm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
