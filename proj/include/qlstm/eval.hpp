#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qlstm/errors.hpp"
#include "qlstm/lstm.hpp"
#include "qlstm/matrix.hpp"

namespace qlstm {

/// Gray-scale text line, columns left to right, pixel values in [0,1).
struct TextLineImage {
  std::size_t width = 0;   // C columns
  std::size_t height = 0;  // pixels per column
  std::vector<Vector> columns;
};

/// Read a binary PGM (P5, maxval 255). Pixels map to p/256 so 1.0 is
/// never produced. Throws ParseError naming the offending field; if
/// expected_height is given, a mismatch is an error, never a resize.
TextLineImage load_pgm(const std::filesystem::path& path,
                       std::optional<std::size_t> expected_height = std::nullopt);

/// Inverse of load_pgm; exact round trip for values on the p/256 grid.
void save_pgm(const std::filesystem::path& path, const TextLineImage& image);

/// Decode UTF-8 into code points. Throws ParseError on malformed bytes.
std::vector<std::uint32_t> decode_utf8(std::string_view text);

/// Minimum number of insertions, deletions and substitutions turning a
/// into b.
std::size_t levenshtein(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// Code-point-based distance between two UTF-8 strings.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// levenshtein(predicted, truth) / |truth| in code points. Throws
/// Error when truth is empty.
double cer(std::string_view predicted, std::string_view truth);

struct DatasetEntry {
  std::filesystem::path image_path;
  std::string truth;
};

/// Parse a tab-separated ground-truth file (`<image>\t<text>` per line);
/// image paths resolve relative to image_dir.
std::vector<DatasetEntry> read_ground_truth(const std::filesystem::path& truth_file,
                                            const std::filesystem::path& image_dir);

struct ImageResult {
  std::string image_name;
  std::string predicted;
  std::string truth;
  std::size_t distance = 0;
  std::size_t truth_length = 0;  // code points
};

struct EvalReport {
  std::vector<ImageResult> per_image;
  double aggregate_cer = 0.0;  // total edits / total truth length
  double accuracy = 0.0;       // 1 - aggregate_cer
  std::size_t max_columns = 0;  // widest image, feeds the performance model
};

/// Run inference over every entry and aggregate the length-weighted
/// character error rate. Ground-truth symbols must all be in the model
/// alphabet; violations raise DatasetError naming the symbol. Report
/// rows follow dataset order.
EvalReport evaluate_dataset(const NetworkModel& model,
                            const std::vector<DatasetEntry>& dataset,
                            const PrecisionConfig& precision);

}  // namespace qlstm
