#include "qlstm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qlstm {

namespace {

// Skips PGM whitespace and '#' comment lines, then reads one token.
std::string next_pgm_token(std::istream& in, const char* field) {
  for (int c = in.peek(); c != EOF; c = in.peek()) {
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  std::string token;
  in >> token;
  if (token.empty()) {
    throw ParseError(std::string("pgm: missing ") + field);
  }
  return token;
}

std::string encode_utf8(std::uint32_t point) {
  std::string out;
  if (point < 0x80) {
    out += static_cast<char>(point);
  } else if (point < 0x800) {
    out += static_cast<char>(0xC0 | (point >> 6));
    out += static_cast<char>(0x80 | (point & 0x3F));
  } else if (point < 0x10000) {
    out += static_cast<char>(0xE0 | (point >> 12));
    out += static_cast<char>(0x80 | ((point >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (point & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (point >> 18));
    out += static_cast<char>(0x80 | ((point >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((point >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (point & 0x3F));
  }
  return out;
}

std::size_t parse_pgm_number(std::istream& in, const char* field) {
  const std::string token = next_pgm_token(in, field);
  std::size_t value = 0;
  for (char c : token) {
    if (c < '0' || c > '9') {
      throw ParseError(std::string("pgm: ") + field + " is not a number: '" + token + "'");
    }
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  return value;
}

}  // namespace

TextLineImage load_pgm(const std::filesystem::path& path,
                       std::optional<std::size_t> expected_height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("pgm: cannot open " + path.string());
  }

  const std::string magic = next_pgm_token(in, "magic");
  if (magic != "P5") {
    throw ParseError("pgm: magic is '" + magic + "', expected P5");
  }
  const std::size_t width = parse_pgm_number(in, "width");
  const std::size_t height = parse_pgm_number(in, "height");
  const std::size_t maxval = parse_pgm_number(in, "maxval");
  if (maxval != 255) {
    throw ParseError("pgm: maxval is " + std::to_string(maxval) + ", expected 255");
  }
  if (width == 0 || height == 0) {
    throw ParseError("pgm: degenerate size " + std::to_string(width) + "x" +
                     std::to_string(height));
  }
  if (expected_height && height != *expected_height) {
    throw ParseError("pgm: height " + std::to_string(height) + " does not match expected " +
                     std::to_string(*expected_height) + " in " + path.string());
  }
  in.get();  // single whitespace byte before the payload

  std::vector<char> pixels(width * height);
  in.read(pixels.data(), static_cast<std::streamsize>(pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != pixels.size()) {
    throw ParseError("pgm: truncated pixel payload in " + path.string());
  }

  TextLineImage image;
  image.width = width;
  image.height = height;
  image.columns.assign(width, Vector(height));
  for (std::size_t row = 0; row < height; ++row) {
    for (std::size_t col = 0; col < width; ++col) {
      const auto p = static_cast<unsigned char>(pixels[row * width + col]);
      image.columns[col][row] = static_cast<double>(p) / 256.0;
    }
  }
  return image;
}

void save_pgm(const std::filesystem::path& path, const TextLineImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("pgm: cannot write " + path.string());
  }
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  for (std::size_t row = 0; row < image.height; ++row) {
    for (std::size_t col = 0; col < image.width; ++col) {
      const long v = std::lround(image.columns[col][row] * 256.0);
      const long clipped = std::clamp(v, 0L, 255L);
      out.put(static_cast<char>(static_cast<unsigned char>(clipped)));
    }
  }
}

std::vector<std::uint32_t> decode_utf8(std::string_view text) {
  std::vector<std::uint32_t> points;
  points.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto byte = static_cast<unsigned char>(text[i]);
    std::uint32_t point = 0;
    std::size_t extra = 0;
    if (byte < 0x80) {
      point = byte;
    } else if ((byte & 0xE0) == 0xC0) {
      point = byte & 0x1F;
      extra = 1;
    } else if ((byte & 0xF0) == 0xE0) {
      point = byte & 0x0F;
      extra = 2;
    } else if ((byte & 0xF8) == 0xF0) {
      point = byte & 0x07;
      extra = 3;
    } else {
      throw ParseError("utf-8: invalid lead byte at offset " + std::to_string(i));
    }
    for (std::size_t k = 1; k <= extra; ++k) {
      if (i + k >= text.size() ||
          (static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        throw ParseError("utf-8: truncated sequence at offset " + std::to_string(i));
      }
      point = (point << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
    }
    points.push_back(point);
    i += extra + 1;
  }
  return points;
}

std::size_t levenshtein(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  // Two-row dynamic program over the classic edit table.
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> curr(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) {
    prev[j] = j;
  }
  for (std::size_t i = 1; i <= a.size(); ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t substitution = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, substitution});
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  const auto pa = decode_utf8(a);
  const auto pb = decode_utf8(b);
  return levenshtein(std::span<const std::uint32_t>(pa), std::span<const std::uint32_t>(pb));
}

double cer(std::string_view predicted, std::string_view truth) {
  const auto truth_points = decode_utf8(truth);
  if (truth_points.empty()) {
    throw Error("cer: ground truth is empty, rate undefined");
  }
  const auto predicted_points = decode_utf8(predicted);
  return static_cast<double>(levenshtein(std::span<const std::uint32_t>(predicted_points),
                                         std::span<const std::uint32_t>(truth_points))) /
         static_cast<double>(truth_points.size());
}

std::vector<DatasetEntry> read_ground_truth(const std::filesystem::path& truth_file,
                                            const std::filesystem::path& image_dir) {
  std::ifstream in(truth_file);
  if (!in) {
    throw DatasetError("cannot open ground-truth file " + truth_file.string());
  }
  std::vector<DatasetEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DatasetError("ground truth line " + std::to_string(line_no) +
                         ": missing tab separator");
    }
    DatasetEntry entry;
    entry.image_path = image_dir / line.substr(0, tab);
    entry.truth = line.substr(tab + 1);
    entries.push_back(std::move(entry));
  }
  return entries;
}

EvalReport evaluate_dataset(const NetworkModel& model,
                            const std::vector<DatasetEntry>& dataset,
                            const PrecisionConfig& precision) {
  if (dataset.empty()) {
    throw DatasetError("dataset is empty");
  }

  // Every ground-truth symbol must exist in the alphabet; check up front
  // so a bad dataset fails before any inference runs.
  std::set<std::uint32_t> known;
  for (std::size_t k = 0; k < model.alphabet.size(); ++k) {
    if (k == kBlankIndex) {
      continue;
    }
    for (std::uint32_t p : decode_utf8(model.alphabet[k])) {
      known.insert(p);
    }
  }
  for (const DatasetEntry& entry : dataset) {
    for (std::uint32_t p : decode_utf8(entry.truth)) {
      if (!known.contains(p)) {
        throw DatasetError("ground truth for " + entry.image_path.filename().string() +
                           " contains symbol '" + encode_utf8(p) +
                           "' that is not in the model alphabet");
      }
    }
  }

  EvalReport report;
  std::size_t total_edits = 0;
  std::size_t total_length = 0;
  for (const DatasetEntry& entry : dataset) {
    const TextLineImage image = load_pgm(entry.image_path, model.input_size);
    ImageResult result;
    result.image_name = entry.image_path.filename().string();
    result.truth = entry.truth;
    result.predicted = infer(model, image.columns, precision);
    result.distance = levenshtein(result.predicted, result.truth);
    result.truth_length = decode_utf8(entry.truth).size();
    total_edits += result.distance;
    total_length += result.truth_length;
    report.max_columns = std::max(report.max_columns, image.width);
    report.per_image.push_back(std::move(result));
  }
  if (total_length == 0) {
    throw DatasetError("dataset has empty ground truth everywhere, rate undefined");
  }
  report.aggregate_cer = static_cast<double>(total_edits) / static_cast<double>(total_length);
  report.accuracy = 1.0 - report.aggregate_cer;
  return report;
}

}  // namespace qlstm
