#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "qlstm/eval.hpp"
#include "qlstm/toygen.hpp"
#include "support/oracles.hpp"
#include "support/random_models.hpp"
#include "support/temp_dir.hpp"

using namespace qlstm;

TEST_CASE("levenshtein on known pairs") {
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("abc", "abc") == 0);
  CHECK(levenshtein("", "abcd") == 4);
  CHECK(levenshtein("abcd", "") == 4);
  CHECK(levenshtein("", "") == 0);
}

TEST_CASE("levenshtein counts code points, not bytes") {
  CHECK(levenshtein("gr\xC3\xBC n", "gr\xC3\xBC n") == 0);  // u-umlaut
  CHECK(levenshtein("a\xC3\xA9", "a") == 1);                // drop one accent char
}

TEST_CASE("levenshtein satisfies the metric axioms against brute force") {
  std::mt19937 rng(99);
  std::uniform_int_distribution<std::size_t> len(0, 6);
  std::uniform_int_distribution<std::uint32_t> sym('a', 'd');
  const auto random_word = [&] {
    std::vector<std::uint32_t> w(len(rng));
    for (auto& c : w) {
      c = sym(rng);
    }
    return w;
  };

  for (int n = 0; n < 200; ++n) {
    const auto a = random_word();
    const auto b = random_word();
    const auto c = random_word();
    const std::size_t ab = levenshtein(std::span(a), std::span(b));

    CHECK(ab == oracle::levenshtein_brute(a, b));
    CHECK(ab == levenshtein(std::span(b), std::span(a)));         // symmetry
    CHECK((ab == 0) == (a == b));                                 // identity
    CHECK(ab <= levenshtein(std::span(a), std::span(c)) +
                    levenshtein(std::span(c), std::span(b)));     // triangle
  }
}

TEST_CASE("character error rate") {
  CHECK(cer("abcd", "abcd") == 0.0);
  CHECK(cer("ab", "abcd") == 0.5);
  CHECK(cer("", "abcd") == 1.0);
  CHECK_THROWS_AS(cer("anything", ""), Error);
}

TEST_CASE("pgm loads pixels as p/256 column-major views") {
  testsupport::TempDir dir("pgm");
  const auto path = dir.path() / "tiny.pgm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# a comment\n2 2\n255\n";
    const unsigned char pixels[] = {0, 128, 255, 64};
    out.write(reinterpret_cast<const char*>(pixels), 4);
  }
  const TextLineImage image = load_pgm(path);
  CHECK(image.width == 2);
  CHECK(image.height == 2);
  CHECK(image.columns[0] == Vector{0.0, 255.0 / 256.0});
  CHECK(image.columns[1] == Vector{128.0 / 256.0, 64.0 / 256.0});
}

TEST_CASE("pgm loader rejects malformed files") {
  testsupport::TempDir dir("pgm-bad");

  const auto write_file = [&](const std::string& name, const std::string& content) {
    const auto path = dir.path() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
  };

  CHECK_THROWS_WITH_AS(static_cast<void>(load_pgm(write_file("magic.pgm", "P2\n2 2\n255\n"))),
                       doctest::Contains("magic"), ParseError);
  CHECK_THROWS_WITH_AS(
      static_cast<void>(load_pgm(write_file("maxval.pgm", std::string("P5\n1 1\n65535\n\0\0", 16)))),
      doctest::Contains("maxval"), ParseError);
  CHECK_THROWS_WITH_AS(static_cast<void>(load_pgm(write_file("short.pgm", "P5\n4 4\n255\nab"))),
                       doctest::Contains("truncated"), ParseError);
  CHECK_THROWS_AS(static_cast<void>(load_pgm(dir.path() / "missing.pgm")), ParseError);

  // wrong height is an error, never a resize
  const auto ok = write_file("h2.pgm", std::string("P5\n1 2\n255\nAB"));
  CHECK_THROWS_WITH_AS(static_cast<void>(load_pgm(ok, 3)), doctest::Contains("height"),
                       ParseError);
  CHECK(load_pgm(ok, 2).height == 2);
}

TEST_CASE("pgm round trip reproduces every column") {
  testsupport::TempDir dir("pgm-rt");
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> pixel(0, 255);

  TextLineImage image;
  image.width = 9;
  image.height = 5;
  image.columns.assign(image.width, Vector(image.height));
  for (auto& column : image.columns) {
    for (double& v : column) {
      v = pixel(rng) / 256.0;
    }
  }
  const auto path = dir.path() / "rt.pgm";
  save_pgm(path, image);
  const TextLineImage loaded = load_pgm(path);
  REQUIRE(loaded.width == image.width);
  REQUIRE(loaded.height == image.height);
  CHECK(loaded.columns == image.columns);
}

TEST_CASE("ground-truth file parses tab-separated lines") {
  testsupport::TempDir dir("gt");
  const auto truth_path = dir.path() / "truth.tsv";
  {
    std::ofstream out(truth_path);
    out << "a.pgm\thello\n";
    out << "b.pgm\tw o rld\n";
    out << "\n";  // blank lines are skipped
  }
  const auto entries = read_ground_truth(truth_path, dir.path());
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].image_path == dir.path() / "a.pgm");
  CHECK(entries[0].truth == "hello");
  CHECK(entries[1].truth == "w o rld");

  {
    std::ofstream out(truth_path);
    out << "a.pgm no tab here\n";
  }
  CHECK_THROWS_AS(static_cast<void>(read_ground_truth(truth_path, dir.path())), DatasetError);
  CHECK_THROWS_AS(static_cast<void>(read_ground_truth(dir.path() / "nope.tsv", dir.path())),
                  DatasetError);
}

namespace {

// Dataset fixture: toy model written to disk plus images the model can read.
struct DatasetFixture {
  testsupport::TempDir dir{"eval-ds"};
  RawNetworkParams raw;
  NetworkModel model;
  PrecisionConfig precision = make_precision(8, 8, 8);
  std::vector<DatasetEntry> entries;

  DatasetFixture() {
    ToySpec spec;
    spec.input_size = 6;
    spec.hidden_size = 3;
    spec.num_symbols = 3;
    spec.seed = 42;
    raw = make_toy_model(spec);
    model = quantize_network(raw, precision);
    const auto truth = write_toy_dataset(dir.path(), raw, 4, 17);
    entries = read_ground_truth(truth, dir.path());
  }
};

}  // namespace

TEST_CASE("evaluate_dataset aggregates the length-weighted error rate") {
  DatasetFixture fx;
  const EvalReport report = evaluate_dataset(fx.model, fx.entries, fx.precision);
  REQUIRE(report.per_image.size() == fx.entries.size());

  std::size_t edits = 0;
  std::size_t length = 0;
  for (std::size_t n = 0; n < report.per_image.size(); ++n) {
    const ImageResult& row = report.per_image[n];
    CHECK(row.truth == fx.entries[n].truth);
    CHECK(row.distance == levenshtein(row.predicted, row.truth));
    edits += row.distance;
    length += row.truth_length;
  }
  CHECK(report.aggregate_cer ==
        static_cast<double>(edits) / static_cast<double>(length));
  CHECK(report.accuracy == 1.0 - report.aggregate_cer);
  CHECK(report.max_columns >= 6);

  // two lines with distances 1 and 0 over truth lengths 4 and 4 -> 1/8
  std::size_t d_total = 0;
  for (const auto& row : report.per_image) {
    d_total += row.distance;
  }
  if (d_total == 0) {
    CHECK(report.aggregate_cer == 0.0);  // perfect decode corner
  }
}

TEST_CASE("dataset order does not change the aggregate rate") {
  DatasetFixture fx;
  const double forward_cer = evaluate_dataset(fx.model, fx.entries, fx.precision).aggregate_cer;
  std::vector<DatasetEntry> shuffled(fx.entries.rbegin(), fx.entries.rend());
  const double reversed_cer = evaluate_dataset(fx.model, shuffled, fx.precision).aggregate_cer;
  CHECK(forward_cer == reversed_cer);
}

TEST_CASE("dataset errors carry context") {
  DatasetFixture fx;
  CHECK_THROWS_AS(static_cast<void>(evaluate_dataset(fx.model, {}, fx.precision)),
                  DatasetError);

  auto bad = fx.entries;
  bad[0].truth = "aZb";  // Z is not in the toy alphabet
  CHECK_THROWS_WITH_AS(static_cast<void>(evaluate_dataset(fx.model, bad, fx.precision)),
                       doctest::Contains("'Z'"), DatasetError);

  auto missing = fx.entries;
  missing[0].image_path = fx.dir.path() / "absent.pgm";
  CHECK_THROWS_AS(static_cast<void>(evaluate_dataset(fx.model, missing, fx.precision)),
                  ParseError);
}

TEST_CASE("aggregation with known distances through a constant model") {
  // zero-weight hidden layer: every column's features are zero, so the
  // output-layer bias alone picks the argmax and each image decodes to
  // exactly one known symbol
  NetworkModel model;
  model.input_size = 2;
  model.hidden_size = 2;
  model.num_classes = 3;
  model.alphabet = {"", "a", "b"};
  GateParams zero_gate{Matrix(2, 2), Matrix(2, 2), Vector(2, 0.0)};
  model.forward = {zero_gate, zero_gate, zero_gate, zero_gate};
  model.backward = model.forward;
  model.output.weights = Matrix(3, 4);
  model.output.bias = {0.0, 1.0, 0.0};  // class "a" always wins

  testsupport::TempDir dir("eval-const");
  TextLineImage image;
  image.width = 3;
  image.height = 2;
  image.columns.assign(3, Vector(2, 0.25));
  save_pgm(dir.path() / "x.pgm", image);

  // predictions are all "a": distances 0 and 1 against lengths 1 and 2
  const std::vector<DatasetEntry> entries{{dir.path() / "x.pgm", "a"},
                                          {dir.path() / "x.pgm", "ab"}};
  const EvalReport report = evaluate_dataset(model, entries, make_precision(4, 4, 4));
  CHECK(report.per_image[0].predicted == "a");
  CHECK(report.per_image[0].distance == 0);
  CHECK(report.per_image[1].distance == 1);
  CHECK(report.aggregate_cer == 1.0 / 3.0);
  CHECK(report.accuracy == 1.0 - 1.0 / 3.0);
}
