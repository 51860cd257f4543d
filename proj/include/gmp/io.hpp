#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmp/atomset.hpp"
#include "gmp/objective.hpp"

namespace gmp {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DataFormat { DenseCSV, MatrixMarketCoordinate, RatingTriples };

/// "csv", "mm" or "triples".
DataFormat parse_data_format(const std::string& name);
/// Guess from the file extension: .csv, .mtx/.mm, anything else is triples.
DataFormat guess_data_format(const std::filesystem::path& path);

/// Observed entries of a matrix, 0-indexed, in input order.
struct Dataset {
  DataFormat format = DataFormat::DenseCSV;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<Coordinate> coords;
  std::vector<double> values;
  std::vector<std::string> warnings;

  std::size_t size() const { return coords.size(); }
  bool fully_observed() const { return coords.size() == static_cast<std::size_t>(rows * cols); }
  Matrix to_dense() const;
};

/// Comma-separated rows; a first line with any non-numeric field is a header.
Dataset read_dense_csv(std::istream& in);
/// `%%MatrixMarket matrix coordinate real|integer general|symmetric`, 1-indexed.
Dataset read_matrix_market(std::istream& in);
/// `user item rating [timestamp]` per line, separated by whitespace or "::",
/// 1-indexed. A repeated (user, item) pair keeps its last rating.
Dataset read_rating_triples(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path, DataFormat format);

enum class Split : std::uint8_t { Train, Validation, Test };

struct SplitFractions {
  double train = 1.0;
  double validation = 0.0;
  double test = 0.0;

  /// Parse "a,b,c"; fractions must be non-negative and sum to 1.
  static SplitFractions parse(const std::string& text);
};

/// Split label per entry: a seeded shuffle of the entry order, cut into
/// consecutive train / validation / test blocks.
std::vector<Split> assign_splits(std::size_t count, const SplitFractions& fractions, std::uint64_t seed);

/// Shape, atom sets and (alpha, u, v) per term, written with 17
/// significant digits so the model reloads bit-exactly.
struct FactorFile {
  FactorModel model;
  AtomSpec spec_u;
  AtomSpec spec_v;
  bool symmetric = false;
};

std::string format_factor_file(const FactorFile& file);
FactorFile parse_factor_file(std::istream& in);
FactorFile read_factor_file(const std::filesystem::path& path);

/// Write to a temporary sibling, then rename over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace gmp
