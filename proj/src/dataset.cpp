#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "gmp/io.hpp"

namespace gmp {

DataFormat parse_data_format(const std::string& name) {
  if (name == "csv") return DataFormat::DenseCSV;
  if (name == "mm" || name == "mtx") return DataFormat::MatrixMarketCoordinate;
  if (name == "triples") return DataFormat::RatingTriples;
  throw std::invalid_argument("unknown format '" + name + "' (expected csv, mm or triples)");
}

DataFormat guess_data_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return DataFormat::DenseCSV;
  if (ext == ".mtx" || ext == ".mm") return DataFormat::MatrixMarketCoordinate;
  return DataFormat::RatingTriples;
}

Matrix Dataset::to_dense() const {
  Matrix out = Matrix::Zero(rows, cols);
  for (std::size_t e = 0; e < coords.size(); ++e) out(coords[e].row, coords[e].col) = values[e];
  return out;
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && errno != ERANGE;
}

bool parse_index(const std::string& text, long long& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtoll(t.c_str(), &end, 10);
  return end == t.c_str() + t.size() && errno != ERANGE;
}

std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

// Keep the last value for repeated coordinates, preserving first-seen order.
void dedupe_keep_last(Dataset& ds, const char* what) {
  std::map<Coordinate, std::size_t> seen;
  std::vector<Coordinate> coords;
  std::vector<double> values;
  std::size_t duplicates = 0;
  for (std::size_t e = 0; e < ds.coords.size(); ++e) {
    auto [it, inserted] = seen.emplace(ds.coords[e], coords.size());
    if (inserted) {
      coords.push_back(ds.coords[e]);
      values.push_back(ds.values[e]);
    } else {
      values[it->second] = ds.values[e];
      ++duplicates;
    }
  }
  if (duplicates > 0) {
    ds.warnings.push_back(std::to_string(duplicates) + " duplicate " + what +
                          " entries; kept the last occurrence");
  }
  ds.coords = std::move(coords);
  ds.values = std::move(values);
}

}  // namespace

Dataset read_dense_csv(std::istream& in) {
  Dataset ds;
  ds.format = DataFormat::DenseCSV;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_on(trim(line), ',');
    std::vector<double> row;
    bool numeric = true;
    for (const auto& f : fields) {
      double v = 0.0;
      if (!parse_double(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw ParseError(where(line_no) + "non-numeric field in CSV row");
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(where(line_no) + "expected " + std::to_string(rows.front().size()) + " columns, got " +
                       std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("CSV input has no data rows");
  ds.rows = static_cast<Eigen::Index>(rows.size());
  ds.cols = static_cast<Eigen::Index>(rows.front().size());
  for (Eigen::Index i = 0; i < ds.rows; ++i) {
    for (Eigen::Index j = 0; j < ds.cols; ++j) {
      ds.coords.push_back({i, j});
      ds.values.push_back(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
  }
  return ds;
}

Dataset read_matrix_market(std::istream& in) {
  Dataset ds;
  ds.format = DataFormat::MatrixMarketCoordinate;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("MatrixMarket input is empty");
  ++line_no;
  std::istringstream header(line);
  std::string banner, object, layout, field, symmetry;
  header >> banner >> object >> layout >> field >> symmetry;
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  if (banner != "%%MatrixMarket" || lower(object) != "matrix" || lower(layout) != "coordinate") {
    throw ParseError("expected '%%MatrixMarket matrix coordinate' header");
  }
  field = lower(field);
  symmetry = lower(symmetry);
  if (field != "real" && field != "integer") throw ParseError("unsupported MatrixMarket field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric") {
    throw ParseError("unsupported MatrixMarket symmetry '" + symmetry + "'");
  }

  long long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '%') continue;
    std::istringstream is(t);
    if (!(is >> rows >> cols >> nnz) || rows <= 0 || cols <= 0 || nnz < 0) {
      throw ParseError(where(line_no) + "bad size line");
    }
    break;
  }
  if (rows < 0) throw ParseError("MatrixMarket size line missing");
  ds.rows = rows;
  ds.cols = cols;

  long long read = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '%') continue;
    std::istringstream is(t);
    std::string si, sj, sv;
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(is >> si >> sj >> sv) || !parse_index(si, i) || !parse_index(sj, j) || !parse_double(sv, v)) {
      throw ParseError(where(line_no) + "bad coordinate entry");
    }
    if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError(where(line_no) + "index out of range");
    ds.coords.push_back({i - 1, j - 1});
    ds.values.push_back(v);
    if (symmetry == "symmetric" && i != j) {
      ds.coords.push_back({j - 1, i - 1});
      ds.values.push_back(v);
    }
    ++read;
  }
  if (read != nnz) {
    throw ParseError("MatrixMarket header declares " + std::to_string(nnz) + " entries, found " +
                     std::to_string(read));
  }
  dedupe_keep_last(ds, "coordinate");
  return ds;
}

Dataset read_rating_triples(std::istream& in) {
  Dataset ds;
  ds.format = DataFormat::RatingTriples;
  std::string line;
  std::size_t line_no = 0;
  long long max_user = 0, max_item = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == '%') continue;
    for (std::size_t p = t.find("::"); p != std::string::npos; p = t.find("::", p)) t.replace(p, 2, " ");
    std::istringstream is(t);
    std::string su, si, sr;
    long long user = 0, item = 0;
    double rating = 0.0;
    if (!(is >> su >> si >> sr) || !parse_index(su, user) || !parse_index(si, item) || !parse_double(sr, rating)) {
      throw ParseError(where(line_no) + "expected 'user item rating [timestamp]'");
    }
    if (user < 1 || item < 1) throw ParseError(where(line_no) + "user and item ids are 1-indexed");
    max_user = std::max(max_user, user);
    max_item = std::max(max_item, item);
    ds.coords.push_back({user - 1, item - 1});
    ds.values.push_back(rating);
  }
  if (ds.coords.empty()) throw ParseError("rating input has no entries");
  ds.rows = max_user;
  ds.cols = max_item;
  dedupe_keep_last(ds, "(user, item)");
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path, DataFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  switch (format) {
    case DataFormat::DenseCSV: return read_dense_csv(in);
    case DataFormat::MatrixMarketCoordinate: return read_matrix_market(in);
    case DataFormat::RatingTriples: return read_rating_triples(in);
  }
  throw ParseError("unsupported format");
}

SplitFractions SplitFractions::parse(const std::string& text) {
  const auto parts = split_on(text, ',');
  if (parts.size() != 3) throw std::invalid_argument("split must be 'train,validation,test'");
  double v[3];
  for (int i = 0; i < 3; ++i) {
    if (!parse_double(parts[static_cast<std::size_t>(i)], v[i]) || v[i] < 0.0 || !std::isfinite(v[i])) {
      throw std::invalid_argument("split fractions must be non-negative numbers");
    }
  }
  if (std::abs(v[0] + v[1] + v[2] - 1.0) > 1e-9) throw std::invalid_argument("split fractions must sum to 1");
  return SplitFractions{v[0], v[1], v[2]};
}

std::vector<Split> assign_splits(std::size_t count, const SplitFractions& fractions, std::uint64_t seed) {
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = count; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(fractions.train * static_cast<double>(count)));
  const auto n_val = std::min(count - std::min(count, n_train),
                              static_cast<std::size_t>(std::llround(fractions.validation * static_cast<double>(count))));
  std::vector<Split> out(count, Split::Test);
  for (std::size_t p = 0; p < count; ++p) {
    if (p < n_train) {
      out[order[p]] = Split::Train;
    } else if (p < n_train + n_val) {
      out[order[p]] = Split::Validation;
    } else if (fractions.test == 0.0) {
      // rounding leftovers go to the last non-empty split
      out[order[p]] = fractions.validation > 0.0 ? Split::Validation : Split::Train;
    }
  }
  return out;
}

}  // namespace gmp
