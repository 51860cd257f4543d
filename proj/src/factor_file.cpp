#include <cstdio>
#include <fstream>
#include <sstream>

#include "gmp/io.hpp"

namespace gmp {

namespace {

constexpr const char* kMagic = "gmp-factors";
constexpr int kVersion = 1;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_vector(std::ostringstream& os, const char* tag, const Vector& v) {
  os << tag;
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << num(v[i]);
  os << '\n';
}

std::string expect_key(std::istream& in, const std::string& key) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string k;
    is >> k;
    if (k != key) throw ParseError("factor file: expected '" + key + "', got '" + k + "'");
    std::string rest;
    std::getline(is, rest);
    auto b = rest.find_first_not_of(' ');
    return b == std::string::npos ? std::string() : rest.substr(b);
  }
  throw ParseError("factor file: missing '" + key + "'");
}

Vector read_vector(const std::string& text, Eigen::Index expected, const char* what) {
  std::istringstream is(text);
  std::vector<double> vals;
  std::string tok;
  while (is >> tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) throw ParseError(std::string("factor file: bad number in ") + what);
    vals.push_back(v);
  }
  if (static_cast<Eigen::Index>(vals.size()) != expected) {
    throw ParseError(std::string("factor file: ") + what + " has " + std::to_string(vals.size()) +
                     " entries, expected " + std::to_string(expected));
  }
  return Eigen::Map<Vector>(vals.data(), expected);
}

}  // namespace

std::string format_factor_file(const FactorFile& file) {
  const FactorModel& m = file.model;
  std::ostringstream os;
  os << kMagic << ' ' << kVersion << '\n';
  os << "shape " << m.rows << ' ' << m.cols << '\n';
  os << "symmetric " << (file.symmetric ? 1 : 0) << '\n';
  os << "spec_u " << file.spec_u.to_string() << '\n';
  os << "spec_v " << file.spec_v.to_string() << '\n';
  os << "rank " << m.rank() << '\n';
  for (std::size_t t = 0; t < m.rank(); ++t) {
    os << "alpha " << num(m.weights[static_cast<Eigen::Index>(t)]) << '\n';
    write_vector(os, "u", m.terms[t].u.values);
    write_vector(os, "v", m.terms[t].v.values);
  }
  return os.str();
}

FactorFile parse_factor_file(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("factor file: empty input");
  {
    std::istringstream is(line);
    std::string magic;
    int version = 0;
    is >> magic >> version;
    if (magic != kMagic || version != kVersion) throw ParseError("factor file: unrecognized header");
  }
  FactorFile f;
  {
    std::istringstream is(expect_key(in, "shape"));
    if (!(is >> f.model.rows >> f.model.cols) || f.model.rows <= 0 || f.model.cols <= 0) {
      throw ParseError("factor file: bad shape");
    }
  }
  f.symmetric = expect_key(in, "symmetric") == "1";
  try {
    f.spec_u = AtomSpec::parse(expect_key(in, "spec_u"));
    f.spec_v = AtomSpec::parse(expect_key(in, "spec_v"));
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("factor file: ") + e.what());
  }
  std::size_t rank = 0;
  {
    std::istringstream is(expect_key(in, "rank"));
    if (!(is >> rank)) throw ParseError("factor file: bad rank");
  }
  f.model.weights = Vector(static_cast<Eigen::Index>(rank));
  for (std::size_t t = 0; t < rank; ++t) {
    f.model.weights[static_cast<Eigen::Index>(t)] = read_vector(expect_key(in, "alpha"), 1, "alpha")[0];
    Vector u = read_vector(expect_key(in, "u"), f.model.rows, "u");
    Vector v = read_vector(expect_key(in, "v"), f.model.cols, "v");
    f.model.terms.push_back(RankOneTerm{VectorAtom{std::move(u), f.spec_u}, VectorAtom{std::move(v), f.spec_v}});
  }
  return f;
}

FactorFile read_factor_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return parse_factor_file(in);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace gmp
