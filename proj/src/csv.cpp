#include "atomsim/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "atomsim/errors.hpp"

namespace atomsim {

const std::vector<std::string> kTimeTagHeader{"trial_id", "detector_id", "timestamp_ns"};
const std::vector<std::string> kParityHeader{"basis", "theta_deg", "n_even", "n_odd", "n_total"};
const std::vector<std::string> kHistogramHeader{"t_ns", "count"};
const std::vector<std::string> kTimeSeriesHeader{"t_us", "p", "shots"};

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw InputError(source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::vector<std::string>& expected_header, const std::string& source) {
  CsvTable t;
  t.source = source;
  std::string line;
  std::size_t n = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++n;
    if (n == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      if (fields != expected_header)
        fail(source, n, "expected header '" + join(expected_header) + "', got '" + trim(line) + "'");
      t.header = fields;
      have_header = true;
      continue;
    }
    if (fields.size() != expected_header.size())
      fail(source, n, "expected " + std::to_string(expected_header.size()) + " fields, got " +
                          std::to_string(fields.size()));
    t.rows.push_back({n, std::move(fields)});
  }
  if (!have_header) fail(source, n == 0 ? 1 : n, "missing header row");
  return t;
}

CsvTable read_csv_file(const std::string& path, const std::vector<std::string>& expected_header) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_csv(in, expected_header, path);
}

double parse_number(const std::string& field, const std::string& source, std::size_t line, const char* column) {
  double v = 0.0;
  const char* b = field.data();
  const char* e = b + field.size();
  if (!field.empty() && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || field.empty())
    fail(source, line, std::string("column ") + column + ": '" + field + "' is not a number");
  if (!std::isfinite(v)) fail(source, line, std::string("column ") + column + ": non-finite value");
  return v;
}

long long parse_integer(const std::string& field, const std::string& source, std::size_t line, const char* column) {
  long long v = 0;
  const char* b = field.data();
  const char* e = b + field.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || field.empty())
    fail(source, line, std::string("column ") + column + ": '" + field + "' is not an integer");
  return v;
}

std::vector<TimeTagRecord> read_time_tags(const std::string& path) {
  const auto t = read_csv_file(path, kTimeTagHeader);
  std::vector<TimeTagRecord> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    TimeTagRecord rec;
    rec.trial_id = parse_integer(r.fields[0], path, r.line, "trial_id");
    const auto det = parse_integer(r.fields[1], path, r.line, "detector_id");
    if (det != 0 && det != 1) fail(path, r.line, "detector_id must be 0 or 1");
    rec.detector_id = static_cast<int>(det);
    rec.timestamp_ns = parse_integer(r.fields[2], path, r.line, "timestamp_ns");
    out.push_back(rec);
  }
  return out;
}

std::map<Basis, ParityDataset> read_parity(const std::string& path) {
  const auto t = read_csv_file(path, kParityHeader);
  std::map<Basis, ParityDataset> out;
  for (const auto& r : t.rows) {
    Basis b;
    try {
      b = basis_from_string(r.fields[0]);
    } catch (const InputError& e) {
      fail(path, r.line, e.what());
    }
    ParityPoint p;
    p.theta_deg = parse_number(r.fields[1], path, r.line, "theta_deg");
    p.n_even = parse_number(r.fields[2], path, r.line, "n_even");
    p.n_odd = parse_number(r.fields[3], path, r.line, "n_odd");
    p.n_total = parse_number(r.fields[4], path, r.line, "n_total");
    if (p.n_even < 0 || p.n_odd < 0 || p.n_total <= 0) fail(path, r.line, "counts must be non-negative, n_total positive");
    if (p.n_even + p.n_odd > p.n_total + 1e-9) fail(path, r.line, "n_even + n_odd exceeds n_total");
    auto& set = out[b];
    set.basis = b;
    set.points.push_back(p);
  }
  if (out.empty()) fail(path, 1, "no data rows");
  return out;
}

std::vector<HistogramBin> read_histogram(const std::string& path) {
  const auto t = read_csv_file(path, kHistogramHeader);
  std::vector<HistogramBin> out;
  for (const auto& r : t.rows) {
    HistogramBin b;
    b.t_ns = parse_number(r.fields[0], path, r.line, "t_ns");
    b.count = parse_number(r.fields[1], path, r.line, "count");
    if (b.count < 0) fail(path, r.line, "count must be non-negative");
    out.push_back(b);
  }
  if (out.empty()) fail(path, 1, "no data rows");
  return out;
}

std::vector<TimeSeriesPoint> read_time_series(const std::string& path) {
  const auto t = read_csv_file(path, kTimeSeriesHeader);
  std::vector<TimeSeriesPoint> out;
  for (const auto& r : t.rows) {
    TimeSeriesPoint p;
    p.t = parse_number(r.fields[0], path, r.line, "t_us") * 1e-6;
    p.p = parse_number(r.fields[1], path, r.line, "p");
    p.shots = parse_number(r.fields[2], path, r.line, "shots");
    if (p.p < 0 || p.p > 1) fail(path, r.line, "p must lie in [0, 1]");
    if (p.shots <= 0) fail(path, r.line, "shots must be positive");
    out.push_back(p);
  }
  if (out.empty()) fail(path, 1, "no data rows");
  return out;
}

void write_time_tags(std::ostream& out, const std::vector<TimeTagRecord>& records) {
  out << join(kTimeTagHeader) << '\n';
  for (const auto& r : records) out << r.trial_id << ',' << r.detector_id << ',' << r.timestamp_ns << '\n';
}

void write_parity(std::ostream& out, const std::vector<ParityDataset>& sets) {
  out << join(kParityHeader) << '\n' << std::setprecision(10);
  for (const auto& s : sets)
    for (const auto& p : s.points)
      out << to_string(s.basis) << ',' << p.theta_deg << ',' << p.n_even << ',' << p.n_odd << ',' << p.n_total << '\n';
}

void write_histogram(std::ostream& out, const std::vector<HistogramBin>& bins) {
  out << join(kHistogramHeader) << '\n' << std::setprecision(10);
  for (const auto& b : bins) out << b.t_ns << ',' << b.count << '\n';
}

void write_time_series(std::ostream& out, const std::vector<TimeSeriesPoint>& points) {
  out << join(kTimeSeriesHeader) << '\n' << std::setprecision(12);
  for (const auto& p : points) out << p.t * 1e6 << ',' << p.p << ',' << p.shots << '\n';
}

}  // namespace atomsim
