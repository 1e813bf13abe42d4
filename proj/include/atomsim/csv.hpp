#pragma once

// CSV ingestion for the analysis inputs. Comma separated, mandatory header,
// '.' decimal separator. Schema violations throw InputError with
// "<source>:<line>: <problem>".

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "atomsim/analysis.hpp"

namespace atomsim {

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

// Reads every row; the header must equal `expected_header` exactly (after
// trimming whitespace and a UTF-8 BOM) and every row must have as many fields.
CsvTable read_csv(std::istream& in, const std::vector<std::string>& expected_header, const std::string& source);
CsvTable read_csv_file(const std::string& path, const std::vector<std::string>& expected_header);

double parse_number(const std::string& field, const std::string& source, std::size_t line, const char* column);
long long parse_integer(const std::string& field, const std::string& source, std::size_t line, const char* column);

extern const std::vector<std::string> kTimeTagHeader;    // trial_id,detector_id,timestamp_ns
extern const std::vector<std::string> kParityHeader;     // basis,theta_deg,n_even,n_odd,n_total
extern const std::vector<std::string> kHistogramHeader;  // t_ns,count
extern const std::vector<std::string> kTimeSeriesHeader; // t_us,p,shots

std::vector<TimeTagRecord> read_time_tags(const std::string& path);
// One dataset per basis present in the file.
std::map<Basis, ParityDataset> read_parity(const std::string& path);
std::vector<HistogramBin> read_histogram(const std::string& path);
// Times are converted from microseconds to seconds.
std::vector<TimeSeriesPoint> read_time_series(const std::string& path);

void write_time_tags(std::ostream& out, const std::vector<TimeTagRecord>& records);
void write_parity(std::ostream& out, const std::vector<ParityDataset>& sets);
void write_histogram(std::ostream& out, const std::vector<HistogramBin>& bins);
void write_time_series(std::ostream& out, const std::vector<TimeSeriesPoint>& points);

}  // namespace atomsim
