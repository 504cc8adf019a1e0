#include "anchored/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace anchored {

namespace {

void append_double(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

std::string format_record(const TrajectoryRecord& rec) {
  std::string row = std::to_string(rec.n);
  for (double v : {rec.fgap, rec.gradnorm, rec.dist_xstar, rec.step_disp,
                   rec.residual, rec.noise_term, rec.noise_cumsum}) {
    row += ',';
    append_double(row, v);
  }
  row += '\n';
  return row;
}

double parse_double(const std::string& field, long line_no) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin) {
    throw std::invalid_argument("csv: line " + std::to_string(line_no) +
                                ": not a number: '" + field + "'");
  }
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  if (*end != '\0') {
    throw std::invalid_argument("csv: line " + std::to_string(line_no) +
                                ": trailing junk in '" + field + "'");
  }
  return v;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log) {
  os << kTrajectoryCsvHeader << '\n';
  for (const auto& rec : log.records) os << format_record(rec);
}

void write_trajectory_csv_file(const std::string& path,
                               const TrajectoryLog& log) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("csv: cannot open for writing: " + path);
  write_trajectory_csv(os, log);
  if (!os) throw std::runtime_error("csv: write failed: " + path);
}

std::string trajectory_csv(const TrajectoryLog& log) {
  std::ostringstream os;
  write_trajectory_csv(os, log);
  return os.str();
}

std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || strip_cr(line) != kTrajectoryCsvHeader) {
    throw std::invalid_argument(
        "csv: missing or wrong header; expected: " +
        std::string(kTrajectoryCsvHeader));
  }
  std::vector<TrajectoryRecord> records;
  long line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 8) {
      throw std::invalid_argument("csv: line " + std::to_string(line_no) +
                                  ": expected 8 fields, got " +
                                  std::to_string(fields.size()));
    }
    TrajectoryRecord rec;
    rec.n = static_cast<long>(parse_double(fields[0], line_no));
    rec.fgap = parse_double(fields[1], line_no);
    rec.gradnorm = parse_double(fields[2], line_no);
    rec.dist_xstar = parse_double(fields[3], line_no);
    rec.step_disp = parse_double(fields[4], line_no);
    rec.residual = parse_double(fields[5], line_no);
    rec.noise_term = parse_double(fields[6], line_no);
    rec.noise_cumsum = parse_double(fields[7], line_no);
    records.push_back(rec);
  }
  return records;
}

std::vector<TrajectoryRecord> read_trajectory_csv_file(
    const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("csv: cannot open: " + path);
  return read_trajectory_csv(is);
}

Eigen::MatrixXd read_matrix_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = strip_cr(line);
    // Skip blank lines; data files may end with one.
    bool blank = true;
    for (char c : line) {
      if (c != ' ' && c != '\t') blank = false;
    }
    if (blank) continue;
    const auto fields = split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("csv: line " + std::to_string(line_no) +
                                  ": ragged row (expected " +
                                  std::to_string(rows.front().size()) +
                                  " fields)");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("csv: no numeric rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
  }
  return m;
}

Eigen::MatrixXd read_matrix_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("csv: cannot open: " + path);
  return read_matrix_csv(is);
}

Eigen::VectorXd read_vector_csv_file(const std::string& path) {
  const Eigen::MatrixXd m = read_matrix_csv_file(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw std::invalid_argument("csv: " + path +
                              " is not a vector (one row or one column)");
}

}  // namespace anchored
