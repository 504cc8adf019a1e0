#pragma once

// CSV serialization. Trajectory files have one header line and a fixed
// column order; numbers are written with enough digits (%.17g) that reading
// the file back reproduces every double bit-for-bit, with NaN spelled
// "nan". Matrix and vector readers take headerless comma-separated rows
// (problem data files).

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anchored/trajectory.hpp"

namespace anchored {

inline constexpr const char* kTrajectoryCsvHeader =
    "n,fgap,gradnorm,dist_xstar,step_disp,residual,noise_term,noise_cumsum";

void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log);
void write_trajectory_csv_file(const std::string& path,
                               const TrajectoryLog& log);
// The full file contents as a string (byte-comparison tests and hashing).
std::string trajectory_csv(const TrajectoryLog& log);

// Strict reader: the header line must match kTrajectoryCsvHeader and every
// row must have exactly eight fields. Throws invalid_argument naming the
// offending line. Reading what write_trajectory_csv produced loses nothing.
std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& is);
std::vector<TrajectoryRecord> read_trajectory_csv_file(
    const std::string& path);

// Headerless numeric CSV: rows of comma-separated values, all rows the same
// width. A vector file must be a single column or a single row.
Eigen::MatrixXd read_matrix_csv(std::istream& is);
Eigen::MatrixXd read_matrix_csv_file(const std::string& path);
Eigen::VectorXd read_vector_csv_file(const std::string& path);

}  // namespace anchored
