#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace mghs::io {

using Eigen::MatrixXd;

// Comma-separated numeric matrix, one observation per row. A non-numeric
// first line is treated as a header and skipped. Errors carry row/column
// positions.
MatrixXd read_csv_matrix(const std::string& path);

void write_csv_matrix(const std::string& path, const MatrixXd& m,
                      const std::vector<std::string>& header = {});

void write_csv_matrix(const std::string& path, const Eigen::MatrixXi& m);

// Zero mean, unit variance per column; constant columns are only centered.
MatrixXd standardize_columns(const MatrixXd& m);

// FNV-1a digest of a file's bytes, hex-encoded; used by run manifests.
std::string file_digest(const std::string& path);

bool file_exists(const std::string& path);
void ensure_directory(const std::string& path);

// Sorted paths matching <dir>/<prefix>*<suffix>.
std::vector<std::string> list_files(const std::string& dir,
                                    const std::string& prefix,
                                    const std::string& suffix);

}  // namespace mghs::io
