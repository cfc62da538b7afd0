#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "idbscan/matrix.hpp"

namespace idbscan {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// n points in d dimensions. A freshly loaded matrix may hold NaN cells, which
// mark missing or unparsable values; clean() removes those rows.
class DataMatrix {
 public:
  DataMatrix() = default;
  explicit DataMatrix(Matrix points, std::vector<std::string> attributes = {});

  static DataMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    return DataMatrix(Matrix::from_rows(rows));
  }

  std::size_t n() const { return points_.rows(); }
  std::size_t d() const { return points_.cols(); }

  double operator()(std::size_t i, std::size_t j) const { return points_(i, j); }
  std::span<const double> row(std::size_t i) const { return points_.row(i); }

  const Matrix& points() const { return points_; }

  // Column names, when the source provided them; otherwise empty.
  const std::vector<std::string>& attributes() const { return attributes_; }

  bool row_has_missing(std::size_t i) const;
  bool all_finite() const;

  friend bool operator==(const DataMatrix& a, const DataMatrix& b) { return a.points_ == b.points_; }

 private:
  Matrix points_;
  std::vector<std::string> attributes_;
};

enum class TextFormat { kCsv, kWhitespace };

struct LoadOptions {
  TextFormat format = TextFormat::kWhitespace;
  bool header = false;
};

// Parses one point per line. Empty fields, `NaN`, non-numeric and infinite
// cells are stored as NaN so the row is dropped by clean().
DataMatrix load_matrix(const std::filesystem::path& path, const LoadOptions& options = {});
DataMatrix parse_matrix(std::string_view text, const LoadOptions& options = {});

// Drops rows with a missing coordinate, then keeps the first occurrence of each
// exactly-equal row. Row order is preserved.
DataMatrix clean(const DataMatrix& matrix);

// Per-attribute affine map onto [lo, hi]; constant attributes map to lo.
DataMatrix minmax_normalize(const DataMatrix& matrix, double lo = 0.0, double hi = 100000.0);

void write_matrix(const std::filesystem::path& path, const DataMatrix& matrix);

}  // namespace idbscan
