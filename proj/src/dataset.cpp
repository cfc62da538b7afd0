#include "idbscan/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace idbscan {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_cell(std::string_view field) {
  field = trim(field);
  if (field.empty()) return kMissing;
  if (field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
    return kMissing;
  }
  return value == 0.0 ? 0.0 : value;
}

std::vector<double> split_fields(std::string_view line, TextFormat format) {
  std::vector<double> out;
  if (format == TextFormat::kCsv) {
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      out.push_back(parse_cell(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  } else {
    std::size_t pos = 0;
    while (pos < line.size()) {
      pos = line.find_first_not_of(" \t\r", pos);
      if (pos == std::string_view::npos) break;
      auto end = line.find_first_of(" \t\r", pos);
      if (end == std::string_view::npos) end = line.size();
      out.push_back(parse_cell(line.substr(pos, end - pos)));
      pos = end;
    }
  }
  return out;
}

std::vector<std::string> split_header(std::string_view line, TextFormat format) {
  std::vector<std::string> names;
  if (format == TextFormat::kCsv) {
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      names.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  } else {
    std::istringstream in{std::string(line)};
    for (std::string name; in >> name;) names.push_back(name);
  }
  return names;
}

struct RowHash {
  const Matrix* m;
  std::size_t operator()(std::size_t r) const {
    std::uint64_t h = 1469598103934665603ull;
    for (double v : m->row(r)) {
      h ^= std::bit_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

struct RowEqual {
  const Matrix* m;
  bool operator()(std::size_t a, std::size_t b) const {
    const auto ra = m->row(a);
    const auto rb = m->row(b);
    for (std::size_t j = 0; j < ra.size(); ++j) {
      if (std::bit_cast<std::uint64_t>(ra[j]) != std::bit_cast<std::uint64_t>(rb[j])) return false;
    }
    return true;
  }
};

}  // namespace

DataMatrix::DataMatrix(Matrix points, std::vector<std::string> attributes)
    : points_(std::move(points)), attributes_(std::move(attributes)) {
  if (points_.rows() == 0 || points_.cols() == 0) {
    throw DatasetError("data matrix must have at least one row and one column");
  }
  if (!attributes_.empty() && attributes_.size() != points_.cols()) {
    throw DatasetError("attribute name count does not match column count");
  }
}

bool DataMatrix::row_has_missing(std::size_t i) const {
  return std::ranges::any_of(row(i), [](double v) { return !std::isfinite(v); });
}

bool DataMatrix::all_finite() const {
  return std::ranges::all_of(points_.values(), [](double v) { return std::isfinite(v); });
}

DataMatrix parse_matrix(std::string_view text, const LoadOptions& options) {
  std::vector<double> values;
  std::vector<std::string> attributes;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool header_pending = options.header;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (header_pending) {
      attributes = split_header(line, options.format);
      header_pending = false;
      continue;
    }
    auto fields = split_fields(line, options.format);
    if (rows == 0) {
      cols = fields.size();
    } else if (fields.size() != cols) {
      throw DatasetError("ragged rows: line " + std::to_string(line_no) + " has " +
                         std::to_string(fields.size()) + " fields, expected " + std::to_string(cols));
    }
    values.insert(values.end(), fields.begin(), fields.end());
    ++rows;
    if (end == text.size()) break;
  }
  if (rows == 0 || cols == 0) throw DatasetError("zero usable rows");
  if (!attributes.empty() && attributes.size() != cols) attributes.clear();
  return DataMatrix(Matrix(rows, cols, std::move(values)), std::move(attributes));
}

DataMatrix load_matrix(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw DatasetError("cannot read " + path.string());
  return parse_matrix(buffer.str(), options);
}

DataMatrix clean(const DataMatrix& matrix) {
  std::vector<double> finite;
  finite.reserve(matrix.points().values().size());
  std::size_t finite_rows = 0;
  for (std::size_t i = 0; i < matrix.n(); ++i) {
    if (matrix.row_has_missing(i)) continue;
    // -0.0 and 0.0 are the same coordinate; keep one bit pattern.
    for (double v : matrix.row(i)) finite.push_back(v == 0.0 ? 0.0 : v);
    ++finite_rows;
  }
  if (finite_rows == 0) throw DatasetError("clean removed every row");

  const Matrix src(finite_rows, matrix.d(), std::move(finite));
  std::unordered_set<std::size_t, RowHash, RowEqual> seen(src.rows(), RowHash{&src}, RowEqual{&src});
  std::vector<double> kept;
  kept.reserve(src.values().size());
  std::size_t rows = 0;
  for (std::size_t i = 0; i < src.rows(); ++i) {
    if (!seen.insert(i).second) continue;
    const auto r = src.row(i);
    kept.insert(kept.end(), r.begin(), r.end());
    ++rows;
  }
  return DataMatrix(Matrix(rows, src.cols(), std::move(kept)), matrix.attributes());
}

DataMatrix minmax_normalize(const DataMatrix& matrix, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("minmax_normalize: hi must exceed lo");
  Matrix out = matrix.points();
  const double span = hi - lo;
  for (std::size_t j = 0; j < out.cols(); ++j) {
    double mn = out(0, j);
    double mx = out(0, j);
    for (std::size_t i = 1; i < out.rows(); ++i) {
      mn = std::min(mn, out(i, j));
      mx = std::max(mx, out(i, j));
    }
    const double range = mx - mn;
    for (std::size_t i = 0; i < out.rows(); ++i) {
      double& v = out(i, j);
      if (range == 0.0 || v == mn) {
        v = lo;
      } else if (v == mx) {
        v = hi;
      } else {
        v = std::clamp(lo + (v - mn) / range * span, lo, hi);
      }
    }
  }
  return DataMatrix(std::move(out), matrix.attributes());
}

void write_matrix(const std::filesystem::path& path, const DataMatrix& matrix) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write " + path.string());
  out << std::setprecision(17);
  for (std::size_t i = 0; i < matrix.n(); ++i) {
    const auto r = matrix.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << ' ';
      out << r[j];
    }
    out << '\n';
  }
  if (!out) throw DatasetError("cannot write " + path.string());
}

}  // namespace idbscan
