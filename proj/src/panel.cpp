#include "tvent/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tvent/error.hpp"

namespace tvent {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

Panel::Panel(std::size_t rows, std::size_t cols, std::vector<double> values,
             std::vector<std::string> labels,
             std::vector<std::string> timestamps)
    : rows_(rows),
      cols_(cols),
      values_(std::move(values)),
      labels_(std::move(labels)),
      timestamps_(std::move(timestamps)) {
  if (cols_ < 1) throw EmptyInput("panel needs at least one dimension");
  if (rows_ < 2) throw EmptyInput("panel needs at least two observations");
  if (values_.size() != rows_ * cols_)
    throw DomainError("panel value count does not match its shape");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]))
      throw DomainError("non-finite value at row " +
                        std::to_string(k / cols_ + 1) + ", column " +
                        std::to_string(k % cols_ + 1));
  }
  if (labels_.empty()) {
    for (std::size_t i = 0; i < cols_; ++i)
      labels_.push_back("x" + std::to_string(i + 1));
  }
  if (labels_.size() != cols_)
    throw DomainError("label count does not match column count");
  if (!timestamps_.empty() && timestamps_.size() != rows_)
    throw DomainError("timestamp count does not match row count");
}

std::vector<double> Panel::column(std::size_t i) const {
  std::vector<double> out(rows_);
  for (std::size_t t = 0; t < rows_; ++t) out[t] = (*this)(t, i);
  return out;
}

Panel Panel::slice_rows(std::size_t begin, std::size_t end) const {
  end = std::min(end, rows_);
  if (begin >= end) throw EmptyInput("empty row slice");
  std::vector<double> v(values_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
                        values_.begin() + static_cast<std::ptrdiff_t>(end * cols_));
  std::vector<std::string> ts;
  if (!timestamps_.empty())
    ts.assign(timestamps_.begin() + static_cast<std::ptrdiff_t>(begin),
              timestamps_.begin() + static_cast<std::ptrdiff_t>(end));
  return Panel(end - begin, cols_, std::move(v), labels_, std::move(ts));
}

Panel Panel::from_series(const std::vector<double>& series, std::string label) {
  return Panel(series.size(), 1, series, {std::move(label)});
}

Panel parse_csv(const std::string& text, const CsvOptions& options) {
  std::istringstream in(text);
  std::string line;
  std::size_t file_row = 0;
  std::size_t cols = 0;
  bool have_header = false;
  std::vector<std::string> labels;
  std::vector<std::string> timestamps;
  std::vector<double> values;
  std::size_t rows = 0;
  const std::size_t skip = options.timestamp_column ? 1 : 0;

  while (std::getline(in, line)) {
    ++file_row;
    if (trim(line).empty()) continue;
    auto cells = split(line, options.delimiter);
    if (options.header && !have_header) {
      have_header = true;
      if (cells.size() <= skip) throw ParseError(file_row, 1, "header has no data columns");
      for (std::size_t c = skip; c < cells.size(); ++c) labels.emplace_back(cells[c]);
      cols = labels.size();
      continue;
    }
    if (cells.size() <= skip) throw ParseError(file_row, 1, "row has no data columns");
    const std::size_t row_cols = cells.size() - skip;
    if (cols == 0) cols = row_cols;
    if (row_cols != cols)
      throw ParseError(file_row, std::min(row_cols, cols) + skip + 1,
                       "expected " + std::to_string(cols) + " columns, found " +
                           std::to_string(row_cols));
    if (skip) timestamps.emplace_back(cells[0]);
    for (std::size_t c = skip; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v))
        throw ParseError(file_row, c + 1, "cannot parse '" + std::string(cells[c]) +
                                              "' as a finite number");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw EmptyInput("CSV contains no data rows");
  if (rows < 2) throw EmptyInput("CSV needs at least two data rows");
  return Panel(rows, cols, std::move(values), std::move(labels), std::move(timestamps));
}

Panel load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), options);
}

ScalingMap::ScalingMap(std::vector<AffineMap> maps) : maps_(std::move(maps)) {
  for (const auto& m : maps_) {
    if (!(m.a > 0.0) || !std::isfinite(m.a) || !std::isfinite(m.b))
      throw DomainError("scaling coefficients must be finite with a > 0");
  }
}

double ScalingMap::forward_clipped(std::size_t i, double x) const {
  return std::clamp(maps_.at(i).forward(x), -1.0, 1.0);
}

Panel ScalingMap::apply(const Panel& panel, std::size_t* clipped) const {
  if (panel.cols() != maps_.size())
    throw DomainError("scaling map dimension does not match panel");
  std::vector<double> out(panel.values().size());
  std::size_t n_clipped = 0;
  for (std::size_t t = 0; t < panel.rows(); ++t) {
    for (std::size_t i = 0; i < panel.cols(); ++i) {
      const double y = maps_[i].forward(panel(t, i));
      const double c = std::clamp(y, -1.0, 1.0);
      if (c != y) ++n_clipped;
      out[t * panel.cols() + i] = c;
    }
  }
  if (n_clipped > 0)
    std::clog << "warning: clipped " << n_clipped
              << " value(s) outside the scaled domain [-1, 1]\n";
  if (clipped) *clipped = n_clipped;
  return Panel(panel.rows(), panel.cols(), std::move(out), panel.labels(),
               panel.timestamps());
}

Panel ScalingMap::invert(const Panel& scaled) const {
  if (scaled.cols() != maps_.size())
    throw DomainError("scaling map dimension does not match panel");
  std::vector<double> out(scaled.values().size());
  for (std::size_t t = 0; t < scaled.rows(); ++t)
    for (std::size_t i = 0; i < scaled.cols(); ++i)
      out[t * scaled.cols() + i] = maps_[i].inverse(scaled(t, i));
  return Panel(scaled.rows(), scaled.cols(), std::move(out), scaled.labels(),
               scaled.timestamps());
}

RescaleResult rescale(const Panel& panel) {
  const std::size_t n = panel.cols();
  std::vector<AffineMap> maps(n);
  std::vector<double> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = hi[i] = panel(0, i);
    for (std::size_t t = 1; t < panel.rows(); ++t) {
      lo[i] = std::min(lo[i], panel(t, i));
      hi[i] = std::max(hi[i], panel(t, i));
    }
    if (!(hi[i] > lo[i]))
      throw DegenerateDimension("dimension '" + panel.labels()[i] +
                                "' is constant and cannot be rescaled");
    const double a = 2.0 / (hi[i] - lo[i]);
    maps[i] = AffineMap{a, -1.0 - a * lo[i]};
  }
  // min -> -1 and max -> +1 exactly, regardless of rounding in a*x+b.
  std::vector<double> out(panel.values().size());
  for (std::size_t t = 0; t < panel.rows(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = panel(t, i);
      double y = maps[i].forward(x);
      if (x == lo[i]) y = -1.0;
      else if (x == hi[i]) y = 1.0;
      out[t * n + i] = std::clamp(y, -1.0, 1.0);
    }
  }
  Panel scaled(panel.rows(), n, std::move(out), panel.labels(), panel.timestamps());
  return {std::move(scaled), ScalingMap(std::move(maps))};
}

DescriptiveStats descriptive_stats(const Panel& panel) {
  if (panel.rows() < 4) throw DomainError("descriptive statistics need T >= 4");
  DescriptiveStats out;
  out.labels = panel.labels();
  const double T = static_cast<double>(panel.rows());
  for (std::size_t i = 0; i < panel.cols(); ++i) {
    const auto x = panel.column(i);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= T;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
      const double d = v - mean;
      const double d2 = d * d;
      m2 += d2;
      m3 += d2 * d;
      m4 += d2 * d2;
    }
    m2 /= T;
    m3 /= T;
    m4 /= T;
    if (!(m2 > 0.0))
      throw DegenerateDimension("dimension '" + panel.labels()[i] +
                                "' has zero variance");
    DimensionStats s;
    s.count = panel.rows();
    s.mean = mean;
    s.variance = m2;
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2);
    s.excess_kurtosis = s.kurtosis - 3.0;
    out.dims.push_back(s);
  }
  return out;
}

}  // namespace tvent
