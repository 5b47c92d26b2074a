#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tvent {

/// T x n matrix of observations, stored row-major (time-major).
///
/// Invariants enforced on construction: every entry finite, T >= 2, n >= 1,
/// labels.size() == n and, when present, timestamps.size() == T.
class Panel {
 public:
  Panel(std::size_t rows, std::size_t cols, std::vector<double> values,
        std::vector<std::string> labels = {},
        std::vector<std::string> timestamps = {});

  std::size_t rows() const noexcept { return rows_; }  // T
  std::size_t cols() const noexcept { return cols_; }  // n

  double operator()(std::size_t t, std::size_t i) const noexcept {
    return values_[t * cols_ + i];
  }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& timestamps() const noexcept {
    return timestamps_;
  }

  /// Copy of column i as a time series.
  std::vector<double> column(std::size_t i) const;

  /// Rows [begin, end) as a new panel (labels and timestamps carried over).
  Panel slice_rows(std::size_t begin, std::size_t end) const;

  /// Single-column panel from a series.
  static Panel from_series(const std::vector<double>& series,
                           std::string label = "x");

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  std::vector<std::string> labels_;
  std::vector<std::string> timestamps_;
};

struct CsvOptions {
  char delimiter = ',';
  bool header = false;
  /// Treat the first column as a timestamp/date label rather than data.
  bool timestamp_column = false;
};

/// Throws ParseError (with 1-based file row/column) or EmptyInput.
Panel load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Panel parse_csv(const std::string& text, const CsvOptions& options = {});

/// Per-dimension affine map x' = a * x + b onto [-1, 1].
struct AffineMap {
  double a = 1.0;
  double b = 0.0;

  double forward(double x) const noexcept { return a * x + b; }
  double inverse(double y) const noexcept { return (y - b) / a; }
};

class ScalingMap {
 public:
  ScalingMap() = default;
  explicit ScalingMap(std::vector<AffineMap> maps);

  std::size_t size() const noexcept { return maps_.size(); }
  const AffineMap& operator[](std::size_t i) const { return maps_.at(i); }
  const std::vector<AffineMap>& maps() const noexcept { return maps_; }

  /// Applies the map; entries landing outside [-1, 1] are clipped and a
  /// warning is written to std::clog. Returns the number of clipped entries
  /// through `clipped` when non-null.
  Panel apply(const Panel& panel, std::size_t* clipped = nullptr) const;
  Panel invert(const Panel& scaled) const;

  /// Scaled value of x in dimension i, clipped to [-1, 1].
  double forward_clipped(std::size_t i, double x) const;

 private:
  std::vector<AffineMap> maps_;
};

struct RescaleResult {
  Panel scaled;
  ScalingMap scaling;
};

/// Maps each dimension's exact [min, max] onto [-1, 1].
/// Throws DegenerateDimension when max == min.
RescaleResult rescale(const Panel& panel);

struct DimensionStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // population (1/T)
  double skewness = 0.0;  // g1 = m3 / m2^{3/2}
  double kurtosis = 0.0;  // raw fourth standardized moment m4 / m2^2
  double excess_kurtosis = 0.0;
};

struct DescriptiveStats {
  std::vector<std::string> labels;
  std::vector<DimensionStats> dims;
};

/// Requires T >= 4; throws DomainError otherwise.
DescriptiveStats descriptive_stats(const Panel& panel);

}  // namespace tvent
