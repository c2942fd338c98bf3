#pragma once

#include <optional>
#include <string>
#include <vector>

namespace qgamp {

/// Half-open interval [lo, hi); either end may be infinite.
struct Interval {
  double lo;
  double hi;
  bool contains(double s) const { return lo <= s && s < hi; }
  double width() const { return hi - lo; }
};

/// Ordered union of pairwise-disjoint half-open intervals. A regular
/// quantizer cell is a single interval; a binned cell may be several.
class CellSet {
 public:
  explicit CellSet(std::vector<Interval> intervals);

  const std::vector<Interval>& intervals() const { return intervals_; }
  bool contains(double s) const;
  bool covers_everything() const;

 private:
  std::vector<Interval> intervals_;
};

struct GaussianSource {
  double mean = 0.0;
  double variance = 1.0;
};

/// Truncation radius, in standard deviations, used when materializing the
/// periodic cells of a modulo quantizer; the mass left outside is < 1e-15.
inline constexpr double kModuloWindowRadius = 8.0;

/// K-level scalar quantizer. A fine regular encoder (strictly increasing
/// thresholds, half-open cells) composed with an onto binning map gives the
/// coarse labels; kind `modulo` generates its periodic cells on demand.
/// Labels are 1-based. Decoder levels are optional and only consulted by
/// distortion computations and decoding, never by the message-passing path.
class ScalarQuantizer {
 public:
  enum class Kind { Regular, Binned, Modulo };

  static ScalarQuantizer regular(std::vector<double> thresholds,
                                 std::optional<std::vector<double>> levels = std::nullopt);
  static ScalarQuantizer binned(std::vector<double> thresholds, std::vector<int> binning,
                                std::optional<std::vector<double>> levels = std::nullopt);
  static ScalarQuantizer modulo(double delta, int labels);

  /// K uniform cells over the granular region [-loading, loading]; the two
  /// outermost cells are unbounded. Levels are cell midpoints, with the
  /// unbounded cells represented by +/-(loading + half cell width).
  static ScalarQuantizer uniform_regular(int levels_count, double loading);

  Kind kind() const { return kind_; }
  int num_labels() const;
  int num_fine_cells() const;

  int encode(double s) const;

  /// Inverse image of a label. Modulo quantizers require the context
  /// overload; the window is context mean +/- kModuloWindowRadius stddevs.
  CellSet cell_set(int label) const;
  CellSet cell_set(int label, const GaussianSource& context) const;

  bool has_levels() const { return levels_.has_value(); }
  /// Decoder output for a coarse label (regular quantizers only).
  double decode(int label) const;

  /// E[(s - level(fine_cell(s)))^2] for s ~ src.
  double measurement_distortion(const GaussianSource& src) const;

  std::string to_kv() const;
  static ScalarQuantizer from_kv(const std::string& text);

  const std::vector<double>& thresholds() const { return thresholds_; }
  const std::vector<int>& binning() const { return binning_; }
  const std::optional<std::vector<double>>& levels() const { return levels_; }
  double delta() const { return delta_; }
  int modulo_labels() const { return modulo_labels_; }

  bool operator==(const ScalarQuantizer&) const = default;

 private:
  ScalarQuantizer() = default;
  int fine_index(double s) const;

  Kind kind_ = Kind::Regular;
  std::vector<double> thresholds_;          // K'-1 finite, strictly increasing
  std::vector<int> binning_;                // fine index -> coarse label, 1-based
  std::optional<std::vector<double>> levels_;  // one per fine cell
  int num_labels_ = 0;
  double delta_ = 0.0;                      // modulo step
  int modulo_labels_ = 0;                   // modulo label count N
};

}  // namespace qgamp
