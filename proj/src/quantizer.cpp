#include "qgamp/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qgamp/channels.hpp"
#include "qgamp/kvconfig.hpp"

namespace qgamp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CellSet::CellSet(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  if (intervals_.empty()) throw std::invalid_argument("CellSet: empty");
  for (const auto& iv : intervals_) {
    if (!(iv.lo < iv.hi)) throw std::invalid_argument("CellSet: interval needs lo < hi");
  }
  for (std::size_t i = 1; i < intervals_.size(); ++i) {
    if (!(intervals_[i - 1].hi <= intervals_[i].lo))
      throw std::invalid_argument("CellSet: intervals must be disjoint and sorted");
  }
}

bool CellSet::contains(double s) const {
  for (const auto& iv : intervals_)
    if (iv.contains(s)) return true;
  return false;
}

bool CellSet::covers_everything() const {
  return intervals_.size() == 1 && intervals_[0].lo == -kInf && intervals_[0].hi == kInf;
}

ScalarQuantizer ScalarQuantizer::regular(std::vector<double> thresholds,
                                         std::optional<std::vector<double>> levels) {
  const int fine = static_cast<int>(thresholds.size()) + 1;
  std::vector<int> identity(fine);
  for (int i = 0; i < fine; ++i) identity[i] = i + 1;
  return binned(std::move(thresholds), std::move(identity), std::move(levels));
}

ScalarQuantizer ScalarQuantizer::binned(std::vector<double> thresholds, std::vector<int> binning,
                                        std::optional<std::vector<double>> levels) {
  ScalarQuantizer q;
  for (double t : thresholds)
    if (!std::isfinite(t)) throw std::invalid_argument("quantizer: thresholds must be finite");
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (!(thresholds[i - 1] < thresholds[i]))
      throw std::invalid_argument("quantizer: thresholds must be strictly increasing");

  const int fine = static_cast<int>(thresholds.size()) + 1;
  if (static_cast<int>(binning.size()) != fine)
    throw std::invalid_argument("quantizer: binning needs one coarse label per fine cell");
  const int coarse = *std::max_element(binning.begin(), binning.end());
  std::vector<bool> seen(coarse, false);
  for (int b : binning) {
    if (b < 1 || b > coarse) throw std::invalid_argument("quantizer: binning labels must be 1..K");
    seen[b - 1] = true;
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    throw std::invalid_argument("quantizer: binning must be onto 1..K");

  if (levels && static_cast<int>(levels->size()) != fine)
    throw std::invalid_argument("quantizer: need one level per fine cell");

  bool identity = true;
  for (int i = 0; i < fine; ++i) identity &= (binning[i] == i + 1);

  q.kind_ = identity ? Kind::Regular : Kind::Binned;
  q.thresholds_ = std::move(thresholds);
  q.binning_ = std::move(binning);
  q.levels_ = std::move(levels);
  q.num_labels_ = coarse;
  return q;
}

ScalarQuantizer ScalarQuantizer::modulo(double delta, int labels) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("quantizer: modulo step must be positive");
  if (labels < 1) throw std::invalid_argument("quantizer: modulo needs labels >= 1");
  ScalarQuantizer q;
  q.kind_ = Kind::Modulo;
  q.delta_ = delta;
  q.modulo_labels_ = labels;
  q.num_labels_ = labels;
  return q;
}

ScalarQuantizer ScalarQuantizer::uniform_regular(int levels_count, double loading) {
  if (levels_count < 1) throw std::invalid_argument("uniform_regular: need levels_count >= 1");
  if (!(loading > 0.0)) throw std::invalid_argument("uniform_regular: need loading > 0");
  const double step = 2.0 * loading / levels_count;
  std::vector<double> thresholds(levels_count - 1);
  for (int i = 1; i < levels_count; ++i) thresholds[i - 1] = -loading + step * i;
  std::vector<double> levels(levels_count);
  for (int i = 0; i < levels_count; ++i) levels[i] = -loading + step * (i + 0.5);
  if (levels_count >= 2) {
    levels.front() = -(loading + 0.5 * step);
    levels.back() = loading + 0.5 * step;
  }
  return regular(std::move(thresholds), std::move(levels));
}

int ScalarQuantizer::num_labels() const { return num_labels_; }

int ScalarQuantizer::num_fine_cells() const {
  if (kind_ == Kind::Modulo) throw std::logic_error("modulo quantizer has unbounded fine cells");
  return static_cast<int>(thresholds_.size()) + 1;
}

int ScalarQuantizer::fine_index(double s) const {
  const auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), s);
  return static_cast<int>(it - thresholds_.begin()) + 1;
}

int ScalarQuantizer::encode(double s) const {
  if (!std::isfinite(s)) throw std::invalid_argument("encode: input must be finite");
  if (kind_ == Kind::Modulo) {
    const auto k = static_cast<long long>(std::floor(s / delta_));
    const long long n = modulo_labels_;
    return static_cast<int>(((k % n) + n) % n) + 1;
  }
  return binning_[fine_index(s) - 1];
}

CellSet ScalarQuantizer::cell_set(int label) const {
  if (kind_ == Kind::Modulo)
    throw std::logic_error("modulo cell_set requires a Gaussian context for truncation");
  if (label < 1 || label > num_labels_) throw std::invalid_argument("cell_set: label out of range");
  std::vector<Interval> cells;
  const int fine = num_fine_cells();
  for (int i = 1; i <= fine; ++i) {
    if (binning_[i - 1] != label) continue;
    const double lo = (i == 1) ? -kInf : thresholds_[i - 2];
    const double hi = (i == fine) ? kInf : thresholds_[i - 1];
    if (!cells.empty() && cells.back().hi == lo) {
      cells.back().hi = hi;  // merge adjacent fine cells with the same label
    } else {
      cells.push_back({lo, hi});
    }
  }
  return CellSet(std::move(cells));
}

CellSet ScalarQuantizer::cell_set(int label, const GaussianSource& context) const {
  if (kind_ != Kind::Modulo) return cell_set(label);
  if (label < 1 || label > num_labels_) throw std::invalid_argument("cell_set: label out of range");
  const double sd = std::sqrt(context.variance);
  const double wlo = context.mean - kModuloWindowRadius * sd;
  const double whi = context.mean + kModuloWindowRadius * sd;
  const double period = delta_ * modulo_labels_;
  // Periods [a, a + delta) with a = (label-1 + k N) delta that overlap [wlo, whi).
  const double base = (label - 1) * delta_;
  const auto k_first = static_cast<long long>(std::ceil((wlo - base - delta_) / period));
  std::vector<Interval> cells;
  for (long long k = k_first;; ++k) {
    const double lo = base + static_cast<double>(k) * period;
    if (lo >= whi) break;
    if (lo + delta_ <= wlo) continue;
    cells.push_back({lo, lo + delta_});
  }
  if (cells.empty()) {
    // Period longer than the window: keep the label's nearest cell so the
    // inverse image stays nonempty (its mass under the context is tiny).
    const double k = std::round((context.mean - base) / period);
    const double lo = base + k * period;
    cells.push_back({lo, lo + delta_});
  }
  return CellSet(std::move(cells));
}

double ScalarQuantizer::decode(int label) const {
  if (!levels_) throw std::logic_error("decode: quantizer has no levels");
  if (kind_ != Kind::Regular) throw std::logic_error("decode: coarse labels are ambiguous");
  if (label < 1 || label > num_labels_) throw std::invalid_argument("decode: label out of range");
  return (*levels_)[label - 1];
}

double ScalarQuantizer::measurement_distortion(const GaussianSource& src) const {
  if (kind_ == Kind::Modulo || !levels_)
    throw std::logic_error("measurement_distortion: needs a level for every fine cell");
  double total = 0.0;
  const int fine = num_fine_cells();
  for (int i = 1; i <= fine; ++i) {
    const double lo = (i == 1) ? -kInf : thresholds_[i - 2];
    const double hi = (i == fine) ? kInf : thresholds_[i - 1];
    const auto m = trunc_gauss_moments(CellSet({{lo, hi}}), src.mean, src.variance);
    if (m.degenerate) continue;
    const double bias = m.mean - (*levels_)[i - 1];
    total += m.mass * (m.variance + bias * bias);
  }
  return total;
}

std::string ScalarQuantizer::to_kv() const {
  KvBlock kv;
  switch (kind_) {
    case Kind::Modulo:
      kv.set("kind", "modulo");
      kv.set("delta", format_double(delta_));
      kv.set("labels", std::to_string(modulo_labels_));
      break;
    case Kind::Regular:
    case Kind::Binned:
      kv.set("kind", kind_ == Kind::Regular ? "regular" : "binned");
      kv.set("thresholds", format_double_list(thresholds_));
      if (kind_ == Kind::Binned) kv.set("binning", format_int_list(binning_));
      if (levels_) kv.set("levels", format_double_list(*levels_));
      break;
  }
  return kv.to_text();
}

ScalarQuantizer ScalarQuantizer::from_kv(const std::string& text) {
  const KvBlock kv = KvBlock::parse(text);
  kv.require_known_keys({"kind", "thresholds", "levels", "binning", "delta", "labels"});
  const std::string kind = kv.get("kind");
  if (kind == "modulo") {
    return modulo(kv.get_double("delta"), static_cast<int>(kv.get_int("labels")));
  }
  std::optional<std::vector<double>> levels;
  if (kv.has("levels")) levels = kv.get_double_list("levels");
  if (kind == "regular") {
    if (kv.has("binning")) throw ConfigError("regular quantizer must not set binning");
    return regular(kv.get_double_list("thresholds"), std::move(levels));
  }
  if (kind == "binned") {
    return binned(kv.get_double_list("thresholds"), kv.get_int_list("binning"),
                  std::move(levels));
  }
  throw ConfigError("unknown quantizer kind: " + kind);
}

}  // namespace qgamp
