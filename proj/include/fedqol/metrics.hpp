#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fedqol/error.hpp"
#include "fedqol/rng.hpp"
#include "fedqol/table.hpp"

// Evaluation formulas and the cross-validation harness. Zero-denominator
// precision/recall scores are defined as 0; the Pearson coefficient is
// undefined (and rendered NaN downstream) whenever either side has zero
// variance.

namespace fedqol::metrics {

enum class Task { classification, regression };

struct ConfusionCounts {
  long tp = 0, tn = 0, fp = 0, fn = 0;
  long total() const { return tp + tn + fp + fn; }
};

inline ConfusionCounts confusion(const std::vector<int>& truth,
                                 const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) {
    throw data_error("truth/prediction length mismatch");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 0 && truth[i] != 1) {
      throw data_error("classification labels must be 0 or 1");
    }
    if (predicted[i] != 0 && predicted[i] != 1) {
      throw data_error("classification predictions must be 0 or 1");
    }
    if (truth[i] == 1) {
      predicted[i] == 1 ? ++c.tp : ++c.fn;
    } else {
      predicted[i] == 1 ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

struct ClassificationReport {
  double acc = 0.0;
  double f1_pos = 0.0;    // the printed F1 formula: positive class only
  double f1_macro = 0.0;  // mean of per-class F1; what the result tables use
  double prec_pos = 0.0, rec_pos = 0.0;
  double prec_neg = 0.0, rec_neg = 0.0;
  double prec_macro = 0.0, rec_macro = 0.0;
};

namespace detail {

inline double ratio0(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace detail

inline ClassificationReport report_from_counts(const ConfusionCounts& c) {
  if (c.total() == 0) throw data_error("empty evaluation");
  ClassificationReport r;
  double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
  double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
  r.acc = (tp + tn) / (tp + tn + fp + fn);
  r.prec_pos = detail::ratio0(tp, tp + fp);
  r.rec_pos = detail::ratio0(tp, tp + fn);
  r.prec_neg = detail::ratio0(tn, tn + fn);
  r.rec_neg = detail::ratio0(tn, tn + fp);
  r.prec_macro = (r.prec_pos + r.prec_neg) / 2.0;
  r.rec_macro = (r.rec_pos + r.rec_neg) / 2.0;
  r.f1_pos = detail::ratio0(2.0 * tp, 2.0 * tp + fp + fn);
  double f1_neg = detail::ratio0(2.0 * tn, 2.0 * tn + fn + fp);
  r.f1_macro = (r.f1_pos + f1_neg) / 2.0;
  return r;
}

inline ClassificationReport classification_report(
    const std::vector<int>& truth, const std::vector<int>& predicted) {
  return report_from_counts(confusion(truth, predicted));
}

struct RegressionReport {
  double mae = 0.0;
  double mse = 0.0;
  double r2 = 0.0;
  std::optional<double> pc;  // undefined when either variance is zero
};

inline RegressionReport regression_report(const std::vector<double>& truth,
                                          const std::vector<double>& predicted) {
  if (truth.size() != predicted.size()) {
    throw data_error("truth/prediction length mismatch");
  }
  if (truth.size() < 2) throw data_error("regression report needs >= 2 pairs");
  std::size_t n = truth.size();
  RegressionReport r;
  double x_mean = 0.0, y_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = truth[i] - predicted[i];
    r.mae += std::abs(d);
    r.mse += d * d;
    x_mean += truth[i];
    y_mean += predicted[i];
  }
  r.mae /= static_cast<double>(n);
  r.mse /= static_cast<double>(n);
  x_mean /= static_cast<double>(n);
  y_mean /= static_cast<double>(n);

  double ss_tot = 0.0, ss_res = 0.0, sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = truth[i] - x_mean;
    double dy = predicted[i] - y_mean;
    double res = truth[i] - predicted[i];
    ss_tot += dx * dx;
    ss_res += res * res;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  r.r2 = ss_tot == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                       : 1.0 - ss_res / ss_tot;
  if (sxx > 0.0 && syy > 0.0) {
    r.pc = sxy / (std::sqrt(sxx) * std::sqrt(syy));
  }
  return r;
}

// Deals rows into k groups with sizes differing by at most one; for
// classification the per-group class counts also differ by at most one.
// Groups double as test folds and as edge-node shards.
inline std::vector<std::vector<std::size_t>> partition_rows(
    const datakit::Table& data, int k, Task task, std::uint64_t seed) {
  if (k < 1) throw config_error("partition needs k >= 1");
  if (static_cast<std::size_t>(k) > data.n_rows()) {
    throw data_error("cannot partition " + std::to_string(data.n_rows()) +
                     " rows into " + std::to_string(k) + " groups");
  }
  std::mt19937_64 g(seed);
  std::vector<std::vector<std::size_t>> groups(k);
  if (task == Task::classification) {
    int t = data.target_index();
    if (t < 0) throw data_error("classification partition needs a target");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
      if (!data.rows[i][t]) throw data_error("missing classification target");
      double v = *data.rows[i][t];
      if (v == 1.0) {
        pos.push_back(i);
      } else if (v == 0.0) {
        neg.push_back(i);
      } else {
        throw data_error("classification target must be 0 or 1");
      }
    }
    if (pos.empty() || neg.empty()) {
      throw data_error("both classes must be present to stratify");
    }
    std::vector<std::size_t> pshuf = shuffled_indices(pos.size(), g);
    std::vector<std::size_t> nshuf = shuffled_indices(neg.size(), g);
    // Dealing negatives continues where the positives stopped, which keeps
    // total group sizes within one of each other.
    for (std::size_t i = 0; i < pshuf.size(); ++i) {
      groups[i % k].push_back(pos[pshuf[i]]);
    }
    std::size_t offset = pos.size() % k;
    for (std::size_t i = 0; i < nshuf.size(); ++i) {
      groups[(offset + i) % k].push_back(neg[nshuf[i]]);
    }
  } else {
    std::vector<std::size_t> shuf = shuffled_indices(data.n_rows(), g);
    for (std::size_t i = 0; i < shuf.size(); ++i) {
      groups[i % k].push_back(shuf[i]);
    }
  }
  return groups;
}

// Fits on the training split and returns one prediction per test row:
// probability of the positive class for classification, value for regression.
using FitPredictFn = std::function<std::vector<double>(
    const datakit::Table& train, const datakit::Table& test)>;

inline std::vector<int> labels_from_probabilities(const std::vector<double>& p) {
  std::vector<int> out;
  out.reserve(p.size());
  for (double v : p) out.push_back(v > 0.5 ? 1 : 0);
  return out;
}

inline std::vector<int> labels_from_cells(const datakit::Table& t) {
  std::vector<int> out;
  for (double v : t.target_vector()) {
    if (v != 0.0 && v != 1.0) throw data_error("target is not binary");
    out.push_back(v == 1.0 ? 1 : 0);
  }
  return out;
}

struct ClassificationCv {
  ClassificationReport mean;
  std::vector<ClassificationReport> folds;
};

struct RegressionCv {
  RegressionReport mean;
  std::vector<RegressionReport> folds;
};

namespace detail {

inline void check_train_has_both_classes(const datakit::Table& train) {
  int t = train.target_index();
  bool has0 = false, has1 = false;
  for (const auto& row : train.rows) {
    if (!row[t]) continue;
    (*row[t] == 1.0 ? has1 : has0) = true;
  }
  if (!has0 || !has1) {
    throw data_error("a class is absent from a training fold");
  }
}

inline std::vector<std::size_t> complement(
    const std::vector<std::vector<std::size_t>>& groups, std::size_t skip) {
  std::vector<std::size_t> out;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    if (gi == skip) continue;
    out.insert(out.end(), groups[gi].begin(), groups[gi].end());
  }
  return out;
}

}  // namespace detail

inline ClassificationCv cross_validate_classification(
    const FitPredictFn& fit_predict, const datakit::Table& data, int folds,
    std::uint64_t seed) {
  if (folds < 2) throw config_error("cross-validation needs >= 2 folds");
  auto groups = partition_rows(data, folds, Task::classification, seed);
  ClassificationCv cv;
  for (std::size_t f = 0; f < groups.size(); ++f) {
    datakit::Table train = data.subset(detail::complement(groups, f));
    datakit::Table test = data.subset(groups[f]);
    detail::check_train_has_both_classes(train);
    std::vector<double> probs = fit_predict(train, test);
    cv.folds.push_back(classification_report(
        labels_from_cells(test), labels_from_probabilities(probs)));
  }
  ClassificationReport& m = cv.mean;
  for (const auto& r : cv.folds) {
    m.acc += r.acc;
    m.f1_pos += r.f1_pos;
    m.f1_macro += r.f1_macro;
    m.prec_pos += r.prec_pos;
    m.rec_pos += r.rec_pos;
    m.prec_neg += r.prec_neg;
    m.rec_neg += r.rec_neg;
    m.prec_macro += r.prec_macro;
    m.rec_macro += r.rec_macro;
  }
  double k = static_cast<double>(cv.folds.size());
  m.acc /= k;
  m.f1_pos /= k;
  m.f1_macro /= k;
  m.prec_pos /= k;
  m.rec_pos /= k;
  m.prec_neg /= k;
  m.rec_neg /= k;
  m.prec_macro /= k;
  m.rec_macro /= k;
  return cv;
}

inline RegressionCv cross_validate_regression(const FitPredictFn& fit_predict,
                                              const datakit::Table& data,
                                              int folds, std::uint64_t seed) {
  if (folds < 2) throw config_error("cross-validation needs >= 2 folds");
  auto groups = partition_rows(data, folds, Task::regression, seed);
  RegressionCv cv;
  for (std::size_t f = 0; f < groups.size(); ++f) {
    datakit::Table train = data.subset(detail::complement(groups, f));
    datakit::Table test = data.subset(groups[f]);
    std::vector<double> preds = fit_predict(train, test);
    cv.folds.push_back(regression_report(test.target_vector(), preds));
  }
  RegressionReport& m = cv.mean;
  bool pc_defined = true;
  double pc_sum = 0.0;
  for (const auto& r : cv.folds) {
    m.mae += r.mae;
    m.mse += r.mse;
    m.r2 += r.r2;
    if (r.pc) {
      pc_sum += *r.pc;
    } else {
      pc_defined = false;
    }
  }
  double k = static_cast<double>(cv.folds.size());
  m.mae /= k;
  m.mse /= k;
  m.r2 /= k;
  if (pc_defined) m.pc = pc_sum / k;
  return cv;
}

}  // namespace fedqol::metrics
