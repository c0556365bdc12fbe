#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fedqol/error.hpp"
#include "fedqol/rng.hpp"
#include "fedqol/table.hpp"

// The edge-side preprocessing chain (missing value inference, outlier
// filtering, differential-privacy noise), dataset shaping for the two study
// families, and the synthetic generators that stand in for the private
// clinical data.

namespace fedqol::datakit {

namespace detail {

inline bool perturbable(const ColumnSchema& c) {
  return c.role == ColumnRole::feature || c.role == ColumnRole::target;
}

inline double column_mean(const Table& t, std::size_t col) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& row : t.rows) {
    if (row[col]) {
      sum += *row[col];
      ++n;
    }
  }
  if (n == 0) {
    throw data_error("column '" + t.schema[col].name +
                     "' has no observed values");
  }
  return sum / static_cast<double>(n);
}

inline double column_mode(const Table& t, std::size_t col) {
  std::map<double, std::size_t> counts;
  for (const auto& row : t.rows) {
    if (row[col]) ++counts[*row[col]];
  }
  if (counts.empty()) {
    throw data_error("column '" + t.schema[col].name +
                     "' has no observed values");
  }
  // Ties resolve to the smallest value (std::map iterates in order).
  double best = counts.begin()->first;
  std::size_t best_n = counts.begin()->second;
  for (const auto& [v, n] : counts) {
    if (n > best_n) {
      best = v;
      best_n = n;
    }
  }
  return best;
}

}  // namespace detail

// Missing Value Inference: numeric columns take the column mean, everything
// else the column mode.
inline Table impute(const Table& t) {
  t.check_rectangular();
  Table out = t;
  for (std::size_t c = 0; c < t.schema.size(); ++c) {
    bool any_missing = false;
    for (const auto& row : t.rows) {
      if (!row[c]) {
        any_missing = true;
        break;
      }
    }
    if (!any_missing) continue;
    double fill = t.schema[c].kind == ColumnKind::numeric
                      ? detail::column_mean(t, c)
                      : detail::column_mode(t, c);
    for (auto& row : out.rows) {
      if (!row[c]) row[c] = fill;
    }
  }
  return out;
}

namespace detail {

inline Table outlier_pass(const Table& t, double z_max) {
  Table out = t;
  for (std::size_t c = 0; c < t.schema.size(); ++c) {
    if (t.schema[c].kind != ColumnKind::numeric) continue;
    if (!detail::perturbable(t.schema[c])) continue;
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& row : t.rows) {
      if (row[c]) {
        sum += *row[c];
        sq += *row[c] * *row[c];
        ++n;
      }
    }
    if (n < 2) continue;
    double mean = sum / n;
    double var = sq / n - mean * mean;
    if (var <= 0.0) continue;
    double sd = std::sqrt(var);

    double kept_sum = 0.0;
    std::size_t kept_n = 0;
    std::vector<std::size_t> masked;
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
      if (!out.rows[i][c]) continue;
      if (std::abs(*out.rows[i][c] - mean) > z_max * sd) {
        masked.push_back(i);
      } else {
        kept_sum += *out.rows[i][c];
        ++kept_n;
      }
    }
    if (masked.empty() || kept_n == 0) continue;
    double fill = kept_sum / static_cast<double>(kept_n);
    for (std::size_t i : masked) out.rows[i][c] = fill;
  }
  return out;
}

}  // namespace detail

// Replaces numeric cells whose z-score exceeds z_max by the mean of the
// remaining cells. Rows are never dropped. Masking shrinks the column spread,
// so passes repeat until a fixpoint; that makes the operation idempotent.
inline Table filter_outliers(const Table& t, double z_max = 4.0) {
  if (std::isinf(z_max)) return t;
  Table out = t;
  for (int pass = 0; pass < 100; ++pass) {
    Table next = detail::outlier_pass(out, z_max);
    if (next.rows == out.rows) break;
    out = std::move(next);
  }
  return out;
}

struct DpConfig {
  double epsilon = std::numeric_limits<double>::infinity();
  // When unset, each column uses its observed range. A desk-scale stand-in,
  // not a rigorous sensitivity analysis.
  std::optional<double> sensitivity;
};

// Laplace mechanism on numeric cells. epsilon = infinity is the exact
// identity; smaller epsilon means more noise.
inline Table dp_noise(const Table& t, const DpConfig& cfg, std::uint64_t seed) {
  if (!(cfg.epsilon > 0.0)) throw config_error("dp epsilon must be positive");
  if (std::isinf(cfg.epsilon)) return t;
  Table out = t;
  std::mt19937_64 g(seed);
  for (std::size_t c = 0; c < t.schema.size(); ++c) {
    if (t.schema[c].kind != ColumnKind::numeric) continue;
    if (!detail::perturbable(t.schema[c])) continue;
    double sens;
    if (cfg.sensitivity) {
      sens = *cfg.sensitivity;
    } else {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& row : t.rows) {
        if (row[c]) {
          lo = std::min(lo, *row[c]);
          hi = std::max(hi, *row[c]);
        }
      }
      sens = hi > lo ? hi - lo : 0.0;
    }
    if (sens <= 0.0) continue;
    double scale = sens / cfg.epsilon;
    for (auto& row : out.rows) {
      if (row[c]) row[c] = *row[c] + laplace(g, scale);
    }
  }
  return out;
}

// Temporal slice for the follow-up family: predict the QoL score at month m
// from everything observed through month n.
inline Table slice_orb(const Table& t, int n, int m,
                       const std::string& qol_prefix = "qol") {
  if (n >= m) throw config_error("slice requires feature month < target month");
  int target = -1;
  for (std::size_t c = 0; c < t.schema.size(); ++c) {
    if (t.schema[c].follow_up_month && *t.schema[c].follow_up_month == m &&
        t.schema[c].name.rfind(qol_prefix, 0) == 0) {
      target = static_cast<int>(c);
      break;
    }
  }
  if (target < 0) {
    throw data_error("no QoL column at month " + std::to_string(m));
  }
  std::vector<std::size_t> keep;
  Table out;
  for (std::size_t c = 0; c < t.schema.size(); ++c) {
    if (static_cast<int>(c) == target) {
      keep.push_back(c);
      ColumnSchema col = t.schema[c];
      col.role = ColumnRole::target;
      out.schema.push_back(std::move(col));
      continue;
    }
    const ColumnSchema& col = t.schema[c];
    if (col.role == ColumnRole::excluded || col.role == ColumnRole::join_key) continue;
    if (col.follow_up_month && *col.follow_up_month > n) continue;
    ColumnSchema kept = col;
    kept.role = ColumnRole::feature;
    keep.push_back(c);
    out.schema.push_back(std::move(kept));
  }
  for (const auto& row : t.rows) {
    if (!row[target]) continue;  // rows without the target are dropped
    std::vector<Cell> r;
    r.reserve(keep.size());
    for (std::size_t c : keep) r.push_back(row[c]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

// Selects one binary flag column as the classification target and drops the
// sibling flags sharing the group prefix.
inline Table make_binary_target(const Table& t, const std::string& column,
                                const std::string& group_prefix = "med_") {
  int target = t.col_index(column);
  if (target < 0) throw data_error("unknown column '" + column + "'");
  for (const auto& row : t.rows) {
    if (row[target] && *row[target] != 0.0 && *row[target] != 1.0) {
      throw data_error("column '" + column + "' is not binary");
    }
  }
  Table out;
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < t.schema.size(); ++c) {
    if (static_cast<int>(c) == target) {
      ColumnSchema col = t.schema[c];
      col.role = ColumnRole::target;
      out.schema.push_back(std::move(col));
      keep.push_back(c);
      continue;
    }
    if (t.schema[c].name.rfind(group_prefix, 0) == 0) continue;
    out.schema.push_back(t.schema[c]);
    keep.push_back(c);
  }
  for (const auto& row : t.rows) {
    std::vector<Cell> r;
    r.reserve(keep.size());
    for (std::size_t c : keep) r.push_back(row[c]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

// Left join with an auxiliary table on a shared key column. Unmatched rows
// receive missing cells for the auxiliary columns.
inline Table enrich(const Table& t, const Table& aux,
                    const std::string& join_key) {
  int k_main = t.col_index(join_key);
  int k_aux = aux.col_index(join_key);
  if (k_main < 0 || k_aux < 0) {
    throw data_error("join key '" + join_key + "' must exist in both tables");
  }
  std::map<double, std::size_t> index;
  for (std::size_t i = 0; i < aux.rows.size(); ++i) {
    if (!aux.rows[i][k_aux]) {
      throw data_error("auxiliary table has a missing join key");
    }
    auto [it, inserted] = index.emplace(*aux.rows[i][k_aux], i);
    if (!inserted) {
      throw data_error("duplicate join key in auxiliary table");
    }
  }
  Table out = t;
  std::vector<std::size_t> aux_cols;
  for (std::size_t c = 0; c < aux.schema.size(); ++c) {
    if (static_cast<int>(c) == k_aux) continue;
    if (t.col_index(aux.schema[c].name) >= 0) {
      throw data_error("enrich would duplicate column '" + aux.schema[c].name +
                       "'");
    }
    aux_cols.push_back(c);
    out.schema.push_back(aux.schema[c]);
  }
  for (auto& row : out.rows) {
    const std::vector<Cell>* match = nullptr;
    if (row[k_main]) {
      auto it = index.find(*row[k_main]);
      if (it != index.end()) match = &aux.rows[it->second];
    }
    for (std::size_t c : aux_cols) {
      row.push_back(match ? (*match)[c] : Cell{});
    }
  }
  return out;
}

// --- synthetic generators --------------------------------------------------

namespace detail {

// Flags the top (1 - rate) quantile of a noisy planted score; pins the
// positive rate while keeping the decision boundary learnable but noisy.
inline std::vector<double> threshold_flags(const std::vector<double>& score,
                                           double positive_rate) {
  std::vector<double> sorted = score;
  std::sort(sorted.begin(), sorted.end());
  std::size_t cut =
      static_cast<std::size_t>(std::floor(sorted.size() * (1.0 - positive_rate)));
  if (cut >= sorted.size()) cut = sorted.size() - 1;
  double threshold = sorted[cut];
  std::vector<double> flags(score.size());
  for (std::size_t i = 0; i < score.size(); ++i) {
    flags[i] = score[i] >= threshold ? 1.0 : 0.0;
  }
  return flags;
}

inline double logistic_noise(std::mt19937_64& g, double scale) {
  double u;
  do {
    u = unit_uniform(g);
  } while (u == 0.0 || u == 1.0);
  return scale * std::log(u / (1.0 - u));
}

}  // namespace detail

// Breast-cancer-registry shaped synthetic dataset: 47 columns, four binary
// medication flags at roughly 30% positive rate, planted linear plus
// interaction structure.
inline Table synth_bcbase_like(long rows, std::uint64_t seed,
                               double missing_rate = 0.0) {
  if (rows < 50) throw config_error("synthetic dataset needs at least 50 rows");
  std::mt19937_64 g(seed);

  Table t;
  auto num = [&](std::string name) {
    t.schema.push_back({std::move(name), ColumnKind::numeric});
  };
  auto cat = [&](std::string name) {
    t.schema.push_back({std::move(name), ColumnKind::categorical});
  };
  auto ord = [&](std::string name) {
    t.schema.push_back({std::move(name), ColumnKind::ordinal});
  };

  num("age");
  cat("region_code");
  cat("marital_status");
  ord("education_level");
  num("income");
  num("household_income");
  num("bmi");
  cat("menopausal_status");
  ord("charlson_index");
  num("tumor_size_mm");
  ord("nodes_positive");
  ord("tumor_grade");
  cat("er_status");
  cat("pr_status");
  cat("her2_status");
  cat("surgery_type");
  cat("chemotherapy");
  cat("radiotherapy");
  cat("endocrine_therapy");
  num("months_since_diagnosis");
  for (int q = 1; q <= 20; ++q) {
    char name[8];
    std::snprintf(name, sizeof name, "q%02d", q);
    num(name);
  }
  num("sleep_score");
  num("fatigue_score");
  num("physical_activity");
  cat("med_pain");
  cat("med_anxiety");
  cat("med_insomnia");
  cat("med_depression");

  const std::size_t n_cols = t.schema.size();  // 47 by construction
  long n = rows;
  std::vector<double> severity(n), age_z(n), sleep_z(n), fatigue_z(n);
  t.rows.assign(n, std::vector<Cell>(n_cols));

  for (long i = 0; i < n; ++i) {
    auto& row = t.rows[i];
    double s = gaussian(g, 0.0, 1.0);  // latent severity
    severity[i] = s;
    double age = gaussian(g, 62.0, 11.0);
    age_z[i] = (age - 62.0) / 11.0;
    std::size_t c = 0;
    row[c++] = age;
    row[c++] = std::floor(uniform_in(g, 0.0, 3.0));
    row[c++] = std::floor(uniform_in(g, 0.0, 4.0));
    row[c++] = std::floor(uniform_in(g, 0.0, 5.0));
    double income = std::exp(gaussian(g, 10.2, 0.45));
    row[c++] = income;
    row[c++] = income * uniform_in(g, 1.0, 2.2);
    row[c++] = gaussian(g, 26.5, 4.2);
    row[c++] = age > 52.0 ? 1.0 : 0.0;
    row[c++] = std::floor(uniform_in(g, 0.0, 4.0) + std::max(0.0, s));
    row[c++] = std::exp(gaussian(g, 2.7, 0.6)) + 4.0 * std::max(0.0, s);
    row[c++] = std::floor(std::max(0.0, gaussian(g, 1.0, 1.5) + s));
    row[c++] = 1.0 + std::floor(uniform_in(g, 0.0, 3.0));
    row[c++] = unit_uniform(g) < 0.75 ? 1.0 : 0.0;
    row[c++] = unit_uniform(g) < 0.65 ? 1.0 : 0.0;
    row[c++] = unit_uniform(g) < 0.2 ? 1.0 : 0.0;
    row[c++] = std::floor(uniform_in(g, 0.0, 3.0));
    row[c++] = unit_uniform(g) < 0.4 + 0.1 * s ? 1.0 : 0.0;
    row[c++] = unit_uniform(g) < 0.55 ? 1.0 : 0.0;
    row[c++] = unit_uniform(g) < 0.6 ? 1.0 : 0.0;
    row[c++] = uniform_in(g, 1.0, 120.0);
    for (int q = 0; q < 20; ++q) {
      // Questionnaire block tracks the latent severity.
      double load = 0.4 + 0.03 * q;
      row[c++] = 50.0 - 18.0 * load * s + gaussian(g, 0.0, 8.0);
    }
    double sleep = 55.0 - 10.0 * s + gaussian(g, 0.0, 7.0);
    double fatigue = 45.0 + 12.0 * s + gaussian(g, 0.0, 7.0);
    sleep_z[i] = (sleep - 55.0) / 12.0;
    fatigue_z[i] = (fatigue - 45.0) / 13.0;
    row[c++] = sleep;
    row[c++] = fatigue;
    row[c++] = 60.0 - 8.0 * s + gaussian(g, 0.0, 10.0);
    c += 4;  // medication flags are filled below
  }

  // Planted flag scores: linear mix of latents plus one interaction term,
  // then logistic noise and a 30% quantile cut.
  struct FlagPlan {
    std::size_t col;
    double w_sev, w_age, w_sleep, w_fatigue, w_inter;
  };
  const FlagPlan plans[4] = {
      {43, 1.0, 0.3, 0.0, 0.5, 0.4},   // med_pain
      {44, 1.1, -0.2, 0.3, 0.3, 0.5},  // med_anxiety
      {45, 0.8, 0.2, 0.9, 0.2, 0.3},   // med_insomnia
      {46, 1.2, 0.1, 0.3, 0.4, 0.4},   // med_depression
  };
  for (const FlagPlan& p : plans) {
    std::vector<double> score(n);
    for (long i = 0; i < n; ++i) {
      score[i] = p.w_sev * severity[i] + p.w_age * age_z[i] -
                 p.w_sleep * sleep_z[i] + p.w_fatigue * fatigue_z[i] +
                 p.w_inter * severity[i] * age_z[i] +
                 detail::logistic_noise(g, 0.55);
    }
    std::vector<double> flags = detail::threshold_flags(score, 0.30);
    for (long i = 0; i < n; ++i) t.rows[i][p.col] = flags[i];
  }

  if (missing_rate > 0.0) {
    // Thin the questionnaire block only; flags and demographics stay intact.
    for (auto& row : t.rows) {
      for (std::size_t c = 20; c < 43; ++c) {
        if (unit_uniform(g) < missing_rate) row[c] = std::nullopt;
      }
    }
  }
  return t;
}

// Prostate-follow-up shaped synthetic dataset: 124 columns tagged with the
// follow-up schedule, QoL scores at months 36/60/120 with attrition.
inline Table synth_orb_like(long rows, std::uint64_t seed,
                            double missing_rate = 0.0) {
  if (rows < 50) throw config_error("synthetic dataset needs at least 50 rows");
  std::mt19937_64 g(seed);
  const int months[15] = {6,  12, 18, 24, 30, 36, 42, 48,
                          54, 60, 72, 84, 96, 108, 120};
  const char* symptoms[7] = {"bowel_function",  "bowel_bother",
                             "erectile_function", "erectile_bother",
                             "urinary_function",  "urinary_bother",
                             "fatigue"};

  Table t;
  auto col = [&](std::string name, ColumnKind kind, std::optional<int> month) {
    t.schema.push_back({std::move(name), kind, ColumnRole::feature, month});
  };
  col("age", ColumnKind::numeric, std::nullopt);
  col("region_code", ColumnKind::categorical, std::nullopt);
  col("education_level", ColumnKind::ordinal, std::nullopt);
  col("income", ColumnKind::numeric, std::nullopt);
  col("tumor_stage", ColumnKind::ordinal, std::nullopt);
  col("psa_baseline", ColumnKind::numeric, std::nullopt);
  // The 3-week visit collapses into the month-0 bucket.
  for (const char* s : symptoms) {
    col(std::string(s) + "_m0", ColumnKind::numeric, 0);
  }
  for (int m : months) {
    for (const char* s : symptoms) {
      col(std::string(s) + "_m" + std::to_string(m), ColumnKind::numeric, m);
    }
  }
  for (int m : {36, 60, 120}) {
    col("ipss_m" + std::to_string(m), ColumnKind::numeric, m);
  }
  for (int m : {36, 60, 120}) {
    col("qol_m" + std::to_string(m), ColumnKind::numeric, m);
  }

  const std::size_t n_cols = t.schema.size();  // 124 by construction
  t.rows.assign(rows, std::vector<Cell>(n_cols));

  for (long i = 0; i < rows; ++i) {
    auto& row = t.rows[i];
    double base = gaussian(g, 0.0, 1.0);       // baseline severity
    double recovery = gaussian(g, 0.012, 0.006);  // per-month drift
    double age = gaussian(g, 68.0, 8.0);
    double stage = 1.0 + std::floor(uniform_in(g, 0.0, 4.0));
    std::size_t c = 0;
    row[c++] = age;
    row[c++] = std::floor(uniform_in(g, 0.0, 3.0));
    row[c++] = std::floor(uniform_in(g, 0.0, 5.0));
    row[c++] = std::exp(gaussian(g, 10.0, 0.4));
    row[c++] = stage;
    row[c++] = std::exp(gaussian(g, 2.0, 0.7)) + 2.0 * stage;

    auto severity_at = [&](int month) {
      return base + 0.25 * stage - recovery * month;
    };
    for (const char* s : symptoms) {
      (void)s;
      row[c++] = 50.0 + 12.0 * severity_at(0) + gaussian(g, 0.0, 6.0);
    }
    for (int m : months) {
      for (int s = 0; s < 7; ++s) {
        double load = 0.7 + 0.08 * s;
        row[c++] = 50.0 + 12.0 * load * severity_at(m) + gaussian(g, 0.0, 6.0);
      }
    }
    for (int m : {36, 60, 120}) {
      row[c++] = 8.0 + 5.0 * severity_at(m) + gaussian(g, 0.0, 2.0);
    }
    for (int m : {36, 60, 120}) {
      double qol = 65.0 - 9.0 * severity_at(m) - 2.5 * (stage - 2.5) -
                   0.05 * (age - 68.0) + gaussian(g, 0.0, 7.0);
      row[c++] = qol;
    }
  }

  // Follow-up attrition on the QoL outcomes.
  const double attrition[3] = {0.05, 0.10, 0.20};
  for (int k = 0; k < 3; ++k) {
    std::size_t qcol = n_cols - 3 + k;
    for (auto& row : t.rows) {
      if (unit_uniform(g) < attrition[k]) row[qcol] = std::nullopt;
    }
  }

  if (missing_rate > 0.0) {
    for (auto& row : t.rows) {
      for (std::size_t c = 6; c < n_cols - 6; ++c) {
        if (unit_uniform(g) < missing_rate) row[c] = std::nullopt;
      }
    }
  }
  return t;
}

inline Table synth(std::string_view kind, long rows, std::uint64_t seed,
                   double missing_rate = 0.0) {
  if (kind == "bcbase_like") return synth_bcbase_like(rows, seed, missing_rate);
  if (kind == "orb_like") return synth_orb_like(rows, seed, missing_rate);
  throw config_error("unknown synthetic dataset kind '" + std::string(kind) +
                     "'");
}

}  // namespace fedqol::datakit
