#ifndef FMCW_EVAL_HPP
#define FMCW_EVAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "fmcw/core.hpp"
#include "fmcw/scene.hpp"

namespace fmcw {

struct Prediction {
  ObjectClass label = ObjectClass::pedestrian;
  double range = 0.0;    // m
  double azimuth = 0.0;  // deg
  std::size_t frame = 0;
};

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct EvalCounts {
  Counts overall;
  std::map<ObjectClass, Counts> per_class;

  EvalCounts& operator+=(const EvalCounts& o) {
    overall += o.overall;
    for (const auto& [k, v] : o.per_class) per_class[k] += v;
    return *this;
  }
  Counts of(ObjectClass c) const {
    auto it = per_class.find(c);
    return it == per_class.end() ? Counts{} : it->second;
  }
};

struct MatchGates {
  double max_distance = 1.5;  // m, Cartesian
  double max_angle = 10.0;    // deg
};

inline double planar_distance(double r1, double az1_deg, double r2, double az2_deg) {
  const double a1 = deg_to_rad(az1_deg), a2 = deg_to_rad(az2_deg);
  return std::hypot(r1 * std::sin(a1) - r2 * std::sin(a2), r1 * std::cos(a1) - r2 * std::cos(a2));
}

/// Greedy nearest-first one-to-one matching, done per frame. Candidate pairs
/// within both gates are taken in ascending distance; ties break on the
/// prediction's own fields so the result ignores prediction order.
inline EvalCounts match(const std::vector<Prediction>& predictions,
                        const std::vector<GroundTruthObject>& truth, const MatchGates& gates = {}) {
  EvalCounts out;
  auto bump = [&](ObjectClass c, std::size_t Counts::*field) {
    ++(out.overall.*field);
    ++(out.per_class[c].*field);
  };

  struct Pair {
    double dist;
    std::size_t p, t;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const auto& p = predictions[i];
      const auto& g = truth[j];
      if (p.frame != g.frame) continue;
      const double d = planar_distance(p.range, p.azimuth, g.range, g.azimuth);
      if (d > gates.max_distance || std::abs(p.azimuth - g.azimuth) > gates.max_angle) continue;
      pairs.push_back({d, i, j});
    }
  }
  auto key = [&](const Pair& x) {
    const auto& p = predictions[x.p];
    return std::make_tuple(x.dist, x.t, p.range, p.azimuth, static_cast<int>(p.label));
  };
  std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) { return key(a) < key(b); });

  std::vector<bool> pred_used(predictions.size(), false), truth_used(truth.size(), false);
  for (const auto& x : pairs) {
    if (pred_used[x.p] || truth_used[x.t]) continue;
    pred_used[x.p] = truth_used[x.t] = true;
    const auto pl = predictions[x.p].label, tl = truth[x.t].label;
    if (pl == tl) {
      bump(tl, &Counts::tp);
    } else {
      bump(pl, &Counts::fp);
      bump(tl, &Counts::fn);
    }
  }
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (!pred_used[i]) bump(predictions[i].label, &Counts::fp);
  for (std::size_t j = 0; j < truth.size(); ++j)
    if (!truth_used[j]) bump(truth[j].label, &Counts::fn);
  return out;
}

/// 0/0 counts as 1, x/0 as 0 (x > 0 cannot occur for these ratios).
inline std::pair<double, double> precision_recall(const Counts& c) {
  auto ratio = [](std::size_t num, std::size_t den) {
    if (den == 0) return num == 0 ? 1.0 : 0.0;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  return {ratio(c.tp, c.tp + c.fp), ratio(c.tp, c.tp + c.fn)};
}

struct ReportRow {
  std::string scenario;
  std::string method;
  std::string label;  // "all" or a class name
  Counts counts;
};

inline std::vector<ReportRow> report_rows(const std::string& scenario, const std::string& method,
                                          const EvalCounts& c) {
  std::vector<ReportRow> rows;
  rows.push_back({scenario, method, "all", c.overall});
  for (auto k : {ObjectClass::pedestrian, ObjectClass::car, ObjectClass::cyclist})
    rows.push_back({scenario, method, to_string(k), c.of(k)});
  return rows;
}

/// Plain-text table: Scenario, Method, Class, Precision, Recall (percent).
inline std::string format_report(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-22s %-12s %-11s %10s %10s\n", "Scenario", "Method", "Class",
                "Precision", "Recall");
  os << buf;
  for (const auto& r : rows) {
    const auto [p, rc] = precision_recall(r.counts);
    std::snprintf(buf, sizeof buf, "%-22s %-12s %-11s %9.2f%% %9.2f%%\n", r.scenario.c_str(),
                  r.method.c_str(), r.label.c_str(), 100 * p, 100 * rc);
    os << buf;
  }
  return os.str();
}

inline std::string format_report_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  os << "scenario,method,class,tp,fp,fn,precision,recall\n";
  char buf[64];
  for (const auto& r : rows) {
    const auto [p, rc] = precision_recall(r.counts);
    os << r.scenario << ',' << r.method << ',' << r.label << ',' << r.counts.tp << ','
       << r.counts.fp << ',' << r.counts.fn << ',';
    std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", p, rc);
    os << buf;
  }
  return os.str();
}

}  // namespace fmcw

#endif  // FMCW_EVAL_HPP
