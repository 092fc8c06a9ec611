#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fmcw/eval.hpp"

using namespace fmcw;

namespace {

GroundTruthObject gt(ObjectClass c, double r, double az, std::size_t frame = 0) { return {c, r, az, frame}; }
Prediction pr(ObjectClass c, double r, double az, std::size_t frame = 0) { return {c, r, az, frame}; }

}  // namespace

TEST(Match, PerfectSet) {
  const std::vector<GroundTruthObject> t{gt(ObjectClass::car, 10, 5), gt(ObjectClass::pedestrian, 4, -20),
                                         gt(ObjectClass::cyclist, 15, 30)};
  std::vector<Prediction> p;
  for (const auto& g : t) p.push_back(pr(g.label, g.range + 0.2, g.azimuth - 1));
  const auto c = match(p, t);
  EXPECT_EQ(c.overall, (Counts{3, 0, 0}));
  for (auto k : {ObjectClass::car, ObjectClass::pedestrian, ObjectClass::cyclist}) EXPECT_EQ(c.of(k), (Counts{1, 0, 0}));
  const auto [prec, rec] = precision_recall(c.overall);
  EXPECT_EQ(prec, 1.0);
  EXPECT_EQ(rec, 1.0);
}

TEST(Match, EmptyPredictions) {
  const auto c = match({}, {gt(ObjectClass::car, 10, 0), gt(ObjectClass::car, 12, 10)});
  EXPECT_EQ(c.overall, (Counts{0, 0, 2}));
  const auto [p, r] = precision_recall(c.overall);
  EXPECT_EQ(p, 1.0);
  EXPECT_EQ(r, 0.0);
}

TEST(Match, OneMisclassified) {
  const std::vector<GroundTruthObject> t{gt(ObjectClass::car, 10, 0), gt(ObjectClass::pedestrian, 5, 20),
                                         gt(ObjectClass::cyclist, 8, -15)};
  const std::vector<Prediction> p{pr(ObjectClass::car, 10, 0), pr(ObjectClass::pedestrian, 5, 20),
                                  pr(ObjectClass::car, 8, -15)};
  const auto c = match(p, t);
  EXPECT_EQ(c.overall, (Counts{2, 1, 1}));
  EXPECT_EQ(c.of(ObjectClass::car), (Counts{1, 1, 0}));
  EXPECT_EQ(c.of(ObjectClass::cyclist), (Counts{0, 0, 1}));
}

TEST(Match, GatesAndFrames) {
  const std::vector<GroundTruthObject> t{gt(ObjectClass::car, 10, 0, 1)};
  EXPECT_EQ(match({pr(ObjectClass::car, 10, 0, 0)}, t).overall, (Counts{0, 1, 1}));  // other frame
  EXPECT_EQ(match({pr(ObjectClass::car, 11.6, 0, 1)}, t).overall, (Counts{0, 1, 1}));  // 1.6 m away
  EXPECT_EQ(match({pr(ObjectClass::car, 11.4, 0, 1)}, t).overall, (Counts{1, 0, 0}));
  // 1 m apart at 4 m is ~14.4 deg of azimuth: inside the distance gate, outside the angle gate
  const std::vector<GroundTruthObject> near{gt(ObjectClass::car, 4, 0)};
  EXPECT_EQ(match({pr(ObjectClass::car, 4, 14.4)}, near).overall, (Counts{0, 1, 1}));
  EXPECT_NEAR(planar_distance(10, 0, 10, 90), std::sqrt(200.0), 1e-12);
}

TEST(Match, OneToOne) {
  // two predictions near one object: the closer one wins, the other is a false positive
  const auto c = match({pr(ObjectClass::car, 10.5, 0), pr(ObjectClass::car, 10.1, 0)}, {gt(ObjectClass::car, 10, 0)});
  EXPECT_EQ(c.overall, (Counts{1, 1, 0}));
}

TEST(PrecisionRecall, Examples) {
  const auto [p, r] = precision_recall({2, 1, 2});
  EXPECT_NEAR(p, 0.6667, 5e-5);
  EXPECT_EQ(r, 0.5);
  const auto [p0, r0] = precision_recall({0, 0, 0});
  EXPECT_EQ(p0, 1.0);
  EXPECT_EQ(r0, 1.0);
}

TEST(MatchProperty, RandomSets) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> r(1, 25), az(-60, 60), jitter(-1.5, 1.5);
  std::uniform_int_distribution<int> cls(0, 2), n(0, 8), frame(0, 2);
  for (int i = 0; i < 1000; ++i) {
    std::vector<GroundTruthObject> t(static_cast<std::size_t>(n(rng)));
    for (auto& g : t) g = gt(static_cast<ObjectClass>(cls(rng)), r(rng), az(rng), static_cast<std::size_t>(frame(rng)));
    std::vector<Prediction> p;
    for (const auto& g : t)
      if (n(rng) > 1) p.push_back(pr(static_cast<ObjectClass>(cls(rng)), g.range + jitter(rng), g.azimuth + jitter(rng), g.frame));
    for (int k = n(rng) / 3; k > 0; --k)
      p.push_back(pr(static_cast<ObjectClass>(cls(rng)), r(rng), az(rng), static_cast<std::size_t>(frame(rng))));
    const auto ref = match(p, t);
    ASSERT_EQ(ref.overall.tp + ref.overall.fn, t.size());
    ASSERT_EQ(ref.overall.tp + ref.overall.fp, p.size());
    const auto [pp, rr] = precision_recall(ref.overall);
    ASSERT_GE(pp, 0.0);
    ASSERT_LE(pp, 1.0);
    ASSERT_GE(rr, 0.0);
    ASSERT_LE(rr, 1.0);
    std::shuffle(p.begin(), p.end(), rng);
    const auto again = match(p, t);
    ASSERT_EQ(again.overall, ref.overall) << i;
    for (auto k : {ObjectClass::pedestrian, ObjectClass::car, ObjectClass::cyclist})
      ASSERT_EQ(again.of(k), ref.of(k)) << i;
  }
}

TEST(Report, TableAndCsv) {
  EvalCounts c;
  c.overall = {2, 1, 2};
  c.per_class[ObjectClass::car] = {2, 1, 0};
  c.per_class[ObjectClass::cyclist] = {0, 0, 2};
  const auto rows = report_rows("parking_lot", "dt", c);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1].label, "pedestrian");
  EXPECT_EQ(rows[1].counts, (Counts{0, 0, 0}));
  const auto table = format_report(rows);
  EXPECT_NE(table.find("Precision"), std::string::npos);
  EXPECT_NE(table.find("66.67%"), std::string::npos);
  EXPECT_NE(table.find("50.00%"), std::string::npos);
  const auto csv = format_report_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "scenario,method,class,tp,fp,fn,precision,recall");
  EXPECT_NE(csv.find("parking_lot,dt,all,2,1,2,0.666666667,0.5\n"), std::string::npos);
  EXPECT_NE(csv.find("parking_lot,dt,cyclist,0,0,2,1,0\n"), std::string::npos);
}

TEST(Counts, Accumulate) {
  EvalCounts a, b;
  a.overall = {1, 2, 3};
  a.per_class[ObjectClass::car] = {1, 2, 3};
  b.overall = {1, 1, 1};
  b.per_class[ObjectClass::pedestrian] = {1, 1, 1};
  a += b;
  EXPECT_EQ(a.overall, (Counts{2, 3, 4}));
  EXPECT_EQ(a.of(ObjectClass::pedestrian), (Counts{1, 1, 1}));
}
