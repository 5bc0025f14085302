#include <gtest/gtest.h>

#include <map>

#include "support.hpp"

using namespace graspgen;
using gg_test::Gen;

namespace {

Contact contact(const Vec3& p, const Vec3& n) { return {0, p, n.normalized()}; }

ContactPair pair_of(const Contact& l, const Contact& r) {
  ContactPair c;
  c.left = l;
  c.left.index = 0;
  c.right = r;
  c.right.index = 1;
  return c;
}

ContactPair cube_face_pair() {
  return pair_of(contact({-0.025, 0, 0}, -Vec3::UnitX()), contact({0.025, 0, 0}, Vec3::UnitX()));
}

/// Two contacts on the faces of a wedge whose faces open at `deg` degrees:
/// each outward normal is tilted deg/2 from the contact line.
ContactPair wedge_pair(double deg) {
  const double h = deg / 2 * std::numbers::pi / 180.0;
  return pair_of(contact({-0.02, 0, 0}, {-std::cos(h), std::sin(h), 0}),
                 contact({0.02, 0, 0}, {std::cos(h), std::sin(h), 0}));
}

ContactPair swapped(const ContactPair& c) { return pair_of(c.right, c.left); }

}  // namespace

TEST(ForceClosure, CubeFacesCloseAtLowFriction) {
  EXPECT_TRUE(force_closure_at(cube_face_pair(), 0.1));
}

TEST(ForceClosure, SphereContactsThroughTheCentreAlwaysClose) {
  Gen gen(1);
  for (int t = 0; t < 100; ++t) {
    const Vec3 u = gen.unit();
    const auto c = pair_of(contact(-0.03 * u, -u), contact(0.03 * u, u));
    EXPECT_TRUE(force_closure_at(c, gen.uniform(1e-3, 1.0)));
  }
}

TEST(ForceClosure, FortyDegreeWedge) {
  EXPECT_FALSE(force_closure_at(wedge_pair(40), 0.3));
  EXPECT_TRUE(force_closure_at(wedge_pair(40), 1.0));
}

TEST(ForceClosure, CoincidentContactsThrow) {
  const auto c = pair_of(contact({0, 0, 0}, -Vec3::UnitX()), contact({1e-10, 0, 0}, Vec3::UnitX()));
  EXPECT_THROW(force_closure_at(c, 0.5), DegenerateContacts);
  EXPECT_THROW(score(c), DegenerateContacts);
}

TEST(ForceClosure, MonotoneInFriction) {
  Gen gen(2);
  for (int t = 0; t < 300; ++t) {
    const auto c = pair_of(contact(gen.in_box(0.03), gen.unit()), contact(gen.in_box(0.03), gen.unit()));
    bool was = false;
    for (int k = 1; k <= 40; ++k) {
      const bool now = force_closure_at(c, k / 20.0);
      EXPECT_TRUE(!was || now) << t << ' ' << k;
      was = now;
    }
  }
}

TEST(Score, Examples) {
  const auto cube = score(cube_face_pair());
  EXPECT_EQ(cube.fc_mu_star, 0.05);
  EXPECT_EQ(cube.score, 1.0);

  // atan(0.35) = 19.29 deg < 20 deg <= atan(0.40) = 21.80 deg
  const auto wedge = score(wedge_pair(40));
  EXPECT_EQ(wedge.fc_mu_star, 0.40);
  EXPECT_NEAR(wedge.score, (1.00 - 0.40) / 0.95, 1e-12);
  EXPECT_NEAR(wedge.score, 0.632, 5e-4);

  const auto tangent = score(pair_of(contact({-0.02, 0, 0}, Vec3::UnitY()),
                                     contact({0.02, 0, 0}, Vec3::UnitX())));
  EXPECT_TRUE(std::isinf(tangent.fc_mu_star));
  EXPECT_EQ(tangent.score, 0.0);
}

TEST(Score, MatchesTheLadderFormula) {
  Gen gen(3);
  for (int t = 0; t < 500; ++t) {
    const auto c = pair_of(contact(gen.in_box(0.03), gen.unit()), contact(gen.in_box(0.03), gen.unit()));
    const auto q = score(c);
    EXPECT_GE(q.score, 0.0);
    EXPECT_LE(q.score, 1.0);
    if (std::isinf(q.fc_mu_star)) {
      EXPECT_EQ(q.score, 0.0);
    } else {
      EXPECT_NEAR(q.score, std::clamp((1.00 - q.fc_mu_star) / 0.95, 0.0, 1.0), 1e-12);
    }
  }
}

TEST(Score, EasierGraspsScoreHigher) {
  double prev = 2.0;
  for (double deg : {0.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0}) {
    const double s = score(wedge_pair(deg)).score;
    EXPECT_LE(s, prev) << deg;
    prev = s;
  }
}

TEST(Score, InvariantUnderSwappingContacts) {
  Gen gen(4);
  for (int t = 0; t < 300; ++t) {
    const auto c = pair_of(contact(gen.in_box(0.03), gen.unit()), contact(gen.in_box(0.03), gen.unit()));
    const auto a = score(c), b = score(swapped(c));
    EXPECT_EQ(a.fc_mu_star, b.fc_mu_star);
    EXPECT_EQ(a.score, b.score);
  }
}

TEST(Score, MatchesLinearLadderScanOnGeneratedGrasps) {
  const GripperConfig g;
  const std::vector<PointCloud> clouds = {
      gg_test::sphere_cloud(0.03, 1000, 1),
      gg_test::mesh_cloud(shapes::cube(0.05), 1000, 2),
      gg_test::mesh_cloud(shapes::cylinder(0.02, 0.08), 1000, 3),
  };
  Gen gen(5);
  std::size_t checked = 0;
  for (const auto& cloud : clouds) {
    const auto cands = generate(cloud, g, sample_orientations(24, 6), GenOptions{});
    for (int t = 0; t < 34; ++t) {
      const auto& c = cands[gen.index(cands.size())];
      const int rung = gg_test::brute_force_rung(c.contacts.left.point, c.contacts.left.normal,
                                                 c.contacts.right.point, c.contacts.right.normal);
      const auto q = score(c.contacts);
      if (rung == 0)
        EXPECT_TRUE(std::isinf(q.fc_mu_star));
      else
        EXPECT_EQ(q.fc_mu_star, rung / 20.0);
      ++checked;
    }
  }
  EXPECT_GE(checked, 100u);
}

TEST(Antipodal, ZeroSamplesGiveNothing) {
  EXPECT_TRUE(antipodal_generate(gg_test::sphere_cloud(0.03, 500), GripperConfig{}, 0, 1).empty());
}

TEST(Antipodal, EmittedPairsCloseAndClearTheHand) {
  const GripperConfig g;
  const auto cloud = gg_test::mesh_cloud(shapes::cube(0.05), 1500);
  const auto cands = antipodal_generate(cloud, g, 40, 7);
  ASSERT_GT(cands.size(), 0u);
  for (const auto& c : cands) {
    EXPECT_EQ(c.pose.provenance, Provenance::antipodal_baseline);
    EXPECT_TRUE(c.pose.is_valid());
    const Contact a{c.point_index, cloud.points[c.point_index], cloud.normals[c.point_index]};
    const Contact b{c.orientation_index, cloud.points[c.orientation_index],
                    cloud.normals[c.orientation_index]};
    EXPECT_TRUE(force_closure_at(a, b, g.friction_mu));
    EXPECT_LE((a.point - b.point).norm(), g.max_width);
    EXPECT_EQ(c.pose.point, (a.point + b.point) * 0.5);
    for (const auto& p : cloud.points) ASSERT_FALSE(gg_test::penetrates_hand(c.pose, p, g));
  }
}

TEST(Antipodal, SphereClosingAxesPassNearTheCentre) {
  // With mu = 0.2 an accepted chord is at most r sin(atan(0.2)) = 0.0059 m
  // from the centre.
  GripperConfig g;
  g.friction_mu = 0.2;
  const auto cloud = gg_test::sphere_cloud(0.03, 2000);
  const auto cands = antipodal_generate(cloud, g, 30, 3);
  ASSERT_GT(cands.size(), 0u);
  for (const auto& c : cands) {
    const Vec3 p = c.pose.point;
    EXPECT_LE(distance_to_line(Vec3::Zero(), p, p + c.pose.closing()), 0.01);
  }
}

TEST(Antipodal, SwappedPairsShareTheirMidpoint) {
  const GripperConfig g;
  const auto cloud = gg_test::sphere_cloud(0.03, 100);
  const auto cands = antipodal_generate(cloud, g, 400, 11);
  std::map<std::pair<std::uint32_t, std::uint32_t>, Vec3> mid;
  for (const auto& c : cands) mid.try_emplace({c.point_index, c.orientation_index}, c.pose.point);
  std::size_t swapped_pairs = 0;
  for (const auto& [key, p] : mid) {
    auto it = mid.find({key.second, key.first});
    if (it == mid.end()) continue;
    EXPECT_LE((it->second - p).norm(), 1e-12);
    ++swapped_pairs;
  }
  EXPECT_GT(swapped_pairs, 0u);
}

TEST(Antipodal, DuplicatesAreRetained) {
  const GripperConfig g;
  const auto cloud = gg_test::sphere_cloud(0.03, 500);
  const auto cands = antipodal_generate(cloud, g, 200, 5);
  const GenOptions opts;
  EXPECT_LT(dedup(cands, opts.position_bin(g), opts.eps_r).size(), cands.size());
}

TEST(Antipodal, DeterministicForASeed) {
  const GripperConfig g;
  const auto cloud = gg_test::sphere_cloud(0.03, 500);
  const auto a = antipodal_generate(cloud, g, 20, 9), b = antipodal_generate(cloud, g, 20, 9);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].pose.point, b[i].pose.point);
    EXPECT_EQ(a[i].pose.rotation, b[i].pose.rotation);
  }
}

TEST(Bench, ZeroTargetGivesNaNSpeedup) {
  const auto rep = bench_compare(gg_test::sphere_cloud(0.03, 500), GripperConfig{}, 0);
  EXPECT_EQ(rep.ours_count, 0u);
  EXPECT_EQ(rep.baseline_count, 0u);
  EXPECT_EQ(rep.ours_seconds, 0.0);
  EXPECT_EQ(rep.baseline_seconds, 0.0);
  EXPECT_TRUE(std::isnan(rep.speedup()));
}

TEST(Bench, ReachesTheTargetOnBothSides) {
  const auto rep = bench_compare(gg_test::sphere_cloud(0.03, 1000), GripperConfig{}, 50);
  EXPECT_EQ(rep.ours_count, 50u);
  EXPECT_EQ(rep.baseline_count, 50u);
  EXPECT_EQ(rep.ours_hist.total(), 50u);
  EXPECT_EQ(rep.baseline_hist.total(), 50u);
  EXPECT_GT(rep.speedup(), 0.0);
  std::ostringstream kv, csv;
  write_report(kv, rep);
  write_report_csv(csv, rep);
  EXPECT_NE(kv.str().find("speedup = "), std::string::npos);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "bin_low,bin_high,count_ours,count_baseline");
}

TEST(Histogram, BinsAndDistance) {
  EXPECT_EQ(ScoreHistogram::bin_of(0.0), 0u);
  EXPECT_EQ(ScoreHistogram::bin_of(0.049), 0u);
  EXPECT_EQ(ScoreHistogram::bin_of(0.05), 1u);
  EXPECT_EQ(ScoreHistogram::bin_of(1.0), 19u);
  ScoreHistogram a, b;
  EXPECT_EQ(l1_distance(a, b), 0.0);
  a.add(0.1);
  EXPECT_EQ(l1_distance(a, b), 2.0);
  b.add(0.1);
  b.add(0.9);
  EXPECT_DOUBLE_EQ(l1_distance(a, b), 1.0);
  EXPECT_DOUBLE_EQ(l1_distance(b, a), 1.0);
}
