#include <gtest/gtest.h>

#include <numbers>
#include <set>

#include "support.hpp"

using namespace graspgen;
using gg_test::Gen;

namespace {

/// Definition-level generator: every pose checked against every point.
std::vector<CandidateGrasp> brute_force_generate(const PointCloud& cloud, const GripperConfig& g,
                                                 const OrientationSet& orients,
                                                 double slack_deg = 5.0) {
  std::vector<CandidateGrasp> out;
  for (std::uint32_t k = 0; k < cloud.size(); ++k)
    for (std::uint32_t o = 0; o < orients.size(); ++o) {
      GraspPose pose;
      pose.point = cloud.points[k];
      pose.rotation = orients.rotations[o];
      if (check_collision(pose, cloud, g)) continue;
      ClosingRegion region;
      try {
        region = extract_closing_region(pose, cloud, g);
      } catch (const EmptyRegion&) {
        continue;
      }
      if (region.left.empty() || region.right.empty()) continue;
      const auto c = contact_points(pose, region, cloud, g);
      if (!normal_filter(pose, c, g.friction_mu, slack_deg)) continue;
      CandidateGrasp cand;
      cand.pose = pose;
      cand.contacts = c;
      cand.point_index = k;
      cand.orientation_index = o;
      out.push_back(cand);
    }
  return out;
}

void expect_same(const std::vector<CandidateGrasp>& a, const std::vector<CandidateGrasp>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].point_index, b[i].point_index);
    EXPECT_EQ(a[i].orientation_index, b[i].orientation_index);
    EXPECT_EQ(a[i].contacts.left.index, b[i].contacts.left.index);
    EXPECT_EQ(a[i].contacts.right.index, b[i].contacts.right.index);
    EXPECT_EQ(a[i].contacts.d1, b[i].contacts.d1);
    EXPECT_EQ(a[i].contacts.d2, b[i].contacts.d2);
  }
}

/// Pose with the given approach and closing axes.
GraspPose pose_from(const Vec3& p, const Vec3& approach, const Vec3& closing) {
  GraspPose pose;
  pose.point = p;
  pose.rotation.col(0) = approach.normalized();
  pose.rotation.col(1) = closing.normalized();
  pose.rotation.col(2) = pose.rotation.col(0).cross(pose.rotation.col(1));
  return pose;
}

ContactPair contacts_with_normals(const Vec3& nl, const Vec3& nr) {
  ContactPair c;
  c.left = {0, Vec3(0, -0.02, 0), nl.normalized()};
  c.right = {1, Vec3(0, 0.02, 0), nr.normalized()};
  return c;
}

Vec3 tilted(double deg, const Vec3& axis, const Vec3& toward) {
  const double r = deg * std::numbers::pi / 180.0;
  return std::cos(r) * axis + std::sin(r) * toward;
}

}  // namespace

TEST(Orientations, CountsAndOrthonormality) {
  const auto set = sample_orientations(64, 8);
  ASSERT_EQ(set.size(), 512u);
  EXPECT_EQ(set.n_dirs, 64u);
  EXPECT_EQ(set.n_rolls, 8u);
  for (const auto& r : set.rotations) {
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
  }
  EXPECT_THROW(sample_orientations(0, 1), std::invalid_argument);
  EXPECT_THROW(sample_orientations(1, 0), std::invalid_argument);
}

TEST(Orientations, TwoDirectionsFollowTheLatticeFormula) {
  // z_i = 1 - (2i + 1) / N: for N = 2 the directions sit at z = +-1/2,
  // antipodal in z, with azimuths 0 and the golden angle.
  const auto set = sample_orientations(2, 1);
  ASSERT_EQ(set.size(), 2u);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double r = std::sqrt(0.75);
  const Vec3 d0(r, 0.0, 0.5), d1(r * std::cos(golden), r * std::sin(golden), -0.5);
  EXPECT_LT((set.rotations[0].col(0) - d0).norm(), 1e-12);
  EXPECT_LT((set.rotations[1].col(0) - d1).norm(), 1e-12);
  EXPECT_EQ(set.rotations[0].col(0).z(), -set.rotations[1].col(0).z());
}

TEST(Orientations, ApproachSpacingAtLeastEightyPercentOfIdeal) {
  for (std::size_t n : {16u, 64u, 200u}) {
    const auto dirs = fibonacci_directions(n);
    double min_angle = 10.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        min_angle = std::min(min_angle, std::acos(std::clamp(dirs[i].dot(dirs[j]), -1.0, 1.0)));
    const double ideal = std::sqrt(4.0 * std::numbers::pi / static_cast<double>(n));
    EXPECT_GE(min_angle, 0.8 * ideal) << n;
  }
}

TEST(Orientations, RollsAreEvenlySpacedOverHalfATurn) {
  const std::size_t rolls = 8;
  const auto set = sample_orientations(5, rolls);
  for (std::size_t d = 0; d < 5; ++d) {
    const Mat3& r0 = set.rotations[d * rolls];
    for (std::size_t j = 0; j < rolls; ++j) {
      const Mat3& rj = set.rotations[d * rolls + j];
      EXPECT_LT((rj.col(0) - r0.col(0)).norm(), 1e-15);
      const double expect = 180.0 * static_cast<double>(j) / rolls;
      EXPECT_NEAR(gg_test::angle_deg(r0.col(1), rj.col(1)), expect, 1e-9);
    }
  }
}

TEST(Orientations, HalfTurnTwinFlipsClosingAndMinor) {
  Gen gen(2);
  for (int t = 0; t < 20; ++t) {
    const Mat3 r = gen.rotation();
    const Mat3 twin = roll_half_turn(r);
    const Mat3 expect = r * Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitX()).toRotationMatrix();
    EXPECT_LT((twin - expect).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(twin.col(0), r.col(0));
    EXPECT_EQ(twin.col(1), Vec3(-r.col(1)));
  }
}

TEST(NormalFilter, AlignedContactsAreKept) {
  const auto pose = pose_from(Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY());
  EXPECT_TRUE(normal_filter(pose, contacts_with_normals(-Vec3::UnitY(), Vec3::UnitY()), 0.5));
}

TEST(NormalFilter, TangentContactIsRejected) {
  const auto pose = pose_from(Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY());
  EXPECT_FALSE(normal_filter(pose, contacts_with_normals(-Vec3::UnitY(), Vec3::UnitX()), 0.5));
}

TEST(NormalFilter, ThirtyDegreesKeptThirtyFiveRejected) {
  // atan(0.5) = 26.565 deg, plus 5 deg slack = 31.565 deg.
  ASSERT_NEAR(std::atan(0.5) * 180.0 / std::numbers::pi + 5.0, 31.565, 1e-3);
  const auto pose = pose_from(Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY());
  for (const Vec3 side : {Vec3::UnitX(), Vec3::UnitZ()}) {
    EXPECT_TRUE(normal_filter(
        pose, contacts_with_normals(tilted(30, -Vec3::UnitY(), side), Vec3::UnitY()), 0.5, 5.0));
    EXPECT_FALSE(normal_filter(
        pose, contacts_with_normals(tilted(35, -Vec3::UnitY(), side), Vec3::UnitY()), 0.5, 5.0));
    EXPECT_TRUE(normal_filter(
        pose, contacts_with_normals(-Vec3::UnitY(), tilted(30, Vec3::UnitY(), side)), 0.5, 5.0));
    EXPECT_FALSE(normal_filter(
        pose, contacts_with_normals(-Vec3::UnitY(), tilted(35, Vec3::UnitY(), side)), 0.5, 5.0));
  }
}

TEST(Generate, MatchesBruteForceOnSeveralSolids) {
  const GripperConfig g;
  const auto orients = sample_orientations(12, 4);
  const std::vector<PointCloud> clouds = {
      gg_test::sphere_cloud(0.03, 300, 1),
      gg_test::mesh_cloud(shapes::cube(0.05), 300, 2),
      gg_test::mesh_cloud(shapes::cylinder(0.02, 0.08, 32), 300, 3),
      gg_test::mesh_cloud(shapes::l_bracket(0.1, 0.08, 0.01, 0.04), 300, 4),
  };
  for (const auto& cloud : clouds) {
    const auto fast = generate_range(cloud, g, orients, GenOptions{}, 0, orients.size());
    const auto slow = brute_force_generate(cloud, g, orients);
    EXPECT_GT(slow.size(), 0u);
    expect_same(fast, slow);
  }
}

TEST(Generate, MatchesBruteForceOnLatticeCloudWithTies) {
  // Axis-aligned grid points produce exact ties on every comparison.
  std::vector<Vec3> pts, nrm;
  for (int i = -4; i <= 4; ++i)
    for (int j = -4; j <= 4; ++j)
      for (int k : {-2, 2}) {
        pts.emplace_back(0.005 * i, 0.005 * j, 0.005 * k);
        nrm.emplace_back(0, 0, k);
      }
  const auto cloud = make_cloud(pts, nrm, 1.0, Vec3::Zero());
  OrientationSet orients;
  orients.n_dirs = 3;
  orients.n_rolls = 2;
  for (const Vec3 a : {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()})
    for (double roll : {0.0, std::numbers::pi / 2})
      orients.rotations.push_back(frame_from_approach(a, roll));
  for (double width : {0.04, 0.05, 0.08}) {
    GripperConfig g;
    g.max_width = width;
    g.finger_length = 0.02;
    g.finger_height = 0.02;
    expect_same(generate_range(cloud, g, orients, GenOptions{}, 0, orients.size()),
                brute_force_generate(cloud, g, orients));
  }
}

TEST(Generate, SphereContactLinesPassNearTheCentre) {
  // For a centred sphere the contact normals are radial, so the normal
  // filter bounds the line offset by r sin(atan(mu) + slack); with mu 0.2
  // that is 0.0084 m for r = 0.03.
  GripperConfig g;
  g.friction_mu = 0.2;
  const auto cloud = gg_test::sphere_cloud(0.03, 2000);
  const auto cands = generate(cloud, g, sample_orientations(32, 4), GenOptions{});
  ASSERT_GT(cands.size(), 0u);
  for (const auto& c : cands)
    EXPECT_LE(distance_to_line(Vec3::Zero(), c.contacts.left.point, c.contacts.right.point), 0.01);
}

TEST(Generate, SphereWiderThanJawHasNoGrasps) {
  const auto cloud = gg_test::sphere_cloud(0.10, 1000);
  EXPECT_THROW(generate(cloud, GripperConfig{}, sample_orientations(16, 4), GenOptions{}),
               NoGraspsFound);
}

TEST(Generate, EmptyOrientationSetIsRejected) {
  EXPECT_THROW(generate(gg_test::sphere_cloud(0.03, 200), GripperConfig{}, OrientationSet{},
                       GenOptions{}),
               std::invalid_argument);
}

TEST(Generate, CubeGraspsCloseOnFacesWithinTheCone) {
  const GripperConfig g;
  const auto cloud = gg_test::mesh_cloud(shapes::cube(0.05), 2000);
  const auto cands = generate(cloud, g, sample_orientations(64, 8), GenOptions{});
  ASSERT_GT(cands.size(), 0u);
  const double limit = std::atan(g.friction_mu) * 180.0 / std::numbers::pi + 5.0;
  for (const auto& c : cands) {
    const Vec3 cl = c.pose.closing();
    EXPECT_LE(gg_test::angle_deg(cl, -c.contacts.left.normal), limit + 1e-9);
    EXPECT_LE(gg_test::angle_deg(-cl, -c.contacts.right.normal), limit + 1e-9);
    // Closing axis within the cone of a face normal means it is never
    // diagonal through an edge.
    EXPECT_GE(cl.cwiseAbs().maxCoeff(), std::cos(limit * std::numbers::pi / 180.0) - 1e-12);
  }
}

TEST(Generate, EveryCandidateReverifiesIndependently) {
  const GripperConfig g;
  const auto cloud = gg_test::mesh_cloud(shapes::l_bracket(0.1, 0.08, 0.01, 0.04), 1500);
  const auto cands = generate(cloud, g, sample_orientations(24, 6), GenOptions{});
  ASSERT_GT(cands.size(), 0u);
  for (const auto& c : cands) {
    for (const auto& p : cloud.points) ASSERT_FALSE(gg_test::penetrates_hand(c.pose, p, g));
    const auto r = extract_closing_region(c.pose, cloud, g);
    EXPECT_FALSE(r.left.empty());
    EXPECT_FALSE(r.right.empty());
  }
}

TEST(Generate, DeterministicAndIndependentOfThreadCount) {
  const GripperConfig g;
  const auto cloud = gg_test::sphere_cloud(0.03, 800);
  const auto orients = sample_orientations(16, 4);
  GenOptions one, many;
  many.jobs = 3;
  const auto a = generate(cloud, g, orients, one);
  const auto b = generate(cloud, g, orients, one);
  const auto c = generate(cloud, g, orients, many);
  expect_same(a, b);
  expect_same(a, c);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].canon_key, c[i].canon_key);
  for (std::size_t i = 1; i < a.size(); ++i)
    EXPECT_LT(std::tie(a[i - 1].point_index, a[i - 1].orientation_index),
              std::tie(a[i].point_index, a[i].orientation_index));
}

TEST(Dedup, NoDuplicateKeysAndLowestRepresentativeKept) {
  const GripperConfig g;
  const auto cloud = gg_test::sphere_cloud(0.03, 1500);
  const GenOptions opts;
  auto cands = generate(cloud, g, sample_orientations(32, 8), opts);
  const auto out = dedup(cands, opts.position_bin(g), opts.eps_r);
  ASSERT_LT(out.size(), cands.size());
  std::set<std::uint64_t> keys;
  for (const auto& c : out) EXPECT_TRUE(keys.insert(c.canon_key).second);
  // Each survivor is the first candidate carrying its key.
  std::map<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>> first;
  for (const auto& c : cands) {
    const auto key = canonical_key(c.pose, opts.position_bin(g), opts.eps_r);
    first.try_emplace(key, c.point_index, c.orientation_index);
  }
  ASSERT_EQ(first.size(), out.size());
  for (const auto& c : out)
    EXPECT_EQ(first.at(c.canon_key), std::make_pair(c.point_index, c.orientation_index));
}

TEST(Dedup, HalfTurnRollCollapses) {
  Gen gen(6);
  for (int t = 0; t < 50; ++t) {
    CandidateGrasp a;
    a.pose.point = gen.in_box(0.05);
    a.pose.rotation = gen.rotation();
    CandidateGrasp b = a;
    b.pose.rotation = roll_half_turn(a.pose.rotation);
    b.orientation_index = 1;
    const auto out = dedup({b, a}, 0.008, 10.0 * std::numbers::pi / 180.0);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].orientation_index, 0u);
  }
}

TEST(Dedup, SwappedAntipodalPairsCollapse) {
  Gen gen(7);
  for (int t = 0; t < 50; ++t) {
    const Vec3 x1 = gen.in_box(0.03), x2 = gen.in_box(0.03);
    const double roll = gen.uniform(0, 2 * std::numbers::pi);
    CandidateGrasp a, b;
    a.pose = antipodal_pose(x1, x2, roll);
    b.pose = antipodal_pose(x2, x1, roll);
    b.point_index = 1;
    EXPECT_EQ(a.pose.point, b.pose.point);
    EXPECT_EQ(dedup({a, b}, 0.008, 0.17).size(), 1u);
  }
}

TEST(Dedup, TwoBinsApartBothSurvive) {
  const double eps = 0.008;
  CandidateGrasp a, b;
  a.pose.point = Vec3(0.001, 0.001, 0.001);
  b.pose.point = a.pose.point + Vec3(2 * eps, 0, 0);
  b.point_index = 1;
  EXPECT_EQ(dedup({a, b}, eps, 0.17).size(), 2u);
}
