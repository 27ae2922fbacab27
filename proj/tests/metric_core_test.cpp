#include <gtest/gtest.h>

#include <cmath>

#include "mklab/heisenberg.hpp"
#include "mklab/rng.hpp"
#include "mklab/space.hpp"

using namespace mklab;

namespace {

Point rand_heis(Rng& rng) {
  return heis(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10));
}

Point rand_seq(Rng& rng) {
  int len = 1 + static_cast<int>(rng.below(64));
  std::string s;
  for (int i = 0; i < len; ++i) s.push_back((rng.bits() & 1) ? '1' : '0');
  return seq(std::move(s));
}

}  // namespace

TEST(Distance, EuclideanPythagorean) {
  Space sp = EuclideanSpace{2};
  EXPECT_DOUBLE_EQ(distance(sp, euclidean({0, 0}), euclidean({3, 4})), 5.0);
  EXPECT_DOUBLE_EQ(distance(sp, euclidean({1, 1}), euclidean({1, 1})), 0.0);
}

TEST(Distance, UltrametricSeqFirstDifference) {
  Space sp = UltrametricSeqSpace{};
  // first differing position 2 -> 2^-2
  EXPECT_DOUBLE_EQ(distance(sp, seq("011"), seq("001")), 0.25);
  EXPECT_DOUBLE_EQ(distance(sp, seq("011"), seq("011")), 0.0);
  // proper prefix: first differing position is len+1
  EXPECT_DOUBLE_EQ(distance(sp, seq("01"), seq("011")), 0.125);
  EXPECT_DOUBLE_EQ(distance(sp, seq("1"), seq("0")), 0.5);
}

TEST(Distance, NestedBallRule) {
  Space sp = NestedBallSpace{};
  EXPECT_DOUBLE_EQ(distance(sp, nested(2), nested(5)), 0.25);  // max(2^-2, 2^-5)
  EXPECT_DOUBLE_EQ(distance(sp, nested(0), nested(3)), 0.125);
  EXPECT_DOUBLE_EQ(distance(sp, nested(7), nested(7)), 0.0);
}

TEST(Distance, HeisenbergIdentityCase) {
  Space sp = HeisenbergSpace{};
  EXPECT_DOUBLE_EQ(distance(sp, heis(1, 0, 0), heis(1, 0, 0)), 0.0);
}

TEST(Distance, MismatchedVariantThrows) {
  Space sp = EuclideanSpace{2};
  EXPECT_THROW(distance(sp, euclidean({0, 0}), nested(1)), std::invalid_argument);
  EXPECT_THROW(distance(sp, euclidean({0, 0}), euclidean({0, 0, 0})),
               std::invalid_argument);
  EXPECT_THROW(distance(Space{UltrametricSeqSpace{}}, seq(""), seq("0")),
               std::invalid_argument);
  EXPECT_THROW(distance(Space{NestedBallSpace{}}, nested(-1), nested(0)),
               std::invalid_argument);
}

TEST(Heisenberg, MultiplicationExamples) {
  HeisPoint r = heis_mul({1, 0, 0}, {0, 1, 0});
  EXPECT_DOUBLE_EQ(r.x, 1.0);
  EXPECT_DOUBLE_EQ(r.y, 1.0);
  EXPECT_DOUBLE_EQ(r.z, -2.0);

  HeisPoint s = heis_mul({0, 0, 0}, {3, -2, 7});
  EXPECT_DOUBLE_EQ(s.x, 3.0);
  EXPECT_DOUBLE_EQ(s.y, -2.0);
  EXPECT_DOUBLE_EQ(s.z, 7.0);

  HeisPoint prod = heis_mul({4, -1, 2}, heis_inv({4, -1, 2}));
  EXPECT_DOUBLE_EQ(prod.x, 0.0);
  EXPECT_DOUBLE_EQ(prod.y, 0.0);
  EXPECT_DOUBLE_EQ(prod.z, 0.0);
}

TEST(Heisenberg, Inverse) {
  HeisPoint inv = heis_inv({1, 2, 3});
  EXPECT_DOUBLE_EQ(inv.x, -1.0);
  EXPECT_DOUBLE_EQ(inv.y, -2.0);
  EXPECT_DOUBLE_EQ(inv.z, -3.0);
  HeisPoint zero = heis_inv({0, 0, 0});
  EXPECT_DOUBLE_EQ(zero.x, 0.0);
  HeisPoint p{1, 1, 0};
  HeisPoint prod = heis_mul(p, heis_inv(p));
  EXPECT_NEAR(heis_norm(prod), 0.0, 1e-12);
}

TEST(Heisenberg, Norm) {
  EXPECT_NEAR(heis_norm({3, 4, 0}), 5.0, 1e-14);  // (25^2)^(1/4)
  EXPECT_DOUBLE_EQ(heis_norm({0, 0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(heis_norm({0, 0, 0}), 0.0);
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    HeisPoint p{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
    EXPECT_DOUBLE_EQ(heis_norm(heis_inv(p)), heis_norm(p));
  }
}

TEST(Heisenberg, NormNoUnderflow) {
  // Magnitudes from the deep end of the Koranyi-Reimann family.
  HeisPoint tiny{5e-84, 6e-83, -1.1e-162};
  double n = heis_norm(tiny);
  EXPECT_GT(n, 1e-84);
  EXPECT_LT(n, 1e-80);
}

TEST(Heisenberg, Dilation) {
  HeisPoint a = heis_dilate({1, 0, 0}, 2.0);
  EXPECT_DOUBLE_EQ(a.x, 2.0);
  EXPECT_DOUBLE_EQ(a.z, 0.0);
  HeisPoint b = heis_dilate({0, 0, 1}, 2.0);
  EXPECT_DOUBLE_EQ(b.z, 4.0);
  HeisPoint c = heis_dilate({0.3, -0.7, 0.2}, 1.0);
  EXPECT_DOUBLE_EQ(c.x, 0.3);
  EXPECT_DOUBLE_EQ(c.y, -0.7);
  EXPECT_DOUBLE_EQ(c.z, 0.2);
  EXPECT_THROW(heis_dilate({1, 0, 0}, 0.0), std::invalid_argument);
  EXPECT_THROW(heis_dilate({1, 0, 0}, -2.0), std::invalid_argument);

  Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    HeisPoint p{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
    double t = std::exp(rng.uniform(-3, 3));
    double lhs = heis_norm(heis_dilate(p, t));
    double rhs = t * heis_norm(p);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, rhs));
  }
}

TEST(Metric, StrongTriangleExactUltrametric) {
  Space sp = UltrametricSeqSpace{};
  Rng rng(21);
  for (int i = 0; i < 20000; ++i) {
    Point x = rand_seq(rng), y = rand_seq(rng), z = rand_seq(rng);
    double dxz = distance(sp, x, z);
    double dxy = distance(sp, x, y);
    double dyz = distance(sp, y, z);
    ASSERT_LE(dxz, std::max(dxy, dyz));  // exact, no tolerance
  }
}

TEST(Metric, StrongTriangleExactNested) {
  Space sp = NestedBallSpace{};
  Rng rng(22);
  for (int i = 0; i < 20000; ++i) {
    Point x = nested(rng.below(1000));
    Point y = nested(rng.below(1000));
    Point z = nested(rng.below(1000));
    double dxz = distance(sp, x, z);
    ASSERT_LE(dxz, std::max(distance(sp, x, y), distance(sp, y, z)));
  }
}

TEST(Metric, CyganKoranyiTriangle) {
  Space sp = HeisenbergSpace{};
  Rng rng(23);
  for (int i = 0; i < 100000; ++i) {
    Point p = rand_heis(rng), m = rand_heis(rng), q = rand_heis(rng);
    double lhs = distance(sp, p, q);
    double rhs = distance(sp, p, m) + distance(sp, m, q);
    ASSERT_LE(lhs, rhs * (1.0 + 1e-12));
  }
}

TEST(Metric, HeisenbergLeftInvarianceAndHomogeneity) {
  Rng rng(24);
  for (int i = 0; i < 10000; ++i) {
    HeisPoint g{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
    HeisPoint p{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
    HeisPoint q{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
    double d = heis_distance(p, q);
    double d_shift = heis_distance(heis_mul(g, p), heis_mul(g, q));
    ASSERT_NEAR(d_shift, d, 1e-9 * std::max(1.0, d));

    double t = std::exp(rng.uniform(-2, 2));
    double d_scaled = heis_distance(heis_dilate(p, t), heis_dilate(q, t));
    ASSERT_NEAR(d_scaled, t * d, 1e-9 * std::max(1.0, t * d));
  }
}

// Closed ball around x_{n+1} sits on the sphere around x_n.
TEST(Metric, NestedBallSphereInclusion) {
  NestedBallSpace nb{};
  Space sp = nb;
  for (int n = 1; n <= 63; ++n) {
    for (int m = 0; m <= 64; ++m) {
      Point y = nested(m);
      double d_inner = distance(sp, nested(n + 1), y);
      if (d_inner <= nb.radius(n + 1)) {
        ASSERT_DOUBLE_EQ(distance(sp, nested(n), y), nb.radius(n));
      }
    }
  }
}

TEST(Metric, SymmetryAndIdentity) {
  Rng rng(25);
  std::vector<Space> spaces = {EuclideanSpace{3}, UltrametricSeqSpace{},
                               NestedBallSpace{}, HeisenbergSpace{}};
  for (const Space& sp : spaces) {
    for (int i = 0; i < 2000; ++i) {
      Point a, b;
      if (std::holds_alternative<EuclideanSpace>(sp)) {
        a = euclidean({rng.normal(), rng.normal(), rng.normal()});
        b = euclidean({rng.normal(), rng.normal(), rng.normal()});
      } else if (std::holds_alternative<UltrametricSeqSpace>(sp)) {
        a = rand_seq(rng);
        b = rand_seq(rng);
      } else if (std::holds_alternative<NestedBallSpace>(sp)) {
        a = nested(rng.below(500));
        b = nested(rng.below(500));
      } else {
        a = rand_heis(rng);
        b = rand_heis(rng);
      }
      double dab = distance(sp, a, b);
      ASSERT_GE(dab, 0.0);
      ASSERT_DOUBLE_EQ(dab, distance(sp, b, a));
      ASSERT_DOUBLE_EQ(distance(sp, a, a), 0.0);
      if (same_point(a, b)) {
        ASSERT_DOUBLE_EQ(dab, 0.0);
      }
    }
  }
}
