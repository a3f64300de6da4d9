#include <gtest/gtest.h>

#include "support.hpp"
#include "tcomplete/proximal.hpp"
#include "tcomplete/tproduct.hpp"

namespace tc = tcomplete;
using tc::Dims;
using tc::Rng;
using tc::Tensor3;
namespace ts = tc::testing;

namespace {

double prox_objective(const Tensor3& x, const Tensor3& a, double tau) {
  return tau * tc::tnn(x) + 0.5 * tc::squared_distance(a, x);
}

Tensor3 unit_direction(const Dims& d, Rng& rng) {
  Tensor3 p = ts::random_normal_tensor(d, rng);
  p *= 1.0 / tc::frobenius_norm(p);
  return p;
}

}  // namespace

TEST(Tsvt, FullThresholdGivesZero) {
  Rng rng(40);
  const Tensor3 a = ts::random_tensor(Dims{4, 3, 5}, rng);
  EXPECT_EQ(tc::frobenius_norm(tc::tsvt(a, tc::spectral_norm(a) * 1.0001)), 0.0);
}

TEST(Tsvt, VanishingThresholdIsIdentity) {
  Rng rng(41);
  const Tensor3 a = ts::random_tensor(Dims{4, 5, 4}, rng);
  EXPECT_LE(ts::max_abs_diff(tc::tsvt(a, 1e-300), a), 1e-10);
}

TEST(Tsvt, IdentityClosedForm) {
  const Tensor3 got = tc::tsvt(tc::identity_tensor(2, 3), 0.4);
  EXPECT_LE(ts::max_abs_diff(got, tc::identity_tensor(2, 3) * 0.6), 1e-14);
}

TEST(Tsvt, RejectsNonpositiveTau) {
  const Tensor3 a(Dims{2, 2, 2}, 1.0);
  EXPECT_THROW(tc::tsvt(a, 0.0), tc::ParameterError);
  EXPECT_THROW(tc::tsvt(a, -1.0), tc::ParameterError);
}

TEST(Tsvt, ReportedNuclearNormMatchesTnn) {
  Rng rng(42);
  for (std::size_t n3 : {1u, 2u, 3u, 6u}) {
    const Tensor3 a = ts::random_tensor(Dims{5, 4, n3}, rng);
    const auto r = tc::tsvt_with_norm(a, 0.3);
    EXPECT_NEAR(r.nuclear_norm, tc::tnn(r.value), 1e-10 * std::max(1.0, r.nuclear_norm)) << n3;
  }
}

TEST(Tsvt, SliceWiseSoftThresholdOracle) {
  // Singular values of every Fourier slice of the output are (sigma - tau)_+.
  Rng rng(43);
  const Tensor3 a = ts::random_tensor(Dims{4, 3, 4}, rng);
  const double tau = 0.5;
  const auto before = tc::fourier_singular_values(a);
  const auto after = tc::fourier_singular_values(tc::tsvt(a, tau));
  for (std::size_t k = 0; k < before.size(); ++k)
    for (Eigen::Index i = 0; i < before[k].size(); ++i)
      EXPECT_NEAR(after[k](i), std::max(before[k](i) - tau, 0.0), 1e-10);
}

TEST(Tsvt, LocalOptimalityCertificate) {
  Rng rng(44);
  for (int trial = 0; trial < 5; ++trial) {
    const Tensor3 a = ts::random_tensor(Dims{5, 5, 3}, rng);
    for (double tau : {0.1, 1.0}) {
      const Tensor3 x = tc::tsvt(a, tau);
      const double best = prox_objective(x, a, tau);
      for (int p = 0; p < 50; ++p) {
        const Tensor3 dir = unit_direction(a.dims(), rng);
        for (double eps : {1e-3, 1e-2}) EXPECT_LE(best, prox_objective(x + dir * eps, a, tau) + 1e-12);
      }
    }
  }
}

TEST(Tsvt, Nonexpansive) {
  Rng rng(45);
  for (int trial = 0; trial < 30; ++trial) {
    const Dims d = ts::random_dims(rng, 5, 5, 4);
    const Tensor3 a = ts::random_tensor(d, rng);
    const Tensor3 b = ts::random_tensor(d, rng);
    const double tau = rng.uniform(0.05, 1.0);
    EXPECT_LE(std::sqrt(tc::squared_distance(tc::tsvt(a, tau), tc::tsvt(b, tau))),
              std::sqrt(tc::squared_distance(a, b)) + 1e-9);
  }
}

TEST(Tsvt, TubalRankNonincreasingInTau) {
  Rng rng(46);
  const Tensor3 a = ts::random_tensor(Dims{6, 5, 3}, rng);
  std::size_t previous = tc::tubal_rank(a);
  for (double tau : {0.05, 0.2, 0.5, 1.0, 2.0, 5.0}) {
    const std::size_t r = tc::tubal_rank(tc::tsvt(a, tau), 1e-12);
    EXPECT_LE(r, previous) << tau;
    previous = r;
  }
}

TEST(GroupShrink, Examples) {
  Rng rng(47);
  const Tensor3 s1 = ts::random_tensor(Dims{3, 4, 2}, rng);
  const Tensor3 s2 = ts::random_tensor(Dims{3, 4, 2}, rng);
  const auto same = tc::group_shrink(s1, s2, 0.0);
  EXPECT_EQ(same.y1, s1);
  EXPECT_EQ(same.y2, s2);

  Tensor3 g1(Dims{1, 2, 1});
  Tensor3 g2(Dims{1, 2, 1});
  g1[0] = 3.0;
  g2[0] = 4.0;
  const auto out = tc::group_shrink(g1, g2, 1.0);
  EXPECT_DOUBLE_EQ(out.y1[0], 2.4);
  EXPECT_DOUBLE_EQ(out.y2[0], 3.2);
  EXPECT_EQ(out.y1[1], 0.0);  // zero entry stays zero
  EXPECT_EQ(out.y2[1], 0.0);
  EXPECT_THROW(tc::group_shrink(g1, Tensor3(Dims{2, 1, 1}), 1.0), tc::DimensionError);
}

TEST(GroupShrink, MagnitudeAndDirection) {
  Rng rng(48);
  for (int trial = 0; trial < 20; ++trial) {
    const Dims d = ts::random_dims(rng, 5, 5, 3);
    const Tensor3 s1 = ts::random_tensor(d, rng);
    const Tensor3 s2 = ts::random_tensor(d, rng);
    const double kappa = rng.uniform(0.0, 1.0);
    const auto out = tc::group_shrink(s1, s2, kappa);
    for (std::size_t n = 0; n < d.size(); ++n) {
      const double r = std::hypot(s1[n], s2[n]);
      EXPECT_NEAR(std::hypot(out.y1[n], out.y2[n]), std::max(r - kappa, 0.0), 1e-12);
      EXPECT_NEAR(out.y1[n] * s2[n] - out.y2[n] * s1[n], 0.0, 1e-12);  // parallel
      EXPECT_GE(out.y1[n] * s1[n] + out.y2[n] * s2[n], 0.0);           // same orientation
    }
  }
}
