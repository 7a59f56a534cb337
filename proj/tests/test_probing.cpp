#include <gtest/gtest.h>

#include <cmath>

#include "pkglab/channel.hpp"
#include "pkglab/pkgnet.hpp"
#include "pkglab/probing.hpp"
#include "pkglab/rng.hpp"

using namespace pkglab;

namespace {

DesignPoint random_point(const ChannelStatistics& st, Rng& rng) {
  return pkgnet::random_design(st.M(), st.L(), st.P_max, rng);
}

}  // namespace

TEST(Pilot, Unitary) {
  EXPECT_NEAR(std::abs(build_downlink_pilot(1)(0, 0)), 1.0, 1e-15);
  for (int n : {2, 8}) {
    const ComplexMatrix S = build_downlink_pilot(n);
    EXPECT_LE((S.adjoint() * S - ComplexMatrix::Identity(n, n)).norm(), 1e-12);
  }
}

TEST(Cascaded, ScalarCase) {
  ComplexVector h(1), f(1);
  ComplexMatrix G(1, 1);
  h(0) = Complex(1, 2);
  G(0, 0) = Complex(0.5, -1);
  f(0) = Complex(3, 1);
  const ComplexVector hc = cascaded_channel(h, G, f);
  ASSERT_EQ(hc.size(), 2);
  EXPECT_EQ(hc(0), h(0));
  EXPECT_EQ(hc(1), G(0, 0) * f(0));
}

TEST(Cascaded, NoIrsLeavesDirectChannel) {
  ComplexVector h(2), f(0);
  ComplexMatrix G(2, 0);
  h << Complex(1, 0), Complex(0, 1);
  EXPECT_EQ(cascaded_channel(h, G, f), h);
}

TEST(Cascaded, CompactFormEqualsDirectForm) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int M = 2, L = 3;
    const ComplexVector h = rng.complex_normal_matrix(M, 1);
    const ComplexMatrix G = rng.complex_normal_matrix(M, L);
    const ComplexVector f = rng.complex_normal_matrix(L, 1);
    ComplexVector theta(L);
    for (int l = 0; l < L; ++l) theta(l) = std::polar(1.0, rng.uniform(0.0, 6.28));
    const ComplexMatrix P = rng.complex_normal_matrix(M, M);
    const ComplexVector a = compact_effective_channel(cascaded_channel(h, G, f), theta, P);
    const ComplexVector b = direct_effective_channel(h, G, f, theta, P);
    EXPECT_LE((a - b).norm(), 1e-10 * b.norm());
  }
}

TEST(Probe, NoiselessObservations) {
  const ChannelStatistics st = default_scenario(2, 4).statistics();
  Rng rng(9);
  const DesignPoint d = random_point(st, rng);
  const ChannelRealization r = sample_channels(st, rng);
  const ProbingObservations y = probe(r, d, st, rng, {false});
  const ComplexVector expected = direct_effective_channel(r.h_ab, r.G, r.f_b, d.theta, d.P);
  EXPECT_LE((y.y_b - expected).norm(), 1e-12 * expected.norm());
  EXPECT_LE((y.y_a - std::sqrt(st.P_b) * y.y_b).norm(), 1e-12 * y.y_a.norm());
  const ComplexVector eve = direct_effective_channel(r.h_ae, r.G, r.f_e, d.theta, d.P);
  EXPECT_LE((y.y_e - eve).norm(), 1e-12 * eve.norm());
}

TEST(Probe, DeterministicGivenSeed) {
  const ChannelStatistics st = default_scenario(2, 4).statistics();
  Rng d_rng(1);
  const DesignPoint d = random_point(st, d_rng);
  Rng a(77), b(77);
  const ChannelRealization ra = sample_channels(st, a);
  const ChannelRealization rb = sample_channels(st, b);
  EXPECT_EQ(probe(ra, d, st, a).y_a, probe(rb, d, st, b).y_a);
}

TEST(Probe, RejectsMismatchedDesign) {
  const ChannelStatistics st = default_scenario(2, 4).statistics();
  Rng rng(2);
  DesignPoint d = random_point(st, rng);
  d.theta.resize(3);
  const ChannelRealization r = sample_channels(st, rng);
  EXPECT_THROW(probe(r, d, st, rng), ConfigError);
}
