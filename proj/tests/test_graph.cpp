#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "spim/baselines.hpp"
#include "spim/encoding.hpp"
#include "spim/graph.hpp"

using namespace spim;

namespace {

MaxCutInstance complete(std::size_t n, double w) {
  std::vector<Edge> edges;
  for (std::uint32_t l = 0; l < n; ++l)
    for (std::uint32_t k = l + 1; k < n; ++k) edges.push_back({l, k, w});
  return MaxCutInstance::from_edges(n, edges);
}

double rel(double a, double b, double scale) { return std::abs(a - b) / std::max(1.0, scale); }

}  // namespace

TEST(SpinConfig, RejectsNonSpinEntries) {
  EXPECT_THROW(SpinConfig(std::vector<std::int8_t>{1, 0, -1}), std::invalid_argument);
  EXPECT_THROW((SpinConfig{1, 2}), std::invalid_argument);
  SpinConfig x{1, -1, 1};
  x.flip(1);
  EXPECT_EQ(x, (SpinConfig{1, 1, 1}));
  EXPECT_EQ(x.negated(), (SpinConfig{-1, -1, -1}));
}

TEST(Instance, FromEdgesValidates) {
  EXPECT_THROW(MaxCutInstance::from_edges(3, {{0, 0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(MaxCutInstance::from_edges(3, {{0, 3, 1.0}}), std::invalid_argument);
  EXPECT_THROW(MaxCutInstance::from_edges(3, {{0, 1, 1.0}, {1, 0, 2.0}}), std::invalid_argument);
  const auto inst = MaxCutInstance::from_edges(3, {{2, 0, 0.5}});
  EXPECT_EQ(inst.edges().front().l, 0u);
  EXPECT_EQ(inst.edges().front().k, 2u);
  EXPECT_DOUBLE_EQ(inst.weight(2, 0), 0.5);
  EXPECT_DOUBLE_EQ(inst.weight(0, 1), 0.0);
}

TEST(CutValue, TriangleTwoOfThree) {
  EXPECT_DOUBLE_EQ(cut_value(complete(3, 1.0), SpinConfig{1, 1, -1}), 2.0);
}

TEST(CutValue, AllEqualSpinsCutNothing) {
  std::mt19937_64 rng(3);
  const auto inst = oracle::random_instance(9, 0.7, rng);
  EXPECT_EQ(cut_value(inst, SpinConfig(9)), 0.0);
  EXPECT_EQ(cut_value(inst, SpinConfig(9).negated()), 0.0);
}

TEST(CutValue, DimensionMismatchRejected) {
  EXPECT_THROW(cut_value(complete(3, 1.0), SpinConfig(4)), std::invalid_argument);
  EXPECT_THROW(hamiltonian(complete(3, 1.0), SpinConfig(2)), std::invalid_argument);
}

TEST(CutValue, GeneratedSeed7MatchesDoubleLoop) {
  const auto g = generate_instance(10, 1.0, 1, 7);
  const auto w = oracle::encoded_weights(g.encoding);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto x = oracle::random_config(10, rng);
    EXPECT_NEAR(cut_value(g.instance, x), oracle::cut(w, x), 1e-12);
  }
  EXPECT_NEAR(total_weight(g.instance), oracle::total(w), 1e-12);
}

TEST(Hamiltonian, TwoSpins) {
  const auto inst = MaxCutInstance::from_edges(2, {{0, 1, 1.0}});
  EXPECT_DOUBLE_EQ(hamiltonian(inst, SpinConfig{1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(hamiltonian(inst, SpinConfig{1, -1}), -1.0);
}

TEST(Hamiltonian, CutIdentityAtN12) {
  std::mt19937_64 rng(12);
  const auto inst = oracle::random_instance(12, 0.8, rng);
  const auto w = oracle::dense(inst);
  for (int t = 0; t < 50; ++t) {
    const auto x = oracle::random_config(12, rng);
    EXPECT_NEAR(hamiltonian(inst, x), oracle::energy(w, x), 1e-12);
    EXPECT_NEAR(cut_value(inst, x), 0.5 * (oracle::total(w) - oracle::energy(w, x)), 1e-12);
  }
}

TEST(TotalWeight, Basics) {
  EXPECT_DOUBLE_EQ(total_weight(complete(3, 1.0)), 3.0);
  EXPECT_DOUBLE_EQ(total_weight(MaxCutInstance::from_edges(5, {})), 0.0);
}

TEST(CutIdentity, FuzzExplicitAndLowRank) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> size(2, 40);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = size(rng);
    const MaxCutInstance inst = t % 2 ? oracle::random_instance(n, 0.5, rng)
                                      : weights_from_encoding(oracle::random_encoding(n, t % 4 ? 1 : -1, rng, t % 3 == 0));
    const auto x = oracle::random_config(n, rng);
    double scale = 0.0;
    inst.for_each_edge([&](const Edge& e) { scale += std::abs(e.w); });
    const double s = total_weight(inst), h = hamiltonian(inst, x), c = cut_value(inst, x);
    ASSERT_LE(rel(c, 0.5 * (s - h), scale), 1e-12);
    ASSERT_LE(rel(c, cut_value(inst, x.negated()), scale), 1e-12);
    ASSERT_LE(rel(h, hamiltonian(inst, x.negated()), scale), 1e-12);
  }
}

TEST(CutIdentity, LowRankMatchesMaterializedEdges) {
  std::mt19937_64 rng(5);
  const auto lr = weights_from_encoding(oracle::random_encoding(30, -1, rng, true));
  std::vector<Edge> edges;
  lr.for_each_edge([&](const Edge& e) { edges.push_back(e); });
  const auto ex = MaxCutInstance::from_edges(30, edges);
  for (int t = 0; t < 20; ++t) {
    const auto x = oracle::random_config(30, rng);
    EXPECT_NEAR(cut_value(lr, x), cut_value(ex, x), 1e-10);
    EXPECT_NEAR(hamiltonian(lr, x), hamiltonian(ex, x), 1e-10);
  }
  EXPECT_NEAR(total_weight(lr), total_weight(ex), 1e-10);
}

TEST(WeightsFromEncoding, Examples) {
  const double pi = std::numbers::pi;
  auto w = weights_from_encoding(Rank2Encoding::from_phases({0, 0}, {pi / 2, pi / 2}, 1));
  EXPECT_DOUBLE_EQ(w.weight(0, 1), 1.0);

  w = weights_from_encoding(Rank2Encoding::from_phases({pi / 2, pi / 2, pi / 2}, {pi / 2, pi / 2, pi / 2}, 1));
  EXPECT_EQ(w.nonzero_pairs(), 0u);

  w = weights_from_encoding(Rank2Encoding::from_phases({pi / 3, 0}, {0, pi / 3}, -1));
  EXPECT_NEAR(w.weight(0, 1), 0.0, 1e-15);
}

TEST(WeightsFromEncoding, SingleAmplitudeReduction) {
  std::mt19937_64 rng(8);
  auto enc = oracle::random_encoding(12, 1, rng);
  enc.beta.assign(12, std::numbers::pi / 2);
  const auto w = weights_from_encoding(enc);
  for (std::size_t l = 0; l < 12; ++l)
    for (std::size_t k = l + 1; k < 12; ++k)
      EXPECT_EQ(w.weight(l, k), std::cos(enc.alpha[l]) * std::cos(enc.alpha[k]));
}

TEST(WeightsFromEncoding, AuxMapMatchesOracle) {
  std::mt19937_64 rng(21);
  const auto enc = oracle::random_encoding(15, -1, rng, true);
  const auto w = weights_from_encoding(enc);
  const auto ref = oracle::encoded_weights(enc);
  for (std::size_t l = 0; l < 15; ++l)
    for (std::size_t k = l + 1; k < 15; ++k) EXPECT_NEAR(w.weight(l, k), ref[l][k], 1e-15);
}

TEST(DiagonalSlack, ArgmaxUnaffectedByDiagonal) {
  std::mt19937_64 rng(31);
  for (std::size_t n = 3; n <= 10; ++n) {
    const auto enc = oracle::random_encoding(n, n % 2 ? 1 : -1, rng, n % 3 == 0);
    const auto inst = weights_from_encoding(enc);
    const auto w = oracle::encoded_weights(enc);
    // Full quadratic form including eps_l^2 + s eta_l^2 on the diagonal.
    std::vector<double> e(n), h(n);
    for (std::size_t l = 0; l < n; ++l) {
      e[l] = std::cos(enc.alpha[l]);
      h[l] = enc.aux.sigma[l] * std::cos(enc.beta[enc.aux.perm[l]]);
    }
    double best_cut = -INFINITY, cut_at_min_form = 0.0, min_form = INFINITY;
    for (std::uint64_t bits = 0; bits < (1u << n); ++bits) {
      const auto x = oracle::config_from_bits(n, bits);
      double se = 0.0, sh = 0.0;
      for (std::size_t l = 0; l < n; ++l) {
        se += e[l] * x[l];
        sh += h[l] * x[l];
      }
      const double form = se * se + enc.sign * sh * sh;
      const double c = oracle::cut(w, x);
      best_cut = std::max(best_cut, c);
      if (form < min_form - 1e-12) {
        min_form = form;
        cut_at_min_form = c;
      }
    }
    EXPECT_NEAR(cut_at_min_form, best_cut, 1e-9) << "n=" << n;
    EXPECT_NEAR(brute_force_maxcut(inst).cut_value, best_cut, 1e-9);
  }
}

TEST(Generate, FullDensityHasNoZeros) {
  const auto g = generate_instance(40, 1.0, 1, 2);
  EXPECT_EQ(g.instance.nonzero_pairs(), 40u * 39u / 2u);
  EXPECT_DOUBLE_EQ(g.instance.density(), 1.0);
}

TEST(Generate, HalfDensityAtN100) {
  const auto g = generate_instance(100, 0.5, 1, 4);
  EXPECT_EQ(g.instance.nonzero_pairs(), 2475u);
}

TEST(Generate, ExactCountsAcrossDensities) {
  for (double d : {0.05, 0.3, 0.5, 0.55, 0.75, 0.9, 0.999}) {
    for (std::size_t n : {7u, 50u, 101u}) {
      const auto g = generate_instance(n, d, -1, 3);
      const std::size_t pairs = n * (n - 1) / 2;
      EXPECT_EQ(g.instance.nonzero_pairs(), static_cast<std::size_t>(std::floor(d * pairs + 1e-9)))
          << "n=" << n << " d=" << d;
    }
  }
}

TEST(Generate, Deterministic) {
  const auto a = generate_instance(60, 0.7, -1, 9);
  const auto b = generate_instance(60, 0.7, -1, 9);
  EXPECT_EQ(a.instance.dense_matrix(), b.instance.dense_matrix());
  EXPECT_EQ(a.encoding.alpha, b.encoding.alpha);
  EXPECT_EQ(a.encoding.beta, b.encoding.beta);
  EXPECT_NE(generate_instance(60, 0.7, -1, 10).instance.dense_matrix(), a.instance.dense_matrix());
}

TEST(Generate, InstanceIsEncodedByItsEncoding) {
  // 64 vertices: the zero counts for 0.5 and 0.75 factor as a*b with a+b <= 64,
  // 0.9 needs 202 = 4*50 + 2 extra zeros.
  for (double d : {0.5, 0.75, 0.9}) {
    const auto g = generate_instance(64, d, 1, 5);
    EXPECT_EQ(g.instance.is_low_rank(), d != 0.9);
    const auto w = oracle::encoded_weights(g.encoding);
    std::size_t mismatches = 0;
    for (std::size_t l = 0; l < 64; ++l)
      for (std::size_t k = l + 1; k < 64; ++k)
        if (std::abs(g.instance.weight(l, k) - w[l][k]) > 1e-15) {
          ++mismatches;
          EXPECT_EQ(g.instance.weight(l, k), 0.0);
        }
    EXPECT_EQ(mismatches, d == 0.9 ? 2u : 0u) << "d=" << d;
  }
}

TEST(Generate, RejectsEmptyAndBadArguments) {
  EXPECT_THROW(generate_instance(10, 0.01, 1, 1), std::invalid_argument);
  EXPECT_THROW(generate_instance(1, 1.0, 1, 1), std::invalid_argument);
  EXPECT_THROW(generate_instance(10, 1.5, 1, 1), std::invalid_argument);
  EXPECT_THROW(generate_instance(10, 1.0, 0, 1), std::invalid_argument);
}

TEST(Generate, MetadataRecordsProvenance) {
  const auto g = generate_instance(12, 0.5, -1, 77);
  EXPECT_EQ(g.instance.metadata().at("seed"), "77");
  EXPECT_EQ(g.instance.metadata().at("sign"), "-1");
  EXPECT_EQ(g.instance.metadata().at("family"), "rank2");
}
