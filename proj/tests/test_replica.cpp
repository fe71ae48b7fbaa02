#include "helpers.hpp"

#include "mpsens/oracle/statevector.hpp"
#include "mpsens/permutation.hpp"
#include "mpsens/replica.hpp"
#include "mpsens/transfer.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mpsens;
using namespace testing_helpers;

namespace {

oracle::Statevector dense_of(const MpsState &st) {
    oracle::Statevector sv(st.size(), st.local_dim());
    sv.amplitudes() = to_statevector(st);
    sv.amplitudes() /= sv.amplitudes().norm();
    return sv;
}

std::vector<Index> sites_of(const std::vector<bool> &mask) {
    std::vector<Index> out;
    for(std::size_t i = 0; i < mask.size(); ++i)
        if(mask[i]) out.push_back(static_cast<Index>(i));
    return out;
}

} // namespace

TEST(Permutation, AlgebraAndCycles) {
    const Permutation c = Permutation::cycle(4), e = Permutation::identity(4);
    EXPECT_EQ(c * c.inverse(), e);
    EXPECT_EQ(c.cycle_count(), 1);
    EXPECT_EQ(e.cycle_count(), 4);
    const Permutation a({1, 0, 2}), b({0, 2, 1});
    EXPECT_EQ((a * b).image(), (std::vector<int>{1, 2, 0}));
    EXPECT_EQ((a * b).cycle_type(), (std::vector<int>{3}));
    EXPECT_THROW(Permutation({0, 0, 1}), std::invalid_argument);
}

TEST(Permutation, EnumerationAndIndex) {
    for(int k = 1; k <= 5; ++k) {
        const auto all = all_permutations(k);
        std::size_t fact = 1;
        for(int i = 2; i <= k; ++i) fact *= static_cast<std::size_t>(i);
        ASSERT_EQ(all.size(), fact);
        EXPECT_EQ(all.front(), Permutation::identity(k));
        for(std::size_t i = 0; i < all.size(); ++i) {
            EXPECT_EQ(permutation_index(all[i]), i);
            if(i > 0) EXPECT_LT(all[i - 1].image(), all[i].image());
        }
    }
}

TEST(Replica, SingleReplicaIsTransferMatrix) {
    CounterRng rng(41);
    const auto a = random_tensor(3, 2, 3, rng);
    const auto v = random_vector(9, rng);
    EXPECT_LT((replica_contract(a, Permutation::identity(1), v) - transfer_matrix(a) * v).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Replica, DenseAndContractionAgree) {
    CounterRng rng(42);
    for(int k : {2, 3}) {
        const auto a = random_tensor(3, 2, 2, rng); // rectangular on purpose
        for(const auto &alpha : all_permutations(k)) {
            ReplicaOperator dense(a, alpha, ReplicaMode::dense), lazy(a, alpha, ReplicaMode::contraction);
            ASSERT_TRUE(dense.is_dense());
            ASSERT_FALSE(lazy.is_dense());
            const auto v = random_vector(lazy.in_dim(), rng);
            const auto w = random_vector(lazy.out_dim(), rng);
            EXPECT_LT((dense.apply(v) - lazy.apply(v)).cwiseAbs().maxCoeff(), 1e-10);
            EXPECT_LT((dense.apply_left(w) - lazy.apply_left(w)).cwiseAbs().maxCoeff(), 1e-10);
            EXPECT_LT((lazy.dense().transpose() * w - lazy.apply_left(w)).cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

TEST(Replica, DenseCapRaisesBudget) {
    CounterRng rng(43);
    const auto a = random_tensor(4, 2, 4, rng);
    EXPECT_THROW(ReplicaOperator(a, Permutation::cycle(3), ReplicaMode::dense, 100), BudgetExceeded);
    ReplicaOperator lazy(a, Permutation::cycle(3), ReplicaMode::automatic, 100);
    EXPECT_FALSE(lazy.is_dense());
}

TEST(Replica, PermutedOperatorIsSimilarToTensorPower) {
    CounterRng          rng(44);
    const auto          a = random_tensor(2, 2, 2, rng);
    const ComplexMatrix t = transfer_matrix(a);
    for(int k : {2, 3}) {
        const ComplexMatrix tc = ReplicaOperator(a, Permutation::cycle(k), ReplicaMode::dense).dense();
        ComplexMatrix       p = tc, q = t;
        for(int m = 1; m <= 3; ++m) {
            EXPECT_LT(std::abs(p.trace() - std::pow(q.trace(), k)), 1e-9 * std::max(1.0, std::abs(p.trace())));
            p = p * tc;
            q = q * t;
        }
    }
}

TEST(Replica, ReplicatePairingMatchesIndexLoop) {
    CounterRng          rng(45);
    const Index         chi = 3;
    const ComplexMatrix m   = random_matrix(chi, chi, rng);
    const Permutation   alpha({1, 2, 0});
    const auto          v = replicate_pairing(m, alpha);
    ASSERT_EQ(v.size(), Index{729});
    for(Index idx = 0; idx < v.size(); ++idx) {
        Index rem = idx, leg[6];
        for(int j = 5; j >= 0; --j) {
            leg[j] = rem % chi;
            rem /= chi;
        }
        cplx ref = 1;
        for(int i = 0; i < 3; ++i) ref *= m(leg[2 * alpha(i)], leg[2 * i + 1]);
        ASSERT_LT(std::abs(v(idx) - ref), 1e-13);
    }
}

TEST(Replica, TraceMatchesDenseDensityMatrix) {
    CounterRng rng(46);
    const auto st = random_mps(7, 2, 4, rng);
    const auto sv = dense_of(st);
    for(const auto &mask : {std::vector<bool>{true, true, false, false, false, false, false},
                            std::vector<bool>{true, false, false, true, true, false, true},
                            std::vector<bool>{false, false, false, false, false, false, true}})
        for(int k : {2, 3}) {
            const double ref = oracle::renyi_trace(sv.reduced_density(sites_of(mask)), k);
            EXPECT_NEAR(replica_trace(st, mask, k), ref, 1e-10 * std::max(1.0, ref));
        }
}

TEST(Replica, FiniteMutualInfoMatchesDenseOracle) {
    CounterRng rng(47);
    const auto st = random_mps(8, 2, 4, rng);
    const auto sv = dense_of(st);
    for(Index r : {1, 2, 4})
        for(int k : {2, 3}) {
            const auto               lay = BlockLayout::centered(8, r);
            std::vector<Index>       a, b;
            for(Index i = lay.a_begin; i < lay.a_end; ++i) a.push_back(i);
            for(Index i = lay.b_begin; i < lay.b_end; ++i) b.push_back(i);
            const double ref = oracle::mutual_information(sv, a, b, k);
            EXPECT_NEAR(renyi_mutual_info_finite(st, lay, k).value, ref, 1e-9);
        }
}

TEST(Replica, BlockLayout) {
    const auto l = BlockLayout::centered(10, 2);
    EXPECT_EQ(l.a_begin, 0);
    EXPECT_EQ(l.a_end, 4);
    EXPECT_EQ(l.b_begin, 6);
    EXPECT_EQ(l.b_end, 10);
    EXPECT_EQ(l.gap(), 2);
    BlockLayout bad{10, 0, 5, 4, 10};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Replica, ContractionBudget) {
    CounterRng rng(48);
    const auto st = random_mps(6, 2, 4, rng);
    std::vector<bool> mask(6, false);
    mask[0] = true;
    EXPECT_THROW((void)replica_trace(st, mask, 3, 100), BudgetExceeded);
}

TEST(Replica, UniformPathsAgree) {
    CounterRng rng(49);
    for(int k : {2, 3}) {
        const auto st = MpsState::uniform({random_tensor(2, 2, 2, rng)});
        for(Index r : {1, 2, 5}) {
            TiMutualInfoPaths paths;
            const double      v = renyi_mutual_info_TI(st, k, r, &paths);
            ASSERT_TRUE(paths.spectral_available);
            EXPECT_NEAR(paths.spectral, paths.trace_ratio, 1e-8);
            EXPECT_NEAR(renyi_mutual_info_spectral(st.site(0), k, r), v, 1e-8);
        }
        const auto curve = renyi_mutual_info_TI_curve(st, k, 5);
        EXPECT_NEAR(curve[1], renyi_mutual_info_TI(st, k, 2), 1e-10);
    }
}

TEST(Replica, UniformProductStateHasNoMutualInfo) {
    SiteTensor a(1, 2, 1);
    a[0](0, 0) = 0.6;
    a[1](0, 0) = 0.8;
    for(int k : {2, 3, 4}) EXPECT_NEAR(renyi_mutual_info_TI(MpsState::uniform({a}), k, 1), 0.0, 1e-12);
}

TEST(Replica, UniformMutualInfoDecays) {
    CounterRng rng(50);
    const auto st    = MpsState::uniform({random_tensor(3, 2, 3, rng)});
    const auto curve = renyi_mutual_info_TI_curve(st, 2, 40);
    EXPECT_GT(curve[0], curve[39]);
    EXPECT_LT(std::abs(curve[39]), 1e-6);
}

TEST(Replica, FixedPointsAreNormalised) {
    CounterRng rng(51);
    const auto fp = uniform_fixed_points(MpsState::uniform({random_tensor(3, 2, 3, rng), random_tensor(3, 2, 3, rng)}));
    ASSERT_EQ(fp.l.size(), 2U);
    for(std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(std::abs((fp.l[j].transpose() * fp.rho[j]).trace() - 1.0), 0.0, 1e-10);
}
