#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "bbmsd/compiler.hpp"
#include "bbmsd/tsp.hpp"

using namespace bbmsd;

namespace {

CostMatrix random_costs(std::mt19937& rng, std::size_t n, int max_w = 9) {
    CostMatrix m(n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) m.at(u, v) = u == v ? 0 : static_cast<int>(rng() % (max_w + 1));
    return m;
}

// Every permutation, independent of the library solvers.
long long permutation_optimum(const CostMatrix& m) {
    std::vector<int> p(m.n);
    std::iota(p.begin(), p.end(), 0);
    long long best = -1;
    do {
        long long c = path_cost(m, p);
        if (best < 0 || c < best) best = c;
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

bool is_permutation_of_nodes(const std::vector<int>& order, std::size_t n) {
    std::vector<int> s = order;
    std::sort(s.begin(), s.end());
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] != static_cast<int>(i)) return false;
    return s.size() == n;
}

}  // namespace

TEST(Tsp, HeldKarpMatchesPermutationEnumeration) {
    std::mt19937 rng(17);
    for (std::size_t n = 1; n <= 9; ++n)
        for (int trial = 0; trial < (n <= 7 ? 8 : 2); ++trial) {
            auto m = random_costs(rng, n);
            auto hk = held_karp(m);
            EXPECT_TRUE(hk.exact);
            EXPECT_TRUE(is_permutation_of_nodes(hk.order, n));
            EXPECT_EQ(hk.cost, path_cost(m, hk.order));
            EXPECT_EQ(hk.cost, permutation_optimum(m)) << "n=" << n << " trial=" << trial;
            EXPECT_EQ(brute_force_path(m).cost, hk.cost);
        }
}

TEST(Tsp, AllZeroMatrix) {
    CostMatrix m(6);
    auto r = schedule_tsp(m);
    EXPECT_EQ(r.cost, 0);
    EXPECT_TRUE(is_permutation_of_nodes(r.order, 6));
}

TEST(Tsp, ThreeNodeAsymmetricToy) {
    CostMatrix m(3);
    m.at(0, 1) = 1;
    m.at(1, 2) = 1;
    m.at(0, 2) = 5;
    m.at(1, 0) = 5;
    m.at(2, 1) = 5;
    m.at(2, 0) = 5;
    auto r = schedule_tsp(m);
    EXPECT_EQ(r.cost, 2);
    EXPECT_EQ(r.order, (std::vector<int>{0, 1, 2}));
}

TEST(Tsp, HeuristicCloseToOptimumOnRandomInstances) {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 5; ++trial) {
        auto m = random_costs(rng, 12, 4);
        auto h = heuristic_path(m);
        EXPECT_TRUE(is_permutation_of_nodes(h.order, 12));
        EXPECT_EQ(h.cost, path_cost(m, h.order));
        EXPECT_GE(h.cost, held_karp(m).cost);
    }
}

TEST(Tsp, HeuristicWithinFivePercentOnFifteenToOne) {
    auto code = build_code(gross_spec());
    auto natives = native_set(code, step_costs(code));
    auto g = load_protocol(std::string(BBMSD_DATA_DIR) + "/protocols/15-to-1.txt");
    auto res = compile(g, code, natives, CompileOptions{});
    ASSERT_EQ(res.cost_matrix.n, 15u);
    auto exact = held_karp(res.cost_matrix);
    auto heur = heuristic_path(res.cost_matrix);
    EXPECT_LE(double(heur.cost), 1.05 * double(exact.cost) + 1e-9);
    EXPECT_LE(exact.cost, heur.cost);
}

TEST(Tsp, LargeInstanceUsesHeuristic) {
    std::mt19937 rng(29);
    auto m = random_costs(rng, kHeldKarpLimit + 2);
    auto r = schedule_tsp(m);
    EXPECT_FALSE(r.exact);
    EXPECT_TRUE(is_permutation_of_nodes(r.order, m.n));
    std::vector<int> id(m.n);
    std::iota(id.begin(), id.end(), 0);
    EXPECT_LE(r.cost, path_cost(m, id));
}
