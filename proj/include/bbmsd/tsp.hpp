#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace bbmsd {

// Dense non-negative cost matrix for Hamiltonian path problems.
struct CostMatrix {
    std::size_t n = 0;
    std::vector<int> w;

    CostMatrix() = default;
    explicit CostMatrix(std::size_t size) : n(size), w(size * size, 0) {}
    int& at(std::size_t u, std::size_t v) { return w[u * n + v]; }
    int at(std::size_t u, std::size_t v) const { return w[u * n + v]; }
};

struct TspResult {
    std::vector<int> order;
    long long cost = 0;
    bool exact = false;
};

inline long long path_cost(const CostMatrix& m, const std::vector<int>& order) {
    long long c = 0;
    for (std::size_t i = 1; i < order.size(); ++i) c += m.at(order[i - 1], order[i]);
    return c;
}

constexpr std::size_t kHeldKarpLimit = 18;

// Exact minimum-cost Hamiltonian path (free endpoints) by dynamic programming over subsets.
inline TspResult held_karp(const CostMatrix& m) {
    const std::size_t n = m.n;
    if (n == 0) return {{}, 0, true};
    if (n > 24) throw std::invalid_argument("Held-Karp limited to 24 nodes");
    const std::size_t full = std::size_t{1} << n;
    constexpr int inf = std::numeric_limits<int>::max() / 2;
    std::vector<int> dp(full * n, inf);
    std::vector<int8_t> parent(full * n, -1);
    for (std::size_t v = 0; v < n; ++v) dp[(std::size_t{1} << v) * n + v] = 0;
    for (std::size_t s = 1; s < full; ++s)
        for (std::size_t v = 0; v < n; ++v) {
            if (!((s >> v) & 1u)) continue;
            int cur = dp[s * n + v];
            if (cur >= inf) continue;
            for (std::size_t u = 0; u < n; ++u) {
                if ((s >> u) & 1u) continue;
                std::size_t t = s | (std::size_t{1} << u);
                int c = cur + m.at(v, u);
                if (c < dp[t * n + u]) {
                    dp[t * n + u] = c;
                    parent[t * n + u] = static_cast<int8_t>(v);
                }
            }
        }
    std::size_t s = full - 1, best = 0;
    for (std::size_t v = 1; v < n; ++v)
        if (dp[s * n + v] < dp[s * n + best]) best = v;
    TspResult r;
    r.cost = dp[s * n + best];
    r.exact = true;
    for (int v = static_cast<int>(best); v >= 0;) {
        r.order.push_back(v);
        int p = parent[s * n + v];
        s &= ~(std::size_t{1} << v);
        v = p;
    }
    std::reverse(r.order.begin(), r.order.end());
    return r;
}

inline TspResult brute_force_path(const CostMatrix& m) {
    std::vector<int> order(m.n);
    std::iota(order.begin(), order.end(), 0);
    TspResult best{order, path_cost(m, order), true};
    while (std::next_permutation(order.begin(), order.end())) {
        long long c = path_cost(m, order);
        if (c < best.cost) best = {order, c, true};
    }
    return best;
}

// Nearest-neighbour construction from every start, then 2-opt and segment-move (or-3opt)
// improvement until no move helps.
inline TspResult heuristic_path(const CostMatrix& m) {
    const std::size_t n = m.n;
    if (n <= 1) {
        std::vector<int> o(n);
        std::iota(o.begin(), o.end(), 0);
        return {o, 0, n <= 1};
    }
    TspResult best;
    best.cost = std::numeric_limits<long long>::max();
    for (std::size_t start = 0; start < n; ++start) {
        std::vector<int> order{static_cast<int>(start)};
        std::vector<bool> used(n, false);
        used[start] = true;
        for (std::size_t step = 1; step < n; ++step) {
            int last = order.back(), pick = -1;
            for (std::size_t v = 0; v < n; ++v)
                if (!used[v] && (pick < 0 || m.at(last, v) < m.at(last, pick))) pick = static_cast<int>(v);
            used[pick] = true;
            order.push_back(pick);
        }
        long long cost = path_cost(m, order);
        bool improved = true;
        while (improved) {
            improved = false;
            // 2-opt: reverse order[i..j]
            for (std::size_t i = 0; i + 1 < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    std::reverse(order.begin() + i, order.begin() + j + 1);
                    long long c = path_cost(m, order);
                    if (c < cost) {
                        cost = c;
                        improved = true;
                    } else {
                        std::reverse(order.begin() + i, order.begin() + j + 1);
                    }
                }
            // move a segment of length 1..3 elsewhere
            for (std::size_t len = 1; len <= 3 && len < n; ++len)
                for (std::size_t i = 0; i + len <= n; ++i)
                    for (std::size_t pos = 0; pos + len <= n; ++pos) {
                        if (pos == i) continue;
                        std::vector<int> seg(order.begin() + i, order.begin() + i + len);
                        std::vector<int> rest;
                        rest.reserve(n);
                        rest.insert(rest.end(), order.begin(), order.begin() + i);
                        rest.insert(rest.end(), order.begin() + i + len, order.end());
                        rest.insert(rest.begin() + pos, seg.begin(), seg.end());
                        long long c = path_cost(m, rest);
                        if (c < cost) {
                            cost = c;
                            order = std::move(rest);
                            improved = true;
                        }
                    }
        }
        if (cost < best.cost) best = {order, cost, false};
    }
    return best;
}

inline TspResult schedule_tsp(const CostMatrix& m) {
    if (m.n <= kHeldKarpLimit) return held_karp(m);
    TspResult h = heuristic_path(m);
    std::vector<int> identity(m.n);
    std::iota(identity.begin(), identity.end(), 0);
    long long ic = path_cost(m, identity);
    if (ic < h.cost) return {identity, ic, false};
    return h;
}

}  // namespace bbmsd
