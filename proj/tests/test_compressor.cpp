#include <gtest/gtest.h>

#include "bbmsd/compressor.hpp"

using namespace bbmsd;

namespace {

std::string data(const std::string& rel) { return std::string(BBMSD_DATA_DIR) + "/" + rel; }

// Minimum peak footprint over all column orders, by dynamic programming over placed-column sets.
std::size_t min_peak_over_column_orders(const TriorthogonalMatrix& t) {
    const std::size_t n = t.n(), m = t.m();
    std::vector<uint32_t> row_mask(m, 0);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c)
            if (t.g.get(r, c)) row_mask[r] |= 1u << c;
    const uint32_t all = (1u << n) - 1;
    std::vector<std::size_t> best(1u << n, SIZE_MAX);
    best[0] = 0;
    for (uint32_t s = 0; s < all; ++s) {
        if (best[s] == SIZE_MAX) continue;
        for (std::size_t c = 0; c < n; ++c) {
            if ((s >> c) & 1u) continue;
            const uint32_t placed = s | (1u << c), rest = (all & ~s);
            std::size_t active = 0;
            for (std::size_t r = 0; r < m; ++r) active += (row_mask[r] & placed) && (row_mask[r] & rest);
            const auto peak = std::max(best[s], active);
            best[placed] = std::min(best[placed], peak);
        }
    }
    return best[all];
}

// No slot hosts two live rows at any column.
bool slot_reuse_valid(const TriorthogonalMatrix& g, const SlotPlan& p) {
    for (std::size_t c = 0; c < g.n(); ++c) {
        std::vector<int> owner(p.slots, -1);
        for (std::size_t r = 0; r < g.m(); ++r) {
            if (!p.live(r, static_cast<int>(c))) continue;
            int s = p.row_slot[r];
            if (owner[s] >= 0) return false;
            owner[s] = static_cast<int>(r);
        }
    }
    return true;
}

CompressionResult compress_to(const std::string& name, std::size_t target) {
    CompressOptions opt;
    opt.target = target;
    return compress(load_protocol(data("protocols/" + name + ".txt")), opt);
}

}  // namespace

TEST(Compressor, FortyNineToOneReachesSeven) {
    auto g = load_protocol(data("protocols/49-to-1.txt"));
    auto res = compress_to("49-to-1", 7);
    EXPECT_EQ(res.footprint_before, 13u);
    EXPECT_LE(res.footprint_after, 7u);
    EXPECT_EQ(footprint(res.g_prime).peak, res.footprint_after);
    EXPECT_EQ(replay(g, res.ops_log), res.g_prime);
    auto rep = verify_equivalence(g, res);
    EXPECT_TRUE(rep.ok()) << (rep.failures.empty() ? "" : rep.failures[0]);
    EXPECT_TRUE(rep.channel_checked);
    EXPECT_TRUE(slot_reuse_valid(res.g_prime, res.reuse_map));
    EXPECT_LE(res.reuse_map.slots, 11);
    for (const auto& op : res.ops_log)
        if (op.kind == OpKind::RowAdd) EXPECT_GE(op.a, g.k) << "row additions must use an even source row";
}

TEST(Compressor, SixtyFourToTwoCczReachesTen) {
    auto g = load_protocol(data("protocols/64-to-2ccz.txt"));
    auto res = compress_to("64-to-2ccz", 10);
    EXPECT_EQ(res.footprint_before, 17u);
    EXPECT_LE(res.footprint_after, 10u);
    EXPECT_EQ(replay(g, res.ops_log), res.g_prime);
    auto rep = verify_equivalence(g, res);
    EXPECT_TRUE(rep.triorthogonal);
    EXPECT_TRUE(rep.span_preserved);
    EXPECT_TRUE(rep.polynomial_equal);
    EXPECT_TRUE(rep.ok()) << (rep.failures.empty() ? "" : rep.failures[0]);
    EXPECT_TRUE(slot_reuse_valid(res.g_prime, res.reuse_map));
}

TEST(Compressor, FifteenToOneCannotGoBelowFour) {
    auto g = load_protocol(data("protocols/15-to-1.txt"));
    EXPECT_EQ(min_peak_over_column_orders(g), 4u);
    CompressOptions opt;
    opt.iterations = 5000;
    opt.restarts = 2;
    auto res = compress(g, opt);
    EXPECT_EQ(res.footprint_after, 4u);
    EXPECT_TRUE(verify_triorthogonal(res.g_prime).valid());
    EXPECT_TRUE(verify_equivalence(g, res).ok());
}

TEST(Compressor, DeterministicForSeed) {
    auto g = load_protocol(data("protocols/49-to-1.txt"));
    CompressOptions opt;
    opt.iterations = 3000;
    opt.restarts = 2;
    opt.seed = 42;
    auto a = compress(g, opt), b = compress(g, opt);
    EXPECT_EQ(a.ops_log, b.ops_log);
    EXPECT_EQ(a.g_prime, b.g_prime);
}

TEST(Compressor, IdentityCompressionPasses) {
    auto g = load_protocol(data("protocols/15-to-1.txt"));
    CompressionResult res;
    res.g_prime = g;
    res.footprint_before = res.footprint_after = footprint(g).peak;
    res.reuse_map = make_slot_plan(g, true);
    auto rep = verify_equivalence(g, res);
    EXPECT_TRUE(rep.ok());
    EXPECT_TRUE(rep.channel_checked);
}

TEST(Compressor, CorruptMoveIsNamed) {
    auto g = load_protocol(data("protocols/20-to-4.txt"));
    CompressionResult res;
    res.ops_log = {CompressionOp{OpKind::RowAdd, 0, 1}};  // odd row onto odd row
    res.g_prime = replay(g, res.ops_log);
    res.reuse_map = make_slot_plan(res.g_prime, true);
    auto rep = verify_equivalence(g, res);
    EXPECT_FALSE(rep.ok());
    ASSERT_FALSE(rep.failures.empty());
    EXPECT_NE(rep.failures[0].find("triorthogonality"), std::string::npos) << rep.failures[0];
}

TEST(Compressor, OpsLogTextRoundTrip) {
    for (auto op : {CompressionOp{OpKind::ColSwap, 3, 9}, CompressionOp{OpKind::RowSwap, 1, 2},
                    CompressionOp{OpKind::RowAdd, 4, 0}})
        EXPECT_EQ(parse_op(to_string(op)), op);
    EXPECT_THROW(parse_op("rowmul 1 2"), std::runtime_error);
    EXPECT_THROW(parse_op("colswap 1"), std::runtime_error);
}

TEST(Compressor, NoRecyclableRowsGivesSamePlan) {
    std::istringstream in("1 1 1\n1\n");
    auto g = parse_protocol(in, false, "single");
    auto plain = make_slot_plan(g, false), recycled = make_slot_plan(g, true);
    EXPECT_EQ(plain.slots, recycled.slots);
    EXPECT_EQ(plain.row_slot, recycled.row_slot);
}

TEST(Compressor, ShippedPlansAreValid) {
    for (const char* name : {"15-to-1", "20-to-4", "8-to-ccz", "49-to-1", "64-to-2ccz"}) {
        auto g = load_protocol(data(std::string("protocols/") + name + ".txt"));
        for (bool recycle : {false, true}) {
            auto p = make_slot_plan(g, recycle);
            EXPECT_TRUE(validate_slot_plan(g, p)) << name;
            EXPECT_TRUE(slot_reuse_valid(g, p)) << name;
        }
    }
}
