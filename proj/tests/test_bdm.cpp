#include <gtest/gtest.h>

#include <cmath>
#include <tuple>
#include <unordered_map>

#include "mils/bdm.hpp"
#include "mils/random.hpp"
#include "oracles.hpp"

using namespace mils;

namespace {

std::shared_ptr<const CtmTable> published_strings()
{
    static auto t = std::make_shared<const CtmTable>(load_ctm_table(std::string(MILS_DATA_DIR) + "/ctm-b2-d12.csv"));
    return t;
}

std::shared_ptr<const CtmTable> published_arrays()
{
    static auto t = std::make_shared<const CtmTable>(load_ctm_table(std::string(MILS_DATA_DIR) + "/ctm-b2-d4x4.csv"));
    return t;
}

EstimatorConfig published_config()
{
    EstimatorConfig cfg;
    cfg.string_table = published_strings();
    cfg.array_table = published_arrays();
    return cfg;
}

BitMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double density = 0.5)
{
    BitMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            m.set(r, c, rng.unit() < density);
        }
    }
    return m;
}

std::string random_string(Rng& rng, std::size_t n, double density = 0.5)
{
    std::string s(n, '0');
    for (auto& ch : s) {
        ch = rng.unit() < density ? '1' : '0';
    }
    return s;
}


}  // namespace

TEST(Bdm, DecomposeZeroMatrix)
{
    EstimatorConfig cfg;
    const auto ms = decompose(BitMatrix(8, 8), cfg);
    ASSERT_EQ(ms.counts.size(), 1U);
    EXPECT_EQ(ms.counts.begin()->first, BlockKey::array_key(4, 4, std::string(16, '0')));
    EXPECT_EQ(ms.counts.begin()->second, 4U);
    EXPECT_EQ(ms.coverage(), 1.0);
}

TEST(Bdm, DecomposeString)
{
    EstimatorConfig cfg;
    const auto ms = decompose(std::string(12, '0') + std::string(12, '1'), cfg);
    EXPECT_EQ(ms.block_count(), 2U);
    EXPECT_EQ(ms.counts.size(), 2U);
    EXPECT_EQ(ms.coverage(), 1.0);
}

TEST(Bdm, DecomposeDiscardBoundary)
{
    EstimatorConfig cfg;
    cfg.boundary = BoundaryPolicy::discard;
    const auto ms = decompose(BitMatrix(9, 9), cfg);
    EXPECT_EQ(ms.block_count(), 4U);
    EXPECT_EQ(ms.covered_cells, 64U);
    EXPECT_EQ(ms.total_cells, 81U);
    EXPECT_DOUBLE_EQ(ms.coverage(), 64.0 / 81.0);
}

TEST(Bdm, ShrinkBoundaryCoversEverything)
{
    for (std::size_t rows : {1, 3, 5, 9, 13}) {
        for (std::size_t cols : {1, 2, 7, 9, 16}) {
            const auto layout = BlockLayout::matrix(rows, cols, 4, BoundaryPolicy::shrink);
            EXPECT_EQ(layout.covered_cells(), rows * cols);
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < cols; ++c) {
                    EXPECT_GE(layout.block_of(r, c), 0);
                }
            }
            for (const auto& b : layout.blocks()) {
                EXPECT_EQ(b.height, b.width);
                EXPECT_LE(b.height, 4U);
            }
        }
    }
    const auto s = BlockLayout::string(29, 12, BoundaryPolicy::shrink);
    EXPECT_EQ(s.covered_cells(), 29U);
    EXPECT_EQ(s.blocks().size(), 3U);  // 12 + 12 + 5
}

TEST(Bdm, AutomaticBoundaryFollowsTableCompleteness)
{
    EstimatorConfig cfg;
    EXPECT_EQ(cfg.boundary_for(BlockKind::array), BoundaryPolicy::shrink);  // entropy fallback
    cfg.array_table = published_arrays();
    EXPECT_EQ(cfg.boundary_for(BlockKind::array), BoundaryPolicy::shrink);  // 1x1..3x3 complete
    auto partial = std::make_shared<CtmTable>(BlockKind::array);
    partial->insert(BlockKey::array_key(4, 4, std::string(16, '0')), 1.0);
    cfg.array_table = partial;
    EXPECT_EQ(cfg.boundary_for(BlockKind::array), BoundaryPolicy::discard);
}

TEST(Bdm, ZeroMatrixSingleBlockCase)
{
    const auto cfg = published_config();
    const double zero = published_arrays()->lookup(BlockKey::array_key(4, 4, std::string(16, '0')));
    EXPECT_EQ(bdm(BitMatrix(8, 8), cfg), 2.0 + zero);
}

TEST(Bdm, SingleStringBlockIsItsTableValue)
{
    const auto cfg = published_config();
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        const std::string s = random_string(rng, 12);
        EXPECT_EQ(bdm(s, cfg), published_strings()->lookup(BlockKey::string_key(s))) << s;
    }
}

TEST(Bdm, TiledRandomBlock)
{
    const auto cfg = published_config();
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const BitMatrix b = random_matrix(rng, 4, 4);
        BitMatrix m(16, 16);
        for (std::size_t r = 0; r < 16; ++r) {
            for (std::size_t c = 0; c < 16; ++c) {
                m.set(r, c, b.at(r % 4, c % 4));
            }
        }
        const double cb = published_arrays()->lookup(BlockKey::array_key(4, 4, b.to_string()));
        EXPECT_EQ(bdm(m, cfg), 4.0 + cb);
        EXPECT_EQ(bdm(m, cfg), oracle::naive_bdm(m, 4, *published_arrays(), false));
    }
}

TEST(Bdm, MatchesNaiveOracle)
{
    const auto cfg = published_config();
    Rng rng(2024);
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 12 * (1 + rng.below(20));
        const std::string s = random_string(rng, n, 0.1 + 0.8 * rng.unit());
        EXPECT_EQ(bdm(s, cfg), oracle::naive_bdm(BitMatrix::from_string(s), 12, *published_strings(), true));
    }
    for (int i = 0; i < 500; ++i) {
        const std::size_t r = 4 * (1 + rng.below(8));
        const std::size_t c = 4 * (1 + rng.below(8));
        const BitMatrix m = random_matrix(rng, r, c, 0.05 + 0.9 * rng.unit());
        EXPECT_EQ(bdm(m, cfg), oracle::naive_bdm(m, 4, *published_arrays(), false));
    }
}

TEST(Bdm, TilingDoublingAddsOneBit)
{
    const auto cfg = published_config();
    for (std::size_t k = 1; k <= 64; ++k) {
        for (char bit : {'0', '1'}) {
            const std::string s(12 * k, bit);
            EXPECT_EQ(bdm(s + s, cfg) - bdm(s, cfg), 1.0) << k;
        }
        const BitMatrix m(4 * k, 8);
        const BitMatrix doubled(8 * k, 8);
        EXPECT_EQ(bdm(doubled, cfg) - bdm(m, cfg), 1.0) << k;
    }
}

TEST(Bdm, MissingBlockWithoutFallback)
{
    EstimatorConfig cfg;
    auto table = std::make_shared<CtmTable>(BlockKind::string);
    table->insert(BlockKey::string_key("0000"), 3.0);
    cfg.string_table = table;
    cfg.string_block = 4;
    EXPECT_EQ(bdm("00000000", cfg), 4.0);
    EXPECT_THROW((void)bdm("00000001", cfg), MissingBlock);
    cfg.fallback = Fallback::entropy;
    // "0001": 4 * H(1/4)
    const double h = -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75));
    EXPECT_EQ(bdm("00000001", cfg), 3.0 + quantize_bits(4 * h));
}

TEST(Bdm, BlockEntropyExamples)
{
    EXPECT_EQ(block_entropy(std::string(48, '0'), 12), 0.0);
    EXPECT_EQ(block_entropy(BitMatrix(8, 8), 4), 0.0);
    EXPECT_EQ(block_entropy("0101", 1), 4.0);
    // Two equiprobable block values over 2k blocks: one bit per block.
    for (std::size_t k : {1, 3, 8}) {
        std::string s;
        for (std::size_t i = 0; i < k; ++i) {
            s += "0011";
            s += "1100";
        }
        EXPECT_DOUBLE_EQ(block_entropy(s, 4), static_cast<double>(2 * k));
    }
}

TEST(Bdm, ComplexityDispatch)
{
    auto cfg = published_config();
    const std::string s = "011010011001";
    EXPECT_EQ(complexity(s, cfg), bdm(s, cfg));
    cfg.method = Method::block_entropy;
    EXPECT_EQ(complexity(s, cfg), block_entropy(s, 12));
    EXPECT_THROW((void)complexity("", cfg), Error);
    cfg.string_block = 13;
    EXPECT_THROW((void)complexity(s, cfg), Error);
}

TEST(Bdm, BothMethodsRankPeriodicBelowRare)
{
    // Table from the exhaustive 2-state enumeration; blocks of length 2.
    auto table = std::make_shared<const CtmTable>(build_ctm_table(enumerate_machines({2, 2}, 6)));
    EstimatorConfig cfg;
    cfg.string_table = table;
    cfg.string_block = 2;
    const std::string periodic = "0101010101010101";
    const std::string rare = "0001101100101101";
    EXPECT_LT(complexity(periodic, cfg), complexity(rare, cfg));
    cfg.method = Method::block_entropy;
    EXPECT_LT(complexity(periodic, cfg), complexity(rare, cfg));
}

TEST(Bdm, CellEntropyFallbackIsPermutationInvariant)
{
    EXPECT_EQ(cell_entropy_bits(BlockKey::array_key(2, 2, "0000")), 0.0);
    EXPECT_EQ(cell_entropy_bits(BlockKey::array_key(2, 2, "0110")),
              cell_entropy_bits(BlockKey::array_key(2, 2, "1001")));
    EXPECT_EQ(cell_entropy_bits(BlockKey::array_key(2, 2, "0110")), 4.0);
}

TEST(Bdm, DeltaEvaluationIsExact)
{
    for (const auto& cfg0 : {EstimatorConfig{}, published_config()}) {
        for (Method method : {Method::bdm, Method::block_entropy}) {
            EstimatorConfig cfg = cfg0;
            cfg.method = method;
            Rng rng(99);
            for (int trial = 0; trial < 200; ++trial) {
                const std::size_t rows = 1 + rng.below(14);
                const std::size_t cols = 1 + rng.below(14);
                BitMatrix m = random_matrix(rng, rows, cols, rng.unit());
                const auto layout = layout_for_matrix(rows, cols, cfg);
                const auto ms = collect(m, layout);
                const std::size_t r = rng.below(rows);
                const std::size_t c = rng.below(cols);
                const auto b = static_cast<std::size_t>(layout.block_of(r, c));
                BlockKey old_key = layout.key(m, b);
                BlockKey new_key = old_key;
                new_key.bits ^= layout.cell_mask(b, r, c);
                m.flip(r, c);
                EXPECT_EQ(layout.key(m, b), new_key);
                const double full = estimate(collect(m, layout), cfg);
                const double fast = estimate_with_delta(ms, {{old_key, -1}, {new_key, +1}}, cfg);
                EXPECT_EQ(full, fast);
            }
        }
    }
}

TEST(Bdm, ConfigValidation)
{
    EstimatorConfig cfg;
    cfg.array_block = 5;
    EXPECT_THROW(cfg.validate(), Error);
    cfg.array_block = 4;
    cfg.array_table = published_strings();
    EXPECT_THROW(cfg.validate(), Error);
}
