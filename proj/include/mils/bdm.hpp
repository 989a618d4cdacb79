#pragma once

// Block Decomposition Method: C(X) = sum over distinct blocks r of
// log2(multiplicity(r)) + CTM(r), plus a Shannon block-entropy estimator
// that works on the same block multiset.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mils/ctm.hpp"
#include "mils/matrix.hpp"

namespace mils {

enum class Method { bdm, block_entropy };
enum class BoundaryPolicy { automatic, shrink, discard };
/// What bdm does for a block missing from the table. `automatic` means
/// `entropy` when no table of the block's kind is configured, else `none`.
enum class Fallback { automatic, none, entropy };

struct EstimatorConfig {
    Method method = Method::bdm;
    std::size_t string_block = 12;
    std::size_t array_block = 4;
    BoundaryPolicy boundary = BoundaryPolicy::automatic;
    Fallback fallback = Fallback::automatic;
    std::shared_ptr<const CtmTable> string_table;
    std::shared_ptr<const CtmTable> array_table;

    void validate() const
    {
        if (string_block < 1 || string_block > 12) {
            throw Error("string block length must be in [1, 12], got " + std::to_string(string_block));
        }
        if (array_block < 1 || array_block > 4) {
            throw Error("array block dimension must be in [1, 4], got " + std::to_string(array_block));
        }
        if (string_table && string_table->kind() != BlockKind::string) {
            throw Error("string table slot holds an array table");
        }
        if (array_table && array_table->kind() != BlockKind::array) {
            throw Error("array table slot holds a string table");
        }
    }

    [[nodiscard]] const CtmTable* table_for(BlockKind kind) const noexcept
    {
        return kind == BlockKind::string ? string_table.get() : array_table.get();
    }

    [[nodiscard]] Fallback fallback_for(BlockKind kind) const noexcept
    {
        if (fallback != Fallback::automatic) {
            return fallback;
        }
        return table_for(kind) == nullptr ? Fallback::entropy : Fallback::none;
    }

    /// shrink when every smaller block size is resolvable, else discard.
    [[nodiscard]] BoundaryPolicy boundary_for(BlockKind kind) const
    {
        if (boundary != BoundaryPolicy::automatic) {
            return boundary;
        }
        if (fallback_for(kind) == Fallback::entropy) {
            return BoundaryPolicy::shrink;
        }
        const CtmTable* table = table_for(kind);
        const std::size_t size = kind == BlockKind::string ? string_block : array_block;
        for (std::size_t k = 1; k < size; ++k) {
            if (table == nullptr || !table->complete_for(k)) {
                return BoundaryPolicy::discard;
            }
        }
        return BoundaryPolicy::shrink;
    }
};

// ---------------------------------------------------------------------------
// Layout: how an object is cut into blocks
// ---------------------------------------------------------------------------

struct BlockRect {
    std::uint32_t row = 0;
    std::uint32_t col = 0;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
};

/// Non-overlapping partition of a rows x cols grid into blocks, with a
/// cell -> block index map (-1 for cells dropped by the discard policy).
class BlockLayout {
public:
    /// Matrix layout: d x d blocks row-major from the top-left corner.
    /// shrink tiles leftover strips with the largest square that fits.
    static BlockLayout matrix(std::size_t rows, std::size_t cols, std::size_t d, BoundaryPolicy policy)
    {
        BlockLayout layout(rows, cols, BlockKind::array);
        layout.tile(0, 0, rows, cols, d, policy == BoundaryPolicy::shrink);
        return layout;
    }

    /// String layout: consecutive runs of `len` cells; shrink keeps the
    /// shorter trailing run as its own block.
    static BlockLayout string(std::size_t length, std::size_t len, BoundaryPolicy policy)
    {
        BlockLayout layout(1, length, BlockKind::string);
        for (std::size_t start = 0; start < length; start += len) {
            const std::size_t w = std::min(len, length - start);
            if (w < len && policy != BoundaryPolicy::shrink) {
                break;
            }
            layout.add({0, static_cast<std::uint32_t>(start), 1, static_cast<std::uint32_t>(w)});
        }
        return layout;
    }

    [[nodiscard]] BlockKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] const std::vector<BlockRect>& blocks() const noexcept { return rects_; }
    [[nodiscard]] std::size_t covered_cells() const noexcept { return covered_; }

    /// Block index owning cell (r, c), or -1 when the cell is not covered.
    [[nodiscard]] std::int32_t block_of(std::size_t r, std::size_t c) const noexcept { return owner_[r * cols_ + c]; }

    [[nodiscard]] BlockKey key(const BitMatrix& m, std::size_t block) const
    {
        const BlockRect& b = rects_[block];
        BlockKey k{kind_, static_cast<std::uint8_t>(b.height), static_cast<std::uint8_t>(b.width), 0};
        for (std::uint32_t r = 0; r < b.height; ++r) {
            for (std::uint32_t c = 0; c < b.width; ++c) {
                k.bits = (k.bits << 1) | static_cast<std::uint64_t>(m.at(b.row + r, b.col + c));
            }
        }
        return k;
    }

    /// Bit position inside the block key for cell (r, c) of that block.
    [[nodiscard]] std::uint64_t cell_mask(std::size_t block, std::size_t r, std::size_t c) const noexcept
    {
        const BlockRect& b = rects_[block];
        const std::size_t local = (r - b.row) * b.width + (c - b.col);
        return std::uint64_t{1} << (std::size_t{b.height} * b.width - 1 - local);
    }

private:
    BlockLayout(std::size_t rows, std::size_t cols, BlockKind kind)
        : rows_(rows), cols_(cols), kind_(kind), owner_(rows * cols, -1)
    {
    }

    void add(BlockRect b)
    {
        const auto index = static_cast<std::int32_t>(rects_.size());
        rects_.push_back(b);
        for (std::uint32_t r = 0; r < b.height; ++r) {
            for (std::uint32_t c = 0; c < b.width; ++c) {
                owner_[(b.row + r) * cols_ + b.col + c] = index;
            }
        }
        covered_ += std::size_t{b.height} * b.width;
    }

    void tile(std::size_t r0, std::size_t c0, std::size_t h, std::size_t w, std::size_t d, bool shrink)
    {
        const std::size_t s = std::min({d, h, w});
        if (s == 0) {
            return;
        }
        const std::size_t hm = h / s * s;
        const std::size_t wm = w / s * s;
        for (std::size_t r = 0; r < hm; r += s) {
            for (std::size_t c = 0; c < wm; c += s) {
                add({static_cast<std::uint32_t>(r0 + r), static_cast<std::uint32_t>(c0 + c),
                     static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s)});
            }
        }
        if (!shrink) {
            return;
        }
        tile(r0, c0 + wm, hm, w - wm, s, true);
        tile(r0 + hm, c0, h - hm, w, s, true);
    }

    std::size_t rows_;
    std::size_t cols_;
    BlockKind kind_;
    std::vector<BlockRect> rects_;
    std::vector<std::int32_t> owner_;
    std::size_t covered_ = 0;
};

// ---------------------------------------------------------------------------
// Block multisets
// ---------------------------------------------------------------------------

struct BlockMultiset {
    std::map<BlockKey, std::uint64_t> counts;
    std::size_t covered_cells = 0;
    std::size_t total_cells = 0;

    [[nodiscard]] double coverage() const noexcept
    {
        return total_cells == 0 ? 0.0 : static_cast<double>(covered_cells) / static_cast<double>(total_cells);
    }

    [[nodiscard]] std::uint64_t block_count() const noexcept
    {
        std::uint64_t n = 0;
        for (const auto& [k, c] : counts) {
            n += c;
        }
        return n;
    }

    void add(const BlockKey& key, std::uint64_t n = 1) { counts[key] += n; }

    /// Removes n copies of key; the key must be present with count >= n.
    void remove(const BlockKey& key, std::uint64_t n = 1)
    {
        auto it = counts.find(key);
        if (it == counts.end() || it->second < n) {
            throw Error("removing absent block " + key.describe() + " from multiset");
        }
        it->second -= n;
        if (it->second == 0) {
            counts.erase(it);
        }
    }
};

inline BlockMultiset collect(const BitMatrix& m, const BlockLayout& layout)
{
    BlockMultiset ms;
    ms.total_cells = m.size();
    ms.covered_cells = layout.covered_cells();
    for (std::size_t b = 0; b < layout.blocks().size(); ++b) {
        ms.add(layout.key(m, b));
    }
    return ms;
}

inline BlockLayout layout_for_string(std::size_t length, const EstimatorConfig& cfg, std::size_t block_len = 0)
{
    return BlockLayout::string(length, block_len ? block_len : cfg.string_block, cfg.boundary_for(BlockKind::string));
}

inline BlockLayout layout_for_matrix(std::size_t rows, std::size_t cols, const EstimatorConfig& cfg,
                                     std::size_t block_dim = 0)
{
    return BlockLayout::matrix(rows, cols, block_dim ? block_dim : cfg.array_block, cfg.boundary_for(BlockKind::array));
}

/// Partition of a binary string into non-overlapping blocks.
inline BlockMultiset decompose(std::string_view bits, const EstimatorConfig& cfg)
{
    auto m = BitMatrix::from_string(bits);
    return collect(m, layout_for_string(m.cols(), cfg));
}

/// Partition of a binary matrix into non-overlapping square blocks.
inline BlockMultiset decompose(const BitMatrix& matrix, const EstimatorConfig& cfg)
{
    return collect(matrix, layout_for_matrix(matrix.rows(), matrix.cols(), cfg));
}

// ---------------------------------------------------------------------------
// Estimators over (key, count) sequences
// ---------------------------------------------------------------------------

/// Shannon entropy of a block's cells times its cell count: the per-block
/// stand-in for CTM when no table value exists. Invariant under any
/// permutation of the block's cells.
inline double cell_entropy_bits(const BlockKey& key)
{
    const std::size_t n = key.cells();
    const std::size_t ones = static_cast<std::size_t>(std::popcount(key.bits));
    if (ones == 0 || ones == n) {
        return 0.0;
    }
    const double p = static_cast<double>(ones) / static_cast<double>(n);
    const double h = -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
    return static_cast<double>(n) * h;
}

inline double block_value(const BlockKey& key, const EstimatorConfig& cfg)
{
    if (const CtmTable* table = cfg.table_for(key.kind)) {
        if (auto v = table->find(key)) {
            return *v;
        }
    }
    if (cfg.fallback_for(key.kind) == Fallback::entropy) {
        return cell_entropy_bits(key);
    }
    throw MissingBlock(key);
}

/// Accumulates an estimate from (key, count) pairs in fixed-point units of
/// 2^-32 bits. Integer accumulation makes the result independent of the
/// order in which pairs arrive, so full and incremental evaluation agree
/// exactly.
class EstimateAccumulator {
public:
    EstimateAccumulator(const EstimatorConfig& cfg, std::uint64_t total_blocks) : cfg_(cfg), total_(total_blocks) {}

    void add(const BlockKey& key, std::uint64_t n)
    {
        if (n == 0) {
            return;
        }
        if (cfg_.method == Method::bdm) {
            // log2(n) = e + log2(odd part of n); the integer part is exact.
            const int e = std::countr_zero(n);
            units_ += static_cast<std::int64_t>(e) * static_cast<std::int64_t>(value_scale);
            units_ += to_units(std::log2(static_cast<double>(n >> e)));
            units_ += to_units(block_value(key, cfg_));
        } else {
            const double count = static_cast<double>(n);
            units_ += to_units(count * std::log2(static_cast<double>(total_) / count));
        }
    }

    [[nodiscard]] double value() const noexcept { return static_cast<double>(units_) / value_scale; }

private:
    const EstimatorConfig& cfg_;
    std::uint64_t total_;
    std::int64_t units_ = 0;
};

inline double estimate(const BlockMultiset& ms, const EstimatorConfig& cfg)
{
    EstimateAccumulator acc(cfg, ms.block_count());
    for (const auto& [key, n] : ms.counts) {
        acc.add(key, n);
    }
    return acc.value();
}

/// Count change for one block key; negative removes copies.
struct BlockDelta {
    BlockKey key;
    std::int64_t change = 0;
};

/// Estimate of `ms` after applying `deltas`, without copying the multiset.
/// Deltas may repeat keys; they are merged first.
inline double estimate_with_delta(const BlockMultiset& ms, std::vector<BlockDelta> deltas, const EstimatorConfig& cfg)
{
    std::sort(deltas.begin(), deltas.end(), [](const BlockDelta& a, const BlockDelta& b) { return a.key < b.key; });
    std::vector<BlockDelta> merged;
    std::int64_t net = 0;
    for (const auto& d : deltas) {
        net += d.change;
        if (!merged.empty() && merged.back().key == d.key) {
            merged.back().change += d.change;
        } else {
            merged.push_back(d);
        }
    }

    const auto total = static_cast<std::uint64_t>(static_cast<std::int64_t>(ms.block_count()) + net);
    EstimateAccumulator acc(cfg, total);
    auto it = ms.counts.begin();
    std::size_t j = 0;
    auto adjusted = [](std::uint64_t base, std::int64_t change, const BlockKey& key) {
        const auto v = static_cast<std::int64_t>(base) + change;
        if (v < 0) {
            throw Error("block delta removes more copies of " + key.describe() + " than present");
        }
        return static_cast<std::uint64_t>(v);
    };
    while (it != ms.counts.end() || j < merged.size()) {
        if (j == merged.size() || (it != ms.counts.end() && it->first < merged[j].key)) {
            acc.add(it->first, it->second);
            ++it;
        } else if (it == ms.counts.end() || merged[j].key < it->first) {
            acc.add(merged[j].key, adjusted(0, merged[j].change, merged[j].key));
            ++j;
        } else {
            acc.add(it->first, adjusted(it->second, merged[j].change, it->first));
            ++it;
            ++j;
        }
    }
    return acc.value();
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

/// sum over distinct blocks of log2(n_u) + C(r_u).
inline double bdm(const BlockMultiset& ms, const EstimatorConfig& cfg)
{
    EstimatorConfig c = cfg;
    c.method = Method::bdm;
    return estimate(ms, c);
}

inline double bdm(std::string_view bits, const EstimatorConfig& cfg)
{
    cfg.validate();
    return bdm(decompose(bits, cfg), cfg);
}

inline double bdm(const BitMatrix& m, const EstimatorConfig& cfg)
{
    cfg.validate();
    return bdm(decompose(m, cfg), cfg);
}

/// Total block entropy: per-block Shannon entropy of the empirical block
/// distribution times the number of blocks.
inline double block_entropy(const BlockMultiset& ms)
{
    EstimatorConfig c;
    c.method = Method::block_entropy;
    return estimate(ms, c);
}

inline double block_entropy(std::string_view bits, std::size_t block_size,
                            BoundaryPolicy policy = BoundaryPolicy::shrink)
{
    if (block_size < 1) {
        throw Error("block size must be >= 1");
    }
    auto m = BitMatrix::from_string(bits);
    return block_entropy(collect(m, BlockLayout::string(m.cols(), block_size, policy)));
}

inline double block_entropy(const BitMatrix& m, std::size_t block_size,
                            BoundaryPolicy policy = BoundaryPolicy::shrink)
{
    if (block_size < 1) {
        throw Error("block size must be >= 1");
    }
    return block_entropy(collect(m, BlockLayout::matrix(m.rows(), m.cols(), block_size, policy)));
}

/// Single entry point used by the perturbation layer.
inline double complexity(std::string_view bits, const EstimatorConfig& cfg)
{
    cfg.validate();
    if (bits.empty()) {
        throw Error("cannot estimate the complexity of an empty string");
    }
    return estimate(decompose(bits, cfg), cfg);
}

inline double complexity(const BitMatrix& m, const EstimatorConfig& cfg)
{
    cfg.validate();
    if (m.empty()) {
        throw Error("cannot estimate the complexity of an empty matrix");
    }
    return estimate(decompose(m, cfg), cfg);
}

}  // namespace mils
