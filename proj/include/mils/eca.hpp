#pragma once

// Elementary cellular automata and MILS coarse-graining of their space-time
// diagrams.

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mils/bdm.hpp"
#include "mils/mils.hpp"

namespace mils {

/// Radius-1 binary rule under Wolfram numbering: neighbourhood (l, c, r)
/// maps to bit 4l + 2c + r of the rule number.
struct EcaRule {
    int number = 0;
    std::array<std::uint8_t, 8> table{};

    [[nodiscard]] std::uint8_t apply(bool l, bool c, bool r) const noexcept
    {
        return table[(l ? 4 : 0) + (c ? 2 : 0) + (r ? 1 : 0)];
    }

    /// Outputs for neighbourhoods 111, 110, ..., 000.
    [[nodiscard]] std::array<std::uint8_t, 8> wolfram_outputs() const noexcept
    {
        std::array<std::uint8_t, 8> out{};
        for (int i = 0; i < 8; ++i) {
            out[static_cast<std::size_t>(i)] = table[static_cast<std::size_t>(7 - i)];
        }
        return out;
    }
};

inline EcaRule rule_table(int number)
{
    if (number < 0 || number > 255) {
        throw Error("ECA rule must be in [0, 255], got " + std::to_string(number));
    }
    EcaRule rule{number, {}};
    for (int i = 0; i < 8; ++i) {
        rule.table[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((number >> i) & 1);
    }
    return rule;
}

/// The rule obtained by swapping left and right neighbours.
inline int mirror_rule(int number)
{
    const EcaRule rule = rule_table(number);
    int out = 0;
    for (int l = 0; l < 2; ++l) {
        for (int c = 0; c < 2; ++c) {
            for (int r = 0; r < 2; ++r) {
                if (rule.apply(r != 0, c != 0, l != 0)) {
                    out |= 1 << (4 * l + 2 * c + r);
                }
            }
        }
    }
    return out;
}

/// Row of `width` zeros with a single 1 at index width / 2.
inline std::vector<std::uint8_t> single_cell_row(std::size_t width)
{
    std::vector<std::uint8_t> row(width, 0);
    if (width > 0) {
        row[width / 2] = 1;
    }
    return row;
}

/// Space-time diagram with steps + 1 rows; row 0 is the initial condition.
/// The boundary is cyclic.
inline BitMatrix evolve(const EcaRule& rule, const std::vector<std::uint8_t>& initial, std::size_t steps)
{
    const std::size_t w = initial.size();
    if (w < 3) {
        throw Error("ECA width must be at least 3, got " + std::to_string(w));
    }
    BitMatrix d(steps + 1, w);
    for (std::size_t c = 0; c < w; ++c) {
        d.set(0, c, initial[c] != 0);
    }
    for (std::size_t t = 1; t <= steps; ++t) {
        for (std::size_t c = 0; c < w; ++c) {
            d.set(t, c, rule.apply(d.at(t - 1, (c + w - 1) % w), d.at(t - 1, c), d.at(t - 1, (c + 1) % w)) != 0);
        }
    }
    return d;
}

// ---------------------------------------------------------------------------
// Region masking
// ---------------------------------------------------------------------------

/// A diagram cut into b x b regions, some of which are masked. Masked
/// regions' blocks are left out of the block multiset; the cost of
/// describing the mask itself is not charged. Regions are the elements,
/// numbered row-major over the region grid.
class MaskedDiagram {
public:
    MaskedDiagram(BitMatrix diagram, std::size_t region)
        : diagram_(std::make_shared<const BitMatrix>(std::move(diagram))), region_(region)
    {
        if (region == 0) {
            throw Error("region size must be positive");
        }
        auto check = [&](std::size_t extent, const char* what) {
            if (extent % region != 0) {
                const std::size_t down = extent / region * region;
                throw Error(std::string(what) + " " + std::to_string(extent) + " is not a multiple of region size " +
                            std::to_string(region) + "; crop to " + std::to_string(down) + " (or extend to " +
                            std::to_string(down + region) + ")");
            }
        };
        check(diagram_->rows(), "diagram height");
        check(diagram_->cols(), "diagram width");
        if (diagram_->empty()) {
            throw Error("diagram is empty");
        }
        grid_rows_ = diagram_->rows() / region;
        grid_cols_ = diagram_->cols() / region;
        masked_.assign(grid_rows_ * grid_cols_, false);
    }

    [[nodiscard]] const BitMatrix& diagram() const noexcept { return *diagram_; }
    [[nodiscard]] std::size_t region_size() const noexcept { return region_; }
    [[nodiscard]] std::size_t grid_rows() const noexcept { return grid_rows_; }
    [[nodiscard]] std::size_t grid_cols() const noexcept { return grid_cols_; }
    [[nodiscard]] std::size_t region_count() const noexcept { return masked_.size(); }
    [[nodiscard]] const std::vector<bool>& masked() const noexcept { return masked_; }

    [[nodiscard]] std::size_t masked_count() const
    {
        return static_cast<std::size_t>(std::count(masked_.begin(), masked_.end(), true));
    }

    [[nodiscard]] std::vector<ElementId> elements() const
    {
        std::vector<ElementId> ids;
        for (std::size_t i = 0; i < masked_.size(); ++i) {
            if (!masked_[i]) {
                ids.push_back(static_cast<ElementId>(i));
            }
        }
        return ids;
    }

    [[nodiscard]] MaskedDiagram without(std::span<const ElementId> ids) const
    {
        MaskedDiagram out = *this;
        for (ElementId id : ids) {
            if (id >= masked_.size() || masked_[id]) {
                throw Error("region " + std::to_string(id) + " is not unmasked");
            }
            out.masked_[id] = true;
        }
        return out;
    }

    [[nodiscard]] BlockMultiset blocks(const EstimatorConfig& cfg) const
    {
        const auto layout = region_layout(cfg);
        BlockMultiset ms;
        ms.total_cells = diagram_->size();
        for (std::size_t b = 0; b < layout.blocks().size(); ++b) {
            if (!masked_[region_of(layout.blocks()[b])]) {
                ms.add(layout.key(*diagram_, b));
                const auto& r = layout.blocks()[b];
                ms.covered_cells += std::size_t{r.height} * r.width;
            }
        }
        return ms;
    }

    [[nodiscard]] std::vector<std::vector<BlockDelta>> removal_deltas(const EstimatorConfig& cfg) const
    {
        const auto layout = region_layout(cfg);
        std::vector<std::vector<BlockDelta>> per_region(masked_.size());
        for (std::size_t b = 0; b < layout.blocks().size(); ++b) {
            const std::size_t region = region_of(layout.blocks()[b]);
            if (!masked_[region]) {
                per_region[region].push_back({layout.key(*diagram_, b), -1});
            }
        }
        std::vector<std::vector<BlockDelta>> out;
        for (std::size_t i = 0; i < masked_.size(); ++i) {
            if (!masked_[i]) {
                out.push_back(std::move(per_region[i]));
            }
        }
        return out;
    }

    /// Cell-level mask: 1 where the cell lies in a masked region.
    [[nodiscard]] BitMatrix cell_mask() const
    {
        BitMatrix m(diagram_->rows(), diagram_->cols());
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c) {
                m.set(r, c, masked_[(r / region_) * grid_cols_ + c / region_]);
            }
        }
        return m;
    }

    /// True when every cell of the region is 0.
    [[nodiscard]] bool region_is_zero(std::size_t id) const
    {
        const std::size_t r0 = id / grid_cols_ * region_;
        const std::size_t c0 = id % grid_cols_ * region_;
        for (std::size_t r = r0; r < r0 + region_; ++r) {
            for (std::size_t c = c0; c < c0 + region_; ++c) {
                if (diagram_->at(r, c)) {
                    return false;
                }
            }
        }
        return true;
    }

private:
    [[nodiscard]] BlockLayout region_layout(const EstimatorConfig& cfg) const
    {
        if (region_ % cfg.array_block != 0) {
            throw Error("region size " + std::to_string(region_) + " must be a multiple of the block dimension " +
                        std::to_string(cfg.array_block));
        }
        return BlockLayout::matrix(diagram_->rows(), diagram_->cols(), cfg.array_block, BoundaryPolicy::discard);
    }

    [[nodiscard]] std::size_t region_of(const BlockRect& r) const noexcept
    {
        return (r.row / region_) * grid_cols_ + r.col / region_;
    }

    std::shared_ptr<const BitMatrix> diagram_;
    std::size_t region_;
    std::size_t grid_rows_ = 0;
    std::size_t grid_cols_ = 0;
    std::vector<bool> masked_;
};

struct CoarseGrainResult {
    MaskedDiagram masked;
    InfoRanking ranking;  ///< region ranking of the unmasked diagram
    std::vector<TraceStep> trace;
};

/// Masks minimum-contribution regions (all tied regions at once, as in `mils`) until at
/// least ceil((1 - retain) * regions) are masked.
inline CoarseGrainResult coarse_grain(const BitMatrix& diagram, std::size_t region, double retain,
                                      const EstimatorConfig& cfg, NeutralityMode mode = {}, RankOptions opt = {})
{
    if (!(retain > 0.0 && retain <= 1.0)) {
        throw Error("retained fraction must be in (0, 1]");
    }
    cfg.validate();
    MaskedDiagram start(diagram, region);
    const std::size_t total = start.region_count();
    // Integer arithmetic on a 1e-9 grid keeps e.g. retain = 0.6 from rounding up.
    const auto masked_needed =
        static_cast<std::size_t>(std::ceil((1.0 - retain) * static_cast<double>(total) - 1e-9));
    InfoRanking ranking = info_rank(start, cfg, opt);
    auto res = mils::mils(start, total - masked_needed, cfg, mode, opt);
    return {std::move(res.reduced), std::move(ranking), std::move(res.trace)};
}

// ---------------------------------------------------------------------------
// PBM (portable bitmap) I/O, 1 = black
// ---------------------------------------------------------------------------

/// Plain (P1) PBM, one text row per matrix row.
inline void write_pbm(const BitMatrix& m, std::ostream& out, const std::string& comment = {})
{
    out << "P1\n";
    if (!comment.empty()) {
        out << "# " << comment << '\n';
    }
    out << m.cols() << ' ' << m.rows() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out << (m.at(r, c) ? '1' : '0');
        }
        out << '\n';
    }
}

/// Reads plain (P1) or raw (P4) PBM.
inline BitMatrix read_pbm(std::istream& in, const std::string& origin = "<pbm>")
{
    auto fail = [&](const std::string& what) { throw Error(origin + ": " + what); };
    auto skip = [&]() {
        for (;;) {
            const int ch = in.peek();
            if (ch == '#') {
                std::string line;
                std::getline(in, line);
            } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
                in.get();
            } else {
                return;
            }
        }
    };
    std::string magic(2, '\0');
    if (!in.read(magic.data(), 2) || (magic != "P1" && magic != "P4")) {
        fail("not a PBM file (expected P1 or P4)");
    }
    std::size_t w = 0;
    std::size_t h = 0;
    skip();
    in >> w;
    skip();
    in >> h;
    if (!in) {
        fail("bad PBM header");
    }
    BitMatrix m(h, w);
    if (magic == "P1") {
        for (std::size_t i = 0; i < w * h; ++i) {
            skip();
            const int ch = in.get();
            if (ch != '0' && ch != '1') {
                fail("bad pixel at index " + std::to_string(i));
            }
            m.set(i / w, i % w, ch == '1');
        }
    } else {
        in.get();  // single whitespace after the header
        const std::size_t stride = (w + 7) / 8;
        std::vector<char> row(stride);
        for (std::size_t r = 0; r < h; ++r) {
            if (!in.read(row.data(), static_cast<std::streamsize>(stride))) {
                fail("truncated raster");
            }
            for (std::size_t c = 0; c < w; ++c) {
                m.set(r, c, (static_cast<unsigned char>(row[c / 8]) >> (7 - c % 8)) & 1U);
            }
        }
    }
    return m;
}

}  // namespace mils
