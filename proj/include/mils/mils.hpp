#pragma once

// Perturbation calculus and Minimal Information Loss Sparsification.
//
// An object exposes a universe of removable elements, a removal operation,
// and its block decomposition. The information contribution of an element is
// C(object) - C(object without element) under the configured estimator.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mils/bdm.hpp"
#include "mils/graph.hpp"
#include "mils/parallel.hpp"

namespace mils {

using ElementId = std::uint32_t;

/// An object MILS can reduce: current elements in ascending id order, a
/// removal closure, and the block multiset its serialization decomposes into.
template <class T>
concept MaskableObject = requires(const T& obj, std::span<const ElementId> ids, const EstimatorConfig& cfg) {
    { obj.elements() } -> std::convertible_to<std::vector<ElementId>>;
    { obj.without(ids) } -> std::convertible_to<T>;
    { obj.blocks(cfg) } -> std::convertible_to<BlockMultiset>;
};

/// Objects that can describe each element's removal as a change to a few
/// blocks. deltas[i] belongs to elements()[i].
template <class T>
concept IncrementalObject = MaskableObject<T> && requires(const T& obj, const EstimatorConfig& cfg) {
    { obj.removal_deltas(cfg) } -> std::convertible_to<std::vector<std::vector<BlockDelta>>>;
};

template <MaskableObject T>
double object_complexity(const T& obj, const EstimatorConfig& cfg)
{
    return estimate(obj.blocks(cfg), cfg);
}

// ---------------------------------------------------------------------------
// Graph adapters
// ---------------------------------------------------------------------------

/// A graph with some of its edges deleted. Elements are edge ids of the
/// original graph; the node set (and so the adjacency shape) never changes.
class EdgeSubgraph {
public:
    explicit EdgeSubgraph(Graph g)
        : base_(std::make_shared<const Graph>(std::move(g))), alive_(base_->edge_count(), true)
    {
    }

    [[nodiscard]] const Graph& original() const noexcept { return *base_; }
    [[nodiscard]] const std::vector<bool>& alive() const noexcept { return alive_; }

    [[nodiscard]] std::vector<ElementId> elements() const
    {
        std::vector<ElementId> ids;
        for (std::size_t i = 0; i < alive_.size(); ++i) {
            if (alive_[i]) {
                ids.push_back(static_cast<ElementId>(i));
            }
        }
        return ids;
    }

    [[nodiscard]] std::size_t size() const
    {
        return static_cast<std::size_t>(std::count(alive_.begin(), alive_.end(), true));
    }

    [[nodiscard]] EdgeSubgraph without(std::span<const ElementId> ids) const
    {
        EdgeSubgraph out = *this;
        for (ElementId id : ids) {
            if (id >= alive_.size() || !alive_[id]) {
                throw Error("edge " + std::to_string(id) + " is not present");
            }
            out.alive_[id] = false;
        }
        return out;
    }

    [[nodiscard]] Graph graph() const { return base_->edge_subgraph(alive_); }

    [[nodiscard]] BitMatrix serialize() const
    {
        BitMatrix a(base_->node_count(), base_->node_count());
        for (std::size_t i = 0; i < alive_.size(); ++i) {
            if (alive_[i]) {
                set_edge(a, base_->edges()[i], true);
            }
        }
        return a;
    }

    [[nodiscard]] BlockMultiset blocks(const EstimatorConfig& cfg) const { return decompose(serialize(), cfg); }

    [[nodiscard]] std::vector<std::vector<BlockDelta>> removal_deltas(const EstimatorConfig& cfg) const
    {
        const BitMatrix a = serialize();
        const auto layout = layout_for_matrix(a.rows(), a.cols(), cfg);
        std::vector<std::vector<BlockDelta>> out;
        for (std::size_t i = 0; i < alive_.size(); ++i) {
            if (!alive_[i]) {
                continue;
            }
            const Edge& e = base_->edges()[i];
            std::vector<std::pair<std::size_t, std::size_t>> cells{{e.u, e.v}};
            if (!base_->directed()) {
                cells.emplace_back(e.v, e.u);
            }
            // Group flipped cells by block so a block holding both gets one change.
            std::vector<std::pair<std::int32_t, std::uint64_t>> flips;
            for (auto [r, c] : cells) {
                const std::int32_t b = layout.block_of(r, c);
                if (b < 0) {
                    continue;
                }
                const std::uint64_t m = layout.cell_mask(static_cast<std::size_t>(b), r, c);
                auto it = std::find_if(flips.begin(), flips.end(), [b](const auto& f) { return f.first == b; });
                if (it == flips.end()) {
                    flips.emplace_back(b, m);
                } else {
                    it->second |= m;
                }
            }
            std::vector<BlockDelta> delta;
            for (auto [b, m] : flips) {
                BlockKey old_key = layout.key(a, static_cast<std::size_t>(b));
                BlockKey new_key = old_key;
                new_key.bits ^= m;
                delta.push_back({old_key, -1});
                delta.push_back({new_key, +1});
            }
            out.push_back(std::move(delta));
        }
        return out;
    }

private:
    void set_edge(BitMatrix& a, const Edge& e, bool v) const
    {
        a.set(e.u, e.v, v);
        if (!base_->directed()) {
            a.set(e.v, e.u, v);
        }
    }

    std::shared_ptr<const Graph> base_;
    std::vector<bool> alive_;
};

/// A graph with some nodes deleted; the adjacency matrix loses the
/// corresponding rows and columns.
class NodeSubgraph {
public:
    explicit NodeSubgraph(Graph g)
        : base_(std::make_shared<const Graph>(std::move(g))), alive_(base_->node_count(), true)
    {
    }

    [[nodiscard]] std::vector<ElementId> elements() const
    {
        std::vector<ElementId> ids;
        for (std::size_t i = 0; i < alive_.size(); ++i) {
            if (alive_[i]) {
                ids.push_back(static_cast<ElementId>(i));
            }
        }
        return ids;
    }

    [[nodiscard]] NodeSubgraph without(std::span<const ElementId> ids) const
    {
        NodeSubgraph out = *this;
        for (ElementId id : ids) {
            if (id >= alive_.size() || !alive_[id]) {
                throw Error("node " + std::to_string(id) + " is not present");
            }
            out.alive_[id] = false;
        }
        return out;
    }

    [[nodiscard]] BitMatrix serialize() const
    {
        const auto ids = elements();
        BitMatrix full = adjacency(*base_);
        BitMatrix a(ids.size(), ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (std::size_t j = 0; j < ids.size(); ++j) {
                a.set(i, j, full.at(ids[i], ids[j]));
            }
        }
        return a;
    }

    [[nodiscard]] BlockMultiset blocks(const EstimatorConfig& cfg) const
    {
        BitMatrix a = serialize();
        if (a.empty()) {
            return {};
        }
        return decompose(a, cfg);
    }

private:
    std::shared_ptr<const Graph> base_;
    std::vector<bool> alive_;
};

// ---------------------------------------------------------------------------
// Contributions and ranking
// ---------------------------------------------------------------------------

struct RankedElement {
    ElementId id = 0;
    double contribution = 0.0;  ///< bits; negative when removal adds information
    friend bool operator==(const RankedElement&, const RankedElement&) = default;
};

/// Sorted ascending by contribution, ties by id.
using InfoRanking = std::vector<RankedElement>;

/// I(X, e) = C(X) - C(X \ e), computed by re-estimating both objects.
template <MaskableObject T>
double info_contribution(const T& obj, ElementId element, const EstimatorConfig& cfg)
{
    const ElementId ids[] = {element};
    return object_complexity(obj, cfg) - object_complexity(obj.without(ids), cfg);
}

struct RankOptions {
    std::size_t workers = 1;
    /// Use the object's block deltas when it provides them. Both paths give
    /// bit-identical values; the full path exists as a check.
    bool incremental = true;
};

template <MaskableObject T>
InfoRanking info_rank(const T& obj, const EstimatorConfig& cfg, RankOptions opt = {})
{
    cfg.validate();
    const auto ids = obj.elements();
    if (ids.empty()) {
        throw Error("info_rank needs at least one element");
    }
    const BlockMultiset base = obj.blocks(cfg);
    const double total = estimate(base, cfg);
    InfoRanking ranking(ids.size());

    bool done = false;
    if constexpr (IncrementalObject<T>) {
        if (opt.incremental) {
            const auto deltas = obj.removal_deltas(cfg);
            parallel_for(ids.size(), opt.workers, [&](std::size_t i) {
                ranking[i] = {ids[i], total - estimate_with_delta(base, deltas[i], cfg)};
            });
            done = true;
        }
    }
    if (!done) {
        parallel_for(ids.size(), opt.workers, [&](std::size_t i) {
            const ElementId one[] = {ids[i]};
            ranking[i] = {ids[i], total - object_complexity(obj.without(one), cfg)};
        });
    }
    std::sort(ranking.begin(), ranking.end(), [](const RankedElement& a, const RankedElement& b) {
        return a.contribution != b.contribution ? a.contribution < b.contribution : a.id < b.id;
    });
    return ranking;
}

// ---------------------------------------------------------------------------
// Neutral elements
// ---------------------------------------------------------------------------

enum class Neutrality { min_loss, log_target };

struct NeutralityMode {
    Neutrality variant = Neutrality::min_loss;
    double epsilon = 0.0;  ///< tie tolerance in bits
};

/// min_loss: every element within epsilon of the smallest contribution.
/// log_target: every element whose distance to log2(universe_size) is
/// within epsilon of the smallest such distance.
inline std::vector<ElementId> neutral_elements(const InfoRanking& ranking, std::size_t universe_size,
                                               NeutralityMode mode = {})
{
    if (ranking.empty()) {
        throw Error("neutral_elements needs a non-empty ranking");
    }
    auto score = [&](double c) {
        if (mode.variant == Neutrality::min_loss) {
            return c;
        }
        return std::abs(c - std::log2(static_cast<double>(universe_size)));
    };
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : ranking) {
        best = std::min(best, score(r.contribution));
    }
    std::vector<ElementId> out;
    for (const auto& r : ranking) {
        if (score(r.contribution) <= best + mode.epsilon) {
            out.push_back(r.id);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// MILS
// ---------------------------------------------------------------------------

struct TraceStep {
    std::size_t step = 0;
    std::vector<ElementId> deleted;  ///< ascending
    double contribution_bits = 0.0;  ///< smallest contribution among the deleted
    friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

template <class T>
struct MilsResult {
    T reduced;
    std::vector<TraceStep> trace;
};

namespace detail {

inline void check_target(std::size_t target, std::size_t count)
{
    if (target > count) {
        throw Error("target size " + std::to_string(target) + " exceeds element count " + std::to_string(count));
    }
}

inline double contribution_of(const InfoRanking& ranking, ElementId id)
{
    for (const auto& r : ranking) {
        if (r.id == id) {
            return r.contribution;
        }
    }
    return 0.0;
}

}  // namespace detail

/// Repeatedly deletes every neutral element at once until at most
/// `target` elements remain. Simultaneous deletion may overshoot the target.
template <MaskableObject T>
MilsResult<T> mils(const T& obj, std::size_t target, const EstimatorConfig& cfg, NeutralityMode mode = {},
                   RankOptions opt = {})
{
    detail::check_target(target, obj.elements().size());
    MilsResult<T> result{obj, {}};
    std::size_t count = obj.elements().size();
    while (count > target) {
        const InfoRanking ranking = info_rank(result.reduced, cfg, opt);
        const auto chosen = neutral_elements(ranking, count, mode);
        double lowest = std::numeric_limits<double>::infinity();
        for (ElementId id : chosen) {
            lowest = std::min(lowest, detail::contribution_of(ranking, id));
        }
        result.reduced = result.reduced.without(chosen);
        result.trace.push_back({result.trace.size() + 1, chosen, lowest});
        count -= chosen.size();
    }
    return result;
}

/// One deletion per step: the smallest contribution, ties to the smallest id.
template <MaskableObject T>
MilsResult<T> mils_sequential(const T& obj, std::size_t target, const EstimatorConfig& cfg, RankOptions opt = {})
{
    detail::check_target(target, obj.elements().size());
    MilsResult<T> result{obj, {}};
    std::size_t count = obj.elements().size();
    while (count > target) {
        const InfoRanking ranking = info_rank(result.reduced, cfg, opt);
        const RankedElement first = ranking.front();  // sorted by (contribution, id)
        const ElementId one[] = {first.id};
        result.reduced = result.reduced.without(one);
        result.trace.push_back({result.trace.size() + 1, {first.id}, first.contribution});
        --count;
    }
    return result;
}

/// Exhaustive variant: each step removes the subset S (1 <= |S| <= count -
/// target) minimising C(X) - C(X \ S); ties go to the smaller subset, then
/// the lexicographically smaller id list. Exponential; limited to 12 elements.
template <MaskableObject T>
MilsResult<T> mils_subset_search(const T& obj, std::size_t target, const EstimatorConfig& cfg)
{
    const auto start = obj.elements();
    detail::check_target(target, start.size());
    if (start.size() > 12) {
        throw Error("subset search is limited to 12 elements, got " + std::to_string(start.size()));
    }
    MilsResult<T> result{obj, {}};
    while (true) {
        const auto ids = result.reduced.elements();
        if (ids.size() <= target) {
            break;
        }
        const double total = object_complexity(result.reduced, cfg);
        const std::size_t quota = ids.size() - target;
        double best = std::numeric_limits<double>::infinity();
        std::vector<ElementId> best_set;
        for (std::uint32_t mask = 1; mask < (1U << ids.size()); ++mask) {
            const auto k = static_cast<std::size_t>(std::popcount(mask));
            if (k > quota) {
                continue;
            }
            std::vector<ElementId> subset;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                if ((mask >> i) & 1U) {
                    subset.push_back(ids[i]);
                }
            }
            const double loss = total - object_complexity(result.reduced.without(subset), cfg);
            const bool better = loss < best ||
                                (loss == best && (subset.size() < best_set.size() ||
                                                  (subset.size() == best_set.size() && subset < best_set)));
            if (better) {
                best = loss;
                best_set = std::move(subset);
            }
        }
        result.reduced = result.reduced.without(best_set);
        result.trace.push_back({result.trace.size() + 1, best_set, best});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Trace serialization: [{"step":1,"deleted":[..],"contribution_bits":x}, ...]
// ---------------------------------------------------------------------------

inline nlohmann::json trace_to_json(const std::vector<TraceStep>& trace)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : trace) {
        arr.push_back({{"step", s.step}, {"deleted", s.deleted}, {"contribution_bits", s.contribution_bits}});
    }
    return arr;
}

inline std::vector<TraceStep> trace_from_json(const nlohmann::json& arr)
{
    std::vector<TraceStep> trace;
    for (const auto& s : arr) {
        trace.push_back({s.at("step").get<std::size_t>(), s.at("deleted").get<std::vector<ElementId>>(),
                         s.at("contribution_bits").get<double>()});
    }
    return trace;
}

}  // namespace mils
