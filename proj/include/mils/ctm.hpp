#pragma once

// Coding Theorem Method tables: exhaustive enumeration of small 2-symbol
// Turing machines, output frequency distributions, and the resulting
// complexity tables C(s) = -log2(frequency of s among halting runs).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mils/matrix.hpp"
#include "mils/parallel.hpp"

namespace mils {

// ---------------------------------------------------------------------------
// Block keys
// ---------------------------------------------------------------------------

enum class BlockKind : std::uint8_t { string, array };

inline std::string_view to_string(BlockKind k) noexcept { return k == BlockKind::string ? "string" : "array"; }

/// A binary block of at most 64 cells: kind, dimensions and row-major bits.
/// The first cell is the most significant bit, so numeric order within one
/// shape equals lexicographic order of the bit strings.
struct BlockKey {
    BlockKind kind = BlockKind::string;
    std::uint8_t rows = 1;
    std::uint8_t cols = 0;
    std::uint64_t bits = 0;

    [[nodiscard]] std::size_t cells() const noexcept { return std::size_t{rows} * cols; }

    [[nodiscard]] bool cell(std::size_t i) const noexcept { return ((bits >> (cells() - 1 - i)) & 1U) != 0; }

    [[nodiscard]] std::string bit_string() const
    {
        std::string s(cells(), '0');
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (cell(i)) {
                s[i] = '1';
            }
        }
        return s;
    }

    [[nodiscard]] std::string dims() const
    {
        if (kind == BlockKind::string) {
            return std::to_string(cols);
        }
        return std::to_string(rows) + "x" + std::to_string(cols);
    }

    /// Human-readable form, e.g. "array:4x4:0110100110010110".
    [[nodiscard]] std::string describe() const
    {
        return std::string(to_string(kind)) + ":" + dims() + ":" + bit_string();
    }

    [[nodiscard]] BlockKey complement() const noexcept
    {
        BlockKey k = *this;
        const std::size_t n = cells();
        const std::uint64_t mask = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
        k.bits = ~bits & mask;
        return k;
    }

    static BlockKey string_key(std::string_view s)
    {
        if (s.empty() || s.size() > 64) {
            throw Error("string block length must be in [1, 64], got " + std::to_string(s.size()));
        }
        BlockKey k{BlockKind::string, 1, static_cast<std::uint8_t>(s.size()), 0};
        for (char c : s) {
            if (c != '0' && c != '1') {
                throw Error("invalid bit character '" + std::string(1, c) + "'");
            }
            k.bits = (k.bits << 1) | static_cast<std::uint64_t>(c - '0');
        }
        return k;
    }

    static BlockKey array_key(std::size_t rows, std::size_t cols, std::string_view s)
    {
        if (rows == 0 || cols == 0 || rows * cols > 64 || s.size() != rows * cols) {
            throw Error("array block " + std::to_string(rows) + "x" + std::to_string(cols) +
                        " needs 1..64 cells and a matching bit string");
        }
        BlockKey k = string_key(s);
        k.kind = BlockKind::array;
        k.rows = static_cast<std::uint8_t>(rows);
        k.cols = static_cast<std::uint8_t>(cols);
        return k;
    }

    friend auto operator<=>(const BlockKey&, const BlockKey&) = default;
};

struct BlockKeyHash {
    std::size_t operator()(const BlockKey& k) const noexcept
    {
        std::uint64_t h = k.bits * 0x9E3779B97F4A7C15ULL;
        h ^= (std::uint64_t{k.rows} << 48) ^ (std::uint64_t{k.cols} << 56) ^ (std::uint64_t{k.kind == BlockKind::array} << 40);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

/// Raised when a block has no entry in the configured table(s).
class MissingBlock : public Error {
public:
    explicit MissingBlock(const BlockKey& key)
        : Error("MissingBlock: no complexity value for block " + key.describe()), key_(key)
    {
    }
    [[nodiscard]] const BlockKey& key() const noexcept { return key_; }

private:
    BlockKey key_;
};

// ---------------------------------------------------------------------------
// Machines
// ---------------------------------------------------------------------------

/// n-state, 2-symbol machines in the busy-beaver formalism with a single
/// halting pseudo-state: every transition either writes, moves one cell and
/// enters one of the n states (4n choices) or writes and halts (2 choices).
struct MachineSpec {
    int states = 2;
    int symbols = 2;

    void validate() const
    {
        if (states < 1) {
            throw Error("machine spec needs states >= 1, got " + std::to_string(states));
        }
        if (symbols != 2) {
            throw Error("only 2-symbol machines are supported, got " + std::to_string(symbols));
        }
    }

    [[nodiscard]] std::uint64_t options_per_entry() const noexcept { return 4ULL * static_cast<std::uint64_t>(states) + 2; }
};

/// (4n+2)^(2n); throws on 64-bit overflow.
inline std::uint64_t count_machines(const MachineSpec& spec)
{
    spec.validate();
    const std::uint64_t base = spec.options_per_entry();
    const int entries = 2 * spec.states;
    std::uint64_t total = 1;
    for (int i = 0; i < entries; ++i) {
        if (total > std::numeric_limits<std::uint64_t>::max() / base) {
            throw Error("machine count for " + std::to_string(spec.states) + " states overflows 64 bits");
        }
        total *= base;
    }
    return total;
}

/// Which blank tapes every machine is started on. `both` also runs each
/// machine on the all-1 tape, which makes the distribution closed under
/// complementing outputs; it is computed as the 0-tape output plus its
/// complement, since the symbol-swapped machine set is the same set.
enum class BlankTapes { zero, both };

struct OutputDistribution {
    std::map<std::string, std::uint64_t> counts;  ///< output string -> occurrences
    std::uint64_t machines = 0;                    ///< census of machines enumerated
    std::uint64_t runs = 0;                        ///< machines x blank tapes
    std::uint64_t halting = 0;                     ///< halting runs == sum of counts
    int max_steps = 0;
    int longest_halting_runtime = 0;
    std::vector<std::uint64_t> halting_by_runtime;  ///< index = steps taken (halting step included)
    MachineSpec spec;
    BlankTapes blanks = BlankTapes::both;
};

namespace detail {

struct Transition {
    std::uint8_t write;
    std::int8_t move;  // -1, +1, or 0 when halting
    std::int16_t next;  // -1 = halt
};

inline Transition decode_option(std::uint64_t option, int states)
{
    const auto moving = static_cast<std::uint64_t>(4 * states);
    if (option < moving) {
        const auto write = static_cast<std::uint8_t>(option / (2ULL * states));
        const std::uint64_t rest = option % (2ULL * states);
        const auto move = static_cast<std::int8_t>(rest / states == 0 ? -1 : 1);
        return {write, move, static_cast<std::int16_t>(rest % states)};
    }
    return {static_cast<std::uint8_t>(option - moving), 0, -1};
}

struct LocalTally {
    std::unordered_map<std::string, std::uint64_t> counts;
    std::uint64_t halting = 0;
    std::vector<std::uint64_t> by_runtime;
};

// Simulates machines [begin, end) from the blank-0 tape.
inline void simulate_range(const MachineSpec& spec, int max_steps, std::uint64_t begin, std::uint64_t end,
                           LocalTally& tally)
{
    const int entries = 2 * spec.states;
    const std::uint64_t base = spec.options_per_entry();
    std::vector<Transition> table(static_cast<std::size_t>(entries));
    const std::size_t tape_size = 2 * static_cast<std::size_t>(max_steps) + 3;
    std::vector<std::uint8_t> tape(tape_size);
    tally.by_runtime.assign(static_cast<std::size_t>(max_steps) + 1, 0);

    for (std::uint64_t index = begin; index < end; ++index) {
        std::uint64_t digits = index;
        for (int e = 0; e < entries; ++e) {
            table[static_cast<std::size_t>(e)] = decode_option(digits % base, spec.states);
            digits /= base;
        }
        std::fill(tape.begin(), tape.end(), 0);
        std::size_t head = tape_size / 2;
        std::size_t lo = head;
        std::size_t hi = head;
        int state = 0;
        for (int step = 1; step <= max_steps; ++step) {
            const Transition& t = table[static_cast<std::size_t>(2 * state + tape[head])];
            tape[head] = t.write;
            if (t.next < 0) {
                std::string out(hi - lo + 1, '0');
                for (std::size_t p = lo; p <= hi; ++p) {
                    out[p - lo] = tape[p] ? '1' : '0';
                }
                tally.counts[out] += 1;
                ++tally.halting;
                ++tally.by_runtime[static_cast<std::size_t>(step)];
                break;
            }
            head = t.move < 0 ? head - 1 : head + 1;
            lo = std::min(lo, head);
            hi = std::max(hi, head);
            state = t.next;
        }
    }
}

inline std::string complement_bits(const std::string& s)
{
    std::string out(s);
    for (auto& c : out) {
        c = c == '0' ? '1' : '0';
    }
    return out;
}

}  // namespace detail

/// Runs every machine of `spec` for at most `max_steps` steps and records the
/// visited tape segment of each halting run. Output is independent of
/// `workers`: per-chunk tallies are merged into an ordered map.
inline OutputDistribution enumerate_machines(const MachineSpec& spec, int max_steps,
                                             BlankTapes blanks = BlankTapes::both, std::size_t workers = 1)
{
    spec.validate();
    if (max_steps < 1) {
        throw Error("max_steps must be >= 1");
    }
    const std::uint64_t total = count_machines(spec);

    // Fixed chunking (not tied to worker count) so the merge order is stable.
    constexpr std::uint64_t chunk = 1 << 16;
    const std::uint64_t chunks = (total + chunk - 1) / chunk;
    std::vector<detail::LocalTally> tallies(static_cast<std::size_t>(chunks));
    parallel_for(static_cast<std::size_t>(chunks), workers, [&](std::size_t c) {
        const std::uint64_t begin = c * chunk;
        detail::simulate_range(spec, max_steps, begin, std::min(total, begin + chunk), tallies[c]);
    });

    OutputDistribution dist;
    dist.spec = spec;
    dist.blanks = blanks;
    dist.machines = total;
    dist.max_steps = max_steps;
    const std::uint64_t tapes = blanks == BlankTapes::both ? 2 : 1;
    dist.runs = total * tapes;
    dist.halting_by_runtime.assign(static_cast<std::size_t>(max_steps) + 1, 0);
    for (auto& t : tallies) {
        for (auto& [s, n] : t.counts) {
            dist.counts[s] += n;
            if (blanks == BlankTapes::both) {
                dist.counts[detail::complement_bits(s)] += n;
            }
        }
        dist.halting += t.halting * tapes;
        for (std::size_t k = 0; k < t.by_runtime.size(); ++k) {
            dist.halting_by_runtime[k] += t.by_runtime[k] * tapes;
        }
    }
    for (std::size_t k = dist.halting_by_runtime.size(); k-- > 0;) {
        if (dist.halting_by_runtime[k] > 0) {
            dist.longest_halting_runtime = static_cast<int>(k);
            break;
        }
    }
    return dist;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

/// All estimator quantities live on a fixed grid of 2^-32 bits. Sums of grid
/// values are then exact and independent of evaluation order, so equal block
/// multisets give identical estimates and doubling a multiplicity adds
/// exactly one bit. The resolution is far below any meaningful difference
/// between table values.
inline constexpr double value_scale = 4294967296.0;  // 2^32 units per bit

inline std::int64_t to_units(double bits) { return std::llround(bits * value_scale); }

inline double quantize_bits(double bits) { return static_cast<double>(to_units(bits)) / value_scale; }

class CtmTable {
public:
    CtmTable() = default;
    explicit CtmTable(BlockKind kind, std::string provenance = {}) : kind_(kind), provenance_(std::move(provenance)) {}

    [[nodiscard]] BlockKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::string& provenance() const noexcept { return provenance_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }

    /// Largest string length (kind=string) or square side (kind=array) present.
    [[nodiscard]] std::size_t max_dimension() const noexcept { return max_dim_; }

    /// Stores `value` rounded to the 2^-32-bit grid.
    void insert(const BlockKey& key, double value)
    {
        if (key.kind != kind_) {
            throw Error("block " + key.describe() + " does not match table kind " + std::string(to_string(kind_)));
        }
        if (key.kind == BlockKind::array && key.rows != key.cols) {
            throw Error("array table entries must be square, got " + key.dims());
        }
        if (!std::isfinite(value) || value < 0.0) {
            throw Error("table value for " + key.describe() + " must be finite and >= 0");
        }
        if (!values_.emplace(key, quantize_bits(value)).second) {
            throw Error("duplicate table key " + key.describe());
        }
        max_dim_ = std::max<std::size_t>(max_dim_, key.cols);
        ++per_dim_[key.cols];
    }

    [[nodiscard]] std::optional<double> find(const BlockKey& key) const
    {
        auto it = values_.find(key);
        if (it == values_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    /// Exact stored value; never interpolates.
    [[nodiscard]] double lookup(const BlockKey& key) const
    {
        if (auto v = find(key)) {
            return *v;
        }
        throw MissingBlock(key);
    }

    /// True when every block of side/length `dim` has an entry.
    [[nodiscard]] bool complete_for(std::size_t dim) const
    {
        auto it = per_dim_.find(dim);
        const std::size_t cells = kind_ == BlockKind::string ? dim : dim * dim;
        if (it == per_dim_.end() || cells >= 64) {
            return false;
        }
        return it->second == (std::size_t{1} << cells);
    }

    /// Entries sorted by key.
    [[nodiscard]] std::vector<std::pair<BlockKey, double>> sorted_entries() const
    {
        std::vector<std::pair<BlockKey, double>> out(values_.begin(), values_.end());
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            return std::tie(a.first.rows, a.first.cols, a.first.bits) < std::tie(b.first.rows, b.first.cols, b.first.bits);
        });
        return out;
    }

    friend bool operator==(const CtmTable& a, const CtmTable& b)
    {
        return a.kind_ == b.kind_ && a.values_ == b.values_;
    }

private:
    BlockKind kind_ = BlockKind::string;
    std::string provenance_;
    std::unordered_map<BlockKey, double, BlockKeyHash> values_;
    std::map<std::size_t, std::size_t> per_dim_;
    std::size_t max_dim_ = 0;
};

/// value(s) = -log2(count(s) / halting runs). Outputs longer than 64 cells
/// cannot be table keys and are skipped (they still count in the total).
inline CtmTable build_ctm_table(const OutputDistribution& dist)
{
    if (dist.counts.empty() || dist.halting == 0) {
        throw Error("cannot build a CTM table from an empty output distribution");
    }
    std::string provenance = "enumeration states=" + std::to_string(dist.spec.states) +
                             " max_steps=" + std::to_string(dist.max_steps) +
                             " blanks=" + (dist.blanks == BlankTapes::both ? "both" : "zero");
    CtmTable table(BlockKind::string, std::move(provenance));
    const auto total = static_cast<double>(dist.halting);
    for (const auto& [s, n] : dist.counts) {
        if (s.size() > 64) {
            continue;
        }
        table.insert(BlockKey::string_key(s), -std::log2(static_cast<double>(n) / total));
    }
    return table;
}

// ---------------------------------------------------------------------------
// CSV persistence: header `kind,dims,bits,value`
// ---------------------------------------------------------------------------

/// Error raised for malformed table files; carries the 1-based line number.
class TableParseError : public Error {
public:
    TableParseError(const std::string& origin, std::size_t line, const std::string& what)
        : Error(origin + ":" + std::to_string(line) + ": " + what), line_(line)
    {
    }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

namespace detail {

inline std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace detail

inline CtmTable parse_ctm_table(std::istream& in, const std::string& origin = "<table>")
{
    // Lines starting with '#' are comments; those before the header form the
    // table's provenance.
    std::string line;
    std::size_t lineno = 0;
    std::string provenance;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.starts_with('#')) {
            std::string_view text = std::string_view(line).substr(1);
            while (text.starts_with(' ')) {
                text.remove_prefix(1);
            }
            provenance += provenance.empty() ? "" : "; ";
            provenance += text;
            continue;
        }
        have_header = true;
        break;
    }
    if (!have_header) {
        throw TableParseError(origin, std::max<std::size_t>(lineno, 1), "empty file, expected header kind,dims,bits,value");
    }
    if (line != "kind,dims,bits,value") {
        throw TableParseError(origin, lineno, "bad header '" + line + "', expected kind,dims,bits,value");
    }

    std::optional<CtmTable> table;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.starts_with('#')) {
            continue;
        }
        auto f = detail::split_csv(line);
        if (f.size() != 4) {
            throw TableParseError(origin, lineno, "expected 4 fields, got " + std::to_string(f.size()));
        }
        BlockKind kind{};
        if (f[0] == "string") {
            kind = BlockKind::string;
        } else if (f[0] == "array") {
            kind = BlockKind::array;
        } else {
            throw TableParseError(origin, lineno, "unknown kind '" + std::string(f[0]) + "'");
        }
        if (!table) {
            table.emplace(kind, provenance.empty() ? "file " + origin : provenance);
        } else if (table->kind() != kind) {
            throw TableParseError(origin, lineno, "mixed kinds in one table file");
        }

        double value = 0.0;
        auto [vptr, vec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), value);
        if (vec != std::errc{} || vptr != f[3].data() + f[3].size()) {
            throw TableParseError(origin, lineno, "bad value '" + std::string(f[3]) + "'");
        }

        BlockKey key;
        try {
            if (kind == BlockKind::string) {
                std::size_t len = 0;
                if (!detail::parse_int(f[1], len)) {
                    throw Error("bad dims '" + std::string(f[1]) + "'");
                }
                if (len != f[2].size()) {
                    throw Error("dims " + std::to_string(len) + " does not match " + std::to_string(f[2].size()) +
                                " bits");
                }
                key = BlockKey::string_key(f[2]);
            } else {
                const std::size_t x = f[1].find('x');
                std::size_t r = 0;
                std::size_t c = 0;
                if (x == std::string_view::npos || !detail::parse_int(f[1].substr(0, x), r) ||
                    !detail::parse_int(f[1].substr(x + 1), c)) {
                    throw Error("bad dims '" + std::string(f[1]) + "', expected RxC");
                }
                key = BlockKey::array_key(r, c, f[2]);
            }
            table->insert(key, value);
        } catch (const TableParseError&) {
            throw;
        } catch (const Error& e) {
            throw TableParseError(origin, lineno, e.what());
        }
    }
    if (!table) {
        throw TableParseError(origin, lineno, "table has no entries");
    }
    return std::move(*table);
}

inline CtmTable load_ctm_table(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open table file " + path);
    }
    return parse_ctm_table(in, path);
}

inline void write_ctm_table(const CtmTable& table, std::ostream& out)
{
    if (!table.provenance().empty()) {
        out << "# " << table.provenance() << '\n';
    }
    out << "kind,dims,bits,value\n";
    for (const auto& [key, value] : table.sorted_entries()) {
        out << to_string(key.kind) << ',' << key.dims() << ',' << key.bit_string() << ','
            << detail::format_double(value) << '\n';
    }
}

inline void save_ctm_table(const CtmTable& table, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write table file " + path);
    }
    write_ctm_table(table, out);
}

}  // namespace mils
