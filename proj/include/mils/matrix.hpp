#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mils {

namespace detail {

template <class Int>
bool parse_int(std::string_view s, Int& out)
{
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major binary matrix. Strings are represented as 1 x n matrices.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), cells_(rows * cols, 0) {}

    static BitMatrix from_string(std::string_view bits)
    {
        BitMatrix m(1, bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] != '0' && bits[i] != '1') {
                throw Error("invalid bit character '" + std::string(1, bits[i]) + "'");
            }
            m.cells_[i] = static_cast<std::uint8_t>(bits[i] - '0');
        }
        return m;
    }

    /// Rows given as strings of '0'/'1' of equal length.
    static BitMatrix from_rows(const std::vector<std::string>& rows)
    {
        if (rows.empty()) {
            return {};
        }
        BitMatrix m(rows.size(), rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != m.cols_) {
                throw Error("ragged matrix: row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                            " cells, expected " + std::to_string(m.cols_));
            }
            for (std::size_t c = 0; c < m.cols_; ++c) {
                char ch = rows[r][c];
                if (ch != '0' && ch != '1') {
                    throw Error("invalid bit character '" + std::string(1, ch) + "' in row " + std::to_string(r));
                }
                m.set(r, c, ch == '1');
            }
        }
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return cells_.size(); }
    [[nodiscard]] bool empty() const noexcept { return cells_.empty(); }

    [[nodiscard]] bool at(std::size_t r, std::size_t c) const noexcept { return cells_[r * cols_ + c] != 0; }
    void set(std::size_t r, std::size_t c, bool v) noexcept { cells_[r * cols_ + c] = v ? 1 : 0; }
    void flip(std::size_t r, std::size_t c) noexcept { cells_[r * cols_ + c] ^= 1; }

    [[nodiscard]] std::size_t popcount() const noexcept
    {
        std::size_t n = 0;
        for (auto v : cells_) {
            n += v;
        }
        return n;
    }

    [[nodiscard]] std::string to_string() const
    {
        std::string s;
        s.reserve(cells_.size());
        for (auto v : cells_) {
            s.push_back(v ? '1' : '0');
        }
        return s;
    }

    [[nodiscard]] const std::vector<std::uint8_t>& cells() const noexcept { return cells_; }

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::uint8_t> cells_;
};

}  // namespace mils
