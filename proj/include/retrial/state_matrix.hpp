#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace retrial {

/// Dense (m+1) x width matrix indexed by (busy servers i, orbit size j).
/// The orbit dimension grows on demand; cells beyond `width()` read as zero.
template <class T>
class StateMatrix {
public:
    StateMatrix() = default;
    StateMatrix(int servers, std::size_t width = 1)
        : rows_(static_cast<std::size_t>(servers) + 1), width_(std::max<std::size_t>(width, 1)),
          cells_(rows_ * width_, T{}) {
        if (servers < 1) throw std::invalid_argument("server count must be >= 1");
    }

    int servers() const { return static_cast<int>(rows_) - 1; }
    std::size_t width() const { return width_; }

    T at(int i, long j) const {
        if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= rows_ ||
            static_cast<std::size_t>(j) >= width_) {
            return T{};
        }
        return cells_[index(i, static_cast<std::size_t>(j))];
    }

    T& ref(int i, std::size_t j) {
        if (i < 0 || static_cast<std::size_t>(i) >= rows_) {
            throw std::out_of_range("server index out of range");
        }
        if (j >= width_) grow(j + 1);
        return cells_[index(i, j)];
    }

    /// Geometric growth of the orbit dimension.
    void grow(std::size_t min_width) {
        if (min_width <= width_) return;
        std::size_t next = std::max(min_width, width_ * 2);
        resize_width(next);
    }

    /// Exact resize (may truncate).
    void resize_width(std::size_t next) {
        next = std::max<std::size_t>(next, 1);
        std::vector<T> cells(rows_ * next, T{});
        const std::size_t keep = std::min(width_, next);
        for (std::size_t i = 0; i < rows_; ++i) {
            std::copy_n(cells_.begin() + static_cast<std::ptrdiff_t>(i * width_), keep,
                        cells.begin() + static_cast<std::ptrdiff_t>(i * next));
        }
        cells_ = std::move(cells);
        width_ = next;
    }

    /// Largest j holding a nonzero cell, or -1 when all cells are zero.
    long last_nonzero_column() const {
        for (std::size_t j = width_; j-- > 0;) {
            for (std::size_t i = 0; i < rows_; ++i) {
                if (cells_[index(static_cast<int>(i), j)] != T{}) return static_cast<long>(j);
            }
        }
        return -1;
    }

    T sum() const {
        T total{};
        for (const T& c : cells_) total += c;
        return total;
    }

    void add(const StateMatrix& other) {
        if (other.rows_ != rows_) throw std::invalid_argument("server count mismatch");
        grow(other.width_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < other.width_; ++j) {
                cells_[index(static_cast<int>(i), j)] += other.cells_[other.index(static_cast<int>(i), j)];
            }
        }
    }

private:
    std::size_t index(int i, std::size_t j) const { return static_cast<std::size_t>(i) * width_ + j; }

    std::size_t rows_ = 0;
    std::size_t width_ = 0;
    std::vector<T> cells_;
};

}  // namespace retrial
