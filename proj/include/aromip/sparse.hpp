#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace aromip {

// Coordinate-format sparse matrix, compressed to sorted row-major form on
// first read access. Duplicate entries are summed during compression.
class SparseMatrix {
public:
    struct Entry {
        int index = 0;
        double value = 0.0;
    };

    SparseMatrix() = default;
    SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    void resize(int rows, int cols) {
        assert(rows >= rows_ && cols >= cols_);
        rows_ = rows;
        cols_ = cols;
    }

    void add(int row, int col, double value) {
        assert(row >= 0 && row < rows_ && col >= 0 && col < cols_);
        if (value == 0.0) return;
        trip_rows_.push_back(row);
        trip_cols_.push_back(col);
        trip_vals_.push_back(value);
        dirty_ = true;
    }

    std::size_t nnz() const {
        compress();
        return entries_.size();
    }

    const std::vector<Entry>& row_entries(int r, std::size_t& begin, std::size_t& end) const {
        compress();
        begin = row_start_[static_cast<std::size_t>(r)];
        end = row_start_[static_cast<std::size_t>(r) + 1];
        return entries_;
    }

    // Iterates row r in column order.
    template <typename Fn>
    void for_row(int r, Fn&& fn) const {
        std::size_t b, e;
        const auto& ents = row_entries(r, b, e);
        for (std::size_t k = b; k < e; ++k) fn(ents[k].index, ents[k].value);
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        compress();
        for (int r = 0; r < rows_; ++r) {
            std::size_t b = row_start_[static_cast<std::size_t>(r)];
            std::size_t e = row_start_[static_cast<std::size_t>(r) + 1];
            for (std::size_t k = b; k < e; ++k) fn(r, entries_[k].index, entries_[k].value);
        }
    }

    SparseMatrix transposed() const {
        SparseMatrix t(cols_, rows_);
        for_each([&](int r, int c, double v) { t.add(c, r, v); });
        t.compress();
        return t;
    }

    // y = A x
    void multiply(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(static_cast<std::size_t>(rows_), 0.0);
        for_each([&](int r, int c, double v) {
            y[static_cast<std::size_t>(r)] += v * x[static_cast<std::size_t>(c)];
        });
    }

    double row_dot(int r, const std::vector<double>& x) const {
        double s = 0.0;
        for_row(r, [&](int c, double v) { s += v * x[static_cast<std::size_t>(c)]; });
        return s;
    }

    void compress() const {
        if (!dirty_) {
            if (row_start_.empty()) row_start_.assign(static_cast<std::size_t>(rows_) + 1, 0);
            return;
        }
        const std::size_t nt = trip_vals_.size();
        std::vector<std::size_t> count(static_cast<std::size_t>(rows_) + 1, 0);
        for (std::size_t k = 0; k < nt; ++k) count[static_cast<std::size_t>(trip_rows_[k]) + 1]++;
        for (int r = 0; r < rows_; ++r) count[static_cast<std::size_t>(r) + 1] += count[static_cast<std::size_t>(r)];
        std::vector<Entry> tmp(nt);
        {
            std::vector<std::size_t> next(count.begin(), count.end() - 1);
            for (std::size_t k = 0; k < nt; ++k) {
                std::size_t pos = next[static_cast<std::size_t>(trip_rows_[k])]++;
                tmp[pos] = Entry{trip_cols_[k], trip_vals_[k]};
            }
        }
        // sort each row by column with an insertion sort (rows are short), then merge duplicates
        entries_.clear();
        row_start_.assign(static_cast<std::size_t>(rows_) + 1, 0);
        for (int r = 0; r < rows_; ++r) {
            std::size_t b = count[static_cast<std::size_t>(r)], e = count[static_cast<std::size_t>(r) + 1];
            for (std::size_t i = b + 1; i < e; ++i) {
                Entry key = tmp[i];
                std::size_t j = i;
                while (j > b && tmp[j - 1].index > key.index) {
                    tmp[j] = tmp[j - 1];
                    --j;
                }
                tmp[j] = key;
            }
            const std::size_t row_begin = entries_.size();
            for (std::size_t i = b; i < e; ++i) {
                if (entries_.size() > row_begin && entries_.back().index == tmp[i].index) {
                    entries_.back().value += tmp[i].value;
                } else {
                    entries_.push_back(tmp[i]);
                }
            }
            row_start_[static_cast<std::size_t>(r) + 1] = entries_.size();
        }
        dirty_ = false;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> trip_rows_, trip_cols_;
    std::vector<double> trip_vals_;
    mutable bool dirty_ = false;
    mutable std::vector<Entry> entries_;
    mutable std::vector<std::size_t> row_start_;
};

}  // namespace aromip
