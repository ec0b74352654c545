#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "gmed/matrix.hpp"

namespace gmed {

struct MemorySlot {
    std::vector<float> x;  // possibly edited
    int y = 0;
    int replay_count = 0;            // k: incremented once per edit-writeback
    std::vector<float> original_x;   // kept only when prediction-change tracking is on
};

// Fixed-capacity store populated by reservoir sampling. A single training
// loop owns the memory; slot indices returned by sample() stay valid until
// the next reservoir_update, so callers write back first.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity, bool keep_originals = false)
        : capacity_(capacity), keep_originals_(keep_originals) {}

    // Offers each example of the batch in stream order. Replaced slots start
    // over with replay_count 0.
    void reservoir_update(const Mat<float>& x, const std::vector<int>& y, std::mt19937_64& rng) {
        for (std::size_t i = 0; i < x.rows; ++i) {
            ++n_seen_;
            if (slots_.size() < capacity_) {
                slots_.push_back(make_slot(x.row(i), x.cols, y[i]));
            } else {
                std::uniform_int_distribution<std::uint64_t> d(0, n_seen_ - 1);
                const std::uint64_t j = d(rng);
                if (j < capacity_) slots_[std::size_t(j)] = make_slot(x.row(i), x.cols, y[i]);
            }
        }
    }

    // Uniform draw of n distinct slot indices.
    std::vector<std::size_t> sample(std::size_t n, std::mt19937_64& rng) const {
        if (n > slots_.size()) throw std::invalid_argument("sample larger than memory");
        std::vector<std::size_t> idx(slots_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < n; ++i) {
            std::uniform_int_distribution<std::size_t> d(i, idx.size() - 1);
            std::swap(idx[i], idx[d(rng)]);
        }
        idx.resize(n);
        return idx;
    }

    void writeback(std::size_t slot, const std::vector<float>& x_edited) {
        auto& s = slots_.at(slot);
        s.x = x_edited;
        ++s.replay_count;
    }

    std::size_t size() const { return slots_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t n_seen() const { return n_seen_; }
    bool keeps_originals() const { return keep_originals_; }
    const MemorySlot& slot(std::size_t i) const { return slots_.at(i); }
    MemorySlot& slot(std::size_t i) { return slots_.at(i); }

    void dump_csv(std::ostream& os) const {
        os << "slot,label,replay_count,pixels\n";
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            os << i << ',' << slots_[i].y << ',' << slots_[i].replay_count << ',';
            for (std::size_t j = 0; j < slots_[i].x.size(); ++j) {
                if (j) os << ';';
                os << slots_[i].x[j];
            }
            os << '\n';
        }
    }

private:
    MemorySlot make_slot(const float* x, std::size_t dim, int y) const {
        MemorySlot s;
        s.x.assign(x, x + dim);
        s.y = y;
        if (keep_originals_) s.original_x = s.x;
        return s;
    }

    std::size_t capacity_;
    bool keep_originals_;
    std::vector<MemorySlot> slots_;
    std::uint64_t n_seen_ = 0;
};

}  // namespace gmed
