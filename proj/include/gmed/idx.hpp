#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gmed/matrix.hpp"

namespace gmed {

// A loaded set of examples: row-major features in [0,1], one label per row.
// source_index keeps the position in the originating file so subsampled
// streams stay traceable.
struct Dataset {
    Mat<float> x;
    std::vector<int> y;
    std::vector<int> source_index;

    std::size_t size() const { return x.rows; }
};

struct IdxError : std::runtime_error {
    enum class Kind { BadMagic, Truncated, CountMismatch, Io };
    Kind kind;
    IdxError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Reads a big-endian IDX image/label file pair. Pixels are normalized by /255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace gmed
