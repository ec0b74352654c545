#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gmed/idx.hpp"
#include "gmed/matrix.hpp"

namespace gmed {

enum class StreamKind { Split, Permuted, Rotated };

// Whether the stream is visited in task order, globally shuffled, or
// shuffled and repeated for several offline epochs.
enum class RunMode { Sequential, IidOnline, IidOffline };

struct StreamConfig {
    StreamKind kind = StreamKind::Split;
    RunMode mode = RunMode::Sequential;
    int n_tasks = 0;  // 0 picks the benchmark default (5 / 10 / 20)
    int examples_per_task = 1000;
    int batch_size = 10;
    bool fuzzy = false;
    double fuzzy_start_frac = 0.5;
    std::uint64_t seed = 0;
    int offline_epochs = 5;
    int test_per_task_cap = 0;    // 0 = full test set; Rotated defaults to 1000
    double validation_frac = 0.05;
};

// The non-stationary labeled stream plus the evaluation side-tables.
// latent_task is bookkeeping for evaluation only; learners see (x, y).
struct TaskStream {
    Mat<float> x;
    std::vector<int> y;
    std::vector<int> latent_task;
    int n_tasks = 0;
    int batch_size = 10;
    int passes = 1;  // >1 only for iid_offline
    std::vector<Dataset> test_sets;  // one per task
    std::vector<Dataset> val_sets;   // first three tasks, disjoint from training
};

struct StreamCursor {
    std::size_t pos = 0;
};

struct Batch {
    Mat<float> x;
    std::vector<int> y;
    std::vector<int> latent;
};

TaskStream build_stream(const Dataset& train, const Dataset& test, const StreamConfig& cfg);

// Mixes each task boundary: within the trailing (1 - start_frac) span of
// task i, the probability of seeing a task i+1 example ramps linearly from
// 0 to 1. Mixing swaps positions; the multiset of examples is conserved.
void fuzzify(TaskStream& stream, double start_frac, std::uint64_t seed);

std::optional<Batch> next_batch(const TaskStream& stream, StreamCursor& cursor);

std::size_t stream_total_batches(const TaskStream& stream);

}  // namespace gmed
