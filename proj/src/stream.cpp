#include "gmed/stream.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gmed/image.hpp"
#include "gmed/rng.hpp"

namespace gmed {

namespace {

constexpr std::size_t kSide = 28;
constexpr std::size_t kDim = kSide * kSide;

int default_n_tasks(StreamKind kind) {
    switch (kind) {
        case StreamKind::Split: return 5;
        case StreamKind::Permuted: return 10;
        case StreamKind::Rotated: return 20;
    }
    return 0;
}

// Draws n distinct values from `pool` (consumed from the back after a
// shuffle) so successive draws for the same task stay disjoint.
std::vector<int> draw_without_replacement(std::vector<int>& pool, std::size_t n,
                                          std::mt19937_64& rng) {
    if (pool.size() < n) throw std::invalid_argument("insufficient data for task");
    for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> d(i, pool.size() - 1);
        std::swap(pool[i], pool[d(rng)]);
    }
    std::vector<int> out(pool.begin(), pool.begin() + std::ptrdiff_t(n));
    pool.erase(pool.begin(), pool.begin() + std::ptrdiff_t(n));
    return out;
}

Dataset subset(const Dataset& ds, const std::vector<int>& idx) {
    Dataset out;
    out.x = Mat<float>(idx.size(), ds.x.cols);
    out.y.resize(idx.size());
    out.source_index.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::copy_n(ds.x.row(std::size_t(idx[i])), ds.x.cols, out.x.row(i));
        out.y[i] = ds.y[std::size_t(idx[i])];
        out.source_index[i] = ds.source_index[std::size_t(idx[i])];
    }
    return out;
}

void apply_permutation(Dataset& ds, const std::vector<std::size_t>& perm) {
    std::vector<float> tmp(ds.x.cols);
    for (std::size_t i = 0; i < ds.x.rows; ++i) {
        float* row = ds.x.row(i);
        for (std::size_t j = 0; j < perm.size(); ++j) tmp[j] = row[perm[j]];
        std::copy(tmp.begin(), tmp.end(), row);
    }
}

void apply_rotation(Dataset& ds, double angle_deg) {
    std::vector<float> tmp(kDim);
    for (std::size_t i = 0; i < ds.x.rows; ++i) {
        float* row = ds.x.row(i);
        rotate_bilinear(row, tmp.data(), kSide, angle_deg);
        std::copy(tmp.begin(), tmp.end(), row);
    }
}

}  // namespace

TaskStream build_stream(const Dataset& train, const Dataset& test, const StreamConfig& cfg) {
    if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    const int n_tasks = cfg.n_tasks > 0 ? cfg.n_tasks : default_n_tasks(cfg.kind);
    if (cfg.kind == StreamKind::Split && n_tasks > 5)
        throw std::invalid_argument("split supports at most 5 tasks");
    const std::size_t per_task = std::size_t(cfg.examples_per_task);
    const std::size_t val_per_task =
        std::size_t(std::llround(cfg.validation_frac * double(per_task)));

    auto rng = make_rng(cfg.seed, RngStream::DataOrder);

    TaskStream stream;
    stream.n_tasks = n_tasks;
    stream.batch_size = cfg.batch_size;
    stream.x = Mat<float>(per_task * std::size_t(n_tasks), kDim);
    stream.y.resize(stream.x.rows);
    stream.latent_task.resize(stream.x.rows);

    int test_cap = cfg.test_per_task_cap;
    if (test_cap == 0 && cfg.kind == StreamKind::Rotated) test_cap = 1000;
    if (test_cap < 0) test_cap = 0;

    // Shared pools for the transformed benchmarks: every task draws fresh
    // training examples from the full set, and the same capped test subset
    // is re-transformed per task.
    std::vector<int> full_pool(train.size());
    std::iota(full_pool.begin(), full_pool.end(), 0);
    std::vector<int> test_idx(test.size());
    std::iota(test_idx.begin(), test_idx.end(), 0);
    if (test_cap > 0 && std::size_t(test_cap) < test.size())
        test_idx = draw_without_replacement(test_idx, std::size_t(test_cap), rng);
    const Dataset test_base = subset(test, test_idx);

    for (int t = 0; t < n_tasks; ++t) {
        Dataset task_train, task_test, task_val;
        if (cfg.kind == StreamKind::Split) {
            const int lo = 2 * t, hi = 2 * t + 1;
            std::vector<int> pool;
            for (std::size_t i = 0; i < train.size(); ++i)
                if (train.y[i] == lo || train.y[i] == hi) pool.push_back(int(i));
            auto train_idx = draw_without_replacement(pool, per_task, rng);
            task_train = subset(train, train_idx);
            if (t < 3 && val_per_task > 0)
                task_val = subset(train, draw_without_replacement(pool, val_per_task, rng));
            std::vector<int> tidx;
            for (std::size_t i = 0; i < test.size(); ++i)
                if (test.y[i] == lo || test.y[i] == hi) tidx.push_back(int(i));
            if (test_cap > 0 && std::size_t(test_cap) < tidx.size())
                tidx = draw_without_replacement(tidx, std::size_t(test_cap), rng);
            task_test = subset(test, tidx);
        } else {
            std::vector<int> pool = full_pool;
            auto train_idx = draw_without_replacement(pool, per_task, rng);
            task_train = subset(train, train_idx);
            if (t < 3 && val_per_task > 0)
                task_val = subset(train, draw_without_replacement(pool, val_per_task, rng));
            task_test = test_base;
            if (cfg.kind == StreamKind::Permuted) {
                std::vector<std::size_t> perm(kDim);
                std::iota(perm.begin(), perm.end(), 0);
                if (t > 0) std::shuffle(perm.begin(), perm.end(), rng);  // task 0 = identity
                apply_permutation(task_train, perm);
                apply_permutation(task_test, perm);
                apply_permutation(task_val, perm);
            } else {
                const double angle = 180.0 * double(t) / double(n_tasks);
                apply_rotation(task_train, angle);
                apply_rotation(task_test, angle);
                apply_rotation(task_val, angle);
            }
        }

        const std::size_t base = std::size_t(t) * per_task;
        for (std::size_t i = 0; i < per_task; ++i) {
            std::copy_n(task_train.x.row(i), kDim, stream.x.row(base + i));
            stream.y[base + i] = task_train.y[i];
            stream.latent_task[base + i] = t;
        }
        stream.test_sets.push_back(std::move(task_test));
        if (t < 3 && val_per_task > 0) stream.val_sets.push_back(std::move(task_val));
    }

    if (cfg.mode != RunMode::Sequential) {
        std::vector<std::size_t> order(stream.x.rows);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        Mat<float> x2(stream.x.rows, kDim);
        std::vector<int> y2(stream.x.rows), z2(stream.x.rows);
        for (std::size_t i = 0; i < order.size(); ++i) {
            std::copy_n(stream.x.row(order[i]), kDim, x2.row(i));
            y2[i] = stream.y[order[i]];
            z2[i] = stream.latent_task[order[i]];
        }
        stream.x = std::move(x2);
        stream.y = std::move(y2);
        stream.latent_task = std::move(z2);
        if (cfg.mode == RunMode::IidOffline) stream.passes = std::max(1, cfg.offline_epochs);
    } else if (cfg.fuzzy) {
        fuzzify(stream, cfg.fuzzy_start_frac, cfg.seed);
    }
    return stream;
}

void fuzzify(TaskStream& stream, double start_frac, std::uint64_t seed) {
    if (stream.n_tasks < 2) throw std::invalid_argument("fuzzify needs at least 2 tasks");
    if (!(start_frac > 0.0 && start_frac <= 1.0))
        throw std::invalid_argument("start_frac must be in (0,1]");
    auto rng = make_rng(seed, RngStream::Fuzzify);

    // Task spans are contiguous and equal-sized by construction.
    const std::size_t span = stream.x.rows / std::size_t(stream.n_tasks);
    std::vector<float> tmp(stream.x.cols);
    auto swap_rows = [&](std::size_t a, std::size_t b) {
        std::copy_n(stream.x.row(a), stream.x.cols, tmp.data());
        std::copy_n(stream.x.row(b), stream.x.cols, stream.x.row(a));
        std::copy(tmp.begin(), tmp.end(), stream.x.row(b));
        std::swap(stream.y[a], stream.y[b]);
        std::swap(stream.latent_task[a], stream.latent_task[b]);
    };

    for (int t = 0; t + 1 < stream.n_tasks; ++t) {
        const std::size_t s = std::size_t(t) * span;
        const std::size_t ramp_start = s + std::size_t(std::llround(start_frac * double(span)));
        const std::size_t ramp_len = s + span - ramp_start;
        if (ramp_len == 0) continue;

        // Donors come from the first half of the next task's span so the
        // displaced current-task examples linger past the boundary.
        std::vector<std::size_t> donors;
        const std::size_t next_s = s + span;
        for (std::size_t j = next_s; j < next_s + span / 2; ++j) donors.push_back(j);
        std::shuffle(donors.begin(), donors.end(), rng);

        std::size_t donor_pos = 0;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (std::size_t j = 0; j < ramp_len && donor_pos < donors.size(); ++j) {
            const double p = (double(j) + 0.5) / double(ramp_len);
            if (unif(rng) < p) swap_rows(ramp_start + j, donors[donor_pos++]);
        }
    }
}

std::optional<Batch> next_batch(const TaskStream& stream, StreamCursor& cursor) {
    const std::size_t n = stream.x.rows;
    const std::size_t total = n * std::size_t(stream.passes);
    if (cursor.pos >= total) return std::nullopt;
    const std::size_t in_pass = cursor.pos % n;
    const std::size_t b = std::min<std::size_t>(std::size_t(stream.batch_size), n - in_pass);
    Batch batch;
    batch.x = Mat<float>(b, stream.x.cols);
    batch.y.resize(b);
    batch.latent.resize(b);
    for (std::size_t i = 0; i < b; ++i) {
        std::copy_n(stream.x.row(in_pass + i), stream.x.cols, batch.x.row(i));
        batch.y[i] = stream.y[in_pass + i];
        batch.latent[i] = stream.latent_task[in_pass + i];
    }
    cursor.pos += b;
    return batch;
}

std::size_t stream_total_batches(const TaskStream& stream) {
    const std::size_t n = stream.x.rows;
    const std::size_t per_pass =
        (n + std::size_t(stream.batch_size) - 1) / std::size_t(stream.batch_size);
    return per_pass * std::size_t(stream.passes);
}

}  // namespace gmed
