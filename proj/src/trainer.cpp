#include "gmed/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gmed/metrics.hpp"
#include "gmed/rng.hpp"

namespace gmed {

bool variant_uses_gmed(Variant v) {
    return v == Variant::ErGmed || v == Variant::MirGmed || v == Variant::ErAugGmed;
}

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Finetune: return "finetune";
        case Variant::Er: return "er";
        case Variant::ErGmed: return "er_gmed";
        case Variant::Mir: return "mir";
        case Variant::MirGmed: return "mir_gmed";
        case Variant::ErAug: return "er_aug";
        case Variant::ErAugGmed: return "er_aug_gmed";
        case Variant::Agem: return "agem";
    }
    return "?";
}

CosineTracer::CosineTracer(std::size_t history_cap, long interval, std::uint64_t seed,
                           long warmup)
    : cap_(history_cap),
      interval_(interval),
      warmup_(warmup),
      rng_(make_rng(seed, RngStream::OracleHistory)) {}

void CosineTracer::offer_history(const Mat<float>& x, const std::vector<int>& y) {
    if (hist_x_.rows == 0) hist_x_ = Mat<float>(cap_, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        ++n_seen_;
        if (hist_size_ < cap_) {
            std::copy_n(x.row(i), x.cols, hist_x_.row(hist_size_));
            hist_y_.push_back(y[i]);
            ++hist_size_;
        } else {
            std::uniform_int_distribution<std::uint64_t> d(0, n_seen_ - 1);
            const std::uint64_t j = d(rng_);
            if (j < cap_) {
                std::copy_n(x.row(i), x.cols, hist_x_.row(std::size_t(j)));
                hist_y_[std::size_t(j)] = y[i];
            }
        }
    }
}

void CosineTracer::measure(long t, const MlpParams<float>& theta,
                           const MlpParams<float>& theta_prime, const Mat<float>& x_m,
                           const std::vector<int>& y_m, const Mat<float>& directions, float lr) {
    if (hist_size_ == 0 || x_m.rows == 0) return;
    Mat<float> hx(hist_size_, hist_x_.cols);
    std::copy_n(hist_x_.data.data(), hist_size_ * hist_x_.cols, hx.data.begin());
    std::vector<int> hy(hist_y_.begin(), hist_y_.begin() + std::ptrdiff_t(hist_size_));

    // One cosine per measurement over the batch-flattened directions: this
    // weights each example by its direction norm, so near-zero directions on
    // low-interference examples cannot swamp the signal.
    std::vector<double> applied, oracle_flat;
    applied.reserve(x_m.size());
    oracle_flat.reserve(x_m.size());
    for (std::size_t i = 0; i < x_m.rows; ++i) {
        std::vector<float> xi(x_m.row(i), x_m.row(i) + x_m.cols);
        auto oracle = optimal_edit_direction(theta, theta_prime, xi, y_m[i], hx, hy, lr);
        oracle_flat.insert(oracle_flat.end(), oracle.begin(), oracle.end());
        applied.insert(applied.end(), directions.row(i), directions.row(i) + directions.cols);
    }
    trace_.emplace_back(t, cosine_similarity(applied, oracle_flat));
}

double CosineTracer::run_average() const {
    if (trace_.empty()) return 0.0;
    double s = 0;
    for (const auto& [t, c] : trace_) s += c;
    return s / double(trace_.size());
}

TrainerState make_trainer(Variant variant, MlpParams<float> params, std::size_t mem_capacity,
                          float lr, const EditConfig& edit, std::uint64_t seed,
                          bool keep_originals) {
    TrainerState s{.variant = variant,
                   .params = std::move(params),
                   .mem = ReplayMemory(mem_capacity, keep_originals),
                   .lr = lr,
                   .edit = edit};
    s.rng_memory = make_rng(seed, RngStream::MemorySample);
    s.rng_edit = make_rng(seed, RngStream::EditNoise);
    s.rng_reservoir = make_rng(seed, RngStream::Reservoir);
    s.rng_augment = make_rng(seed, RngStream::Augment);
    return s;
}

namespace {

struct MemBatch {
    std::vector<std::size_t> slots;
    Mat<float> x;
    std::vector<int> y;
    std::vector<int> ks;
};

MemBatch gather(const ReplayMemory& mem, std::vector<std::size_t> slots) {
    MemBatch b;
    b.slots = std::move(slots);
    if (b.slots.empty()) return b;
    const std::size_t dim = mem.slot(b.slots[0]).x.size();
    b.x = Mat<float>(b.slots.size(), dim);
    b.y.resize(b.slots.size());
    b.ks.resize(b.slots.size());
    for (std::size_t i = 0; i < b.slots.size(); ++i) {
        const auto& s = mem.slot(b.slots[i]);
        std::copy(s.x.begin(), s.x.end(), b.x.row(i));
        b.y[i] = s.y;
        b.ks[i] = s.replay_count;
    }
    return b;
}

Mat<float> vcat(std::initializer_list<const Mat<float>*> parts) {
    std::size_t rows = 0, cols = 0;
    for (const auto* p : parts) {
        rows += p->rows;
        if (p->rows > 0) cols = p->cols;
    }
    Mat<float> out(rows, cols);
    std::size_t at = 0;
    for (const auto* p : parts) {
        std::copy(p->data.begin(), p->data.end(), out.data.begin() + std::ptrdiff_t(at));
        at += p->size();
    }
    return out;
}

std::vector<int> cat_labels(std::initializer_list<const std::vector<int>*> parts) {
    std::vector<int> out;
    for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
    return out;
}

void commit_sgd(TrainerState& state, const Mat<float>& x, const std::vector<int>& y) {
    auto [logits, cache] = forward(state.params, x);
    auto grads = backward(state.params, cache, y);
    state.params = sgd_step(state.params, grads.param_grads, state.lr);
}

// Edits the batch, runs trace hooks, and (optionally) writes edits back.
EditResult edit_and_writeback(TrainerState& state, const MlpParams<float>& theta_prime,
                              const MemBatch& mb) {
    auto res = edit_batch(mb.x, mb.y, mb.ks, state.params, theta_prime, state.edit,
                          state.rng_edit);
    if (state.tracer && state.tracer->due(state.t))
        state.tracer->measure(state.t, state.params, theta_prime, mb.x, mb.y,
                              res.first_direction, state.lr);
    if (state.edit_trace) {
        const auto d_before = interference(state.params, theta_prime, mb.x, mb.y);
        const auto d_after = interference(state.params, theta_prime, res.x, mb.y);
        for (std::size_t i = 0; i < mb.slots.size(); ++i) {
            double sq = 0;
            for (std::size_t j = 0; j < mb.x.cols; ++j) {
                const double dv = double(res.x(i, j)) - double(mb.x(i, j));
                sq += dv * dv;
            }
            *state.edit_trace << state.t << ',' << mb.slots[i] << ',' << mb.ks[i] << ','
                              << std::sqrt(sq) << ',' << d_before[i] << ',' << d_after[i] << '\n';
        }
    }
    if (state.edit.writeback) {
        std::vector<float> row(mb.x.cols);
        for (std::size_t i = 0; i < mb.slots.size(); ++i) {
            std::copy_n(res.x.row(i), mb.x.cols, row.begin());
            state.mem.writeback(mb.slots[i], row);
        }
    }
    return res;
}

void extra_edits(TrainerState& state, const MlpParams<float>& theta_prime) {
    if (state.edit.n_extra_edit <= 0 || !state.edit.writeback) return;
    const std::size_t n = std::min<std::size_t>(std::size_t(state.edit.n_extra_edit),
                                                state.mem.size());
    if (n == 0) return;
    auto mb = gather(state.mem, state.mem.sample(n, state.rng_memory));
    auto res = edit_batch(mb.x, mb.y, mb.ks, state.params, theta_prime, state.edit,
                          state.rng_edit);
    std::vector<float> row(mb.x.cols);
    for (std::size_t i = 0; i < mb.slots.size(); ++i) {
        std::copy_n(res.x.row(i), mb.x.cols, row.begin());
        state.mem.writeback(mb.slots[i], row);
    }
}

}  // namespace

void train_step(TrainerState& state, const Batch& batch) {
    ++state.t;
    const bool gmed = variant_uses_gmed(state.variant);
    const std::size_t b = batch.x.rows;

    // With nothing to replay yet, every variant is a plain stream update.
    const bool degenerate = state.variant == Variant::Finetune || state.mem.size() == 0;

    if (degenerate) {
        commit_sgd(state, batch.x, batch.y);
    } else if (state.variant == Variant::Er || state.variant == Variant::ErGmed) {
        const std::size_t n = std::min(b, state.mem.size());
        auto mb = gather(state.mem, state.mem.sample(n, state.rng_memory));
        Mat<float> replay_x = mb.x;
        if (gmed) {
            auto theta_prime = virtual_update(state.params, batch.x, batch.y, state.lr);
            replay_x = edit_and_writeback(state, theta_prime, mb).x;
            extra_edits(state, theta_prime);
        }
        commit_sgd(state, vcat({&replay_x, &batch.x}), cat_labels({&mb.y, &batch.y}));
    } else if (state.variant == Variant::Mir || state.variant == Variant::MirGmed) {
        // The edited mini-batch is drawn independently of the MIR retrieval.
        MemBatch eb;
        if (gmed) {
            const std::size_t n = std::min(b, state.mem.size());
            eb = gather(state.mem, state.mem.sample(n, state.rng_memory));
        }
        auto theta_prime = virtual_update(state.params, batch.x, batch.y, state.lr);
        auto retrieved = gather(
            state.mem, mir_retrieve(state.mem, state.params, theta_prime,
                                    std::min(b, state.mem.size()), state.mir_candidates,
                                    state.rng_memory));
        if (gmed) {
            edit_and_writeback(state, theta_prime, eb);
            extra_edits(state, theta_prime);
        }
        commit_sgd(state, vcat({&retrieved.x, &batch.x}), cat_labels({&retrieved.y, &batch.y}));
    } else if (state.variant == Variant::ErAug || state.variant == Variant::ErAugGmed) {
        const std::size_t n = std::min(b, state.mem.size());
        auto mb = gather(state.mem, state.mem.sample(n, state.rng_memory));
        Mat<float> aug_x = augment(mb.x, state.aug_policy, state.rng_augment);
        Mat<float> second = mb.x;  // originals for er_aug, edits for er_aug_gmed
        if (gmed) {
            auto theta_prime = virtual_update(state.params, batch.x, batch.y, state.lr);
            second = edit_and_writeback(state, theta_prime, mb).x;
            extra_edits(state, theta_prime);
        }
        commit_sgd(state, vcat({&aug_x, &second, &batch.x}),
                   cat_labels({&mb.y, &mb.y, &batch.y}));
    } else if (state.variant == Variant::Agem) {
        auto [logits, cache] = forward(state.params, batch.x);
        auto grads = backward(state.params, cache, batch.y);
        const std::size_t n = std::min(state.agem_ref_size, state.mem.size());
        auto rb = gather(state.mem, state.mem.sample(n, state.rng_memory));
        auto [rl, rc] = forward(state.params, rb.x);
        auto ref = backward(state.params, rc, rb.y);
        auto projected = agem_project(grads.param_grads.flatten(), ref.param_grads.flatten());
        MlpParams<float> pg = grads.param_grads;
        pg.unflatten(projected);
        state.params = sgd_step(state.params, pg, state.lr);
    } else {
        throw std::logic_error("unhandled variant");
    }

    if (state.tracer) state.tracer->offer_history(batch.x, batch.y);
    state.mem.reservoir_update(batch.x, batch.y, state.rng_reservoir);
}

}  // namespace gmed
