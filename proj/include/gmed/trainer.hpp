#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <vector>

#include "gmed/edit.hpp"
#include "gmed/memory.hpp"
#include "gmed/nn.hpp"
#include "gmed/stream.hpp"
#include "gmed/strategies.hpp"

namespace gmed {

enum class Variant { Finetune, Er, ErGmed, Mir, MirGmed, ErAug, ErAugGmed, Agem };

bool variant_uses_gmed(Variant v);
const char* variant_name(Variant v);

// Hindsight-oracle tracker: keeps a reservoir of visited stream examples and
// periodically compares the applied edit direction against the optimal edit
// direction. Enabled only when the cosine trace is requested; it is pure
// measurement and never influences training.
class CosineTracer {
public:
    // warmup skips measurements taken while the history still covers only the
    // very start of the stream, where the hindsight objective is degenerate
    // and its direction is dominated by noise.
    CosineTracer(std::size_t history_cap, long interval, std::uint64_t seed, long warmup = 100);

    void offer_history(const Mat<float>& x, const std::vector<int>& y);
    bool due(long t) const { return t % interval_ == 0 && t > warmup_ && n_seen_ > 0; }

    // Measures mean cosine over the edit batch; directions are the applied
    // per-example edit directions.
    void measure(long t, const MlpParams<float>& theta, const MlpParams<float>& theta_prime,
                 const Mat<float>& x_m, const std::vector<int>& y_m,
                 const Mat<float>& directions, float lr);

    const std::vector<std::pair<long, double>>& trace() const { return trace_; }
    double run_average() const;

private:
    std::size_t cap_;
    long interval_;
    long warmup_;
    std::mt19937_64 rng_;
    std::uint64_t n_seen_ = 0;
    Mat<float> hist_x_;
    std::vector<int> hist_y_;
    std::size_t hist_size_ = 0;
    std::vector<std::pair<long, double>> trace_;
};

struct TrainerState {
    Variant variant = Variant::Er;
    MlpParams<float> params;
    ReplayMemory mem;
    float lr = 0.05f;
    long t = 0;
    EditConfig edit;
    std::size_t mir_candidates = 50;
    std::size_t agem_ref_size = 256;
    AugmentPolicy aug_policy = AugmentPolicy::RotShift;

    std::mt19937_64 rng_memory, rng_edit, rng_reservoir, rng_augment;

    CosineTracer* tracer = nullptr;    // optional, not owned
    std::ostream* edit_trace = nullptr;  // optional CSV sink, not owned
};

TrainerState make_trainer(Variant variant, MlpParams<float> params, std::size_t mem_capacity,
                          float lr, const EditConfig& edit, std::uint64_t seed,
                          bool keep_originals = false);

// One stream batch: replay/edit/regularize per variant, commit exactly one
// SGD update, then offer the batch to the reservoir.
void train_step(TrainerState& state, const Batch& batch);

}  // namespace gmed
