#include <doctest.h>

#include <set>
#include <sstream>

#include "gmed/memory.hpp"
#include "gmed/rng.hpp"
#include "gmed/stats.hpp"

using namespace gmed;

namespace {

Mat<float> single(float v) {
    Mat<float> x(1, 2);
    x(0, 0) = v;
    x(0, 1) = v + 0.5f;
    return x;
}

}  // namespace

TEST_CASE("reservoir below capacity keeps everything in arrival order") {
    ReplayMemory mem(8);
    auto rng = make_rng(0, RngStream::Reservoir);
    for (int i = 0; i < 5; ++i) mem.reservoir_update(single(float(i)), {i}, rng);
    CHECK(mem.size() == 5);
    CHECK(mem.n_seen() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(mem.slot(std::size_t(i)).y == i);
        CHECK(mem.slot(std::size_t(i)).x[0] == float(i));
        CHECK(mem.slot(std::size_t(i)).replay_count == 0);
    }
}

TEST_CASE("reservoir inclusion is uniform at capacity/N (chi-squared)") {
    // 20 items into 5 slots: every item must land with probability 0.25
    const int n_items = 20;
    const std::size_t cap = 5;
    const int trials = 20000;
    std::vector<long> hits(n_items, 0);
    for (int trial = 0; trial < trials; ++trial) {
        ReplayMemory mem(cap);
        auto rng = make_rng(std::uint64_t(trial), RngStream::Reservoir);
        for (int i = 0; i < n_items; ++i) mem.reservoir_update(single(float(i)), {i}, rng);
        REQUIRE(mem.size() == cap);
        for (std::size_t s = 0; s < cap; ++s) ++hits[std::size_t(mem.slot(s).y)];
    }
    const double expected = double(trials) * double(cap) / double(n_items);
    double chi2 = 0;
    for (int i = 0; i < n_items; ++i) {
        const double d = double(hits[i]) - expected;
        chi2 += d * d / expected;
        CHECK(std::abs(double(hits[i]) / trials - 0.25) < 0.02);
    }
    // item inclusions are weakly dependent (each trial fixes the total), so
    // df = n_items - 1
    CHECK(chi_squared_sf(chi2, n_items - 1) > 0.01);
}

TEST_CASE("reservoir offers batch rows in stream order") {
    ReplayMemory a(3), b(3);
    auto ra = make_rng(4, RngStream::Reservoir);
    auto rb = make_rng(4, RngStream::Reservoir);
    Mat<float> batch(6, 2);
    std::vector<int> y{0, 1, 2, 3, 4, 5};
    for (int i = 0; i < 6; ++i) batch(std::size_t(i), 0) = float(i);
    a.reservoir_update(batch, y, ra);
    for (int i = 0; i < 6; ++i) {
        Mat<float> row(1, 2);
        row(0, 0) = float(i);
        b.reservoir_update(row, {i}, rb);
    }
    REQUIRE(a.size() == b.size());
    for (std::size_t s = 0; s < a.size(); ++s) CHECK(a.slot(s).y == b.slot(s).y);
    CHECK(a.n_seen() == 6);
}

TEST_CASE("sample draws distinct slots and rejects oversampling") {
    ReplayMemory mem(10);
    auto rng = make_rng(1, RngStream::Reservoir);
    for (int i = 0; i < 7; ++i) mem.reservoir_update(single(float(i)), {i}, rng);
    auto srng = make_rng(1, RngStream::MemorySample);
    CHECK_THROWS_AS(mem.sample(8, srng), std::invalid_argument);
    for (int rep = 0; rep < 50; ++rep) {
        auto idx = mem.sample(5, srng);
        CHECK(idx.size() == 5);
        std::set<std::size_t> distinct(idx.begin(), idx.end());
        CHECK(distinct.size() == 5);
        for (auto i : idx) CHECK(i < 7);
    }
}

TEST_CASE("sample covers all slots uniformly") {
    ReplayMemory mem(6);
    auto rng = make_rng(2, RngStream::Reservoir);
    for (int i = 0; i < 6; ++i) mem.reservoir_update(single(float(i)), {i}, rng);
    auto srng = make_rng(2, RngStream::MemorySample);
    std::vector<long> hits(6, 0);
    const int trials = 12000;
    for (int rep = 0; rep < trials; ++rep)
        for (auto i : mem.sample(2, srng)) ++hits[i];
    for (long h : hits) CHECK(std::abs(double(h) / trials - 1.0 / 3.0) < 0.02);
}

TEST_CASE("writeback edits content, bumps replay_count, keeps originals") {
    ReplayMemory mem(4, /*keep_originals=*/true);
    auto rng = make_rng(3, RngStream::Reservoir);
    mem.reservoir_update(single(1.0f), {7}, rng);
    CHECK(mem.keeps_originals());
    CHECK(mem.slot(0).original_x == mem.slot(0).x);

    mem.writeback(0, {9.0f, 9.5f});
    CHECK(mem.slot(0).x == std::vector<float>{9.0f, 9.5f});
    CHECK(mem.slot(0).original_x == std::vector<float>{1.0f, 1.5f});
    CHECK(mem.slot(0).replay_count == 1);
    mem.writeback(0, {2.0f, 2.0f});
    CHECK(mem.slot(0).replay_count == 2);
    CHECK(mem.slot(0).y == 7);
    CHECK_THROWS_AS(mem.writeback(5, {0.0f, 0.0f}), std::out_of_range);
}

TEST_CASE("replaced slots restart their replay_count") {
    ReplayMemory mem(1);
    auto rng = make_rng(5, RngStream::Reservoir);
    mem.reservoir_update(single(0.0f), {0}, rng);
    mem.writeback(0, {5.0f, 5.0f});
    CHECK(mem.slot(0).replay_count == 1);
    // keep offering until the sole slot is replaced
    int i = 1;
    while (mem.slot(0).y == 0) {
        mem.reservoir_update(single(float(i)), {i}, rng);
        REQUIRE(i < 1000);
        ++i;
    }
    CHECK(mem.slot(0).replay_count == 0);
}

TEST_CASE("dump_csv emits one line per slot") {
    ReplayMemory mem(2);
    auto rng = make_rng(0, RngStream::Reservoir);
    mem.reservoir_update(single(0.25f), {3}, rng);
    std::ostringstream os;
    mem.dump_csv(os);
    CHECK(os.str() == "slot,label,replay_count,pixels\n0,3,0,0.25;0.75\n");
}
