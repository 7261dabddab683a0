#include <catch_amalgamated.hpp>

#include <cmath>

#include "allgood/detail/normal_quantile.hpp"
#include "allgood/detail/philox.hpp"
#include "allgood/sampling.hpp"

using namespace allgood;
using Catch::Approx;

TEST_CASE("philox4x32-10 known answers") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(detail::philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(detail::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(detail::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("unit conversion stays inside the open interval") {
    CHECK(detail::to_unit_open(0) > 0.0);
    CHECK(detail::to_unit_open(~0ull) < 1.0);
    CHECK(detail::to_unit_open(1ull << 63) == Approx(0.5).margin(1e-15));
}

TEST_CASE("normal quantile frozen values") {
    CHECK(detail::normal_quantile(1e-300) == Approx(-37.047096299361201).epsilon(1e-14));
    CHECK(detail::normal_quantile(1e-10) == Approx(-6.3613409024040557).epsilon(1e-14));
    CHECK(detail::normal_quantile(0.001) == Approx(-3.0902323061678132).epsilon(1e-14));
    CHECK(detail::normal_quantile(0.025) == Approx(-1.9599639845400538).epsilon(1e-14));
    CHECK(detail::normal_quantile(0.3) == Approx(-0.52440051270804067).epsilon(1e-14));
    CHECK(detail::normal_quantile(0.5) == Approx(0.0).margin(1e-15));
    CHECK(detail::normal_quantile(0.975) == Approx(1.9599639845400536).epsilon(1e-14));
    CHECK(detail::normal_quantile(0.999999) == Approx(4.7534243088170891).epsilon(1e-14));
}

TEST_CASE("normal quantile inverts the erfc-based cdf") {
    for (int k = 1; k < 1000; ++k) {
        const double p = k / 1000.0;
        const double q = detail::normal_quantile(p);
        CHECK(0.5 * std::erfc(-q / std::sqrt(2.0)) == Approx(p).epsilon(1e-13));
    }
    for (double p : {1e-15, 1e-8, 1e-4}) {
        const double q = detail::normal_quantile(p);
        CHECK(0.5 * std::erfc(-q / std::sqrt(2.0)) == Approx(p).epsilon(1e-12));
        const double upper = 1.0 - p;
        CHECK(detail::normal_quantile(upper) == Approx(-detail::normal_quantile(1.0 - upper)).epsilon(1e-9));
    }
}

TEST_CASE("single pull sets count and mean") {
    const auto bank = SamplerBank::gaussian(std::vector<double>{0.7}, 1);
    PullLedger ledger(1);
    ArmLane lane(bank, 0, ledger);
    const double x = lane.pull(0);
    CHECK(lane.pulls(0) == 1);
    CHECK(lane.mean(0) == x);
    CHECK(ledger.total() == 1);
    CHECK(x == bank.draw(0, 0, 0));
}

TEST_CASE("unpulled arm has no mean") {
    const auto bank = SamplerBank::gaussian(std::vector<double>{0.0}, 1);
    PullLedger ledger(1);
    ArmLane lane(bank, 0, ledger);
    CHECK_THROWS_AS(lane.mean(0), DomainError);
}

TEST_CASE("gaussian mean concentrates") {
    const auto bank = SamplerBank::gaussian(std::vector<double>{5.0}, 42);
    PullLedger ledger(1);
    ArmLane lane(bank, 0, ledger);
    long double ref = 0.0L;
    for (std::uint64_t k = 0; k < 1000000; ++k) {
        lane.pull(0);
        if (k < 1000) ref += bank.draw(0, 0, k);
    }
    CHECK(std::abs(lane.mean(0) - 5.0) <= 5e-3);

    // Reference recompute of the first 1000 rewards from the counter.
    PullLedger l2(1);
    ArmLane again(bank, 0, l2);
    again.pull_batch(0, 1000);
    CHECK(again.mean(0) == Approx(static_cast<double>(ref / 1000.0L)).epsilon(1e-12));
}

TEST_CASE("draw is the inverse-cdf of the counter bits") {
    const auto bank = SamplerBank::gaussian(std::vector<double>{0.25, -1.0}, 9, 2.0);
    for (std::uint64_t pos : {0ull, 1ull, 2ull, 77ull, 1000001ull}) {
        const double u = detail::to_unit_open(bank.bits(1, 3, pos));
        CHECK(bank.draw(1, 3, pos) == -1.0 + 2.0 * detail::normal_quantile(u));
    }
    CHECK(bank.max_stddev() == 2.0);
}

TEST_CASE("replay arms") {
    SamplerBank bank({ReplayArm{{1.0, 2.0, 3.0}}}, 0);
    PullLedger ledger(1);
    ArmLane lane(bank, 0, ledger);
    for (int k = 0; k < 3; ++k) lane.pull(0);
    CHECK(lane.mean(0) == 2.0);
    CHECK(lane.pulls(0) == 3);
    CHECK_THROWS_AS(lane.pull(0), ReplayExhausted);

    SamplerBank resample({ReplayArm{{1.0, 2.0, 3.0}, ReplayFallback::resample}}, 0);
    PullLedger l2(1);
    ArmLane r(resample, 0, l2);
    for (int k = 0; k < 200; ++k) {
        const double x = r.pull(0);
        CHECK((x == 1.0 || x == 2.0 || x == 3.0));
    }
    CHECK_THROWS_AS(SamplerBank({ReplayArm{}}, 0), InvalidSpec);
}

TEST_CASE("pull_batch matches sequential pulls bit for bit") {
    const auto bank = SamplerBank::gaussian(std::vector<double>{0.0, 0.3, -0.2}, 77);
    PullLedger la(3), lb(3);
    ArmLane a(bank, 5, la), b(bank, 5, lb);
    a.pull_batch(1, 100);
    a.pull(1);
    for (int k = 0; k < 101; ++k) b.pull(1);
    CHECK(a.mean(1) == b.mean(1));
    CHECK(a.pulls(1) == 101);
    CHECK(a.position(1) == b.position(1));
    CHECK(la.total() == lb.total());

    PullLedger lc(3), ld(3);
    ArmLane c(bank, 5, lc), d(bank, 5, ld);
    const double x = c.pull_batch(2, 1);
    CHECK(x == d.pull(2));
    // Odd batch lengths straddle Philox blocks.
    c.pull_batch(2, 3);
    c.pull_batch(2, 5);
    for (int k = 0; k < 8; ++k) d.pull(2);
    CHECK(c.mean(2) == d.mean(2));
    CHECK_THROWS_AS(c.pull_batch(2, 0), InvalidSpec);
    CHECK_THROWS_AS(c.pull(3), InvalidSpec);
}

TEST_CASE("batch mean of a zero-mean arm") {
    const auto bank = SamplerBank::gaussian(std::vector<double>{0.0}, 31337);
    PullLedger ledger(1);
    ArmLane lane(bank, 0, ledger);
    lane.pull(0);
    const double m = lane.pull_batch(0, 10000);
    CHECK(std::abs(m) <= 0.05);
    CHECK(lane.pulls(0) == 10001);
}

TEST_CASE("arm sequences do not depend on interleaving") {
    const auto bank = SamplerBank::gaussian(std::vector<double>{0.0, 1.0, 2.0, 3.0}, 2024);
    PullLedger la(4), lb(4);
    ArmLane a(bank, 0, la), b(bank, 0, lb);
    std::vector<std::vector<double>> seq_a(4), seq_b(4);
    for (int k = 0; k < 50; ++k)
        for (std::size_t i = 0; i < 4; ++i) seq_a[i].push_back(a.pull(i));
    for (std::size_t i = 4; i-- > 0;)
        for (int k = 0; k < 50; ++k) seq_b[i].push_back(b.pull(i));
    CHECK(seq_a == seq_b);
}

TEST_CASE("streams and trials are distinct and reproducible") {
    const auto bank = SamplerBank::gaussian(std::vector<double>{0.0, 0.0}, 5);
    CHECK(bank.draw(0, stream_id(0, Lane::main), 0) != bank.draw(0, stream_id(0, Lane::good_filter), 0));
    CHECK(bank.draw(0, stream_id(0, Lane::main), 0) != bank.draw(0, stream_id(1, Lane::main), 0));
    CHECK(bank.draw(0, 0, 0) != bank.draw(1, 0, 0));
    const auto t3 = bank.for_trial(3);
    CHECK(t3.draw(0, 0, 0) == bank.for_trial(3).draw(0, 0, 0));
    CHECK(t3.draw(0, 0, 0) != bank.for_trial(4).draw(0, 0, 0));
    CHECK(SamplerBank::gaussian(std::vector<double>{0.0, 0.0}, 6).draw(0, 0, 0) != bank.draw(0, 0, 0));
    CHECK(stream_id(2, Lane::finder) == ((2u << 8) | 3u));
}

TEST_CASE("compensated mean stays exact over long runs") {
    ArmState s;
    long double ref = 0.0L;
    for (std::uint64_t k = 0; k < 10000000; ++k) {
        const double x = 0.1 + static_cast<double>(k % 7) * 1e-3;
        s.add(x);
        ref += x;
    }
    const double exact = static_cast<double>(ref / 1.0e7L);
    CHECK(std::abs(s.mean() - exact) / exact < 1e-10);
}

TEST_CASE("reset_statistics keeps stream positions") {
    const auto bank = SamplerBank::gaussian(std::vector<double>{0.0}, 8);
    PullLedger ledger(1);
    ArmLane lane(bank, 0, ledger);
    lane.pull_batch(0, 10);
    lane.reset_statistics();
    CHECK(lane.pulls(0) == 0);
    CHECK(lane.position(0) == 10);
    CHECK(lane.pull(0) == bank.draw(0, 0, 10));
    CHECK(ledger.total() == 11);
}

TEST_CASE("ledger budget") {
    PullLedger ledger(2, 5);
    ledger.record(0, 3);
    CHECK_FALSE(ledger.exhausted());
    ledger.record(1, 2);
    CHECK(ledger.exhausted());
    CHECK(ledger.per_arm() == std::vector<std::uint64_t>{3, 2});
}
