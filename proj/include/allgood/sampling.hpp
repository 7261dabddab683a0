#pragma once

// Seeded reward generation and pull accounting.
//
// Every reward is a pure function of (bank seed, arm, stream, position):
// a Philox4x32-10 block keyed by the seed, with counter words
// (position/2 low, position/2 high, arm, stream). Each block yields two
// 64-bit words; even positions use the first, odd positions the second.
// Gaussian rewards are mean + stddev * Phi^{-1}(u) with u = (k + 0.5)/2^53
// built from the top 53 bits. Interleaving pulls across arms or streams
// therefore never changes any single arm's reward sequence.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "allgood/core.hpp"
#include "allgood/detail/normal_quantile.hpp"
#include "allgood/detail/philox.hpp"
#include "allgood/error.hpp"

namespace allgood {

enum class ReplayFallback { error, resample };

struct GaussianArm {
    double mean = 0.0;
    double stddev = 1.0;
};

/// Plays back recorded rewards in order; past the end, either fails or
/// resamples uniformly with replacement from the recording.
struct ReplayArm {
    std::vector<double> values;
    ReplayFallback fallback = ReplayFallback::error;
};

using ArmSampler = std::variant<GaussianArm, ReplayArm>;

/// Stream tags inside one algorithm slot.
enum class Lane : std::uint32_t { main = 0, good_filter = 1, bad_filter = 2, finder = 3 };

inline std::uint32_t stream_id(std::uint32_t slot, Lane lane) {
    return (slot << 8) | static_cast<std::uint32_t>(lane);
}

class SamplerBank {
public:
    SamplerBank() = default;
    SamplerBank(std::vector<ArmSampler> arms, std::uint64_t seed) : arms_(std::move(arms)), seed_(seed) {
        if (arms_.empty()) throw InvalidSpec("sampler bank needs at least one arm");
        for (const auto& a : arms_) {
            if (const auto* r = std::get_if<ReplayArm>(&a); r && r->values.empty())
                throw InvalidSpec("replay arm needs at least one recorded value");
        }
        const std::uint64_t k = detail::mix64(seed_);
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    }

    static SamplerBank gaussian(std::span<const double> means, std::uint64_t seed, double stddev = 1.0) {
        std::vector<ArmSampler> arms;
        arms.reserve(means.size());
        for (double m : means) arms.emplace_back(GaussianArm{m, stddev});
        return SamplerBank(std::move(arms), seed);
    }
    static SamplerBank gaussian(const BanditInstance& instance, std::uint64_t seed, double stddev = 1.0) {
        return gaussian(instance.means(), seed, stddev);
    }

    /// Independent bank for trial `trial` of an experiment seeded with this bank's seed.
    SamplerBank for_trial(std::uint64_t trial) const {
        return SamplerBank(arms_, detail::mix64(seed_ ^ detail::mix64(trial + 0x632BE59BD9B4E019ull)));
    }

    std::size_t size() const noexcept { return arms_.size(); }
    std::uint64_t seed() const noexcept { return seed_; }
    const ArmSampler& sampler(std::size_t arm) const { return arms_.at(arm); }

    /// 64 random bits for (arm, stream, position); `pair` receives the
    /// sibling word of the same Philox block.
    std::uint64_t bits(std::size_t arm, std::uint32_t stream, std::uint64_t position,
                       std::uint64_t* pair = nullptr) const noexcept {
        const std::uint64_t block = position >> 1;
        const auto out = detail::philox4x32({static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                                             static_cast<std::uint32_t>(arm), stream},
                                            key_);
        const std::uint64_t w0 = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
        const std::uint64_t w1 = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
        if (pair) *pair = (position & 1) ? w0 : w1;
        return (position & 1) ? w1 : w0;
    }

    /// Reward at `position` of the (arm, stream) sequence.
    double draw(std::size_t arm, std::uint32_t stream, std::uint64_t position) const {
        return reward_from_bits(arm, position, bits(arm, stream, position));
    }

    double reward_from_bits(std::size_t arm, std::uint64_t position, std::uint64_t b) const {
        const ArmSampler& s = arms_[arm];
        if (const auto* g = std::get_if<GaussianArm>(&s))
            return g->mean + g->stddev * detail::normal_quantile(detail::to_unit_open(b));
        const auto& r = std::get<ReplayArm>(s);
        if (position < r.values.size()) return r.values[position];
        if (r.fallback == ReplayFallback::error)
            throw ReplayExhausted("replay arm " + std::to_string(arm) + " ran out of recorded values");
        return r.values[static_cast<std::size_t>(b % r.values.size())];
    }

    /// Largest Gaussian stddev in the bank; replay arms are not counted.
    double max_stddev() const {
        double out = 0.0;
        for (const auto& a : arms_)
            if (const auto* g = std::get_if<GaussianArm>(&a)) out = std::max(out, g->stddev);
        return out;
    }

private:
    std::vector<ArmSampler> arms_;
    std::uint64_t seed_ = 0;
    std::array<std::uint32_t, 2> key_{};
};

/// Pull count and empirical mean from a compensated (Neumaier) running sum.
class ArmState {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
        ++pulls_;
    }
    std::uint64_t pulls() const noexcept { return pulls_; }
    double mean() const {
        if (pulls_ == 0) throw DomainError("empirical mean of an unpulled arm");
        return (sum_ + comp_) / static_cast<double>(pulls_);
    }

private:
    std::uint64_t pulls_ = 0;
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Pull totals across every stream of one run, with an optional cap.
class PullLedger {
public:
    explicit PullLedger(std::size_t arms, std::optional<std::uint64_t> budget = std::nullopt)
        : per_arm_(arms, 0), budget_(budget) {}

    void record(std::size_t arm, std::uint64_t count) noexcept {
        per_arm_[arm] += count;
        total_ += count;
    }
    std::uint64_t total() const noexcept { return total_; }
    const std::vector<std::uint64_t>& per_arm() const noexcept { return per_arm_; }
    std::optional<std::uint64_t> budget() const noexcept { return budget_; }
    bool exhausted() const noexcept { return budget_ && total_ >= *budget_; }

private:
    std::vector<std::uint64_t> per_arm_;
    std::uint64_t total_ = 0;
    std::optional<std::uint64_t> budget_;
};

/// One stream of rewards per arm plus the running statistics drawn from it.
class ArmLane {
public:
    ArmLane(const SamplerBank& bank, std::uint32_t stream, PullLedger& ledger)
        : bank_(&bank), stream_(stream), ledger_(&ledger), cursor_(bank.size(), 0), states_(bank.size()),
          cache_(bank.size()) {}
    // The lane keeps a pointer to the bank.
    ArmLane(SamplerBank&&, std::uint32_t, PullLedger&) = delete;

    std::size_t size() const noexcept { return states_.size(); }
    const ArmState& state(std::size_t arm) const { return states_.at(arm); }
    double mean(std::size_t arm) const { return states_.at(arm).mean(); }
    std::uint64_t pulls(std::size_t arm) const { return states_.at(arm).pulls(); }
    std::uint64_t position(std::size_t arm) const { return cursor_.at(arm); }

    /// Forgets the running statistics but keeps stream positions, so later
    /// pulls see fresh rewards.
    void reset_statistics() { std::fill(states_.begin(), states_.end(), ArmState{}); }

    double pull(std::size_t arm) {
        if (arm >= states_.size()) throw InvalidSpec("arm index out of range");
        const double x = next(arm);
        states_[arm].add(x);
        ledger_->record(arm, 1);
        return x;
    }

    /// Same stream positions and state updates as `count` calls to pull();
    /// returns the mean of this batch alone.
    double pull_batch(std::size_t arm, std::uint64_t count) {
        if (arm >= states_.size()) throw InvalidSpec("arm index out of range");
        if (count == 0) throw InvalidSpec("batch size must be positive");
        ArmState batch;
        for (std::uint64_t k = 0; k < count; ++k) {
            const double x = next(arm);
            states_[arm].add(x);
            batch.add(x);
        }
        ledger_->record(arm, count);
        return batch.mean();
    }

private:
    struct Cached {
        std::uint64_t block = ~0ull;
        std::uint64_t odd_bits = 0;
    };

    double next(std::size_t arm) {
        const std::uint64_t pos = cursor_[arm]++;
        Cached& c = cache_[arm];
        std::uint64_t b;
        if ((pos & 1) && c.block == (pos >> 1)) {
            b = c.odd_bits;
        } else {
            std::uint64_t sibling = 0;
            b = bank_->bits(arm, stream_, pos, &sibling);
            if (!(pos & 1)) {
                c.block = pos >> 1;
                c.odd_bits = sibling;
            }
        }
        return bank_->reward_from_bits(arm, pos, b);
    }

    const SamplerBank* bank_;
    std::uint32_t stream_;
    PullLedger* ledger_;
    std::vector<std::uint64_t> cursor_;
    std::vector<ArmState> states_;
    std::vector<Cached> cache_;
};

}  // namespace allgood
