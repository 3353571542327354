// rng.hpp -- counter-based Philox streams and step samplers. Every stream is
// keyed by (master seed, experiment tag, substream index, draw counter), so
// replicas are reproducible independently of scheduling.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "latticelab/errors.hpp"
#include "latticelab/walk.hpp"

namespace latticelab {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace detail {

// Philox4x32-10 block function.
inline std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> ctr, std::uint32_t k0,
                                                 std::uint32_t k1) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
        k0 += W0;
        k1 += W1;
    }
    return ctr;
}

} // namespace detail

class RngStream {
  public:
    RngStream(std::uint64_t master_seed, std::string_view experiment, std::uint64_t substream) {
        const std::uint64_t tag = fnv1a64(experiment);
        k0_ = static_cast<std::uint32_t>(master_seed) ^ static_cast<std::uint32_t>(tag);
        k1_ = static_cast<std::uint32_t>(master_seed >> 32) ^ static_cast<std::uint32_t>(tag >> 32);
        c2_ = static_cast<std::uint32_t>(substream);
        c3_ = static_cast<std::uint32_t>(substream >> 32);
    }

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // uniform on [0,1) with 53 random bits
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_exponential(double rate) { return -std::log1p(-next_unit()) / rate; }

  private:
    void refill() {
        buf_ = detail::philox_block({static_cast<std::uint32_t>(draw_), static_cast<std::uint32_t>(draw_ >> 32),
                                     c2_, c3_},
                                    k0_, k1_);
        ++draw_;
        pos_ = 0;
    }

    std::uint32_t k0_ = 0, k1_ = 0, c2_ = 0, c3_ = 0;
    std::uint64_t draw_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
};

// Vose alias sampler over the step support; one 64-bit draw per step.
class StepSampler {
  public:
    explicit StepSampler(const StepDistribution& dist) {
        const std::size_t k = dist.size();
        sites_.reserve(k);
        std::vector<double> scaled(k);
        for (std::size_t i = 0; i < k; ++i) {
            sites_.push_back(dist.atoms()[i].site);
            scaled[i] = dist.atoms()[i].weight * static_cast<double>(k);
        }
        threshold_.assign(k, 0xFFFFFFFFu);
        alias_.assign(k, 0);
        for (std::size_t i = 0; i < k; ++i) alias_[i] = static_cast<std::uint32_t>(i);
        std::vector<std::size_t> small, large;
        for (std::size_t i = 0; i < k; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);
        while (!small.empty() && !large.empty()) {
            const std::size_t s = small.back(), l = large.back();
            small.pop_back();
            large.pop_back();
            threshold_[s] = static_cast<std::uint32_t>(
                std::min(4294967295.0, std::max(0.0, scaled[s] * 4294967296.0)));
            alias_[s] = static_cast<std::uint32_t>(l);
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        // leftovers carry probability 1: threshold already saturated, alias self
    }

    // One 32-bit draw per step: the cell comes from the high bits of u*K, the
    // alias threshold compare reuses the low product bits, which are uniform
    // within each cell.
    Vec2 sample(RngStream& rng) const {
        const std::uint64_t prod = static_cast<std::uint64_t>(rng.next_u32()) * sites_.size();
        const std::size_t cell = static_cast<std::size_t>(prod >> 32);
        const std::uint32_t frac = static_cast<std::uint32_t>(prod);
        return frac < threshold_[cell] ? sites_[cell] : sites_[alias_[cell]];
    }

    std::size_t support_size() const { return sites_.size(); }

  private:
    std::vector<Vec2> sites_;
    std::vector<std::uint32_t> threshold_;
    std::vector<std::uint32_t> alias_;
};

} // namespace latticelab
