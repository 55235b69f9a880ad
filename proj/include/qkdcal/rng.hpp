#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace qkdcal {

// Counter-based PRNG (Philox 4x64, 10 rounds). A stream is identified by
// (key, stream index); blocks within a stream are generated by counting, so
// constructing a stream is free and any gate's substream can be opened
// directly from (seed, gate_index) without touching the others. Output is
// cross-checked against reference vectors in the unit tests.
class PhiloxStream {
public:
    PhiloxStream(uint64_t key0, uint64_t key1, uint64_t stream_lo, uint64_t stream_hi = 0)
        : key_{key0, key1}, ctr_{0, 0, stream_lo, stream_hi} {}

    uint64_t next_u64() {
        if (idx_ == 4) {
            block_ = philox4x64_10(ctr_, key_);
            ++ctr_[0];
            idx_ = 0;
        }
        return block_[idx_++];
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return next_unit() < p;
    }

    // One of {0, 1} with equal probability.
    int bit() { return static_cast<int>(next_u64() >> 63); }

    // Inversion by multiplication; adequate for the small means used here.
    uint64_t poisson(double mean) {
        const double limit = std::exp(-mean);
        uint64_t k = 0;
        double prod = next_unit();
        while (prod > limit) {
            ++k;
            prod *= next_unit();
        }
        return k;
    }

    static std::array<uint64_t, 4> philox4x64_10(std::array<uint64_t, 4> ctr,
                                                 std::array<uint64_t, 2> key) {
        constexpr uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
        constexpr uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            ctr = single_round(ctr, key);
        }
        return ctr;
    }

private:
    static std::array<uint64_t, 4> single_round(const std::array<uint64_t, 4>& c,
                                                const std::array<uint64_t, 2>& k) {
        constexpr uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
        constexpr uint64_t kMul1 = 0xCA5A826395121157ULL;
        uint64_t hi0, hi1;
        const uint64_t lo0 = mulhilo(kMul0, c[0], hi0);
        const uint64_t lo1 = mulhilo(kMul1, c[2], hi1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }

    static uint64_t mulhilo(uint64_t a, uint64_t b, uint64_t& hi) {
        const __uint128_t prod = static_cast<__uint128_t>(a) * b;
        hi = static_cast<uint64_t>(prod >> 64);
        return static_cast<uint64_t>(prod);
    }

    std::array<uint64_t, 2> key_;
    std::array<uint64_t, 4> ctr_;
    std::array<uint64_t, 4> block_{};
    int idx_ = 4;
};

// Substream for one detector gate. All randomness consumed inside gate i of a
// session comes from this stream, which makes sessions reproducible per
// (seed, gate_index) regardless of evaluation order.
inline PhiloxStream gate_stream(uint64_t seed, uint64_t gate_index) {
    return PhiloxStream(seed, 0x243F6A8885A308D3ULL, gate_index, 0);
}

}  // namespace qkdcal
