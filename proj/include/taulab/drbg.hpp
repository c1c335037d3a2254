#pragma once

#include "taulab/keccak.hpp"

#include <cstring>

namespace taulab {

// Deterministic byte stream: block i = Keccak-256(seed || i). Used everywhere
// randomness is needed so that whole scenarios replay bit-identically from a seed.
class Drbg {
public:
    explicit Drbg(const Bytes& seed) : seed_(seed) {}
    explicit Drbg(const std::string& seed)
        : seed_(seed.begin(), seed.end()) {}
    Drbg(const Bytes& seed, uint64_t stream) : seed_(seed) {
        append_u64be(seed_, stream);
    }

    static Drbg from_u64(uint64_t seed, uint64_t stream = 0) {
        Bytes b;
        append_u64be(b, seed);
        append_u64be(b, stream);
        return Drbg(b);
    }

    void fill(uint8_t* out, size_t len) {
        while (len > 0) {
            if (pos_ == 32)
                refill();
            size_t take = std::min(len, size_t(32) - pos_);
            std::memcpy(out, block_.data() + pos_, take);
            pos_ += take;
            out += take;
            len -= take;
        }
    }

    Bytes bytes(size_t len) {
        Bytes out(len);
        fill(out.data(), len);
        return out;
    }

    uint64_t next_u64() {
        uint8_t b[8];
        fill(b, 8);
        return read_u64be(b);
    }

    // Uniform in [0, bound) by rejection on the top 64-bit range.
    uint64_t uniform(uint64_t bound) {
        uint64_t limit = bound * (UINT64_MAX / bound);
        for (;;) {
            uint64_t v = next_u64();
            if (v < limit)
                return v % bound;
        }
    }

private:
    void refill() {
        Bytes in = seed_;
        append_u64be(in, counter_++);
        block_ = keccak256(in);
        pos_ = 0;
    }

    Bytes seed_;
    Digest block_{};
    uint64_t counter_ = 0;
    size_t pos_ = 32;
};

}  // namespace taulab
