#include "taulab/keccak.hpp"

#include <cstring>

namespace taulab {

namespace {

constexpr uint64_t kRoundConstants[24] = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
    0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

// Rotation offsets indexed as [x][y] for lane A[x,y].
constexpr unsigned kRho[5][5] = {
    {0, 36, 3, 41, 18},
    {1, 44, 10, 45, 2},
    {62, 6, 43, 15, 61},
    {28, 55, 25, 21, 56},
    {27, 20, 39, 8, 14},
};

inline uint64_t rotl(uint64_t v, unsigned n) {
    return n == 0 ? v : (v << n) | (v >> (64 - n));
}

void keccak_f1600(uint64_t a[5][5]) {
    for (int round = 0; round < 24; ++round) {
        // theta
        uint64_t c[5], d[5];
        for (int x = 0; x < 5; ++x)
            c[x] = a[x][0] ^ a[x][1] ^ a[x][2] ^ a[x][3] ^ a[x][4];
        for (int x = 0; x < 5; ++x)
            d[x] = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
        for (int x = 0; x < 5; ++x)
            for (int y = 0; y < 5; ++y)
                a[x][y] ^= d[x];

        // rho + pi
        uint64_t b[5][5];
        for (int x = 0; x < 5; ++x)
            for (int y = 0; y < 5; ++y)
                b[y][(2 * x + 3 * y) % 5] = rotl(a[x][y], kRho[x][y]);

        // chi
        for (int x = 0; x < 5; ++x)
            for (int y = 0; y < 5; ++y)
                a[x][y] = b[x][y] ^ (~b[(x + 1) % 5][y] & b[(x + 2) % 5][y]);

        // iota
        a[0][0] ^= kRoundConstants[round];
    }
}

}  // namespace

Digest keccak256(const uint8_t* data, size_t len) {
    constexpr size_t kRate = 136;  // 1088-bit rate, 512-bit capacity
    uint64_t state[5][5];
    std::memset(state, 0, sizeof(state));

    auto absorb_block = [&](const uint8_t block[kRate]) {
        for (size_t i = 0; i < kRate / 8; ++i) {
            uint64_t lane = 0;
            for (int j = 7; j >= 0; --j)
                lane = (lane << 8) | block[i * 8 + j];  // little-endian lanes
            state[i % 5][i / 5] ^= lane;
        }
        keccak_f1600(state);
    };

    while (len >= kRate) {
        absorb_block(data);
        data += kRate;
        len -= kRate;
    }

    uint8_t last[kRate];
    std::memset(last, 0, sizeof(last));
    std::memcpy(last, data, len);
    last[len] ^= 0x01;          // Keccak multi-rate padding
    last[kRate - 1] ^= 0x80;
    absorb_block(last);

    Digest out;
    for (size_t i = 0; i < 4; ++i) {
        uint64_t lane = state[i % 5][i / 5];
        for (int j = 0; j < 8; ++j)
            out[i * 8 + j] = static_cast<uint8_t>(lane >> (8 * j));
    }
    return out;
}

std::string to_hex(const uint8_t* data, size_t len) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(len * 2);
    for (size_t i = 0; i < len; ++i) {
        s.push_back(digits[data[i] >> 4]);
        s.push_back(digits[data[i] & 0x0f]);
    }
    return s;
}

std::optional<Bytes> from_hex(const std::string& s) {
    size_t start = 0;
    if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X'))
        start = 2;
    if ((s.size() - start) % 2 != 0)
        return std::nullopt;
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    Bytes out;
    out.reserve((s.size() - start) / 2);
    for (size_t i = start; i < s.size(); i += 2) {
        int hi = nibble(s[i]), lo = nibble(s[i + 1]);
        if (hi < 0 || lo < 0)
            return std::nullopt;
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

}  // namespace taulab
