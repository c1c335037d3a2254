#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace taulab {

using Bytes = std::vector<uint8_t>;
using Digest = std::array<uint8_t, 32>;

inline void append(Bytes& out, const uint8_t* data, size_t len) {
    out.insert(out.end(), data, data + len);
}

inline void append(Bytes& out, const Bytes& b) { append(out, b.data(), b.size()); }

inline void append(Bytes& out, const Digest& d) { append(out, d.data(), d.size()); }

inline void append(Bytes& out, const std::string& s) {
    append(out, reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

inline void append_u8(Bytes& out, uint8_t v) { out.push_back(v); }

// Big-endian fixed-width integers; all wire formats in this project are big-endian.
inline void append_u32be(Bytes& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

inline void append_u64be(Bytes& out, uint64_t v) {
    append_u32be(out, static_cast<uint32_t>(v >> 32));
    append_u32be(out, static_cast<uint32_t>(v));
}

inline uint32_t read_u32be(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

inline uint64_t read_u64be(const uint8_t* p) {
    return (uint64_t(read_u32be(p)) << 32) | read_u32be(p + 4);
}

std::string to_hex(const uint8_t* data, size_t len);
inline std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }
inline std::string to_hex(const Digest& d) { return to_hex(d.data(), d.size()); }

// Accepts an optional 0x prefix; rejects odd length and non-hex characters.
std::optional<Bytes> from_hex(const std::string& s);

}  // namespace taulab
