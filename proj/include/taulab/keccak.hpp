#pragma once

#include "taulab/bytes.hpp"

namespace taulab {

// Keccak-256 with the original Keccak padding (0x01), as used by the EVM.
// This is NOT FIPS-202 SHA3-256 (which pads with 0x06).
Digest keccak256(const uint8_t* data, size_t len);

inline Digest keccak256(const Bytes& b) { return keccak256(b.data(), b.size()); }

inline Digest keccak256(const std::string& s) {
    return keccak256(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

}  // namespace taulab
