#pragma once

// Position-binding vector commitment over a powers-of-tau string: one Keccak
// Merkle tree across G1 then G2 elements, padded to a power of two. Leaves
// bind group, index, and canonical element bytes, so a membership proof pins
// "element at (group, index) of the committed string".

#include <cstdint>
#include <optional>
#include <vector>

#include "taulab/bytes.hpp"
#include "taulab/pot.hpp"

namespace taulab {

struct Commitment {
    Digest root{};
    bool operator==(const Commitment&) const = default;
};

struct MembershipProof {
    uint32_t group_index = 0;    // 1 = G1, 2 = G2
    uint32_t element_index = 0;  // 1-based within the group
    Bytes leaf_bytes;            // canonical element encoding (64 or 128 bytes)
    std::vector<Digest> siblings;  // bottom-up authentication path
    bool operator==(const MembershipProof&) const = default;
};

// Tree shape helpers. Leaf order: P_1..P_n then Q_1..Q_k; leaf count padded
// to the next power of two with a fixed padding digest.
size_t padded_leaf_count(const CeremonyParams& params);
size_t proof_path_length(const CeremonyParams& params);  // log2 of padded count

Commitment commit_pp(const PowersOfTau& pp);

// Throws on an out-of-range position.
MembershipProof open_membership(const PowersOfTau& pp, uint32_t group_index,
                                uint32_t element_index);

// Pure recomputation of the root from the proof; params fix the leaf layout.
// Returns false (never throws) on any mismatch, including out-of-range
// positions, wrong leaf size, or wrong path length.
bool verify_membership(const CeremonyParams& params, const Commitment& commitment,
                       const MembershipProof& proof);

// group u32be | index u32be | leaf bytes | path length u8 | path digests.
Bytes proof_to_bytes(const MembershipProof& proof);
std::optional<MembershipProof> proof_from_bytes(const Bytes& data);

}  // namespace taulab
