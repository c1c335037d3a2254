#include "taulab/veccom.hpp"

#include <algorithm>
#include <stdexcept>

#include "taulab/keccak.hpp"

namespace taulab {

namespace {

Digest leaf_hash(uint32_t group_index, uint32_t element_index, const Bytes& elem) {
    Bytes in;
    append(in, std::string("POT-LEAF"));
    append_u32be(in, group_index);
    append_u32be(in, element_index);
    append(in, elem);
    return keccak256(in);
}

const Digest& padding_leaf() {
    static const Digest d = [] {
        Bytes in;
        append(in, std::string("POT-PAD"));
        return keccak256(in);
    }();
    return d;
}

Digest node_hash(const Digest& left, const Digest& right) {
    Bytes in;
    in.reserve(64);
    append(in, left);
    append(in, right);
    return keccak256(in);
}

std::vector<Digest> build_leaves(const PowersOfTau& pp) {
    CeremonyParams params = pp.params();
    std::vector<Digest> leaves;
    leaves.reserve(padded_leaf_count(params));
    for (uint32_t i = 0; i < params.n; i++)
        leaves.push_back(leaf_hash(1, i + 1, g1_to_bytes(pp.g1_powers[i])));
    for (uint32_t j = 0; j < params.k; j++)
        leaves.push_back(leaf_hash(2, j + 1, g2_to_bytes(pp.g2_powers[j])));
    leaves.resize(padded_leaf_count(params), padding_leaf());
    return leaves;
}

// Flat leaf slot of a (group, element) position, or nullopt if out of range.
std::optional<size_t> flat_index(const CeremonyParams& params, uint32_t group_index,
                                 uint32_t element_index) {
    if (group_index == 1 && element_index >= 1 && element_index <= params.n)
        return element_index - 1;
    if (group_index == 2 && element_index >= 1 && element_index <= params.k)
        return params.n + element_index - 1;
    return std::nullopt;
}

}  // namespace

size_t padded_leaf_count(const CeremonyParams& params) {
    size_t d = params.d(), p = 1;
    while (p < d) p <<= 1;
    return p;
}

size_t proof_path_length(const CeremonyParams& params) {
    size_t p = padded_leaf_count(params), h = 0;
    while (p > 1) p >>= 1, h++;
    return h;
}

Commitment commit_pp(const PowersOfTau& pp) {
    std::vector<Digest> level = build_leaves(pp);
    while (level.size() > 1) {
        std::vector<Digest> next(level.size() / 2);
        for (size_t i = 0; i < next.size(); i++)
            next[i] = node_hash(level[2 * i], level[2 * i + 1]);
        level = std::move(next);
    }
    return Commitment{level[0]};
}

MembershipProof open_membership(const PowersOfTau& pp, uint32_t group_index,
                                uint32_t element_index) {
    CeremonyParams params = pp.params();
    auto flat = flat_index(params, group_index, element_index);
    if (!flat) throw std::out_of_range("membership position out of range");
    MembershipProof proof;
    proof.group_index = group_index;
    proof.element_index = element_index;
    proof.leaf_bytes = group_index == 1 ? g1_to_bytes(pp.g1_powers[element_index - 1])
                                        : g2_to_bytes(pp.g2_powers[element_index - 1]);
    std::vector<Digest> level = build_leaves(pp);
    size_t pos = *flat;
    while (level.size() > 1) {
        proof.siblings.push_back(level[pos ^ 1]);
        std::vector<Digest> next(level.size() / 2);
        for (size_t i = 0; i < next.size(); i++)
            next[i] = node_hash(level[2 * i], level[2 * i + 1]);
        level = std::move(next);
        pos >>= 1;
    }
    return proof;
}

bool verify_membership(const CeremonyParams& params, const Commitment& commitment,
                       const MembershipProof& proof) {
    auto flat = flat_index(params, proof.group_index, proof.element_index);
    if (!flat) return false;
    size_t want_leaf = proof.group_index == 1 ? kG1Bytes : kG2Bytes;
    if (proof.leaf_bytes.size() != want_leaf) return false;
    if (proof.siblings.size() != proof_path_length(params)) return false;
    Digest acc = leaf_hash(proof.group_index, proof.element_index, proof.leaf_bytes);
    size_t pos = *flat;
    for (const Digest& sib : proof.siblings) {
        acc = pos & 1 ? node_hash(sib, acc) : node_hash(acc, sib);
        pos >>= 1;
    }
    return acc == commitment.root;
}

Bytes proof_to_bytes(const MembershipProof& proof) {
    Bytes out;
    append_u32be(out, proof.group_index);
    append_u32be(out, proof.element_index);
    append(out, proof.leaf_bytes);
    append_u8(out, static_cast<uint8_t>(proof.siblings.size()));
    for (const Digest& s : proof.siblings) append(out, s);
    return out;
}

std::optional<MembershipProof> proof_from_bytes(const Bytes& data) {
    if (data.size() < 9) return std::nullopt;
    MembershipProof proof;
    proof.group_index = read_u32be(data.data());
    proof.element_index = read_u32be(data.data() + 4);
    if (proof.group_index != 1 && proof.group_index != 2) return std::nullopt;
    size_t leaf = proof.group_index == 1 ? kG1Bytes : kG2Bytes;
    if (data.size() < 8 + leaf + 1) return std::nullopt;
    proof.leaf_bytes.assign(data.begin() + 8, data.begin() + 8 + leaf);
    size_t count = data[8 + leaf];
    if (data.size() != 8 + leaf + 1 + 32 * count) return std::nullopt;
    const uint8_t* p = data.data() + 8 + leaf + 1;
    proof.siblings.resize(count);
    for (size_t i = 0; i < count; i++, p += 32) std::copy(p, p + 32, proof.siblings[i].begin());
    return proof;
}

}  // namespace taulab
