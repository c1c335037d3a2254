#pragma once

// Powers-of-tau structured reference string: generation, re-randomization,
// and the three verification predicates (degeneracy, batched well-formedness,
// defect pinpointing). A parameter set fixes n G1 powers and k G2 powers;
// element i of G1 carries tau^i, element j of G2 carries tau^j.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "taulab/bn254.hpp"
#include "taulab/bytes.hpp"
#include "taulab/drbg.hpp"

namespace taulab {

struct CeremonyParams {
    uint32_t n = 0;  // G1 powers tau^1..tau^n
    uint32_t k = 0;  // G2 powers tau^1..tau^k
    uint32_t d() const { return n + k; }
    bool operator==(const CeremonyParams&) const = default;
};

// Largest accepted dimension per group; keeps serialized sizes sane.
inline constexpr uint32_t kMaxPowers = 1u << 20;

struct PowersOfTau {
    std::vector<G1> g1_powers;  // [0] = tau^1 * I_G1
    std::vector<G2> g2_powers;  // [0] = tau^1 * I_G2
    bool operator==(const PowersOfTau&) const = default;

    CeremonyParams params() const {
        return CeremonyParams{static_cast<uint32_t>(g1_powers.size()),
                              static_cast<uint32_t>(g2_powers.size())};
    }
};

// Pristine string: every power is the group generator (tau = 1).
PowersOfTau init_pp(const CeremonyParams& params);

// Re-randomize with r != 0: element exponents pick up r^i / r^j.
// Preserves well-formedness; throws on r = 0 or empty groups.
PowersOfTau apply_update(const PowersOfTau& pp, const Fr& r);

// True iff P_1 is neither the generator nor the zero point.
bool non_degen_check(const PowersOfTau& pp);

struct WellformChallenge {
    Fr rho1;  // folds the G1 chain
    Fr rho2;  // folds the G2 chain
};

// Fiat-Shamir challenges bound to the exact string bytes.
WellformChallenge derive_wellform_challenge(const PowersOfTau& pp);

// Three pairing identities that hold iff pp is well-formed (up to a
// soundness error of (n + k) / group order for random challenges):
//   (a) e(P_1, I_G2) = e(I_G1, Q_1)
//   (b) e(sum rho1^(i-1) P_i for i<n, Q_1) = e(sum rho1^(i-2) P_i for i>=2, I_G2)
//   (c) e(P_1, sum rho2^(j-1) Q_j for j<k) = e(I_G1, sum rho2^(j-2) Q_j for j>=2)
// Throws if a challenge scalar is zero.
bool wellform_check_batched(const PowersOfTau& pp, const WellformChallenge& ch);
bool wellform_check_batched(const PowersOfTau& pp);  // self-derived challenge

struct PinpointResult {
    bool ill = false;
    uint32_t group_index = 0;    // 1 = G1, 2 = G2; 0 when well-formed
    uint32_t element_index = 0;  // 1-based within the group; 0 when well-formed
    bool operator==(const PinpointResult&) const = default;
};

// Scans the chain relations in order and reports the first violated one:
//   i = 1..n:  e(P_i, I_G2) = e(P_{i-1}, Q_1)   with P_0 := I_G1
//   j = 2..k:  e(I_G1, Q_j) = e(P_1, Q_{j-1})
// The first failing relation names the ill-formed element.
PinpointResult pinpoint_ill_formed(const PowersOfTau& pp);

// Same result contract as pinpoint_ill_formed, but locates the leftmost
// G1 defect by halving randomized window checks instead of a linear scan.
PinpointResult pinpoint_binary_search(const PowersOfTau& pp, Drbg& rng);

// Chain-relation checks performed since process start (linear scans and
// window checks both count one per pairing comparison).
uint64_t chain_check_count();
void reset_chain_check_count();

// Targeted defect injection for fixtures and adversarial tests.
enum class CorruptMode : uint8_t {
    AddGenerator,       // element += generator
    SwapAdjacent,       // swap with the next element (previous if last)
    ReplaceWithRandom,  // fresh random scalar times the generator
    ZeroOut,            // element = zero point
    ScaleByTwo,         // element doubled
};
inline constexpr CorruptMode kAllCorruptModes[] = {
    CorruptMode::AddGenerator, CorruptMode::SwapAdjacent, CorruptMode::ReplaceWithRandom,
    CorruptMode::ZeroOut, CorruptMode::ScaleByTwo};
const char* corrupt_mode_name(CorruptMode mode);

// group_index 1 = G1, 2 = G2; element_index is 1-based. SwapAdjacent needs
// at least two elements in the group. Throws on out-of-range positions.
PowersOfTau corrupt_pp(const PowersOfTau& pp, CorruptMode mode, uint32_t group_index,
                       uint32_t element_index, Drbg& rng);

// Binary format: "TAUPPB" | version u8 | curve u8 | n u32be | k u32be |
// n G1 elements | k G2 elements. Zero elements are legal (corrupted strings
// must survive a round trip). Decode errors return nullopt.
Bytes pp_to_bytes(const PowersOfTau& pp);
std::optional<PowersOfTau> pp_from_bytes(const Bytes& data);
std::string pp_to_hex(const PowersOfTau& pp);
std::optional<PowersOfTau> pp_from_hex(const std::string& hex);

}  // namespace taulab
