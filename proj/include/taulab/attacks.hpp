#pragma once

// Adversary lab: staged attacks that run against the production code paths,
// with the defense under study switchable at runtime (weakened "strawman"
// policy vs the hardened default). Each attack reports what the attacker
// achieved so tests and the CLI can show the full defense matrix.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "taulab/batch_operator.hpp"
#include "taulab/contract.hpp"
#include "taulab/contributor.hpp"
#include "taulab/drbg.hpp"

namespace taulab {

// Rogue key inside one batch: after an honest participant is aggregated,
// the attacker registers pk' - vk so the aggregate collapses to a key the
// attacker alone controls, then swaps in a string whose full exponent the
// attacker knows. Defense: the proof-of-possession check on every key.
struct IntraRogueReport {
    OffUpdateOutcome operator_verdict = OffUpdateOutcome::Accepted;
    bool operator_fooled = false;   // server aggregated the rogue key
    bool landed_on_chain = false;   // the hijacked batch was accepted on chain
    bool string_replaced = false;   // final string skips the victim's randomizer
    InclusionStatus victim_audit = InclusionStatus::Included;
    bool fooled() const { return operator_fooled && landed_on_chain && string_replaced; }
};
IntraRogueReport intra_rogue_key_attack(OperatorPolicy policy, Drbg& rng);

// Rogue key across batches: a direct on-chain submission with vk_cur set to
// pk2 - vk_pre and a zero previous-keys signature, which cancels all prior
// key material when the contract folds by plain addition. Defense: the
// random fold scalars, which make the cancellation miss with overwhelming
// probability. Each attempt uses fresh randomness.
struct InterRogueReport {
    uint32_t attempts = 0;
    uint32_t accepted = 0;
    UpdateOutcome first_verdict = UpdateOutcome::RejectedPairing;
    bool fooled() const { return accepted > 0; }
};
InterRogueReport inter_rogue_key_attack(ContractPolicy policy, uint32_t attempts, Drbg& rng);

// Ill-formed string injection: lands an update the contract accepts whose
// string carries one structural defect, exercising the optimistic gap the
// fraud-proof path exists to close.
enum class InjectMode : uint8_t {
    None = 0,           // honest control round, nothing to disprove
    AddGenerator = 1,
    SwapAdjacent = 2,
    ReplaceWithRandom = 3,
    ZeroOut = 4,
    ScaleByTwo = 5,
    InconsistentQ1 = 6,  // Q_1 scaled together with both signatures
};
extern const InjectMode kInjectCorruptModes[5];  // the five element corruptions
const char* inject_mode_name(InjectMode mode);
std::optional<InjectMode> inject_mode_from_name(const std::string& name);

struct InjectionReport {
    uint32_t round = 0;   // round the update landed as
    UpdateOutcome outcome = UpdateOutcome::RejectedMalformed;
    PinpointResult where;  // local audit of the landed string; !ill for None
};

// For the element corruptions, (group_index, element_index) names the
// target and must not be a first element: a naive change to P_1 or Q_1 is
// caught immediately by the on-chain checks, so those defect classes are
// reached via InconsistentQ1 instead. Indices are ignored for None and
// InconsistentQ1. Throws on untargetable positions.
InjectionReport inject_illformed(Contract& contract, InjectMode mode, uint32_t group_index,
                                 uint32_t element_index, Drbg& rng);

// Named end-to-end demonstrations for the CLI.
struct AttackInfo {
    std::string name;
    std::string summary;
};
std::vector<AttackInfo> list_attacks();

struct AttackRunResult {
    bool defenses_held = false;
    std::string report;  // multi-line story of what the attacker tried
};
// Throws std::invalid_argument for an unknown name.
AttackRunResult run_attack(const std::string& name, uint64_t seed);

}  // namespace taulab
