#pragma once

// Single-writer contract simulator for the on-chain side of the ceremony.
// Updates are optimistic: the contract verifies only the aggregated
// knowledge check and non-degeneracy, commits to the submitted string, and
// leaves well-formedness to off-chain challengers, who can rewind an
// accepted round with a succinct fraud proof. Every state transition is
// logged and metered; replaying a log reconstructs state and gas exactly.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "taulab/gas.hpp"
#include "taulab/pot.hpp"
#include "taulab/veccom.hpp"

namespace taulab {

struct UpdateSubmission {
    PowersOfTau pp;
    G2 sigma_prv;  // stored key re-randomized by the batch scalar
    G2 sigma_cur;  // aggregated knowledge signature for the new contributions
    G1 vk_cur;     // aggregated verification key for the new contributions
    bool operator==(const UpdateSubmission&) const = default;
};

enum class UpdateOutcome : uint8_t {
    Accepted = 0,
    RejectedMalformed = 1,   // dimension mismatch
    RejectedPairing = 2,     // aggregated knowledge check failed
    RejectedDegenerate = 3,  // first power is the generator or zero
};
const char* update_outcome_name(UpdateOutcome outcome);

struct UpdateRecord {
    uint32_t round = 0;  // the round this submission targeted (current + 1)
    UpdateSubmission sub;
    UpdateOutcome outcome = UpdateOutcome::RejectedMalformed;
    Fr rho1, rho2;       // the fold scalars the contract derived
    Commitment compp{};  // commitment stored on acceptance
    uint64_t gas_charged = 0;
    bool voided = false;  // acceptance undone by a later fraud rewind
    bool accepted() const { return outcome == UpdateOutcome::Accepted; }
};

// A challenge names one allegedly ill-formed element of an accepted round
// and carries membership proofs for the elements the verifier must inspect:
// always P_1 and Q_1, plus the claimed element and its predecessor.
struct FraudProof {
    uint32_t t = 0;              // challenged round, 1-based
    uint32_t group_index = 0;    // 1 = G1 chain, 2 = G2 chain
    uint32_t element_index = 0;  // claimed ill element, 1-based
    std::vector<MembershipProof> proofs;
    bool operator==(const FraudProof&) const = default;
};

// Off-chain helper: assemble the proof set for a pinpointed defect of the
// full string pp (as accepted in round t). Throws if the result says
// well-formed or the position is out of range.
FraudProof build_fraud_proof(const PowersOfTau& pp, uint32_t t, const PinpointResult& where);

Bytes fraud_proof_to_bytes(const FraudProof& proof);
std::optional<FraudProof> fraud_proof_from_bytes(const Bytes& data);

struct SetupEntry {
    CeremonyParams params;
    uint64_t gas = 0;
};
struct UpdateEntry {
    UpdateSubmission sub;
    UpdateOutcome outcome = UpdateOutcome::RejectedMalformed;
    uint64_t gas = 0;
};
struct FraudEntry {
    FraudProof proof;
    bool accepted = false;
    uint64_t gas = 0;
};
using LogEntry = std::variant<SetupEntry, UpdateEntry, FraudEntry>;

// Verifier predicate toggles for adversarial experiments. Production is the
// default; the plain-sum fold is a deliberately weakened variant that skips
// the random fold scalars when combining the stored and submitted keys.
struct ContractPolicy {
    bool rho_fold = true;
    bool operator==(const ContractPolicy&) const = default;
};

class Contract {
  public:
    Contract(const CeremonyParams& params, GasSchedule sched = {}, ContractPolicy policy = {});

    UpdateOutcome update(const UpdateSubmission& sub);
    // Pure check of a challenge against the current chain; spends no gas.
    bool fraud_verify(const FraudProof& proof) const;
    // Applies the challenge: on success rewinds to round t - 1, voiding the
    // challenged round and everything after it. Charges gas either way.
    bool recv_fraud(const FraudProof& proof);

    const CeremonyParams& params() const { return params_; }
    const ContractPolicy& policy() const { return policy_; }
    uint32_t round() const { return static_cast<uint32_t>(compp_.size()); }
    const G1& vk_pre() const { return vk_pre_; }
    const G2& sigma_prv() const { return sigma_prv_; }
    const std::vector<Commitment>& compp_history() const { return compp_; }

    // Round t as submitted; t = 0 is the pristine string. Voided rounds stay
    // readable from the log; check the record's voided flag. Throws on a
    // round that was never accepted.
    PowersOfTau fetch_pp(uint32_t t) const;
    const UpdateRecord& fetch_record(uint32_t t) const;
    const std::vector<UpdateRecord>& records() const { return records_; }

    uint64_t gas_total() const { return gas_.total(); }
    const CostReport& gas_report() const { return gas_; }
    const GasSchedule& schedule() const { return sched_; }

    const std::vector<LogEntry>& log() const { return log_; }
    Bytes serialize_log() const;
    std::string log_json_lines() const;  // human-readable mirror of the log

    // Canonical serialization of the live state (params, round, keys,
    // commitment chain, snapshots); equal bytes mean equal state.
    Bytes state_bytes() const;
    Digest state_digest() const;

    // Re-executes a serialized log from scratch. Throws if the log is
    // malformed or the recorded outcomes and gas do not reproduce.
    static Contract replay(const Bytes& log_bytes, GasSchedule sched = {},
                           ContractPolicy policy = {});

  private:
    struct Snapshot {
        G1 vk_pre;
        G2 sigma_prv;
    };

    void derive_rhos(const UpdateSubmission& sub, Fr& rho1, Fr& rho2) const;
    uint64_t charge(const CostReport& report);

    CeremonyParams params_;
    GasSchedule sched_;
    ContractPolicy policy_;
    G1 vk_pre_;
    G2 sigma_prv_;
    std::vector<Commitment> compp_;
    std::vector<Snapshot> snapshots_;  // snapshots_[t] = state after round t
    std::vector<UpdateRecord> records_;
    std::vector<LogEntry> log_;
    CostReport gas_;
};

}  // namespace taulab
