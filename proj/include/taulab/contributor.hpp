#pragma once

#include <string>

#include "taulab/batch_operator.hpp"
#include "taulab/contract.hpp"
#include "taulab/drbg.hpp"

namespace taulab {

// Secrets of one contribution. The randomizer and signing key must be
// discarded after use in a real ceremony; they are returned so tests and
// debug tooling can trace the exponent algebra end to end.
struct ContributionSecrets {
    Fr r = Fr::zero();
    Fr sk = Fr::zero();
};

enum class ContributeStatus : uint8_t {
    Accepted = 0,
    LocalIllFormed = 1,    // fetched string failed the local well-formedness audit
    LocalDegenerate = 2,   // fetched string has a reset first power after round 0
    OperatorRejected = 3,  // server refused the submission
};

const char* contribute_status_name(ContributeStatus status);

struct ContributeResult {
    ContributeStatus status = ContributeStatus::OperatorRejected;
    // Filled when the local audit fails: exact defective element, ready to
    // feed the disprove flow if the same string was accepted on chain.
    PinpointResult pinpoint;
    // Server verdict; meaningful only when no local rejection happened.
    OffUpdateOutcome operator_outcome = OffUpdateOutcome::RejectedDimensions;
    Contribution sent;
    ContributionSecrets secrets;
    bool accepted() const { return status == ContributeStatus::Accepted; }
};

// Audits the server string, re-randomizes it, signs with a fresh key and
// submits. Never signs an ill-formed or degenerate string.
ContributeResult off_contribute(BatchOperator& op, Drbg& rng);

// Deterministic variant with caller-chosen exponents; r must not be zero.
ContributeResult off_contribute_with(BatchOperator& op, const Fr& r, const Fr& sk);

// Pure construction of one contribution against a fetched server state.
Contribution build_contribution(const PowersOfTau& pp, const G2& sigma_prv,
                                const G2& sigma_cur, const Fr& r, const Fr& sk);

// Shared core of the in-process and remote flows: audits the fetched string
// and, when it is signable, fills res.sent and res.secrets and returns true;
// otherwise records the local rejection (and pinpoint) and returns false.
bool prepare_contribution(const PowersOfTau& pp, const G2& sigma_prv, const G2& sigma_cur,
                          uint32_t base_round, const Fr& r, const Fr& sk,
                          ContributeResult& res);

enum class InclusionStatus : uint8_t {
    Included = 0,
    TranscriptMismatch = 1,    // operator string differs from the on-chain one
    IllFormed = 2,             // published string fails well-formedness
    PopInvalid = 3,            // some published key lacks a valid possession proof
    KeyAggregateMismatch = 4,  // key list does not open the claimed aggregate
    KeyAbsent = 5,             // own key censored from the list
};

const char* inclusion_status_name(InclusionStatus status);

struct InclusionReport {
    InclusionStatus status = InclusionStatus::KeyAbsent;
    PinpointResult pinpoint;  // filled for IllFormed
    bool included() const { return status == InclusionStatus::Included; }
};

// Checks that own contribution made it into the batch the chain accepted:
// byte-identical strings, well-formedness, every possession proof, the
// aggregate key opening against both the operator claim and the on-chain
// record, and finally own key presence.
InclusionReport check_inclusion(const PublishedBatch& published, const PowersOfTau& contract_pp,
                                const G1& contract_vk_cur, const G1& own_pk);

struct DisproveResult {
    bool proof_ready = false;
    FraudProof proof;       // valid only when proof_ready
    PinpointResult where;   // defective element the proof targets
    std::string note;
};

// Builds a fraud proof against accepted round t from public contract data.
// Aborts (proof_ready = false) if the logged string no longer matches the
// stored commitment or if the string is in fact well-formed.
DisproveResult disprove(const Contract& contract, uint32_t t);

// Proof of knowledge of the randomizer linking base to updated = r * base.
struct SchnorrProof {
    G1 commitment = G1::zero();
    Fr response = Fr::zero();
};

SchnorrProof schnorr_prove(const G1& base, const G1& updated, const Fr& r, Drbg& rng);
bool schnorr_verify(const G1& base, const G1& updated, const SchnorrProof& proof);

}  // namespace taulab
