#pragma once

// Off-chain aggregation server. One batch lifetime: snapshot the contract
// head, accept a stream of individually verified contributions (each
// re-randomizes the string and folds a proof-of-possession key into the
// running aggregates), then push a single on-chain update. The server also
// publishes transcripts: the full per-contribution history, and a bucketized
// form that lets a contributor audit in O(sqrt(M)) pairing checks.

#include <cstdint>
#include <string>
#include <vector>

#include "taulab/contract.hpp"
#include "taulab/pot.hpp"

namespace taulab {

struct PopKey {
    G1 pk;
    G2 pop;  // sk * hash_to_g2(pk bytes)
    bool operator==(const PopKey&) const = default;
};

// Proof-of-possession check: e(pk, H(pk)) = e(I_G1, pop).
bool pop_check(const PopKey& key);
G2 pop_hash_point(const G1& pk);  // H(pk), the G2 point the key must sign

// One contributor's message to the server.
struct Contribution {
    PowersOfTau pp;  // re-randomized string
    G2 sigma_prv;    // previous-keys signature, scaled by the contributor's r
    G2 sigma_cur;    // running aggregate signature including this key
    G1 pk;
    G2 pop;
    bool operator==(const Contribution&) const = default;
};

enum class OffUpdateOutcome : uint8_t {
    Accepted = 0,
    RejectedDimensions,
    RejectedIllFormed,
    RejectedDegenerate,
    RejectedPop,
    RejectedPrvChain,  // sigma_prv' does not re-randomize the base stored key
    RejectedCurChain,  // sigma_cur' does not match the new aggregate key
    RejectedDuplicateKey,
};
const char* off_update_outcome_name(OffUpdateOutcome outcome);

struct OffUpdateResult {
    OffUpdateOutcome outcome = OffUpdateOutcome::Accepted;
    PinpointResult pinpoint;  // filled when the string was ill-formed
    bool accepted() const { return outcome == OffUpdateOutcome::Accepted; }
};

// Aggregates as they stood after one accepted contribution, together with
// the Q_1 of the string at that point. These boundary values are what the
// progressive transcript checks re-verify.
struct AggregateBoundary {
    G2 sigma_prv;
    G2 sigma_cur;
    G1 vk_cur;
    G2 q1;
    bool operator==(const AggregateBoundary&) const = default;
};

struct FullTranscript {
    CeremonyParams params;
    uint32_t base_round = 0;
    G1 vk_pre_base;
    G2 q1_base;
    PowersOfTau final_pp;
    std::vector<PopKey> keys;
    std::vector<AggregateBoundary> boundaries;  // one per contribution
};

struct TranscriptChunk {
    std::vector<PopKey> keys;
    AggregateBoundary end;  // aggregates after the chunk's last contribution
};

struct BucketizedTranscript {
    CeremonyParams params;
    uint32_t base_round = 0;
    G1 vk_pre_base;
    G2 q1_base;
    PowersOfTau final_pp;
    std::vector<TranscriptChunk> chunks;  // chunk size ceil(sqrt(M)), last short
    size_t total_contributions() const;
};

struct OperatorPolicy {
    bool verify_pops = true;  // false = deliberately weakened strawman
    bool operator==(const OperatorPolicy&) const = default;
};

// The published state-and-keys snapshot contributors audit against.
struct PublishedBatch {
    PowersOfTau pp;
    G1 vk_cur;
    std::vector<PopKey> st_pk;
    uint32_t base_round = 0;
};

class BatchOperator {
  public:
    explicit BatchOperator(const Contract& contract, OperatorPolicy policy = {});

    // Verifies one contribution against the running state; on acceptance
    // the string, aggregates, and key list advance.
    OffUpdateResult server_off_update(const Contribution& c);

    enum class OnUpdateStatus : uint8_t { Accepted, Rejected, Superseded, EmptyBatch };
    // Pushes the aggregate on chain. Refuses an empty batch, and reports
    // the batch as superseded when the contract advanced past its base.
    OnUpdateStatus server_on_update(Contract& contract) const;

    PublishedBatch publish_stpk() const;
    FullTranscript full_transcript() const;
    BucketizedTranscript bucketize_transcript() const;

    const CeremonyParams& params() const { return params_; }
    const PowersOfTau& pp() const { return pp_; }
    const G2& sigma_prv() const { return sigma_prv_; }
    const G2& sigma_cur() const { return sigma_cur_; }
    const G1& vk_cur() const { return vk_cur_; }
    const std::vector<PopKey>& st_pk() const { return st_pk_; }
    uint32_t base_round() const { return base_round_; }
    const G1& vk_pre_base() const { return vk_pre_base_; }
    const OperatorPolicy& policy() const { return policy_; }

  private:
    CeremonyParams params_;
    OperatorPolicy policy_;
    uint32_t base_round_ = 0;
    G1 vk_pre_base_;  // contract vk_pre at setup; anchors the prv-chain check
    G2 q1_base_;
    PowersOfTau pp_;
    G2 sigma_prv_;
    G2 sigma_cur_;
    G1 vk_cur_;
    std::vector<PopKey> st_pk_;
    std::vector<AggregateBoundary> boundaries_;
};

// Transcript audits. Both verifiers report the first chunk (1-based; 0 =
// none) at which the progressive chain breaks, and count their pairing
// checks so tests can pin the O(sqrt(M)) claim.
struct TranscriptVerdict {
    bool ok = false;
    uint32_t first_bad_chunk = 0;
    std::string reason;
    uint32_t pop_checks = 0;
    uint32_t chunk_checks = 0;
};

// O(sqrt(M)): one progressive check per chunk, PoP checks only for the
// chunk containing own_pk.
TranscriptVerdict verify_bucketized_transcript(const BucketizedTranscript& t, const G1& own_pk);
// O(M): every PoP and every per-contribution progressive check.
TranscriptVerdict verify_full_transcript(const FullTranscript& t, const G1& own_pk);

}  // namespace taulab
