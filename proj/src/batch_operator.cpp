#include "taulab/batch_operator.hpp"

#include <cmath>

namespace taulab {

G2 pop_hash_point(const G1& pk) { return hash_to_g2(g1_to_bytes(pk)); }

bool pop_check(const PopKey& key) {
    // The identity key signs nothing; reject it outright so a vacuous
    // pairing product cannot stand in for possession.
    if (key.pk == G1::zero()) return false;
    return multi_pair_check({{key.pk, pop_hash_point(key.pk), false},
                             {G1::generator(), key.pop, true}});
}

const char* off_update_outcome_name(OffUpdateOutcome outcome) {
    switch (outcome) {
        case OffUpdateOutcome::Accepted: return "accepted";
        case OffUpdateOutcome::RejectedDimensions: return "rejected: dimension mismatch";
        case OffUpdateOutcome::RejectedIllFormed: return "rejected: string ill-formed";
        case OffUpdateOutcome::RejectedDegenerate: return "rejected: degenerate first power";
        case OffUpdateOutcome::RejectedPop: return "rejected: proof of possession invalid";
        case OffUpdateOutcome::RejectedPrvChain: return "rejected: previous-keys signature chain";
        case OffUpdateOutcome::RejectedCurChain: return "rejected: aggregate signature chain";
        case OffUpdateOutcome::RejectedDuplicateKey: return "rejected: duplicate key";
    }
    return "unknown";
}

size_t BucketizedTranscript::total_contributions() const {
    size_t m = 0;
    for (const TranscriptChunk& c : chunks) m += c.keys.size();
    return m;
}

BatchOperator::BatchOperator(const Contract& contract, OperatorPolicy policy)
    : params_(contract.params()),
      policy_(policy),
      base_round_(contract.round()),
      vk_pre_base_(contract.vk_pre()),
      pp_(contract.fetch_pp(contract.round())),
      sigma_prv_(contract.sigma_prv()),
      vk_cur_(G1::generator()) {
    // The running aggregate starts at Q_1 of the head so that the stored
    // invariant e(I_G1, sigma_cur) = e(vk_cur, Q_1) holds before any
    // contribution: vk_cur starts at the generator. On the pristine head
    // this is the group generator itself.
    q1_base_ = pp_.g2_powers[0];
    sigma_cur_ = pp_.g2_powers[0];
}

OffUpdateResult BatchOperator::server_off_update(const Contribution& c) {
    OffUpdateResult res;
    if (c.pp.params() != params_) {
        res.outcome = OffUpdateOutcome::RejectedDimensions;
        return res;
    }
    // Fast batched predicate first; on failure pinpoint the exact element
    // to confirm the verdict and give the submitter actionable evidence.
    if (!wellform_check_batched(c.pp)) {
        res.outcome = OffUpdateOutcome::RejectedIllFormed;
        res.pinpoint = pinpoint_ill_formed(c.pp);
        return res;
    }
    if (!non_degen_check(c.pp)) {
        res.outcome = OffUpdateOutcome::RejectedDegenerate;
        return res;
    }
    if (policy_.verify_pops && !pop_check({c.pk, c.pop})) {
        res.outcome = OffUpdateOutcome::RejectedPop;
        return res;
    }
    const G2& q1_new = c.pp.g2_powers[0];
    // The previous-keys signature must re-randomize the stored key the
    // batch started from.
    if (!multi_pair_check(
            {{G1::generator(), c.sigma_prv, false}, {vk_pre_base_, q1_new, true}})) {
        res.outcome = OffUpdateOutcome::RejectedPrvChain;
        return res;
    }
    // The aggregate signature must open to the aggregate key including the
    // newcomer; this also forces the submission to chain from the current
    // server string rather than some fork.
    G1 vk_next = g1_add(vk_cur_, c.pk);
    if (!multi_pair_check({{G1::generator(), c.sigma_cur, false}, {vk_next, q1_new, true}})) {
        res.outcome = OffUpdateOutcome::RejectedCurChain;
        return res;
    }
    for (const PopKey& key : st_pk_) {
        if (key.pk == c.pk) {
            res.outcome = OffUpdateOutcome::RejectedDuplicateKey;
            return res;
        }
    }
    pp_ = c.pp;
    sigma_prv_ = c.sigma_prv;
    sigma_cur_ = c.sigma_cur;
    vk_cur_ = vk_next;
    st_pk_.push_back({c.pk, c.pop});
    boundaries_.push_back({sigma_prv_, sigma_cur_, vk_cur_, pp_.g2_powers[0]});
    res.outcome = OffUpdateOutcome::Accepted;
    return res;
}

BatchOperator::OnUpdateStatus BatchOperator::server_on_update(Contract& contract) const {
    if (contract.round() != base_round_) return OnUpdateStatus::Superseded;
    if (st_pk_.empty()) return OnUpdateStatus::EmptyBatch;
    UpdateSubmission sub{pp_, sigma_prv_, sigma_cur_, vk_cur_};
    return contract.update(sub) == UpdateOutcome::Accepted ? OnUpdateStatus::Accepted
                                                           : OnUpdateStatus::Rejected;
}

PublishedBatch BatchOperator::publish_stpk() const {
    return PublishedBatch{pp_, vk_cur_, st_pk_, base_round_};
}

FullTranscript BatchOperator::full_transcript() const {
    FullTranscript t;
    t.params = params_;
    t.base_round = base_round_;
    t.vk_pre_base = vk_pre_base_;
    t.q1_base = q1_base_;
    t.final_pp = pp_;
    t.keys = st_pk_;
    t.boundaries = boundaries_;
    return t;
}

BucketizedTranscript BatchOperator::bucketize_transcript() const {
    BucketizedTranscript t;
    t.params = params_;
    t.base_round = base_round_;
    t.vk_pre_base = vk_pre_base_;
    t.q1_base = q1_base_;
    t.final_pp = pp_;
    size_t m = st_pk_.size();
    size_t chunk = 1;
    while (chunk * chunk < m) chunk++;
    for (size_t start = 0; start < m; start += chunk) {
        size_t end = std::min(m, start + chunk);
        TranscriptChunk tc;
        tc.keys.assign(st_pk_.begin() + start, st_pk_.begin() + end);
        tc.end = boundaries_[end - 1];
        t.chunks.push_back(std::move(tc));
    }
    return t;
}

namespace {

// Shared progressive walk: feed it per-link key groups and end boundaries.
// Each link costs one pairing check; the aggregate key is recomputed from
// the keys, so a lying boundary key is caught before its pairing check.
struct ProgressiveWalk {
    G1 vk_running = G1::generator();
    uint32_t checks = 0;

    // Returns an empty string on success, else the failure reason.
    std::string link(const std::vector<PopKey>& keys, const AggregateBoundary& end) {
        for (const PopKey& key : keys) vk_running = g1_add(vk_running, key.pk);
        if (!(vk_running == end.vk_cur)) return "aggregate key does not match the key list";
        checks++;
        if (!multi_pair_check(
                {{G1::generator(), end.sigma_cur, false}, {vk_running, end.q1, true}}))
            return "aggregate signature chain check failed";
        return "";
    }
};

}  // namespace

TranscriptVerdict verify_bucketized_transcript(const BucketizedTranscript& t, const G1& own_pk) {
    TranscriptVerdict v;
    ProgressiveWalk walk;
    for (size_t c = 0; c < t.chunks.size(); c++) {
        std::string err = walk.link(t.chunks[c].keys, t.chunks[c].end);
        v.chunk_checks = walk.checks;
        if (!err.empty()) {
            v.first_bad_chunk = static_cast<uint32_t>(c + 1);
            v.reason = err;
            return v;
        }
    }
    v.chunk_checks = walk.checks;
    if (t.chunks.empty()) {
        v.reason = "empty transcript";
        return v;
    }
    if (!(t.chunks.back().end.q1 == t.final_pp.g2_powers[0])) {
        v.first_bad_chunk = static_cast<uint32_t>(t.chunks.size());
        v.reason = "final boundary does not match the published string";
        return v;
    }
    // Locate and audit own chunk: possession proofs for every key sharing it.
    size_t own_chunk = t.chunks.size();
    for (size_t c = 0; c < t.chunks.size() && own_chunk == t.chunks.size(); c++)
        for (const PopKey& key : t.chunks[c].keys)
            if (key.pk == own_pk) {
                own_chunk = c;
                break;
            }
    if (own_chunk == t.chunks.size()) {
        v.reason = "own key absent from every chunk";
        return v;
    }
    for (const PopKey& key : t.chunks[own_chunk].keys) {
        v.pop_checks++;
        if (!pop_check(key)) {
            v.first_bad_chunk = static_cast<uint32_t>(own_chunk + 1);
            v.reason = "proof of possession invalid in own chunk";
            return v;
        }
    }
    v.ok = true;
    return v;
}

TranscriptVerdict verify_full_transcript(const FullTranscript& t, const G1& own_pk) {
    TranscriptVerdict v;
    if (t.keys.size() != t.boundaries.size()) {
        v.reason = "key list and boundary list disagree";
        return v;
    }
    if (t.keys.empty()) {
        v.reason = "empty transcript";
        return v;
    }
    ProgressiveWalk walk;
    for (size_t i = 0; i < t.keys.size(); i++) {
        std::string err = walk.link({t.keys[i]}, t.boundaries[i]);
        v.chunk_checks = walk.checks;
        if (!err.empty()) {
            v.first_bad_chunk = static_cast<uint32_t>(i + 1);
            v.reason = err;
            return v;
        }
    }
    v.chunk_checks = walk.checks;
    if (!(t.boundaries.back().q1 == t.final_pp.g2_powers[0])) {
        v.first_bad_chunk = static_cast<uint32_t>(t.boundaries.size());
        v.reason = "final boundary does not match the published string";
        return v;
    }
    bool found = false;
    for (size_t i = 0; i < t.keys.size(); i++) {
        v.pop_checks++;
        if (!pop_check(t.keys[i])) {
            v.first_bad_chunk = static_cast<uint32_t>(i + 1);
            v.reason = "proof of possession invalid";
            return v;
        }
        if (t.keys[i].pk == own_pk) found = true;
    }
    if (!found) {
        v.reason = "own key absent";
        return v;
    }
    v.ok = true;
    return v;
}

}  // namespace taulab
