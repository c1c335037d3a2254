#include "taulab/contributor.hpp"

#include <stdexcept>

#include "taulab/veccom.hpp"

namespace taulab {

const char* contribute_status_name(ContributeStatus status) {
    switch (status) {
        case ContributeStatus::Accepted: return "accepted";
        case ContributeStatus::LocalIllFormed: return "local reject: string ill-formed";
        case ContributeStatus::LocalDegenerate: return "local reject: degenerate first power";
        case ContributeStatus::OperatorRejected: return "operator rejected";
    }
    return "unknown";
}

const char* inclusion_status_name(InclusionStatus status) {
    switch (status) {
        case InclusionStatus::Included: return "included";
        case InclusionStatus::TranscriptMismatch: return "published string differs from chain";
        case InclusionStatus::IllFormed: return "published string ill-formed";
        case InclusionStatus::PopInvalid: return "possession proof invalid";
        case InclusionStatus::KeyAggregateMismatch: return "aggregate key mismatch";
        case InclusionStatus::KeyAbsent: return "own key absent";
    }
    return "unknown";
}

Contribution build_contribution(const PowersOfTau& pp, const G2& sigma_prv,
                                const G2& sigma_cur, const Fr& r, const Fr& sk) {
    Contribution c;
    c.pp = apply_update(pp, r);
    c.pk = g1_mul(G1::generator(), sk);
    c.pop = g2_mul(pop_hash_point(c.pk), sk);
    const G2& q1_new = c.pp.g2_powers[0];
    c.sigma_prv = g2_mul(sigma_prv, r);
    // Re-randomize the running aggregate signature with r, then fold the
    // new key in over the updated Q_1.
    c.sigma_cur = g2_add(g2_mul(sigma_cur, r), g2_mul(q1_new, sk));
    return c;
}

bool prepare_contribution(const PowersOfTau& pp, const G2& sigma_prv, const G2& sigma_cur,
                          uint32_t base_round, const Fr& r, const Fr& sk,
                          ContributeResult& res) {
    if (r == Fr::zero()) throw std::invalid_argument("randomizer must be nonzero");
    res.secrets = {r, sk};
    // Never sign a string that fails the local audit: a signature over an
    // ill-formed string would lend it a valid knowledge check.
    if (!wellform_check_batched(pp)) {
        res.status = ContributeStatus::LocalIllFormed;
        res.pinpoint = pinpoint_ill_formed(pp);
        return false;
    }
    // After the first accepted round the first power must have left the
    // generator; finding it reset means someone rolled the string back.
    if (base_round > 0 && pp.g1_powers[0] == G1::generator()) {
        res.status = ContributeStatus::LocalDegenerate;
        return false;
    }
    res.sent = build_contribution(pp, sigma_prv, sigma_cur, r, sk);
    return true;
}

ContributeResult off_contribute_with(BatchOperator& op, const Fr& r, const Fr& sk) {
    ContributeResult res;
    if (!prepare_contribution(op.pp(), op.sigma_prv(), op.sigma_cur(), op.base_round(), r, sk,
                              res))
        return res;
    OffUpdateResult out = op.server_off_update(res.sent);
    res.operator_outcome = out.outcome;
    res.status = out.accepted() ? ContributeStatus::Accepted : ContributeStatus::OperatorRejected;
    if (out.outcome == OffUpdateOutcome::RejectedIllFormed) res.pinpoint = out.pinpoint;
    return res;
}

ContributeResult off_contribute(BatchOperator& op, Drbg& rng) {
    Fr r = random_fr_nonzero(rng);
    Fr sk = random_fr_nonzero(rng);
    return off_contribute_with(op, r, sk);
}

InclusionReport check_inclusion(const PublishedBatch& published, const PowersOfTau& contract_pp,
                                const G1& contract_vk_cur, const G1& own_pk) {
    InclusionReport rep;
    if (pp_to_bytes(published.pp) != pp_to_bytes(contract_pp)) {
        rep.status = InclusionStatus::TranscriptMismatch;
        return rep;
    }
    if (!wellform_check_batched(published.pp)) {
        rep.status = InclusionStatus::IllFormed;
        rep.pinpoint = pinpoint_ill_formed(published.pp);
        return rep;
    }
    for (const PopKey& key : published.st_pk) {
        if (!pop_check(key)) {
            rep.status = InclusionStatus::PopInvalid;
            return rep;
        }
    }
    G1 vk = G1::generator();
    for (const PopKey& key : published.st_pk) vk = g1_add(vk, key.pk);
    if (!(vk == published.vk_cur) || !(vk == contract_vk_cur)) {
        rep.status = InclusionStatus::KeyAggregateMismatch;
        return rep;
    }
    for (const PopKey& key : published.st_pk) {
        if (key.pk == own_pk) {
            rep.status = InclusionStatus::Included;
            return rep;
        }
    }
    rep.status = InclusionStatus::KeyAbsent;
    return rep;
}

DisproveResult disprove(const Contract& contract, uint32_t t) {
    DisproveResult res;
    if (t < 1 || t > contract.round()) {
        res.note = "round is not on the current chain";
        return res;
    }
    const UpdateRecord& rec = contract.fetch_record(t);
    // The proof opens elements against the stored commitment; if the logged
    // string no longer hashes to it the evidence base is gone.
    if (!(commit_pp(rec.sub.pp) == contract.compp_history()[t - 1])) {
        res.note = "logged string does not match the stored commitment";
        return res;
    }
    res.where = pinpoint_ill_formed(rec.sub.pp);
    if (!res.where.ill) {
        res.note = "string is well-formed; nothing to disprove";
        return res;
    }
    res.proof = build_fraud_proof(rec.sub.pp, t, res.where);
    res.proof_ready = true;
    res.note = "fraud proof ready";
    return res;
}

namespace {

Fr schnorr_challenge(const G1& updated, const G1& base, const G1& commitment) {
    Bytes buf;
    Bytes u = g1_to_bytes(updated);
    Bytes b = g1_to_bytes(base);
    Bytes c = g1_to_bytes(commitment);
    buf.insert(buf.end(), u.begin(), u.end());
    buf.insert(buf.end(), b.begin(), b.end());
    buf.insert(buf.end(), c.begin(), c.end());
    return hash_to_scalar(buf);
}

}  // namespace

SchnorrProof schnorr_prove(const G1& base, const G1& updated, const Fr& r, Drbg& rng) {
    Fr z = random_fr_nonzero(rng);
    SchnorrProof proof;
    proof.commitment = g1_mul(base, z);
    Fr h = schnorr_challenge(updated, base, proof.commitment);
    proof.response = z + h * r;
    return proof;
}

bool schnorr_verify(const G1& base, const G1& updated, const SchnorrProof& proof) {
    Fr h = schnorr_challenge(updated, base, proof.commitment);
    return g1_mul(base, proof.response) == g1_add(proof.commitment, g1_mul(updated, h));
}

}  // namespace taulab
