#include "taulab/attacks.hpp"

#include <sstream>
#include <stdexcept>

namespace taulab {

namespace {

// Honest single-contributor submission straight against the contract head,
// used to give attack scenarios a meaningful history to subvert.
UpdateSubmission honest_update(const Contract& c, const Fr& r, const Fr& sk) {
    UpdateSubmission sub;
    PowersOfTau head = c.fetch_pp(c.round());
    sub.pp = apply_update(head, r);
    const G2& q1_new = sub.pp.g2_powers[0];
    sub.sigma_prv = g2_mul(c.sigma_prv(), r);
    sub.sigma_cur = g2_add(g2_mul(q1_new, Fr::one()), g2_mul(q1_new, sk));
    sub.vk_cur = g1_add(G1::generator(), g1_mul(G1::generator(), sk));
    return sub;
}

}  // namespace

IntraRogueReport intra_rogue_key_attack(OperatorPolicy policy, Drbg& rng) {
    IntraRogueReport rep;
    Contract contract(CeremonyParams{4, 3});
    PowersOfTau head = contract.fetch_pp(0);
    BatchOperator op(contract, policy);

    // An honest victim goes first and is aggregated normally.
    ContributeResult victim = off_contribute(op, rng);
    if (!victim.accepted()) throw std::logic_error("victim contribution must aggregate");

    // The attacker picks a key pair it fully controls and registers the
    // difference to the running aggregate, so vk collapses to pk_target.
    Fr sk_target = random_fr_nonzero(rng);
    G1 pk_target = g1_mul(G1::generator(), sk_target);
    G1 pk_rogue = g1_sub(pk_target, op.vk_cur());

    // The submitted string is built from the contract head with a fresh
    // randomizer, silently discarding the victim's re-randomization. Only
    // the aggregate signature ties strings to the batch, and the attacker
    // can now sign anything with sk_target alone.
    Fr r_attacker = random_fr_nonzero(rng);
    Contribution c;
    c.pp = apply_update(head, r_attacker);
    c.pk = pk_rogue;
    // No possession proof for pk_rogue exists; this one is shaped right
    // but signs with the wrong scalar.
    c.pop = g2_mul(pop_hash_point(pk_rogue), sk_target);
    c.sigma_prv = g2_mul(contract.sigma_prv(), r_attacker);
    c.sigma_cur = g2_mul(c.pp.g2_powers[0], sk_target);

    OffUpdateResult verdict = op.server_off_update(c);
    rep.operator_verdict = verdict.outcome;
    rep.operator_fooled = verdict.accepted();
    if (!rep.operator_fooled) return rep;

    rep.landed_on_chain =
        op.server_on_update(contract) == BatchOperator::OnUpdateStatus::Accepted;
    if (!rep.landed_on_chain) return rep;

    // The chain now carries a string whose entire exponent the attacker
    // knows, with the victim's randomizer gone.
    rep.string_replaced = contract.fetch_pp(1) == apply_update(head, r_attacker);

    // The victim's own audit of the published batch: the key list still
    // names them, but the rogue key cannot carry a possession proof.
    rep.victim_audit = check_inclusion(op.publish_stpk(), contract.fetch_pp(1),
                                       contract.fetch_record(1).sub.vk_cur, victim.sent.pk)
                           .status;
    return rep;
}

InterRogueReport inter_rogue_key_attack(ContractPolicy policy, uint32_t attempts, Drbg& rng) {
    InterRogueReport rep;
    Contract contract(CeremonyParams{4, 3}, GasSchedule{}, policy);
    // Give the chain a real round so vk_pre holds honest key material.
    if (contract.update(honest_update(contract, random_fr_nonzero(rng),
                                      random_fr_nonzero(rng))) != UpdateOutcome::Accepted)
        throw std::logic_error("honest seed round must land");

    for (uint32_t i = 0; i < attempts; i++) {
        Fr r = random_fr_nonzero(rng);
        Fr sk2 = random_fr_nonzero(rng);
        UpdateSubmission sub;
        sub.pp = apply_update(contract.fetch_pp(contract.round()), r);
        const G2& q1_new = sub.pp.g2_powers[0];
        // vk_cur cancels the stored key under plain addition; the zero
        // previous-keys signature matches that cancellation, and the
        // aggregate signature opens pk2 alone.
        sub.vk_cur = g1_sub(g1_mul(G1::generator(), sk2), contract.vk_pre());
        sub.sigma_prv = G2::zero();
        sub.sigma_cur = g2_mul(q1_new, sk2);

        UpdateOutcome out = contract.update(sub);
        if (i == 0) rep.first_verdict = out;
        rep.attempts++;
        if (out == UpdateOutcome::Accepted) rep.accepted++;
    }
    return rep;
}

const InjectMode kInjectCorruptModes[5] = {
    InjectMode::AddGenerator, InjectMode::SwapAdjacent, InjectMode::ReplaceWithRandom,
    InjectMode::ZeroOut, InjectMode::ScaleByTwo,
};

const char* inject_mode_name(InjectMode mode) {
    switch (mode) {
        case InjectMode::None: return "none";
        case InjectMode::AddGenerator: return "add-generator";
        case InjectMode::SwapAdjacent: return "swap-adjacent";
        case InjectMode::ReplaceWithRandom: return "replace-with-random";
        case InjectMode::ZeroOut: return "zero-out";
        case InjectMode::ScaleByTwo: return "scale-by-two";
        case InjectMode::InconsistentQ1: return "inconsistent-q1";
    }
    return "unknown";
}

std::optional<InjectMode> inject_mode_from_name(const std::string& name) {
    for (InjectMode m : {InjectMode::None, InjectMode::AddGenerator, InjectMode::SwapAdjacent,
                         InjectMode::ReplaceWithRandom, InjectMode::ZeroOut,
                         InjectMode::ScaleByTwo, InjectMode::InconsistentQ1})
        if (name == inject_mode_name(m)) return m;
    return std::nullopt;
}

namespace {

CorruptMode to_corrupt_mode(InjectMode mode) {
    switch (mode) {
        case InjectMode::AddGenerator: return CorruptMode::AddGenerator;
        case InjectMode::SwapAdjacent: return CorruptMode::SwapAdjacent;
        case InjectMode::ReplaceWithRandom: return CorruptMode::ReplaceWithRandom;
        case InjectMode::ZeroOut: return CorruptMode::ZeroOut;
        case InjectMode::ScaleByTwo: return CorruptMode::ScaleByTwo;
        default: throw std::invalid_argument("not an element corruption mode");
    }
}

}  // namespace

InjectionReport inject_illformed(Contract& contract, InjectMode mode, uint32_t group_index,
                                 uint32_t element_index, Drbg& rng) {
    Fr r = random_fr_nonzero(rng);
    Fr sk = random_fr_nonzero(rng);
    UpdateSubmission sub = honest_update(contract, r, sk);

    if (mode == InjectMode::InconsistentQ1) {
        // Scale Q_1 and both signatures together: the knowledge check sees
        // both sides move in lockstep, but Q_1 no longer matches P_1.
        Fr two = Fr::from_u64(2);
        sub.pp.g2_powers[0] = g2_mul(sub.pp.g2_powers[0], two);
        sub.sigma_prv = g2_mul(sub.sigma_prv, two);
        sub.sigma_cur = g2_mul(sub.sigma_cur, two);
    } else if (mode != InjectMode::None) {
        if (group_index == 1 && element_index == 1)
            throw std::invalid_argument("the first power enters the degeneracy check");
        if (group_index == 2 && element_index == 1)
            throw std::invalid_argument("Q_1 enters the knowledge check; use inconsistent-q1");
        sub.pp = corrupt_pp(sub.pp, to_corrupt_mode(mode), group_index, element_index, rng);
    }

    InjectionReport rep;
    rep.outcome = contract.update(sub);
    rep.round = contract.round();
    if (rep.outcome == UpdateOutcome::Accepted)
        rep.where = pinpoint_ill_formed(contract.fetch_pp(rep.round));
    return rep;
}

namespace {

constexpr uint32_t kInterAttempts = 100;

AttackRunResult run_intra(uint64_t seed) {
    std::ostringstream out;
    Drbg lax_rng = Drbg::from_u64(seed, 1);
    Drbg strict_rng = Drbg::from_u64(seed, 2);
    IntraRogueReport lax = intra_rogue_key_attack(OperatorPolicy{false}, lax_rng);
    IntraRogueReport strict = intra_rogue_key_attack(OperatorPolicy{true}, strict_rng);
    out << "intra-batch rogue key: register pk' - vk so the aggregate collapses\n";
    out << "to an attacker-controlled key, then replace the string wholesale.\n";
    out << "  possession checks off: server verdict = "
        << off_update_outcome_name(lax.operator_verdict)
        << (lax.fooled() ? "; batch hijacked, victim randomizer erased\n"
                         : "; attack failed\n");
    if (lax.fooled())
        out << "  victim's own audit of the published batch: "
            << inclusion_status_name(lax.victim_audit) << "\n";
    out << "  possession checks on:  server verdict = "
        << off_update_outcome_name(strict.operator_verdict) << "\n";
    bool held = lax.fooled() && lax.victim_audit == InclusionStatus::PopInvalid &&
                !strict.fooled() &&
                strict.operator_verdict == OffUpdateOutcome::RejectedPop;
    out << (held ? "defense held: possession proof requirement blocks the rogue key"
                 : "DEFENSE FAILED");
    return {held, out.str()};
}

AttackRunResult run_inter(uint64_t seed) {
    std::ostringstream out;
    Drbg plain_rng = Drbg::from_u64(seed, 1);
    Drbg fold_rng = Drbg::from_u64(seed, 2);
    InterRogueReport plain = inter_rogue_key_attack(ContractPolicy{false}, 1, plain_rng);
    InterRogueReport fold =
        inter_rogue_key_attack(ContractPolicy{true}, kInterAttempts, fold_rng);
    out << "inter-batch rogue key: submit vk_cur = pk2 - vk_pre with a zero\n";
    out << "previous-keys signature to cancel all prior key material.\n";
    out << "  plain-sum folding: " << plain.accepted << "/" << plain.attempts
        << " attempts accepted (verdict " << update_outcome_name(plain.first_verdict)
        << ")\n";
    out << "  randomized folding: " << fold.accepted << "/" << fold.attempts
        << " attempts accepted\n";
    bool held = plain.fooled() && fold.accepted == 0;
    out << (held ? "defense held: random fold scalars break the cancellation"
                 : "DEFENSE FAILED");
    return {held, out.str()};
}

AttackRunResult run_injection(uint64_t seed, InjectMode mode, uint32_t gi, uint32_t ei) {
    std::ostringstream out;
    Drbg rng = Drbg::from_u64(seed, 3);
    Contract contract(CeremonyParams{4, 3});
    InjectionReport honest = inject_illformed(contract, InjectMode::None, 0, 0, rng);
    InjectionReport bad = inject_illformed(contract, mode, gi, ei, rng);
    out << "ill-formed injection (" << inject_mode_name(mode)
        << "): the optimistic on-chain checks accept the update";
    if (mode != InjectMode::None && gi != 0) {
        out << " with a defect at group " << gi << " element " << ei;
    }
    out << ".\n";
    out << "  honest control round " << honest.round << ": "
        << update_outcome_name(honest.outcome)
        << (honest.where.ill ? " (unexpected defect!)" : ", audit clean") << "\n";
    out << "  attack round " << bad.round << ": " << update_outcome_name(bad.outcome);
    bool held = honest.outcome == UpdateOutcome::Accepted && !honest.where.ill &&
                bad.outcome == UpdateOutcome::Accepted && bad.where.ill;
    if (bad.outcome == UpdateOutcome::Accepted && bad.where.ill) {
        out << ", audit pinpoints group " << bad.where.group_index << " element "
            << bad.where.element_index << "\n";
        DisproveResult dis = disprove(contract, bad.round);
        bool rewound = dis.proof_ready && contract.recv_fraud(dis.proof);
        out << "  fraud proof: " << dis.note << (rewound ? "; accepted, round rewound\n"
                                                         : "; REJECTED\n");
        held = held && rewound && contract.round() == bad.round - 1;
        // The chain must remain usable: an honest resubmission lands.
        InjectionReport redo = inject_illformed(contract, InjectMode::None, 0, 0, rng);
        out << "  honest resubmission: " << update_outcome_name(redo.outcome);
        held = held && redo.outcome == UpdateOutcome::Accepted;
    } else {
        out << "\n";
    }
    out << "\n" << (held ? "defense held: the fraud path undoes the accepted defect"
                         : "DEFENSE FAILED");
    return {held, out.str()};
}

}  // namespace

std::vector<AttackInfo> list_attacks() {
    return {
        {"intra-batch-rogue-key",
         "collapse one batch's aggregate key to an attacker key; blocked by "
         "possession proofs"},
        {"inter-batch-rogue-key",
         "cancel the stored key across rounds with a crafted submission; blocked "
         "by randomized folding"},
        {"illformed-injection",
         "land a structurally defective string past the optimistic checks; undone "
         "by a fraud proof"},
        {"inconsistent-q1-injection",
         "scale Q_1 and both signatures in lockstep past the knowledge check; "
         "undone by a fraud proof on the first relation"},
    };
}

AttackRunResult run_attack(const std::string& name, uint64_t seed) {
    if (name == "intra-batch-rogue-key") return run_intra(seed);
    if (name == "inter-batch-rogue-key") return run_inter(seed);
    if (name == "illformed-injection")
        return run_injection(seed, InjectMode::AddGenerator, 1, 3);
    if (name == "inconsistent-q1-injection")
        return run_injection(seed, InjectMode::InconsistentQ1, 0, 0);
    throw std::invalid_argument("unknown attack: " + name);
}

}  // namespace taulab
