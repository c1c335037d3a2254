#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "taulab/batch_operator.hpp"

using namespace taulab;

namespace {

const CeremonyParams kParams{4, 3};

// Longhand contribution built from the operator's published state, mirroring
// what an honest client does: re-randomize, sign the previous-keys chain,
// fold a fresh key into the aggregate signature.
Contribution make_contribution(const BatchOperator& op, const Fr& r, const Fr& sk) {
    Contribution c;
    c.pp = apply_update(op.pp(), r);
    c.pk = g1_mul(G1::generator(), sk);
    c.pop = g2_mul(pop_hash_point(c.pk), sk);
    c.sigma_prv = g2_mul(op.sigma_prv(), r);
    c.sigma_cur = g2_add(g2_mul(op.sigma_cur(), r), g2_mul(c.pp.g2_powers[0], sk));
    return c;
}

bool operator_invariants(const BatchOperator& op) {
    // Aggregate signature opens to the aggregate key over the live Q_1,
    // and the previous-keys signature still re-randomizes the base key.
    const G2& q1 = op.pp().g2_powers[0];
    bool cur = multi_pair_check(
        {{G1::generator(), op.sigma_cur(), false}, {op.vk_cur(), q1, true}});
    bool prv = multi_pair_check(
        {{G1::generator(), op.sigma_prv(), false}, {op.vk_pre_base(), q1, true}});
    return cur && prv;
}

struct OperatorSnapshot {
    Bytes pp;
    Bytes sigma_prv, sigma_cur;
    Bytes vk_cur;
    size_t keys;
};

OperatorSnapshot snapshot(const BatchOperator& op) {
    return {pp_to_bytes(op.pp()), g2_to_bytes(op.sigma_prv()), g2_to_bytes(op.sigma_cur()),
            g1_to_bytes(op.vk_cur()), op.st_pk().size()};
}

bool same_state(const OperatorSnapshot& a, const OperatorSnapshot& b) {
    return a.pp == b.pp && a.sigma_prv == b.sigma_prv && a.sigma_cur == b.sigma_cur &&
           a.vk_cur == b.vk_cur && a.keys == b.keys;
}

// Drives `count` random accepted contributions through a fresh operator on
// the given contract; returns the secrets for oracle cross-checks.
std::vector<std::pair<Fr, Fr>> drive_batch(BatchOperator& op, size_t count, Drbg& rng) {
    std::vector<std::pair<Fr, Fr>> secrets;
    for (size_t i = 0; i < count; i++) {
        Fr r = random_fr_nonzero(rng);
        Fr sk = random_fr_nonzero(rng);
        REQUIRE(op.server_off_update(make_contribution(op, r, sk)).accepted());
        secrets.push_back({r, sk});
    }
    return secrets;
}

}  // namespace

TEST_CASE("proof of possession accepts ownership and rejects the rest") {
    Fr sk = Fr::from_u64(42);
    PopKey key;
    key.pk = g1_mul(G1::generator(), sk);
    key.pop = g2_mul(pop_hash_point(key.pk), sk);
    CHECK(pop_check(key));

    PopKey wrong = key;
    wrong.pop = g2_mul(wrong.pop, Fr::from_u64(2));
    CHECK_FALSE(pop_check(wrong));

    // A proof borrowed from a different key signs the wrong hash point.
    Fr other = Fr::from_u64(43);
    PopKey borrowed;
    borrowed.pk = g1_mul(G1::generator(), other);
    borrowed.pop = key.pop;
    CHECK_FALSE(pop_check(borrowed));

    // The identity key is rejected outright even with a zero signature,
    // which would otherwise pass as an empty pairing product.
    PopKey identity{G1::zero(), G2::zero()};
    CHECK_FALSE(pop_check(identity));
}

TEST_CASE("setup snapshots the contract head with consistent aggregates") {
    Contract c(kParams);
    BatchOperator op(c);
    CHECK(op.base_round() == 0);
    CHECK(op.pp() == init_pp(kParams));
    CHECK(op.sigma_prv() == c.sigma_prv());
    CHECK(op.sigma_cur() == op.pp().g2_powers[0]);  // empty aggregate over Q_1
    CHECK(op.vk_cur() == G1::generator());
    CHECK(op.vk_pre_base() == c.vk_pre());
    CHECK(op.st_pk().empty());
    CHECK(operator_invariants(op));
}

TEST_CASE("two known contributions produce the frozen aggregates") {
    Contract c(kParams);
    BatchOperator op(c);

    REQUIRE(op.server_off_update(make_contribution(op, Fr::from_u64(3), Fr::from_u64(7)))
                .accepted());
    // sigma_cur = r*Q_1 + sk*(r*Q_1) = (1+7)*3*Q_1 = 24, vk = (1+7) over the generator.
    CHECK(op.sigma_prv() == g2_mul(G2::generator(), Fr::from_u64(3)));
    CHECK(op.sigma_cur() == g2_mul(G2::generator(), Fr::from_u64(24)));
    CHECK(op.vk_cur() == g1_mul(G1::generator(), Fr::from_u64(8)));
    CHECK(operator_invariants(op));

    REQUIRE(op.server_off_update(make_contribution(op, Fr::from_u64(5), Fr::from_u64(11)))
                .accepted());
    // sigma_cur = 5*24 + 11*15 = 285 over the generator; vk gains 11.
    CHECK(op.sigma_prv() == g2_mul(G2::generator(), Fr::from_u64(15)));
    CHECK(op.sigma_cur() == g2_mul(G2::generator(), Fr::from_u64(285)));
    CHECK(op.vk_cur() == g1_mul(G1::generator(), Fr::from_u64(19)));
    CHECK(op.st_pk().size() == 2);
    CHECK(operator_invariants(op));

    // The string itself is the tau = 15 string.
    testing::ExponentTrace trace;
    trace.apply(3);
    trace.apply(5);
    CHECK(op.pp() == trace.expected_pp(kParams.n, kParams.k));

    // Push on chain: accepted, and the contract head advances to the batch.
    CHECK(op.server_on_update(c) == BatchOperator::OnUpdateStatus::Accepted);
    CHECK(c.round() == 1);
    CHECK(c.fetch_pp(1) == op.pp());
    CHECK(c.fetch_record(1).accepted());
}

TEST_CASE("each verification failure reports its own reason and leaves state intact") {
    Contract c(kParams);
    BatchOperator op(c);
    // Seed one accepted contribution so duplicate detection has a target.
    Fr r0 = Fr::from_u64(3), sk0 = Fr::from_u64(7);
    REQUIRE(op.server_off_update(make_contribution(op, r0, sk0)).accepted());
    OperatorSnapshot before = snapshot(op);

    Fr r = Fr::from_u64(5), sk = Fr::from_u64(11);

    SUBCASE("dimension mismatch") {
        Contribution bad = make_contribution(op, r, sk);
        bad.pp.g1_powers.pop_back();
        CHECK(op.server_off_update(bad).outcome == OffUpdateOutcome::RejectedDimensions);
    }
    SUBCASE("ill-formed string is pinpointed") {
        Contribution bad = make_contribution(op, r, sk);
        Drbg rng("operator-illformed");
        bad.pp = corrupt_pp(bad.pp, CorruptMode::AddGenerator, 1, 3, rng);
        OffUpdateResult res = op.server_off_update(bad);
        CHECK(res.outcome == OffUpdateOutcome::RejectedIllFormed);
        CHECK(res.pinpoint.ill);
        CHECK(res.pinpoint.group_index == 1);
        CHECK(res.pinpoint.element_index == 3);
    }
    SUBCASE("degenerate first power") {
        // r chosen to cancel the accumulated randomizer: P_1 returns to the
        // generator, a rollback the server must refuse.
        Fr undo = Fr::from_u64(3).inv();
        Contribution bad = make_contribution(op, undo, sk);
        CHECK(op.server_off_update(bad).outcome == OffUpdateOutcome::RejectedDegenerate);
    }
    SUBCASE("invalid proof of possession") {
        Contribution bad = make_contribution(op, r, sk);
        bad.pop = g2_mul(bad.pop, Fr::from_u64(2));
        CHECK(op.server_off_update(bad).outcome == OffUpdateOutcome::RejectedPop);
    }
    SUBCASE("previous-keys chain break") {
        Contribution bad = make_contribution(op, r, sk);
        bad.sigma_prv = g2_mul(bad.sigma_prv, Fr::from_u64(2));
        CHECK(op.server_off_update(bad).outcome == OffUpdateOutcome::RejectedPrvChain);
    }
    SUBCASE("aggregate chain break") {
        Contribution bad = make_contribution(op, r, sk);
        // Signature omits the new key's share.
        bad.sigma_cur = g2_mul(op.sigma_cur(), r);
        CHECK(op.server_off_update(bad).outcome == OffUpdateOutcome::RejectedCurChain);
    }
    SUBCASE("duplicate key") {
        Contribution dup = make_contribution(op, r, sk0);
        CHECK(op.server_off_update(dup).outcome == OffUpdateOutcome::RejectedDuplicateKey);
    }
    SUBCASE("checks run in order: possession before chain breaks") {
        Contribution bad = make_contribution(op, r, sk);
        bad.pop = g2_mul(bad.pop, Fr::from_u64(2));
        bad.sigma_prv = g2_mul(bad.sigma_prv, Fr::from_u64(2));
        bad.sigma_cur = g2_mul(bad.sigma_cur, Fr::from_u64(2));
        CHECK(op.server_off_update(bad).outcome == OffUpdateOutcome::RejectedPop);
    }
    SUBCASE("checks run in order: shape before content") {
        Contribution bad = make_contribution(op, r, sk);
        Drbg rng("operator-order");
        bad.pp = corrupt_pp(bad.pp, CorruptMode::ZeroOut, 2, 2, rng);
        bad.pp.g2_powers.pop_back();
        CHECK(op.server_off_update(bad).outcome == OffUpdateOutcome::RejectedDimensions);
    }

    // No rejection may touch the running state.
    CHECK(same_state(snapshot(op), before));
    CHECK(operator_invariants(op));
}

TEST_CASE("on-chain push refuses empty batches and detects a lost race") {
    Contract c(kParams);
    BatchOperator idle(c);
    CHECK(idle.server_on_update(c) == BatchOperator::OnUpdateStatus::EmptyBatch);
    CHECK(c.round() == 0);

    // A rival batch lands first; the idle operator's base is stale even
    // after it gathers a contribution.
    BatchOperator rival(c);
    REQUIRE(rival.server_off_update(make_contribution(rival, Fr::from_u64(3), Fr::from_u64(7)))
                .accepted());
    BatchOperator late(c);
    REQUIRE(rival.server_on_update(c) == BatchOperator::OnUpdateStatus::Accepted);
    REQUIRE(late.server_off_update(make_contribution(late, Fr::from_u64(5), Fr::from_u64(11)))
                .accepted());
    CHECK(late.server_on_update(c) == BatchOperator::OnUpdateStatus::Superseded);
    CHECK(c.round() == 1);

    // Pushing a batch onto a fork with the same height but different history
    // fails the contract's pairing check rather than the race check.
    Contract fork(kParams);
    BatchOperator fop(fork);
    REQUIRE(fop.server_off_update(make_contribution(fop, Fr::from_u64(2), Fr::from_u64(9)))
                .accepted());
    REQUIRE(fop.server_on_update(fork) == BatchOperator::OnUpdateStatus::Accepted);
    BatchOperator onfork(fork);
    REQUIRE(
        onfork.server_off_update(make_contribution(onfork, Fr::from_u64(5), Fr::from_u64(11)))
            .accepted());
    CHECK(onfork.server_on_update(c) == BatchOperator::OnUpdateStatus::Rejected);
    CHECK(c.round() == 1);  // charge logged, head unchanged
    CHECK_FALSE(c.fetch_record(1).sub.vk_cur == onfork.vk_cur());
}

TEST_CASE("a second batch chains from the advanced head") {
    Contract c(kParams);
    testing::ExponentTrace trace;
    Drbg rng("two-batches");

    BatchOperator first(c);
    for (auto& [r, sk] : drive_batch(first, 2, rng)) trace.apply(r.to_mpz());
    REQUIRE(first.server_on_update(c) == BatchOperator::OnUpdateStatus::Accepted);

    BatchOperator second(c);
    CHECK(second.base_round() == 1);
    CHECK(second.vk_pre_base() == c.vk_pre());
    CHECK(second.pp() == c.fetch_pp(1));
    CHECK(second.sigma_cur() == second.pp().g2_powers[0]);
    for (auto& [r, sk] : drive_batch(second, 3, rng)) trace.apply(r.to_mpz());
    REQUIRE(second.server_on_update(c) == BatchOperator::OnUpdateStatus::Accepted);

    CHECK(c.round() == 2);
    CHECK(c.fetch_pp(2) == trace.expected_pp(kParams.n, kParams.k));
    CHECK(second.st_pk().size() == 3);
}

TEST_CASE("possession checks can be disabled as a deliberately weak policy") {
    Contract c(kParams);
    BatchOperator strict(c);
    BatchOperator lax(c, OperatorPolicy{false});

    Contribution bad = make_contribution(strict, Fr::from_u64(3), Fr::from_u64(7));
    bad.pop = G2::generator();  // not a signature on anything
    CHECK(strict.server_off_update(bad).outcome == OffUpdateOutcome::RejectedPop);
    CHECK(lax.server_off_update(bad).outcome == OffUpdateOutcome::Accepted);
}

TEST_CASE("bucketization squares off the key list") {
    Contract c(kParams);
    Drbg rng("bucket-shapes");

    auto chunk_sizes = [](const BucketizedTranscript& t) {
        std::vector<size_t> sizes;
        for (const TranscriptChunk& ch : t.chunks) sizes.push_back(ch.keys.size());
        return sizes;
    };

    BatchOperator op(c);
    CHECK(op.bucketize_transcript().chunks.empty());

    drive_batch(op, 1, rng);
    CHECK(chunk_sizes(op.bucketize_transcript()) == std::vector<size_t>{1});

    drive_batch(op, 3, rng);  // M = 4
    CHECK(chunk_sizes(op.bucketize_transcript()) == std::vector<size_t>{2, 2});

    drive_batch(op, 1, rng);  // M = 5
    CHECK(chunk_sizes(op.bucketize_transcript()) == std::vector<size_t>{3, 2});

    drive_batch(op, 4, rng);  // M = 9
    BucketizedTranscript t = op.bucketize_transcript();
    CHECK(chunk_sizes(t) == std::vector<size_t>{3, 3, 3});
    CHECK(t.total_contributions() == 9);

    // Chunk boundaries are exactly the full transcript's boundaries at the
    // chunk-end positions, and both carry the same framing data.
    FullTranscript f = op.full_transcript();
    REQUIRE(f.boundaries.size() == 9);
    CHECK(t.chunks[0].end == f.boundaries[2]);
    CHECK(t.chunks[1].end == f.boundaries[5]);
    CHECK(t.chunks[2].end == f.boundaries[8]);
    CHECK(t.base_round == f.base_round);
    CHECK(t.final_pp == f.final_pp);
    for (size_t i = 0; i < 9; i++)
        CHECK(t.chunks[i / 3].keys[i % 3] == f.keys[i]);
}

TEST_CASE("bucketized audit of nine contributions costs three plus three checks") {
    Contract c(kParams);
    BatchOperator op(c);
    Drbg rng("nine-audit");
    drive_batch(op, 9, rng);

    FullTranscript f = op.full_transcript();
    BucketizedTranscript t = op.bucketize_transcript();

    for (size_t i = 0; i < 9; i++) {
        TranscriptVerdict v = verify_bucketized_transcript(t, f.keys[i].pk);
        CHECK(v.ok);
        CHECK(v.first_bad_chunk == 0);
        CHECK(v.chunk_checks == 3);  // one progressive check per chunk
        CHECK(v.pop_checks == 3);    // possession proofs for own chunk only
    }

    TranscriptVerdict full = verify_full_transcript(f, f.keys[4].pk);
    CHECK(full.ok);
    CHECK(full.chunk_checks == 9);
    CHECK(full.pop_checks == 9);
}

TEST_CASE("bucketized and full audits agree across tampered transcripts") {
    for (uint64_t seed = 0; seed < 20; seed++) {
        CAPTURE(seed);
        Contract c(kParams);
        BatchOperator op(c);
        Drbg rng = Drbg::from_u64(1000 + seed);
        size_t m = 1 + seed % 7;
        drive_batch(op, m, rng);

        FullTranscript f = op.full_transcript();
        BucketizedTranscript t = op.bucketize_transcript();
        G1 own = f.keys[seed % m].pk;
        bool expect_ok = false;

        switch (seed % 5) {
            case 0:  // honest
                expect_ok = true;
                break;
            case 1:  // audit for a key that never contributed
                own = g1_mul(G1::generator(), random_fr_nonzero(rng));
                break;
            case 2: {  // final aggregate signature tampered
                G2 forged = g2_mul(f.boundaries.back().sigma_cur, Fr::from_u64(2));
                f.boundaries.back().sigma_cur = forged;
                t.chunks.back().end.sigma_cur = forged;
                break;
            }
            case 3: {  // a listed key altered after the fact
                G1 forged = g1_add(f.keys[0].pk, G1::generator());
                f.keys[0].pk = forged;
                t.chunks[0].keys[0].pk = forged;
                break;
            }
            case 4: {  // own chunk carries a key with a forged possession proof
                own = f.keys[0].pk;
                G2 forged = g2_mul(f.keys[0].pop, Fr::from_u64(2));
                f.keys[0].pop = forged;
                t.chunks[0].keys[0].pop = forged;
                break;
            }
        }

        TranscriptVerdict vb = verify_bucketized_transcript(t, own);
        TranscriptVerdict vf = verify_full_transcript(f, own);
        CHECK(vb.ok == expect_ok);
        CHECK(vf.ok == vb.ok);
        CHECK(vb.chunk_checks <= vf.chunk_checks + 1);
        if (!vb.ok) {
            CHECK_FALSE(vb.reason.empty());
            CHECK_FALSE(vf.reason.empty());
        }
    }
}

TEST_CASE("audits reject a transcript whose tail disowns the published string") {
    Contract c(kParams);
    BatchOperator op(c);
    Drbg rng("tail-mismatch");
    drive_batch(op, 4, rng);

    FullTranscript f = op.full_transcript();
    BucketizedTranscript t = op.bucketize_transcript();
    G1 own = f.keys[1].pk;
    REQUIRE(verify_full_transcript(f, own).ok);
    REQUIRE(verify_bucketized_transcript(t, own).ok);

    // Swap in a further-randomized string: every boundary still chains, but
    // the final boundary no longer matches the published Q_1.
    PowersOfTau moved = apply_update(f.final_pp, Fr::from_u64(2));
    f.final_pp = moved;
    t.final_pp = moved;

    TranscriptVerdict vf = verify_full_transcript(f, own);
    TranscriptVerdict vb = verify_bucketized_transcript(t, own);
    CHECK_FALSE(vf.ok);
    CHECK_FALSE(vb.ok);
    CHECK(vf.first_bad_chunk == 4);
    CHECK(vb.first_bad_chunk == 2);
    CHECK(vf.reason == vb.reason);
}

TEST_CASE("the published key snapshot matches the transcript views") {
    Contract c(kParams);
    BatchOperator op(c);
    Drbg rng("publish");
    drive_batch(op, 5, rng);

    PublishedBatch pub = op.publish_stpk();
    FullTranscript f = op.full_transcript();
    CHECK(pub.pp == op.pp());
    CHECK(pub.vk_cur == op.vk_cur());
    CHECK(pub.base_round == op.base_round());
    REQUIRE(pub.st_pk.size() == 5);
    for (size_t i = 0; i < 5; i++) CHECK(pub.st_pk[i] == f.keys[i]);

    // The boundary list replays the aggregate exactly.
    CHECK(f.boundaries.back().vk_cur == pub.vk_cur);
    CHECK(f.boundaries.back().sigma_cur == op.sigma_cur());
    CHECK(f.boundaries.back().q1 == pub.pp.g2_powers[0]);
}
