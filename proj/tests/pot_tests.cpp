#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "taulab/parallel.hpp"
#include "taulab/pot.hpp"

using namespace taulab;
using taulab::testing::ExponentTrace;

namespace {

// Random well-formed string with tau != 1, plus its trace.
PowersOfTau random_updated_pp(const CeremonyParams& params, Drbg& rng, ExponentTrace* trace = nullptr) {
    PowersOfTau pp = init_pp(params);
    Fr r = random_fr_nonzero(rng);
    if (trace) trace->apply(r.to_mpz());
    return apply_update(pp, r);
}

uint32_t flat_positions(const CeremonyParams& p) { return p.d(); }

// Uniform corrupt position over both groups; 1-based (group, element).
std::pair<uint32_t, uint32_t> random_position(const CeremonyParams& p, Drbg& rng) {
    uint32_t flat = static_cast<uint32_t>(rng.uniform(flat_positions(p)));
    if (flat < p.n) return {1, flat + 1};
    return {2, flat - p.n + 1};
}

}  // namespace

TEST_CASE("pristine string is all generators and rejects bad dimensions") {
    PowersOfTau pp = init_pp({3, 2});
    REQUIRE(pp.g1_powers.size() == 3);
    REQUIRE(pp.g2_powers.size() == 2);
    for (const G1& p : pp.g1_powers) CHECK(p == G1::generator());
    for (const G2& q : pp.g2_powers) CHECK(q == G2::generator());
    CHECK(pp.params() == CeremonyParams{3, 2});
    CHECK(pp.params().d() == 5);

    CHECK_THROWS(init_pp({0, 1}));
    CHECK_THROWS(init_pp({1, 0}));
    CHECK_THROWS(init_pp({kMaxPowers + 1, 1}));
}

TEST_CASE("re-randomization matches the exponent trace and composes") {
    // Two updates with small scalars so the exponents are auditable by hand:
    // after r = 3 then r = 5 the trapdoor is 15, so P_i = 15^i * I_G1.
    CeremonyParams params{4, 3};
    PowersOfTau pp = init_pp(params);
    ExponentTrace trace;
    trace.apply(3);
    pp = apply_update(pp, Fr::from_u64(3));
    trace.apply(5);
    pp = apply_update(pp, Fr::from_u64(5));
    REQUIRE(trace.tau == 15);
    PowersOfTau want = trace.expected_pp(params.n, params.k);
    CHECK(pp == want);
    CHECK(pp.g1_powers[0] == g1_mul(G1::generator(), Fr::from_u64(15)));
    CHECK(pp.g1_powers[3] == g1_mul(G1::generator(), Fr::from_u64(50625)));
    CHECK(pp.g2_powers[2] == g2_mul(G2::generator(), Fr::from_u64(3375)));

    // One combined update with r = 15 lands on the same string.
    CHECK(apply_update(apply_update(init_pp(params), Fr::from_u64(3)), Fr::from_u64(5)) ==
          apply_update(init_pp(params), Fr::from_u64(15)));

    CHECK_THROWS(apply_update(pp, Fr::zero()));
    CHECK(wellform_check_batched(pp));
}

TEST_CASE("re-randomization agrees with the exponent trace on random histories") {
    Drbg rng("pot-oracle-equivalence");
    for (int trial = 0; trial < 200; trial++) {
        CeremonyParams params{static_cast<uint32_t>(1 + rng.uniform(16)),
                              static_cast<uint32_t>(1 + rng.uniform(16))};
        PowersOfTau pp = init_pp(params);
        ExponentTrace trace;
        size_t updates = 1 + rng.uniform(4);
        for (size_t u = 0; u < updates; u++) {
            Fr r = random_fr_nonzero(rng);
            trace.apply(r.to_mpz());
            pp = apply_update(pp, r);
        }
        REQUIRE(pp == trace.expected_pp(params.n, params.k));
    }
}

TEST_CASE("degeneracy check fires on generator and zero first powers") {
    Drbg rng("pot-nondegen");
    PowersOfTau pristine = init_pp({2, 1});
    CHECK_FALSE(non_degen_check(pristine));  // P_1 is the generator
    PowersOfTau pp = random_updated_pp({2, 1}, rng);
    CHECK(non_degen_check(pp));
    PowersOfTau zeroed = corrupt_pp(pp, CorruptMode::ZeroOut, 1, 1, rng);
    CHECK_FALSE(non_degen_check(zeroed));
    // An update with r = 1 on the pristine string stays degenerate.
    CHECK_FALSE(non_degen_check(apply_update(pristine, Fr::one())));
}

TEST_CASE("batched well-formedness accepts honest strings and rejects every corruption mode") {
    Drbg rng("pot-wellform");
    for (CeremonyParams params : {CeremonyParams{1, 1}, {1, 5}, {5, 1}, {6, 4}}) {
        PowersOfTau pp = random_updated_pp(params, rng);
        CAPTURE(params.n);
        CAPTURE(params.k);
        CHECK(wellform_check_batched(pp));
        WellformChallenge ch = derive_wellform_challenge(pp);
        CHECK(wellform_check_batched(pp, ch));
        CHECK_THROWS(wellform_check_batched(pp, WellformChallenge{Fr::zero(), ch.rho2}));
        CHECK_THROWS(wellform_check_batched(pp, WellformChallenge{ch.rho1, Fr::zero()}));
    }
    // Every mode at every position of a small string must be caught.
    CeremonyParams params{4, 3};
    PowersOfTau pp = random_updated_pp(params, rng);
    for (CorruptMode mode : kAllCorruptModes) {
        for (uint32_t flat = 0; flat < params.d(); flat++) {
            uint32_t gp = flat < params.n ? 1 : 2;
            uint32_t ei = flat < params.n ? flat + 1 : flat - params.n + 1;
            PowersOfTau bad = corrupt_pp(pp, mode, gp, ei, rng);
            CAPTURE(corrupt_mode_name(mode));
            CAPTURE(gp);
            CAPTURE(ei);
            CHECK_FALSE(wellform_check_batched(bad));
        }
    }
}

TEST_CASE("challenge derivation is bound to the exact string bytes") {
    Drbg rng("pot-challenge");
    PowersOfTau a = random_updated_pp({3, 2}, rng);
    PowersOfTau b = random_updated_pp({3, 2}, rng);
    WellformChallenge ca = derive_wellform_challenge(a);
    WellformChallenge cb = derive_wellform_challenge(b);
    CHECK_FALSE(ca.rho1.is_zero());
    CHECK_FALSE(ca.rho2.is_zero());
    CHECK_FALSE(ca.rho1 == ca.rho2);  // separate domains
    CHECK_FALSE(ca.rho1 == cb.rho1);  // different strings
    WellformChallenge again = derive_wellform_challenge(a);
    CHECK(ca.rho1 == again.rho1);
    CHECK(ca.rho2 == again.rho2);
}

TEST_CASE("linear pinpoint names the first broken chain relation") {
    Drbg rng("pot-pinpoint");
    CeremonyParams params{4, 3};
    PowersOfTau pp = random_updated_pp(params, rng);
    CHECK(pinpoint_ill_formed(pp) == PinpointResult{});

    // Breaking P_3 violates relation 3 first.
    PowersOfTau bad = corrupt_pp(pp, CorruptMode::AddGenerator, 1, 3, rng);
    CHECK(pinpoint_ill_formed(bad) == PinpointResult{true, 1, 3});

    // Breaking Q_2 violates the G2 chain at j = 2.
    bad = corrupt_pp(pp, CorruptMode::ScaleByTwo, 2, 2, rng);
    CHECK(pinpoint_ill_formed(bad) == PinpointResult{true, 2, 2});

    // Breaking Q_1 shows up as relation 1 (the anchor between the chains);
    // the report blames (1, 1) because that relation ties P_1 to Q_1.
    bad = corrupt_pp(pp, CorruptMode::ZeroOut, 2, 1, rng);
    CHECK(pinpoint_ill_formed(bad) == PinpointResult{true, 1, 1});

    bad = corrupt_pp(pp, CorruptMode::ReplaceWithRandom, 1, 1, rng);
    CHECK(pinpoint_ill_formed(bad) == PinpointResult{true, 1, 1});

    // Corruptions in both groups: the G1 one is reported (scanned first).
    bad = corrupt_pp(corrupt_pp(pp, CorruptMode::ScaleByTwo, 2, 3, rng),
                     CorruptMode::ScaleByTwo, 1, 4, rng);
    CHECK(pinpoint_ill_formed(bad) == PinpointResult{true, 1, 4});
}

TEST_CASE("binary-search pinpoint matches the linear scan") {
    Drbg rng("pot-binary");
    for (int trial = 0; trial < 40; trial++) {
        CeremonyParams params{static_cast<uint32_t>(2 + rng.uniform(9)),
                              static_cast<uint32_t>(2 + rng.uniform(9))};
        PowersOfTau pp = random_updated_pp(params, rng);
        CorruptMode mode = kAllCorruptModes[rng.uniform(5)];
        auto [gp, ei] = random_position(params, rng);
        PowersOfTau bad = corrupt_pp(pp, mode, gp, ei, rng);
        PinpointResult lin = pinpoint_ill_formed(bad);
        PinpointResult bin = pinpoint_binary_search(bad, rng);
        CAPTURE(trial);
        CAPTURE(corrupt_mode_name(mode));
        CAPTURE(gp);
        CAPTURE(ei);
        CHECK(lin == bin);
        // Every mode corrupts here: tau != 1 makes adjacent powers distinct,
        // so even swap-adjacent breaks the chain.
        REQUIRE(lin.ill);
    }
    // Well-formed strings come back clean through both paths.
    PowersOfTau good = random_updated_pp({7, 3}, rng);
    CHECK(pinpoint_binary_search(good, rng) == PinpointResult{});
}

TEST_CASE("binary-search pinpoint uses logarithmically many chain checks") {
    Drbg rng("pot-counter");
    CeremonyParams params{8, 2};
    PowersOfTau pp = random_updated_pp(params, rng);

    // Corrupting the last G1 power: one anchor check, one whole-window
    // check, then a halving descent over relations 2..8 ending in a direct
    // re-check of the singleton. ceil(log2(n - 1)) = 3 descent checks.
    PowersOfTau bad = corrupt_pp(pp, CorruptMode::ScaleByTwo, 1, 8, rng);
    uint64_t before = chain_check_count();
    PinpointResult res = pinpoint_binary_search(bad, rng);
    CHECK(res == PinpointResult{true, 1, 8});
    CHECK(chain_check_count() - before == 5);

    // The linear scan pays one check per relation up to the defect.
    before = chain_check_count();
    CHECK(pinpoint_ill_formed(bad) == PinpointResult{true, 1, 8});
    CHECK(chain_check_count() - before == 8);

    // A defect at P_1 is caught by the anchor check alone.
    bad = corrupt_pp(pp, CorruptMode::AddGenerator, 1, 1, rng);
    before = chain_check_count();
    CHECK(pinpoint_binary_search(bad, rng) == PinpointResult{true, 1, 1});
    CHECK(chain_check_count() - before == 1);

    // Well-formed: anchor plus one window per chain.
    before = chain_check_count();
    CHECK_FALSE(pinpoint_binary_search(pp, rng).ill);
    CHECK(chain_check_count() - before == 3);

    // Upper bound 2 + ceil(log2(n-1)) + 1 holds across positions for a
    // G1 defect (the +1 covers the singleton re-check on uneven splits).
    for (uint32_t ei = 2; ei <= 8; ei++) {
        bad = corrupt_pp(pp, CorruptMode::AddGenerator, 1, ei, rng);
        before = chain_check_count();
        CHECK(pinpoint_binary_search(bad, rng) == PinpointResult{true, 1, ei});
        CHECK(chain_check_count() - before <= 6);
    }
}

TEST_CASE("batched verdicts and pinpoint verdicts never disagree") {
    Drbg rng("pot-differential-smoke");
    int corrupted = 0;
    for (int trial = 0; trial < 50; trial++) {
        CeremonyParams params{static_cast<uint32_t>(2 + rng.uniform(7)),
                              static_cast<uint32_t>(2 + rng.uniform(7))};
        PowersOfTau pp = random_updated_pp(params, rng);
        bool corrupt = rng.uniform(2) == 1;
        if (corrupt) {
            // Swap-adjacent can silently no-op on equal elements, so the
            // differential uses the other four modes.
            constexpr CorruptMode usable[] = {CorruptMode::AddGenerator,
                                              CorruptMode::ReplaceWithRandom,
                                              CorruptMode::ZeroOut, CorruptMode::ScaleByTwo};
            CorruptMode mode = usable[rng.uniform(4)];
            auto [gp, ei] = random_position(params, rng);
            pp = corrupt_pp(pp, mode, gp, ei, rng);
            corrupted++;
        }
        bool batched = wellform_check_batched(pp);
        PinpointResult lin = pinpoint_ill_formed(pp);
        PinpointResult bin = pinpoint_binary_search(pp, rng);
        CAPTURE(trial);
        REQUIRE(batched == !lin.ill);
        REQUIRE(lin == bin);
        REQUIRE(lin.ill == corrupt);
    }
    CHECK(corrupted > 10);
}

TEST_CASE("string serialization round-trips and rejects malformed bytes") {
    Drbg rng("pot-serial");
    PowersOfTau pp = random_updated_pp({5, 3}, rng);
    Bytes enc = pp_to_bytes(pp);
    CHECK(enc.size() == 16 + 5 * kG1Bytes + 3 * kG2Bytes);
    auto back = pp_from_bytes(enc);
    REQUIRE(back.has_value());
    CHECK(*back == pp);

    // Zero elements are legal payload: corrupted strings must survive the
    // trip through logs and fraud machinery.
    PowersOfTau zeroed = corrupt_pp(pp, CorruptMode::ZeroOut, 1, 2, rng);
    auto back2 = pp_from_bytes(pp_to_bytes(zeroed));
    REQUIRE(back2.has_value());
    CHECK(*back2 == zeroed);
    CHECK(back2->g1_powers[1] == G1::zero());

    auto hex_back = pp_from_hex(pp_to_hex(pp));
    REQUIRE(hex_back.has_value());
    CHECK(*hex_back == pp);

    Bytes bad = enc;
    bad[0] ^= 1;  // magic
    CHECK_FALSE(pp_from_bytes(bad).has_value());
    bad = enc;
    bad[6] = 2;  // version
    CHECK_FALSE(pp_from_bytes(bad).has_value());
    bad = enc;
    bad[7] = 9;  // curve id
    CHECK_FALSE(pp_from_bytes(bad).has_value());
    bad = enc;
    bad.pop_back();  // truncated
    CHECK_FALSE(pp_from_bytes(bad).has_value());
    bad = enc;
    bad.push_back(0);  // trailing garbage
    CHECK_FALSE(pp_from_bytes(bad).has_value());
    bad = enc;
    bad[11] = 0;  // n = 0
    CHECK_FALSE(pp_from_bytes(bad).has_value());
    bad = enc;
    for (size_t i = 16; i < 16 + kG1Bytes; i++) bad[i] = 0xff;  // x >= field modulus
    CHECK_FALSE(pp_from_bytes(bad).has_value());
    CHECK_FALSE(pp_from_hex("zz").has_value());
}

TEST_CASE("corruption helper edits exactly the requested element") {
    Drbg rng("pot-corrupt");
    PowersOfTau pp = random_updated_pp({4, 2}, rng);

    PowersOfTau added = corrupt_pp(pp, CorruptMode::AddGenerator, 1, 3, rng);
    CHECK(added.g1_powers[2] == g1_add(pp.g1_powers[2], G1::generator()));
    for (size_t i : {0u, 1u, 3u}) CHECK(added.g1_powers[i] == pp.g1_powers[i]);
    CHECK(added.g2_powers == pp.g2_powers);

    PowersOfTau doubled = corrupt_pp(pp, CorruptMode::ScaleByTwo, 2, 1, rng);
    CHECK(doubled.g2_powers[0] == g2_add(pp.g2_powers[0], pp.g2_powers[0]));

    // Swapping the last element pairs it with its predecessor.
    PowersOfTau swapped = corrupt_pp(pp, CorruptMode::SwapAdjacent, 1, 4, rng);
    CHECK(swapped.g1_powers[3] == pp.g1_powers[2]);
    CHECK(swapped.g1_powers[2] == pp.g1_powers[3]);
    PowersOfTau swapped2 = corrupt_pp(pp, CorruptMode::SwapAdjacent, 1, 2, rng);
    CHECK(swapped2.g1_powers[1] == pp.g1_powers[2]);
    CHECK(swapped2.g1_powers[2] == pp.g1_powers[1]);

    PowersOfTau randomized = corrupt_pp(pp, CorruptMode::ReplaceWithRandom, 2, 2, rng);
    CHECK_FALSE(randomized.g2_powers[1] == pp.g2_powers[1]);

    CHECK_THROWS(corrupt_pp(pp, CorruptMode::ZeroOut, 3, 1, rng));
    CHECK_THROWS(corrupt_pp(pp, CorruptMode::ZeroOut, 1, 0, rng));
    CHECK_THROWS(corrupt_pp(pp, CorruptMode::ZeroOut, 1, 5, rng));
    CHECK_THROWS(corrupt_pp(pp, CorruptMode::ZeroOut, 2, 3, rng));
    PowersOfTau narrow = random_updated_pp({1, 1}, rng);
    CHECK_THROWS(corrupt_pp(narrow, CorruptMode::SwapAdjacent, 1, 1, rng));
}

TEST_CASE("results are independent of the worker thread count") {
    unsigned saved = parallel_threads();
    Drbg rng_seed("pot-parallel");
    Fr r = random_fr_nonzero(rng_seed);

    set_parallel_threads(1);
    PowersOfTau seq = apply_update(init_pp({33, 9}), r);
    WellformChallenge ch = derive_wellform_challenge(seq);
    bool seq_ok = wellform_check_batched(seq, ch);

    set_parallel_threads(4);
    PowersOfTau par = apply_update(init_pp({33, 9}), r);
    CHECK(par == seq);
    CHECK(pp_to_bytes(par) == pp_to_bytes(seq));
    CHECK(wellform_check_batched(par, ch) == seq_ok);
    CHECK(seq_ok);

    set_parallel_threads(saved);
}
