#include "taulab/pot.hpp"

#include <atomic>
#include <cstring>
#include <stdexcept>
#include <type_traits>

#include "taulab/keccak.hpp"
#include "taulab/parallel.hpp"

namespace taulab {

namespace {

std::atomic<uint64_t> g_chain_checks{0};

void check_params(const CeremonyParams& p) {
    if (p.n < 1 || p.k < 1 || p.n > kMaxPowers || p.k > kMaxPowers)
        throw std::invalid_argument("ceremony params out of range");
}

// Scalar powers r^1..r^count.
std::vector<Fr> scalar_powers(const Fr& r, size_t count) {
    std::vector<Fr> out(count);
    Fr acc = Fr::one();
    for (size_t i = 0; i < count; i++) {
        acc = acc * r;
        out[i] = acc;
    }
    return out;
}

// sum of coeff^t * elems[first + t], folded left to right.
G1 fold_g1(const std::vector<G1>& elems, size_t first, size_t count, const Fr& coeff) {
    std::vector<Fr> w = scalar_powers(coeff, count);
    std::vector<G1> terms(count);
    parallel_for(count, [&](size_t b, size_t e) {
        for (size_t t = b; t < e; t++)
            terms[t] = t == 0 ? elems[first] : g1_mul(elems[first + t], w[t - 1]);
    });
    G1 acc = G1::zero();
    for (const G1& t : terms) acc = g1_add(acc, t);
    return acc;
}

G2 fold_g2(const std::vector<G2>& elems, size_t first, size_t count, const Fr& coeff) {
    std::vector<Fr> w = scalar_powers(coeff, count);
    std::vector<G2> terms(count);
    parallel_for(count, [&](size_t b, size_t e) {
        for (size_t t = b; t < e; t++)
            terms[t] = t == 0 ? elems[first] : g2_mul(elems[first + t], w[t - 1]);
    });
    G2 acc = G2::zero();
    for (const G2& t : terms) acc = g2_add(acc, t);
    return acc;
}

// Relation i of the G1 chain, 1-based: e(P_i, I_G2) = e(P_{i-1}, Q_1), P_0 := I_G1.
bool g1_relation_holds(const PowersOfTau& pp, uint32_t i) {
    g_chain_checks.fetch_add(1, std::memory_order_relaxed);
    const G1 prev = i == 1 ? G1::generator() : pp.g1_powers[i - 2];
    return multi_pair_check({{pp.g1_powers[i - 1], G2::generator(), false},
                             {prev, pp.g2_powers[0], true}});
}

// Relation j of the G2 chain, j >= 2: e(I_G1, Q_j) = e(P_1, Q_{j-1}).
bool g2_relation_holds(const PowersOfTau& pp, uint32_t j) {
    g_chain_checks.fetch_add(1, std::memory_order_relaxed);
    return multi_pair_check({{G1::generator(), pp.g2_powers[j - 1], false},
                             {pp.g1_powers[0], pp.g2_powers[j - 2], true}});
}

// Folds G1 relations a..b (a >= 2) with weights rho^(i-a):
// e(sum rho^(i-a) P_i, I_G2) = e(sum rho^(i-a) P_{i-1}, Q_1).
bool g1_window_holds(const PowersOfTau& pp, uint32_t a, uint32_t b, const Fr& rho) {
    if (a == b) return g1_relation_holds(pp, a);
    g_chain_checks.fetch_add(1, std::memory_order_relaxed);
    G1 cur = fold_g1(pp.g1_powers, a - 1, b - a + 1, rho);
    G1 prev = fold_g1(pp.g1_powers, a - 2, b - a + 1, rho);
    return multi_pair_check(
        {{cur, G2::generator(), false}, {prev, pp.g2_powers[0], true}});
}

// Folds G2 relations a..b (a >= 2) with weights rho^(j-a):
// e(I_G1, sum rho^(j-a) Q_j) = e(P_1, sum rho^(j-a) Q_{j-1}).
bool g2_window_holds(const PowersOfTau& pp, uint32_t a, uint32_t b, const Fr& rho) {
    if (a == b) return g2_relation_holds(pp, a);
    g_chain_checks.fetch_add(1, std::memory_order_relaxed);
    G2 cur = fold_g2(pp.g2_powers, a - 1, b - a + 1, rho);
    G2 prev = fold_g2(pp.g2_powers, a - 2, b - a + 1, rho);
    return multi_pair_check(
        {{G1::generator(), cur, false}, {pp.g1_powers[0], prev, true}});
}

// Leftmost relation in [a, b] that fails, assuming some relation in [a, b]
// fails. The singleton base case re-checks the relation directly, so the
// returned index is always a genuinely violated relation.
template <typename WindowFn>
std::optional<uint32_t> leftmost_failure(uint32_t a, uint32_t b, const WindowFn& window) {
    while (a < b) {
        uint32_t mid = a + (b - a) / 2;
        if (!window(a, mid))
            b = mid;
        else
            a = mid + 1;
    }
    if (!window(a, a)) return a;
    return std::nullopt;  // window checks misled us; caller falls back
}

}  // namespace

PowersOfTau init_pp(const CeremonyParams& params) {
    check_params(params);
    PowersOfTau pp;
    pp.g1_powers.assign(params.n, G1::generator());
    pp.g2_powers.assign(params.k, G2::generator());
    return pp;
}

PowersOfTau apply_update(const PowersOfTau& pp, const Fr& r) {
    if (r.is_zero()) throw std::invalid_argument("update scalar must be nonzero");
    check_params(pp.params());
    size_t n = pp.g1_powers.size(), k = pp.g2_powers.size();
    std::vector<Fr> rp = scalar_powers(r, std::max(n, k));
    PowersOfTau out;
    out.g1_powers.resize(n);
    out.g2_powers.resize(k);
    parallel_for(n, [&](size_t b, size_t e) {
        for (size_t i = b; i < e; i++) out.g1_powers[i] = g1_mul(pp.g1_powers[i], rp[i]);
    });
    parallel_for(k, [&](size_t b, size_t e) {
        for (size_t j = b; j < e; j++) out.g2_powers[j] = g2_mul(pp.g2_powers[j], rp[j]);
    });
    return out;
}

bool non_degen_check(const PowersOfTau& pp) {
    if (pp.g1_powers.empty()) return false;
    const G1& p1 = pp.g1_powers[0];
    return !(p1 == G1::generator()) && !(p1 == G1::zero());
}

WellformChallenge derive_wellform_challenge(const PowersOfTau& pp) {
    Bytes enc = pp_to_bytes(pp);
    auto derive = [&](const char* domain) {
        for (uint32_t ctr = 0;; ctr++) {
            Bytes in;
            append(in, std::string(domain));
            append_u32be(in, ctr);
            append(in, enc);
            Fr v = hash_to_scalar(in);
            if (!v.is_zero()) return v;
        }
    };
    return WellformChallenge{derive("POT-WFC1"), derive("POT-WFC2")};
}

bool wellform_check_batched(const PowersOfTau& pp, const WellformChallenge& ch) {
    check_params(pp.params());
    if (ch.rho1.is_zero() || ch.rho2.is_zero())
        throw std::invalid_argument("well-formedness challenge must be nonzero");
    uint32_t n = pp.params().n, k = pp.params().k;
    // (a) anchors the two chains to each other: dlog P_1 = dlog Q_1.
    if (!multi_pair_check({{pp.g1_powers[0], G2::generator(), false},
                           {G1::generator(), pp.g2_powers[0], true}}))
        return false;
    // (b) folds P_{i+1} = tau * P_i for i = 1..n-1 under weights rho1^(i-1).
    if (n >= 2 && !g1_window_holds(pp, 2, n, ch.rho1)) return false;
    // (c) folds Q_{j+1} = tau * Q_j for j = 1..k-1 under weights rho2^(j-1).
    if (k >= 2 && !g2_window_holds(pp, 2, k, ch.rho2)) return false;
    return true;
}

bool wellform_check_batched(const PowersOfTau& pp) {
    return wellform_check_batched(pp, derive_wellform_challenge(pp));
}

PinpointResult pinpoint_ill_formed(const PowersOfTau& pp) {
    check_params(pp.params());
    uint32_t n = pp.params().n, k = pp.params().k;
    for (uint32_t i = 1; i <= n; i++)
        if (!g1_relation_holds(pp, i)) return PinpointResult{true, 1, i};
    for (uint32_t j = 2; j <= k; j++)
        if (!g2_relation_holds(pp, j)) return PinpointResult{true, 2, j};
    return PinpointResult{};
}

PinpointResult pinpoint_binary_search(const PowersOfTau& pp, Drbg& rng) {
    check_params(pp.params());
    uint32_t n = pp.params().n, k = pp.params().k;
    if (!g1_relation_holds(pp, 1)) return PinpointResult{true, 1, 1};
    if (n >= 2) {
        Fr rho = random_fr_nonzero(rng);
        if (!g1_window_holds(pp, 2, n, rho)) {
            auto w = [&](uint32_t a, uint32_t b) { return g1_window_holds(pp, a, b, rho); };
            if (auto i = leftmost_failure(2, n, w)) return PinpointResult{true, 1, *i};
            return pinpoint_ill_formed(pp);
        }
    }
    if (k >= 2) {
        Fr rho = random_fr_nonzero(rng);
        if (!g2_window_holds(pp, 2, k, rho)) {
            auto w = [&](uint32_t a, uint32_t b) { return g2_window_holds(pp, a, b, rho); };
            if (auto j = leftmost_failure(2, k, w)) return PinpointResult{true, 2, *j};
            return pinpoint_ill_formed(pp);
        }
    }
    return PinpointResult{};
}

uint64_t chain_check_count() { return g_chain_checks.load(std::memory_order_relaxed); }
void reset_chain_check_count() { g_chain_checks.store(0, std::memory_order_relaxed); }

const char* corrupt_mode_name(CorruptMode mode) {
    switch (mode) {
        case CorruptMode::AddGenerator: return "add-generator";
        case CorruptMode::SwapAdjacent: return "swap-adjacent";
        case CorruptMode::ReplaceWithRandom: return "replace-with-random";
        case CorruptMode::ZeroOut: return "zero-out";
        case CorruptMode::ScaleByTwo: return "scale-by-2";
    }
    return "unknown";
}

namespace {

template <typename Point>
void corrupt_element(std::vector<Point>& elems, CorruptMode mode, uint32_t idx, Drbg& rng) {
    if (idx < 1 || idx > elems.size())
        throw std::out_of_range("corrupt position out of range");
    Point& e = elems[idx - 1];
    switch (mode) {
        case CorruptMode::AddGenerator:
            if constexpr (std::is_same_v<Point, G1>)
                e = g1_add(e, G1::generator());
            else
                e = g2_add(e, G2::generator());
            break;
        case CorruptMode::SwapAdjacent: {
            if (elems.size() < 2)
                throw std::invalid_argument("swap-adjacent needs two elements");
            size_t other = idx == elems.size() ? idx - 2 : idx;
            std::swap(e, elems[other]);
            break;
        }
        case CorruptMode::ReplaceWithRandom: {
            Fr s = random_fr_nonzero(rng);
            if constexpr (std::is_same_v<Point, G1>)
                e = g1_mul(G1::generator(), s);
            else
                e = g2_mul(G2::generator(), s);
            break;
        }
        case CorruptMode::ZeroOut:
            e = Point::zero();
            break;
        case CorruptMode::ScaleByTwo:
            if constexpr (std::is_same_v<Point, G1>)
                e = g1_add(e, e);
            else
                e = g2_add(e, e);
            break;
    }
}

}  // namespace

PowersOfTau corrupt_pp(const PowersOfTau& pp, CorruptMode mode, uint32_t group_index,
                       uint32_t element_index, Drbg& rng) {
    PowersOfTau out = pp;
    if (group_index == 1)
        corrupt_element(out.g1_powers, mode, element_index, rng);
    else if (group_index == 2)
        corrupt_element(out.g2_powers, mode, element_index, rng);
    else
        throw std::out_of_range("corrupt group index must be 1 or 2");
    return out;
}

namespace {
constexpr char kPpMagic[6] = {'T', 'A', 'U', 'P', 'P', 'B'};
constexpr uint8_t kPpVersion = 1;
constexpr uint8_t kPpCurveBn254 = 1;
}  // namespace

Bytes pp_to_bytes(const PowersOfTau& pp) {
    Bytes out;
    out.reserve(16 + pp.g1_powers.size() * kG1Bytes + pp.g2_powers.size() * kG2Bytes);
    append(out, reinterpret_cast<const uint8_t*>(kPpMagic), sizeof(kPpMagic));
    append_u8(out, kPpVersion);
    append_u8(out, kPpCurveBn254);
    append_u32be(out, static_cast<uint32_t>(pp.g1_powers.size()));
    append_u32be(out, static_cast<uint32_t>(pp.g2_powers.size()));
    for (const G1& p : pp.g1_powers) append(out, g1_to_bytes(p));
    for (const G2& q : pp.g2_powers) append(out, g2_to_bytes(q));
    return out;
}

std::optional<PowersOfTau> pp_from_bytes(const Bytes& data) {
    if (data.size() < 16) return std::nullopt;
    if (std::memcmp(data.data(), kPpMagic, sizeof(kPpMagic)) != 0) return std::nullopt;
    if (data[6] != kPpVersion || data[7] != kPpCurveBn254) return std::nullopt;
    uint32_t n = read_u32be(data.data() + 8);
    uint32_t k = read_u32be(data.data() + 12);
    if (n < 1 || k < 1 || n > kMaxPowers || k > kMaxPowers) return std::nullopt;
    size_t want = 16 + size_t(n) * kG1Bytes + size_t(k) * kG2Bytes;
    if (data.size() != want) return std::nullopt;
    PowersOfTau pp;
    pp.g1_powers.reserve(n);
    pp.g2_powers.reserve(k);
    const uint8_t* p = data.data() + 16;
    for (uint32_t i = 0; i < n; i++, p += kG1Bytes) {
        auto g = g1_from_bytes(p, kG1Bytes);
        if (!g) return std::nullopt;
        pp.g1_powers.push_back(*g);
    }
    for (uint32_t j = 0; j < k; j++, p += kG2Bytes) {
        auto g = g2_from_bytes(p, kG2Bytes);
        if (!g) return std::nullopt;
        pp.g2_powers.push_back(*g);
    }
    return pp;
}

std::string pp_to_hex(const PowersOfTau& pp) { return to_hex(pp_to_bytes(pp)); }

std::optional<PowersOfTau> pp_from_hex(const std::string& hex) {
    auto b = from_hex(hex);
    if (!b) return std::nullopt;
    return pp_from_bytes(*b);
}

}  // namespace taulab
