#pragma once

// BN254 (alt_bn128) with EVM-compatible semantics: the curve y^2 = x^3 + 3 over F_p,
// its sextic D-twist over F_p2, the ate pairing into F_p12, and canonical big-endian
// encodings matching the widths of the EVM's uncompressed point representation
// (G1: 64 bytes, G2: 128 bytes, scalars: 32 bytes).
//
// Hot-path field arithmetic is fixed 4x64-limb Montgomery; GMP is the wrapped
// arithmetic layer for every one-time derivation (Montgomery constants, Frobenius
// coefficients, final-exponentiation digits, cofactors) and for odd-sized integer
// work (inversion, exponent bignums). The limb code is differentially tested
// against GMP.

#include "taulab/bytes.hpp"
#include "taulab/drbg.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace taulab {

using Limbs = std::array<uint64_t, 4>;  // little-endian limb order

namespace detail {

// Montgomery context for a fixed 256-bit-or-less odd modulus.
struct MontCtx {
    Limbs mod{};
    uint64_t n0 = 0;  // -mod^{-1} mod 2^64
    Limbs r2{};       // 2^512 mod mod (Montgomery form of 2^256)
    Limbs one{};      // 2^256 mod mod (Montgomery form of 1)
    mpz_class mod_mpz;

    explicit MontCtx(const mpz_class& m);

    Limbs mul(const Limbs& a, const Limbs& b) const;
    Limbs add(const Limbs& a, const Limbs& b) const;
    Limbs sub(const Limbs& a, const Limbs& b) const;
    Limbs neg(const Limbs& a) const;
    Limbs to_mont(const Limbs& canonical) const { return mul(canonical, r2); }
    Limbs from_mont(const Limbs& m) const;
};

Limbs limbs_from_mpz(const mpz_class& v);
mpz_class mpz_from_limbs(const Limbs& v);

const MontCtx& fp_ctx();
const MontCtx& fr_ctx();

template <const MontCtx& (*Ctx)()>
struct Fe {
    Limbs v{};  // Montgomery form; zero-initialized = field zero

    static Fe zero() { return Fe{}; }
    static Fe one() { return Fe{Ctx().one}; }
    static Fe from_u64(uint64_t n) { return Fe{Ctx().to_mont(Limbs{n, 0, 0, 0})}; }
    static Fe from_mpz(const mpz_class& n);
    mpz_class to_mpz() const { return mpz_from_limbs(Ctx().from_mont(v)); }

    // Canonical 32-byte big-endian integer; rejects values >= modulus.
    static std::optional<Fe> from_bytes32(const uint8_t* p);
    void to_bytes32(uint8_t* out) const;
    Bytes to_bytes() const {
        Bytes b(32);
        to_bytes32(b.data());
        return b;
    }

    bool is_zero() const { return v == Limbs{}; }
    bool operator==(const Fe& o) const { return v == o.v; }
    bool operator!=(const Fe& o) const { return v != o.v; }

    Fe operator+(const Fe& o) const { return Fe{Ctx().add(v, o.v)}; }
    Fe operator-(const Fe& o) const { return Fe{Ctx().sub(v, o.v)}; }
    Fe operator*(const Fe& o) const { return Fe{Ctx().mul(v, o.v)}; }
    Fe& operator+=(const Fe& o) { return *this = *this + o; }
    Fe& operator-=(const Fe& o) { return *this = *this - o; }
    Fe& operator*=(const Fe& o) { return *this = *this * o; }
    Fe operator-() const { return Fe{Ctx().neg(v)}; }

    Fe dbl() const { return *this + *this; }
    Fe sqr() const { return *this * *this; }
    Fe pow(const mpz_class& e) const;
    Fe inv() const;  // throws on zero
};

}  // namespace detail

using Fp = detail::Fe<detail::fp_ctx>;
using Fr = detail::Fe<detail::fr_ctx>;

// Scalar helpers. Uniformity bias from modular reduction of a 320-bit draw is < 2^-64.
Fr random_fr(Drbg& rng);
Fr random_fr_nonzero(Drbg& rng);

struct Fp2 {
    Fp c0, c1;  // c0 + c1*u with u^2 = -1

    static Fp2 zero() { return {}; }
    static Fp2 one() { return {Fp::one(), Fp::zero()}; }
    bool is_zero() const { return c0.is_zero() && c1.is_zero(); }
    bool operator==(const Fp2&) const = default;

    Fp2 operator+(const Fp2& o) const { return {c0 + o.c0, c1 + o.c1}; }
    Fp2 operator-(const Fp2& o) const { return {c0 - o.c0, c1 - o.c1}; }
    Fp2 operator-() const { return {-c0, -c1}; }
    Fp2 operator*(const Fp2& o) const;
    Fp2 sqr() const;
    Fp2 dbl() const { return *this + *this; }
    Fp2 inv() const;
    Fp2 conj() const { return {c0, -c1}; }
    Fp2 mul_fp(const Fp& s) const { return {c0 * s, c1 * s}; }
    Fp2 pow(const mpz_class& e) const;
};

std::optional<Fp2> fp2_sqrt(const Fp2& a);

struct Fp6 {
    Fp2 c0, c1, c2;  // c0 + c1*v + c2*v^2 with v^3 = xi = 9 + u

    static Fp6 zero() { return {}; }
    static Fp6 one() { return {Fp2::one(), Fp2::zero(), Fp2::zero()}; }
    bool is_zero() const { return c0.is_zero() && c1.is_zero() && c2.is_zero(); }
    bool operator==(const Fp6&) const = default;

    Fp6 operator+(const Fp6& o) const { return {c0 + o.c0, c1 + o.c1, c2 + o.c2}; }
    Fp6 operator-(const Fp6& o) const { return {c0 - o.c0, c1 - o.c1, c2 - o.c2}; }
    Fp6 operator-() const { return {-c0, -c1, -c2}; }
    Fp6 operator*(const Fp6& o) const;
    Fp6 sqr() const { return *this * *this; }
    Fp6 inv() const;
    Fp6 mul_by_v() const;  // multiply by v
};

struct Fp12 {
    Fp6 c0, c1;  // c0 + c1*w with w^2 = v

    static Fp12 zero() { return {}; }
    static Fp12 one() { return {Fp6::one(), Fp6::zero()}; }
    bool operator==(const Fp12&) const = default;

    Fp12 operator*(const Fp12& o) const;
    Fp12 sqr() const;
    Fp12 inv() const;
    Fp12 conj() const { return {c0, -c1}; }  // = Frobenius^6
    Fp12 frobenius() const;
    Fp12 frobenius_n(int k) const;
    Fp12 pow(const mpz_class& e) const;

    // Multiplication by a sparse ate line: c00 + c10*w + c11*v*w with c00 in Fp.
    Fp12 mul_by_line(const Fp& c00, const Fp2& c10, const Fp2& c11) const;
};

struct G1 {
    Fp x, y;
    bool inf = true;

    static G1 zero() { return {}; }
    static const G1& generator();
    bool is_zero() const { return inf; }
    bool on_curve() const;
    bool operator==(const G1& o) const {
        return inf == o.inf && (inf || (x == o.x && y == o.y));
    }
};

struct G2 {
    Fp2 x, y;
    bool inf = true;

    static G2 zero() { return {}; }
    static const G2& generator();
    bool is_zero() const { return inf; }
    bool on_curve() const;      // on the twist
    bool in_subgroup() const;   // order-r check
    bool operator==(const G2& o) const {
        return inf == o.inf && (inf || (x == o.x && y == o.y));
    }
};

G1 g1_add(const G1& a, const G1& b);
G1 g1_neg(const G1& a);
G1 g1_sub(const G1& a, const G1& b);
G1 g1_mul(const G1& p, const Fr& s);
G1 g1_mul_mpz(const G1& p, const mpz_class& s);

G2 g2_add(const G2& a, const G2& b);
G2 g2_neg(const G2& a);
G2 g2_sub(const G2& a, const G2& b);
G2 g2_mul(const G2& p, const Fr& s);
G2 g2_mul_mpz(const G2& p, const mpz_class& s);

// Canonical encodings. The zero point encodes as all-zero bytes (EVM convention).
// G1: x || y. G2: x.c1 || x.c0 || y.c1 || y.c0 (imaginary limb first, matching EVM
// precompile calldata ordering). Decoding rejects out-of-range coordinates,
// off-curve points, and (for G2) points outside the order-r subgroup.
constexpr size_t kG1Bytes = 64;
constexpr size_t kG2Bytes = 128;
constexpr size_t kFrBytes = 32;

Bytes g1_to_bytes(const G1& p);
Bytes g2_to_bytes(const G2& p);
std::optional<G1> g1_from_bytes(const uint8_t* p, size_t len);
std::optional<G2> g2_from_bytes(const uint8_t* p, size_t len);
inline std::optional<G1> g1_from_bytes(const Bytes& b) { return g1_from_bytes(b.data(), b.size()); }
inline std::optional<G2> g2_from_bytes(const Bytes& b) { return g2_from_bytes(b.data(), b.size()); }

struct Gt {
    Fp12 v = Fp12::one();

    static Gt identity() { return {}; }
    bool is_identity() const { return v == Fp12::one(); }
    bool operator==(const Gt&) const = default;
};

Gt gt_mul(const Gt& a, const Gt& b);
Gt gt_pow(const Gt& a, const Fr& s);

// Ate pairing e: G1 x G2 -> GT (Miller loop length t-1 = 6x^2, one final
// exponentiation). Bilinear and non-degenerate; pairing-product equality
// verdicts coincide with any other pairing on these groups.
Gt pair(const G1& a, const G2& b);
Gt pair_product(const std::vector<std::pair<G1, G2>>& pairs);

struct PairTerm {
    G1 a;
    G2 b;
    bool negate = false;  // contributes e(a,b)^-1
};

// True iff the signed product of pairings is the identity (the EVM
// pairing-equality precompile's semantics). Throws on an empty list.
bool multi_pair_check(const std::vector<PairTerm>& terms);

// Cumulative count of pairs fed through pairing operations (instrumentation
// for gas accounting and operation-count assertions).
uint64_t pairing_pair_count();
void reset_pairing_pair_count();

// Hash to the scalar field: Keccak-256 of the message, reduced mod r.
Fr hash_to_scalar(const Bytes& msg);

// Deterministic try-and-increment hash onto the order-r subgroup of G2:
// counter-indexed Keccak-256 blocks form a candidate x in Fp2 until x^3 + b'
// is square; y is sign-normalized to the lexicographically smaller encoding;
// the cofactor 2p - r is then cleared.
G2 hash_to_g2(const Bytes& msg);

// Base-field modulus p and group order r.
const mpz_class& fp_modulus();
const mpz_class& fr_modulus();

}  // namespace taulab
