#include "taulab/bn254.hpp"
#include "taulab/keccak.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <string>

namespace taulab {
namespace detail {

namespace {

// Throwing check usable in Release builds; init-time failures must be loud.
void require(bool ok, const char* what) {
    if (!ok) throw std::logic_error(std::string("bn254 invariant violated: ") + what);
}

int limbs_cmp(const Limbs& a, const Limbs& b) {
    for (int i = 3; i >= 0; i--) {
        if (a[i] < b[i]) return -1;
        if (a[i] > b[i]) return 1;
    }
    return 0;
}

Limbs limbs_sub_raw(const Limbs& a, const Limbs& b) {
    Limbs r{};
    uint64_t borrow = 0;
    for (int i = 0; i < 4; i++) {
        uint64_t d = a[i] - b[i];
        uint64_t borrow2 = (a[i] < b[i]) || (d < borrow);
        r[i] = d - borrow;
        borrow = borrow2;
    }
    return r;
}

Limbs limbs_add_raw(const Limbs& a, const Limbs& b) {
    Limbs r{};
    unsigned __int128 c = 0;
    for (int i = 0; i < 4; i++) {
        c += (unsigned __int128)a[i] + b[i];
        r[i] = (uint64_t)c;
        c >>= 64;
    }
    return r;  // no carry out for operands < 2^255
}

mpz_class mpz_from_be(const uint8_t* p, size_t len) {
    mpz_class v;
    mpz_import(v.get_mpz_t(), len, 1, 1, 0, 0, p);
    return v;
}

}  // namespace

Limbs limbs_from_mpz(const mpz_class& v) {
    require(mpz_sgn(v.get_mpz_t()) >= 0, "limbs_from_mpz negative");
    require(mpz_sizeinbase(v.get_mpz_t(), 2) <= 256, "limbs_from_mpz overflow");
    Limbs out{};
    size_t count = 0;
    mpz_export(out.data(), &count, -1, 8, 0, 0, v.get_mpz_t());
    return out;
}

mpz_class mpz_from_limbs(const Limbs& v) {
    mpz_class out;
    mpz_import(out.get_mpz_t(), 4, -1, 8, 0, 0, v.data());
    return out;
}

MontCtx::MontCtx(const mpz_class& m) : mod_mpz(m) {
    require(mpz_odd_p(m.get_mpz_t()) != 0, "modulus must be odd");
    require(mpz_sizeinbase(m.get_mpz_t(), 2) <= 254, "modulus must fit 254 bits");
    mod = limbs_from_mpz(m);
    // n0 = -mod[0]^{-1} mod 2^64 by Newton iteration (correct bits double each round).
    uint64_t inv = mod[0];
    for (int i = 0; i < 6; i++) inv *= 2 - mod[0] * inv;
    n0 = ~inv + 1;
    r2 = limbs_from_mpz((mpz_class(1) << 512) % m);
    one = limbs_from_mpz((mpz_class(1) << 256) % m);
}

// CIOS Montgomery multiplication; for moduli < 2^254 the result before the
// conditional subtraction is < 2*mod, so the top word is always zero.
Limbs MontCtx::mul(const Limbs& a, const Limbs& b) const {
    uint64_t t[6] = {0, 0, 0, 0, 0, 0};
    for (int i = 0; i < 4; i++) {
        uint64_t carry = 0;
        for (int j = 0; j < 4; j++) {
            unsigned __int128 s = (unsigned __int128)a[i] * b[j] + t[j] + carry;
            t[j] = (uint64_t)s;
            carry = (uint64_t)(s >> 64);
        }
        unsigned __int128 s = (unsigned __int128)t[4] + carry;
        t[4] = (uint64_t)s;
        t[5] = (uint64_t)(s >> 64);

        uint64_t m = t[0] * n0;
        s = (unsigned __int128)m * mod[0] + t[0];
        carry = (uint64_t)(s >> 64);
        for (int j = 1; j < 4; j++) {
            s = (unsigned __int128)m * mod[j] + t[j] + carry;
            t[j - 1] = (uint64_t)s;
            carry = (uint64_t)(s >> 64);
        }
        s = (unsigned __int128)t[4] + carry;
        t[3] = (uint64_t)s;
        t[4] = t[5] + (uint64_t)(s >> 64);
    }
    Limbs r{t[0], t[1], t[2], t[3]};
    if (t[4] != 0 || limbs_cmp(r, mod) >= 0) r = limbs_sub_raw(r, mod);
    return r;
}

Limbs MontCtx::add(const Limbs& a, const Limbs& b) const {
    Limbs r = limbs_add_raw(a, b);
    if (limbs_cmp(r, mod) >= 0) r = limbs_sub_raw(r, mod);
    return r;
}

Limbs MontCtx::sub(const Limbs& a, const Limbs& b) const {
    if (limbs_cmp(a, b) >= 0) return limbs_sub_raw(a, b);
    return limbs_sub_raw(limbs_add_raw(a, mod), b);
}

Limbs MontCtx::neg(const Limbs& a) const {
    if (a == Limbs{}) return a;
    return limbs_sub_raw(mod, a);
}

Limbs MontCtx::from_mont(const Limbs& m) const {
    return mul(m, Limbs{1, 0, 0, 0});
}

const MontCtx& fp_ctx() {
    static const MontCtx ctx(mpz_class(
        "21888242871839275222246405745257275088696311157297823662689037894645226208583"));
    return ctx;
}

const MontCtx& fr_ctx() {
    static const MontCtx ctx(mpz_class(
        "21888242871839275222246405745257275088548364400416034343698204186575808495617"));
    return ctx;
}

template <const MontCtx& (*Ctx)()>
Fe<Ctx> Fe<Ctx>::from_mpz(const mpz_class& n) {
    mpz_class m;
    mpz_mod(m.get_mpz_t(), n.get_mpz_t(), Ctx().mod_mpz.get_mpz_t());
    return Fe{Ctx().to_mont(limbs_from_mpz(m))};
}

template <const MontCtx& (*Ctx)()>
std::optional<Fe<Ctx>> Fe<Ctx>::from_bytes32(const uint8_t* p) {
    mpz_class v = mpz_from_be(p, 32);
    if (v >= Ctx().mod_mpz) return std::nullopt;
    return Fe{Ctx().to_mont(limbs_from_mpz(v))};
}

template <const MontCtx& (*Ctx)()>
void Fe<Ctx>::to_bytes32(uint8_t* out) const {
    mpz_class c = to_mpz();
    uint8_t tmp[32];
    size_t count = 0;
    mpz_export(tmp, &count, 1, 1, 0, 0, c.get_mpz_t());
    std::memset(out, 0, 32);
    std::memcpy(out + 32 - count, tmp, count);
}

template <const MontCtx& (*Ctx)()>
Fe<Ctx> Fe<Ctx>::pow(const mpz_class& e) const {
    require(mpz_sgn(e.get_mpz_t()) >= 0, "negative exponent");
    Fe r = one();
    size_t n = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (size_t i = n; i-- > 0;) {
        r = r.sqr();
        if (mpz_tstbit(e.get_mpz_t(), i)) r = r * *this;
    }
    return r;
}

template <const MontCtx& (*Ctx)()>
Fe<Ctx> Fe<Ctx>::inv() const {
    mpz_class c = to_mpz(), out;
    if (mpz_invert(out.get_mpz_t(), c.get_mpz_t(), Ctx().mod_mpz.get_mpz_t()) == 0)
        throw std::domain_error("field inverse of zero");
    return from_mpz(out);
}

template struct Fe<fp_ctx>;
template struct Fe<fr_ctx>;

}  // namespace detail

using detail::require;

// ---------------------------------------------------------------------------
// Quadratic extension

Fp2 Fp2::operator*(const Fp2& o) const {
    Fp a = c0 * o.c0;
    Fp b = c1 * o.c1;
    Fp s = (c0 + c1) * (o.c0 + o.c1);
    return {a - b, s - a - b};
}

Fp2 Fp2::sqr() const {
    Fp t = c0 * c1;
    return {(c0 + c1) * (c0 - c1), t + t};
}

Fp2 Fp2::inv() const {
    Fp n = c0.sqr() + c1.sqr();  // the norm; zero only for the zero element
    Fp ni = n.inv();
    return {c0 * ni, -(c1 * ni)};
}

Fp2 Fp2::pow(const mpz_class& e) const {
    require(mpz_sgn(e.get_mpz_t()) >= 0, "negative exponent");
    Fp2 r = one();
    size_t n = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (size_t i = n; i-- > 0;) {
        r = r.sqr();
        if (mpz_tstbit(e.get_mpz_t(), i)) r = r * *this;
    }
    return r;
}

namespace {

// xi = 9 + u, the cubic/sextic non-residue underpinning the tower.
Fp2 mul_by_xi(const Fp2& a) {
    Fp a9 = a.c0.dbl().dbl().dbl() + a.c0;
    Fp b9 = a.c1.dbl().dbl().dbl() + a.c1;
    return {a9 - a.c1, a.c0 + b9};
}

}  // namespace

// ---------------------------------------------------------------------------
// Sextic and dodecic extensions

Fp6 Fp6::operator*(const Fp6& o) const {
    Fp2 t00 = c0 * o.c0, t11 = c1 * o.c1, t22 = c2 * o.c2;
    Fp2 r0 = t00 + mul_by_xi(c1 * o.c2 + c2 * o.c1);
    Fp2 r1 = c0 * o.c1 + c1 * o.c0 + mul_by_xi(t22);
    Fp2 r2 = c0 * o.c2 + t11 + c2 * o.c0;
    return {r0, r1, r2};
}

Fp6 Fp6::inv() const {
    Fp2 t0 = c0.sqr() - mul_by_xi(c1 * c2);
    Fp2 t1 = mul_by_xi(c2.sqr()) - c0 * c1;
    Fp2 t2 = c1.sqr() - c0 * c2;
    Fp2 d = c0 * t0 + mul_by_xi(c1 * t2 + c2 * t1);
    Fp2 di = d.inv();
    return {t0 * di, t1 * di, t2 * di};
}

Fp6 Fp6::mul_by_v() const {
    return {mul_by_xi(c2), c0, c1};
}

Fp12 Fp12::operator*(const Fp12& o) const {
    Fp6 a = c0 * o.c0;
    Fp6 b = c1 * o.c1;
    Fp6 s = (c0 + c1) * (o.c0 + o.c1);
    return {a + b.mul_by_v(), s - a - b};
}

Fp12 Fp12::sqr() const {
    Fp6 t = c0 * c1;
    Fp6 s = (c0 + c1) * (c0 + c1.mul_by_v());
    return {s - t - t.mul_by_v(), t + t};
}

Fp12 Fp12::inv() const {
    Fp6 d = c0.sqr() - c1.sqr().mul_by_v();
    Fp6 di = d.inv();
    return {c0 * di, -(c1 * di)};
}

Fp12 Fp12::pow(const mpz_class& e) const {
    require(mpz_sgn(e.get_mpz_t()) >= 0, "negative exponent");
    Fp12 r = one();
    size_t n = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (size_t i = n; i-- > 0;) {
        r = r.sqr();
        if (mpz_tstbit(e.get_mpz_t(), i)) r = r * *this;
    }
    return r;
}

Fp12 Fp12::mul_by_line(const Fp& c00, const Fp2& c10, const Fp2& c11) const {
    Fp12 line{{{c00, Fp::zero()}, Fp2::zero(), Fp2::zero()}, {c10, c11, Fp2::zero()}};
    return *this * line;
}

// ---------------------------------------------------------------------------
// Curve context: every derived constant is computed from p, r, and x at init,
// with consistency checks binding the hardcoded strings to the BN polynomial
// identities and the generators to the curve equations.

namespace {

template <class F>
struct Jac {
    F X, Y, Z;  // Z zero means infinity
    bool is_zero() const { return Z.is_zero(); }
};

template <class F>
Jac<F> jac_dbl(const Jac<F>& q) {
    if (q.is_zero()) return q;
    F A = q.X.sqr();
    F B = q.Y.sqr();
    F C = B.sqr();
    F D = ((q.X + B).sqr() - A - C).dbl();
    F E = A + A + A;
    F FF = E.sqr();
    F X3 = FF - D - D;
    F Y3 = E * (D - X3) - C.dbl().dbl().dbl();
    F Z3 = (q.Y * q.Z).dbl();
    return {X3, Y3, Z3};
}

template <class F>
Jac<F> jac_add(const Jac<F>& a, const Jac<F>& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    F Z1Z1 = a.Z.sqr();
    F Z2Z2 = b.Z.sqr();
    F U1 = a.X * Z2Z2;
    F U2 = b.X * Z1Z1;
    F S1 = a.Y * b.Z * Z2Z2;
    F S2 = b.Y * a.Z * Z1Z1;
    if (U1 == U2) {
        if (S1 == S2) return jac_dbl(a);
        return {F::one(), F::one(), F::zero()};
    }
    F H = U2 - U1;
    F I = H.dbl().sqr();
    F J = H * I;
    F R = (S2 - S1).dbl();
    F V = U1 * I;
    F X3 = R.sqr() - J - V - V;
    F Y3 = R * (V - X3) - (S1 * J).dbl();
    F Z3 = ((a.Z + b.Z).sqr() - Z1Z1 - Z2Z2) * H;
    return {X3, Y3, Z3};
}

template <class F>
Jac<F> jac_mul(const Jac<F>& p, const mpz_class& s) {
    require(mpz_sgn(s.get_mpz_t()) >= 0, "negative scalar");
    Jac<F> acc{F::one(), F::one(), F::zero()};
    size_t n = mpz_sizeinbase(s.get_mpz_t(), 2);
    if (mpz_sgn(s.get_mpz_t()) == 0) return acc;
    for (size_t i = n; i-- > 0;) {
        acc = jac_dbl(acc);
        if (mpz_tstbit(s.get_mpz_t(), i)) acc = jac_add(acc, p);
    }
    return acc;
}

template <class F>
Jac<F> jac_from(const F& x, const F& y, bool inf) {
    if (inf) return {F::one(), F::one(), F::zero()};
    return {x, y, F::one()};
}

// Affine result: (x, y, inf).
template <class F>
void jac_to_affine(const Jac<F>& p, F& x, F& y, bool& inf) {
    if (p.is_zero()) {
        inf = true;
        x = F::zero();
        y = F::zero();
        return;
    }
    F zi = p.Z.inv();
    F zi2 = zi.sqr();
    x = p.X * zi2;
    y = p.Y * zi2 * zi;
    inf = false;
}

struct BnCtx {
    mpz_class p, r;
    mpz_class tm1;       // Miller loop length t - 1 = 6x^2
    mpz_class c2;        // twist cofactor 2p - r
    mpz_class sqrt_exp;  // (p+1)/4
    mpz_class leg_exp;   // (p-1)/2
    mpz_class lam[4];    // base-p digits of (p^4 - p^2 + 1)/r
    size_t hard_bits = 0;
    Fp2 xi;
    Fp2 g_w, g_v1, g_v2;  // xi^((p-1)/6), its square, its fourth power
    Fp b1;
    Fp2 b2;
    G1 gen1;
    G2 gen2;

    BnCtx() {
        p = detail::fp_ctx().mod_mpz;
        r = detail::fr_ctx().mod_mpz;
        mpz_class x("4965661367192848881");
        mpz_class x2 = x * x, x3 = x2 * x, x4 = x3 * x;
        require(p == 36 * x4 + 36 * x3 + 24 * x2 + 6 * x + 1, "p does not match BN(x)");
        require(r == 36 * x4 + 36 * x3 + 18 * x2 + 6 * x + 1, "r does not match BN(x)");
        tm1 = 6 * x2;
        c2 = 2 * p - r;
        require(p % 4 == 3, "p != 3 mod 4");
        sqrt_exp = (p + 1) / 4;
        leg_exp = (p - 1) / 2;
        require((p - 1) % 6 == 0, "p != 1 mod 6");

        xi = {Fp::from_u64(9), Fp::one()};
        g_w = xi.pow((p - 1) / 6);
        g_v1 = g_w.sqr();
        g_v2 = g_v1.sqr();

        b1 = Fp::from_u64(3);
        b2 = xi.inv().mul_fp(b1);

        gen1 = {Fp::from_u64(1), Fp::from_u64(2), false};
        require(gen1.y.sqr() == gen1.x.sqr() * gen1.x + b1, "G1 generator off curve");

        gen2.x = {Fp::from_mpz(mpz_class("1085704699902305713594457076223282948137075635957851808699051999328"
                                         "5655852781")),
                  Fp::from_mpz(mpz_class("1155973203298638710799100402139228578392581286182119253091740315145"
                                         "2391805634"))};
        gen2.y = {Fp::from_mpz(mpz_class("8495653923123431417604973247489272438418190587263600148770280649306"
                                         "958101930")),
                  Fp::from_mpz(mpz_class("4082367875863433681332203403145435568316851327593401208105741076214"
                                         "120093531"))};
        gen2.inf = false;
        require(gen2.y.sqr() == gen2.x.sqr() * gen2.x + b2, "G2 generator off twist");
        require(jac_mul(jac_from(gen2.x, gen2.y, false), r).is_zero(),
                "G2 generator not of order r");

        mpz_class H = p * p * p * p - p * p + 1;
        require(H % r == 0, "r does not divide the cyclotomic exponent");
        H /= r;
        for (int i = 0; i < 3; i++) {
            lam[i] = H % p;
            H /= p;
        }
        lam[3] = H;
        require(lam[3] < p, "hard-part digit overflow");
        for (int i = 0; i < 4; i++) {
            size_t bits = mpz_sizeinbase(lam[i].get_mpz_t(), 2);
            if (lam[i] == 0) bits = 0;
            hard_bits = std::max(hard_bits, bits);
        }
    }
};

const BnCtx& bn() {
    static const BnCtx ctx;
    return ctx;
}

std::optional<Fp> fp_sqrt(const Fp& a) {
    Fp c = a.pow(bn().sqrt_exp);
    if (c.sqr() == a) return c;
    return std::nullopt;
}

bool fp_is_square(const Fp& a) {
    if (a.is_zero()) return true;
    return a.pow(bn().leg_exp) == Fp::one();
}

}  // namespace

Fp12 Fp12::frobenius() const {
    const BnCtx& c = bn();
    auto frob6 = [&](const Fp6& a) -> Fp6 {
        return {a.c0.conj(), a.c1.conj() * c.g_v1, a.c2.conj() * c.g_v2};
    };
    Fp6 a = frob6(c0);
    Fp6 b = frob6(c1);
    return {a, {b.c0 * c.g_w, b.c1 * c.g_w, b.c2 * c.g_w}};
}

Fp12 Fp12::frobenius_n(int k) const {
    Fp12 r = *this;
    for (int i = 0; i < k; i++) r = r.frobenius();
    return r;
}

std::optional<Fp2> fp2_sqrt(const Fp2& a) {
    if (a.is_zero()) return Fp2::zero();
    if (a.c1.is_zero()) {
        // Element of the base field: -1 is a non-residue (p = 3 mod 4), so either
        // c0 or -c0 is square; in the latter case the root is purely imaginary.
        if (auto s = fp_sqrt(a.c0)) return Fp2{*s, Fp::zero()};
        auto s = fp_sqrt(-a.c0);
        if (!s) return std::nullopt;
        return Fp2{Fp::zero(), *s};
    }
    Fp n = a.c0.sqr() + a.c1.sqr();
    auto lam = fp_sqrt(n);
    if (!lam) return std::nullopt;
    Fp half = Fp::from_u64(2).inv();
    Fp delta = (a.c0 + *lam) * half;
    if (!fp_is_square(delta)) delta = delta - *lam;
    auto x0 = fp_sqrt(delta);
    if (!x0 || x0->is_zero()) return std::nullopt;
    Fp x1 = a.c1 * x0->dbl().inv();
    Fp2 cand{*x0, x1};
    if (!(cand.sqr() == a)) return std::nullopt;
    return cand;
}

// ---------------------------------------------------------------------------
// Groups

const G1& G1::generator() { return bn().gen1; }
const G2& G2::generator() { return bn().gen2; }

bool G1::on_curve() const {
    if (inf) return true;
    return y.sqr() == x.sqr() * x + bn().b1;
}

bool G2::on_curve() const {
    if (inf) return true;
    return y.sqr() == x.sqr() * x + bn().b2;
}

bool G2::in_subgroup() const {
    if (inf) return true;
    return jac_mul(jac_from(x, y, false), detail::fr_ctx().mod_mpz).is_zero();
}

G1 g1_add(const G1& a, const G1& b) {
    G1 out;
    jac_to_affine(jac_add(jac_from(a.x, a.y, a.inf), jac_from(b.x, b.y, b.inf)), out.x,
                  out.y, out.inf);
    return out;
}

G1 g1_neg(const G1& a) {
    if (a.inf) return a;
    return {a.x, -a.y, false};
}

G1 g1_sub(const G1& a, const G1& b) { return g1_add(a, g1_neg(b)); }

G1 g1_mul_mpz(const G1& p, const mpz_class& s) {
    G1 out;
    jac_to_affine(jac_mul(jac_from(p.x, p.y, p.inf), s), out.x, out.y, out.inf);
    return out;
}

G1 g1_mul(const G1& p, const Fr& s) { return g1_mul_mpz(p, s.to_mpz()); }

G2 g2_add(const G2& a, const G2& b) {
    G2 out;
    jac_to_affine(jac_add(jac_from(a.x, a.y, a.inf), jac_from(b.x, b.y, b.inf)), out.x,
                  out.y, out.inf);
    return out;
}

G2 g2_neg(const G2& a) {
    if (a.inf) return a;
    return {a.x, -a.y, false};
}

G2 g2_sub(const G2& a, const G2& b) { return g2_add(a, g2_neg(b)); }

G2 g2_mul_mpz(const G2& p, const mpz_class& s) {
    G2 out;
    jac_to_affine(jac_mul(jac_from(p.x, p.y, p.inf), s), out.x, out.y, out.inf);
    return out;
}

G2 g2_mul(const G2& p, const Fr& s) { return g2_mul_mpz(p, s.to_mpz()); }

// ---------------------------------------------------------------------------
// Encodings

Bytes g1_to_bytes(const G1& p) {
    Bytes out(kG1Bytes, 0);
    if (!p.inf) {
        p.x.to_bytes32(out.data());
        p.y.to_bytes32(out.data() + 32);
    }
    return out;
}

Bytes g2_to_bytes(const G2& p) {
    Bytes out(kG2Bytes, 0);
    if (!p.inf) {
        p.x.c1.to_bytes32(out.data());
        p.x.c0.to_bytes32(out.data() + 32);
        p.y.c1.to_bytes32(out.data() + 64);
        p.y.c0.to_bytes32(out.data() + 96);
    }
    return out;
}

namespace {
bool all_zero(const uint8_t* p, size_t len) {
    for (size_t i = 0; i < len; i++)
        if (p[i]) return false;
    return true;
}
}  // namespace

std::optional<G1> g1_from_bytes(const uint8_t* p, size_t len) {
    if (len != kG1Bytes) return std::nullopt;
    if (all_zero(p, len)) return G1::zero();
    auto x = Fp::from_bytes32(p);
    auto y = Fp::from_bytes32(p + 32);
    if (!x || !y) return std::nullopt;
    G1 out{*x, *y, false};
    if (!out.on_curve()) return std::nullopt;
    return out;
}

std::optional<G2> g2_from_bytes(const uint8_t* p, size_t len) {
    if (len != kG2Bytes) return std::nullopt;
    if (all_zero(p, len)) return G2::zero();
    auto xc1 = Fp::from_bytes32(p);
    auto xc0 = Fp::from_bytes32(p + 32);
    auto yc1 = Fp::from_bytes32(p + 64);
    auto yc0 = Fp::from_bytes32(p + 96);
    if (!xc0 || !xc1 || !yc0 || !yc1) return std::nullopt;
    G2 out{{*xc0, *xc1}, {*yc0, *yc1}, false};
    if (!out.on_curve()) return std::nullopt;
    if (!out.in_subgroup()) return std::nullopt;
    return out;
}

// ---------------------------------------------------------------------------
// Pairing

namespace {

std::atomic<uint64_t> g_pair_count{0};

// Ate Miller loop over the scalar t-1 = 6x^2, twist coordinates kept affine.
// Lines are evaluated at P and accumulated as sparse Fp12 elements on the
// basis {1, w, vw}. The loop scalar is far below r, so no step can hit a
// vertical line or a zero denominator for order-r inputs.
Fp12 miller(const G1& P, const G2& Q) {
    Fp2 xT = Q.x, yT = Q.y;
    Fp12 f = Fp12::one();
    const mpz_class& s = bn().tm1;
    size_t n = mpz_sizeinbase(s.get_mpz_t(), 2);
    for (size_t i = n - 1; i-- > 0;) {
        // Tangent at T, evaluated at P; then T <- 2T.
        Fp2 x2 = xT.sqr();
        Fp2 lam = (x2 + x2 + x2) * yT.dbl().inv();
        Fp12 fsq = f.sqr();
        f = fsq.mul_by_line(P.y, lam.mul_fp(-P.x), lam * xT - yT);
        Fp2 x3 = lam.sqr() - xT.dbl();
        yT = lam * (xT - x3) - yT;
        xT = x3;
        if (mpz_tstbit(s.get_mpz_t(), i)) {
            // Chord through T and Q, evaluated at P; then T <- T + Q.
            Fp2 lam2 = (yT - Q.y) * (xT - Q.x).inv();
            f = f.mul_by_line(P.y, lam2.mul_fp(-P.x), lam2 * Q.x - Q.y);
            Fp2 x4 = lam2.sqr() - xT - Q.x;
            yT = lam2 * (xT - x4) - yT;
            xT = x4;
        }
    }
    return f;
}

// f^((p^12-1)/r): easy part by conjugation and Frobenius, hard part
// (p^4-p^2+1)/r as a simultaneous multi-exponentiation over the base-p digits
// against the Frobenius powers of the easy-part output.
Fp12 final_exp(const Fp12& f) {
    Fp12 t = f.conj() * f.inv();
    t = t.frobenius_n(2) * t;

    const BnCtx& c = bn();
    Fp12 base[4] = {t, t.frobenius(), t.frobenius_n(2), t.frobenius_n(3)};
    Fp12 table[16];
    table[0] = Fp12::one();
    for (unsigned m = 1; m < 16; m++) {
        unsigned low = m & (unsigned)(-(int)m);
        int idx = low == 1 ? 0 : low == 2 ? 1 : low == 4 ? 2 : 3;
        table[m] = table[m & (m - 1)] * base[idx];
    }
    Fp12 acc = Fp12::one();
    for (size_t i = c.hard_bits; i-- > 0;) {
        acc = acc.sqr();
        unsigned m = 0;
        for (int j = 0; j < 4; j++)
            if (mpz_tstbit(c.lam[j].get_mpz_t(), i)) m |= 1u << j;
        if (m) acc = acc * table[m];
    }
    return acc;
}

}  // namespace

Gt pair(const G1& a, const G2& b) {
    g_pair_count.fetch_add(1, std::memory_order_relaxed);
    if (a.is_zero() || b.is_zero()) return Gt::identity();
    return Gt{final_exp(miller(a, b))};
}

Gt pair_product(const std::vector<std::pair<G1, G2>>& pairs) {
    g_pair_count.fetch_add(pairs.size(), std::memory_order_relaxed);
    Fp12 f = Fp12::one();
    bool any = false;
    for (const auto& [a, b] : pairs) {
        if (a.is_zero() || b.is_zero()) continue;
        f = f * miller(a, b);
        any = true;
    }
    if (!any) return Gt::identity();
    return Gt{final_exp(f)};
}

bool multi_pair_check(const std::vector<PairTerm>& terms) {
    if (terms.empty()) throw std::invalid_argument("multi_pair_check: empty term list");
    g_pair_count.fetch_add(terms.size(), std::memory_order_relaxed);
    Fp12 f = Fp12::one();
    bool any = false;
    for (const auto& t : terms) {
        G1 a = t.negate ? g1_neg(t.a) : t.a;
        if (a.is_zero() || t.b.is_zero()) continue;
        f = f * miller(a, t.b);
        any = true;
    }
    if (!any) return true;
    return final_exp(f) == Fp12::one();
}

uint64_t pairing_pair_count() { return g_pair_count.load(std::memory_order_relaxed); }
void reset_pairing_pair_count() { g_pair_count.store(0, std::memory_order_relaxed); }

Gt gt_mul(const Gt& a, const Gt& b) { return {a.v * b.v}; }
Gt gt_pow(const Gt& a, const Fr& s) { return {a.v.pow(s.to_mpz())}; }

// ---------------------------------------------------------------------------
// Hashing and randomness

Fr hash_to_scalar(const Bytes& msg) {
    Digest d = keccak256(msg);
    return Fr::from_mpz(detail::mpz_from_be(d.data(), d.size()));
}

G2 hash_to_g2(const Bytes& msg) {
    const BnCtx& c = bn();
    for (uint32_t ctr = 0; ctr < 65536; ctr++) {
        auto coord = [&](uint8_t idx) {
            Bytes d;
            append(d, std::string("POT-H2G2"));
            append_u8(d, idx);
            append_u32be(d, ctr);
            append(d, msg);
            Digest h = keccak256(d);
            return Fp::from_mpz(detail::mpz_from_be(h.data(), h.size()));
        };
        Fp2 x{coord(0), coord(1)};
        Fp2 rhs = x.sqr() * x + c.b2;
        auto y = fp2_sqrt(rhs);
        if (!y) continue;
        // Deterministic sign: the lexicographically smaller of the two encodings.
        Bytes ey(64), eny(64);
        y->c1.to_bytes32(ey.data());
        y->c0.to_bytes32(ey.data() + 32);
        Fp2 ny = -*y;
        ny.c1.to_bytes32(eny.data());
        ny.c0.to_bytes32(eny.data() + 32);
        Fp2 ysel = (eny < ey) ? ny : *y;
        G2 out = g2_mul_mpz(G2{x, ysel, false}, c.c2);
        if (out.is_zero()) continue;
        if (!out.in_subgroup()) throw std::logic_error("hash_to_g2: cofactor clearing failed");
        return out;
    }
    throw std::runtime_error("hash_to_g2: exhausted counter space");
}

Fr random_fr(Drbg& rng) {
    Bytes b = rng.bytes(40);
    return Fr::from_mpz(detail::mpz_from_be(b.data(), b.size()));
}

Fr random_fr_nonzero(Drbg& rng) {
    for (;;) {
        Fr v = random_fr(rng);
        if (!v.is_zero()) return v;
    }
}

const mpz_class& fp_modulus() { return detail::fp_ctx().mod_mpz; }
const mpz_class& fr_modulus() { return detail::fr_ctx().mod_mpz; }

}  // namespace taulab
