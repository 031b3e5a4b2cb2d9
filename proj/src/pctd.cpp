#include "pmed/pctd.hpp"

#include "pmed/errors.hpp"

namespace pmed {

namespace {

// κ-bit prime ≡ 3 (mod 4), top bit set.
Int gen_prime(unsigned kappa, Rng& rng) {
  for (;;) {
    Int cand = rng.bits(kappa);
    mpz_setbit(cand.get_mpz_t(), kappa - 1);
    mpz_setbit(cand.get_mpz_t(), 0);
    mpz_setbit(cand.get_mpz_t(), 1);  // ≡ 3 (mod 4)
    if (mpz_probab_prime_p(cand.get_mpz_t(), 40) > 0) return cand;
  }
}

// L(x) = (x−1)/N; the division must be exact or the key did not match.
Int paillier_l(const PublicParams& pp, const Int& x) {
  Int num = x - 1;
  Int q, r;
  mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), pp.n.get_mpz_t());
  if (mpz_sgn(r.get_mpz_t()) != 0) throw DecryptError("decryption residue not of form 1+mN");
  return q;
}

}  // namespace

KeygenResult keygen(unsigned kappa, Rng& rng) {
  if (kappa < 32) throw DomainError("keygen: kappa below 32");
  for (;;) {
    Int p = gen_prime(kappa, rng);
    Int q = gen_prime(kappa, rng);
    if (p == q) continue;
    if (gcd(p - 1, q - 1) != 2) continue;
    Int n = p * q;
    if (bit_length(n) != 2 * static_cast<size_t>(kappa)) continue;

    PublicParams pp;
    pp.n = n;
    pp.n_sq = n * n;
    pp.kappa = kappa;

    Int lambda = lcm(p - 1, q - 1);  // = (p−1)(q−1)/2 given the gcd condition
    Int a = rng.range(2, pp.n_sq);
    if (gcd(a, pp.n_sq) != 1) continue;
    Int g = modexp(a, 2 * n, pp.n_sq);
    g = pp.n_sq - g;  // −a^{2N} mod N²
    // ord(g) divides λ by construction; reject the degenerate subgroup.
    if (modexp(g, lambda, pp.n_sq) != 1) continue;
    if (modexp(g, lambda / 2, pp.n_sq) == 1) continue;
    pp.g = g;
    return KeygenResult{pp, MasterKey{lambda}, p, q};
  }
}

UserKeyPair gen_user_key(const PublicParams& pp, std::string tag, Rng& rng) {
  Int sk = rng.nonzero_below(pp.n);
  return UserKeyPair{sk, modexp(pp.g, sk, pp.n_sq), std::move(tag)};
}

std::pair<PartialKeyShare, PartialKeyShare> split_master(const PublicParams& pp,
                                                         const MasterKey& master, Rng& rng) {
  const Int& lambda = master.lambda;
  // CRT: t ≡ 0 (mod λ), t ≡ 1 (mod N²); gcd(λ, N²) = 1.
  Int t = lambda * modinv(lambda, pp.n_sq);
  Int m = lambda * pp.n_sq;
  t = mod(t, m);
  Int share1 = rng.nonzero_below(m);
  Int share2 = mod(t - share1, m);
  return {PartialKeyShare{share1, Role::CP}, PartialKeyShare{share2, Role::CSP}};
}

Ciphertext encrypt(const PublicParams& pp, const Int& pk, const std::string& tag, const Int& m,
                   Rng& rng) {
  if (mpz_sgn(m.get_mpz_t()) < 0 || m >= pp.n)
    throw DomainError("encrypt: plaintext outside Z_N");
  Int r = rng.below(pp.n);
  Int c1 = mod(modexp(pk, r, pp.n_sq) * (1 + m * pp.n), pp.n_sq);
  Int c2 = modexp(pp.g, r, pp.n_sq);
  return Ciphertext{c1, c2, tag};
}

Ciphertext encrypt(const PublicParams& pp, const UserKeyPair& pk, const Int& m, Rng& rng) {
  return encrypt(pp, pk.pk, pk.tag, m, rng);
}

Int weak_decrypt(const PublicParams& pp, const UserKeyPair& key, const Ciphertext& ct) {
  Int denom = modexp(ct.c2, key.sk, pp.n_sq);
  Int x = mod(ct.c1 * modinv(denom, pp.n_sq), pp.n_sq);
  return mod(paillier_l(pp, x), pp.n);
}

Int strong_decrypt(const PublicParams& pp, const MasterKey& master, const Ciphertext& ct) {
  Int x = modexp(ct.c1, master.lambda, pp.n_sq);
  Int l = paillier_l(pp, x);
  return mod(l * modinv(mod(master.lambda, pp.n), pp.n), pp.n);
}

PartialDecryption partial_decrypt_1(const PublicParams& pp, const PartialKeyShare& cp_share,
                                    const Ciphertext& ct) {
  return PartialDecryption{modexp(ct.c1, cp_share.share, pp.n_sq)};
}

Int partial_decrypt_2(const PublicParams& pp, const PartialKeyShare& csp_share,
                      const Ciphertext& ct, const PartialDecryption& part) {
  Int c12 = modexp(ct.c1, csp_share.share, pp.n_sq);
  Int x = mod(part.value * c12, pp.n_sq);
  return mod(paillier_l(pp, x), pp.n);
}

Ciphertext refresh(const PublicParams& pp, const Int& pk, const Ciphertext& ct, Rng& rng) {
  Int r = rng.below(pp.n);
  return Ciphertext{mod(ct.c1 * modexp(pk, r, pp.n_sq), pp.n_sq),
                    mod(ct.c2 * modexp(pp.g, r, pp.n_sq), pp.n_sq), ct.pk_tag};
}

Ciphertext hom_add(const PublicParams& pp, const Ciphertext& a, const Ciphertext& b) {
  if (a.pk_tag != b.pk_tag)
    throw KeyMismatchError("hom_add: ciphertexts under different keys (" + a.pk_tag + " vs " +
                           b.pk_tag + ")");
  return Ciphertext{mod(a.c1 * b.c1, pp.n_sq), mod(a.c2 * b.c2, pp.n_sq), a.pk_tag};
}

Ciphertext hom_scale(const PublicParams& pp, const Ciphertext& ct, const Int& r) {
  Int e = mod(r, pp.n);
  return Ciphertext{modexp(ct.c1, e, pp.n_sq), modexp(ct.c2, e, pp.n_sq), ct.pk_tag};
}

Int signed_bound(const PublicParams& pp) { return pow2(bit_length(pp.n) / 8); }

Int encode_signed(const PublicParams& pp, const Int& v) {
  Int bound = signed_bound(pp);
  if (v >= bound || -v >= bound) throw DomainError("encode_signed: magnitude out of window");
  return v >= 0 ? v : Int(pp.n + v);
}

Int decode_signed(const PublicParams& pp, const Int& raw) {
  Int bound = signed_bound(pp);
  if (raw < bound) return raw;
  if (pp.n - raw < bound) return raw - pp.n;
  throw DomainError("decode_signed: residue outside signed window");
}

CompareBounds compare_bounds(const PublicParams& pp) {
  size_t ln = bit_length(pp.n);
  CompareBounds b;
  b.half_bits = ln / 2;
  // L(N)/8 < L(r1) < L(N)/4 − 1  and  L(r2) < L(N)/8.
  b.r1_lo = pow2(ln / 8);
  b.r1_hi = pow2(ln / 4 - 2);
  b.r2_hi = pow2(ln / 8 - 1);
  // r1·(2M+1) + r2 < 2^half_bits with r1 < 2^{ln/4−2}.
  size_t m_bits = b.half_bits - (ln / 4 - 2) - 2;
  b.max_operand = pow2(m_bits) - 1;
  return b;
}

// --- serialization ----------------------------------------------------------

Bytes Ciphertext::serialize() const {
  Bytes out;
  put_int(out, c1);
  put_int(out, c2);
  return out;
}

Ciphertext ciphertext_from(const Bytes& in, size_t& pos, std::string tag) {
  Ciphertext ct;
  ct.c1 = get_int(in, pos);
  ct.c2 = get_int(in, pos);
  ct.pk_tag = std::move(tag);
  return ct;
}

namespace {
constexpr uint8_t kTagKappa = 0x01, kTagN = 0x02, kTagG = 0x03, kTagLambda = 0x04,
                  kTagShare = 0x05, kTagRole = 0x06, kTagSk = 0x07, kTagPk = 0x08;

void put_rec(Bytes& out, uint8_t tag, const Int& v) {
  out.push_back(tag);
  put_int(out, v);
}

Int get_rec(const Bytes& in, size_t& pos, uint8_t want) {
  if (pos >= in.size()) throw TransportError("key file truncated");
  if (in[pos] != want) throw TransportError("unexpected key file record tag");
  ++pos;
  return get_int(in, pos);
}
}  // namespace

Bytes PublicParams::serialize() const {
  Bytes out;
  put_rec(out, kTagKappa, Int(kappa));
  put_rec(out, kTagN, n);
  put_rec(out, kTagG, g);
  return out;
}

PublicParams PublicParams::deserialize(const Bytes& in, size_t& pos) {
  PublicParams pp;
  pp.kappa = static_cast<unsigned>(get_rec(in, pos, kTagKappa).get_ui());
  pp.n = get_rec(in, pos, kTagN);
  pp.g = get_rec(in, pos, kTagG);
  pp.n_sq = pp.n * pp.n;
  return pp;
}

Bytes serialize_master(const MasterKey& m) {
  Bytes out;
  put_rec(out, kTagLambda, m.lambda);
  return out;
}

MasterKey deserialize_master(const Bytes& in) {
  size_t pos = 0;
  return MasterKey{get_rec(in, pos, kTagLambda)};
}

Bytes serialize_share(const PartialKeyShare& s) {
  Bytes out;
  put_rec(out, kTagShare, s.share);
  put_rec(out, kTagRole, Int(static_cast<int>(s.role)));
  return out;
}

PartialKeyShare deserialize_share(const Bytes& in) {
  size_t pos = 0;
  PartialKeyShare s;
  s.share = get_rec(in, pos, kTagShare);
  s.role = static_cast<Role>(get_rec(in, pos, kTagRole).get_ui());
  return s;
}

Bytes serialize_user_key(const UserKeyPair& k) {
  Bytes out;
  put_rec(out, kTagSk, k.sk);
  put_rec(out, kTagPk, k.pk);
  return out;
}

UserKeyPair deserialize_user_key(const Bytes& in, std::string tag) {
  size_t pos = 0;
  UserKeyPair k;
  k.sk = get_rec(in, pos, kTagSk);
  k.pk = get_rec(in, pos, kTagPk);
  k.tag = std::move(tag);
  return k;
}

}  // namespace pmed
