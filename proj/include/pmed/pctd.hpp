#pragma once

#include <string>

#include "pmed/bigint.hpp"
#include "pmed/rng.hpp"

namespace pmed {

/// System public parameters PP = (g, N). N = pq for κ-bit primes; g is an
/// element of Z*_{N²} of order (p−1)(q−1)/2. n_sq is cached.
struct PublicParams {
  Int g;
  Int n;
  Int n_sq;
  unsigned kappa = 0;

  size_t modulus_bits() const { return bit_length(n); }
  Bytes serialize() const;
  static PublicParams deserialize(const Bytes& in, size_t& pos);
};

struct MasterKey {
  Int lambda;
};

enum class Role : uint8_t { CP = 1, CSP = 2 };

/// One share of the randomly split master key. λ₁ + λ₂ ≡ 0 (mod λ) and
/// λ₁ + λ₂ ≡ 1 (mod N²).
struct PartialKeyShare {
  Int share;
  Role role = Role::CP;
};

/// Per-user key pair: sk ∈ Z_N, pk = g^sk mod N². The tag names the key in
/// ciphertext metadata ("A", "B", "sigma", ...).
struct UserKeyPair {
  Int sk;
  Int pk;
  std::string tag;
};

struct Ciphertext {
  Int c1;
  Int c2;
  std::string pk_tag;

  Bytes serialize() const;  // c1 then c2, tag is metadata and not serialized
};
Ciphertext ciphertext_from(const Bytes& in, size_t& pos, std::string tag);

/// Result of PD1: C1^{λ₁} mod N².
struct PartialDecryption {
  Int value;
};

struct KeygenResult {
  PublicParams pp;
  MasterKey master;
  Int p;
  Int q;
};

/// Generate (PP, λ) with κ-bit primes p, q. Retries until gcd(p−1,q−1)=2,
/// p ≡ q ≡ 3 (mod 4) and L(N) = 2κ, which makes λ = lcm(p−1,q−1) =
/// (p−1)(q−1)/2 = ord(g) so both decryption paths close. g = −a^{2N} for
/// random a; the order is verified with knowledge of p, q.
KeygenResult keygen(unsigned kappa, Rng& rng);

UserKeyPair gen_user_key(const PublicParams& pp, std::string tag, Rng& rng);

/// Randomized split of λ into (λ₁, λ₂) satisfying the share congruences.
std::pair<PartialKeyShare, PartialKeyShare> split_master(const PublicParams& pp,
                                                         const MasterKey& master, Rng& rng);

/// C1 = pk^r (1+mN), C2 = g^r. Requires 0 ≤ m < N.
Ciphertext encrypt(const PublicParams& pp, const UserKeyPair& pk, const Int& m, Rng& rng);
Ciphertext encrypt(const PublicParams& pp, const Int& pk, const std::string& tag, const Int& m,
                   Rng& rng);

Int weak_decrypt(const PublicParams& pp, const UserKeyPair& key, const Ciphertext& ct);
Int strong_decrypt(const PublicParams& pp, const MasterKey& master, const Ciphertext& ct);

PartialDecryption partial_decrypt_1(const PublicParams& pp, const PartialKeyShare& cp_share,
                                    const Ciphertext& ct);
Int partial_decrypt_2(const PublicParams& pp, const PartialKeyShare& csp_share,
                      const Ciphertext& ct, const PartialDecryption& part);

/// Rerandomize: same plaintext, fresh (c1, c2).
Ciphertext refresh(const PublicParams& pp, const Int& pk, const Ciphertext& ct, Rng& rng);

/// decrypt(hom_add(a,b)) = a+b mod N. Both inputs must share a pk_tag.
Ciphertext hom_add(const PublicParams& pp, const Ciphertext& a, const Ciphertext& b);
/// decrypt(hom_scale(ct,r)) = r·m mod N; r = N−1 negates.
Ciphertext hom_scale(const PublicParams& pp, const Ciphertext& ct, const Int& r);

// --- signed embedding ------------------------------------------------------
// Small values live in Z_N with negatives as N−v. The documented window is
// |v| < 2^{L(N)/8}.

Int signed_bound(const PublicParams& pp);  // 2^{L(N)/8}
Int encode_signed(const PublicParams& pp, const Int& v);
Int decode_signed(const PublicParams& pp, const Int& raw);

// --- comparison-protocol thresholds ---------------------------------------

/// Bit-length thresholds shared by the comparison protocols and SMin.
/// r1 is drawn with L(N)/8 < L(r1) < L(N)/4−1, r2 with L(r2) < L(N)/8, and
/// the CSP-side sign test is "bit length > ⌊L(N)/2⌋ means the masked
/// difference wrapped negative".
struct CompareBounds {
  size_t half_bits;  // ⌊L(N)/2⌋
  Int r1_lo, r1_hi;  // r1 uniform in [r1_lo, r1_hi)
  Int r2_hi;         // r2 uniform in [1, r2_hi)
  Int max_operand;   // largest x with r1·(2x+1)+r2 guaranteed below 2^half_bits
};
CompareBounds compare_bounds(const PublicParams& pp);

/// True if the masked residue wrapped negative per the protocol's test.
inline bool wrapped_negative(const PublicParams& pp, const Int& residue) {
  return bit_length(residue) > bit_length(pp.n) / 2;
}

// --- key file serialization -------------------------------------------------
// Key files are tagged sequences of length-prefixed integers; one tag byte
// per record. Tags: 0x01 kappa, 0x02 N, 0x03 g, 0x04 lambda, 0x05 share,
// 0x06 role, 0x07 sk, 0x08 pk.

Bytes serialize_master(const MasterKey& m);
Bytes serialize_share(const PartialKeyShare& s);
Bytes serialize_user_key(const UserKeyPair& k);
MasterKey deserialize_master(const Bytes& in);
PartialKeyShare deserialize_share(const Bytes& in);
UserKeyPair deserialize_user_key(const Bytes& in, std::string tag);

}  // namespace pmed
