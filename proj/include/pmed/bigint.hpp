#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace pmed {

using Int = mpz_class;
using Bytes = std::vector<uint8_t>;

/// Bit length of |x|; bit_length(0) == 0.
inline size_t bit_length(const Int& x) {
  return mpz_sgn(x.get_mpz_t()) == 0 ? 0 : mpz_sizeinbase(x.get_mpz_t(), 2);
}

inline Int pow2(size_t bits) {
  Int r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, bits);
  return r;
}

/// base^exp mod m. exp must be nonnegative.
Int modexp(const Int& base, const Int& exp, const Int& m);

/// Multiplicative inverse of x mod m; throws ArithmeticError if none exists.
Int modinv(const Int& x, const Int& m);

inline Int gcd(const Int& a, const Int& b) {
  Int r;
  mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

inline Int lcm(const Int& a, const Int& b) {
  Int r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

inline Int mod(const Int& a, const Int& m) {
  Int r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

// --- canonical byte encoding ---------------------------------------------
// Every big integer on the wire and in key files is a 4-byte big-endian
// length prefix followed by the minimal big-endian magnitude (empty for 0).
// Only nonnegative integers are serialized.

void put_u32(Bytes& out, uint32_t v);
uint32_t get_u32(const Bytes& in, size_t& pos);

void put_int(Bytes& out, const Int& v);
Int get_int(const Bytes& in, size_t& pos);

void put_bytes(Bytes& out, const Bytes& v);
Bytes get_bytes(const Bytes& in, size_t& pos);

/// Minimal big-endian magnitude bytes of a nonnegative integer.
Bytes int_to_bytes(const Int& v);
Int bytes_to_int(const uint8_t* data, size_t len);

std::string to_hex(const Int& v);

}  // namespace pmed
