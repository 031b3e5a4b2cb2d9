#include "pmed/bigint.hpp"

#include "pmed/errors.hpp"

namespace pmed {

Int modexp(const Int& base, const Int& exp, const Int& m) {
  if (mpz_sgn(exp.get_mpz_t()) < 0) throw ArithmeticError("modexp: negative exponent");
  Int r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), m.get_mpz_t());
  return r;
}

Int modinv(const Int& x, const Int& m) {
  Int r;
  if (mpz_invert(r.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t()) == 0)
    throw ArithmeticError("modinv: not invertible");
  return r;
}

void put_u32(Bytes& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

uint32_t get_u32(const Bytes& in, size_t& pos) {
  if (pos + 4 > in.size()) throw TransportError("truncated u32");
  uint32_t v = (uint32_t(in[pos]) << 24) | (uint32_t(in[pos + 1]) << 16) |
               (uint32_t(in[pos + 2]) << 8) | uint32_t(in[pos + 3]);
  pos += 4;
  return v;
}

Bytes int_to_bytes(const Int& v) {
  if (mpz_sgn(v.get_mpz_t()) < 0) throw ArithmeticError("serialize: negative integer");
  if (mpz_sgn(v.get_mpz_t()) == 0) return {};
  size_t count = 0;
  Bytes buf((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8);
  mpz_export(buf.data(), &count, /*order=*/1, 1, /*endian=*/1, 0, v.get_mpz_t());
  buf.resize(count);
  return buf;
}

Int bytes_to_int(const uint8_t* data, size_t len) {
  Int v;
  if (len > 0) mpz_import(v.get_mpz_t(), len, 1, 1, 1, 0, data);
  return v;
}

void put_int(Bytes& out, const Int& v) {
  Bytes mag = int_to_bytes(v);
  put_u32(out, static_cast<uint32_t>(mag.size()));
  out.insert(out.end(), mag.begin(), mag.end());
}

Int get_int(const Bytes& in, size_t& pos) {
  uint32_t len = get_u32(in, pos);
  if (pos + len > in.size()) throw TransportError("truncated integer payload");
  Int v = bytes_to_int(in.data() + pos, len);
  pos += len;
  return v;
}

void put_bytes(Bytes& out, const Bytes& v) {
  put_u32(out, static_cast<uint32_t>(v.size()));
  out.insert(out.end(), v.begin(), v.end());
}

Bytes get_bytes(const Bytes& in, size_t& pos) {
  uint32_t len = get_u32(in, pos);
  if (pos + len > in.size()) throw TransportError("truncated byte payload");
  Bytes v(in.begin() + pos, in.begin() + pos + len);
  pos += len;
  return v;
}

std::string to_hex(const Int& v) {
  char* s = mpz_get_str(nullptr, 16, v.get_mpz_t());
  std::string out(s);
  void (*freefn)(void*, size_t);
  mp_get_memory_functions(nullptr, nullptr, &freefn);
  freefn(s, out.size() + 1);
  return out;
}

}  // namespace pmed
