#include "pmed/rng.hpp"

#include <random>

#include "pmed/errors.hpp"

namespace pmed {

Rng::Rng(uint64_t seed) : state_(std::make_unique<gmp_randclass>(gmp_randinit_mt)) {
  Int s;
  mpz_import(s.get_mpz_t(), 1, 1, sizeof(seed), 0, 0, &seed);
  state_->seed(s);
}

Int Rng::below(const Int& n) {
  if (mpz_sgn(n.get_mpz_t()) <= 0) throw ArithmeticError("rng: below(n) needs n > 0");
  return state_->get_z_range(n);
}

Int Rng::nonzero_below(const Int& n) {
  if (n <= 1) throw ArithmeticError("rng: empty nonzero range");
  return 1 + state_->get_z_range(Int(n - 1));
}

Int Rng::range(const Int& lo, const Int& hi) {
  if (lo >= hi) throw ArithmeticError("rng: empty range");
  return lo + state_->get_z_range(Int(hi - lo));
}

Int Rng::bits(size_t k) { return state_->get_z_bits(static_cast<unsigned long>(k)); }

bool Rng::coin() { return mpz_tstbit(Int(state_->get_z_bits(1)).get_mpz_t(), 0) != 0; }

uint64_t Rng::u64() {
  Int v = state_->get_z_bits(64);
  uint64_t out = 0;
  for (int i = 0; i < 64; ++i)
    if (mpz_tstbit(v.get_mpz_t(), i)) out |= (uint64_t(1) << i);
  return out;
}

std::array<uint8_t, 16> Rng::id16() {
  std::array<uint8_t, 16> id{};
  uint64_t a = u64(), b = u64();
  for (int i = 0; i < 8; ++i) {
    id[i] = static_cast<uint8_t>(a >> (56 - 8 * i));
    id[8 + i] = static_cast<uint8_t>(b >> (56 - 8 * i));
  }
  return id;
}

Rng Rng::derive() { return Rng(u64()); }

Rng Rng::from_entropy() {
  std::random_device rd;
  uint64_t seed = (uint64_t(rd()) << 32) ^ rd();
  return Rng(seed);
}

}  // namespace pmed
