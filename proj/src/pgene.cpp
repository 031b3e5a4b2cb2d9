#include "pmed/pgene.hpp"

#include <cctype>
#include <fstream>

#include "pmed/errors.hpp"
#include "pmed/model.hpp"

namespace pmed {

UkkonenE build_e(const PublicParams& pp, const Int& pk_a, const std::string& pk_a_tag,
                 const std::vector<Ciphertext>& pattern, size_t mu, Rng& rng) {
  UkkonenE e;
  e.m = pattern.size();
  e.mu = mu;
  size_t states = e.states();
  e.cells.resize(states * states);
  for (size_t i = 0; i <= mu; ++i) {
    for (size_t j = 0; j <= e.m; ++j) {
      for (size_t i2 = 0; i2 <= mu; ++i2) {
        for (size_t j2 = 0; j2 <= e.m; ++j2) {
          Ciphertext& cell = e.cells[e.idx(i, j) * states + e.idx(i2, j2)];
          if (i2 == i && j2 == j + 1) {
            cell = refresh(pp, pk_a, pattern[j2 - 1], rng);  // h-trans carries ψ_{j'}
          } else if (i2 == i + 1 && (j2 == j || j2 == j + 1)) {
            cell = encrypt(pp, pk_a, pk_a_tag, 0, rng);  // v-trans / d-trans
          } else {
            cell = encrypt(pp, pk_a, pk_a_tag, 1, rng);  // no transition
          }
        }
      }
    }
  }
  return e;
}

ActiveMatrix init_s(const PublicParams& pp, const Int& pk_sigma, const std::string& sigma_tag,
                    size_t mu, size_t m, Rng& rng) {
  ActiveMatrix s;
  s.m = m;
  s.mu = mu;
  s.cells.resize((mu + 1) * (m + 1));
  for (size_t i = 0; i <= mu; ++i)
    for (size_t j = 0; j <= m; ++j)
      s.at(i, j) = encrypt(pp, pk_sigma, sigma_tag, (i == 0 && j == 0) ? 0 : 1, rng);
  return s;
}

std::vector<Ciphertext> pgene_match(ProtocolContext& ctx, const std::vector<Ciphertext>& pattern,
                                    const std::vector<Ciphertext>& text, size_t mu,
                                    MatchMode mode, PgeneTrace* trace) {
  if (text.empty()) throw ValidationError("pgene: empty text sequence");
  if (pattern.empty()) throw ValidationError("pgene: empty pattern");
  const PublicParams& pp = *ctx.pp;
  const size_t m = pattern.size();
  const Int& pk_a = ctx.pk_of(pattern[0].pk_tag);
  const std::string& tag_a = pattern[0].pk_tag;

  UkkonenE e = build_e(pp, pk_a, tag_a, pattern, mu, *ctx.rng);
  ActiveMatrix s = init_s(pp, ctx.pk_sigma(), ctx.sigma_tag, mu, m, *ctx.rng);
  if (mode == MatchMode::Snapshot) {
    // ε-closure of the initial state plus the leading-insertion column:
    // (i,i) and (i,0) start active; (k−1,0) is retired after symbol k.
    for (size_t i = 1; i <= mu; ++i) {
      if (i <= m) s.at(i, i) = enc_sigma(ctx, 0);
      s.at(i, 0) = enc_sigma(ctx, 0);
    }
  }

  for (size_t k = 1; k <= text.size(); ++k) {
    const Ciphertext& phi = text[k - 1];
    if (mode == MatchMode::Verbatim) {
      // In-place update exactly as printed: row 0 reads its own just-updated
      // left neighbor, deeper rows read current-step values throughout.
      for (size_t j = 1; j <= m; ++j) {
        Ciphertext b0 = sut_neq(ctx, phi, e.at(0, j - 1, 0, j));
        s.at(0, j) = sad(ctx, s.at(0, j - 1), b0);
      }
      for (size_t i = 1; i <= mu; ++i) {
        for (size_t j = 1; j <= m; ++j) {
          Ciphertext b0 = sut_neq(ctx, phi, e.at(i, j - 1, i, j));
          Ciphertext b1 = sad(ctx, s.at(i, j - 1), b0);
          Ciphertext b2 = smd(ctx, s.at(i - 1, j - 1), s.at(i - 1, j));
          Ciphertext b3 = smd(ctx, s.at(i, j - 1), b2);
          s.at(i, j) = smd(ctx, b1, b3);
        }
      }
    } else {
      ActiveMatrix cur = s;  // column 0 carries over; all j ≥ 1 recomputed
      for (size_t j = 1; j <= m; ++j) {
        Ciphertext b0 = sut_neq(ctx, phi, e.at(0, j - 1, 0, j));
        cur.at(0, j) = sad(ctx, s.at(0, j - 1), b0);
      }
      for (size_t i = 1; i <= mu; ++i) {
        for (size_t j = 1; j <= m; ++j) {
          Ciphertext b0 = sut_neq(ctx, phi, e.at(i, j - 1, i, j));
          Ciphertext b1 = sad(ctx, s.at(i, j - 1), b0);         // h from previous step
          Ciphertext b2 = smd(ctx, s.at(i - 1, j - 1), s.at(i - 1, j));  // Σ-d and v
          Ciphertext b3 = smd(ctx, cur.at(i - 1, j - 1), b2);   // ε-d from current step
          cur.at(i, j) = smd(ctx, b1, b3);
        }
      }
      if (k - 1 <= mu) cur.at(k - 1, 0) = enc_sigma(ctx, 1);
      s = std::move(cur);
    }
    if (trace) trace->after_symbol.push_back(s);
  }

  std::vector<Ciphertext> final_column;
  for (size_t i = 0; i <= mu; ++i) final_column.push_back(s.at(i, m));
  return final_column;
}

std::optional<size_t> accepted(const PublicParams& pp, const UserKeyPair& sk_sigma,
                               const std::vector<Ciphertext>& final_column) {
  for (size_t i = 0; i < final_column.size(); ++i)
    if (weak_decrypt(pp, sk_sigma, final_column[i]) == 0) return i;
  return std::nullopt;
}

std::string load_sequence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sequence file: " + path);
  std::string out, line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '>') continue;
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  if (out.empty()) throw ConfigError("sequence file has no symbols: " + path);
  return out;
}

std::vector<Int> sequence_codes(const std::string& seq, size_t code_bits) {
  std::vector<Int> codes;
  for (char c : seq) codes.push_back(k2c_encode(std::string(1, c), code_bits));
  return codes;
}

}  // namespace pmed
