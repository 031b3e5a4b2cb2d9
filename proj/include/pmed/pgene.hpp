#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmed/protocols.hpp"

namespace pmed {

/// Verbatim reproduces the printed in-place update rule bit-for-bit (it
/// never deactivates S₀,₀ and reads current-step sources); Snapshot is the
/// standard error-tolerant recurrence over the previous symbol's matrix with
/// the ε-deletion source from the current one.
enum class MatchMode { Verbatim, Snapshot };

/// Encrypted transition matrix of the (μ+1)×(m+1) grid: ψ_{j'} on the
/// h-transitions, 0 on v- and d-transitions, 1 everywhere else.
struct UkkonenE {
  size_t m = 0;
  size_t mu = 0;
  std::vector<Ciphertext> cells;

  size_t states() const { return (mu + 1) * (m + 1); }
  size_t idx(size_t i, size_t j) const { return i * (m + 1) + j; }
  const Ciphertext& at(size_t i, size_t j, size_t i2, size_t j2) const {
    return cells[idx(i, j) * states() + idx(i2, j2)];
  }
};

/// (μ+1)×(m+1) activation grid under pk_σ; 0 means active.
struct ActiveMatrix {
  size_t m = 0;
  size_t mu = 0;
  std::vector<Ciphertext> cells;

  Ciphertext& at(size_t i, size_t j) { return cells[i * (m + 1) + j]; }
  const Ciphertext& at(size_t i, size_t j) const { return cells[i * (m + 1) + j]; }
};

UkkonenE build_e(const PublicParams& pp, const Int& pk_a, const std::string& pk_a_tag,
                 const std::vector<Ciphertext>& pattern, size_t mu, Rng& rng);

/// Base initialization: S(0,0) = [0], every other cell [1].
ActiveMatrix init_s(const PublicParams& pp, const Int& pk_sigma, const std::string& sigma_tag,
                    size_t mu, size_t m, Rng& rng);

/// Receives the matrix after every consumed symbol (cell-for-cell tests).
struct PgeneTrace {
  std::vector<ActiveMatrix> after_symbol;
};

/// Error-tolerant match of the text against the pattern's grid automaton.
/// Returns the encrypted activation column (S₀,m … S_μ,m). Exactly
/// n·(μ+1)·m SUT invocations.
std::vector<Ciphertext> pgene_match(ProtocolContext& ctx, const std::vector<Ciphertext>& pattern,
                                    const std::vector<Ciphertext>& text, size_t mu,
                                    MatchMode mode, PgeneTrace* trace = nullptr);

/// Smallest row index whose accept cell decrypts to 0, if any.
std::optional<size_t> accepted(const PublicParams& pp, const UserKeyPair& sk_sigma,
                               const std::vector<Ciphertext>& final_column);

/// Plain-text / FASTA ingestion: ">" header lines skipped, whitespace
/// ignored, letters upper-cased.
std::string load_sequence_file(const std::string& path);

/// Per-character K2C codes for a symbol string.
std::vector<Int> sequence_codes(const std::string& seq, size_t code_bits);

}  // namespace pmed
