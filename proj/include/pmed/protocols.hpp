#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmed/net.hpp"
#include "pmed/pctd.hpp"

namespace pmed {

/// GE/LT are complements, as are LE/GT. GE and LT share the 2x+1 vs 2y
/// doubling; LE and GT share 2x vs 2y+1, so equality lands on the
/// documented side of each mode.
enum class CompareMode { GE, LE, LT, GT };

struct CompareTraceEntry {
  CompareMode mode;
  bool coin;
  Int r1, r2;
};

struct SminTraceEntry {
  bool coin;
  Int r0_scale, r0_offset;
};

/// Test-only knobs: forced coins make both transcript branches reachable,
/// trace sinks expose the masking randomness for the blinding assertions.
struct DebugOptions {
  std::optional<bool> forced_compare_coin;
  std::optional<bool> forced_smin_coin;
  std::vector<CompareTraceEntry>* compare_trace = nullptr;
  std::vector<SminTraceEntry>* smin_trace = nullptr;
};

/// CP-side protocol state: the masking role. Holds λ₁, the public key
/// directory (pk_tag → pk, including "sigma"), a deterministic rng, and the
/// connection to CSP. Bound to one logical party; safe to copy per thread
/// with a derived rng.
struct ProtocolContext {
  const PublicParams* pp = nullptr;
  PartialKeyShare share;  // λ₁
  std::map<std::string, Int> pks;
  std::string sigma_tag = "sigma";
  Rng* rng = nullptr;
  net::Connection* conn = nullptr;
  DebugOptions debug;
  uint64_t sut_calls = 0;

  const Int& pk_of(const std::string& tag) const;
  const Int& pk_sigma() const { return pk_of(sigma_tag); }
};

// Every operation is initiated by CP and returns a ciphertext under pk_σ.
Ciphertext sad(ProtocolContext& ctx, const Ciphertext& x, const Ciphertext& y);
Ciphertext smd(ProtocolContext& ctx, const Ciphertext& x, const Ciphertext& y);
Ciphertext compare(ProtocolContext& ctx, CompareMode mode, const Ciphertext& x,
                   const Ciphertext& y);
Ciphertext set_eq(ProtocolContext& ctx, const Ciphertext& x, const Ciphertext& y);
Ciphertext sut_neq(ProtocolContext& ctx, const Ciphertext& x, const Ciphertext& y);
Ciphertext src_range(ProtocolContext& ctx, const Ciphertext& x, const Ciphertext& y1,
                     const Ciphertext& y2);

/// Fresh encryption of a public constant under pk_σ (CP-local).
Ciphertext enc_sigma(ProtocolContext& ctx, const Int& value);

// --- CSP side -----------------------------------------------------------------

/// CSP-side state: the threshold-assisted role. Holds λ₂ and pk_σ.
struct CspContext {
  PublicParams pp;
  PartialKeyShare share;  // λ₂
  Int pk_sigma;
  std::string sigma_tag = "sigma";
  Rng rng;
};

/// Computes one primitive step (SAD/SMD/CMP/SMIN/BPSK); throws on malformed
/// payloads, which the responder surfaces as a session abort.
Bytes csp_handle_step(CspContext& csp, uint8_t protocol_id, const Bytes& request);

/// Adapter for net::serve_connection / net::CspServer.
net::StepHandler make_csp_handler(CspContext& csp);

// --- payload helpers shared with the pipeline's SMin/BPS-k steps -------------

namespace detail {

struct MaskedPair {
  Ciphertext ct;           // blinded ciphertext
  PartialDecryption part;  // CP's partial decryption of it
};

/// CP-local: blind ct additively with a fresh random under its own key and
/// attach PD1. The blinded plaintext is value + r.
MaskedPair mask_for_csp(ProtocolContext& ctx, const Ciphertext& ct, const Int& r);

void put_ct(Bytes& out, const Ciphertext& ct);
Ciphertext get_ct(const Bytes& in, size_t& pos, std::string tag);

}  // namespace detail

}  // namespace pmed
