#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pmed/model.hpp"
#include "pmed/protocols.hpp"

namespace pmed {

/// Traversal and selection parameters. MWeight is the sentinel weight for
/// unmatched paths and must dominate every achievable matched-path sum while
/// staying inside the comparison capacity.
struct PipelineParams {
  int mvisit = 1;
  int mstate = 1;
  Int mweight;
  int k = 1;
};

void validate_pipeline_params(const PublicParams& pp, const PipelineParams& params,
                              const WeightedNfaModel& model);

/// A q₀→accept path: ciphertext lists plus the structural index path.
/// symbols[t] labels the transition states[t] → states[t+1], as does
/// weights[t].
struct TreatmentProcedure {
  std::vector<int> index_path;
  std::vector<Ciphertext> states;
  std::vector<Ciphertext> symbols;
  std::vector<Ciphertext> weights;
};

/// TP with the transition-weight list replaced by one scalar weight under
/// pk_σ.
struct WeightedProcedure {
  std::vector<int> index_path;
  std::vector<Ciphertext> states;
  std::vector<Ciphertext> symbols;
  Ciphertext weight;
};

/// WTP padded with encrypted ⊥ to exactly MState states / MState−1 symbols.
struct ExpandedProcedure {
  std::vector<Ciphertext> states;
  std::vector<Ciphertext> symbols;
  Ciphertext weight;
};

/// Per-round BPS-k instrumentation for tests: the refreshed weight
/// ciphertexts after each round's bump.
struct BpskTrace {
  std::vector<std::vector<Ciphertext>> weights_after_round;
};

/// Test hooks for the selection stack.
struct SelectionOptions {
  /// Returns the permutation π for a round: sent position p carries element
  /// π[p]. Defaults to a fresh rng shuffle per round.
  std::function<std::vector<size_t>(int round, size_t n)> permutation;
  BpskTrace* trace = nullptr;
};

/// Secure illness-state match: conjunction of the descriptor's predicates,
/// folded by SMD from [1]. Empty descriptor yields [1].
Ciphertext ssm(ProtocolContext& ctx, const EncPatientState& patient, const EncDescriptor& desc);

/// Algorithm-2 stack traversal on the encrypted transition arrays. Runs
/// entirely on CP; ciphertexts are opaque payloads. Candidate successors are
/// explored in ascending state id (1..n1); accept states terminate a path.
std::vector<TreatmentProcedure> tpt(const TransitionArrays& arrays, const std::set<int>& accept,
                                    const std::vector<Ciphertext>& state_labels, int mvisit,
                                    int mstate);

/// Sliding-window weight scoring: windows of m consecutive non-initial
/// states; the first matching window contributes the suffix weight sum, no
/// match yields MWeight. threads > 1 scores procedures concurrently.
std::vector<WeightedProcedure> tpw(ProtocolContext& ctx, const Int& mweight,
                                   const std::vector<EncPatientState>& query,
                                   const std::vector<TreatmentProcedure>& tps,
                                   const EncryptedModel& model, int threads = 1);

std::vector<ExpandedProcedure> expand(const PublicParams& pp,
                                      const std::vector<WeightedProcedure>& wtps, int mstate,
                                      const Int& pk_a, const std::string& pk_a_tag, Rng& rng);

/// Oblivious pairwise minimum; ties (W₁ ≥ W₂) select the second procedure.
ExpandedProcedure smin(ProtocolContext& ctx, const ExpandedProcedure& etp1,
                       const ExpandedProcedure& etp2);

/// Binary tournament over adjacent pairs; an odd element is promoted after
/// re-encryption under pk_σ.
ExpandedProcedure smin_n(ProtocolContext& ctx, const std::vector<ExpandedProcedure>& etps);

/// k rounds of SMin_n with masked, permuted zero-testing; every weight equal
/// to the round minimum is bumped by MWeight.
std::vector<ExpandedProcedure> bps_k(ProtocolContext& ctx,
                                     const std::vector<ExpandedProcedure>& etps, int k,
                                     const Int& mweight, const SelectionOptions& opts = {});

/// Patient-side recovery: decrypt under sk_σ, strip ⊥ padding, map codes to
/// display names (hex for unknown codes).
struct RecoveredProcedure {
  Int weight;
  std::vector<std::string> path;
  std::vector<std::string> therapies;
};

RecoveredProcedure recover_result(const PublicParams& pp, const UserKeyPair& sk_sigma,
                                  const ExpandedProcedure& etp, size_t code_bits,
                                  const std::map<Int, std::string>& code_names);

}  // namespace pmed
