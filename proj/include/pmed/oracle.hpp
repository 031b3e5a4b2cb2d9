#pragma once

#include <set>
#include <string>
#include <vector>

#include "pmed/model.hpp"
#include "pmed/protocols.hpp"

// Plaintext reference implementations: ground truth for every encrypted
// computation. Deliberately independent of the engine's code paths:
// recursion instead of the stack machine, direct arithmetic instead of
// protocol algebra. Test-facing only.

namespace pmed::oracle {

/// Integer comparison with the protocol's admissibility check.
int plain_compare(CompareMode mode, const Int& x, const Int& y, const Int& max_operand);

bool plain_predicate(const PatientState& patient, const FieldPredicate& p, size_t code_bits);
bool plain_ssm(const PatientState& patient, const StateDescriptor& desc, size_t code_bits);

/// Brute-force enumeration of all q₀→accept walks under the MVisit/MState
/// constraints, successors ascending and never q₀, accept states terminal.
std::vector<std::vector<int>> plain_paths(const WeightedNfaModel& model, int mvisit, int mstate);

/// First-match sliding-window weights: MWeight when no window of m
/// consecutive non-initial states matches, else the suffix sum past the
/// earliest match.
std::vector<Int> plain_tpw(const Int& mweight, const std::vector<PatientState>& query,
                           const std::vector<std::vector<int>>& paths,
                           const WeightedNfaModel& model, size_t code_bits);

/// Pairwise-minimum winner with the engine's tie rule (left iff strictly
/// smaller).
size_t plain_smin_winner(const Int& w_left, const Int& w_right);

/// Adjacent-pair tournament index over the given weights.
size_t plain_tournament_min(const std::vector<Int>& weights);

/// BPS-k semantics: k tournament rounds; all weights equal to a round's
/// minimum are bumped by MWeight. Returns selected indices in order.
std::vector<size_t> plain_topk(std::vector<Int> weights, int k, const Int& mweight);

// --- P-Gene -------------------------------------------------------------------

enum class PgeneMode { Verbatim, Snapshot };

struct PlainGrid {
  size_t m = 0, mu = 0;
  std::vector<Int> cells;
  Int& at(size_t i, size_t j) { return cells[i * (m + 1) + j]; }
  const Int& at(size_t i, size_t j) const { return cells[i * (m + 1) + j]; }
};

/// Plain mirror of the encrypted recurrence; arithmetic mod N so values
/// match the decrypted cells exactly. Returns the grid after each symbol.
std::vector<PlainGrid> plain_pgene(PgeneMode mode, const std::vector<Int>& pattern,
                                   const std::vector<Int>& text, size_t mu, const Int& n);

size_t levenshtein(const std::string& a, const std::string& b);

}  // namespace pmed::oracle
