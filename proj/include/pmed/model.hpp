#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pmed/pctd.hpp"
#include "pmed/rng.hpp"

namespace pmed {

// Reserved tokens: the JSON symbol name for ε, and the control-prefixed
// keywords whose K2C codes stand for ε and the dummy ⊥ inside ciphertexts.
// User keywords must not contain control characters, so these cannot collide.
inline constexpr const char* kEpsilonSymbol = "EPSILON";
inline constexpr const char* kEpsilonToken = "\x01PMED:EPS\x01";
inline constexpr const char* kBottomToken = "\x01PMED:BOT\x01";

/// Deterministic keyword → Z_N code: SHA-256 of the UTF-8 keyword truncated
/// to max(16, ⌊L(N)/8⌋ − 8) bits, read big-endian. Injective with
/// overwhelming probability at production-scale parameters.
Int k2c_encode(const std::string& keyword, size_t code_bits);
size_t k2c_bits(const PublicParams& pp);

/// Fixed-point vital encoding: value·factor rounded half-up. factor must be
/// one of {1, 10, 100} and agreed between both sides.
Int scale_vital(double value, int factor);

enum class PredicateKind { Range, RangePair, Gt, Lt, KeywordEq };

/// One conjunct of an illness-state descriptor. Numeric operands are
/// fixed-point-scaled nonnegative integers. RangePair covers paired vitals
/// (blood-pressure style): the patient state supplies field+"1" / field+"2".
struct FieldPredicate {
  PredicateKind kind = PredicateKind::Range;
  std::string field;
  Int lo, hi;      // Range; RangePair first component
  Int lo2, hi2;    // RangePair second component
  Int threshold;   // Gt / Lt
  std::string keyword;  // KeywordEq

  static FieldPredicate range(std::string field, Int lo, Int hi);
  static FieldPredicate range_pair(std::string field, Int lo1, Int lo2, Int hi1, Int hi2);
  static FieldPredicate gt(std::string field, Int threshold);
  static FieldPredicate lt(std::string field, Int threshold);
  static FieldPredicate keyword_eq(std::string field, std::string keyword);
};

struct StateDescriptor {
  std::vector<FieldPredicate> predicates;
};

struct Transition {
  int from = 0;
  int to = 0;
  std::string symbol;  // kEpsilonSymbol for ε
  Int weight;
};

/// Plaintext weighted NFA medical model. States are 0..n1 with q₀ = 0;
/// at most one labeled transition per ordered (from, to) pair (the Table-2
/// cell layout); every weight ≥ 1.
struct WeightedNfaModel {
  int n1 = 0;
  std::vector<StateDescriptor> descriptors;  // size n1+1
  std::set<int> accept;
  std::vector<std::string> alphabet;  // therapy keywords; ε not listed
  std::vector<Transition> transitions;
  std::map<std::string, int> scale_factors;

  std::optional<const Transition*> transition(int from, int to) const;
};

void validate_model(const WeightedNfaModel& model);

WeightedNfaModel load_model_json(const std::string& json_text);
WeightedNfaModel load_model_file(const std::string& path);
std::string model_to_json(const WeightedNfaModel& model);

/// One illness state of the patient: numeric fields hold scaled integers,
/// keyword fields hold K2C codes (use set_keyword).
struct PatientState {
  std::map<std::string, Int> values;

  void set_keyword(const std::string& field, const std::string& word, size_t code_bits) {
    values[field] = k2c_encode(word, code_bits);
  }
  const Int& at(const std::string& field) const;
};

// --- encrypted forms ---------------------------------------------------------

struct EncPredicate {
  PredicateKind kind = PredicateKind::Range;
  std::string field;
  std::vector<Ciphertext> operands;  // Range: lo,hi; RangePair: lo1,hi1,lo2,hi2;
                                     // Gt/Lt: threshold; KeywordEq: code
};

struct EncDescriptor {
  std::vector<EncPredicate> predicates;
};

struct EncTransition {
  int from = 0;
  int to = 0;
  Ciphertext symbol;
  Ciphertext weight;
};

/// Encrypted model: labels, symbols, weights, accept labels and ε under
/// pk_A; adjacency, accept positions, and predicate kinds stay structural
/// plaintext exactly as the Table-2 layout exposes them.
struct EncryptedModel {
  int n1 = 0;
  std::set<int> accept;
  Int pk_a;
  std::string pk_tag;
  std::vector<Ciphertext> state_labels;   // enc(k2c("q<i>"))
  std::vector<Ciphertext> accept_labels;  // enc labels of F, in id order
  Ciphertext epsilon;
  std::vector<EncTransition> transitions;
  std::vector<EncDescriptor> descriptors;
  size_t code_bits = 0;
};

struct EncPatientState {
  std::map<std::string, Ciphertext> values;
};

EncryptedModel encrypt_model(const PublicParams& pp, const UserKeyPair& pk_a,
                             const WeightedNfaModel& model, Rng& rng);

std::vector<EncPatientState> encrypt_query(const PublicParams& pp, const UserKeyPair& pk_b,
                                           const std::vector<PatientState>& query, Rng& rng);

/// Decrypted mirror of an encrypted model, with keywords left as codes.
struct DecryptedModel {
  std::vector<Int> state_labels;
  std::vector<Int> accept_labels;
  Int epsilon;
  struct Trans {
    int from, to;
    Int symbol, weight;
  };
  std::vector<Trans> transitions;
  struct Pred {
    PredicateKind kind;
    std::string field;
    std::vector<Int> operands;
  };
  std::vector<std::vector<Pred>> descriptors;
};

DecryptedModel decrypt_model(const PublicParams& pp, const UserKeyPair& sk_a,
                             const EncryptedModel& enc);

/// Canonical label string for state id i ("q0", "q1", ...).
std::string state_label(int id);

/// code → display-name map covering state labels, alphabet, ε and ⊥; used by
/// the patient-side result recovery.
std::map<Int, std::string> code_name_map(const WeightedNfaModel& model, size_t code_bits);

// --- transition arrays for the traversal ---------------------------------------

struct TransitionArrays {
  int dim = 0;  // n1+1
  std::vector<std::optional<std::pair<Ciphertext, Ciphertext>>> cells;  // (value, weight)

  const std::optional<std::pair<Ciphertext, Ciphertext>>& at(int from, int to) const {
    return cells[static_cast<size_t>(from) * dim + to];
  }
};

TransitionArrays build_transition_arrays(const EncryptedModel& enc);

}  // namespace pmed
