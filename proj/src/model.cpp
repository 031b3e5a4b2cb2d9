#include "pmed/model.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pmed/errors.hpp"

namespace pmed {

using nlohmann::json;

Int k2c_encode(const std::string& keyword, size_t code_bits) {
  if (keyword.empty()) throw DomainError("k2c: empty keyword");
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(keyword.data()), keyword.size(), digest);
  Int v = bytes_to_int(digest, SHA256_DIGEST_LENGTH);
  // Keep the leading code_bits bits of the 256-bit digest.
  if (code_bits < 256) {
    Int r;
    mpz_fdiv_q_2exp(r.get_mpz_t(), v.get_mpz_t(), 256 - code_bits);
    return r;
  }
  return v;
}

size_t k2c_bits(const PublicParams& pp) {
  size_t ln = bit_length(pp.n);
  size_t per_spec = ln / 8 > 8 ? ln / 8 - 8 : 0;
  return std::max<size_t>(16, per_spec);
}

Int scale_vital(double value, int factor) {
  if (factor != 1 && factor != 10 && factor != 100)
    throw DomainError("scale_vital: factor must be 1, 10 or 100");
  if (value < 0) throw DomainError("scale_vital: negative vital");
  double scaled = value * factor;
  return Int(static_cast<long>(std::floor(scaled + 0.5)));
}

FieldPredicate FieldPredicate::range(std::string field, Int lo, Int hi) {
  FieldPredicate p;
  p.kind = PredicateKind::Range;
  p.field = std::move(field);
  p.lo = std::move(lo);
  p.hi = std::move(hi);
  return p;
}

FieldPredicate FieldPredicate::range_pair(std::string field, Int lo1, Int lo2, Int hi1, Int hi2) {
  FieldPredicate p;
  p.kind = PredicateKind::RangePair;
  p.field = std::move(field);
  p.lo = std::move(lo1);
  p.lo2 = std::move(lo2);
  p.hi = std::move(hi1);
  p.hi2 = std::move(hi2);
  return p;
}

FieldPredicate FieldPredicate::gt(std::string field, Int threshold) {
  FieldPredicate p;
  p.kind = PredicateKind::Gt;
  p.field = std::move(field);
  p.threshold = std::move(threshold);
  return p;
}

FieldPredicate FieldPredicate::lt(std::string field, Int threshold) {
  FieldPredicate p;
  p.kind = PredicateKind::Lt;
  p.field = std::move(field);
  p.threshold = std::move(threshold);
  return p;
}

FieldPredicate FieldPredicate::keyword_eq(std::string field, std::string keyword) {
  FieldPredicate p;
  p.kind = PredicateKind::KeywordEq;
  p.field = std::move(field);
  p.keyword = std::move(keyword);
  return p;
}

std::optional<const Transition*> WeightedNfaModel::transition(int from, int to) const {
  for (const auto& t : transitions)
    if (t.from == from && t.to == to) return &t;
  return std::nullopt;
}

const Int& PatientState::at(const std::string& field) const {
  auto it = values.find(field);
  if (it == values.end()) throw ValidationError("patient state missing field " + field);
  return it->second;
}

void validate_model(const WeightedNfaModel& model) {
  if (model.n1 < 0) throw ValidationError("model: negative state count");
  if (model.descriptors.size() != static_cast<size_t>(model.n1) + 1)
    throw ValidationError("model: descriptor list must cover states 0..n1");
  for (int a : model.accept)
    if (a < 0 || a > model.n1) throw ValidationError("model: accept state out of range");
  std::set<std::string> alpha(model.alphabet.begin(), model.alphabet.end());
  if (alpha.size() != model.alphabet.size())
    throw ValidationError("model: duplicate alphabet keyword");
  for (const auto& w : model.alphabet) {
    if (w.empty() || w == kEpsilonSymbol)
      throw ValidationError("model: bad alphabet keyword");
    for (char c : w)
      if (static_cast<unsigned char>(c) < 0x20)
        throw ValidationError("model: control character in keyword");
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& t : model.transitions) {
    if (t.from < 0 || t.from > model.n1 || t.to < 0 || t.to > model.n1)
      throw ValidationError("model: transition endpoint out of range");
    if (!seen.insert({t.from, t.to}).second)
      throw ValidationError("model: multiple transitions share a (from,to) cell");
    if (t.symbol != kEpsilonSymbol && !alpha.count(t.symbol))
      throw ValidationError("model: transition symbol not in alphabet: " + t.symbol);
    if (t.weight < 1) throw ValidationError("model: transition weight must be >= 1");
  }
}

// --- JSON ----------------------------------------------------------------------

namespace {

Int json_int(const json& j) {
  if (j.is_number_unsigned()) return Int(static_cast<unsigned long>(j.get<uint64_t>()));
  if (j.is_number_integer()) return Int(static_cast<long>(j.get<int64_t>()));
  if (j.is_string()) return Int(j.get<std::string>());
  throw ValidationError("model json: expected integer");
}

FieldPredicate predicate_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  std::string field = j.at("field").get<std::string>();
  if (kind == "range")
    return FieldPredicate::range(field, json_int(j.at("lo")), json_int(j.at("hi")));
  if (kind == "range_pair")
    return FieldPredicate::range_pair(field, json_int(j.at("lo1")), json_int(j.at("lo2")),
                                      json_int(j.at("hi1")), json_int(j.at("hi2")));
  if (kind == "gt") return FieldPredicate::gt(field, json_int(j.at("threshold")));
  if (kind == "lt") return FieldPredicate::lt(field, json_int(j.at("threshold")));
  if (kind == "keyword_eq")
    return FieldPredicate::keyword_eq(field, j.at("keyword").get<std::string>());
  throw ValidationError("model json: unknown predicate kind " + kind);
}

json predicate_to_json(const FieldPredicate& p) {
  json j;
  j["field"] = p.field;
  switch (p.kind) {
    case PredicateKind::Range:
      j["kind"] = "range";
      j["lo"] = p.lo.get_str();
      j["hi"] = p.hi.get_str();
      break;
    case PredicateKind::RangePair:
      j["kind"] = "range_pair";
      j["lo1"] = p.lo.get_str();
      j["lo2"] = p.lo2.get_str();
      j["hi1"] = p.hi.get_str();
      j["hi2"] = p.hi2.get_str();
      break;
    case PredicateKind::Gt:
      j["kind"] = "gt";
      j["threshold"] = p.threshold.get_str();
      break;
    case PredicateKind::Lt:
      j["kind"] = "lt";
      j["threshold"] = p.threshold.get_str();
      break;
    case PredicateKind::KeywordEq:
      j["kind"] = "keyword_eq";
      j["keyword"] = p.keyword;
      break;
  }
  return j;
}

}  // namespace

WeightedNfaModel load_model_json(const std::string& json_text) {
  json j = json::parse(json_text);
  WeightedNfaModel m;
  int max_id = 0;
  std::map<int, StateDescriptor> descs;
  for (const auto& st : j.at("states")) {
    int id = st.at("id").get<int>();
    max_id = std::max(max_id, id);
    StateDescriptor d;
    if (st.contains("descriptor"))
      for (const auto& p : st.at("descriptor")) d.predicates.push_back(predicate_from_json(p));
    if (!descs.emplace(id, std::move(d)).second)
      throw ValidationError("model json: duplicate state id");
  }
  m.n1 = max_id;
  m.descriptors.resize(m.n1 + 1);
  for (auto& [id, d] : descs) m.descriptors[id] = std::move(d);
  for (const auto& a : j.at("accept")) m.accept.insert(a.get<int>());
  for (const auto& w : j.at("alphabet")) m.alphabet.push_back(w.get<std::string>());
  for (const auto& t : j.at("transitions")) {
    Transition tr;
    tr.from = t.at("from").get<int>();
    tr.to = t.at("to").get<int>();
    tr.symbol = t.at("symbol").get<std::string>();
    tr.weight = json_int(t.at("weight"));
    m.transitions.push_back(std::move(tr));
  }
  if (j.contains("scale_factors"))
    for (auto it = j["scale_factors"].begin(); it != j["scale_factors"].end(); ++it)
      m.scale_factors[it.key()] = it.value().get<int>();
  validate_model(m);
  return m;
}

WeightedNfaModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_model_json(ss.str());
}

std::string model_to_json(const WeightedNfaModel& model) {
  json j;
  j["states"] = json::array();
  for (int i = 0; i <= model.n1; ++i) {
    json st;
    st["id"] = i;
    st["descriptor"] = json::array();
    for (const auto& p : model.descriptors[i].predicates)
      st["descriptor"].push_back(predicate_to_json(p));
    j["states"].push_back(st);
  }
  j["accept"] = json::array();
  for (int a : model.accept) j["accept"].push_back(a);
  j["alphabet"] = model.alphabet;
  j["transitions"] = json::array();
  for (const auto& t : model.transitions) {
    json tr;
    tr["from"] = t.from;
    tr["to"] = t.to;
    tr["symbol"] = t.symbol;
    tr["weight"] = t.weight.get_str();
    j["transitions"].push_back(tr);
  }
  j["scale_factors"] = model.scale_factors;
  return j.dump(2);
}

// --- encryption ------------------------------------------------------------------

std::string state_label(int id) { return "q" + std::to_string(id); }

namespace {

void check_operand(const PublicParams& pp, const Int& v, const char* what) {
  if (v < 0) throw ValidationError(std::string(what) + ": negative operand");
  if (v > compare_bounds(pp).max_operand)
    throw ValidationError(std::string(what) + ": operand exceeds the comparison capacity");
}

Ciphertext enc(const PublicParams& pp, const UserKeyPair& key, const Int& v, Rng& rng) {
  return encrypt(pp, key, v, rng);
}

}  // namespace

EncryptedModel encrypt_model(const PublicParams& pp, const UserKeyPair& pk_a,
                             const WeightedNfaModel& model, Rng& rng) {
  validate_model(model);
  EncryptedModel em;
  em.n1 = model.n1;
  em.accept = model.accept;
  em.pk_a = pk_a.pk;
  em.pk_tag = pk_a.tag;
  em.code_bits = k2c_bits(pp);

  for (int i = 0; i <= model.n1; ++i)
    em.state_labels.push_back(enc(pp, pk_a, k2c_encode(state_label(i), em.code_bits), rng));
  for (int a : model.accept)
    em.accept_labels.push_back(enc(pp, pk_a, k2c_encode(state_label(a), em.code_bits), rng));
  em.epsilon = enc(pp, pk_a, k2c_encode(kEpsilonToken, em.code_bits), rng);

  for (const auto& t : model.transitions) {
    if (t.weight < 1) throw ValidationError("encrypt_model: weight must be >= 1");
    EncTransition et;
    et.from = t.from;
    et.to = t.to;
    Int symbol_code = t.symbol == kEpsilonSymbol ? k2c_encode(kEpsilonToken, em.code_bits)
                                                 : k2c_encode(t.symbol, em.code_bits);
    et.symbol = enc(pp, pk_a, symbol_code, rng);
    et.weight = enc(pp, pk_a, t.weight, rng);
    em.transitions.push_back(std::move(et));
  }

  for (const auto& d : model.descriptors) {
    EncDescriptor ed;
    for (const auto& p : d.predicates) {
      EncPredicate ep;
      ep.kind = p.kind;
      ep.field = p.field;
      switch (p.kind) {
        case PredicateKind::Range:
          check_operand(pp, p.lo, "descriptor range");
          check_operand(pp, p.hi, "descriptor range");
          ep.operands = {enc(pp, pk_a, p.lo, rng), enc(pp, pk_a, p.hi, rng)};
          break;
        case PredicateKind::RangePair:
          check_operand(pp, p.lo, "descriptor range pair");
          check_operand(pp, p.hi, "descriptor range pair");
          check_operand(pp, p.lo2, "descriptor range pair");
          check_operand(pp, p.hi2, "descriptor range pair");
          ep.operands = {enc(pp, pk_a, p.lo, rng), enc(pp, pk_a, p.hi, rng),
                         enc(pp, pk_a, p.lo2, rng), enc(pp, pk_a, p.hi2, rng)};
          break;
        case PredicateKind::Gt:
        case PredicateKind::Lt:
          check_operand(pp, p.threshold, "descriptor threshold");
          ep.operands = {enc(pp, pk_a, p.threshold, rng)};
          break;
        case PredicateKind::KeywordEq:
          ep.operands = {enc(pp, pk_a, k2c_encode(p.keyword, em.code_bits), rng)};
          break;
      }
      ed.predicates.push_back(std::move(ep));
    }
    em.descriptors.push_back(std::move(ed));
  }
  return em;
}

std::vector<EncPatientState> encrypt_query(const PublicParams& pp, const UserKeyPair& pk_b,
                                           const std::vector<PatientState>& query, Rng& rng) {
  std::vector<EncPatientState> out;
  for (const auto& st : query) {
    EncPatientState e;
    for (const auto& [field, v] : st.values) {
      check_operand(pp, v, "patient field");
      e.values[field] = encrypt(pp, pk_b, v, rng);
    }
    out.push_back(std::move(e));
  }
  return out;
}

DecryptedModel decrypt_model(const PublicParams& pp, const UserKeyPair& sk_a,
                             const EncryptedModel& em) {
  DecryptedModel dm;
  for (const auto& ct : em.state_labels) dm.state_labels.push_back(weak_decrypt(pp, sk_a, ct));
  for (const auto& ct : em.accept_labels) dm.accept_labels.push_back(weak_decrypt(pp, sk_a, ct));
  dm.epsilon = weak_decrypt(pp, sk_a, em.epsilon);
  for (const auto& t : em.transitions)
    dm.transitions.push_back({t.from, t.to, weak_decrypt(pp, sk_a, t.symbol),
                              weak_decrypt(pp, sk_a, t.weight)});
  for (const auto& d : em.descriptors) {
    std::vector<DecryptedModel::Pred> preds;
    for (const auto& p : d.predicates) {
      DecryptedModel::Pred out{p.kind, p.field, {}};
      for (const auto& op : p.operands) out.operands.push_back(weak_decrypt(pp, sk_a, op));
      preds.push_back(std::move(out));
    }
    dm.descriptors.push_back(std::move(preds));
  }
  return dm;
}

std::map<Int, std::string> code_name_map(const WeightedNfaModel& model, size_t code_bits) {
  std::map<Int, std::string> names;
  for (int i = 0; i <= model.n1; ++i) names[k2c_encode(state_label(i), code_bits)] = state_label(i);
  for (const auto& w : model.alphabet) names[k2c_encode(w, code_bits)] = w;
  names[k2c_encode(kEpsilonToken, code_bits)] = "(eps)";
  names[k2c_encode(kBottomToken, code_bits)] = "(bot)";
  return names;
}

TransitionArrays build_transition_arrays(const EncryptedModel& em) {
  TransitionArrays arrays;
  arrays.dim = em.n1 + 1;
  arrays.cells.resize(static_cast<size_t>(arrays.dim) * arrays.dim);
  for (const auto& t : em.transitions)
    arrays.cells[static_cast<size_t>(t.from) * arrays.dim + t.to] =
        std::make_pair(t.symbol, t.weight);
  return arrays;
}

}  // namespace pmed
