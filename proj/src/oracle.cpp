#include "pmed/oracle.hpp"

#include <algorithm>

#include "pmed/errors.hpp"

namespace pmed::oracle {

int plain_compare(CompareMode mode, const Int& x, const Int& y, const Int& max_operand) {
  if (x < 0 || y < 0 || x > max_operand || y > max_operand)
    throw DomainError("plain_compare: operand outside the admissible magnitude");
  switch (mode) {
    case CompareMode::GE:
      return x >= y;
    case CompareMode::LE:
      return x <= y;
    case CompareMode::LT:
      return x < y;
    case CompareMode::GT:
      return x > y;
  }
  return 0;
}

bool plain_predicate(const PatientState& patient, const FieldPredicate& p, size_t code_bits) {
  switch (p.kind) {
    case PredicateKind::Range: {
      const Int& v = patient.at(p.field);
      return p.lo <= v && v <= p.hi;
    }
    case PredicateKind::RangePair: {
      const Int& v1 = patient.at(p.field + "1");
      const Int& v2 = patient.at(p.field + "2");
      return p.lo <= v1 && v1 <= p.hi && p.lo2 <= v2 && v2 <= p.hi2;
    }
    case PredicateKind::Gt:
      return patient.at(p.field) > p.threshold;
    case PredicateKind::Lt:
      return patient.at(p.field) < p.threshold;
    case PredicateKind::KeywordEq:
      return patient.at(p.field) == k2c_encode(p.keyword, code_bits);
  }
  return false;
}

bool plain_ssm(const PatientState& patient, const StateDescriptor& desc, size_t code_bits) {
  for (const auto& p : desc.predicates)
    if (!plain_predicate(patient, p, code_bits)) return false;
  return true;
}

namespace {

void enumerate_walks(const WeightedNfaModel& model,
                     const std::vector<std::vector<int>>& successors, std::vector<int>& path,
                     std::vector<int>& count, int mvisit, int mstate,
                     std::vector<std::vector<int>>& out) {
  int here = path.back();
  if (model.accept.count(here)) {
    out.push_back(path);
    return;  // accept states are terminal
  }
  if (static_cast<int>(path.size()) == mstate) return;
  for (int next : successors[here]) {
    if (count[next] >= mvisit) continue;
    path.push_back(next);
    ++count[next];
    enumerate_walks(model, successors, path, count, mvisit, mstate, out);
    path.pop_back();
    --count[next];
  }
}

}  // namespace

std::vector<std::vector<int>> plain_paths(const WeightedNfaModel& model, int mvisit, int mstate) {
  std::vector<std::vector<int>> successors(model.n1 + 1);
  for (const auto& t : model.transitions)
    if (t.to != 0) successors[t.from].push_back(t.to);  // q0 is never re-entered
  for (auto& s : successors) std::sort(s.begin(), s.end());

  std::vector<std::vector<int>> out;
  std::vector<int> path{0};
  std::vector<int> count(model.n1 + 1, 0);
  count[0] = 1;
  enumerate_walks(model, successors, path, count, mvisit, mstate, out);
  return out;
}

std::vector<Int> plain_tpw(const Int& mweight, const std::vector<PatientState>& query,
                           const std::vector<std::vector<int>>& paths,
                           const WeightedNfaModel& model, size_t code_bits) {
  const size_t m = query.size();
  std::vector<Int> weights;
  for (const auto& path : paths) {
    const size_t t_len = path.size() - 1;
    if (t_len < m) {
      weights.push_back(mweight);
      continue;
    }
    Int w = mweight;
    for (size_t t = 1; t + m - 1 <= t_len; ++t) {
      bool hit = true;
      for (size_t k = 1; k <= m && hit; ++k)
        hit = plain_ssm(query[k - 1], model.descriptors[path[t + k - 1]], code_bits);
      if (!hit) continue;
      Int sum = 0;
      for (size_t u = t + m; u <= t_len; ++u)
        sum += (*model.transition(path[u - 1], path[u]))->weight;
      w = sum;
      break;  // first match only
    }
    weights.push_back(w);
  }
  return weights;
}

size_t plain_smin_winner(const Int& w_left, const Int& w_right) {
  return w_left < w_right ? 0 : 1;
}

size_t plain_tournament_min(const std::vector<Int>& weights) {
  std::vector<size_t> layer(weights.size());
  for (size_t i = 0; i < layer.size(); ++i) layer[i] = i;
  while (layer.size() > 1) {
    std::vector<size_t> next;
    for (size_t i = 0; i + 1 < layer.size(); i += 2) {
      size_t pick = plain_smin_winner(weights[layer[i]], weights[layer[i + 1]]);
      next.push_back(pick == 0 ? layer[i] : layer[i + 1]);
    }
    if (layer.size() % 2 == 1) next.push_back(layer.back());
    layer = std::move(next);
  }
  return layer[0];
}

std::vector<size_t> plain_topk(std::vector<Int> weights, int k, const Int& mweight) {
  std::vector<size_t> picks;
  for (int round = 0; round < k; ++round) {
    size_t winner = plain_tournament_min(weights);
    Int min_val = weights[winner];
    picks.push_back(winner);
    for (auto& w : weights)
      if (w == min_val) w *= mweight;  // every weight at the minimum is bumped
  }
  return picks;
}

// --- P-Gene -----------------------------------------------------------------------

std::vector<PlainGrid> plain_pgene(PgeneMode mode, const std::vector<Int>& pattern,
                                   const std::vector<Int>& text, size_t mu, const Int& n) {
  const size_t m = pattern.size();
  PlainGrid s;
  s.m = m;
  s.mu = mu;
  s.cells.assign((mu + 1) * (m + 1), 1);
  s.at(0, 0) = 0;
  if (mode == PgeneMode::Snapshot) {
    for (size_t i = 1; i <= mu; ++i) {
      if (i <= m) s.at(i, i) = 0;
      s.at(i, 0) = 0;
    }
  }

  std::vector<PlainGrid> steps;
  for (size_t k = 1; k <= text.size(); ++k) {
    const Int& phi = text[k - 1];
    if (mode == PgeneMode::Verbatim) {
      for (size_t j = 1; j <= m; ++j) {
        Int b0 = phi != pattern[j - 1] ? 1 : 0;
        s.at(0, j) = mod(s.at(0, j - 1) + b0, n);
      }
      for (size_t i = 1; i <= mu; ++i) {
        for (size_t j = 1; j <= m; ++j) {
          Int b0 = phi != pattern[j - 1] ? 1 : 0;
          Int b1 = mod(s.at(i, j - 1) + b0, n);
          Int b2 = mod(s.at(i - 1, j - 1) * s.at(i - 1, j), n);
          Int b3 = mod(s.at(i, j - 1) * b2, n);
          s.at(i, j) = mod(b1 * b3, n);
        }
      }
    } else {
      PlainGrid cur = s;
      for (size_t j = 1; j <= m; ++j) {
        Int b0 = phi != pattern[j - 1] ? 1 : 0;
        cur.at(0, j) = mod(s.at(0, j - 1) + b0, n);
      }
      for (size_t i = 1; i <= mu; ++i) {
        for (size_t j = 1; j <= m; ++j) {
          Int b0 = phi != pattern[j - 1] ? 1 : 0;
          Int b1 = mod(s.at(i, j - 1) + b0, n);
          Int b2 = mod(s.at(i - 1, j - 1) * s.at(i - 1, j), n);
          Int b3 = mod(cur.at(i - 1, j - 1) * b2, n);
          cur.at(i, j) = mod(b1 * b3, n);
        }
      }
      if (k - 1 <= mu) cur.at(k - 1, 0) = 1;
      s = std::move(cur);
    }
    steps.push_back(s);
  }
  return steps;
}

size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace pmed::oracle
