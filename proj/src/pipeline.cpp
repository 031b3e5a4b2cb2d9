#include "pmed/pipeline.hpp"

#include <algorithm>
#include <thread>

#include "pmed/errors.hpp"

namespace pmed {

using detail::get_ct;
using detail::put_ct;

void validate_pipeline_params(const PublicParams& pp, const PipelineParams& params,
                              const WeightedNfaModel& model) {
  if (params.mvisit < 1) throw ValidationError("pipeline: MVisit must be >= 1");
  if (params.mstate < 1) throw ValidationError("pipeline: MState must be >= 1");
  if (params.k < 1) throw ValidationError("pipeline: k must be >= 1");
  Int max_w = 0;
  for (const auto& t : model.transitions) max_w = std::max(max_w, t.weight);
  // MWeight must dominate every matched-path suffix sum ...
  Int max_sum = Int(params.mstate - 1) * max_w;
  if (params.mweight <= max_sum)
    throw ValidationError("pipeline: MWeight must exceed (MState-1) * max transition weight");
  // ... and stay inside the signed comparison capacity.
  if (params.mweight > compare_bounds(pp).max_operand)
    throw ValidationError("pipeline: MWeight exceeds the comparison capacity for this key size");
}

// --- SSM ------------------------------------------------------------------------

namespace {

const Ciphertext& patient_field(const EncPatientState& patient, const std::string& field) {
  auto it = patient.values.find(field);
  if (it == patient.values.end())
    throw ValidationError("ssm: patient state missing field " + field);
  return it->second;
}

Ciphertext predicate_indicator(ProtocolContext& ctx, const EncPatientState& patient,
                               const EncPredicate& p) {
  switch (p.kind) {
    case PredicateKind::Range:
      return src_range(ctx, patient_field(patient, p.field), p.operands[0], p.operands[1]);
    case PredicateKind::RangePair: {
      Ciphertext u1 =
          src_range(ctx, patient_field(patient, p.field + "1"), p.operands[0], p.operands[1]);
      Ciphertext u2 =
          src_range(ctx, patient_field(patient, p.field + "2"), p.operands[2], p.operands[3]);
      return smd(ctx, u1, u2);
    }
    case PredicateKind::Gt:
      return compare(ctx, CompareMode::GT, patient_field(patient, p.field), p.operands[0]);
    case PredicateKind::Lt:
      return compare(ctx, CompareMode::LT, patient_field(patient, p.field), p.operands[0]);
    case PredicateKind::KeywordEq:
      return set_eq(ctx, patient_field(patient, p.field), p.operands[0]);
  }
  throw ValidationError("ssm: unknown predicate kind");
}

}  // namespace

Ciphertext ssm(ProtocolContext& ctx, const EncPatientState& patient, const EncDescriptor& desc) {
  Ciphertext u = enc_sigma(ctx, 1);
  for (const auto& p : desc.predicates) u = smd(ctx, u, predicate_indicator(ctx, patient, p));
  return u;
}

// --- TPT ------------------------------------------------------------------------

std::vector<TreatmentProcedure> tpt(const TransitionArrays& arrays, const std::set<int>& accept,
                                    const std::vector<Ciphertext>& state_labels, int mvisit,
                                    int mstate) {
  const int n1 = arrays.dim - 1;
  std::vector<TreatmentProcedure> found;

  auto snapshot = [&](const std::vector<int>& path, const std::vector<Ciphertext>& sy,
                      const std::vector<Ciphertext>& wt) {
    TreatmentProcedure tp;
    tp.index_path = path;
    for (int id : path) tp.states.push_back(state_labels[id]);
    tp.symbols = sy;
    tp.weights = wt;
    found.push_back(std::move(tp));
  };

  std::vector<int> path{0};
  std::vector<Ciphertext> sy, wt;
  // Accept states are leaves: a procedure is recorded the moment its accept
  // state is pushed, including the initial q0 push.
  if (accept.count(0)) {
    snapshot(path, sy, wt);
    return found;
  }
  if (mstate == 1) return found;  // no room to extend past q0

  std::vector<int> count(n1 + 1, 0);
  count[0] = 1;
  // visit[level][from][to]: the edge was already tried from the level-th
  // occurrence of `from`; reset when that occurrence is backtracked.
  std::vector<uint8_t> visit(static_cast<size_t>(mvisit + 1) * (n1 + 1) * (n1 + 1), 0);
  auto visit_at = [&](int level, int from, int to) -> uint8_t& {
    return visit[(static_cast<size_t>(level) * (n1 + 1) + from) * (n1 + 1) + to];
  };

  while (!path.empty()) {
    int alpha = path.back();
    int beta = -1;
    for (int i = 1; i <= n1; ++i) {
      if (arrays.at(alpha, i) && !visit_at(count[alpha], alpha, i)) {
        beta = i;
        visit_at(count[alpha], alpha, i) = 1;
        break;
      }
    }

    if (beta == -1) {
      for (int j = 0; j <= n1; ++j) visit_at(count[alpha], alpha, j) = 0;
      path.pop_back();
      --count[alpha];
      if (!sy.empty()) {
        sy.pop_back();
        wt.pop_back();
      }
    } else if (count[beta] < mvisit) {
      const auto& cell = *arrays.at(alpha, beta);
      sy.push_back(cell.first);
      wt.push_back(cell.second);
      path.push_back(beta);
      ++count[beta];
    }

    if (!path.empty()) {
      int top = path.back();
      if (accept.count(top)) {
        snapshot(path, sy, wt);
        path.pop_back();
        --count[top];
        if (!sy.empty()) {
          sy.pop_back();
          wt.pop_back();
        }
      } else if (static_cast<int>(path.size()) == mstate) {
        path.pop_back();
        --count[top];
        if (!sy.empty()) {
          sy.pop_back();
          wt.pop_back();
        }
      }
    }
  }
  return found;
}

// --- TPW ------------------------------------------------------------------------

namespace {

WeightedProcedure tpw_one(ProtocolContext& ctx, const Int& mweight,
                          const std::vector<EncPatientState>& query,
                          const TreatmentProcedure& tp, const EncryptedModel& model) {
  const size_t m = query.size();
  const size_t t_len = tp.index_path.size() - 1;  // transitions

  WeightedProcedure wtp;
  wtp.index_path = tp.index_path;
  wtp.states = tp.states;
  wtp.symbols = tp.symbols;

  if (t_len < m) {
    wtp.weight = enc_sigma(ctx, mweight);
    return wtp;
  }

  const PublicParams& pp = *ctx.pp;
  Ciphertext w_total = enc_sigma(ctx, 0);
  Ciphertext v_count = enc_sigma(ctx, 0);  // v_i': number of windows matched so far
  Ciphertext enc_m = enc_sigma(ctx, Int(m));
  Ciphertext enc_zero = enc_sigma(ctx, 0);

  for (size_t t = 1; t + m - 1 <= t_len; ++t) {
    Ciphertext match_count = enc_sigma(ctx, 0);  // a_j
    for (size_t k = 1; k <= m; ++k) {
      Ciphertext u =
          ssm(ctx, query[k - 1], model.descriptors[tp.index_path[t + k - 1]]);
      match_count = hom_add(pp, match_count, u);
    }
    Ciphertext window_hit = set_eq(ctx, match_count, enc_m);       // s_j'
    Ciphertext first_time = set_eq(ctx, v_count, enc_zero);        // a_j''
    v_count = hom_add(pp, v_count, window_hit);

    Ciphertext suffix = enc_sigma(ctx, 0);  // s_j''
    for (size_t u = t + m; u <= t_len; ++u) suffix = sad(ctx, suffix, tp.weights[u - 1]);

    Ciphertext gated = smd(ctx, window_hit, suffix);               // a_j'
    Ciphertext contribution = smd(ctx, gated, first_time);         // s_j
    w_total = hom_add(pp, w_total, contribution);
  }

  Ciphertext unmatched = set_eq(ctx, v_count, enc_zero);  // v_i
  w_total = hom_add(pp, w_total, hom_scale(pp, unmatched, mweight));
  wtp.weight = w_total;
  return wtp;
}

}  // namespace

std::vector<WeightedProcedure> tpw(ProtocolContext& ctx, const Int& mweight,
                                   const std::vector<EncPatientState>& query,
                                   const std::vector<TreatmentProcedure>& tps,
                                   const EncryptedModel& model, int threads) {
  if (query.empty()) throw ValidationError("tpw: query must contain at least one state");
  std::vector<WeightedProcedure> out(tps.size());
  if (threads <= 1 || tps.size() <= 1) {
    for (size_t i = 0; i < tps.size(); ++i)
      out[i] = tpw_one(ctx, mweight, query, tps[i], model);
    return out;
  }

  size_t nthreads = std::min<size_t>(threads, tps.size());
  // Independent rngs derived up front so results do not depend on scheduling.
  std::vector<Rng> rngs;
  rngs.reserve(nthreads);
  for (size_t t = 0; t < nthreads; ++t) rngs.push_back(ctx.rng->derive());
  std::vector<uint64_t> sut_counts(nthreads, 0);
  std::vector<std::exception_ptr> errors(nthreads);

  std::vector<std::thread> pool;
  for (size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      ProtocolContext local = ctx;
      local.rng = &rngs[t];
      local.sut_calls = 0;
      try {
        for (size_t i = t; i < tps.size(); i += nthreads)
          out[i] = tpw_one(local, mweight, query, tps[i], model);
      } catch (...) {
        errors[t] = std::current_exception();
      }
      sut_counts[t] = local.sut_calls;
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (uint64_t c : sut_counts) ctx.sut_calls += c;
  return out;
}

// --- expansion --------------------------------------------------------------------

std::vector<ExpandedProcedure> expand(const PublicParams& pp,
                                      const std::vector<WeightedProcedure>& wtps, int mstate,
                                      const Int& pk_a, const std::string& pk_a_tag, Rng& rng) {
  Int bottom = k2c_encode(kBottomToken, k2c_bits(pp));
  std::vector<ExpandedProcedure> out;
  for (const auto& w : wtps) {
    if (w.states.size() > static_cast<size_t>(mstate))
      throw ValidationError("expand: procedure longer than MState");
    ExpandedProcedure e;
    e.states = w.states;
    e.symbols = w.symbols;
    e.weight = w.weight;
    while (e.states.size() < static_cast<size_t>(mstate))
      e.states.push_back(encrypt(pp, pk_a, pk_a_tag, bottom, rng));
    while (e.symbols.size() + 1 < static_cast<size_t>(mstate))
      e.symbols.push_back(encrypt(pp, pk_a, pk_a_tag, bottom, rng));
    out.push_back(std::move(e));
  }
  return out;
}

// --- SMin -------------------------------------------------------------------------

ExpandedProcedure smin(ProtocolContext& ctx, const ExpandedProcedure& etp1,
                       const ExpandedProcedure& etp2) {
  if (etp1.states.size() != etp2.states.size() || etp1.symbols.size() != etp2.symbols.size())
    throw ValidationError("smin: expanded procedures differ in length");
  const PublicParams& pp = *ctx.pp;
  const size_t m_pos = etp1.symbols.size();  // MState − 1

  // W' doubling: 2W₁+1 vs 2W₂ decides ties toward the second procedure.
  Ciphertext w1p = hom_add(pp, hom_scale(pp, etp1.weight, 2), enc_sigma(ctx, 1));
  Ciphertext w2p = hom_scale(pp, etp2.weight, 2);

  bool s = ctx.debug.forced_smin_coin ? *ctx.debug.forced_smin_coin : ctx.rng->coin();
  // a is the coin-selected reference side, b the side whose masked
  // differences travel to CSP.
  const ExpandedProcedure& a = s ? etp1 : etp2;
  const ExpandedProcedure& b = s ? etp2 : etp1;
  const Ciphertext& a_wp = s ? w1p : w2p;
  const Ciphertext& b_wp = s ? w2p : w1p;

  CompareBounds bounds = compare_bounds(pp);
  Int r0_scale = ctx.rng->range(bounds.r1_lo, bounds.r1_hi);
  Int r0_offset = ctx.rng->range(1, bounds.r2_hi);
  if (ctx.debug.smin_trace) ctx.debug.smin_trace->push_back({s, r0_scale, r0_offset});

  // l0 = r0'(W_a' − W_b') + r0 under pk_σ.
  Ciphertext l0 = hom_add(pp, hom_scale(pp, a_wp, r0_scale),
                          hom_scale(pp, b_wp, pp.n - r0_scale));
  l0 = hom_add(pp, l0, enc_sigma(ctx, r0_offset));
  PartialDecryption l0_part = partial_decrypt_1(pp, ctx.share, l0);

  Int r1 = ctx.rng->below(pp.n);
  Ciphertext l1 = hom_add(pp, b.weight, hom_scale(pp, a.weight, pp.n - 1));
  l1 = hom_add(pp, l1, enc_sigma(ctx, r1));

  std::vector<Int> r2(m_pos), r3(m_pos);
  std::vector<Ciphertext> l2(m_pos), l3(m_pos);
  for (size_t i = 0; i < m_pos; ++i) {
    r2[i] = ctx.rng->below(pp.n);
    r3[i] = ctx.rng->below(pp.n);
    l2[i] = sad(ctx, hom_add(pp, b.states[i + 1], hom_scale(pp, a.states[i + 1], pp.n - 1)),
                enc_sigma(ctx, r2[i]));
    l3[i] = sad(ctx, hom_add(pp, b.symbols[i], hom_scale(pp, a.symbols[i], pp.n - 1)),
                enc_sigma(ctx, r3[i]));
  }

  Bytes req;
  put_u32(req, static_cast<uint32_t>(m_pos));
  put_int(req, l0.c1);
  put_int(req, l0_part.value);
  put_ct(req, l1);
  for (const auto& ct : l2) put_ct(req, ct);
  for (const auto& ct : l3) put_ct(req, ct);
  Bytes resp = ctx.conn->call(wire::SMIN_STEP, req);

  size_t pos = 0;
  Ciphertext t_ct = get_ct(resp, pos, ctx.sigma_tag);
  Ciphertext l4 = get_ct(resp, pos, ctx.sigma_tag);
  std::vector<Ciphertext> l5(m_pos), l6(m_pos);
  for (auto& ct : l5) ct = get_ct(resp, pos, ctx.sigma_tag);
  for (auto& ct : l6) ct = get_ct(resp, pos, ctx.sigma_tag);
  if (pos != resp.size()) throw ProtocolError("SMIN response arity");

  ExpandedProcedure out;
  out.weight = hom_add(pp, a.weight, l4);
  out.weight = hom_add(pp, out.weight, hom_scale(pp, t_ct, pp.n - r1));
  out.states.resize(m_pos + 1);
  out.states[0] = sad(ctx, etp1.states[0], enc_sigma(ctx, 0));
  out.symbols.resize(m_pos);
  for (size_t i = 0; i < m_pos; ++i) {
    Ciphertext q = sad(ctx, a.states[i + 1], l5[i]);
    out.states[i + 1] = hom_add(pp, q, hom_scale(pp, t_ct, pp.n - r2[i]));
    Ciphertext y = sad(ctx, a.symbols[i], l6[i]);
    out.symbols[i] = hom_add(pp, y, hom_scale(pp, t_ct, pp.n - r3[i]));
  }
  return out;
}

namespace {

/// Re-encrypt an odd tournament element under pk_σ for type uniformity.
ExpandedProcedure promote_sigma(ProtocolContext& ctx, const ExpandedProcedure& e) {
  const PublicParams& pp = *ctx.pp;
  ExpandedProcedure out;
  if (e.states[0].pk_tag == ctx.sigma_tag) {
    for (const auto& ct : e.states)
      out.states.push_back(refresh(pp, ctx.pk_sigma(), ct, *ctx.rng));
    for (const auto& ct : e.symbols)
      out.symbols.push_back(refresh(pp, ctx.pk_sigma(), ct, *ctx.rng));
  } else {
    for (const auto& ct : e.states) out.states.push_back(sad(ctx, ct, enc_sigma(ctx, 0)));
    for (const auto& ct : e.symbols) out.symbols.push_back(sad(ctx, ct, enc_sigma(ctx, 0)));
  }
  out.weight = refresh(pp, ctx.pk_sigma(), e.weight, *ctx.rng);
  return out;
}

}  // namespace

ExpandedProcedure smin_n(ProtocolContext& ctx, const std::vector<ExpandedProcedure>& etps) {
  if (etps.empty()) throw ValidationError("smin_n: empty input");
  std::vector<ExpandedProcedure> layer = etps;
  if (layer.size() == 1) return promote_sigma(ctx, layer[0]);
  while (layer.size() > 1) {
    std::vector<ExpandedProcedure> next;
    for (size_t i = 0; i + 1 < layer.size(); i += 2) next.push_back(smin(ctx, layer[i], layer[i + 1]));
    if (layer.size() % 2 == 1) next.push_back(promote_sigma(ctx, layer.back()));
    layer = std::move(next);
  }
  return layer[0];
}

// --- BPS-k ------------------------------------------------------------------------

std::vector<ExpandedProcedure> bps_k(ProtocolContext& ctx,
                                     const std::vector<ExpandedProcedure>& etps, int k,
                                     const Int& mweight, const SelectionOptions& opts) {
  const size_t n = etps.size();
  if (k < 1 || static_cast<size_t>(k) > n) throw DomainError("bps_k: k out of range");
  const PublicParams& pp = *ctx.pp;
  CompareBounds bounds = compare_bounds(pp);

  std::vector<ExpandedProcedure> pool = etps;
  std::vector<ExpandedProcedure> selected;

  for (int round = 1; round <= k; ++round) {
    ExpandedProcedure winner = smin_n(ctx, pool);

    // Masked differences r_j(W_min − W_j); zero exactly at the minima.
    std::vector<std::pair<Int, Int>> masked(n);  // (c1, pd1)
    for (size_t j = 0; j < n; ++j) {
      Int r = ctx.rng->range(1, bounds.r1_hi);
      Ciphertext l = hom_add(pp, hom_scale(pp, winner.weight, r),
                             hom_scale(pp, pool[j].weight, pp.n - r));
      masked[j] = {l.c1, partial_decrypt_1(pp, ctx.share, l).value};
    }

    std::vector<size_t> perm;
    if (opts.permutation) {
      perm = opts.permutation(round, n);
    } else {
      perm.resize(n);
      for (size_t i = 0; i < n; ++i) perm[i] = i;
      for (size_t i = n; i > 1; --i)
        std::swap(perm[i - 1], perm[ctx.rng->below(Int(static_cast<unsigned long>(i))).get_ui()]);
    }
    if (perm.size() != n) throw ValidationError("bps_k: bad permutation size");

    Bytes req;
    put_int(req, mweight);
    put_u32(req, static_cast<uint32_t>(n));
    for (size_t p = 0; p < n; ++p) {
      put_int(req, masked[perm[p]].first);
      put_int(req, masked[perm[p]].second);
    }
    Bytes resp = ctx.conn->call(wire::BPSK_STEP, req);
    size_t pos = 0;
    std::vector<Ciphertext> flags(n);
    for (size_t p = 0; p < n; ++p) flags[perm[p]] = get_ct(resp, pos, ctx.sigma_tag);
    if (pos != resp.size()) throw ProtocolError("BPSK response arity");

    for (size_t j = 0; j < n; ++j) pool[j].weight = smd(ctx, pool[j].weight, flags[j]);
    if (opts.trace) {
      std::vector<Ciphertext> snapshot;
      for (const auto& e : pool) snapshot.push_back(e.weight);
      opts.trace->weights_after_round.push_back(std::move(snapshot));
    }
    selected.push_back(std::move(winner));
  }
  return selected;
}

// --- recovery ----------------------------------------------------------------------

RecoveredProcedure recover_result(const PublicParams& pp, const UserKeyPair& sk_sigma,
                                  const ExpandedProcedure& etp, size_t code_bits,
                                  const std::map<Int, std::string>& code_names) {
  Int bottom = k2c_encode(kBottomToken, code_bits);
  auto name_of = [&](const Int& code) {
    auto it = code_names.find(code);
    return it != code_names.end() ? it->second : "0x" + to_hex(code);
  };
  RecoveredProcedure out;
  out.weight = weak_decrypt(pp, sk_sigma, etp.weight);
  for (const auto& ct : etp.states) {
    Int code = weak_decrypt(pp, sk_sigma, ct);
    if (code == bottom) continue;
    out.path.push_back(name_of(code));
  }
  for (const auto& ct : etp.symbols) {
    Int code = weak_decrypt(pp, sk_sigma, ct);
    if (code == bottom) continue;
    out.therapies.push_back(name_of(code));
  }
  return out;
}

}  // namespace pmed
