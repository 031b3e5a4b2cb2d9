// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Each criterion carries its runtime budget; exceeding it is a failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "pmed/bench.hpp"
#include "pmed/harness.hpp"
#include "pmed/oracle.hpp"
#include "pmed/pgene.hpp"
#include "pmed/pipeline.hpp"

using namespace pmed;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define REQUIRE(cond, msg)                                      \
  do {                                                          \
    if (!(cond)) {                                              \
      std::ostringstream os;                                    \
      os << msg;                                                \
      throw CheckFailure(os.str());                             \
    }                                                           \
  } while (0)

int g_failures = 0;

void criterion(int number, const std::string& name, double budget_seconds,
               const std::function<void()>& body) {
  auto start = std::chrono::steady_clock::now();
  std::string failure;
  try {
    body();
  } catch (const std::exception& e) {
    failure = e.what();
  }
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (failure.empty() && elapsed > budget_seconds) {
    std::ostringstream os;
    os << "runtime " << elapsed << " s exceeds budget " << budget_seconds << " s";
    failure = os.str();
  }
  if (failure.empty()) {
    printf("[criterion %d] PASS  %-58s (%.1f s)\n", number, name.c_str(), elapsed);
  } else {
    printf("[criterion %d] FAIL  %-58s (%.1f s)\n    %s\n", number, name.c_str(), elapsed,
           failure.c_str());
    ++g_failures;
  }
  fflush(stdout);
}

std::string fixture(const std::string& name) { return std::string(PMED_FIXTURE_DIR) + "/" + name; }

const WeightedNfaModel& fig3() {
  static WeightedNfaModel m = load_model_file(fixture("fig3_model.json"));
  return m;
}

std::vector<PatientState> fig3_query(size_t code_bits) {
  auto make = [&](long bt, const char* dx) {
    PatientState st;
    st.values["BT"] = bt;
    st.set_keyword("DX", dx, code_bits);
    return st;
  };
  return {make(315, "moderate diabetes"), make(335, "mild diabetes"),
          make(345, "slight diabetes")};
}

const std::vector<std::vector<int>> kFig3Paths = {
    {0, 1, 3, 3, 4, 6}, {0, 1, 3, 3, 4, 7}, {0, 1, 3, 3, 6},
    {0, 1, 3, 4, 1, 3, 4, 6}, {0, 1, 3, 4, 1, 3, 4, 7}, {0, 1, 3, 4, 1, 3, 6},
    {0, 1, 3, 4, 6}, {0, 1, 3, 4, 7}, {0, 1, 3, 6},
    {0, 2, 5, 5, 7}, {0, 2, 5, 7}};

const std::vector<Int> kFig3Weights = {10000, 10000, 10000, 10,    109,  5,
                                       1,     100,   10000, 10000, 10000};

WeightedNfaModel random_model(Rng& rng, int max_states) {
  WeightedNfaModel m;
  m.n1 = static_cast<int>(rng.below(max_states).get_ui());
  m.descriptors.resize(m.n1 + 1);
  m.alphabet = {"a", "b"};
  int accepts = std::min(m.n1 + 1, 1 + static_cast<int>(rng.below(2).get_ui()));
  while (static_cast<int>(m.accept.size()) < accepts)
    m.accept.insert(static_cast<int>(rng.below(m.n1 + 1).get_ui()));
  for (int from = 0; from <= m.n1; ++from)
    for (int to = 0; to <= m.n1; ++to)
      if (rng.below(100) < 38)
        m.transitions.push_back(
            {from, to, rng.coin() ? "a" : (rng.coin() ? "b" : std::string(kEpsilonSymbol)),
             1 + rng.below(9)});
  return m;
}

struct PlainEtp {
  Int weight;
  std::vector<Int> states, symbols;
  bool operator==(const PlainEtp& o) const {
    return weight == o.weight && states == o.states && symbols == o.symbols;
  }
};

PlainEtp decrypt_etp(TwoServerHarness& h, const ExpandedProcedure& e) {
  PlainEtp p;
  p.weight = weak_decrypt(h.pp(), h.sigma(), e.weight);
  for (const auto& ct : e.states) p.states.push_back(weak_decrypt(h.pp(), h.sigma(), ct));
  for (const auto& ct : e.symbols) p.symbols.push_back(weak_decrypt(h.pp(), h.sigma(), ct));
  return p;
}

PlainEtp content_of(TwoServerHarness& h, const ExpandedProcedure& e, const UserKeyPair& key) {
  PlainEtp p;
  p.weight = weak_decrypt(h.pp(), h.sigma(), e.weight);
  for (const auto& ct : e.states) p.states.push_back(weak_decrypt(h.pp(), key, ct));
  for (const auto& ct : e.symbols) p.symbols.push_back(weak_decrypt(h.pp(), key, ct));
  return p;
}

ExpandedProcedure make_etp(TwoServerHarness& h, Rng& vals, const Int& weight, size_t mstate) {
  ExpandedProcedure e;
  e.states.push_back(encrypt(h.pp(), h.hospital(), k2c_encode("q0", 16), h.cp_rng()));
  for (size_t i = 1; i < mstate; ++i)
    e.states.push_back(encrypt(h.pp(), h.hospital(), vals.below(60000), h.cp_rng()));
  for (size_t i = 0; i + 1 < mstate; ++i)
    e.symbols.push_back(encrypt(h.pp(), h.hospital(), vals.below(60000), h.cp_rng()));
  e.weight = enc_sigma(h.ctx(), weight);
  return e;
}

// --- criterion bodies ---------------------------------------------------------

void pctd_roundtrips(unsigned kappa, int plaintexts, uint64_t seed) {
  Rng rng(seed);
  KeygenResult kg = keygen(kappa, rng);
  REQUIRE(bit_length(kg.pp.n) == 2 * static_cast<size_t>(kappa),
          "kappa=" << kappa << " must yield L(N)=" << 2 * kappa);
  UserKeyPair user = gen_user_key(kg.pp, "A", rng);
  auto [cp, csp] = split_master(kg.pp, kg.master, rng);
  for (int i = 0; i < plaintexts; ++i) {
    Int m = rng.below(kg.pp.n);
    Ciphertext ct = encrypt(kg.pp, user, m, rng);
    REQUIRE(weak_decrypt(kg.pp, user, ct) == m, "weak round-trip at kappa " << kappa);
    REQUIRE(strong_decrypt(kg.pp, kg.master, ct) == m, "strong round-trip at kappa " << kappa);
    REQUIRE(partial_decrypt_2(kg.pp, csp, ct, partial_decrypt_1(kg.pp, cp, ct)) == m,
            "threshold round-trip at kappa " << kappa);
  }
  for (int i = 0; i < plaintexts / 4 + 5; ++i) {
    Int a = rng.below(kg.pp.n), b = rng.below(kg.pp.n), r = rng.below(kg.pp.n);
    Ciphertext ca = encrypt(kg.pp, user, a, rng), cb = encrypt(kg.pp, user, b, rng);
    REQUIRE(weak_decrypt(kg.pp, user, hom_add(kg.pp, ca, cb)) == mod(a + b, kg.pp.n),
            "homomorphic add");
    REQUIRE(weak_decrypt(kg.pp, user, hom_scale(kg.pp, ca, r)) == mod(r * a, kg.pp.n),
            "homomorphic scale");
  }
  for (int i = 0; i < 100; ++i) {
    auto [s1, s2] = split_master(kg.pp, kg.master, rng);
    REQUIRE(mod(s1.share + s2.share, kg.master.lambda) == 0, "split congruence mod lambda");
    REQUIRE(mod(s1.share + s2.share, kg.pp.n_sq) == 1, "split congruence mod N^2");
  }
}

void criterion_1() {
  pctd_roundtrips(32, 1000, 0xA1);
  pctd_roundtrips(512, 20, 0xA2);
}

void criterion_2() {
  TwoServerHarness h(32, 0xB1);
  Rng vals(0xB2);
  Int bound = signed_bound(h.pp());
  Int maxop = compare_bounds(h.pp()).max_operand;
  auto enc_a = [&](const Int& v) { return encrypt(h.pp(), h.hospital(), v, h.cp_rng()); };
  auto enc_b = [&](const Int& v) { return encrypt(h.pp(), h.patient(), v, h.cp_rng()); };
  auto dec = [&](const Ciphertext& ct) { return weak_decrypt(h.pp(), h.sigma(), ct); };

  for (int i = 0; i < 200; ++i) {
    Int x = vals.below(h.pp().n), y = vals.below(h.pp().n);
    REQUIRE(dec(sad(h.ctx(), enc_a(x), enc_b(y))) == mod(x + y, h.pp().n), "SAD oracle");
    REQUIRE(dec(smd(h.ctx(), enc_a(x), enc_b(y))) == mod(x * y, h.pp().n), "SMD oracle");
  }
  const CompareMode modes[] = {CompareMode::GE, CompareMode::LE, CompareMode::LT,
                               CompareMode::GT};
  for (int i = 0; i < 200; ++i) {
    Int x = vals.below(bound);
    Int y = vals.coin() ? x : vals.below(bound);
    for (CompareMode mode : modes) {
      int expected = oracle::plain_compare(mode, x, y, maxop);
      for (bool coin : {false, true}) {
        h.ctx().debug.forced_compare_coin = coin;
        REQUIRE(dec(compare(h.ctx(), mode, enc_a(x), enc_b(y))) == expected,
                "comparison oracle x=" << x.get_str() << " y=" << y.get_str());
      }
      h.ctx().debug.forced_compare_coin.reset();
    }
  }
  for (int i = 0; i < 200; ++i) {
    Int x = vals.below(bound);
    Int y = vals.coin() ? x : vals.below(bound);
    REQUIRE(dec(set_eq(h.ctx(), enc_a(x), enc_b(y))) == (x == y ? 1 : 0), "SET oracle");
    REQUIRE(dec(sut_neq(h.ctx(), enc_a(x), enc_b(y))) == (x != y ? 1 : 0), "SUT oracle");
    Int y1 = vals.below(bound), y2 = vals.below(bound);
    REQUIRE(dec(src_range(h.ctx(), enc_b(x), enc_a(y1), enc_a(y2))) ==
                ((y1 <= x && x <= y2) ? 1 : 0),
            "SRC oracle");
  }
}

void fig3_scenario(unsigned kappa, uint64_t seed) {
  TwoServerHarness h(kappa, seed);
  size_t bits = k2c_bits(h.pp());
  PipelineParams params;
  params.mvisit = 2;
  params.mstate = 8;
  params.mweight = 10000;
  params.k = 3;
  validate_pipeline_params(h.pp(), params, fig3());

  EncryptedModel em = encrypt_model(h.pp(), h.hospital(), fig3(), h.cp_rng());
  auto tps = tpt(build_transition_arrays(em), em.accept, em.state_labels, params.mvisit,
                 params.mstate);

  // Set equality with the eleven listed procedures.
  REQUIRE(tps.size() == 11, "TPT must find exactly 11 procedures, found " << tps.size());
  std::vector<std::vector<int>> got, want = kFig3Paths;
  for (const auto& tp : tps) got.push_back(tp.index_path);
  std::vector<std::vector<int>> got_sorted = got, want_sorted = want;
  std::sort(got_sorted.begin(), got_sorted.end());
  std::sort(want_sorted.begin(), want_sorted.end());
  REQUIRE(got_sorted == want_sorted, "TPT path set mismatch");

  auto query = encrypt_query(h.pp(), h.patient(), fig3_query(bits), h.cp_rng());
  auto wtps = tpw(h.ctx(), params.mweight, query, tps, em);
  for (size_t i = 0; i < kFig3Paths.size(); ++i) {
    size_t at = std::find(got.begin(), got.end(), kFig3Paths[i]) - got.begin();
    REQUIRE(at < wtps.size(), "reference path " << i + 1 << " missing");
    Int w = weak_decrypt(h.pp(), h.sigma(), wtps[at].weight);
    REQUIRE(w == kFig3Weights[i],
            "weight of reference path " << i + 1 << ": got " << w.get_str() << " want "
                                    << kFig3Weights[i].get_str());
  }

  auto etps = expand(h.pp(), wtps, params.mstate, h.hospital().pk, "A", h.cp_rng());
  auto picks = bps_k(h.ctx(), etps, params.k, params.mweight);
  REQUIRE(picks.size() == 3, "BPS-3 must return 3 procedures");

  auto names = code_name_map(fig3(), bits);
  const std::vector<std::vector<int>> expect_paths = {kFig3Paths[6], kFig3Paths[5],
                                                      kFig3Paths[3]};
  const Int expect_weights[] = {1, 5, 10};
  for (size_t r = 0; r < 3; ++r) {
    RecoveredProcedure rec = recover_result(h.pp(), h.sigma(), picks[r], bits, names);
    REQUIRE(rec.weight == expect_weights[r], "rank " << r + 1 << " weight " << rec.weight.get_str());
    std::vector<std::string> want_path;
    for (int id : expect_paths[r]) want_path.push_back(state_label(id));
    REQUIRE(rec.path == want_path, "rank " << r + 1 << " path mismatch");
  }
}

void criterion_4() {
  TwoServerHarness h(32, 0xD1);
  Rng vals(0xD2);
  std::vector<ExpandedProcedure> etps = {make_etp(h, vals, 15, 4), make_etp(h, vals, 8, 4),
                                         make_etp(h, vals, 17, 4), make_etp(h, vals, 5, 4)};
  BpskTrace trace;
  SelectionOptions opts;
  opts.trace = &trace;
  auto picks = bps_k(h.ctx(), etps, 2, 100, opts);
  REQUIRE(decrypt_etp(h, picks[0]) == content_of(h, etps[3], h.hospital()),
          "first selection must be ETP4");
  REQUIRE(decrypt_etp(h, picks[1]) == content_of(h, etps[1], h.hospital()),
          "second selection must be ETP2");
  auto weights_after = [&](size_t round) {
    std::vector<Int> w;
    for (const auto& ct : trace.weights_after_round[round])
      w.push_back(weak_decrypt(h.pp(), h.sigma(), ct));
    return w;
  };
  REQUIRE(weights_after(0) == (std::vector<Int>{15, 8, 17, 500}),
          "round-1 internal weights must be (15, 8, 17, 500)");
  REQUIRE(weights_after(1) == (std::vector<Int>{15, 800, 17, 500}),
          "round-2 internal weights must be (15, 800, 17, 500)");
}

void criterion_5() {
  TwoServerHarness h(32, 0xE1);
  Rng vals(0xE2);
  // Coin invariance on 100 random pairs.
  for (int i = 0; i < 100; ++i) {
    ExpandedProcedure a = make_etp(h, vals, vals.below(1000), 3);
    ExpandedProcedure b = make_etp(h, vals, vals.below(1000), 3);
    h.ctx().debug.forced_smin_coin = false;
    PlainEtp r0 = decrypt_etp(h, smin(h.ctx(), a, b));
    h.ctx().debug.forced_smin_coin = true;
    PlainEtp r1 = decrypt_etp(h, smin(h.ctx(), a, b));
    h.ctx().debug.forced_smin_coin.reset();
    REQUIRE(r0 == r1, "smin output depends on the coin at pair " << i);
  }
  // Tie rule: W1 = W2 selects the second procedure.
  ExpandedProcedure t1 = make_etp(h, vals, 42, 3), t2 = make_etp(h, vals, 42, 3);
  REQUIRE(decrypt_etp(h, smin(h.ctx(), t1, t2)) == content_of(h, t2, h.hospital()),
          "tie must select the second procedure");
  // Permutation invariance: identity vs reversal schedules.
  std::vector<ExpandedProcedure> etps = {make_etp(h, vals, 12, 3), make_etp(h, vals, 4, 3),
                                         make_etp(h, vals, 30, 3), make_etp(h, vals, 7, 3),
                                         make_etp(h, vals, 19, 3)};
  SelectionOptions identity, reversed;
  identity.permutation = [](int, size_t n) {
    std::vector<size_t> p(n);
    for (size_t i = 0; i < n; ++i) p[i] = i;
    return p;
  };
  reversed.permutation = [](int, size_t n) {
    std::vector<size_t> p(n);
    for (size_t i = 0; i < n; ++i) p[i] = n - 1 - i;
    return p;
  };
  auto a = bps_k(h.ctx(), etps, 3, 100, identity);
  auto b = bps_k(h.ctx(), etps, 3, 100, reversed);
  for (size_t i = 0; i < a.size(); ++i)
    REQUIRE(decrypt_etp(h, a[i]) == decrypt_etp(h, b[i]),
            "BPS-k output depends on the permutation at rank " << i);
}

void criterion_6() {
  TwoServerHarness h(32, 0xF1);
  Rng rng(0xF2);
  for (int trial = 0; trial < 100; ++trial) {
    WeightedNfaModel m = random_model(rng, 8);
    int mvisit = 1 + static_cast<int>(rng.below(2).get_ui());
    int mstate = 2 + static_cast<int>(rng.below(7).get_ui());
    EncryptedModel em = encrypt_model(h.pp(), h.hospital(), m, h.cp_rng());
    auto tps = tpt(build_transition_arrays(em), em.accept, em.state_labels, mvisit, mstate);
    std::vector<std::vector<int>> got;
    for (const auto& tp : tps) got.push_back(tp.index_path);
    auto want = oracle::plain_paths(m, mvisit, mstate);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    REQUIRE(got == want, "TPT/enumerator mismatch at trial " << trial);
  }
}

void criterion_7() {
  TwoServerHarness h(32, 0x71);
  Rng vals(0x72);
  size_t bits = k2c_bits(h.pp());
  auto enc_pat = [&](const std::string& s) {
    std::vector<Ciphertext> out;
    for (const Int& c : sequence_codes(s, bits))
      out.push_back(encrypt(h.pp(), h.hospital(), c, h.cp_rng()));
    return out;
  };
  auto enc_txt = [&](const std::string& s) {
    std::vector<Ciphertext> out;
    for (const Int& c : sequence_codes(s, bits))
      out.push_back(encrypt(h.pp(), h.patient(), c, h.cp_rng()));
    return out;
  };
  auto random_dna = [&](size_t len) {
    static const char kAlpha[] = {'A', 'C', 'G', 'T'};
    std::string s;
    for (size_t i = 0; i < len; ++i) s.push_back(kAlpha[vals.below(4).get_ui()]);
    return s;
  };

  // (a) verbatim mode, cell for cell, 50 random instances with m <= 8.
  for (int trial = 0; trial < 50; ++trial) {
    size_t m = 1 + vals.below(8).get_ui();
    size_t mu = 1 + vals.below(2).get_ui();
    long lo = std::max<long>(1, static_cast<long>(m) - static_cast<long>(mu));
    size_t n = lo + vals.below(m + mu - lo + 1).get_ui();
    std::string psi = random_dna(m), phi = random_dna(n);
    PgeneTrace trace;
    pgene_match(h.ctx(), enc_pat(psi), enc_txt(phi), mu, MatchMode::Verbatim, &trace);
    auto plain = oracle::plain_pgene(oracle::PgeneMode::Verbatim, sequence_codes(psi, bits),
                                     sequence_codes(phi, bits), mu, h.pp().n);
    for (size_t k = 0; k < plain.size(); ++k)
      for (size_t i = 0; i <= mu; ++i)
        for (size_t j = 0; j <= m; ++j)
          REQUIRE(weak_decrypt(h.pp(), h.sigma(), trace.after_symbol[k].at(i, j)) ==
                      plain[k].at(i, j),
                  "verbatim cell mismatch " << psi << "/" << phi);
  }

  // (b) known answer: GCT vs GGCAT accepts at row 2, rejects at mu=1.
  {
    auto fs = pgene_match(h.ctx(), enc_pat("GCT"), enc_txt("GGCAT"), 2, MatchMode::Snapshot);
    auto row = accepted(h.pp(), h.sigma(), fs);
    REQUIRE(row && *row == 2, "GCT vs GGCAT must accept at row 2");
    auto fs1 = pgene_match(h.ctx(), enc_pat("GCT"), enc_txt("GGCAT"), 1, MatchMode::Snapshot);
    REQUIRE(!accepted(h.pp(), h.sigma(), fs1).has_value(), "GCT vs GGCAT must reject at mu=1");
  }

  // (c) snapshot acceptance row equals the edit distance, 50 random instances.
  for (int trial = 0; trial < 50; ++trial) {
    size_t m = 1 + vals.below(8).get_ui();
    size_t mu = 1 + vals.below(2).get_ui();
    long lo = std::max<long>(1, static_cast<long>(m) - static_cast<long>(mu));
    size_t n = lo + vals.below(m + mu - lo + 1).get_ui();
    std::string psi = random_dna(m), phi = random_dna(n);
    auto fs = pgene_match(h.ctx(), enc_pat(psi), enc_txt(phi), mu, MatchMode::Snapshot);
    auto row = accepted(h.pp(), h.sigma(), fs);
    size_t dist = oracle::levenshtein(psi, phi);
    if (dist <= mu) {
      REQUIRE(row.has_value(), "must accept " << psi << " vs " << phi);
      REQUIRE(*row == dist, "acceptance row for " << psi << " vs " << phi);
    } else {
      REQUIRE(!row.has_value(), "must reject " << psi << " vs " << phi);
    }
  }

  // (d) exact SUT budget n(mu+1)m for both modes.
  for (MatchMode mode : {MatchMode::Verbatim, MatchMode::Snapshot}) {
    uint64_t before = h.ctx().sut_calls;
    pgene_match(h.ctx(), enc_pat("GCTTA"), enc_txt("GCTAGT"), 2, mode);
    REQUIRE(h.ctx().sut_calls - before == 6u * 3u * 5u, "SUT call count must be n(mu+1)m");
  }
}

void criterion_8() {
  net::Transcript t_inproc, t_tcp;
  auto workload = [](TwoServerHarness& h) {
    auto enc_a = [&](const Int& v) { return encrypt(h.pp(), h.hospital(), v, h.cp_rng()); };
    auto enc_b = [&](const Int& v) { return encrypt(h.pp(), h.patient(), v, h.cp_rng()); };
    sad(h.ctx(), enc_a(12), enc_b(30));
    smd(h.ctx(), enc_a(6), enc_b(7));
    compare(h.ctx(), CompareMode::GE, enc_a(9), enc_b(4));
    set_eq(h.ctx(), enc_a(5), enc_b(5));
    src_range(h.ctx(), enc_b(5), enc_a(3), enc_a(9));
  };
  {
    TwoServerHarness h(32, 0x81, TwoServerHarness::Transport::InProc, &t_inproc);
    workload(h);
  }
  {
    TwoServerHarness h(32, 0x81, TwoServerHarness::Transport::Tcp, &t_tcp);
    workload(h);
  }
  REQUIRE(t_inproc.entries().size() > 0, "transcript must not be empty");
  REQUIRE(t_inproc == t_tcp, "in-process and TCP transcripts must be byte-identical");

  TwoServerHarness h(32, 0x82, TwoServerHarness::Transport::Tcp);
  std::vector<Rng> rngs;
  for (int t = 0; t < 8; ++t) rngs.push_back(h.cp_rng().derive());
  std::vector<Int> results(8);
  std::vector<std::thread> pool;
  for (int t = 0; t < 8; ++t) {
    pool.emplace_back([&, t] {
      ProtocolContext local = h.ctx();
      local.rng = &rngs[t];
      Ciphertext a = encrypt(h.pp(), h.hospital(), 10 + t, rngs[t]);
      Ciphertext b = encrypt(h.pp(), h.patient(), 100 + t, rngs[t]);
      results[t] = weak_decrypt(h.pp(), h.sigma(), sad(local, a, b));
    });
  }
  for (auto& th : pool) th.join();
  for (int t = 0; t < 8; ++t)
    REQUIRE(results[t] == 110 + 2 * t, "concurrent session " << t << " returned a wrong sum");
}

void criterion_9() {
  BenchConfig config;
  config.trials = 3;
  config.seed = 0x91;
  BenchReport report = run_bench(config);
  const char* protocols[] = {"SAD", "SMD", "SGE", "SLE", "SLT", "SGT", "SET", "SUT", "SRC"};
  for (const char* op : protocols) {
    for (const char* param : {"L(N)=512", "L(N)=1024"}) {
      bool found = false;
      for (const auto& r : report.rows)
        found = found || (r.op == op && r.param == param);
      REQUIRE(found, "bench grid missing " << op << " at " << param);
    }
  }
  int tpw_rows = 0;
  for (const auto& r : report.rows)
    if (r.op == "TPW") ++tpw_rows;
  REQUIRE(tpw_rows == 6, "bench grid must cover 2 path lengths x 3 query lengths");
  std::string violations;
  for (const auto& v : report.violations) violations += v + "; ";
  REQUIRE(report.monotone(), "monotone growth violated: " << violations);
}

}  // namespace

int main() {
  printf("P-Med acceptance suite\n");
  criterion(1, "PCTD round-trips, homomorphisms, key splits (k=32, k=512)", 60, criterion_1);
  criterion(2, "protocol/oracle equivalence, 200 inputs each, both coins", 120, criterion_2);
  criterion(3, "fig3 reference scenario: TPT/TPW/BPS-3 at kappa=32", 300,
            [] { fig3_scenario(32, 0xC1); });
  criterion(4, "worked example: weights (15,8,17,5), k=2, MWeight=100", 60, criterion_4);
  criterion(5, "SMin coin invariance, tie rule, permutation invariance", 120, criterion_5);
  criterion(6, "TPT equals brute-force enumeration on 100 random models", 60, criterion_6);
  criterion(7, "P-Gene verbatim/snapshot/Levenshtein/SUT-count", 300, criterion_7);
  criterion(8, "transport transparency and 8-way concurrency", 60, criterion_8);
  criterion(9, "bench grid shape and monotone growth in L(N) and m", 900, criterion_9);
  criterion(3, "fig3 reference scenario at production keys (kappa=512)", 5400,
            [] { fig3_scenario(512, 0xC2); });

  if (g_failures == 0) {
    printf("all acceptance criteria PASS\n");
    return 0;
  }
  printf("%d criterion(s) FAILED\n", g_failures);
  return 1;
}
