#include "pmed/bench.hpp"

#include <algorithm>
#include <chrono>
#include <functional>

#include "pmed/harness.hpp"
#include "pmed/model.hpp"
#include "pmed/pipeline.hpp"

namespace pmed {

namespace {

double time_ms(int trials, const std::function<void()>& fn) {
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < trials; ++i) fn();
  auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / trials;
}

StateDescriptor vitals_descriptor() {
  StateDescriptor d;
  d.predicates = {
      FieldPredicate::range("BT", 365, 373),
      FieldPredicate::range_pair("BP", 90, 60, 120, 80),
      FieldPredicate::range("BG", 39, 61),
      FieldPredicate::gt("RR", 12),
      FieldPredicate::lt("HR", 100),
      FieldPredicate::keyword_eq("S1", "cough"),
      FieldPredicate::keyword_eq("S2", "fever"),
  };
  return d;
}

PatientState vitals_patient(size_t code_bits) {
  PatientState st;
  st.values["BT"] = 368;
  st.values["BP1"] = 100;
  st.values["BP2"] = 70;
  st.values["BG"] = 50;
  st.values["RR"] = 15;
  st.values["HR"] = 80;
  st.set_keyword("S1", "cough", code_bits);
  st.set_keyword("S2", "fever", code_bits);
  return st;
}

/// Straight-line model: q0 → q1 → … → q_{len−1}, accept at the end.
WeightedNfaModel chain_model(int len) {
  WeightedNfaModel m;
  m.n1 = len - 1;
  m.descriptors.resize(len);
  for (int i = 0; i < len; ++i) m.descriptors[i] = vitals_descriptor();
  m.accept = {len - 1};
  m.alphabet = {"t1"};
  for (int i = 0; i + 1 < len; ++i) m.transitions.push_back({i, i + 1, "t1", 1});
  return m;
}

}  // namespace

BenchReport run_bench(const BenchConfig& config) {
  BenchReport report;

  struct ProtoCase {
    const char* name;
    std::function<void(TwoServerHarness&, const Ciphertext&, const Ciphertext&)> run;
  };
  const std::vector<ProtoCase> protocols = {
      {"SAD", [](auto& h, auto& a, auto& b) { sad(h.ctx(), a, b); }},
      {"SMD", [](auto& h, auto& a, auto& b) { smd(h.ctx(), a, b); }},
      {"SGE", [](auto& h, auto& a, auto& b) { compare(h.ctx(), CompareMode::GE, a, b); }},
      {"SLE", [](auto& h, auto& a, auto& b) { compare(h.ctx(), CompareMode::LE, a, b); }},
      {"SLT", [](auto& h, auto& a, auto& b) { compare(h.ctx(), CompareMode::LT, a, b); }},
      {"SGT", [](auto& h, auto& a, auto& b) { compare(h.ctx(), CompareMode::GT, a, b); }},
      {"SET", [](auto& h, auto& a, auto& b) { set_eq(h.ctx(), a, b); }},
      {"SUT", [](auto& h, auto& a, auto& b) { sut_neq(h.ctx(), a, b); }},
      {"SRC", [](auto& h, auto& a, auto& b) { src_range(h.ctx(), a, a, b); }},
  };

  for (unsigned kappa : config.protocol_kappas) {
    TwoServerHarness h(kappa, config.seed);
    Rng vals(config.seed ^ kappa);
    Int bound = signed_bound(h.pp());
    Ciphertext a = encrypt(h.pp(), h.hospital(), vals.below(bound), h.cp_rng());
    Ciphertext b = encrypt(h.pp(), h.patient(), vals.below(bound), h.cp_rng());
    std::string param = "L(N)=" + std::to_string(2 * kappa);
    for (const auto& pc : protocols) {
      double ms = time_ms(config.trials, [&] { pc.run(h, a, b); });
      report.rows.push_back({pc.name, param, ms, config.trials});
    }
  }

  // Pipeline grid at reduced size: chain models so the average path length
  // is the parameter, and the rich vitals descriptor so SSM dominates.
  {
    TwoServerHarness h(config.tpw_kappa, config.seed + 1);
    size_t code_bits = k2c_bits(h.pp());
    for (int len : config.tpw_lengths) {
      WeightedNfaModel model = chain_model(len);
      EncryptedModel enc_model = encrypt_model(h.pp(), h.hospital(), model, h.cp_rng());
      auto arrays = build_transition_arrays(enc_model);
      auto tps = tpt(arrays, enc_model.accept, enc_model.state_labels, 1, len);
      for (int m : config.tpw_ms) {
        std::vector<PatientState> query(m, vitals_patient(code_bits));
        auto enc_query = encrypt_query(h.pp(), h.patient(), query, h.cp_rng());
        int trials = std::max(config.trials, 5);
        tpw(h.ctx(), Int(10000), enc_query, tps, enc_model);  // warmup
        double ms = time_ms(trials, [&] {
          tpw(h.ctx(), Int(10000), enc_query, tps, enc_model);
        });
        report.rows.push_back(
            {"TPW", "len=" + std::to_string(len) + ",m=" + std::to_string(m), ms, trials});
      }
    }
  }

  // Monotone growth: protocols in L(N), TPW in m for each path length.
  auto mean_of = [&](const std::string& op, const std::string& param) -> const BenchRow* {
    for (const auto& r : report.rows)
      if (r.op == op && r.param == param) return &r;
    return nullptr;
  };
  if (config.protocol_kappas.size() >= 2) {
    for (const auto& pc : protocols) {
      for (size_t i = 1; i < config.protocol_kappas.size(); ++i) {
        std::string lo = "L(N)=" + std::to_string(2 * config.protocol_kappas[i - 1]);
        std::string hi = "L(N)=" + std::to_string(2 * config.protocol_kappas[i]);
        const BenchRow* a = mean_of(pc.name, lo);
        const BenchRow* b = mean_of(pc.name, hi);
        if (a && b && !(b->mean_ms > a->mean_ms))
          report.violations.push_back(std::string(pc.name) + " not increasing " + lo + " -> " + hi);
      }
    }
  }
  for (int len : config.tpw_lengths) {
    for (size_t i = 1; i < config.tpw_ms.size(); ++i) {
      std::string lo = "len=" + std::to_string(len) + ",m=" + std::to_string(config.tpw_ms[i - 1]);
      std::string hi = "len=" + std::to_string(len) + ",m=" + std::to_string(config.tpw_ms[i]);
      const BenchRow* a = mean_of("TPW", lo);
      const BenchRow* b = mean_of("TPW", hi);
      if (a && b && !(b->mean_ms > a->mean_ms))
        report.violations.push_back("TPW not increasing " + lo + " -> " + hi);
    }
  }
  return report;
}

}  // namespace pmed
