// pmed: command-line surface for the P-Med engine.
//
// Subcommands:
//   keygen     generate and write key material
//   demo-fig3  end-to-end treatment recommendation on the bundled model
//   pgene      error-tolerant gene match between a pattern and a sequence
//   bench      protocol/pipeline timing table with monotone-growth check
//   serve-csp  run the CSP responder on a TCP address
//
// Exit codes: 0 success, 2 config error, 3 protocol abort, 4 fixture error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pmed/bench.hpp"
#include "pmed/errors.hpp"
#include "pmed/model.hpp"
#include "pmed/net.hpp"
#include "pmed/pgene.hpp"
#include "pmed/pipeline.hpp"
#include "pmed/protocols.hpp"

using namespace pmed;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct FixtureError : Error {
  using Error::Error;
};

// --- key bundle ------------------------------------------------------------

struct KeyBundle {
  PublicParams pp;
  MasterKey master;  // stays with the KGC; written for local deployments only
  PartialKeyShare cp_share, csp_share;
  UserKeyPair hospital, patient, sigma;
  net::AuthorizationRecord cert;
};

uint64_t sub_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

KeyBundle bootstrap_bundle(unsigned kappa, uint64_t seed) {
  Rng rng(sub_seed(seed, 0));
  auto kgc = net::kgc_bootstrap(kappa, {"A", "B"}, rng);
  auto [cert, sigma] = net::issue_authorization(kgc, "A", "B", "20190101-20191231", rng);
  return KeyBundle{kgc.pp,           kgc.master,        kgc.cp_share, kgc.csp_share,
                   kgc.users.at("A"), kgc.users.at("B"), sigma,        cert};
}

void write_file(const fs::path& path, const Bytes& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
}

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read key file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  return Bytes(s.begin(), s.end());
}

void write_bundle(const KeyBundle& b, const fs::path& dir) {
  fs::create_directories(dir);
  write_file(dir / "params.pub", b.pp.serialize());
  write_file(dir / "master.key", serialize_master(b.master));
  write_file(dir / "cp.share", serialize_share(b.cp_share));
  write_file(dir / "csp.share", serialize_share(b.csp_share));
  write_file(dir / "hospital.key", serialize_user_key(b.hospital));
  write_file(dir / "patient.key", serialize_user_key(b.patient));
  write_file(dir / "sigma.key", serialize_user_key(b.sigma));
  json cert;
  cert["cert_number"] = b.cert.cert_number.get_str();
  cert["hospital"] = b.cert.hospital;
  cert["patient"] = b.cert.patient;
  cert["service_period"] = b.cert.service_period;
  cert["pk_sigma"] = b.cert.pk_sigma.get_str();
  std::ofstream(dir / "certificate.json") << cert.dump(2) << "\n";
}

KeyBundle load_bundle(const fs::path& dir) {
  KeyBundle b;
  size_t pos = 0;
  Bytes pp_raw = read_file(dir / "params.pub");
  b.pp = PublicParams::deserialize(pp_raw, pos);
  b.master = deserialize_master(read_file(dir / "master.key"));
  b.cp_share = deserialize_share(read_file(dir / "cp.share"));
  b.csp_share = deserialize_share(read_file(dir / "csp.share"));
  b.hospital = deserialize_user_key(read_file(dir / "hospital.key"), "A");
  b.patient = deserialize_user_key(read_file(dir / "patient.key"), "B");
  b.sigma = deserialize_user_key(read_file(dir / "sigma.key"), "sigma");
  b.cert.pk_sigma = b.sigma.pk;
  return b;
}

// --- runtime wiring ----------------------------------------------------------

struct CommonOpts {
  unsigned key_size = 32;
  uint64_t seed = 1;
  std::string transport = "inproc";
  std::string cp_addr = "127.0.0.1:0";
  std::string csp_addr;
  std::string keys_dir;
  bool json_out = false;
  int threads = 1;
};

std::pair<std::string, uint16_t> split_addr(const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw ConfigError("address must be host:port, got " + addr);
  return {addr.substr(0, colon), static_cast<uint16_t>(std::stoi(addr.substr(colon + 1)))};
}

/// CP-side runtime: key bundle, a CSP (local thread, local TCP server, or a
/// remote address), and the protocol context.
struct Runtime {
  KeyBundle keys;
  std::unique_ptr<CspContext> csp;
  std::unique_ptr<net::CspServer> local_server;
  std::thread inproc_thread;
  std::unique_ptr<net::Connection> conn;
  Rng cp_rng{0};
  ProtocolContext ctx;

  explicit Runtime(const CommonOpts& opts) : cp_rng(sub_seed(opts.seed, 2)) {
    keys = opts.keys_dir.empty() ? bootstrap_bundle(opts.key_size, opts.seed)
                                 : load_bundle(opts.keys_dir);
    if (opts.transport == "inproc") {
      csp = make_csp(opts.seed);
      auto [cp_end, csp_end] = net::make_inproc_pipe();
      auto stream = std::shared_ptr<net::ByteStream>(std::move(csp_end));
      inproc_thread =
          std::thread([this, stream] { net::serve_connection(*stream, make_csp_handler(*csp)); });
      conn = std::make_unique<net::Connection>(std::move(cp_end), sub_seed(opts.seed, 3));
    } else if (opts.transport == "tcp") {
      std::string host;
      uint16_t port;
      if (opts.csp_addr.empty()) {
        csp = make_csp(opts.seed);
        local_server = std::make_unique<net::CspServer>("127.0.0.1", 0, make_csp_handler(*csp));
        host = "127.0.0.1";
        port = local_server->port();
      } else {
        std::tie(host, port) = split_addr(opts.csp_addr);
      }
      conn = std::make_unique<net::Connection>(net::tcp_connect(host, port),
                                               sub_seed(opts.seed, 3));
    } else {
      throw ConfigError("unknown transport: " + opts.transport);
    }
    ctx.pp = &keys.pp;
    ctx.share = keys.cp_share;
    ctx.pks["A"] = keys.hospital.pk;
    ctx.pks["B"] = keys.patient.pk;
    ctx.pks["sigma"] = keys.sigma.pk;
    ctx.rng = &cp_rng;
    ctx.conn = conn.get();
  }

  ~Runtime() {
    conn.reset();
    if (inproc_thread.joinable()) inproc_thread.join();
  }

 private:
  std::unique_ptr<CspContext> make_csp(uint64_t seed) {
    return std::make_unique<CspContext>(
        CspContext{keys.pp, keys.csp_share, keys.sigma.pk, "sigma", Rng(sub_seed(seed, 1))});
  }
};

void require_fixture(const std::string& path) {
  if (!fs::exists(path)) throw FixtureError("missing fixture file: " + path);
}

json weight_json(const Int& w) {
  if (w.fits_ulong_p()) return json(w.get_ui());
  return json(w.get_str());
}

// --- demo-fig3 -----------------------------------------------------------------

std::vector<int> parse_targets(const std::string& spec) {
  std::vector<int> ids;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    if (tok[0] == 'q') tok = tok.substr(1);
    ids.push_back(std::stoi(tok));
  }
  if (ids.empty()) throw ConfigError("empty --match target list");
  return ids;
}

/// Patient states satisfying exactly the targeted states' descriptors.
std::vector<PatientState> query_for_targets(const WeightedNfaModel& model,
                                            const std::vector<int>& targets, size_t code_bits) {
  std::vector<PatientState> query;
  for (int id : targets) {
    if (id < 0 || id > model.n1)
      throw ConfigError("query target out of range: q" + std::to_string(id));
    PatientState st;
    for (const auto& p : model.descriptors[id].predicates) {
      switch (p.kind) {
        case PredicateKind::Range:
          st.values[p.field] = (p.lo + p.hi) / 2;
          break;
        case PredicateKind::RangePair:
          st.values[p.field + "1"] = (p.lo + p.hi) / 2;
          st.values[p.field + "2"] = (p.lo2 + p.hi2) / 2;
          break;
        case PredicateKind::Gt:
          st.values[p.field] = p.threshold + 1;
          break;
        case PredicateKind::Lt:
          st.values[p.field] = p.threshold > 0 ? Int(p.threshold - 1) : Int(0);
          break;
        case PredicateKind::KeywordEq:
          st.set_keyword(p.field, p.keyword, code_bits);
          break;
      }
    }
    query.push_back(std::move(st));
  }
  return query;
}

int cmd_demo(const CommonOpts& opts, const std::string& model_path, const PipelineParams& params,
             const std::string& match_spec) {
  require_fixture(model_path);
  WeightedNfaModel model = load_model_file(model_path);

  Runtime rt(opts);
  validate_pipeline_params(rt.keys.pp, params, model);
  size_t code_bits = k2c_bits(rt.keys.pp);

  std::vector<int> targets = parse_targets(match_spec);
  std::vector<PatientState> query = query_for_targets(model, targets, code_bits);

  // Hospital encrypts the model, the patient the query; CP drives the rest.
  EncryptedModel enc_model = encrypt_model(rt.keys.pp, rt.keys.hospital, model, rt.cp_rng);
  auto enc_query = encrypt_query(rt.keys.pp, rt.keys.patient, query, rt.cp_rng);

  auto tps = tpt(build_transition_arrays(enc_model), enc_model.accept, enc_model.state_labels,
                 params.mvisit, params.mstate);
  auto wtps = tpw(rt.ctx, params.mweight, enc_query, tps, enc_model, opts.threads);
  auto etps = expand(rt.keys.pp, wtps, params.mstate, rt.keys.hospital.pk, "A", rt.cp_rng);
  auto picks = bps_k(rt.ctx, etps, params.k, params.mweight);

  auto names = code_name_map(model, code_bits);
  json out;
  out["model"] = model_path;
  out["procedures_traversed"] = tps.size();
  out["query"] = json::array();
  for (int id : targets) out["query"].push_back(state_label(id));
  out["results"] = json::array();
  for (size_t i = 0; i < picks.size(); ++i) {
    RecoveredProcedure rec =
        recover_result(rt.keys.pp, rt.keys.sigma, picks[i], code_bits, names);
    json row;
    row["rank"] = i + 1;
    row["weight"] = weight_json(rec.weight);
    row["path"] = rec.path;
    row["therapies"] = rec.therapies;
    out["results"].push_back(row);
  }

  if (opts.json_out) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "P-Med treatment recommendation\n";
    std::cout << "  model: " << model_path << " (" << tps.size() << " procedures traversed)\n";
    std::cout << "  query: ";
    for (size_t i = 0; i < targets.size(); ++i)
      std::cout << (i ? ", " : "") << state_label(targets[i]);
    std::cout << "\n";
    for (const auto& row : out["results"]) {
      std::cout << "  rank " << row["rank"] << ": weight " << row["weight"] << "  path ";
      bool first = true;
      for (const auto& s : row["path"]) {
        std::cout << (first ? "" : " -> ") << s.get<std::string>();
        first = false;
      }
      std::cout << "  therapies ";
      first = true;
      for (const auto& s : row["therapies"]) {
        std::cout << (first ? "" : ", ") << s.get<std::string>();
        first = false;
      }
      std::cout << "\n";
    }
  }
  return 0;
}

// --- pgene ----------------------------------------------------------------------

int cmd_pgene(const CommonOpts& opts, const std::string& pattern_path,
              const std::string& sequence_path, unsigned mu, const std::string& mode_name) {
  require_fixture(pattern_path);
  require_fixture(sequence_path);
  std::string psi = load_sequence_file(pattern_path);
  std::string phi = load_sequence_file(sequence_path);
  MatchMode mode;
  if (mode_name == "snapshot")
    mode = MatchMode::Snapshot;
  else if (mode_name == "verbatim")
    mode = MatchMode::Verbatim;
  else
    throw ConfigError("--mode must be snapshot or verbatim");

  Runtime rt(opts);
  size_t code_bits = k2c_bits(rt.keys.pp);
  std::vector<Ciphertext> enc_psi, enc_phi;
  for (const Int& c : sequence_codes(psi, code_bits))
    enc_psi.push_back(encrypt(rt.keys.pp, rt.keys.hospital, c, rt.cp_rng));
  for (const Int& c : sequence_codes(phi, code_bits))
    enc_phi.push_back(encrypt(rt.keys.pp, rt.keys.patient, c, rt.cp_rng));

  auto fs_col = pgene_match(rt.ctx, enc_psi, enc_phi, mu, mode);
  auto row = accepted(rt.keys.pp, rt.keys.sigma, fs_col);

  json out;
  out["pattern_length"] = psi.size();
  out["sequence_length"] = phi.size();
  out["mu"] = mu;
  out["mode"] = mode_name;
  out["accepted"] = row.has_value();
  if (row) out["errors"] = *row;
  if (opts.json_out) {
    std::cout << out.dump(2) << "\n";
  } else if (row) {
    std::cout << "accepted, " << *row << " errors\n";
  } else {
    std::cout << "rejected (no accept state active within tolerance " << mu << ")\n";
  }
  return 0;
}

// --- bench -----------------------------------------------------------------------

int cmd_bench(const CommonOpts& opts, BenchConfig config) {
  config.seed = opts.seed;
  BenchReport report = run_bench(config);
  if (opts.json_out) {
    json out;
    out["rows"] = json::array();
    for (const auto& r : report.rows)
      out["rows"].push_back(
          {{"op", r.op}, {"param", r.param}, {"mean_ms", r.mean_ms}, {"trials", r.trials}});
    out["monotone"] = report.monotone();
    out["violations"] = report.violations;
    std::cout << out.dump(2) << "\n";
  } else {
    printf("%-6s %-14s %12s %7s\n", "op", "param", "mean_ms", "trials");
    for (const auto& r : report.rows)
      printf("%-6s %-14s %12.3f %7d\n", r.op.c_str(), r.param.c_str(), r.mean_ms, r.trials);
    if (report.monotone()) {
      std::cout << "monotone growth check: PASS\n";
    } else {
      std::cout << "monotone growth check: FAIL\n";
      for (const auto& v : report.violations) std::cout << "  " << v << "\n";
    }
  }
  return report.monotone() ? 0 : 1;
}

// --- serve-csp ---------------------------------------------------------------------

int cmd_serve(const CommonOpts& opts, const std::string& bind_addr) {
  if (opts.keys_dir.empty()) throw ConfigError("serve-csp requires --keys");
  KeyBundle keys = load_bundle(opts.keys_dir);
  auto [host, port] = split_addr(bind_addr);
  CspContext csp{keys.pp, keys.csp_share, keys.sigma.pk, "sigma", Rng(sub_seed(opts.seed, 1))};
  net::CspServer server(host, port, make_csp_handler(csp));
  std::cout << "CSP responder listening on " << host << ":" << server.port() << std::endl;
  std::cout << "press enter to stop" << std::endl;
  std::cin.get();
  if (std::cin.eof()) {
    // Detached run (stdin closed): serve until the process is signalled.
    for (;;) std::this_thread::sleep_for(std::chrono::hours(24));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"P-Med secure treatment-recommendation engine"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  CommonOpts opts;
  app.add_option("--key-size", opts.key_size, "security parameter kappa in bits (primes)");
  app.add_option("--seed", opts.seed, "deterministic seed for all randomness");
  app.add_option("--transport", opts.transport, "inproc|tcp");
  app.add_option("--cp-addr", opts.cp_addr, "CP bind address (reserved)");
  app.add_option("--csp-addr", opts.csp_addr, "CSP address for tcp transport");
  app.add_option("--keys", opts.keys_dir, "directory of key files (default: bootstrap in-memory)");
  app.add_flag("--json", opts.json_out, "emit machine-readable JSON");
  app.add_option("--threads", opts.threads, "max concurrent protocol sessions");

  auto* keygen_cmd = app.add_subcommand("keygen", "generate key material files");
  std::string out_dir = "keys";
  keygen_cmd->add_option("--out", out_dir, "output directory");

  auto* demo_cmd = app.add_subcommand("demo-fig3", "end-to-end recommendation demo");
  std::string model_path = "fixtures/fig3_model.json";
  std::string match_spec = "q1,q3,q4";
  PipelineParams params;
  params.mvisit = 2;
  params.mstate = 8;
  params.k = 3;
  unsigned long mweight_raw = 10000;
  demo_cmd->add_option("--model", model_path, "model JSON file");
  demo_cmd->add_option("--match", match_spec, "states the query should match, e.g. q1,q3,q4");
  demo_cmd->add_option("--mvisit", params.mvisit, "max occurrences of a state per path");
  demo_cmd->add_option("--mstate", params.mstate, "max states per path");
  demo_cmd->add_option("--mweight", mweight_raw, "sentinel weight for unmatched paths");
  demo_cmd->add_option("-k,--top", params.k, "number of recommendations");

  auto* pgene_cmd = app.add_subcommand("pgene", "error-tolerant gene match");
  std::string pattern_path, sequence_path, mode_name = "snapshot";
  unsigned mu = 2;
  pgene_cmd->add_option("--pattern", pattern_path, "pattern file (plain or FASTA)")->required();
  pgene_cmd->add_option("--sequence", sequence_path, "sequence file (plain or FASTA)")->required();
  pgene_cmd->add_option("--mu", mu, "error tolerance");
  pgene_cmd->add_option("--mode", mode_name, "snapshot|verbatim");

  auto* bench_cmd = app.add_subcommand("bench", "timing table with monotone-growth check");
  BenchConfig bench_config;
  std::vector<unsigned> kappas;
  bench_cmd->add_option("--kappas", kappas, "protocol bench key sizes (default 256 512)");
  bench_cmd->add_option("--trials", bench_config.trials, "trials per measurement");

  auto* serve_cmd = app.add_subcommand("serve-csp", "run the CSP responder over TCP");
  std::string bind_addr = "127.0.0.1:7801";
  serve_cmd->add_option("--bind", bind_addr, "bind address host:port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*keygen_cmd) {
      KeyBundle b = bootstrap_bundle(opts.key_size, opts.seed);
      write_bundle(b, out_dir);
      std::cout << "wrote key material for L(N)=" << bit_length(b.pp.n) << " to " << out_dir
                << "\n";
      return 0;
    }
    if (*demo_cmd) {
      params.mweight = Int(mweight_raw);
      return cmd_demo(opts, model_path, params, match_spec);
    }
    if (*pgene_cmd) return cmd_pgene(opts, pattern_path, sequence_path, mu, mode_name);
    if (*bench_cmd) {
      if (!kappas.empty()) bench_config.protocol_kappas = kappas;
      return cmd_bench(opts, bench_config);
    }
    if (*serve_cmd) return cmd_serve(opts, bind_addr);
  } catch (const FixtureError& e) {
    std::cerr << "fixture error: " << e.what() << "\n";
    return 4;
  } catch (const ProtocolError& e) {
    std::cerr << "protocol abort: " << e.what() << "\n";
    return 3;
  } catch (const TransportError& e) {
    std::cerr << "transport failure: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
