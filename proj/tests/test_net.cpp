#include "pmed/net.hpp"

#include <gtest/gtest.h>

#include <thread>

#include "pmed/errors.hpp"
#include "pmed/harness.hpp"
#include "pmed/protocols.hpp"

using namespace pmed;

namespace {

// One fixed protocol workload, replayed on each transport.
void run_workload(TwoServerHarness& h) {
  auto enc_a = [&](const Int& v) { return encrypt(h.pp(), h.hospital(), v, h.cp_rng()); };
  auto enc_b = [&](const Int& v) { return encrypt(h.pp(), h.patient(), v, h.cp_rng()); };
  sad(h.ctx(), enc_a(12), enc_b(30));
  smd(h.ctx(), enc_a(6), enc_b(7));
  compare(h.ctx(), CompareMode::GE, enc_a(9), enc_b(4));
  set_eq(h.ctx(), enc_a(5), enc_b(5));
}

}  // namespace

TEST(Transport, FixedSeedTranscriptsIdenticalAcrossTransports) {
  net::Transcript t_inproc, t_tcp;
  {
    TwoServerHarness h(32, 0xabcde, TwoServerHarness::Transport::InProc, &t_inproc);
    run_workload(h);
  }
  {
    TwoServerHarness h(32, 0xabcde, TwoServerHarness::Transport::Tcp, &t_tcp);
    run_workload(h);
  }
  ASSERT_GT(t_inproc.entries().size(), 0u);
  EXPECT_TRUE(t_inproc == t_tcp);
}

TEST(Transport, ResultsIdenticalAcrossTransports) {
  for (auto transport :
       {TwoServerHarness::Transport::InProc, TwoServerHarness::Transport::Tcp}) {
    TwoServerHarness h(32, 0x9999, transport);
    Ciphertext out = sad(h.ctx(), encrypt(h.pp(), h.hospital(), 21, h.cp_rng()),
                         encrypt(h.pp(), h.patient(), 21, h.cp_rng()));
    EXPECT_EQ(weak_decrypt(h.pp(), h.sigma(), out), 42);
  }
}

TEST(Transport, EightConcurrentSessionsAllCorrect) {
  TwoServerHarness h(32, 0x2024, TwoServerHarness::Transport::Tcp);
  std::vector<Rng> rngs;
  for (int t = 0; t < 8; ++t) rngs.push_back(h.cp_rng().derive());

  std::vector<Int> results(8);
  std::vector<std::thread> pool;
  for (int t = 0; t < 8; ++t) {
    pool.emplace_back([&, t] {
      ProtocolContext local = h.ctx();
      local.rng = &rngs[t];
      Ciphertext a = encrypt(h.pp(), h.hospital(), t + 1, rngs[t]);
      Ciphertext b = encrypt(h.pp(), h.patient(), 2 * (t + 1), rngs[t]);
      results[t] = weak_decrypt(h.pp(), h.sigma(), sad(local, a, b));
    });
  }
  for (auto& th : pool) th.join();
  for (int t = 0; t < 8; ++t) EXPECT_EQ(results[t], 3 * (t + 1));
}

namespace {

struct RawCspRig {
  net::KgcMaterial kgc;
  std::unique_ptr<CspContext> csp;
  std::shared_ptr<net::ByteStream> client;
  std::thread server;

  explicit RawCspRig(uint64_t seed) {
    Rng kgc_rng(seed);
    kgc = net::kgc_bootstrap(32, {"A", "B"}, kgc_rng);
    auto [cert, sigma] = net::issue_authorization(kgc, "A", "B", "p", kgc_rng);
    csp = std::make_unique<CspContext>(
        CspContext{kgc.pp, kgc.csp_share, sigma.pk, "sigma", Rng(seed + 1)});
    auto [cp_end, csp_end] = net::make_inproc_pipe();
    client = std::shared_ptr<net::ByteStream>(std::move(cp_end));
    auto server_stream = std::shared_ptr<net::ByteStream>(std::move(csp_end));
    server = std::thread([this, server_stream] {
      net::serve_connection(*server_stream, make_csp_handler(*csp));
    });
  }

  ~RawCspRig() {
    client->close();
    server.join();
  }

  void hello() {
    wire::Frame f;
    f.protocol_id = wire::CONTROL;
    f.payload = {wire::kCtrlHello};
    put_u32(f.payload, wire::kWireVersion);
    put_u32(f.payload, 1);
    net::write_frame(*client, f);
    wire::Frame resp = net::read_frame(*client);
    ASSERT_EQ(resp.step, wire::kStepResponse);
  }

  wire::Frame roundtrip(wire::Frame f) {
    net::write_frame(*client, f);
    return net::read_frame(*client);
  }

  /// Well-formed SAD request payload with genuine partial decryptions.
  Bytes sad_payload(Rng& rng) {
    Bytes payload;
    for (int i = 0; i < 2; ++i) {
      Ciphertext ct = encrypt(kgc.pp, csp->pk_sigma, "sigma", i + 1, rng);
      PartialDecryption part = partial_decrypt_1(kgc.pp, kgc.cp_share, ct);
      put_int(payload, ct.c1);
      put_int(payload, part.value);
    }
    return payload;
  }
};

}  // namespace

TEST(Responder, TruncatedPayloadAbortsSessionCleanly) {
  RawCspRig rig(0x51);
  rig.hello();
  wire::Frame f;
  f.session_id[0] = 1;
  f.protocol_id = wire::SAD;
  f.step = wire::kStepRequest;
  put_u32(f.payload, 8);        // claims an 8-byte integer...
  f.payload.push_back(0x42);    // ...but delivers one byte
  wire::Frame resp = rig.roundtrip(f);
  EXPECT_EQ(resp.protocol_id, wire::CONTROL);
  EXPECT_EQ(resp.step, wire::kStepAbort);
  EXPECT_FALSE(resp.payload.empty());

  // The connection stays usable for new sessions afterwards.
  wire::Frame ok;
  ok.session_id[0] = 2;
  ok.protocol_id = wire::SAD;
  ok.step = wire::kStepRequest;
  Rng rng(3);
  ok.payload = rig.sad_payload(rng);
  wire::Frame resp2 = rig.roundtrip(ok);
  EXPECT_EQ(resp2.step, wire::kStepResponse);
}

TEST(Responder, OutOfOrderStepRejected) {
  RawCspRig rig(0x52);
  rig.hello();
  wire::Frame f;
  f.session_id[0] = 9;
  f.protocol_id = wire::SAD;
  f.step = 2;  // sessions must start at step 0
  wire::Frame resp = rig.roundtrip(f);
  EXPECT_EQ(resp.step, wire::kStepAbort);
  std::string msg(resp.payload.begin(), resp.payload.end());
  EXPECT_NE(msg.find("out-of-order"), std::string::npos);
}

TEST(Responder, SessionIdReuseRejected) {
  RawCspRig rig(0x53);
  rig.hello();
  Rng rng(4);
  wire::Frame f;
  f.session_id[5] = 77;
  f.protocol_id = wire::SAD;
  f.step = wire::kStepRequest;
  f.payload = rig.sad_payload(rng);
  EXPECT_EQ(rig.roundtrip(f).step, wire::kStepResponse);
  EXPECT_EQ(rig.roundtrip(f).step, wire::kStepAbort);
}

TEST(Responder, FramesBeforeHelloRejected) {
  RawCspRig rig(0x54);
  wire::Frame f;
  f.protocol_id = wire::SAD;
  f.step = wire::kStepRequest;
  EXPECT_EQ(rig.roundtrip(f).step, wire::kStepAbort);
}

TEST(Connection, PeerAbortSurfacesAsProtocolError) {
  TwoServerHarness h(32, 0x3141);
  // A deliberately malformed SAD request reaches the handler and aborts.
  EXPECT_THROW(h.conn().call(wire::SAD, Bytes{1, 2, 3}), ProtocolError);
  // The connection itself survives.
  Ciphertext out = sad(h.ctx(), encrypt(h.pp(), h.hospital(), 1, h.cp_rng()),
                       encrypt(h.pp(), h.patient(), 1, h.cp_rng()));
  EXPECT_EQ(weak_decrypt(h.pp(), h.sigma(), out), 2);
}

TEST(Kgc, BootstrapInvariantsAndAuthorization) {
  Rng rng(0x61);
  auto kgc = net::kgc_bootstrap(32, {"A", "B"}, rng);
  EXPECT_EQ(mod(kgc.cp_share.share + kgc.csp_share.share, kgc.master.lambda), 0);
  EXPECT_EQ(mod(kgc.cp_share.share + kgc.csp_share.share, kgc.pp.n_sq), 1);
  EXPECT_THROW(net::register_user(kgc, "A", rng), ConfigError);

  auto [cert, sigma] = net::issue_authorization(kgc, "A", "B", "20190101-20191231", rng);
  EXPECT_EQ(cert.pk_sigma, sigma.pk);
  EXPECT_EQ(cert.hospital, "A");
  EXPECT_EQ(modexp(kgc.pp.g, sigma.sk, kgc.pp.n_sq), sigma.pk);

  // The patient (holder of sk_σ) decrypts; the hospital's key cannot.
  Ciphertext ct = encrypt(kgc.pp, sigma, 321, rng);
  EXPECT_EQ(weak_decrypt(kgc.pp, sigma, ct), 321);
  Ciphertext forged = ct;
  forged.pk_tag = "A";
  EXPECT_THROW(weak_decrypt(kgc.pp, kgc.users.at("A"), forged), DecryptError);
}

TEST(Kgc, AuthorizationForUnknownPartyFails) {
  Rng rng(0x62);
  auto kgc = net::kgc_bootstrap(32, {"A"}, rng);
  EXPECT_THROW(net::issue_authorization(kgc, "A", "nobody", "p", rng), ConfigError);
}

// Session isolation under randomized interleavings: concurrent sessions of
// different protocols never exchange state.
TEST(Transport, MixedProtocolSessionsStayIsolated) {
  TwoServerHarness h(32, 0x4242, TwoServerHarness::Transport::Tcp);
  const int kThreads = 6, kRounds = 5;
  std::vector<Rng> rngs;
  for (int t = 0; t < kThreads; ++t) rngs.push_back(h.cp_rng().derive());

  std::vector<std::string> errors(kThreads);
  std::vector<std::thread> pool;
  for (int t = 0; t < kThreads; ++t) {
    pool.emplace_back([&, t] {
      ProtocolContext local = h.ctx();
      local.rng = &rngs[t];
      for (int round = 0; round < kRounds; ++round) {
        Int x = rngs[t].below(200), y = rngs[t].below(200);
        Ciphertext a = encrypt(h.pp(), h.hospital(), x, rngs[t]);
        Ciphertext b = encrypt(h.pp(), h.patient(), y, rngs[t]);
        Int got;
        Int want;
        switch ((t + round) % 3) {
          case 0:
            got = weak_decrypt(h.pp(), h.sigma(), sad(local, a, b));
            want = x + y;
            break;
          case 1:
            got = weak_decrypt(h.pp(), h.sigma(), smd(local, a, b));
            want = x * y;
            break;
          default:
            got = weak_decrypt(h.pp(), h.sigma(), compare(local, CompareMode::GE, a, b));
            want = x >= y ? 1 : 0;
            break;
        }
        if (got != want) {
          errors[t] = "thread " + std::to_string(t) + " round " + std::to_string(round);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) EXPECT_EQ(e, "");
}
