#pragma once

#include <memory>
#include <thread>

#include "pmed/protocols.hpp"

namespace pmed {

/// Both server roles wired together for one authorization: KGC material,
/// hospital/patient/σ keys, a CSP responder (in-process thread or TCP
/// server), and a ready CP-side ProtocolContext. All randomness derives from
/// one seed, so runs are reproducible end to end.
class TwoServerHarness {
 public:
  enum class Transport { InProc, Tcp };

  TwoServerHarness(unsigned kappa, uint64_t seed, Transport transport = Transport::InProc,
                   net::Transcript* cp_transcript = nullptr);
  ~TwoServerHarness();

  TwoServerHarness(const TwoServerHarness&) = delete;
  TwoServerHarness& operator=(const TwoServerHarness&) = delete;

  const PublicParams& pp() const { return kgc_.pp; }
  const net::KgcMaterial& kgc() const { return kgc_; }
  const UserKeyPair& hospital() const { return kgc_.users.at("A"); }
  const UserKeyPair& patient() const { return kgc_.users.at("B"); }
  const UserKeyPair& sigma() const { return sigma_; }
  const net::AuthorizationRecord& certificate() const { return cert_; }

  ProtocolContext& ctx() { return ctx_; }
  Rng& cp_rng() { return cp_rng_; }
  net::Connection& conn() { return *conn_; }
  uint16_t tcp_port() const;

 private:
  net::KgcMaterial kgc_;
  net::AuthorizationRecord cert_;
  UserKeyPair sigma_;
  std::unique_ptr<CspContext> csp_;
  std::unique_ptr<net::CspServer> tcp_server_;
  std::thread inproc_server_;
  std::unique_ptr<net::Connection> conn_;
  Rng cp_rng_;
  ProtocolContext ctx_;
};

}  // namespace pmed
