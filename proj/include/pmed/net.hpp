#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "pmed/pctd.hpp"
#include "pmed/rng.hpp"
#include "pmed/wire.hpp"

namespace pmed::net {

/// Blocking byte stream; both the in-process pipe and the TCP socket speak
/// this so framing and transcripts are identical across transports.
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  virtual void send(const Bytes& data) = 0;
  /// Reads exactly n bytes; throws TransportError if the peer closed first.
  virtual Bytes recv_exact(size_t n) = 0;
  virtual void close() = 0;
};

using StreamPtr = std::unique_ptr<ByteStream>;

/// Deterministic in-process transport for tests: two endpoints over shared
/// buffers.
std::pair<StreamPtr, StreamPtr> make_inproc_pipe();

StreamPtr tcp_connect(const std::string& host, uint16_t port);

class TcpListener {
 public:
  /// Binds host:port; port 0 picks an ephemeral port (see port()).
  TcpListener(const std::string& host, uint16_t port);
  ~TcpListener();
  uint16_t port() const { return port_; }
  StreamPtr accept();
  void close();

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

void write_frame(ByteStream& s, const wire::Frame& f);
wire::Frame read_frame(ByteStream& s);

/// Ordered log of raw frame bytes with direction markers, used for the
/// transport-transparency checks. Append is synchronized; comparison assumes
/// the runs have finished.
class Transcript {
 public:
  struct Entry {
    bool outbound;
    Bytes frame;  // encoded frame including length prefix
  };

  void add(bool outbound, Bytes frame) {
    std::lock_guard lk(mu_);
    entries_.push_back({outbound, std::move(frame)});
  }
  const std::vector<Entry>& entries() const { return entries_; }
  bool operator==(const Transcript& o) const;

 private:
  std::mutex mu_;
  std::vector<Entry> entries_;
};

/// CP-side connection: multiplexes concurrent single-round sessions over one
/// stream. Thread-safe. Performs the HELLO handshake on construction.
class Connection {
 public:
  Connection(StreamPtr stream, uint64_t session_seed, Transcript* transcript = nullptr);
  ~Connection();

  /// Opens a fresh session, sends the step-0 request, waits for step 1.
  /// Throws ProtocolError on an abort frame, TransportError on loss.
  Bytes call(uint8_t protocol_id, const Bytes& request);

  void bye();

  uint64_t sessions_opened(uint8_t protocol_id) const;

 private:
  void rx_loop();

  StreamPtr stream_;
  Rng session_rng_;
  Transcript* transcript_;
  std::mutex tx_mu_;

  std::mutex mu_;
  struct Waiter {
    std::condition_variable cv;
    bool done = false;
    bool aborted = false;
    std::string diagnostic;
    Bytes payload;
  };
  std::map<wire::SessionId, std::shared_ptr<Waiter>> waiting_;
  bool closed_ = false;
  std::string close_reason_;
  mutable std::mutex stats_mu_;
  std::map<uint8_t, uint64_t> stats_;
  std::thread rx_thread_;
  std::atomic<bool> said_bye_{false};
};

/// Computes the CSP side of one primitive step; throws to abort the session.
using StepHandler = std::function<Bytes(uint8_t protocol_id, const Bytes& request)>;

/// Serves one connection until BYE or stream loss: validates framing and
/// session/step order, dispatches requests, answers aborts with diagnostics.
/// Frames are processed strictly in arrival order.
void serve_connection(ByteStream& stream, const StepHandler& handler,
                      Transcript* transcript = nullptr);

/// TCP responder: accepts connections on its own thread(s) and serves each.
class CspServer {
 public:
  CspServer(const std::string& host, uint16_t port, StepHandler handler);
  ~CspServer();
  uint16_t port() const { return listener_.port(); }
  void stop();

 private:
  TcpListener listener_;
  StepHandler handler_;
  std::thread accept_thread_;
  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::atomic<bool> stopping_{false};
};

// --- KGC bootstrap -----------------------------------------------------------

/// Authorization certificate, carried as an unsigned record.
struct AuthorizationRecord {
  Int cert_number;
  std::string hospital;
  std::string patient;
  std::string service_period;
  Int pk_sigma;
};

struct KgcMaterial {
  PublicParams pp;
  MasterKey master;  // held by the KGC only; tests use it as the omniscient key
  PartialKeyShare cp_share;
  PartialKeyShare csp_share;
  std::map<std::string, UserKeyPair> users;
  std::vector<AuthorizationRecord> certificates;
};

/// KeyGen + SKeyS + per-party key issuance. Parties are user names; duplicate
/// registration is an error.
KgcMaterial kgc_bootstrap(unsigned kappa, const std::vector<std::string>& parties, Rng& rng);

UserKeyPair& register_user(KgcMaterial& kgc, const std::string& name, Rng& rng);

/// Issues (cer, sk_σ): the record is public, sk_σ goes only to the patient.
std::pair<AuthorizationRecord, UserKeyPair> issue_authorization(KgcMaterial& kgc,
                                                                const std::string& hospital,
                                                                const std::string& patient,
                                                                const std::string& period,
                                                                Rng& rng);

}  // namespace pmed::net
