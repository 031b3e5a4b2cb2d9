#include "pmed/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "pmed/errors.hpp"

namespace pmed::net {

// --- in-process pipe ---------------------------------------------------------

namespace {

struct PipeBuf {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<uint8_t> data;
  bool closed = false;
};

class InProcStream : public ByteStream {
 public:
  InProcStream(std::shared_ptr<PipeBuf> rx, std::shared_ptr<PipeBuf> tx)
      : rx_(std::move(rx)), tx_(std::move(tx)) {}
  ~InProcStream() override { close(); }

  void send(const Bytes& data) override {
    std::lock_guard lk(tx_->mu);
    if (tx_->closed) throw TransportError("pipe closed");
    tx_->data.insert(tx_->data.end(), data.begin(), data.end());
    tx_->cv.notify_all();
  }

  Bytes recv_exact(size_t n) override {
    std::unique_lock lk(rx_->mu);
    rx_->cv.wait(lk, [&] { return rx_->data.size() >= n || rx_->closed; });
    if (rx_->data.size() < n) throw TransportError("pipe closed mid-frame");
    Bytes out(rx_->data.begin(), rx_->data.begin() + n);
    rx_->data.erase(rx_->data.begin(), rx_->data.begin() + n);
    return out;
  }

  void close() override {
    for (auto& buf : {rx_, tx_}) {
      std::lock_guard lk(buf->mu);
      buf->closed = true;
      buf->cv.notify_all();
    }
  }

 private:
  std::shared_ptr<PipeBuf> rx_, tx_;
};

}  // namespace

std::pair<StreamPtr, StreamPtr> make_inproc_pipe() {
  auto a2b = std::make_shared<PipeBuf>();
  auto b2a = std::make_shared<PipeBuf>();
  return {std::make_unique<InProcStream>(b2a, a2b), std::make_unique<InProcStream>(a2b, b2a)};
}

// --- TCP ----------------------------------------------------------------------

namespace {

class TcpStream : public ByteStream {
 public:
  explicit TcpStream(int fd) : fd_(fd) {
    int one = 1;
    setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~TcpStream() override { close(); }

  void send(const Bytes& data) override {
    size_t off = 0;
    while (off < data.size()) {
      ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n <= 0) throw TransportError("tcp send failed");
      off += static_cast<size_t>(n);
    }
  }

  Bytes recv_exact(size_t n) override {
    Bytes out(n);
    size_t off = 0;
    while (off < n) {
      ssize_t got = ::recv(fd_, out.data() + off, n - off, 0);
      if (got == 0) throw TransportError("tcp connection closed mid-frame");
      if (got < 0) throw TransportError("tcp recv failed");
      off += static_cast<size_t>(got);
    }
    return out;
  }

  void close() override {
    int fd = fd_.exchange(-1);
    if (fd >= 0) {
      ::shutdown(fd, SHUT_RDWR);
      ::close(fd);
    }
  }

 private:
  std::atomic<int> fd_;
};

sockaddr_in make_addr(const std::string& host, uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw TransportError("bad IPv4 address: " + host);
  return addr;
}

}  // namespace

StreamPtr tcp_connect(const std::string& host, uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError("socket() failed");
  sockaddr_in addr = make_addr(host, port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw TransportError("connect to " + host + " failed: " + std::strerror(errno));
  }
  return std::make_unique<TcpStream>(fd);
}

TcpListener::TcpListener(const std::string& host, uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError("socket() failed");
  int one = 1;
  setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = make_addr(host, port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd_);
    throw TransportError("bind failed: " + std::string(std::strerror(errno)));
  }
  if (::listen(fd_, 16) != 0) {
    ::close(fd_);
    throw TransportError("listen failed");
  }
  socklen_t len = sizeof(addr);
  getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { close(); }

StreamPtr TcpListener::accept() {
  int cfd = ::accept(fd_, nullptr, nullptr);
  if (cfd < 0) throw TransportError("accept failed");
  return std::make_unique<TcpStream>(cfd);
}

void TcpListener::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

// --- framing -------------------------------------------------------------------

void write_frame(ByteStream& s, const wire::Frame& f) { s.send(wire::encode_frame(f)); }

wire::Frame read_frame(ByteStream& s) {
  Bytes head = s.recv_exact(4);
  size_t pos = 0;
  uint32_t len = get_u32(head, pos);
  if (len < 18 || len > wire::kMaxFrameBody) throw TransportError("bad frame length");
  return wire::decode_frame_body(s.recv_exact(len));
}

bool Transcript::operator==(const Transcript& o) const {
  if (entries_.size() != o.entries_.size()) return false;
  for (size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].outbound != o.entries_[i].outbound || entries_[i].frame != o.entries_[i].frame)
      return false;
  return true;
}

// --- CP-side connection ---------------------------------------------------------

Connection::Connection(StreamPtr stream, uint64_t session_seed, Transcript* transcript)
    : stream_(std::move(stream)), session_rng_(session_seed), transcript_(transcript) {
  rx_thread_ = std::thread([this] { rx_loop(); });
  Bytes hello;
  hello.push_back(wire::kCtrlHello);
  put_u32(hello, wire::kWireVersion);
  put_u32(hello, static_cast<uint32_t>(Role::CP));
  Bytes ack = call(wire::CONTROL, hello);
  size_t pos = 1;
  if (ack.empty() || ack[0] != wire::kCtrlHello || get_u32(ack, pos) != wire::kWireVersion)
    throw ProtocolError("HELLO handshake failed");
}

Connection::~Connection() {
  bye();
  stream_->close();
  if (rx_thread_.joinable()) rx_thread_.join();
}

void Connection::bye() {
  if (said_bye_.exchange(true)) return;
  try {
    wire::Frame f;
    f.protocol_id = wire::CONTROL;
    f.step = wire::kStepRequest;
    f.payload.push_back(wire::kCtrlBye);
    std::lock_guard lk(tx_mu_);
    Bytes raw = wire::encode_frame(f);
    if (transcript_) transcript_->add(true, raw);
    stream_->send(raw);
  } catch (const TransportError&) {
  }
}

Bytes Connection::call(uint8_t protocol_id, const Bytes& request) {
  auto waiter = std::make_shared<Waiter>();
  wire::Frame sent;
  {
    // Register the waiter under the session id atomically with the send so
    // the RX thread can never race ahead of the registration.
    std::unique_lock lk(mu_);
    if (closed_) throw TransportError("connection closed: " + close_reason_);
    lk.unlock();
    std::lock_guard txlk(tx_mu_);
    wire::Frame f;
    f.protocol_id = protocol_id;
    f.step = wire::kStepRequest;
    f.payload = request;
    f.session_id = session_rng_.id16();
    {
      std::lock_guard wlk(mu_);
      waiting_[f.session_id] = waiter;
    }
    Bytes raw = wire::encode_frame(f);
    if (transcript_) transcript_->add(true, raw);
    stream_->send(raw);
    sent = f;
  }
  {
    std::lock_guard slk(stats_mu_);
    ++stats_[protocol_id];
  }
  std::unique_lock lk(mu_);
  waiter->cv.wait(lk, [&] { return waiter->done || closed_; });
  if (!waiter->done) throw TransportError("connection lost: " + close_reason_);
  waiting_.erase(sent.session_id);
  if (waiter->aborted) throw ProtocolError("session aborted by peer: " + waiter->diagnostic);
  return std::move(waiter->payload);
}

void Connection::rx_loop() {
  try {
    for (;;) {
      wire::Frame f = read_frame(*stream_);
      std::lock_guard lk(mu_);
      if (transcript_) transcript_->add(false, wire::encode_frame(f));
      auto it = waiting_.find(f.session_id);
      if (it == waiting_.end()) continue;  // stale or unsolicited
      auto& w = *it->second;
      if (f.protocol_id == wire::CONTROL && f.step == wire::kStepAbort) {
        w.aborted = true;
        w.diagnostic.assign(f.payload.begin(), f.payload.end());
      } else {
        w.payload = std::move(f.payload);
      }
      w.done = true;
      w.cv.notify_all();
    }
  } catch (const TransportError& e) {
    std::lock_guard lk(mu_);
    closed_ = true;
    close_reason_ = e.what();
    for (auto& [sid, w] : waiting_) w->cv.notify_all();
  }
}

uint64_t Connection::sessions_opened(uint8_t protocol_id) const {
  std::lock_guard lk(stats_mu_);
  auto it = stats_.find(protocol_id);
  return it == stats_.end() ? 0 : it->second;
}

// --- CSP responder ---------------------------------------------------------------

namespace {

struct SessionIdHash {
  size_t operator()(const wire::SessionId& id) const {
    size_t h = 1469598103934665603ull;
    for (uint8_t b : id) h = (h ^ b) * 1099511628211ull;
    return h;
  }
};

void send_abort(ByteStream& stream, Transcript* transcript, const wire::SessionId& sid,
                const std::string& msg) {
  wire::Frame f;
  f.session_id = sid;
  f.protocol_id = wire::CONTROL;
  f.step = wire::kStepAbort;
  f.payload.assign(msg.begin(), msg.end());
  Bytes raw = wire::encode_frame(f);
  if (transcript) transcript->add(true, raw);
  stream.send(raw);
}

}  // namespace

void serve_connection(ByteStream& stream, const StepHandler& handler, Transcript* transcript) {
  std::unordered_set<wire::SessionId, SessionIdHash> seen;
  std::deque<wire::SessionId> seen_order;
  bool hello_done = false;
  for (;;) {
    wire::Frame f;
    try {
      f = read_frame(stream);
    } catch (const TransportError&) {
      return;  // connection gone
    }
    if (transcript) transcript->add(false, wire::encode_frame(f));

    if (f.protocol_id == wire::CONTROL) {
      if (!f.payload.empty() && f.payload[0] == wire::kCtrlBye) return;
      if (!f.payload.empty() && f.payload[0] == wire::kCtrlHello) {
        size_t pos = 1;
        uint32_t version = 0;
        try {
          version = get_u32(f.payload, pos);
          (void)get_u32(f.payload, pos);
        } catch (const TransportError&) {
          send_abort(stream, transcript, f.session_id, "malformed HELLO");
          continue;
        }
        if (version != wire::kWireVersion) {
          send_abort(stream, transcript, f.session_id, "unsupported wire version");
          continue;
        }
        wire::Frame resp;
        resp.session_id = f.session_id;
        resp.protocol_id = wire::CONTROL;
        resp.step = wire::kStepResponse;
        resp.payload.push_back(wire::kCtrlHello);
        put_u32(resp.payload, wire::kWireVersion);
        put_u32(resp.payload, static_cast<uint32_t>(Role::CSP));
        Bytes raw = wire::encode_frame(resp);
        if (transcript) transcript->add(true, raw);
        stream.send(raw);
        hello_done = true;
        continue;
      }
      send_abort(stream, transcript, f.session_id, "unknown control payload");
      continue;
    }

    if (!hello_done) {
      send_abort(stream, transcript, f.session_id, "protocol frame before HELLO");
      continue;
    }
    if (f.step != wire::kStepRequest) {
      send_abort(stream, transcript, f.session_id, "out-of-order step");
      continue;
    }
    if (!seen.insert(f.session_id).second) {
      send_abort(stream, transcript, f.session_id, "session id reuse");
      continue;
    }
    seen_order.push_back(f.session_id);
    if (seen_order.size() > 65536) {
      seen.erase(seen_order.front());
      seen_order.pop_front();
    }

    Bytes response;
    try {
      response = handler(f.protocol_id, f.payload);
    } catch (const std::exception& e) {
      send_abort(stream, transcript, f.session_id, e.what());
      continue;
    }
    wire::Frame resp;
    resp.session_id = f.session_id;
    resp.protocol_id = f.protocol_id;
    resp.step = wire::kStepResponse;
    resp.payload = std::move(response);
    Bytes raw = wire::encode_frame(resp);
    if (transcript) transcript->add(true, raw);
    stream.send(raw);
  }
}

CspServer::CspServer(const std::string& host, uint16_t port, StepHandler handler)
    : listener_(host, port), handler_(std::move(handler)) {
  accept_thread_ = std::thread([this] {
    for (;;) {
      StreamPtr s;
      try {
        s = listener_.accept();
      } catch (const TransportError&) {
        return;  // listener closed
      }
      std::lock_guard lk(mu_);
      if (stopping_) return;
      workers_.emplace_back(
          [this, stream = std::shared_ptr<ByteStream>(std::move(s))] {
            serve_connection(*stream, handler_);
          });
    }
  });
}

CspServer::~CspServer() { stop(); }

void CspServer::stop() {
  if (stopping_.exchange(true)) return;
  listener_.close();
  if (accept_thread_.joinable()) accept_thread_.join();
  std::lock_guard lk(mu_);
  for (auto& w : workers_)
    if (w.joinable()) w.join();
}

// --- KGC --------------------------------------------------------------------------

KgcMaterial kgc_bootstrap(unsigned kappa, const std::vector<std::string>& parties, Rng& rng) {
  KgcMaterial kgc;
  KeygenResult kg = keygen(kappa, rng);
  kgc.pp = kg.pp;
  kgc.master = kg.master;
  auto [cp, csp] = split_master(kgc.pp, kgc.master, rng);
  kgc.cp_share = cp;
  kgc.csp_share = csp;
  for (const auto& name : parties) register_user(kgc, name, rng);
  return kgc;
}

UserKeyPair& register_user(KgcMaterial& kgc, const std::string& name, Rng& rng) {
  if (kgc.users.count(name)) throw ConfigError("duplicate party registration: " + name);
  kgc.users[name] = gen_user_key(kgc.pp, name, rng);
  return kgc.users[name];
}

std::pair<AuthorizationRecord, UserKeyPair> issue_authorization(KgcMaterial& kgc,
                                                                const std::string& hospital,
                                                                const std::string& patient,
                                                                const std::string& period,
                                                                Rng& rng) {
  if (!kgc.users.count(hospital) || !kgc.users.count(patient))
    throw ConfigError("authorization for unregistered party");
  UserKeyPair sigma = gen_user_key(kgc.pp, "sigma", rng);
  AuthorizationRecord rec;
  rec.cert_number = rng.bits(64);
  rec.hospital = hospital;
  rec.patient = patient;
  rec.service_period = period;
  rec.pk_sigma = sigma.pk;
  kgc.certificates.push_back(rec);
  return {rec, sigma};
}

}  // namespace pmed::net
