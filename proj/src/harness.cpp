#include "pmed/harness.hpp"

namespace pmed {

namespace {

// Fixed sub-seed schedule so each role's stream is independent of the others.
uint64_t sub_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

TwoServerHarness::TwoServerHarness(unsigned kappa, uint64_t seed, Transport transport,
                                   net::Transcript* cp_transcript)
    : cp_rng_(sub_seed(seed, 2)) {
  Rng kgc_rng(sub_seed(seed, 0));
  kgc_ = net::kgc_bootstrap(kappa, {"A", "B"}, kgc_rng);
  auto [cert, sigma] = net::issue_authorization(kgc_, "A", "B", "20190101-20191231", kgc_rng);
  cert_ = cert;
  sigma_ = sigma;

  csp_ = std::make_unique<CspContext>(CspContext{kgc_.pp, kgc_.csp_share, sigma_.pk, "sigma",
                                                 Rng(sub_seed(seed, 1))});

  if (transport == Transport::Tcp) {
    tcp_server_ = std::make_unique<net::CspServer>("127.0.0.1", 0, make_csp_handler(*csp_));
    conn_ = std::make_unique<net::Connection>(
        net::tcp_connect("127.0.0.1", tcp_server_->port()), sub_seed(seed, 3), cp_transcript);
  } else {
    auto [cp_end, csp_end] = net::make_inproc_pipe();
    auto csp_stream = std::shared_ptr<net::ByteStream>(std::move(csp_end));
    inproc_server_ = std::thread([this, csp_stream] {
      net::serve_connection(*csp_stream, make_csp_handler(*csp_));
    });
    conn_ = std::make_unique<net::Connection>(std::move(cp_end), sub_seed(seed, 3), cp_transcript);
  }

  ctx_.pp = &kgc_.pp;
  ctx_.share = kgc_.cp_share;
  ctx_.pks["A"] = hospital().pk;
  ctx_.pks["B"] = patient().pk;
  ctx_.pks["sigma"] = sigma_.pk;
  ctx_.rng = &cp_rng_;
  ctx_.conn = conn_.get();
}

TwoServerHarness::~TwoServerHarness() {
  conn_.reset();  // sends BYE; the responder loop exits
  if (inproc_server_.joinable()) inproc_server_.join();
  tcp_server_.reset();
}

uint16_t TwoServerHarness::tcp_port() const {
  return tcp_server_ ? tcp_server_->port() : 0;
}

}  // namespace pmed
