#include "pmed/protocols.hpp"

#include "pmed/errors.hpp"

namespace pmed {

const Int& ProtocolContext::pk_of(const std::string& tag) const {
  auto it = pks.find(tag);
  if (it == pks.end()) throw KeyMismatchError("unknown pk tag: " + tag);
  return it->second;
}

namespace detail {

void put_ct(Bytes& out, const Ciphertext& ct) {
  put_int(out, ct.c1);
  put_int(out, ct.c2);
}

Ciphertext get_ct(const Bytes& in, size_t& pos, std::string tag) {
  return ciphertext_from(in, pos, std::move(tag));
}

MaskedPair mask_for_csp(ProtocolContext& ctx, const Ciphertext& ct, const Int& r) {
  Ciphertext blinded =
      hom_add(*ctx.pp, ct, encrypt(*ctx.pp, ctx.pk_of(ct.pk_tag), ct.pk_tag, r, *ctx.rng));
  return MaskedPair{blinded, partial_decrypt_1(*ctx.pp, ctx.share, blinded)};
}

}  // namespace detail

using detail::get_ct;
using detail::put_ct;

namespace {

// Request payload for SAD and CMP: the two blinded C1 components and CP's
// partial decryptions. Only c1 matters for threshold decryption.
Bytes pack_two_masked(const detail::MaskedPair& a, const detail::MaskedPair& b) {
  Bytes out;
  put_int(out, a.ct.c1);
  put_int(out, a.part.value);
  put_int(out, b.ct.c1);
  put_int(out, b.part.value);
  return out;
}

Ciphertext parse_sigma_ct(const ProtocolContext& ctx, const Bytes& resp) {
  size_t pos = 0;
  Ciphertext ct = get_ct(resp, pos, ctx.sigma_tag);
  if (pos != resp.size()) throw ProtocolError("trailing bytes in response");
  return ct;
}

}  // namespace

Ciphertext enc_sigma(ProtocolContext& ctx, const Int& value) {
  return encrypt(*ctx.pp, ctx.pk_sigma(), ctx.sigma_tag, mod(value, ctx.pp->n), *ctx.rng);
}

// --- SAD -------------------------------------------------------------------
// CP blinds x and y additively, CSP threshold-decrypts both, adds, and
// re-encrypts under pk_σ; CP strips r_x + r_y homomorphically.

Ciphertext sad(ProtocolContext& ctx, const Ciphertext& x, const Ciphertext& y) {
  const PublicParams& pp = *ctx.pp;
  Int r_x = ctx.rng->below(pp.n);
  Int r_y = ctx.rng->below(pp.n);
  auto xm = detail::mask_for_csp(ctx, x, r_x);
  auto ym = detail::mask_for_csp(ctx, y, r_y);
  Bytes resp = ctx.conn->call(wire::SAD, pack_two_masked(xm, ym));
  Ciphertext s = parse_sigma_ct(ctx, resp);
  Int r = mod(r_x + r_y, pp.n);
  return hom_add(pp, s, hom_scale(pp, enc_sigma(ctx, r), pp.n - 1));
}

// --- SMD -------------------------------------------------------------------

Ciphertext smd(ProtocolContext& ctx, const Ciphertext& x, const Ciphertext& y) {
  const PublicParams& pp = *ctx.pp;
  Int r_x = ctx.rng->below(pp.n);
  Int r_y = ctx.rng->below(pp.n);
  Int R_x = ctx.rng->below(pp.n);
  Int R_y = ctx.rng->below(pp.n);

  auto xm = detail::mask_for_csp(ctx, x, r_x);
  auto ym = detail::mask_for_csp(ctx, y, r_y);
  // S = [R_x − r_y·x] under x's key, T = [R_y − r_x·y] under y's key.
  Ciphertext s_ct = hom_add(
      pp, encrypt(pp, ctx.pk_of(x.pk_tag), x.pk_tag, R_x, *ctx.rng), hom_scale(pp, x, pp.n - r_y));
  Ciphertext t_ct = hom_add(
      pp, encrypt(pp, ctx.pk_of(y.pk_tag), y.pk_tag, R_y, *ctx.rng), hom_scale(pp, y, pp.n - r_x));
  auto sp = partial_decrypt_1(pp, ctx.share, s_ct);
  auto tp = partial_decrypt_1(pp, ctx.share, t_ct);

  Bytes req;
  put_int(req, xm.ct.c1);
  put_int(req, xm.part.value);
  put_int(req, ym.ct.c1);
  put_int(req, ym.part.value);
  put_int(req, s_ct.c1);
  put_int(req, sp.value);
  put_int(req, t_ct.c1);
  put_int(req, tp.value);
  Bytes resp = ctx.conn->call(wire::SMD, req);

  size_t pos = 0;
  Ciphertext h = get_ct(resp, pos, ctx.sigma_tag);
  Ciphertext s3 = get_ct(resp, pos, ctx.sigma_tag);
  Ciphertext t3 = get_ct(resp, pos, ctx.sigma_tag);
  if (pos != resp.size()) throw ProtocolError("trailing bytes in SMD response");

  // h + (R_x − r_y·x) + (R_y − r_x·y) − r_x·r_y − R_x − R_y = x·y.
  Ciphertext s4 = hom_scale(pp, enc_sigma(ctx, mod(r_x * r_y, pp.n)), pp.n - 1);
  Ciphertext s5 = hom_scale(pp, enc_sigma(ctx, R_x), pp.n - 1);
  Ciphertext s6 = hom_scale(pp, enc_sigma(ctx, R_y), pp.n - 1);
  Ciphertext out = hom_add(pp, h, t3);
  out = hom_add(pp, out, s3);
  out = hom_add(pp, out, s4);
  out = hom_add(pp, out, s5);
  return hom_add(pp, out, s6);
}

// --- comparisons -------------------------------------------------------------
// One round trip: the additive blinding of the two scaled operands is chosen
// with r_p + r_q ≡ r2 (mod N), so the sum CSP sees after threshold
// decryption is exactly the masked scaled difference r1·Δ + r2 whose bit
// length encodes the sign.

Ciphertext compare(ProtocolContext& ctx, CompareMode mode, const Ciphertext& x,
                   const Ciphertext& y) {
  const PublicParams& pp = *ctx.pp;
  CompareBounds bounds = compare_bounds(pp);

  bool ge_family = (mode == CompareMode::GE || mode == CompareMode::LT);
  // GE/LT: x' = 2x+1, y' = 2y.  LE/GT: x' = 2x, y' = 2y+1.
  Ciphertext xp = hom_scale(pp, x, 2);
  Ciphertext yp = hom_scale(pp, y, 2);
  if (ge_family)
    xp = hom_add(pp, xp, encrypt(pp, ctx.pk_of(x.pk_tag), x.pk_tag, 1, *ctx.rng));
  else
    yp = hom_add(pp, yp, encrypt(pp, ctx.pk_of(y.pk_tag), y.pk_tag, 1, *ctx.rng));

  Int r1 = ctx.rng->range(bounds.r1_lo, bounds.r1_hi);
  Int r2 = ctx.rng->range(1, bounds.r2_hi);
  bool s = ctx.debug.forced_compare_coin ? *ctx.debug.forced_compare_coin : ctx.rng->coin();
  if (ctx.debug.compare_trace) ctx.debug.compare_trace->push_back({mode, s, r1, r2});

  // Orientation of the scaled difference. A-4 (GE family): s=1 scales x'−y';
  // A-5 (LE family): s=1 scales y'−x'. s=0 swaps either.
  bool x_first = ge_family ? s : !s;
  const Ciphertext& p = x_first ? xp : yp;
  const Ciphertext& q = x_first ? yp : xp;
  Ciphertext p_scaled = hom_scale(pp, p, r1);
  Ciphertext q_scaled = hom_scale(pp, q, pp.n - r1);

  Int r_p = ctx.rng->below(pp.n);
  Int r_q = mod(r2 - r_p, pp.n);
  auto pm = detail::mask_for_csp(ctx, p_scaled, r_p);
  auto qm = detail::mask_for_csp(ctx, q_scaled, r_q);
  Bytes resp = ctx.conn->call(wire::CMP, pack_two_masked(pm, qm));
  Ciphertext u = parse_sigma_ct(ctx, resp);

  // s-dependent output flip per A-4..A-7.
  bool keep = (mode == CompareMode::GE || mode == CompareMode::LE) ? s : !s;
  if (keep) return refresh(pp, ctx.pk_sigma(), u, *ctx.rng);
  return hom_add(pp, enc_sigma(ctx, 1), hom_scale(pp, u, pp.n - 1));
}

Ciphertext set_eq(ProtocolContext& ctx, const Ciphertext& x, const Ciphertext& y) {
  Ciphertext u1 = compare(ctx, CompareMode::LE, x, y);
  Ciphertext u2 = compare(ctx, CompareMode::LE, y, x);
  return smd(ctx, u1, u2);
}

Ciphertext sut_neq(ProtocolContext& ctx, const Ciphertext& x, const Ciphertext& y) {
  ++ctx.sut_calls;
  Ciphertext eq = set_eq(ctx, x, y);
  return hom_add(*ctx.pp, enc_sigma(ctx, 1), hom_scale(*ctx.pp, eq, ctx.pp->n - 1));
}

Ciphertext src_range(ProtocolContext& ctx, const Ciphertext& x, const Ciphertext& y1,
                     const Ciphertext& y2) {
  Ciphertext u1 = compare(ctx, CompareMode::GE, x, y1);
  Ciphertext u2 = compare(ctx, CompareMode::LE, x, y2);
  return smd(ctx, u1, u2);
}

// --- CSP side ------------------------------------------------------------------

namespace {

Int pd2_from_wire(const CspContext& csp, const Int& c1, const Int& part) {
  Ciphertext ct{c1, 0, ""};
  return partial_decrypt_2(csp.pp, csp.share, ct, PartialDecryption{part});
}

Bytes csp_sad(CspContext& csp, const Bytes& req) {
  size_t pos = 0;
  Int xc1 = get_int(req, pos);
  Int xp = get_int(req, pos);
  Int yc1 = get_int(req, pos);
  Int yp = get_int(req, pos);
  if (pos != req.size()) throw ProtocolError("SAD request arity");
  Int s = mod(pd2_from_wire(csp, xc1, xp) + pd2_from_wire(csp, yc1, yp), csp.pp.n);
  return encrypt(csp.pp, csp.pk_sigma, csp.sigma_tag, s, csp.rng).serialize();
}

Bytes csp_smd(CspContext& csp, const Bytes& req) {
  size_t pos = 0;
  Int xc1 = get_int(req, pos);
  Int xp = get_int(req, pos);
  Int yc1 = get_int(req, pos);
  Int yp = get_int(req, pos);
  Int sc1 = get_int(req, pos);
  Int sp = get_int(req, pos);
  Int tc1 = get_int(req, pos);
  Int tp = get_int(req, pos);
  if (pos != req.size()) throw ProtocolError("SMD request arity");
  Int h = mod(pd2_from_wire(csp, xc1, xp) * pd2_from_wire(csp, yc1, yp), csp.pp.n);
  Int s2 = pd2_from_wire(csp, sc1, sp);
  Int t2 = pd2_from_wire(csp, tc1, tp);
  Bytes out;
  put_ct(out, encrypt(csp.pp, csp.pk_sigma, csp.sigma_tag, h, csp.rng));
  put_ct(out, encrypt(csp.pp, csp.pk_sigma, csp.sigma_tag, s2, csp.rng));
  put_ct(out, encrypt(csp.pp, csp.pk_sigma, csp.sigma_tag, t2, csp.rng));
  return out;
}

Bytes csp_cmp(CspContext& csp, const Bytes& req) {
  size_t pos = 0;
  Int pc1 = get_int(req, pos);
  Int ppart = get_int(req, pos);
  Int qc1 = get_int(req, pos);
  Int qpart = get_int(req, pos);
  if (pos != req.size()) throw ProtocolError("CMP request arity");
  Int l = mod(pd2_from_wire(csp, pc1, ppart) + pd2_from_wire(csp, qc1, qpart), csp.pp.n);
  int u = wrapped_negative(csp.pp, l) ? 0 : 1;
  return encrypt(csp.pp, csp.pk_sigma, csp.sigma_tag, u, csp.rng).serialize();
}

}  // namespace

// SMIN/BPSK step handlers live here so the responder has a single dispatch
// point; the CP-side halves are in pipeline.cpp.

namespace steps {

Bytes csp_smin_step(CspContext& csp, const Bytes& req) {
  size_t pos = 0;
  uint32_t positions = get_u32(req, pos);
  if (positions > 4096) throw ProtocolError("SMIN request too wide");
  Int l0c1 = get_int(req, pos);
  Int l0part = get_int(req, pos);
  Ciphertext l1 = get_ct(req, pos, csp.sigma_tag);
  std::vector<Ciphertext> l2(positions), l3(positions);
  for (auto& ct : l2) ct = get_ct(req, pos, csp.sigma_tag);
  for (auto& ct : l3) ct = get_ct(req, pos, csp.sigma_tag);
  if (pos != req.size()) throw ProtocolError("SMIN request arity");

  Int l0 = pd2_from_wire(csp, l0c1, l0part);
  int t = wrapped_negative(csp.pp, l0) ? 0 : 1;

  auto zero = [&] { return encrypt(csp.pp, csp.pk_sigma, csp.sigma_tag, 0, csp.rng); };
  Bytes out;
  put_ct(out, encrypt(csp.pp, csp.pk_sigma, csp.sigma_tag, t, csp.rng));
  put_ct(out, t == 0 ? zero() : refresh(csp.pp, csp.pk_sigma, l1, csp.rng));
  for (uint32_t i = 0; i < positions; ++i)
    put_ct(out, t == 0 ? zero() : refresh(csp.pp, csp.pk_sigma, l2[i], csp.rng));
  for (uint32_t i = 0; i < positions; ++i)
    put_ct(out, t == 0 ? zero() : refresh(csp.pp, csp.pk_sigma, l3[i], csp.rng));
  return out;
}

Bytes csp_bpsk_step(CspContext& csp, const Bytes& req) {
  size_t pos = 0;
  Int mweight = get_int(req, pos);
  uint32_t n = get_u32(req, pos);
  if (n > 100000) throw ProtocolError("BPSK request too wide");
  Bytes out;
  for (uint32_t j = 0; j < n; ++j) {
    Int c1 = get_int(req, pos);
    Int part = get_int(req, pos);
    Int val = pd2_from_wire(csp, c1, part);
    Int a = (mpz_sgn(val.get_mpz_t()) == 0) ? mweight : Int(1);
    put_ct(out, encrypt(csp.pp, csp.pk_sigma, csp.sigma_tag, a, csp.rng));
  }
  if (pos != req.size()) throw ProtocolError("BPSK request arity");
  return out;
}

}  // namespace steps

Bytes csp_handle_step(CspContext& csp, uint8_t protocol_id, const Bytes& request) {
  switch (protocol_id) {
    case wire::SAD:
      return csp_sad(csp, request);
    case wire::SMD:
      return csp_smd(csp, request);
    case wire::CMP:
      return csp_cmp(csp, request);
    case wire::SMIN_STEP:
      return steps::csp_smin_step(csp, request);
    case wire::BPSK_STEP:
      return steps::csp_bpsk_step(csp, request);
    default:
      throw ProtocolError("no handler for protocol id " + std::to_string(int(protocol_id)));
  }
}

net::StepHandler make_csp_handler(CspContext& csp) {
  return [&csp](uint8_t pid, const Bytes& req) { return csp_handle_step(csp, pid, req); };
}

}  // namespace pmed
