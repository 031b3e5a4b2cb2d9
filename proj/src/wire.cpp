#include "pmed/wire.hpp"

#include "pmed/errors.hpp"

namespace pmed::wire {

Bytes encode_frame(const Frame& f) {
  Bytes out;
  size_t body = 16 + 1 + 1 + f.payload.size();
  if (body > kMaxFrameBody) throw TransportError("frame body exceeds cap");
  put_u32(out, static_cast<uint32_t>(body));
  out.insert(out.end(), f.session_id.begin(), f.session_id.end());
  out.push_back(f.protocol_id);
  out.push_back(f.step);
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

Frame decode_frame_body(const Bytes& body) {
  if (body.size() < 18) throw TransportError("frame body too short");
  Frame f;
  std::copy(body.begin(), body.begin() + 16, f.session_id.begin());
  f.protocol_id = body[16];
  f.step = body[17];
  f.payload.assign(body.begin() + 18, body.end());
  return f;
}

}  // namespace pmed::wire
