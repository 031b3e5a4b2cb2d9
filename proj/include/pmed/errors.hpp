#pragma once

#include <stdexcept>
#include <string>

namespace pmed {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input outside an operation's documented domain (e.g. plaintext >= N).
struct DomainError : Error {
  using Error::Error;
};

/// Homomorphic operation across ciphertexts under different public keys.
struct KeyMismatchError : Error {
  using Error::Error;
};

/// Decryption with a key that does not match the ciphertext.
struct DecryptError : Error {
  using Error::Error;
};

struct ArithmeticError : Error {
  using Error::Error;
};

/// Model/config contents violate a structural rule.
struct ValidationError : Error {
  using Error::Error;
};

/// A protocol session was aborted (bad frame, wrong step, peer diagnostic).
struct ProtocolError : Error {
  using Error::Error;
};

/// Connection-level failure (closed socket, framing desync, truncation).
struct TransportError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace pmed
