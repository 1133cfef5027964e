#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ntpcap {

enum class Errc {
  invalid_argument,
  empty_corpus,
  context_unseen,
  no_continuation,
  infinite_loss,
  depth_exceeded,
  empty_context,
  token_out_of_range,
  boundary_target,
  injectivity_sampling_failed,
  rank_deficiency,
  enumeration_bound_exceeded,
  degenerate_b,
  divergence,
  io,
  parse,
};

std::string_view errc_name(Errc code) noexcept;

/// Library error. what() carries the human message; code() is stable and is
/// what the CLI prints in its machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message) : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) { throw Error(code, message); }

inline void require(bool cond, const std::string& message) {
  if (!cond) {
    fail(Errc::invalid_argument, message);
  }
}

}  // namespace ntpcap
