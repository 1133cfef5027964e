#include "ntpcap/error.hpp"

namespace ntpcap {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::empty_corpus: return "empty_corpus";
    case Errc::context_unseen: return "context_unseen";
    case Errc::no_continuation: return "no_continuation";
    case Errc::infinite_loss: return "infinite_loss";
    case Errc::depth_exceeded: return "depth_exceeded";
    case Errc::empty_context: return "empty_context";
    case Errc::token_out_of_range: return "token_out_of_range";
    case Errc::boundary_target: return "boundary_target";
    case Errc::injectivity_sampling_failed: return "injectivity_sampling_failed";
    case Errc::rank_deficiency: return "rank_deficiency";
    case Errc::enumeration_bound_exceeded: return "enumeration_bound_exceeded";
    case Errc::degenerate_b: return "degenerate_b";
    case Errc::divergence: return "divergence";
    case Errc::io: return "io";
    case Errc::parse: return "parse";
  }
  return "unknown";
}

}  // namespace ntpcap
