#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ntpcap/activation.hpp"
#include "ntpcap/corpus.hpp"
#include "ntpcap/model.hpp"

namespace ntpcap {

struct TargetSet {
  std::vector<Context> contexts;
  std::vector<std::vector<double>> targets;  // each in the open simplex

  std::size_t size() const { return contexts.size(); }
  std::size_t omega() const { return targets.empty() ? 0 : targets.front().size(); }
  /// Longest context length.
  std::size_t max_len() const;
  std::size_t num_nonempty() const;
  /// Throws on duplicate contexts, bad tokens, or targets off the open simplex.
  void validate() const;
};

/// Elementwise ln; rejects targets with a nonpositive entry.
std::vector<double> logit_lift(const std::vector<double>& target);

/// Unique contexts of a trie with p_hat as targets, mixed with the uniform
/// distribution by `smoothing` in [0, 1). With smoothing 0 any zero in p_hat
/// is rejected as a boundary target.
TargetSet targets_from_trie(const ContextTrie& trie, double smoothing = 0.0);

TargetSet targets_from_json(const std::string& text);
std::string targets_to_json(const TargetSet& ts);

struct InterpolationOptions {
  Variant variant = Variant::self_attention;
  std::size_t m = 0;        // 0: number of nonempty contexts
  std::size_t max_len = 0;  // length of u; 0: longest context
  std::uint64_t seed = 0;
  double margin = 0.5;
  double distinct_tol = 1e-9;
  std::size_t max_retries = 16;
  double rank_tol = 1e-10;   // diagonal-ratio threshold at double precision
  double tolerance = 1e-10;  // accepted max simplex error
  /// Highest rung of the precision ladder in decimal digits; 0 keeps the
  /// computation in double precision only.
  unsigned max_digits = 400;
  bool lift = false;
  std::size_t lift_d = 1;
  std::size_t lift_m0 = 1;
  std::size_t lift_d0 = 1;
  std::size_t lift_dr = 1;
};

struct InterpolationReport {
  ScalarParams params;  // rounded to double
  double epsilon = 0.0;
  double condition = 0.0;  // 1 / (min |R_kk| / max |R_kk|) of the accepted solve
  double max_error = 0.0;  // at the working precision of the accepted solve
  std::vector<double> errors;
  double double_max_error = 0.0;  // using `params` in double precision
  std::uint64_t seed = 0;
  std::size_t retries = 0;
  int precision_bits = 53;
  std::size_t n = 0;
  std::size_t m = 0;
  /// Parameters at working precision, as decimal strings, when above double.
  std::string exact_params_json;
  std::optional<TransformerParams> lifted;
};

struct VerifyReport {
  double max_error = 0.0;
  std::vector<double> errors;  // sup-norm error per context, in TargetSet order
};

template <class Real>
VerifyReport verify_interpolation(const ScalarParamsT<Real>& params, const ActivationSpec& psi, Variant variant,
                                  const TargetSet& ts);

/// Builds scalar parameters that send every context in `ts` to its target:
/// b = eta, generic (z, u) passing the distinctness gate, w scaled into the
/// Taylor disk, and V from a column-pivoted QR solve of Psi^T V = Y^T.
InterpolationReport construct_interpolant(const TargetSet& ts, const ActivationSpec& psi,
                                          const InterpolationOptions& opts);

std::string report_to_json(const InterpolationReport& r, bool include_params);

}  // namespace ntpcap
