#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ntpcap/corpus.hpp"

namespace ntpcap {

/// Dense indexing of all sequences of length < depth (first kind) or
/// 1..depth (second kind) over a vocabulary of size omega. Sequences of one
/// length are laid out in base-omega order.
class SequenceIndex {
 public:
  SequenceIndex(std::size_t omega, std::size_t max_len);

  std::size_t omega() const { return omega_; }
  std::size_t max_len() const { return max_len_; }
  /// Number of sequences with length in [0, max_len].
  std::size_t size() const { return offsets_.back(); }
  /// First index of sequences of length t.
  std::size_t offset(std::size_t t) const { return offsets_[t]; }
  std::size_t index(ContextView seq) const;
  Context sequence(std::size_t index) const;

 private:
  std::size_t omega_;
  std::size_t max_len_;
  std::vector<std::size_t> offsets_;
};

/// p(. | alpha) for every alpha with |alpha| < depth. Rows of contexts outside
/// the support A are empty.
class LanguageSpaceFirstKind {
 public:
  LanguageSpaceFirstKind(std::size_t omega, std::size_t depth);

  std::size_t omega() const { return omega_; }
  std::size_t depth() const { return depth_; }
  const SequenceIndex& index() const { return index_; }

  bool in_support(ContextView ctx) const;
  /// Empty vector when ctx is outside the support.
  const std::vector<double>& row(ContextView ctx) const;
  const std::vector<double>& row_at(std::size_t idx) const { return rows_[idx]; }
  void set_row(ContextView ctx, std::vector<double> probs);
  void clear_row(ContextView ctx);

  /// Throws unless rows are probability vectors (sum within 1e-12) and the
  /// support is exactly the set of contexts reachable through nonzero
  /// conditionals.
  void validate() const;

 private:
  std::size_t omega_;
  std::size_t depth_;
  SequenceIndex index_;
  std::vector<std::vector<double>> rows_;
};

/// q(x) for every x with 1 <= |x| <= depth; q(()) = 1 implicitly.
class LanguageSpaceSecondKind {
 public:
  LanguageSpaceSecondKind(std::size_t omega, std::size_t depth);

  std::size_t omega() const { return omega_; }
  std::size_t depth() const { return depth_; }
  const SequenceIndex& index() const { return index_; }

  double mass(ContextView x) const;
  void set_mass(ContextView x, double q);
  double mass_at(std::size_t idx) const { return q_[idx]; }

  /// Sum over all x of length t; 1 for a valid space.
  double level_sum(std::size_t t) const;
  /// Throws unless each level sums to 1 and masses are consistent.
  void validate(double tol = 1e-9) const;

 private:
  std::size_t omega_;
  std::size_t depth_;
  SequenceIndex index_;
  std::vector<double> q_;
};

LanguageSpaceSecondKind phi12(const LanguageSpaceFirstKind& space);
LanguageSpaceFirstKind phi21(const LanguageSpaceSecondKind& space);

/// Ancestral sampling of n documents of length doc_len.
Corpus sample_corpus(const LanguageSpaceFirstKind& space, std::size_t n, std::size_t doc_len, std::uint64_t seed);

/// Samples documents until the corpus has at least `target_contexts` unique
/// contexts (the empty context included).
Corpus sample_corpus_with_contexts(const LanguageSpaceFirstKind& space, std::size_t target_contexts,
                                   std::size_t doc_len, std::uint64_t seed, std::size_t max_docs = 1000000);

/// Full-support space; each row is proportional to U_g^(1/concentration),
/// U_g uniform on (0, 1). Large concentration gives rows close to uniform.
LanguageSpaceFirstKind random_space(std::size_t omega, std::size_t depth, double concentration, std::uint64_t seed);

/// Shannon entropy (natural log) of the row p(. | ctx).
double conditional_entropy(const LanguageSpaceFirstKind& space, ContextView ctx);

std::string space_to_json(const LanguageSpaceFirstKind& space);
LanguageSpaceFirstKind space_from_json(const std::string& text);

}  // namespace ntpcap
