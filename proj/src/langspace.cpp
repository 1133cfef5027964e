#include "ntpcap/langspace.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "ntpcap/error.hpp"
#include "ntpcap/rng.hpp"

namespace ntpcap {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr std::size_t kMaxTableSize = std::size_t{1} << 26;

}  // namespace

SequenceIndex::SequenceIndex(std::size_t omega, std::size_t max_len) : omega_(omega), max_len_(max_len) {
  require(omega >= 1, "vocabulary size must be positive");
  offsets_.push_back(0);
  std::size_t level = 1;
  for (std::size_t t = 0; t <= max_len; ++t) {
    if (offsets_.back() + level > kMaxTableSize) {
      fail(Errc::enumeration_bound_exceeded, "language space table too large");
    }
    offsets_.push_back(offsets_.back() + level);
    level *= omega;
  }
}

std::size_t SequenceIndex::index(ContextView seq) const {
  if (seq.size() > max_len_) {
    fail(Errc::depth_exceeded, "depth exceeded");
  }
  std::size_t rank = 0;
  for (TokenId tok : seq) {
    if (tok == 0 || tok > omega_) {
      fail(Errc::token_out_of_range, "token id " + std::to_string(tok) + " out of range");
    }
    rank = rank * omega_ + (tok - 1);
  }
  return offsets_[seq.size()] + rank;
}

Context SequenceIndex::sequence(std::size_t index) const {
  require(index < size(), "sequence index out of range");
  std::size_t t = 0;
  while (offsets_[t + 1] <= index) {
    ++t;
  }
  std::size_t rank = index - offsets_[t];
  Context seq(t);
  for (std::size_t i = t; i-- > 0;) {
    seq[i] = static_cast<TokenId>(rank % omega_ + 1);
    rank /= omega_;
  }
  return seq;
}

LanguageSpaceFirstKind::LanguageSpaceFirstKind(std::size_t omega, std::size_t depth)
    : omega_(omega), depth_(depth), index_(omega, depth == 0 ? 0 : depth - 1) {
  require(depth >= 1, "depth must be positive");
  rows_.resize(index_.size());
}

bool LanguageSpaceFirstKind::in_support(ContextView ctx) const { return !rows_[index_.index(ctx)].empty(); }

const std::vector<double>& LanguageSpaceFirstKind::row(ContextView ctx) const { return rows_[index_.index(ctx)]; }

void LanguageSpaceFirstKind::set_row(ContextView ctx, std::vector<double> probs) {
  require(probs.size() == omega_, "row length must equal omega");
  rows_[index_.index(ctx)] = std::move(probs);
}

void LanguageSpaceFirstKind::clear_row(ContextView ctx) { rows_[index_.index(ctx)].clear(); }

void LanguageSpaceFirstKind::validate() const {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const Context ctx = index_.sequence(i);
    bool reachable = true;
    if (!ctx.empty()) {
      const ContextView parent(ctx.data(), ctx.size() - 1);
      const auto& prow = rows_[index_.index(parent)];
      reachable = !prow.empty() && prow[ctx.back() - 1] > 0.0;
    }
    const auto& r = rows_[i];
    if (reachable != !r.empty()) {
      fail(Errc::invalid_argument, "support mismatch at context '" + context_key(ctx) + "'");
    }
    if (r.empty()) {
      continue;
    }
    double sum = 0.0;
    for (double p : r) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        fail(Errc::invalid_argument, "row is not a probability vector");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      fail(Errc::invalid_argument, "row '" + context_key(ctx) + "' does not sum to 1");
    }
  }
}

LanguageSpaceSecondKind::LanguageSpaceSecondKind(std::size_t omega, std::size_t depth)
    : omega_(omega), depth_(depth), index_(omega, depth) {
  require(depth >= 1, "depth must be positive");
  q_.assign(index_.size(), 0.0);
  q_[0] = 1.0;
}

double LanguageSpaceSecondKind::mass(ContextView x) const { return q_[index_.index(x)]; }

void LanguageSpaceSecondKind::set_mass(ContextView x, double q) {
  require(!x.empty(), "the empty sequence has mass 1 by definition");
  q_[index_.index(x)] = q;
}

double LanguageSpaceSecondKind::level_sum(std::size_t t) const {
  require(t <= depth_, "level beyond depth");
  return std::accumulate(q_.begin() + static_cast<std::ptrdiff_t>(index_.offset(t)),
                         q_.begin() + static_cast<std::ptrdiff_t>(index_.offset(t + 1)), 0.0);
}

void LanguageSpaceSecondKind::validate(double tol) const {
  for (std::size_t t = 1; t <= depth_; ++t) {
    if (std::abs(level_sum(t) - 1.0) > tol) {
      fail(Errc::invalid_argument, "level " + std::to_string(t) + " does not sum to 1");
    }
  }
  for (std::size_t i = 0; i < index_.offset(depth_); ++i) {
    double sum = 0.0;
    Context x = index_.sequence(i);
    x.push_back(1);
    const std::size_t base = index_.index(x);
    for (std::size_t g = 0; g < omega_; ++g) {
      const double q = q_[base + g];
      if (!(q >= 0.0)) {
        fail(Errc::invalid_argument, "negative mass");
      }
      sum += q;
    }
    if (std::abs(sum - q_[i]) > tol) {
      fail(Errc::invalid_argument, "masses are not consistent at '" + context_key(index_.sequence(i)) + "'");
    }
  }
}

LanguageSpaceSecondKind phi12(const LanguageSpaceFirstKind& space) {
  LanguageSpaceSecondKind out(space.omega(), space.depth());
  const std::size_t omega = space.omega();
  // Children of x occupy a contiguous block, so one pass in index order
  // propagates q(x, y) = q(x) p(y | x).
  for (std::size_t i = 0; i < space.index().size(); ++i) {
    Context x = space.index().sequence(i);
    const double qx = out.mass(x);
    const auto& r = space.row_at(i);
    x.push_back(1);
    for (std::size_t g = 0; g < omega; ++g) {
      x.back() = static_cast<TokenId>(g + 1);
      out.set_mass(x, r.empty() ? 0.0 : qx * r[g]);
    }
  }
  return out;
}

LanguageSpaceFirstKind phi21(const LanguageSpaceSecondKind& space) {
  LanguageSpaceFirstKind out(space.omega(), space.depth());
  const std::size_t omega = space.omega();
  for (std::size_t i = 0; i < out.index().size(); ++i) {
    Context x = out.index().sequence(i);
    const double qx = space.mass(x);
    if (qx == 0.0) {
      continue;
    }
    std::vector<double> r(omega);
    Context xy = x;
    xy.push_back(1);
    for (std::size_t g = 0; g < omega; ++g) {
      xy.back() = static_cast<TokenId>(g + 1);
      r[g] = space.mass(xy) / qx;
    }
    out.set_row(x, std::move(r));
  }
  return out;
}

namespace {

Context sample_document(const LanguageSpaceFirstKind& space, std::size_t doc_len, Philox& rng) {
  Context doc;
  doc.reserve(doc_len);
  for (std::size_t t = 0; t < doc_len; ++t) {
    const auto& r = space.row(doc);
    require(!r.empty(), "sampled context outside the support");
    // Inverse CDF: the smallest token whose cumulative mass exceeds u.
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t pick = r.size();
    std::size_t last_positive = 0;
    for (std::size_t g = 0; g < r.size(); ++g) {
      if (r[g] > 0.0) {
        last_positive = g;
      }
      cum += r[g];
      if (cum > u && r[g] > 0.0) {
        pick = g;
        break;
      }
    }
    if (pick == r.size()) {
      pick = last_positive;
    }
    doc.push_back(static_cast<TokenId>(pick + 1));
  }
  return doc;
}

void check_doc_len(const LanguageSpaceFirstKind& space, std::size_t doc_len) {
  require(doc_len >= 1, "document length must be positive");
  if (doc_len > space.depth()) {
    fail(Errc::depth_exceeded, "depth exceeded");
  }
}

}  // namespace

Corpus sample_corpus(const LanguageSpaceFirstKind& space, std::size_t n, std::size_t doc_len, std::uint64_t seed) {
  require(n >= 1, "number of documents must be positive");
  check_doc_len(space, doc_len);
  Philox rng(seed);
  Corpus corpus;
  corpus.omega = space.omega();
  corpus.max_len = doc_len;
  corpus.docs.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    corpus.docs.push_back(sample_document(space, doc_len, rng));
  }
  return corpus;
}

Corpus sample_corpus_with_contexts(const LanguageSpaceFirstKind& space, std::size_t target_contexts,
                                   std::size_t doc_len, std::uint64_t seed, std::size_t max_docs) {
  require(target_contexts >= 1, "target context count must be positive");
  check_doc_len(space, doc_len);
  Philox rng(seed);
  Corpus corpus;
  corpus.omega = space.omega();
  corpus.max_len = doc_len;
  std::set<Context> prefixes{Context{}};
  while (prefixes.size() < target_contexts) {
    if (corpus.docs.size() == max_docs) {
      fail(Errc::invalid_argument, "could not reach " + std::to_string(target_contexts) + " unique contexts");
    }
    Context doc = sample_document(space, doc_len, rng);
    for (std::size_t t = 1; t < doc.size(); ++t) {
      prefixes.insert(Context(doc.begin(), doc.begin() + static_cast<std::ptrdiff_t>(t)));
    }
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

LanguageSpaceFirstKind random_space(std::size_t omega, std::size_t depth, double concentration, std::uint64_t seed) {
  require(omega >= 2, "random_space needs omega >= 2");
  require(concentration > 0.0, "concentration must be positive");
  LanguageSpaceFirstKind space(omega, depth);
  Philox rng(seed);
  for (std::size_t i = 0; i < space.index().size(); ++i) {
    std::vector<double> r(omega);
    double sum = 0.0;
    for (auto& p : r) {
      p = std::pow(rng.uniform(), 1.0 / concentration);
      sum += p;
    }
    for (auto& p : r) {
      p /= sum;
    }
    space.set_row(space.index().sequence(i), std::move(r));
  }
  return space;
}

double conditional_entropy(const LanguageSpaceFirstKind& space, ContextView ctx) {
  const auto& r = space.row(ctx);
  if (r.empty()) {
    fail(Errc::context_unseen, "context outside the support");
  }
  double h = 0.0;
  for (double p : r) {
    if (p > 0.0) {
      h -= p * std::log(p);
    }
  }
  return h;
}

std::string space_to_json(const LanguageSpaceFirstKind& space) {
  nlohmann::ordered_json j;
  j["omega"] = space.omega();
  j["depth"] = space.depth();
  nlohmann::ordered_json rows = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < space.index().size(); ++i) {
    if (!space.row_at(i).empty()) {
      rows[context_key(space.index().sequence(i))] = space.row_at(i);
    }
  }
  j["rows"] = std::move(rows);
  return j.dump(2);
}

LanguageSpaceFirstKind space_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, std::string("bad language space JSON: ") + e.what());
  }
  try {
    LanguageSpaceFirstKind space(j.at("omega").get<std::size_t>(), j.at("depth").get<std::size_t>());
    for (const auto& [key, row] : j.at("rows").items()) {
      space.set_row(parse_context_key(key), row.get<std::vector<double>>());
    }
    space.validate();
    return space;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, std::string("bad language space JSON: ") + e.what());
  }
}

}  // namespace ntpcap
