#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ntpcap {

/// Token ids are 1-based: a vocabulary of size omega uses ids 1..omega.
using TokenId = std::uint32_t;
using Context = std::vector<TokenId>;
using ContextView = std::span<const TokenId>;

std::string context_key(ContextView ctx);
Context parse_context_key(std::string_view key);

enum class TokenizerScheme { whitespace, word_punct };

TokenizerScheme parse_tokenizer_scheme(std::string_view name);

/// Splits text into token strings. word_punct: maximal runs of word
/// characters (ASCII alphanumerics, '_' and any non-ASCII byte) and maximal
/// runs of other non-space characters, ASCII-lowercased.
std::vector<std::string> tokenize(std::string_view text, TokenizerScheme scheme);

class Vocabulary {
 public:
  TokenId add(const std::string& token);
  TokenId id(const std::string& token) const;
  bool contains(const std::string& token) const { return to_id_.contains(token); }
  const std::string& token(TokenId id) const;
  std::size_t size() const { return to_token_.size(); }
  const std::vector<std::string>& tokens() const { return to_token_; }

 private:
  std::unordered_map<std::string, TokenId> to_id_;
  std::vector<std::string> to_token_;
};

struct Corpus {
  std::vector<Context> docs;
  std::size_t omega = 0;
  std::size_t max_len = 0;

  std::size_t total_tokens() const;
  /// Throws unless every document is nonempty with ids in [1, omega].
  void validate() const;
};

struct BuiltCorpus {
  Vocabulary vocab;
  Corpus corpus;
};

/// Truncates each document to `truncate_len` tokens, drops documents that are
/// empty, then assigns ids in first-occurrence order.
BuiltCorpus build_corpus(const std::vector<std::vector<std::string>>& token_docs, std::size_t truncate_len);

/// Prefix tree over documents with occurrence counts.
///
/// Every prefix of every document is a node (including complete documents);
/// a node is a unique context iff it has at least one child, i.e. it is a
/// proper prefix of some document.
class ContextTrie {
 public:
  struct Node {
    Context context;
    std::uint64_t count = 0;       // documents having this node as a prefix
    std::uint64_t as_context = 0;  // sum over children of their counts
    std::vector<std::pair<TokenId, std::size_t>> children;  // sorted by token id
  };

  explicit ContextTrie(const Corpus& corpus);

  std::size_t omega() const { return omega_; }
  std::uint64_t num_documents() const { return nodes_.front().count; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& root() const { return nodes_.front(); }

  /// Index of the node for `ctx`, or npos when c(ctx) = 0.
  std::size_t find(ContextView ctx) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// c(ctx): number of documents having ctx as a prefix.
  std::uint64_t count(ContextView ctx) const;
  /// sum_gamma c(ctx, gamma): occurrences of ctx followed by a token. Smaller
  /// than c(ctx) when some document ends exactly at ctx.
  std::uint64_t context_count(ContextView ctx) const;
  /// c(ctx, gamma) for gamma = 1..omega.
  std::vector<std::uint64_t> child_counts(ContextView ctx) const;
  std::vector<std::uint64_t> child_counts(const Node& node) const;

  /// Indices of the unique contexts in depth-first, token-ordered traversal.
  const std::vector<std::size_t>& unique_contexts() const { return unique_; }
  std::size_t num_unique_contexts() const { return unique_.size(); }

 private:
  std::size_t child(std::size_t node, TokenId token) const;

  std::size_t omega_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> unique_;
};

inline ContextTrie build_trie(const Corpus& corpus) { return ContextTrie(corpus); }

/// p_hat(. | ctx) = c(ctx, .) / c(ctx), length omega.
std::vector<double> empirical_next_token(const ContextTrie& trie, ContextView ctx);

using NextTokenModel = std::function<std::vector<double>(ContextView)>;

/// -sum_j sum_t log q(beta_t | beta_<t), evaluated document by document.
double cross_entropy_loss(const Corpus& corpus, const NextTokenModel& model);

/// sum over unique contexts of c(alpha) * H(p_hat(. | alpha)), natural log.
double entropy_lower_bound(const ContextTrie& trie);

// Files: one document per line.
std::vector<std::string> read_lines(std::istream& in);
std::vector<std::string> read_lines_file(const std::string& path);
void write_corpus_ids(std::ostream& out, const Corpus& corpus);
/// {"token": id, ...}
std::string vocabulary_json(const Vocabulary& vocab);
/// CSV with header "context,count"; context is space-joined ids, "" for the empty context.
void write_context_counts_csv(std::ostream& out, const ContextTrie& trie);

}  // namespace ntpcap
