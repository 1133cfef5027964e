#include "ntpcap/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ntpcap/error.hpp"

namespace ntpcap {

std::string context_key(ContextView ctx) {
  std::string key;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    if (i > 0) {
      key += ' ';
    }
    key += std::to_string(ctx[i]);
  }
  return key;
}

Context parse_context_key(std::string_view key) {
  Context ctx;
  std::istringstream in{std::string(key)};
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(tok, &used);
      if (used != tok.size() || v == 0) {
        throw std::invalid_argument(tok);
      }
      ctx.push_back(static_cast<TokenId>(v));
    } catch (const std::exception&) {
      fail(Errc::parse, "bad token id '" + tok + "' in context");
    }
  }
  return ctx;
}

TokenizerScheme parse_tokenizer_scheme(std::string_view name) {
  if (name == "whitespace") {
    return TokenizerScheme::whitespace;
  }
  if (name == "word-punct" || name == "wordpunct" || name == "word_punct") {
    return TokenizerScheme::word_punct;
  }
  fail(Errc::invalid_argument, "unknown tokenizer scheme '" + std::string(name) + "'");
}

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_word(unsigned char c) { return std::isalnum(c) != 0 || c == '_' || c >= 0x80; }

char lower(unsigned char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c); }

}  // namespace

std::vector<std::string> tokenize(std::string_view text, TokenizerScheme scheme) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    std::string tok;
    if (scheme == TokenizerScheme::whitespace) {
      while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) {
        tok += text[i++];
      }
    } else {
      const bool word = is_word(c);
      while (i < text.size()) {
        const auto d = static_cast<unsigned char>(text[i]);
        if (is_space(d) || is_word(d) != word) {
          break;
        }
        tok += lower(d);
        ++i;
      }
    }
    out.push_back(std::move(tok));
  }
  return out;
}

TokenId Vocabulary::add(const std::string& token) {
  if (auto it = to_id_.find(token); it != to_id_.end()) {
    return it->second;
  }
  to_token_.push_back(token);
  const auto id = static_cast<TokenId>(to_token_.size());
  to_id_.emplace(token, id);
  return id;
}

TokenId Vocabulary::id(const std::string& token) const {
  auto it = to_id_.find(token);
  if (it == to_id_.end()) {
    fail(Errc::invalid_argument, "token not in vocabulary: '" + token + "'");
  }
  return it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id == 0 || id > to_token_.size()) {
    fail(Errc::token_out_of_range, "token id " + std::to_string(id) + " out of range");
  }
  return to_token_[id - 1];
}

std::size_t Corpus::total_tokens() const {
  std::size_t total = 0;
  for (const auto& d : docs) {
    total += d.size();
  }
  return total;
}

void Corpus::validate() const {
  if (docs.empty()) {
    fail(Errc::empty_corpus, "empty corpus");
  }
  for (const auto& d : docs) {
    if (d.empty()) {
      fail(Errc::invalid_argument, "corpus contains an empty document");
    }
    if (max_len > 0 && d.size() > max_len) {
      fail(Errc::invalid_argument, "document longer than max_len");
    }
    for (TokenId t : d) {
      if (t == 0 || t > omega) {
        fail(Errc::token_out_of_range, "token id " + std::to_string(t) + " outside [1, " + std::to_string(omega) + "]");
      }
    }
  }
}

BuiltCorpus build_corpus(const std::vector<std::vector<std::string>>& token_docs, std::size_t truncate_len) {
  require(truncate_len > 0, "truncate_len must be positive");
  BuiltCorpus out;
  for (const auto& doc : token_docs) {
    const std::size_t len = std::min(doc.size(), truncate_len);
    if (len == 0) {
      continue;
    }
    Context ids;
    ids.reserve(len);
    for (std::size_t t = 0; t < len; ++t) {
      ids.push_back(out.vocab.add(doc[t]));
    }
    out.corpus.max_len = std::max(out.corpus.max_len, len);
    out.corpus.docs.push_back(std::move(ids));
  }
  if (out.corpus.docs.empty()) {
    fail(Errc::empty_corpus, "empty corpus");
  }
  out.corpus.omega = out.vocab.size();
  return out;
}

ContextTrie::ContextTrie(const Corpus& corpus) : omega_(corpus.omega) {
  corpus.validate();
  nodes_.push_back(Node{});
  for (const auto& doc : corpus.docs) {
    std::size_t cur = 0;
    nodes_[cur].count += 1;
    for (TokenId tok : doc) {
      std::size_t next = child(cur, tok);
      if (next == npos) {
        next = nodes_.size();
        Node node;
        node.context = nodes_[cur].context;
        node.context.push_back(tok);
        nodes_.push_back(std::move(node));
        auto& kids = nodes_[cur].children;
        auto pos = std::lower_bound(kids.begin(), kids.end(), tok,
                                    [](const auto& kv, TokenId t) { return kv.first < t; });
        kids.insert(pos, {tok, next});
      }
      cur = next;
      nodes_[cur].count += 1;
    }
  }
  for (auto& node : nodes_) {
    for (const auto& kid : node.children) {
      node.as_context += nodes_[kid.second].count;
    }
  }
  // Depth-first, token-ordered enumeration keeps the order independent of
  // document order.
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const std::size_t idx = stack.back();
    stack.pop_back();
    const Node& node = nodes_[idx];
    if (!node.children.empty()) {
      unique_.push_back(idx);
    }
    for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
      stack.push_back(it->second);
    }
  }
}

std::size_t ContextTrie::child(std::size_t node, TokenId token) const {
  const auto& kids = nodes_[node].children;
  auto pos = std::lower_bound(kids.begin(), kids.end(), token, [](const auto& kv, TokenId t) { return kv.first < t; });
  if (pos != kids.end() && pos->first == token) {
    return pos->second;
  }
  return npos;
}

std::size_t ContextTrie::find(ContextView ctx) const {
  std::size_t cur = 0;
  for (TokenId tok : ctx) {
    cur = child(cur, tok);
    if (cur == npos) {
      return npos;
    }
  }
  return cur;
}

std::uint64_t ContextTrie::count(ContextView ctx) const {
  const std::size_t idx = find(ctx);
  return idx == npos ? 0 : nodes_[idx].count;
}

std::uint64_t ContextTrie::context_count(ContextView ctx) const {
  const std::size_t idx = find(ctx);
  return idx == npos ? 0 : nodes_[idx].as_context;
}

std::vector<std::uint64_t> ContextTrie::child_counts(const Node& node) const {
  std::vector<std::uint64_t> counts(omega_, 0);
  for (const auto& [tok, idx] : node.children) {
    counts[tok - 1] = nodes_[idx].count;
  }
  return counts;
}

std::vector<std::uint64_t> ContextTrie::child_counts(ContextView ctx) const {
  const std::size_t idx = find(ctx);
  if (idx == npos) {
    return std::vector<std::uint64_t>(omega_, 0);
  }
  return child_counts(nodes_[idx]);
}

std::vector<double> empirical_next_token(const ContextTrie& trie, ContextView ctx) {
  const std::size_t idx = trie.find(ctx);
  if (idx == ContextTrie::npos) {
    fail(Errc::context_unseen, "context unseen");
  }
  const auto& node = trie.nodes()[idx];
  if (node.children.empty()) {
    fail(Errc::no_continuation, "context has no observed continuation");
  }
  const auto counts = trie.child_counts(node);
  std::vector<double> p(counts.size());
  const auto total = static_cast<double>(node.as_context);
  for (std::size_t g = 0; g < counts.size(); ++g) {
    p[g] = static_cast<double>(counts[g]) / total;
  }
  return p;
}

double cross_entropy_loss(const Corpus& corpus, const NextTokenModel& model) {
  corpus.validate();
  double loss = 0.0;
  for (const auto& doc : corpus.docs) {
    for (std::size_t t = 0; t < doc.size(); ++t) {
      const ContextView prefix(doc.data(), t);
      const auto q = model(prefix);
      require(q.size() == corpus.omega, "model output has wrong length");
      const double p = q[doc[t] - 1];
      if (!(p > 0.0)) {
        fail(Errc::infinite_loss, "infinite loss");
      }
      loss -= std::log(p);
    }
  }
  return loss;
}

double entropy_lower_bound(const ContextTrie& trie) {
  // c(a) H(c(a,.)/c(a)) = c(a) ln c(a) - sum_g c(a,g) ln c(a,g), summed over
  // unique contexts; only contexts with a proper continuation contribute.
  double bound = 0.0;
  for (std::size_t idx : trie.unique_contexts()) {
    const auto& node = trie.nodes()[idx];
    double h = 0.0;
    const auto c = static_cast<double>(node.as_context);
    for (const auto& [tok, kid] : node.children) {
      const auto cg = static_cast<double>(trie.nodes()[kid].count);
      h -= cg / c * std::log(cg / c);
    }
    bound += c * h;
  }
  return bound;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> read_lines_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(Errc::io, "cannot open '" + path + "'");
  }
  return read_lines(in);
}

void write_corpus_ids(std::ostream& out, const Corpus& corpus) {
  for (const auto& doc : corpus.docs) {
    out << context_key(doc) << '\n';
  }
}

std::string vocabulary_json(const Vocabulary& vocab) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    j[vocab.tokens()[i]] = i + 1;
  }
  return j.dump(2);
}

void write_context_counts_csv(std::ostream& out, const ContextTrie& trie) {
  out << "context,count\n";
  for (std::size_t idx : trie.unique_contexts()) {
    const auto& node = trie.nodes()[idx];
    out << context_key(node.context) << ',' << node.count << '\n';
  }
}

}  // namespace ntpcap
