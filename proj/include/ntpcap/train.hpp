#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ntpcap/activation.hpp"
#include "ntpcap/corpus.hpp"
#include "ntpcap/error.hpp"
#include "ntpcap/model.hpp"

namespace ntpcap {

enum class TrainSubset { all, fnn_only };

TrainSubset parse_train_subset(std::string_view name);

struct TrainConfig {
  std::size_t d = 16;
  std::size_t m0 = 1;
  std::size_t d0 = 16;
  std::size_t dr = 16;
  std::size_t m = 16;
  std::string activation = "gelu";
  double stepsize = 1e-3;
  std::size_t iterations = 20000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  std::uint64_t seed = 0;
  TrainSubset subset = TrainSubset::all;
  double threshold = 0.01;  // stop once gap < threshold * entropy bound
  bool early_stop = true;
  std::size_t checkpoint_every = 100;
  double init_scale = 0.02;
  /// Attention and output biases plus fixed sinusoidal positions, as in the
  /// reference experiment model.
  bool experiment_convention = false;
  bool sinusoidal_positions = false;
  bool skip_connection = false;

  void validate() const;
  Dims dims_for(const Corpus& corpus) const;
  ModelOptions options() const;
};

/// Gaussian(0, scale) for weight matrices (and U unless sinusoidal); zeros for
/// b, the empty-context logits and every extra bias.
TransformerParams init_params(const Dims& dims, const ModelOptions& options, std::uint64_t seed, double scale);

/// Named views of the parameter arrays in a fixed order. fnn_only keeps
/// W, b, V, the empty-context logits and the output bias.
struct ParamView {
  std::string name;
  std::span<double> data;
};
std::vector<ParamView> parameter_views(TransformerParams& p, TrainSubset subset);

Eigen::VectorXd flatten(const TransformerParams& p, TrainSubset subset);
void unflatten(const Eigen::VectorXd& flat, TransformerParams& p, TrainSubset subset);

struct LossGrad {
  double loss = 0.0;
  TransformerParams grad;  // same shapes as the parameters; zero outside the subset
};

/// Cross-entropy of the corpus summarised by `trie`, and its gradient.
LossGrad loss_and_gradients(const TransformerParams& p, const ActivationSpec& psi, const ContextTrie& trie,
                            TrainSubset subset = TrainSubset::all);
double model_loss(const TransformerParams& p, const ActivationSpec& psi, const ContextTrie& trie);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::size_t t = 0;

  explicit AdamState(Eigen::Index n = 0) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

/// Bias-corrected Adam update of `theta` in place.
void adam_step(Eigen::VectorXd& theta, AdamState& state, const Eigen::VectorXd& grad, const TrainConfig& config);

struct Checkpoint {
  std::size_t iteration = 0;
  double loss = 0.0;
  double gap = 0.0;
};

struct TrainTrace {
  std::vector<Checkpoint> checkpoints;
  TransformerParams params;
  double entropy_bound = 0.0;
  double final_loss = 0.0;
  double final_gap = 0.0;
  bool passed = false;
  std::size_t iterations_run = 0;
  std::size_t n_contexts = 0;
  std::uint64_t param_count = 0;
  double wall_seconds = 0.0;
};

/// Thrown when the loss stops being finite; carries the trace up to the last
/// finite checkpoint.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, TrainTrace trace) : Error(Errc::divergence, what), trace_(std::move(trace)) {}
  const TrainTrace& trace() const { return trace_; }

 private:
  TrainTrace trace_;
};

std::uint64_t trained_param_count(const Dims& dims, const ModelOptions& options);

/// Full-batch Adam on the corpus cross-entropy. Stops when the gap to the
/// entropy bound falls below threshold * bound (if early_stop) or after the
/// iteration budget.
TrainTrace train_to_threshold(const Corpus& corpus, const TrainConfig& config);

struct SweepCorpus {
  std::string id;
  Corpus corpus;
};

struct SweepRow {
  std::string corpus_id;
  std::size_t n_contexts = 0;
  std::size_t omega = 0;
  std::size_t m = 0;
  std::uint64_t params = 0;
  double final_loss = 0.0;
  double entropy_bound = 0.0;
  double gap = 0.0;
  bool passed = false;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
};

struct SweepOptions {
  /// Train m in increasing order and skip larger m once a corpus passes.
  bool stop_at_first_pass = false;
  std::size_t jobs = 1;
};

struct SweepResult {
  std::vector<SweepRow> rows;

  /// Smallest passing parameter count for a corpus, if any cell passed.
  std::optional<std::uint64_t> minimal_passing_params(const std::string& corpus_id) const;
  std::optional<std::size_t> minimal_passing_m(const std::string& corpus_id) const;
};

SweepResult sweep(const std::vector<SweepCorpus>& corpora, const std::vector<std::size_t>& m_grid,
                  const TrainConfig& config, const SweepOptions& options = {});

void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_trace_csv(std::ostream& out, const TrainTrace& trace);

}  // namespace ntpcap
