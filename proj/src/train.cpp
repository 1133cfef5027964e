#include "ntpcap/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "ntpcap/rng.hpp"

namespace ntpcap {

using Eigen::Index;

TrainSubset parse_train_subset(std::string_view name) {
  if (name == "all") {
    return TrainSubset::all;
  }
  if (name == "fnn-only" || name == "fnn_only" || name == "fnn") {
    return TrainSubset::fnn_only;
  }
  fail(Errc::invalid_argument, "unknown trainable subset '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  require(d >= 1 && m0 >= 1 && d0 >= 1 && dr >= 1, "model dimensions must be positive");
  if (m < 1) {
    fail(Errc::invalid_argument, "m must be at least 1");
  }
  require(stepsize > 0.0, "stepsize must be positive");
  require(iterations >= 1, "iterations must be at least 1");
  require(threshold > 0.0 && threshold <= 1.0, "threshold fraction must lie in (0, 1]");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "Adam moments must lie in [0, 1)");
  require(eps_adam > 0.0, "eps_adam must be positive");
  require(checkpoint_every >= 1, "checkpoint cadence must be positive");
  require(init_scale >= 0.0, "init scale must be nonnegative");
}

Dims TrainConfig::dims_for(const Corpus& corpus) const {
  Dims dims;
  dims.d = d;
  dims.m0 = m0;
  dims.d0 = d0;
  dims.dr = dr;
  dims.m = m;
  dims.omega = corpus.omega;
  dims.max_len = std::max<std::size_t>(corpus.max_len, 1);
  return dims;
}

ModelOptions TrainConfig::options() const {
  ModelOptions o;
  if (experiment_convention) {
    o = experiment_options();
  }
  o.sinusoidal_positions = o.sinusoidal_positions || sinusoidal_positions;
  o.skip_connection = skip_connection;
  return o;
}

namespace {

void fill_normal(Philox& rng, double* data, Index n, double scale) {
  for (Index i = 0; i < n; ++i) {
    data[i] = scale * rng.normal();
  }
}

template <class F>
void for_each_array(TransformerParams& p, TrainSubset subset, F&& f) {
  const bool all = subset == TrainSubset::all;
  if (all) {
    f("Z", p.Z.data(), p.Z.size());
    if (!p.options.sinusoidal_positions) {
      f("U", p.U.data(), p.U.size());
    }
    for (std::size_t r = 0; r < p.W1.size(); ++r) {
      const auto s = std::to_string(r);
      f("W1_" + s, p.W1[r].data(), p.W1[r].size());
      f("W2_" + s, p.W2[r].data(), p.W2[r].size());
      f("W3_" + s, p.W3[r].data(), p.W3[r].size());
    }
    for (std::size_t r = 0; r < p.bq.size(); ++r) {
      const auto s = std::to_string(r);
      f("bq_" + s, p.bq[r].data(), p.bq[r].size());
      f("bk_" + s, p.bk[r].data(), p.bk[r].size());
      f("bv_" + s, p.bv[r].data(), p.bv[r].size());
    }
    f("W0", p.W0.data(), p.W0.size());
    if (p.bo.size() > 0) {
      f("bo", p.bo.data(), p.bo.size());
    }
  }
  f("W", p.W.data(), p.W.size());
  f("b", p.b.data(), p.b.size());
  f("V", p.V.data(), p.V.size());
  if (p.c.size() > 0) {
    f("c", p.c.data(), p.c.size());
  }
  f("empty_logits", p.empty_logits.data(), p.empty_logits.size());
}

}  // namespace

TransformerParams init_params(const Dims& dims, const ModelOptions& options, std::uint64_t seed, double scale) {
  TransformerParams p = TransformerParams::zeros(dims, options);
  Philox rng(seed);
  fill_normal(rng, p.Z.data(), p.Z.size(), scale);
  if (!options.sinusoidal_positions) {
    fill_normal(rng, p.U.data(), p.U.size(), scale);
  }
  for (std::size_t r = 0; r < dims.m0; ++r) {
    fill_normal(rng, p.W1[r].data(), p.W1[r].size(), scale);
    fill_normal(rng, p.W2[r].data(), p.W2[r].size(), scale);
    fill_normal(rng, p.W3[r].data(), p.W3[r].size(), scale);
  }
  fill_normal(rng, p.W0.data(), p.W0.size(), scale);
  fill_normal(rng, p.W.data(), p.W.size(), scale);
  fill_normal(rng, p.V.data(), p.V.size(), scale);
  return p;
}

std::vector<ParamView> parameter_views(TransformerParams& p, TrainSubset subset) {
  std::vector<ParamView> out;
  for_each_array(p, subset, [&](const std::string& name, double* data, Index n) {
    out.push_back({name, std::span<double>(data, static_cast<std::size_t>(n))});
  });
  return out;
}

Eigen::VectorXd flatten(const TransformerParams& p, TrainSubset subset) {
  auto& mp = const_cast<TransformerParams&>(p);
  Index total = 0;
  for_each_array(mp, subset, [&](const std::string&, double*, Index n) { total += n; });
  Eigen::VectorXd flat(total);
  Index at = 0;
  for_each_array(mp, subset, [&](const std::string&, double* data, Index n) {
    flat.segment(at, n) = Eigen::Map<const Eigen::VectorXd>(data, n);
    at += n;
  });
  return flat;
}

void unflatten(const Eigen::VectorXd& flat, TransformerParams& p, TrainSubset subset) {
  Index at = 0;
  for_each_array(p, subset, [&](const std::string&, double* data, Index n) {
    require(at + n <= flat.size(), "flat parameter vector too short");
    Eigen::Map<Eigen::VectorXd>(data, n) = flat.segment(at, n);
    at += n;
  });
  require(at == flat.size(), "flat parameter vector too long");
}

namespace {

// Accumulates c(a) * logsumexp(l) - sum_g c(a, g) l_g and returns the logit
// gradient c(a) softmax(l) - c(a, .).
double logit_loss(const Eigen::VectorXd& logits, const ContextTrie& trie, const ContextTrie::Node& node,
                  Eigen::VectorXd* grad) {
  const double hi = logits.maxCoeff();
  const Eigen::VectorXd e = (logits.array() - hi).exp().matrix();
  const double z = e.sum();
  const double lse = hi + std::log(z);
  const auto total = static_cast<double>(node.as_context);
  double loss = 0.0;
  for (const auto& [tok, kid] : node.children) {
    const auto c = static_cast<double>(trie.nodes()[kid].count);
    loss += c * (lse - logits[tok - 1]);
  }
  if (grad != nullptr) {
    *grad = total * e / z;
    for (const auto& [tok, kid] : node.children) {
      (*grad)[tok - 1] -= static_cast<double>(trie.nodes()[kid].count);
    }
  }
  return loss;
}

struct HeadCache {
  Eigen::MatrixXd K;   // dr x tau
  Eigen::VectorXd q;   // dr
  Eigen::VectorXd a;   // tau
  Eigen::MatrixXd Vh;  // d0 x tau
};

}  // namespace

LossGrad loss_and_gradients(const TransformerParams& p, const ActivationSpec& psi, const ContextTrie& trie,
                            TrainSubset subset) {
  const auto& dm = p.dims;
  require(trie.omega() == dm.omega, "corpus vocabulary differs from the model");
  LossGrad out;
  out.grad = TransformerParams::zeros(dm, p.options);
  if (p.options.sinusoidal_positions) {
    out.grad.U.setZero();
  }
  auto& g = out.grad;
  const bool all = subset == TrainSubset::all;
  const bool soft_hidden = p.options.hidden == HiddenNonlinearity::softmax;
  const auto d0 = static_cast<Index>(dm.d0);
  std::vector<HeadCache> heads(dm.m0);
  Eigen::VectorXd gl;

  for (std::size_t idx : trie.unique_contexts()) {
    const auto& node = trie.nodes()[idx];
    const Context& ctx = node.context;
    if (ctx.empty()) {
      const Eigen::VectorXd logits = empty_context_logits<double>(p.empty_logits);
      out.loss += logit_loss(logits, trie, node, &gl);
      g.empty_logits += gl.head(gl.size() - 1);
      continue;
    }
    detail::check_context(dm.omega, dm.max_len, ctx);
    const auto tau = static_cast<Index>(ctx.size());
    Eigen::MatrixXd X(static_cast<Index>(dm.d), tau);
    for (Index t = 0; t < tau; ++t) {
      X.col(t) = p.Z.col(ctx[static_cast<std::size_t>(t)] - 1) + p.U.col(t);
    }
    const Eigen::VectorXd last = X.col(tau - 1);
    Eigen::VectorXd o(static_cast<Index>(dm.m0) * d0);
    for (std::size_t r = 0; r < dm.m0; ++r) {
      auto& hc = heads[r];
      hc.K.noalias() = p.W1[r].transpose() * X;
      hc.q.noalias() = p.W2[r].transpose() * last;
      hc.Vh.noalias() = p.W3[r].transpose() * X;
      if (p.options.attention_bias) {
        hc.K.colwise() += p.bk[r];
        hc.q += p.bq[r];
        hc.Vh.colwise() += p.bv[r];
      }
      hc.a = softmax<double>(hc.K.transpose() * hc.q);
      o.segment(static_cast<Index>(r) * d0, d0).noalias() = hc.Vh * hc.a;
    }
    Eigen::VectorXd h2 = p.W0.transpose() * o;
    if (p.options.attention_bias) {
      h2 += p.bo;
    }
    if (p.options.skip_connection) {
      h2 += last;
    }
    const Eigen::VectorXd pre = p.W.transpose() * h2 + p.b;
    Eigen::VectorXd h;
    if (soft_hidden) {
      h = softmax<double>(pre);
    } else {
      h = pre.unaryExpr([&](double v) { return psi(v); });
    }
    Eigen::VectorXd logits = p.V.transpose() * h;
    if (p.options.output_bias) {
      logits += p.c;
    }
    out.loss += logit_loss(logits, trie, node, &gl);

    // Reverse pass.
    g.V.noalias() += h * gl.transpose();
    if (p.options.output_bias) {
      g.c += gl;
    }
    const Eigen::VectorXd gh = p.V * gl;
    Eigen::VectorXd gpre;
    if (soft_hidden) {
      gpre = h.cwiseProduct(gh.array().matrix() - Eigen::VectorXd::Constant(h.size(), h.dot(gh)));
    } else {
      gpre = gh.cwiseProduct(pre.unaryExpr([&](double v) { return psi.derivative(v); }));
    }
    g.W.noalias() += h2 * gpre.transpose();
    g.b += gpre;
    if (!all) {
      continue;
    }
    const Eigen::VectorXd gh2 = p.W * gpre;
    if (p.options.attention_bias) {
      g.bo += gh2;
    }
    g.W0.noalias() += o * gh2.transpose();
    const Eigen::VectorXd go = p.W0 * gh2;
    Eigen::MatrixXd gX = Eigen::MatrixXd::Zero(X.rows(), tau);
    Eigen::VectorXd glast = Eigen::VectorXd::Zero(X.rows());
    if (p.options.skip_connection) {
      glast += gh2;
    }
    for (std::size_t r = 0; r < dm.m0; ++r) {
      const auto& hc = heads[r];
      const Eigen::VectorXd gor = go.segment(static_cast<Index>(r) * d0, d0);
      const Eigen::MatrixXd gVh = gor * hc.a.transpose();
      const Eigen::VectorXd ga = hc.Vh.transpose() * gor;
      g.W3[r].noalias() += X * gVh.transpose();
      gX.noalias() += p.W3[r] * gVh;
      const Eigen::VectorXd gs = hc.a.cwiseProduct(ga - Eigen::VectorXd::Constant(tau, hc.a.dot(ga)));
      const Eigen::MatrixXd gK = hc.q * gs.transpose();
      const Eigen::VectorXd gq = hc.K * gs;
      g.W1[r].noalias() += X * gK.transpose();
      gX.noalias() += p.W1[r] * gK;
      g.W2[r].noalias() += last * gq.transpose();
      glast.noalias() += p.W2[r] * gq;
      if (p.options.attention_bias) {
        g.bv[r] += gVh.rowwise().sum();
        g.bk[r] += gK.rowwise().sum();
        g.bq[r] += gq;
      }
    }
    gX.col(tau - 1) += glast;
    for (Index t = 0; t < tau; ++t) {
      g.Z.col(ctx[static_cast<std::size_t>(t)] - 1) += gX.col(t);
      if (!p.options.sinusoidal_positions) {
        g.U.col(t) += gX.col(t);
      }
    }
  }
  if (!std::isfinite(out.loss)) {
    fail(Errc::divergence, "divergence: non-finite loss");
  }
  return out;
}

double model_loss(const TransformerParams& p, const ActivationSpec& psi, const ContextTrie& trie) {
  double loss = 0.0;
  for (std::size_t idx : trie.unique_contexts()) {
    const auto& node = trie.nodes()[idx];
    loss += logit_loss(transformer_logits(p, psi, node.context), trie, node, nullptr);
  }
  return loss;
}

void adam_step(Eigen::VectorXd& theta, AdamState& state, const Eigen::VectorXd& grad, const TrainConfig& config) {
  require(theta.size() == grad.size() && state.m.size() == grad.size(), "Adam state shape mismatch");
  state.t += 1;
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  state.m = b1 * state.m + (1.0 - b1) * grad;
  state.v = b2 * state.v + (1.0 - b2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  theta.array() -= config.stepsize * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + config.eps_adam);
}

std::uint64_t trained_param_count(const Dims& dims, const ModelOptions& options) {
  Dims counted = dims;
  if (options.sinusoidal_positions) {
    counted.max_len = 0;
  }
  std::uint64_t k = param_count(counted);
  if (options.attention_bias) {
    k += dims.m0 * (2 * dims.dr + dims.d0) + dims.d;
  }
  if (options.output_bias) {
    k += dims.omega;
  }
  return k;
}

TrainTrace train_to_threshold(const Corpus& corpus, const TrainConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const ContextTrie trie(corpus);
  const ActivationSpec psi = ActivationSpec::from_name(config.activation);
  const Dims dims = config.dims_for(corpus);
  const ModelOptions options = config.options();

  TrainTrace trace;
  trace.entropy_bound = entropy_lower_bound(trie);
  trace.n_contexts = trie.num_unique_contexts();
  trace.param_count = trained_param_count(dims, options);
  trace.params = init_params(dims, options, config.seed, config.init_scale);
  const double target = config.threshold * trace.entropy_bound;

  Eigen::VectorXd theta = flatten(trace.params, config.subset);
  AdamState state(theta.size());
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  for (std::size_t it = 0;; ++it) {
    LossGrad lg;
    try {
      lg = loss_and_gradients(trace.params, psi, trie, config.subset);
    } catch (const Error& e) {
      trace.wall_seconds = elapsed();
      throw DivergenceError("divergence at iteration " + std::to_string(it), trace);
    }
    const double gap = lg.loss - trace.entropy_bound;
    trace.final_loss = lg.loss;
    trace.final_gap = gap;
    trace.iterations_run = it;
    const bool done = it == config.iterations || (config.early_stop && gap < target);
    if (it % config.checkpoint_every == 0 || done) {
      trace.checkpoints.push_back({it, lg.loss, gap});
    }
    if (done) {
      break;
    }
    const Eigen::VectorXd grad = flatten(lg.grad, config.subset);
    adam_step(theta, state, grad, config);
    unflatten(theta, trace.params, config.subset);
  }
  trace.passed = trace.final_gap < target;
  trace.wall_seconds = elapsed();
  return trace;
}

std::optional<std::uint64_t> SweepResult::minimal_passing_params(const std::string& corpus_id) const {
  std::optional<std::uint64_t> best;
  for (const auto& r : rows) {
    if (r.corpus_id == corpus_id && r.passed && (!best || r.params < *best)) {
      best = r.params;
    }
  }
  return best;
}

std::optional<std::size_t> SweepResult::minimal_passing_m(const std::string& corpus_id) const {
  std::optional<std::size_t> best;
  for (const auto& r : rows) {
    if (r.corpus_id == corpus_id && r.passed && (!best || r.m < *best)) {
      best = r.m;
    }
  }
  return best;
}

SweepResult sweep(const std::vector<SweepCorpus>& corpora, const std::vector<std::size_t>& m_grid,
                  const TrainConfig& config, const SweepOptions& options) {
  require(!corpora.empty() && !m_grid.empty(), "sweep grids must be nonempty");
  std::vector<std::size_t> grid = m_grid;
  std::sort(grid.begin(), grid.end());

  auto run_cell = [&](const SweepCorpus& sc, std::size_t m) {
    TrainConfig cfg = config;
    cfg.m = m;
    SweepRow row;
    row.corpus_id = sc.id;
    row.omega = sc.corpus.omega;
    row.m = m;
    row.seed = cfg.seed;
    try {
      const TrainTrace t = train_to_threshold(sc.corpus, cfg);
      row.n_contexts = t.n_contexts;
      row.params = t.param_count;
      row.final_loss = t.final_loss;
      row.entropy_bound = t.entropy_bound;
      row.gap = t.final_gap;
      row.passed = t.passed;
      row.iterations = t.iterations_run;
    } catch (const DivergenceError& e) {
      const auto& t = e.trace();
      row.n_contexts = t.n_contexts;
      row.params = t.param_count;
      row.final_loss = NAN;
      row.entropy_bound = t.entropy_bound;
      row.gap = NAN;
      row.iterations = t.iterations_run;
    }
    return row;
  };

  // One task per corpus keeps the stop-at-first-pass scan sequential in m;
  // rows are emitted in (corpus, m) order regardless of scheduling.
  std::vector<std::vector<SweepRow>> per_corpus(corpora.size());
  std::mutex mu;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next == corpora.size()) {
          return;
        }
        k = next++;
      }
      for (std::size_t m : grid) {
        per_corpus[k].push_back(run_cell(corpora[k], m));
        if (options.stop_at_first_pass && per_corpus[k].back().passed) {
          break;
        }
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, corpora.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  SweepResult result;
  for (auto& rows : per_corpus) {
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "corpus_id,n_contexts,omega,m,params,final_loss,entropy_bound,gap,passed,seed,iterations\n";
  out.precision(17);
  for (const auto& r : result.rows) {
    out << r.corpus_id << ',' << r.n_contexts << ',' << r.omega << ',' << r.m << ',' << r.params << ',' << r.final_loss
        << ',' << r.entropy_bound << ',' << r.gap << ',' << (r.passed ? 1 : 0) << ',' << r.seed << ',' << r.iterations
        << '\n';
  }
}

void write_trace_csv(std::ostream& out, const TrainTrace& trace) {
  out << "iteration,loss,gap\n";
  out.precision(17);
  for (const auto& c : trace.checkpoints) {
    out << c.iteration << ',' << c.loss << ',' << c.gap << '\n';
  }
}

}  // namespace ntpcap
