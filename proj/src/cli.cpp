#include "ntpcap/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ntpcap/config.hpp"
#include "ntpcap/corpus.hpp"
#include "ntpcap/error.hpp"
#include "ntpcap/interpolate.hpp"
#include "ntpcap/langspace.hpp"
#include "ntpcap/model.hpp"
#include "ntpcap/ranklab.hpp"
#include "ntpcap/rng.hpp"
#include "ntpcap/train.hpp"

namespace ntpcap {

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(Errc::io, "cannot open '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    fail(Errc::io, "cannot write '" + path + "'");
  }
  return out;
}

struct CorpusArgs {
  std::string path;
  std::string tokenizer = "word-punct";
  std::size_t truncate = 10;
  std::size_t limit = 0;
  bool ids = false;
};

void add_corpus_options(CLI::App* sub, CorpusArgs& c, bool required) {
  auto* opt = sub->add_option("--corpus", c.path, "Corpus file, one document per line");
  if (required) {
    opt->required();
  }
  sub->add_option("--tokenizer", c.tokenizer, "whitespace or word-punct");
  sub->add_option("--truncate", c.truncate, "Truncate documents to this many tokens");
  sub->add_option("--limit", c.limit, "Use only the first N documents (0: all)");
  sub->add_flag("--ids", c.ids, "Documents are space-separated token ids");
}

BuiltCorpus load_corpus(const CorpusArgs& c) {
  auto lines = read_lines_file(c.path);
  if (c.limit > 0 && lines.size() > c.limit) {
    lines.resize(c.limit);
  }
  if (c.ids) {
    BuiltCorpus out;
    for (const auto& line : lines) {
      Context doc = parse_context_key(line);
      if (doc.empty()) {
        continue;
      }
      if (doc.size() > c.truncate) {
        doc.resize(c.truncate);
      }
      for (TokenId t : doc) {
        out.corpus.omega = std::max<std::size_t>(out.corpus.omega, t);
      }
      out.corpus.max_len = std::max(out.corpus.max_len, doc.size());
      out.corpus.docs.push_back(std::move(doc));
    }
    out.corpus.validate();
    return out;
  }
  const auto scheme = parse_tokenizer_scheme(c.tokenizer);
  std::vector<std::vector<std::string>> docs;
  docs.reserve(lines.size());
  for (const auto& line : lines) {
    docs.push_back(tokenize(line, scheme));
  }
  return build_corpus(docs, c.truncate);
}

struct Common {
  std::string out;
  std::string config;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

void add_common_options(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out, "Output path");
  sub->add_option("--config", c.config, "key=value file with option defaults");
  sub->add_option("--seed", c.seed, "Random seed")->envname("NTPCAP_SEED");
  sub->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

ojson resolved_options(const CLI::App* sub) {
  ojson j = ojson::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") {
      continue;
    }
    const std::string name = opt->get_lnames().front();
    if (opt->count() > 0) {
      const auto& res = opt->results();
      std::string joined;
      for (std::size_t i = 0; i < res.size(); ++i) {
        joined += (i ? "," : "") + res[i];
      }
      if (opt->get_expected_max() == 0 && joined.empty()) {
        joined = "true";
      }
      j[name] = joined;
    } else if (opt->get_expected_max() == 0) {
      j[name] = "false";
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

void write_sidecar(const std::string& path, const std::string& subcommand, const CLI::App* sub, std::uint64_t seed,
                   const ojson& extra) {
  ojson j;
  j["tool"] = "ntpcap";
  j["version"] = NTPCAP_VERSION;
  j["subcommand"] = subcommand;
  j["seed"] = seed;
  j["rng"] = "philox4x32-10";
  j["config"] = resolved_options(sub);
  if (!extra.is_null()) {
    j["result"] = extra;
  }
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

std::string sidecar_path(const Common& c, const std::string& subcommand) {
  return (c.out.empty() ? subcommand : c.out) + ".meta.json";
}

// Expands --config into --key=value tokens placed right after the subcommand
// name. Keys also given on the command line are skipped so the command line
// wins.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& app) {
  if (args.empty()) {
    return args;
  }
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].starts_with("--config=")) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) {
    return args;
  }
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[0]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  auto explicit_key = [&](const std::string& key) {
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == "--" + key || args[i].starts_with("--" + key + "=")) {
        return true;
      }
    }
    return false;
  };
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_key_values_file(config_path)) {
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config" || key == "help") {
      throw CLI::ExtrasError("unknown config key '" + key + "'", CLI::ExitCodes::ExtrasError);
    }
    if (explicit_key(key)) {
      continue;
    }
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1" || value == "yes" || value == "on") {
        injected.push_back("--" + key);
      } else if (!(value == "false" || value == "0" || value == "no" || value == "off")) {
        throw CLI::ConversionError("config key '" + key + "' expects a boolean", CLI::ExitCodes::ConversionError);
      }
      continue;
    }
    injected.push_back("--" + key + "=" + value);
  }
  std::vector<std::string> out{args[0]};
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(Errc::invalid_argument, "bad number '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Next-token prediction capacity laboratory", "ntpcap"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(NTPCAP_VERSION));
  app.option_defaults()->always_capture_default();

  Common common;
  CorpusArgs corpus_args;
  std::function<void(CLI::App*)> action;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Tokenize a corpus and export ids, vocabulary and context counts");
  add_corpus_options(ingest, corpus_args, true);
  add_common_options(ingest, common);
  ingest->callback([&] {
    action = [&](CLI::App* sub) {
      const BuiltCorpus bc = load_corpus(corpus_args);
      const ContextTrie trie(bc.corpus);
      std::string prefix = common.out.empty() ? "corpus" : common.out;
      if (prefix.back() == '/' || std::filesystem::is_directory(prefix)) {
        std::filesystem::create_directories(prefix);
        prefix = (std::filesystem::path(prefix) / "corpus").string();
      }
      {
        auto f = open_out(prefix + ".ids.txt");
        write_corpus_ids(f, bc.corpus);
      }
      if (!corpus_args.ids) {
        auto f = open_out(prefix + ".vocab.json");
        f << vocabulary_json(bc.vocab) << '\n';
      }
      {
        auto f = open_out(prefix + ".contexts.csv");
        write_context_counts_csv(f, trie);
      }
      out << "documents " << bc.corpus.docs.size() << "\nomega " << bc.corpus.omega << "\nunique_contexts "
          << trie.num_unique_contexts() << '\n';
      write_sidecar(prefix + ".meta.json", "ingest", sub, common.seed,
                    ojson{{"documents", bc.corpus.docs.size()},
                          {"omega", bc.corpus.omega},
                          {"unique_contexts", trie.num_unique_contexts()}});
    };
  });

  // stats / entropy
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  add_corpus_options(stats, corpus_args, true);
  add_common_options(stats, common);
  stats->callback([&] {
    action = [&](CLI::App* sub) {
      const BuiltCorpus bc = load_corpus(corpus_args);
      const ContextTrie trie(bc.corpus);
      const double bound = entropy_lower_bound(trie);
      out << "documents " << bc.corpus.docs.size() << "\nomega " << bc.corpus.omega << "\nmax_len "
          << bc.corpus.max_len << "\ntokens " << bc.corpus.total_tokens() << "\nunique_contexts "
          << trie.num_unique_contexts() << "\nentropy_bound " << fmt(bound) << '\n';
      if (!common.out.empty()) {
        auto f = open_out(common.out);
        write_context_counts_csv(f, trie);
      }
      write_sidecar(sidecar_path(common, "stats"), "stats", sub, common.seed,
                    ojson{{"documents", bc.corpus.docs.size()},
                          {"omega", bc.corpus.omega},
                          {"unique_contexts", trie.num_unique_contexts()},
                          {"entropy_bound", bound}});
    };
  });

  auto* entropy = app.add_subcommand("entropy", "Entropy lower bound of a corpus");
  add_corpus_options(entropy, corpus_args, true);
  add_common_options(entropy, common);
  entropy->callback([&] {
    action = [&](CLI::App* sub) {
      const BuiltCorpus bc = load_corpus(corpus_args);
      const ContextTrie trie(bc.corpus);
      const double bound = entropy_lower_bound(trie);
      out << "entropy_bound " << fmt(bound) << "\nunique_contexts " << trie.num_unique_contexts() << '\n';
      if (!common.out.empty()) {
        auto f = open_out(common.out);
        f << std::setprecision(17) << "unique_contexts,entropy_bound\n"
          << trie.num_unique_contexts() << ',' << bound << '\n';
      }
      write_sidecar(sidecar_path(common, "entropy"), "entropy", sub, common.seed,
                    ojson{{"unique_contexts", trie.num_unique_contexts()}, {"entropy_bound", bound}});
    };
  });

  // interpolate
  std::string targets_path;
  std::string activation = "tanh";
  std::string variant = "self-attention";
  double smoothing = 0.0;
  InterpolationOptions iopts;
  bool with_params = false;
  auto* interp = app.add_subcommand("interpolate", "Construct an interpolating model for given targets");
  interp->add_option("--targets", targets_path, "JSON list of {context, target}");
  add_corpus_options(interp, corpus_args, false);
  interp->add_option("--smoothing", smoothing, "Mix empirical targets with uniform (corpus mode)");
  interp->add_option("--activation", activation, "tanh, logistic, arctan, gelu or poly:c0,c1,...");
  interp->add_option("--variant", variant, "self-attention or token-average");
  interp->add_option("--m", iopts.m, "Neurons (0: number of contexts)");
  interp->add_option("--max-retries", iopts.max_retries, "Resampling budget");
  interp->add_option("--tolerance", iopts.tolerance, "Accepted max simplex error");
  interp->add_option("--max-digits", iopts.max_digits, "Highest precision rung in decimal digits (0: double only)");
  interp->add_option("--margin", iopts.margin, "Fraction of the radius of convergence used");
  interp->add_option("--lift-d", iopts.lift_d, "Embedding size of the lifted model");
  interp->add_option("--lift-m0", iopts.lift_m0, "Heads of the lifted model");
  interp->add_option("--lift-d0", iopts.lift_d0, "Value size of the lifted model");
  interp->add_option("--lift-dr", iopts.lift_dr, "Key/query size of the lifted model");
  interp->add_flag("--lift", iopts.lift, "Include the lifted full-model parameters");
  interp->add_flag("--params", with_params, "Include parameters in the report");
  add_common_options(interp, common);
  interp->callback([&] {
    action = [&](CLI::App* sub) {
      TargetSet ts;
      if (!targets_path.empty()) {
        ts = targets_from_json(read_file(targets_path));
      } else if (!corpus_args.path.empty()) {
        ts = targets_from_trie(ContextTrie(load_corpus(corpus_args).corpus), smoothing);
      } else {
        throw CLI::RequiredError("--targets or --corpus");
      }
      iopts.variant = parse_variant(variant);
      iopts.seed = common.seed;
      const auto r = construct_interpolant(ts, ActivationSpec::from_name(activation), iopts);
      out << "n " << r.n << "\nm " << r.m << "\nepsilon " << fmt(r.epsilon) << "\ncondition " << fmt(r.condition)
          << "\nmax_error " << fmt(r.max_error) << "\ndouble_max_error " << fmt(r.double_max_error) << "\nretries "
          << r.retries << "\nprecision_bits " << r.precision_bits << '\n';
      if (!common.out.empty()) {
        auto f = open_out(common.out);
        f << report_to_json(r, with_params || iopts.lift) << '\n';
      }
      write_sidecar(sidecar_path(common, "interpolate"), "interpolate", sub, common.seed,
                    ojson::parse(report_to_json(r, false)));
    };
  });

  // ranklab
  std::size_t rank_m = 0;
  std::size_t rank_n = 0;
  std::size_t max_m = 6;
  std::size_t max_n = 6;
  std::string b_list;
  RankExperimentOptions ropts;
  auto* ranklab = app.add_subcommand("ranklab", "Rank of psi(a b^T) against the predicted rank");
  ranklab->add_option("--activation", activation, "Activation");
  ranklab->add_option("--m", rank_m, "Rows (0: sweep 1..max-m)");
  ranklab->add_option("--n", rank_n, "Columns (0: sweep 1..max-n)");
  ranklab->add_option("--max-m", max_m, "Largest m in a sweep");
  ranklab->add_option("--max-n", max_n, "Largest n in a sweep");
  ranklab->add_option("--b", b_list, "Comma-separated b (default (1..n)/n)");
  ranklab->add_option("--trials", ropts.trials, "Trials per cell");
  ranklab->add_option("--digits", ropts.digits, "Working precision in decimal digits (0: double)");
  ranklab->add_option("--tol", ropts.tol, "Relative singular value threshold at double precision");
  ranklab->add_option("--a-range", ropts.a_range, "Half-width of the distribution of a (0: auto)");
  add_common_options(ranklab, common);
  ranklab->callback([&] {
    action = [&](CLI::App* sub) {
      const ActivationSpec psi = ActivationSpec::from_name(activation);
      ropts.seed = common.seed;
      std::vector<std::size_t> ms;
      std::vector<std::size_t> ns;
      for (std::size_t i = 1; i <= max_m; ++i) {
        ms.push_back(i);
      }
      for (std::size_t i = 1; i <= max_n; ++i) {
        ns.push_back(i);
      }
      if (rank_m > 0) {
        ms = {rank_m};
      }
      if (rank_n > 0) {
        ns = {rank_n};
      }
      const auto b_given = parse_double_list(b_list);
      std::ostringstream csv;
      write_rank_csv_header(csv);
      ojson cells = ojson::array();
      for (std::size_t m : ms) {
        for (std::size_t n : ns) {
          VectorXd b = default_b(n);
          if (!b_given.empty()) {
            require(b_given.size() == n, "--b must have n entries");
            b = Eigen::Map<const VectorXd>(b_given.data(), static_cast<Eigen::Index>(n));
          }
          const auto rep = rank_experiment(psi, m, n, b, ropts);
          write_rank_csv(csv, rep);
          out << "m " << m << " n " << n << " predicted " << rep.predicted << " agreement "
              << fmt(rep.agreement_rate()) << '\n';
          cells.push_back({{"m", m}, {"n", n}, {"predicted", rep.predicted}, {"agreement", rep.agreement_rate()}});
        }
      }
      if (!common.out.empty()) {
        auto f = open_out(common.out);
        f << csv.str();
      }
      write_sidecar(sidecar_path(common, "ranklab"), "ranklab", sub, common.seed, cells);
    };
  });

  // injectivity
  std::size_t inj_omega = 3;
  std::size_t inj_len = 4;
  std::size_t inj_trials = 1;
  double inj_tol = 1e-9;
  auto* injectivity = app.add_subcommand("injectivity", "Exhaustive injectivity check of the scalar features");
  injectivity->add_option("--variant", variant, "self-attention or token-average");
  injectivity->add_option("--omega", inj_omega, "Vocabulary size");
  injectivity->add_option("--max-len", inj_len, "Longest context length T");
  injectivity->add_option("--trials", inj_trials, "Number of Gaussian (z, u) draws");
  injectivity->add_option("--tol", inj_tol, "Distinctness tolerance");
  add_common_options(injectivity, common);
  injectivity->callback([&] {
    action = [&](CLI::App* sub) {
      const Variant v = parse_variant(variant);
      std::ostringstream csv;
      csv << std::setprecision(17) << "variant,omega,T,contexts,min_abs,min_gap,zeros,collisions,pass,seed\n";
      std::size_t passed = 0;
      for (std::size_t t = 0; t < inj_trials; ++t) {
        const std::uint64_t seed = common.seed + t;
        Philox rng(seed);
        VectorXd z(static_cast<Eigen::Index>(inj_omega));
        VectorXd u(static_cast<Eigen::Index>(inj_len));
        for (auto& x : z) {
          x = rng.normal();
        }
        for (auto& x : u) {
          x = rng.normal();
        }
        const auto r = injectivity_test(v, inj_omega, inj_len, z, u, inj_tol);
        passed += r.pass ? 1 : 0;
        csv << variant_name(v) << ',' << r.omega << ',' << r.max_len << ',' << r.num_contexts << ',' << r.min_abs << ','
            << r.min_gap << ',' << r.zeros << ',' << r.collisions << ',' << (r.pass ? 1 : 0) << ',' << seed << '\n';
        if (inj_trials == 1) {
          out << "contexts " << r.num_contexts << "\nmin_abs " << fmt(r.min_abs) << "\nmin_gap " << fmt(r.min_gap)
              << "\npass " << (r.pass ? "true" : "false") << '\n';
        }
      }
      out << "passed " << passed << " of " << inj_trials << '\n';
      if (!common.out.empty()) {
        auto f = open_out(common.out);
        f << csv.str();
      }
      write_sidecar(sidecar_path(common, "injectivity"), "injectivity", sub, common.seed,
                    ojson{{"passed", passed}, {"trials", inj_trials}});
    };
  });

  // train / sweep
  TrainConfig tcfg;
  bool fnn_only = false;
  bool no_early_stop = false;
  std::string params_out;
  auto add_train_options = [&](CLI::App* sub) {
    sub->add_option("--d", tcfg.d, "Embedding size");
    sub->add_option("--m0", tcfg.m0, "Heads");
    sub->add_option("--d0", tcfg.d0, "Value size per head");
    sub->add_option("--dr", tcfg.dr, "Key/query size per head");
    sub->add_option("--activation", tcfg.activation, "Activation");
    sub->add_option("--stepsize", tcfg.stepsize, "Adam stepsize");
    sub->add_option("--iterations", tcfg.iterations, "Iteration budget");
    sub->add_option("--beta1", tcfg.beta1, "Adam beta1");
    sub->add_option("--beta2", tcfg.beta2, "Adam beta2");
    sub->add_option("--eps-adam", tcfg.eps_adam, "Adam epsilon");
    sub->add_option("--threshold", tcfg.threshold, "Stop once gap < threshold * entropy bound");
    sub->add_option("--init-scale", tcfg.init_scale, "Standard deviation of the initial weights");
    sub->add_option("--checkpoint-every", tcfg.checkpoint_every, "Checkpoint cadence");
    sub->add_flag("--fnn-only", fnn_only, "Train only W, b, V and the output logits");
    sub->add_flag("--no-early-stop", no_early_stop, "Always run the full budget");
    sub->add_flag("--experiment", tcfg.experiment_convention, "Biases and sinusoidal positions of the reference model");
    sub->add_flag("--sinusoidal", tcfg.sinusoidal_positions, "Fixed sinusoidal positions");
    sub->add_flag("--skip", tcfg.skip_connection, "Skip connection around attention");
  };
  auto finish_train_config = [&] {
    tcfg.seed = common.seed;
    tcfg.subset = fnn_only ? TrainSubset::fnn_only : TrainSubset::all;
    tcfg.early_stop = !no_early_stop;
  };

  auto* train = app.add_subcommand("train", "Train the one-layer transformer toward the entropy bound");
  add_corpus_options(train, corpus_args, true);
  train->add_option("--m", tcfg.m, "Neurons")->check(CLI::PositiveNumber);
  train->add_option("--params-out", params_out, "Write trained parameters (JSON)");
  add_train_options(train);
  add_common_options(train, common);
  train->callback([&] {
    action = [&](CLI::App* sub) {
      finish_train_config();
      const BuiltCorpus bc = load_corpus(corpus_args);
      const TrainTrace t = train_to_threshold(bc.corpus, tcfg);
      out << "unique_contexts " << t.n_contexts << "\nparams " << t.param_count << "\nentropy_bound "
          << fmt(t.entropy_bound) << "\nfinal_loss " << fmt(t.final_loss) << "\ngap " << fmt(t.final_gap)
          << "\niterations " << t.iterations_run << "\npassed " << (t.passed ? "true" : "false") << '\n';
      if (!common.out.empty()) {
        auto f = open_out(common.out);
        write_trace_csv(f, t);
      }
      if (!params_out.empty()) {
        auto f = open_out(params_out);
        f << params_to_json(t.params) << '\n';
      }
      write_sidecar(sidecar_path(common, "train"), "train", sub, common.seed,
                    ojson{{"unique_contexts", t.n_contexts},
                          {"params", t.param_count},
                          {"entropy_bound", t.entropy_bound},
                          {"final_loss", t.final_loss},
                          {"gap", t.final_gap},
                          {"iterations", t.iterations_run},
                          {"passed", t.passed}});
    };
  });

  std::vector<std::string> sweep_corpora;
  std::vector<std::size_t> synthetic;
  std::vector<std::size_t> m_grid{4, 8, 16, 32, 64, 128};
  std::size_t syn_omega = 6;
  std::size_t syn_len = 4;
  double syn_conc = 1.0;
  bool first_pass = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train over a grid of corpora and neuron counts");
  sweep_cmd->add_option("--corpus", sweep_corpora, "Corpus files")->delimiter(',');
  sweep_cmd->add_option("--synthetic", synthetic, "Target unique-context counts of synthetic corpora")->delimiter(',');
  sweep_cmd->add_option("--m-grid", m_grid, "Neuron counts")->delimiter(',');
  sweep_cmd->add_option("--omega", syn_omega, "Vocabulary of synthetic corpora");
  sweep_cmd->add_option("--doc-len", syn_len, "Document length of synthetic corpora");
  sweep_cmd->add_option("--concentration", syn_conc, "Row concentration of the random language space");
  sweep_cmd->add_flag("--stop-at-first-pass", first_pass, "Skip larger m once a corpus passes");
  sweep_cmd->add_option("--tokenizer", corpus_args.tokenizer, "whitespace or word-punct");
  sweep_cmd->add_option("--truncate", corpus_args.truncate, "Truncate documents to this many tokens");
  sweep_cmd->add_option("--limit", corpus_args.limit, "Use only the first N documents (0: all)");
  sweep_cmd->add_flag("--ids", corpus_args.ids, "Documents are space-separated token ids");
  add_train_options(sweep_cmd);
  add_common_options(sweep_cmd, common);
  sweep_cmd->callback([&] {
    action = [&](CLI::App* sub) {
      finish_train_config();
      std::vector<SweepCorpus> corpora;
      for (const auto& path : sweep_corpora) {
        CorpusArgs c = corpus_args;
        c.path = path;
        corpora.push_back({path, load_corpus(c).corpus});
      }
      for (std::size_t target : synthetic) {
        const auto space = random_space(syn_omega, syn_len, syn_conc, common.seed + target);
        corpora.push_back({"synthetic-" + std::to_string(target),
                           sample_corpus_with_contexts(space, target, syn_len, common.seed + target)});
      }
      if (corpora.empty()) {
        throw CLI::RequiredError("--corpus or --synthetic");
      }
      SweepOptions so;
      so.stop_at_first_pass = first_pass;
      so.jobs = common.jobs;
      const SweepResult res = sweep(corpora, m_grid, tcfg, so);
      std::ostringstream csv;
      write_sweep_csv(csv, res);
      ojson minimal = ojson::object();
      for (const auto& c : corpora) {
        const auto k = res.minimal_passing_params(c.id);
        minimal[c.id] = k ? ojson(*k) : ojson(nullptr);
        out << c.id << " minimal_passing_params " << (k ? std::to_string(*k) : std::string("none")) << '\n';
      }
      for (const auto& r : res.rows) {
        out << r.corpus_id << " n " << r.n_contexts << " m " << r.m << " params " << r.params << " gap " << fmt(r.gap)
            << " passed " << (r.passed ? 1 : 0) << '\n';
      }
      const std::string path = common.out.empty() ? "sweep.csv" : common.out;
      auto f = open_out(path);
      f << csv.str();
      write_sidecar(path + ".meta.json", "sweep", sub, common.seed, ojson{{"minimal_passing_params", minimal}});
    };
  });

  // bounds
  double k_params = 0.0;
  Dims bdims;
  bool bexperiment = false;
  auto* bounds = app.add_subcommand("bounds", "Capacity bounds for a parameter count");
  bounds->add_option("--k", k_params, "Parameter count (0: compute from the dimensions)");
  bounds->add_option("--omega", bdims.omega, "Vocabulary size")->required();
  bounds->add_option("--m", bdims.m, "Neurons")->required();
  bounds->add_option("--d", bdims.d, "Embedding size");
  bounds->add_option("--m0", bdims.m0, "Heads");
  bounds->add_option("--d0", bdims.d0, "Value size per head");
  bounds->add_option("--dr", bdims.dr, "Key/query size per head");
  bounds->add_option("--max-len", bdims.max_len, "Longest context T");
  bounds->add_flag("--experiment", bexperiment, "Count parameters of the reference experiment model");
  add_common_options(bounds, common);
  bounds->callback([&] {
    action = [&](CLI::App* sub) {
      double k = k_params;
      if (k <= 0.0) {
        k = static_cast<double>(bexperiment ? experiment_param_count(bdims.omega, bdims.m) : param_count(bdims));
      }
      const auto cb = capacity_bounds(k, bdims.omega, bdims.m);
      out << "params " << fmt(k) << "\ngeneral_upper " << fmt(cb.general_upper) << "\nempirical_upper "
          << fmt(cb.empirical_upper) << "\nlower " << fmt(cb.lower) << "\nratio " << fmt(cb.ratio) << '\n';
      ojson res{{"params", k},
                {"general_upper", cb.general_upper},
                {"empirical_upper", cb.empirical_upper},
                {"lower", cb.lower},
                {"ratio", cb.ratio}};
      if (!common.out.empty()) {
        auto f = open_out(common.out);
        f << res.dump(2) << '\n';
      }
      write_sidecar(sidecar_path(common, "bounds"), "bounds", sub, common.seed, res);
    };
  });

  // sample
  std::string space_path;
  std::string space_out;
  std::size_t s_omega = 3;
  std::size_t s_depth = 4;
  double s_conc = 1.0;
  std::size_t s_docs = 100;
  std::size_t s_len = 4;
  auto* sample = app.add_subcommand("sample", "Sample a corpus from a language space");
  sample->add_option("--space", space_path, "Language space JSON (default: a random space)");
  sample->add_option("--omega", s_omega, "Vocabulary of the random space");
  sample->add_option("--depth", s_depth, "Depth of the random space");
  sample->add_option("--concentration", s_conc, "Row concentration of the random space");
  sample->add_option("--docs", s_docs, "Number of documents");
  sample->add_option("--doc-len", s_len, "Document length");
  sample->add_option("--space-out", space_out, "Write the language space (JSON)");
  add_common_options(sample, common);
  sample->callback([&] {
    action = [&](CLI::App* sub) {
      const LanguageSpaceFirstKind space = space_path.empty() ? random_space(s_omega, s_depth, s_conc, common.seed)
                                                              : space_from_json(read_file(space_path));
      // Stream 1 keeps corpus draws independent of the space draws.
      const Corpus c = sample_corpus(space, s_docs, s_len, common.seed ^ 0x9E3779B97F4A7C15ULL);
      if (common.out.empty()) {
        write_corpus_ids(out, c);
      } else {
        auto f = open_out(common.out);
        write_corpus_ids(f, c);
      }
      if (!space_out.empty()) {
        auto f = open_out(space_out);
        f << space_to_json(space) << '\n';
      }
      write_sidecar(sidecar_path(common, "sample"), "sample", sub, common.seed,
                    ojson{{"documents", c.docs.size()}, {"omega", c.omega}});
    };
  });

  std::vector<std::string> argv;
  try {
    argv = expand_config(args, app);
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << NTPCAP_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const Error& e) {
    err << ojson{{"error", errc_name(e.code())}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (sub->get_subcommands().empty() && sub->count("--help") > 0) {
      out << sub->help();
      return 0;
    }
    action(sub);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return 2;
  } catch (const Error& e) {
    err << ojson{{"error", errc_name(e.code())}, {"message", e.what()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << ojson{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace ntpcap
