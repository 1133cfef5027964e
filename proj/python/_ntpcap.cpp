#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ntpcap/cli.hpp"
#include "ntpcap/corpus.hpp"
#include "ntpcap/interpolate.hpp"
#include "ntpcap/langspace.hpp"
#include "ntpcap/model.hpp"
#include "ntpcap/ranklab.hpp"

namespace py = pybind11;
using namespace ntpcap;

namespace {

Corpus corpus_from_ids(const std::vector<std::vector<TokenId>>& docs) {
  Corpus c;
  for (const auto& d : docs) {
    for (TokenId t : d) {
      c.omega = std::max<std::size_t>(c.omega, t);
    }
    c.max_len = std::max(c.max_len, d.size());
    c.docs.push_back(d);
  }
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_ntpcap, m) {
  m.doc() = "Next-token prediction capacity toolkit";
  m.attr("__version__") = NTPCAP_VERSION;

  py::register_exception<Error>(m, "NtpcapError");

  m.def(
      "tokenize",
      [](const std::string& text, const std::string& scheme) { return tokenize(text, parse_tokenizer_scheme(scheme)); },
      py::arg("text"), py::arg("scheme") = "word-punct");

  m.def(
      "build_corpus",
      [](const std::vector<std::vector<std::string>>& docs, std::size_t truncate) {
        BuiltCorpus bc = build_corpus(docs, truncate);
        return py::make_tuple(bc.corpus.docs, bc.vocab.tokens());
      },
      py::arg("docs"), py::arg("truncate") = 10,
      "Returns (id documents, vocabulary in id order starting at id 1).");

  m.def(
      "corpus_stats",
      [](const std::vector<std::vector<TokenId>>& docs) {
        const ContextTrie trie(corpus_from_ids(docs));
        py::dict d;
        d["unique_contexts"] = trie.num_unique_contexts();
        d["entropy_bound"] = entropy_lower_bound(trie);
        d["omega"] = trie.omega();
        return d;
      },
      py::arg("docs"));

  m.def("unique_context_count",
        [](const std::vector<std::vector<TokenId>>& docs) {
          return ContextTrie(corpus_from_ids(docs)).num_unique_contexts();
        });

  m.def(
      "param_count",
      [](std::size_t d, std::size_t m0, std::size_t d0, std::size_t dr, std::size_t mm, std::size_t omega,
         std::size_t max_len) { return param_count(Dims{d, m0, d0, dr, mm, omega, max_len}); },
      py::arg("d"), py::arg("m0"), py::arg("d0"), py::arg("dr"), py::arg("m"), py::arg("omega"), py::arg("max_len"));

  m.def("experiment_param_count", &experiment_param_count, py::arg("omega"), py::arg("m"));

  m.def(
      "capacity_bounds",
      [](double k, std::size_t omega, std::size_t mm) {
        const auto b = capacity_bounds(k, omega, mm);
        py::dict d;
        d["general_upper"] = b.general_upper;
        d["empirical_upper"] = b.empirical_upper;
        d["lower"] = b.lower;
        d["ratio"] = b.ratio;
        return d;
      },
      py::arg("k"), py::arg("omega"), py::arg("m"));

  m.def(
      "interpolate",
      [](const std::vector<std::vector<TokenId>>& contexts, const std::vector<std::vector<double>>& targets,
         const std::string& activation, const std::string& variant, std::uint64_t seed, std::size_t max_retries) {
        TargetSet ts{contexts, targets};
        InterpolationOptions o;
        o.variant = parse_variant(variant);
        o.seed = seed;
        o.max_retries = max_retries;
        const auto r = construct_interpolant(ts, ActivationSpec::from_name(activation), o);
        return report_to_json(r, true);
      },
      py::arg("contexts"), py::arg("targets"), py::arg("activation") = "tanh", py::arg("variant") = "self-attention",
      py::arg("seed") = 0, py::arg("max_retries") = 16, "Returns the interpolation report as a JSON string.");

  m.def(
      "rank_agreement",
      [](const std::string& activation, std::size_t mm, std::size_t n, std::size_t trials, std::uint64_t seed) {
        RankExperimentOptions o;
        o.trials = trials;
        o.seed = seed;
        const auto r = rank_experiment(ActivationSpec::from_name(activation), mm, n, default_b(n), o);
        return py::make_tuple(r.predicted, r.agreement_rate());
      },
      py::arg("activation"), py::arg("m"), py::arg("n"), py::arg("trials") = 20, py::arg("seed") = 0);

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a CLI subcommand in-process; returns (exit code, stdout, stderr).");
}
