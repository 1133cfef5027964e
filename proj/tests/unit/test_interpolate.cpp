#include <cmath>

#include "helpers.hpp"
#include "ntpcap/interpolate.hpp"
#include "ntpcap/rng.hpp"
#include "oracles.hpp"

using namespace ntpcap;

TEST_CASE("logit lift") {
  const auto half = logit_lift({0.5, 0.5});
  CHECK(half[0] == doctest::Approx(std::log(0.5)));
  CHECK(oracle::max_abs_diff(softmax(half), {0.5, 0.5}) < 1e-15);
  const auto l = logit_lift({0.3, 0.7});
  CHECK(l[0] == doctest::Approx(-1.20397).epsilon(1e-5));
  CHECK(l[1] == doctest::Approx(-0.35667).epsilon(1e-5));
  CHECK(oracle::max_abs_diff(softmax(l), {0.3, 0.7}) < 1e-15);
  CHECK_ERRC(logit_lift({1.0, 0.0}), Errc::boundary_target);
}

TEST_CASE("two contexts, two neurons") {
  TargetSet ts{{{1}, {2}}, {{0.3, 0.7}, {0.9, 0.1}}};
  InterpolationOptions o;
  o.m = 2;
  o.seed = 4;
  const auto psi = ActivationSpec::tanh();
  const auto r = construct_interpolant(ts, psi, o);
  CHECK(r.max_error < 1e-8);
  // Recompute the outputs with the plain-loop scalar pipeline.
  for (std::size_t i = 0; i < 2; ++i) {
    const auto out = oracle::scalar_forward(r.params, psi, true, ts.contexts[i]);
    CHECK(oracle::max_abs_diff(out, ts.targets[i]) < 1e-8);
  }

  SUBCASE("perturbing V increases the error") {
    auto noisy = r.params;
    Philox rng(1);
    for (Eigen::Index i = 0; i < noisy.V.size(); ++i) noisy.V.data()[i] += 1e-2 * rng.normal();
    const auto before = verify_interpolation<double>(r.params, psi, Variant::self_attention, ts);
    const auto after = verify_interpolation<double>(noisy, psi, Variant::self_attention, ts);
    CHECK(after.max_error > before.max_error);
  }
}

TEST_CASE("uniform targets are reached exactly") {
  TargetSet ts{{{1}, {2, 1}, {3}}, {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3},
                                   {1.0 / 3, 1.0 / 3, 1.0 / 3}}};
  InterpolationOptions o;
  o.m = 3;
  const auto r = construct_interpolant(ts, ActivationSpec::tanh(), o);
  CHECK(r.max_error < 1e-14);
}

TEST_CASE("empty context is parameterized directly") {
  TargetSet ts{{{}, {1}, {1, 2}}, {{0.2, 0.8}, {0.6, 0.4}, {0.5, 0.5}}};
  InterpolationOptions o;
  o.seed = 2;
  const auto r = construct_interpolant(ts, ActivationSpec::gelu(), o);
  CHECK(r.n == 2);
  CHECK(r.params.empty_logits.size() == 1);
  CHECK(r.errors[0] < 1e-15);
  CHECK(r.max_error < 1e-10);
}

TEST_CASE("preconditions") {
  TargetSet ts{{{1}, {2}, {1, 1}}, {{0.3, 0.7}, {0.9, 0.1}, {0.5, 0.5}}};
  InterpolationOptions o;
  o.m = 2;
  CHECK_ERRC(construct_interpolant(ts, ActivationSpec::tanh(), o), Errc::invalid_argument);
  TargetSet dup{{{1}, {1}}, {{0.3, 0.7}, {0.9, 0.1}}};
  CHECK_ERRC(dup.validate(), Errc::invalid_argument);
  TargetSet edge{{{1}}, {{1.0, 0.0}}};
  CHECK_ERRC(edge.validate(), Errc::boundary_target);
}

TEST_CASE("token-average variant, several activations, lifted output") {
  Philox rng(8);
  for (const char* name : {"tanh", "logistic", "arctan", "gelu"}) {
    TargetSet ts;
    ts.contexts = oracle::random_distinct_contexts(rng, 6, 3, 3);
    for (std::size_t i = 0; i < 6; ++i) ts.targets.push_back(oracle::random_interior(rng, 3));
    InterpolationOptions o;
    o.variant = Variant::token_average;
    o.seed = 3;
    o.lift = true;
    o.lift_d = 4;
    o.lift_m0 = 2;
    o.lift_d0 = 2;
    o.lift_dr = 3;
    const auto psi = ActivationSpec::from_name(name);
    const auto r = construct_interpolant(ts, psi, o);
    CAPTURE(name);
    CHECK(r.max_error < 1e-10);
    REQUIRE(r.lifted.has_value());
    if (r.precision_bits == 53) {
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto out = oracle::scalar_forward(r.params, psi, false, ts.contexts[i]);
        CHECK(oracle::max_abs_diff(out, ts.targets[i]) < 1e-8);
      }
    }
  }
}

TEST_CASE("targets from a corpus trie") {
  const BuiltCorpus bc = build_corpus({{"i", "love", "cats"}, {"i", "love", "dogs"}, {"i", "hate", "cats"}}, 10);
  const ContextTrie trie(bc.corpus);
  CHECK_ERRC(targets_from_trie(trie), Errc::boundary_target);
  const auto ts = targets_from_trie(trie, 0.1);
  CHECK(ts.size() == 4);
  ts.validate();
  const auto back = targets_from_json(targets_to_json(ts));
  CHECK(back.contexts == ts.contexts);
}

TEST_CASE("report is reproducible for a seed") {
  TargetSet ts{{{1}, {2}, {2, 1}}, {{0.3, 0.7}, {0.9, 0.1}, {0.4, 0.6}}};
  InterpolationOptions o;
  o.seed = 11;
  const auto a = construct_interpolant(ts, ActivationSpec::tanh(), o);
  const auto b = construct_interpolant(ts, ActivationSpec::tanh(), o);
  CHECK(report_to_json(a, true) == report_to_json(b, true));
}
