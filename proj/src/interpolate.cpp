#include "ntpcap/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "ntpcap/error.hpp"
#include "ntpcap/linalg.hpp"
#include "ntpcap/precision.hpp"
#include "ntpcap/rng.hpp"

namespace ntpcap {

namespace {

constexpr double kSimplexTol = 1e-12;

}  // namespace

std::size_t TargetSet::max_len() const {
  std::size_t t = 0;
  for (const auto& c : contexts) {
    t = std::max(t, c.size());
  }
  return t;
}

std::size_t TargetSet::num_nonempty() const {
  return static_cast<std::size_t>(std::count_if(contexts.begin(), contexts.end(), [](const Context& c) { return !c.empty(); }));
}

void TargetSet::validate() const {
  require(contexts.size() == targets.size(), "one target per context");
  require(!contexts.empty(), "empty target set");
  const std::size_t w = omega();
  require(w >= 2, "targets need at least two tokens");
  std::set<Context> seen;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    if (!seen.insert(contexts[i]).second) {
      fail(Errc::invalid_argument, "duplicate context '" + context_key(contexts[i]) + "'");
    }
    for (TokenId t : contexts[i]) {
      if (t == 0 || t > w) {
        fail(Errc::token_out_of_range, "token id " + std::to_string(t) + " out of range");
      }
    }
    const auto& y = targets[i];
    require(y.size() == w, "all targets must have the same length");
    double sum = 0.0;
    for (double p : y) {
      if (!(p > 0.0)) {
        fail(Errc::boundary_target, "boundary target");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSimplexTol) {
      fail(Errc::invalid_argument, "target does not sum to 1");
    }
  }
}

std::vector<double> logit_lift(const std::vector<double>& target) {
  std::vector<double> out(target.size());
  for (std::size_t g = 0; g < target.size(); ++g) {
    if (!(target[g] > 0.0)) {
      fail(Errc::boundary_target, "boundary target");
    }
    out[g] = std::log(target[g]);
  }
  return out;
}

TargetSet targets_from_trie(const ContextTrie& trie, double smoothing) {
  require(smoothing >= 0.0 && smoothing < 1.0, "smoothing must lie in [0, 1)");
  TargetSet ts;
  const double uniform = 1.0 / static_cast<double>(trie.omega());
  for (std::size_t idx : trie.unique_contexts()) {
    const auto& node = trie.nodes()[idx];
    auto p = empirical_next_token(trie, node.context);
    for (auto& v : p) {
      v = (1.0 - smoothing) * v + smoothing * uniform;
    }
    ts.contexts.push_back(node.context);
    ts.targets.push_back(std::move(p));
  }
  ts.validate();
  return ts;
}

TargetSet targets_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    TargetSet ts;
    for (const auto& item : j) {
      ts.contexts.push_back(item.at("context").get<Context>());
      ts.targets.push_back(item.at("target").get<std::vector<double>>());
    }
    return ts;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, std::string("bad targets JSON: ") + e.what());
  }
}

std::string targets_to_json(const TargetSet& ts) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    j.push_back({{"context", ts.contexts[i]}, {"target", ts.targets[i]}});
  }
  return j.dump();
}

template <class Real>
VerifyReport verify_interpolation(const ScalarParamsT<Real>& params, const ActivationSpec& psi, Variant variant,
                                  const TargetSet& ts) {
  using std::abs;
  VerifyReport out;
  out.errors.reserve(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Vec<Real> q = scalar_forward<Real>(params, psi, variant, ts.contexts[i]);
    require(static_cast<std::size_t>(q.size()) == ts.targets[i].size(), "target length differs from omega");
    Real err(0);
    for (Eigen::Index g = 0; g < q.size(); ++g) {
      const Real e = abs(q[g] - Real(ts.targets[i][static_cast<std::size_t>(g)]));
      if (e > err) {
        err = e;
      }
    }
    out.errors.push_back(to_double(err));
    out.max_error = std::max(out.max_error, out.errors.back());
  }
  return out;
}

template VerifyReport verify_interpolation<double>(const ScalarParamsT<double>&, const ActivationSpec&, Variant,
                                                   const TargetSet&);
template VerifyReport verify_interpolation<Real50>(const ScalarParamsT<Real50>&, const ActivationSpec&, Variant,
                                                   const TargetSet&);
template VerifyReport verify_interpolation<Real100>(const ScalarParamsT<Real100>&, const ActivationSpec&, Variant,
                                                    const TargetSet&);
template VerifyReport verify_interpolation<Real200>(const ScalarParamsT<Real200>&, const ActivationSpec&, Variant,
                                                    const TargetSet&);
template VerifyReport verify_interpolation<Real400>(const ScalarParamsT<Real400>&, const ActivationSpec&, Variant,
                                                    const TargetSet&);

namespace {

struct Attempt {
  bool rank_ok = false;
  bool verified = false;
  double diag_ratio = 0.0;
  VerifyReport verify;
  ScalarParams rounded;
  std::string exact_json;
};

template <class Real>
nlohmann::ordered_json exact_json(const ScalarParamsT<Real>& p) {
  auto vec = [](const auto& a) {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      out.push_back(to_string_full<Real>(a(i)));
    }
    return out;
  };
  nlohmann::ordered_json j;
  j["z"] = vec(p.z);
  j["u"] = vec(p.u);
  j["w"] = vec(p.w);
  j["b"] = vec(p.b);
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index i = 0; i < p.V.rows(); ++i) {
    rows.push_back(vec(p.V.row(i)));
  }
  j["V"] = rows;
  j["empty_logits"] = vec(p.empty_logits);
  return j;
}

// One solve at a fixed working precision. `base` carries z, u, w (already
// scaled by epsilon) and b; V and the empty-context logits are computed here.
template <class Real>
Attempt solve_at(const ScalarParams& base, const ActivationSpec& psi, const TargetSet& ts,
                 const InterpolationOptions& opts) {
  using std::log;
  ScalarParamsT<Real> p = convert_params<Real>(base);
  const auto omega = static_cast<Eigen::Index>(ts.omega());
  const auto m = static_cast<Eigen::Index>(base.m());
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts.contexts[i].empty()) {
      for (Eigen::Index g = 0; g + 1 < omega; ++g) {
        p.empty_logits[g] = log(Real(ts.targets[i][static_cast<std::size_t>(g)])) -
                            log(Real(ts.targets[i][static_cast<std::size_t>(omega - 1)]));
      }
    } else {
      rows.push_back(i);
    }
  }
  Attempt out;
  p.V = Mat<Real>::Zero(m, omega);
  if (!rows.empty()) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Mat<Real> psi_t(n, m);
    Mat<Real> y_t(n, omega);
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::size_t i = rows[static_cast<std::size_t>(j)];
      const Real xhat = scalar_feature<Real>(opts.variant, p.z, p.u, ts.contexts[i]);
      for (Eigen::Index k = 0; k < m; ++k) {
        psi_t(j, k) = psi.eval<Real>(p.w[k] * xhat + p.b[k]);
      }
      for (Eigen::Index g = 0; g < omega; ++g) {
        y_t(j, g) = log(Real(ts.targets[i][static_cast<std::size_t>(g)]));
      }
    }
    auto sol = pivoted_qr_solve<Real>(psi_t, y_t);
    p.V = sol.solution;
    out.diag_ratio = to_double(sol.diag_ratio);
    out.rank_ok = sol.diag_ratio >= scaled_tolerance<Real>(opts.rank_tol);
  } else {
    out.diag_ratio = 1.0;
    out.rank_ok = true;
  }
  out.verify = verify_interpolation<Real>(p, psi, opts.variant, ts);
  out.verified = out.rank_ok && out.verify.max_error <= opts.tolerance;
  out.rounded = convert_params<double>(p);
  if constexpr (!std::is_same_v<Real, double>) {
    if (out.verified) {
      out.exact_json = exact_json<Real>(p).dump();
    }
  }
  return out;
}

Attempt solve_at_digits(unsigned digits, const ScalarParams& base, const ActivationSpec& psi, const TargetSet& ts,
                        const InterpolationOptions& opts) {
  switch (digits) {
    case 0: return solve_at<double>(base, psi, ts, opts);
    case 50: return solve_at<Real50>(base, psi, ts, opts);
    case 100: return solve_at<Real100>(base, psi, ts, opts);
    case 200: return solve_at<Real200>(base, psi, ts, opts);
    default: return solve_at<Real400>(base, psi, ts, opts);
  }
}

int bits_for_digits(unsigned digits) {
  switch (digits) {
    case 0: return mantissa_bits<double>();
    case 50: return mantissa_bits<Real50>();
    case 100: return mantissa_bits<Real100>();
    case 200: return mantissa_bits<Real200>();
    default: return mantissa_bits<Real400>();
  }
}

}  // namespace

InterpolationReport construct_interpolant(const TargetSet& ts, const ActivationSpec& psi,
                                          const InterpolationOptions& opts) {
  ts.validate();
  const std::size_t n = ts.num_nonempty();
  const std::size_t m = opts.m == 0 ? std::max<std::size_t>(n, 1) : opts.m;
  if (m < n) {
    fail(Errc::invalid_argument, "m = " + std::to_string(m) + " is below the number of contexts n = " + std::to_string(n));
  }
  const std::size_t omega = ts.omega();
  const std::size_t max_len = opts.max_len == 0 ? std::max<std::size_t>(ts.max_len(), 1) : opts.max_len;
  require(max_len >= ts.max_len(), "max_len shorter than the longest context");
  require(opts.margin > 0.0 && opts.margin < 1.0, "margin must lie in (0, 1)");

  std::vector<unsigned> ladder{0};
  for (unsigned digits : {50u, 100u, 200u, 400u}) {
    if (digits <= opts.max_digits) {
      ladder.push_back(digits);
    }
  }

  bool saw_rank_failure = false;
  bool saw_error_failure = false;
  double worst_condition = 0.0;
  double last_error = 0.0;
  for (std::size_t attempt = 0; attempt <= opts.max_retries; ++attempt) {
    Philox rng(opts.seed, attempt);
    ScalarParams base;
    base.z.resize(static_cast<Eigen::Index>(omega));
    base.u.resize(static_cast<Eigen::Index>(max_len));
    for (auto& v : base.z) {
      v = rng.normal();
    }
    for (auto& v : base.u) {
      v = rng.normal();
    }
    // Distinctness gate on the scalar features.
    std::vector<double> xhat;
    for (const auto& c : ts.contexts) {
      if (!c.empty()) {
        xhat.push_back(scalar_feature<double>(opts.variant, base.z, base.u, c));
      }
    }
    std::vector<double> sorted = xhat;
    std::sort(sorted.begin(), sorted.end());
    bool distinct = true;
    double xmax = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      distinct = distinct && std::abs(sorted[i]) > opts.distinct_tol;
      if (i > 0) {
        distinct = distinct && sorted[i] - sorted[i - 1] > opts.distinct_tol;
      }
      xmax = std::max(xmax, std::abs(sorted[i]));
    }
    if (!distinct) {
      continue;
    }
    base.w.resize(static_cast<Eigen::Index>(m));
    for (auto& v : base.w) {
      v = rng.normal();
    }
    const double wmax = base.w.cwiseAbs().maxCoeff();
    double epsilon = 1.0;
    if (!psi.entire() && xmax > 0.0) {
      epsilon = opts.margin * psi.rho() / (wmax * xmax);
    }
    base.w *= epsilon;
    base.b = VectorXd::Constant(static_cast<Eigen::Index>(m), psi.eta());
    base.V = MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(omega));
    base.empty_logits = VectorXd::Zero(static_cast<Eigen::Index>(omega) - 1);

    for (unsigned digits : ladder) {
      Attempt a = solve_at_digits(digits, base, psi, ts, opts);
      if (!a.rank_ok) {
        saw_rank_failure = true;
        worst_condition = a.diag_ratio > 0.0 ? 1.0 / a.diag_ratio : INFINITY;
        continue;
      }
      if (!a.verified) {
        saw_error_failure = true;
        last_error = a.verify.max_error;
        continue;
      }
      InterpolationReport r;
      r.params = std::move(a.rounded);
      r.epsilon = epsilon;
      r.condition = 1.0 / a.diag_ratio;
      r.max_error = a.verify.max_error;
      r.errors = std::move(a.verify.errors);
      r.double_max_error = verify_interpolation<double>(r.params, psi, opts.variant, ts).max_error;
      r.seed = opts.seed;
      r.retries = attempt;
      r.precision_bits = bits_for_digits(digits);
      r.n = n;
      r.m = m;
      r.exact_params_json = std::move(a.exact_json);
      if (opts.lift) {
        r.lifted = lift_scalar(r.params, opts.lift_d, opts.lift_m0, opts.lift_d0, opts.lift_dr);
      }
      return r;
    }
  }
  if (saw_rank_failure) {
    fail(Errc::rank_deficiency, "rank deficiency: feature matrix condition estimate " + std::to_string(worst_condition));
  }
  if (saw_error_failure) {
    fail(Errc::rank_deficiency, "interpolation error " + std::to_string(last_error) + " above tolerance at every precision");
  }
  fail(Errc::injectivity_sampling_failed, "injectivity sampling failed");
}

std::string report_to_json(const InterpolationReport& r, bool include_params) {
  nlohmann::ordered_json j;
  j["epsilon"] = r.epsilon;
  j["condition"] = r.condition;
  j["max_error"] = r.max_error;
  j["double_max_error"] = r.double_max_error;
  j["retries"] = r.retries;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["m"] = r.m;
  j["precision_bits"] = r.precision_bits;
  j["errors"] = r.errors;
  if (include_params) {
    auto vec = [](const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    nlohmann::ordered_json p;
    p["z"] = vec(r.params.z);
    p["u"] = vec(r.params.u);
    p["w"] = vec(r.params.w);
    p["b"] = vec(r.params.b);
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < r.params.V.rows(); ++i) {
      rows.push_back(vec(r.params.V.row(i).transpose()));
    }
    p["V"] = rows;
    p["empty_logits"] = vec(r.params.empty_logits);
    j["params"] = std::move(p);
    if (!r.exact_params_json.empty()) {
      j["exact_params"] = nlohmann::ordered_json::parse(r.exact_params_json);
    }
    if (r.lifted) {
      j["lifted"] = nlohmann::ordered_json::parse(params_to_json(*r.lifted));
    }
  }
  return j.dump(2);
}

}  // namespace ntpcap
