#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ntpcap/activation.hpp"
#include "ntpcap/corpus.hpp"
#include "ntpcap/error.hpp"
#include "ntpcap/linalg.hpp"

namespace ntpcap {

template <class Real>
Vec<Real> softmax(const Vec<Real>& x) {
  using std::exp;
  Vec<Real> out(x.size());
  if (x.size() == 0) {
    return out;
  }
  const Real hi = x.maxCoeff();
  Real sum(0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out[i] = exp(x[i] - hi);
    sum += out[i];
  }
  return out / sum;
}

std::vector<double> softmax(const std::vector<double>& x);

enum class Variant { self_attention, token_average };

Variant parse_variant(std::string_view name);
std::string_view variant_name(Variant v);

namespace detail {
inline void check_context(std::size_t omega, std::size_t max_len, ContextView ctx) {
  if (ctx.empty()) {
    fail(Errc::empty_context, "empty context not in domain");
  }
  if (ctx.size() > max_len) {
    fail(Errc::depth_exceeded, "context longer than the position table");
  }
  for (TokenId t : ctx) {
    if (t == 0 || t > omega) {
      fail(Errc::token_out_of_range, "token id " + std::to_string(t) + " out of range");
    }
  }
}
}  // namespace detail

/// f(z, u, a) = sum_t x_t exp(x_t x_tau) / sum_t exp(x_t x_tau), x = z[a] + u[1:|a|].
template <class Real>
Real scalar_attention(const Vec<Real>& z, const Vec<Real>& u, ContextView ctx) {
  using std::exp;
  detail::check_context(static_cast<std::size_t>(z.size()), static_cast<std::size_t>(u.size()), ctx);
  const std::size_t tau = ctx.size();
  Vec<Real> x(static_cast<Eigen::Index>(tau));
  for (std::size_t t = 0; t < tau; ++t) {
    x[static_cast<Eigen::Index>(t)] = z[ctx[t] - 1] + u[static_cast<Eigen::Index>(t)];
  }
  const Real last = x[static_cast<Eigen::Index>(tau - 1)];
  Vec<Real> s = x * last;
  const Real hi = s.maxCoeff();
  Real num(0);
  Real den(0);
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    const Real e = exp(s[t] - hi);
    num += x[t] * e;
    den += e;
  }
  return num / den;
}

/// f(z, u, a) = sum_t u_t z_{a_t}.
template <class Real>
Real token_average(const Vec<Real>& z, const Vec<Real>& u, ContextView ctx) {
  detail::check_context(static_cast<std::size_t>(z.size()), static_cast<std::size_t>(u.size()), ctx);
  Real acc(0);
  for (std::size_t t = 0; t < ctx.size(); ++t) {
    acc += u[static_cast<Eigen::Index>(t)] * z[ctx[t] - 1];
  }
  return acc;
}

template <class Real>
Real scalar_feature(Variant v, const Vec<Real>& z, const Vec<Real>& u, ContextView ctx) {
  return v == Variant::self_attention ? scalar_attention<Real>(z, u, ctx) : token_average<Real>(z, u, ctx);
}

/// The d = 1 reduction: context -> f -> psi(w f + b) -> V^T . -> softmax.
template <class Real>
struct ScalarParamsT {
  Vec<Real> z;             // omega
  Vec<Real> u;             // T
  Vec<Real> w;             // m
  Vec<Real> b;             // m
  Mat<Real> V;             // m x omega
  Vec<Real> empty_logits;  // omega - 1

  std::size_t omega() const { return static_cast<std::size_t>(z.size()); }
  std::size_t max_len() const { return static_cast<std::size_t>(u.size()); }
  std::size_t m() const { return static_cast<std::size_t>(w.size()); }
};
using ScalarParams = ScalarParamsT<double>;

template <class To, class From>
ScalarParamsT<To> convert_params(const ScalarParamsT<From>& p) {
  auto cv = [](const auto& a) { return a.unaryExpr([](const From& x) { return To(x); }).eval(); };
  if constexpr (std::is_same_v<To, double> && !std::is_same_v<From, double>) {
    auto cd = [](const auto& a) { return a.unaryExpr([](const From& x) { return to_double(x); }).eval(); };
    return {cd(p.z), cd(p.u), cd(p.w), cd(p.b), cd(p.V), cd(p.empty_logits)};
  } else {
    return {cv(p.z), cv(p.u), cv(p.w), cv(p.b), cv(p.V), cv(p.empty_logits)};
  }
}

/// Logits for the empty context: (empty_logits, 0).
template <class Real>
Vec<Real> empty_context_logits(const Vec<Real>& empty_logits) {
  Vec<Real> out(empty_logits.size() + 1);
  out.head(empty_logits.size()) = empty_logits;
  out[empty_logits.size()] = Real(0);
  return out;
}

template <class Real>
Vec<Real> scalar_logits(const ScalarParamsT<Real>& p, const ActivationSpec& psi, Variant v, ContextView ctx) {
  if (ctx.empty()) {
    return empty_context_logits<Real>(p.empty_logits);
  }
  const Real f = scalar_feature<Real>(v, p.z, p.u, ctx);
  Vec<Real> h(p.w.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    h[i] = psi.eval<Real>(p.w[i] * f + p.b[i]);
  }
  return p.V.transpose() * h;
}

template <class Real>
Vec<Real> scalar_forward(const ScalarParamsT<Real>& p, const ActivationSpec& psi, Variant v, ContextView ctx) {
  return softmax<Real>(scalar_logits<Real>(p, psi, v, ctx));
}

struct Dims {
  std::size_t d = 1;
  std::size_t m0 = 1;
  std::size_t d0 = 1;
  std::size_t dr = 1;  // d_r, uniform over heads
  std::size_t m = 1;
  std::size_t omega = 2;
  std::size_t max_len = 1;  // columns of U
};

enum class HiddenNonlinearity {
  activation,  // V^T psi(W^T x + b)
  softmax,     // V^T phi(W^T x + b), the literal reading of the FNN display
};

/// Optional extra parameters and switches. Defaults give the plain model.
struct ModelOptions {
  bool skip_connection = false;     // h2(X) + X[:, -1]
  bool attention_bias = false;      // query/key/value biases per head and an output bias on W0
  bool output_bias = false;         // bias added to the final logits
  bool sinusoidal_positions = false;  // U fixed to the sinusoidal table, not trained
  HiddenNonlinearity hidden = HiddenNonlinearity::activation;
};

struct TransformerParams {
  Dims dims;
  ModelOptions options;
  MatrixXd Z;                // d x omega
  MatrixXd U;                // d x T
  std::vector<MatrixXd> W1;  // m0 of d x dr
  std::vector<MatrixXd> W2;  // m0 of d x dr
  std::vector<MatrixXd> W3;  // m0 of d x d0
  MatrixXd W0;               // m0 d0 x d
  MatrixXd W;                // d x m
  VectorXd b;                // m
  MatrixXd V;                // m x omega
  VectorXd empty_logits;     // omega - 1
  // Present only when the matching option is on.
  std::vector<VectorXd> bq;  // m0 of dr (query side, W2)
  std::vector<VectorXd> bk;  // m0 of dr (key side, W1)
  std::vector<VectorXd> bv;  // m0 of d0
  VectorXd bo;               // d
  VectorXd c;                // omega

  /// Zero-initialised parameters of the right shapes.
  static TransformerParams zeros(const Dims& dims, const ModelOptions& options = {});
  void check_shapes() const;
  /// Number of scalar entries actually stored, excluding a sinusoidal U.
  std::size_t num_entries() const;
};

/// Sinusoidal position table (d x T): column t (0-based position) holds
/// sin(t / 10000^(2i/d)) at row 2i and cos(t / 10000^(2i/d)) at row 2i + 1.
MatrixXd sinusoidal_positions(std::size_t d, std::size_t max_len);

/// h2 o h1 for a nonempty context.
VectorXd attention_output(const TransformerParams& p, ContextView ctx);
/// Logits before the final softmax.
VectorXd transformer_logits(const TransformerParams& p, const ActivationSpec& psi, ContextView ctx);
std::vector<double> transformer_forward(const TransformerParams& p, const ActivationSpec& psi, ContextView ctx);

/// Rank-one lift of the scalar reduction into a (d, m0, d0, dr) model.
TransformerParams lift_scalar(const ScalarParams& sp, std::size_t d, std::size_t m0, std::size_t d0, std::size_t dr);

/// omega m + m (d + 1) + 2 m0 (d0 + d1) d + (omega + T) d. Pass max_len = 0
/// to exclude positional parameters.
std::uint64_t param_count(const Dims& dims);

/// Parameter count of the trained experiment model: d = 16, one head,
/// d0 = d1 = 16, sinusoidal (fixed) positions, biases on the attention
/// projections, on both linear layers and on the output layer.
/// Equals omega m + 17 (omega + m) + 1088.
std::uint64_t experiment_param_count(std::size_t omega, std::size_t m);
Dims experiment_dims(std::size_t omega, std::size_t m, std::size_t max_len);
ModelOptions experiment_options();

struct CapacityBounds {
  double general_upper = 0.0;
  double empirical_upper = 0.0;
  double lower = 0.0;
  double ratio = 0.0;
};

/// Bounds for a model with k parameters, vocabulary omega and m neurons.
/// ratio = k / ((omega - 1) m), the upper-to-lower ratio.
CapacityBounds capacity_bounds(double k, std::size_t omega, std::size_t m);

std::string params_to_json(const TransformerParams& p);
TransformerParams params_from_json(const std::string& text);

}  // namespace ntpcap
