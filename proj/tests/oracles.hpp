#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library routine it is used to check.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "ntpcap/model.hpp"
#include "ntpcap/rng.hpp"

namespace oracle {

using ntpcap::Context;
using ntpcap::TokenId;

/// Proper prefixes of every document, by brute force.
inline std::set<Context> unique_contexts(const std::vector<Context>& docs) {
  std::set<Context> out;
  for (const auto& d : docs) {
    for (std::size_t t = 0; t < d.size(); ++t) {
      out.insert(Context(d.begin(), d.begin() + static_cast<long>(t)));
    }
  }
  return out;
}

/// sum_alpha sum_gamma c(alpha, gamma) * -ln(c(alpha, gamma) / c(alpha)).
inline double entropy_bound(const std::vector<Context>& docs) {
  std::map<Context, std::map<TokenId, double>> next;
  for (const auto& d : docs) {
    for (std::size_t t = 0; t < d.size(); ++t) {
      next[Context(d.begin(), d.begin() + static_cast<long>(t))][d[t]] += 1.0;
    }
  }
  long double total = 0.0L;
  for (const auto& [ctx, counts] : next) {
    double c = 0.0;
    for (const auto& [tok, k] : counts) {
      c += k;
    }
    for (const auto& [tok, k] : counts) {
      total -= static_cast<long double>(k) * std::log(static_cast<long double>(k) / c);
    }
  }
  return static_cast<double>(total);
}

/// Loss of an arbitrary next-token model, summed token by token.
template <class Model>
double corpus_loss(const std::vector<Context>& docs, Model&& model) {
  long double total = 0.0L;
  for (const auto& d : docs) {
    for (std::size_t t = 0; t < d.size(); ++t) {
      const std::vector<double> p = model(Context(d.begin(), d.begin() + static_cast<long>(t)));
      total -= std::log(static_cast<long double>(p[d[t] - 1]));
    }
  }
  return static_cast<double>(total);
}

inline std::vector<long double> softmax(const std::vector<long double>& x) {
  long double hi = *std::max_element(x.begin(), x.end());
  long double s = 0.0L;
  std::vector<long double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - hi);
    s += out[i];
  }
  for (auto& v : out) {
    v /= s;
  }
  return out;
}

inline long double scalar_attention(const std::vector<double>& z, const std::vector<double>& u, const Context& a) {
  std::vector<long double> x(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    x[t] = static_cast<long double>(z[a[t] - 1]) + u[t];
  }
  long double num = 0.0L;
  long double den = 0.0L;
  for (long double xt : x) {
    const long double e = std::exp(xt * x.back());
    num += xt * e;
    den += e;
  }
  return num / den;
}

inline long double token_average(const std::vector<double>& z, const std::vector<double>& u, const Context& a) {
  long double acc = 0.0L;
  for (std::size_t t = 0; t < a.size(); ++t) {
    acc += static_cast<long double>(u[t]) * z[a[t] - 1];
  }
  return acc;
}

/// Scalar pipeline softmax(V^T psi(w f + b)) written with plain loops.
template <class Psi>
std::vector<double> scalar_forward(const ntpcap::ScalarParams& p, Psi&& psi, bool attention, const Context& a) {
  const std::vector<double> z(p.z.data(), p.z.data() + p.z.size());
  const std::vector<double> u(p.u.data(), p.u.data() + p.u.size());
  std::vector<long double> logits(static_cast<std::size_t>(p.V.cols()), 0.0L);
  if (a.empty()) {
    for (Eigen::Index g = 0; g < p.empty_logits.size(); ++g) {
      logits[static_cast<std::size_t>(g)] = p.empty_logits[g];
    }
  } else {
    const long double f = attention ? scalar_attention(z, u, a) : token_average(z, u, a);
    for (Eigen::Index i = 0; i < p.w.size(); ++i) {
      const double h = psi(static_cast<double>(p.w[i] * f + p.b[i]));
      for (Eigen::Index g = 0; g < p.V.cols(); ++g) {
        logits[static_cast<std::size_t>(g)] += static_cast<long double>(p.V(i, g)) * h;
      }
    }
  }
  const auto s = softmax(logits);
  return {s.begin(), s.end()};
}

/// Plain-loop forward pass of the one-layer transformer for a nonempty
/// context (activation hidden layer).
template <class Psi>
std::vector<double> transformer_forward(const ntpcap::TransformerParams& p, Psi&& psi, const Context& a) {
  const auto& D = p.dims;
  const std::size_t tau = a.size();
  std::vector<std::vector<long double>> X(tau, std::vector<long double>(D.d));
  for (std::size_t t = 0; t < tau; ++t) {
    for (std::size_t i = 0; i < D.d; ++i) {
      X[t][i] = p.Z(static_cast<long>(i), a[t] - 1) + p.U(static_cast<long>(i), static_cast<long>(t));
    }
  }
  std::vector<long double> o_all;
  for (std::size_t r = 0; r < D.m0; ++r) {
    std::vector<long double> q(D.dr, 0.0L);
    for (std::size_t k = 0; k < D.dr; ++k) {
      for (std::size_t i = 0; i < D.d; ++i) {
        q[k] += p.W2[r](static_cast<long>(i), static_cast<long>(k)) * X[tau - 1][i];
      }
      if (p.options.attention_bias) {
        q[k] += p.bq[r][static_cast<long>(k)];
      }
    }
    std::vector<long double> s(tau, 0.0L);
    for (std::size_t t = 0; t < tau; ++t) {
      for (std::size_t k = 0; k < D.dr; ++k) {
        long double key = 0.0L;
        for (std::size_t i = 0; i < D.d; ++i) {
          key += p.W1[r](static_cast<long>(i), static_cast<long>(k)) * X[t][i];
        }
        if (p.options.attention_bias) {
          key += p.bk[r][static_cast<long>(k)];
        }
        s[t] += key * q[k];
      }
    }
    const auto att = softmax(s);
    for (std::size_t j = 0; j < D.d0; ++j) {
      long double o = 0.0L;
      for (std::size_t t = 0; t < tau; ++t) {
        long double v = 0.0L;
        for (std::size_t i = 0; i < D.d; ++i) {
          v += p.W3[r](static_cast<long>(i), static_cast<long>(j)) * X[t][i];
        }
        if (p.options.attention_bias) {
          v += p.bv[r][static_cast<long>(j)];
        }
        o += att[t] * v;
      }
      o_all.push_back(o);
    }
  }
  std::vector<long double> h2(D.d, 0.0L);
  for (std::size_t i = 0; i < D.d; ++i) {
    for (std::size_t k = 0; k < o_all.size(); ++k) {
      h2[i] += p.W0(static_cast<long>(k), static_cast<long>(i)) * o_all[k];
    }
    if (p.options.attention_bias) {
      h2[i] += p.bo[static_cast<long>(i)];
    }
    if (p.options.skip_connection) {
      h2[i] += X[tau - 1][i];
    }
  }
  std::vector<long double> logits(D.omega, 0.0L);
  for (std::size_t j = 0; j < D.m; ++j) {
    long double pre = p.b[static_cast<long>(j)];
    for (std::size_t i = 0; i < D.d; ++i) {
      pre += p.W(static_cast<long>(i), static_cast<long>(j)) * h2[i];
    }
    const double h = psi(static_cast<double>(pre));
    for (std::size_t g = 0; g < D.omega; ++g) {
      logits[g] += p.V(static_cast<long>(j), static_cast<long>(g)) * h;
    }
  }
  if (p.options.output_bias) {
    for (std::size_t g = 0; g < D.omega; ++g) {
      logits[g] += p.c[static_cast<long>(g)];
    }
  }
  const auto out = softmax(logits);
  return {out.begin(), out.end()};
}

/// Trainable entries counted array by array, without the empty-context
/// logits and without a fixed positional table.
inline std::uint64_t summed_array_sizes(const ntpcap::TransformerParams& p) {
  std::uint64_t k = 0;
  auto add = [&](const auto& a) { k += static_cast<std::uint64_t>(a.size()); };
  add(p.Z);
  if (!p.options.sinusoidal_positions) {
    add(p.U);
  }
  for (const auto& a : p.W1) add(a);
  for (const auto& a : p.W2) add(a);
  for (const auto& a : p.W3) add(a);
  add(p.W0);
  add(p.W);
  add(p.b);
  add(p.V);
  for (const auto& a : p.bq) add(a);
  for (const auto& a : p.bk) add(a);
  for (const auto& a : p.bv) add(a);
  add(p.bo);
  add(p.c);
  return k;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

/// Random point in the open simplex: normalized exponentials.
inline std::vector<double> random_interior(ntpcap::Philox& rng, std::size_t omega) {
  std::vector<double> y(omega);
  double s = 0.0;
  for (auto& v : y) {
    v = rng.exponential() + 1e-3;
    s += v;
  }
  for (auto& v : y) {
    v /= s;
  }
  return y;
}

/// n distinct nonempty contexts of length <= max_len over [omega].
inline std::vector<Context> random_distinct_contexts(ntpcap::Philox& rng, std::size_t n, std::size_t omega,
                                                     std::size_t max_len) {
  std::set<Context> seen;
  std::vector<Context> out;
  while (out.size() < n) {
    const std::size_t len = 1 + rng.below(max_len);
    Context c(len);
    for (auto& t : c) {
      t = static_cast<TokenId>(1 + rng.below(omega));
    }
    if (seen.insert(c).second) {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace oracle
