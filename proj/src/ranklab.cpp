#include "ntpcap/ranklab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "ntpcap/precision.hpp"
#include "ntpcap/rng.hpp"

namespace ntpcap {

std::size_t polynomial_rank_oracle(std::size_t m, std::size_t n, const std::vector<std::size_t>& K) {
  require(!K.empty(), "index set K must be nonempty");
  const std::set<std::size_t> distinct(K.begin(), K.end());
  return std::min({m, n, distinct.size()});
}

std::size_t analytic_rank_oracle(std::size_t m, std::size_t n) { return std::min(m, n); }

std::size_t exact_rank(std::vector<std::vector<Rational>> a) {
  if (a.empty()) {
    return 0;
  }
  const std::size_t rows = a.size();
  const std::size_t cols = a.front().size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot][c] == 0) {
      ++pivot;
    }
    if (pivot == rows) {
      continue;
    }
    std::swap(a[pivot], a[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (a[r][c] == 0) {
        continue;
      }
      const Rational f = a[r][c] / a[rank][c];
      for (std::size_t k = c; k < cols; ++k) {
        a[r][k] -= f * a[rank][k];
      }
    }
    ++rank;
  }
  return rank;
}

std::vector<std::vector<Rational>> exact_polynomial_feature_matrix(const std::vector<long>& a, const std::vector<long>& b,
                                                                   const std::vector<long>& coeffs) {
  std::vector<std::vector<Rational>> out(a.size(), std::vector<Rational>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const Rational x = Rational(a[i]) * Rational(b[j]);
      Rational acc = 0;
      for (std::size_t k = coeffs.size(); k-- > 0;) {
        acc = acc * x + Rational(coeffs[k]);
      }
      out[i][j] = acc;
    }
  }
  return out;
}

double RankExperimentReport::agreement_rate() const {
  if (trials.empty()) {
    return 0.0;
  }
  const auto ok = std::count_if(trials.begin(), trials.end(), [](const RankTrial& t) { return t.agree; });
  return static_cast<double>(ok) / static_cast<double>(trials.size());
}

VectorXd default_b(std::size_t n) {
  VectorXd b(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    b[static_cast<Eigen::Index>(j)] = static_cast<double>(j + 1) / static_cast<double>(n);
  }
  return b;
}

namespace {

template <class Real>
RankTrial measure(const VectorXd& a, const VectorXd& b, const ActivationSpec& psi, double tol, std::size_t predicted) {
  const Vec<Real> ar = a.unaryExpr([](double x) { return Real(x); });
  const Vec<Real> br = b.unaryExpr([](double x) { return Real(x); });
  const Mat<Real> f = feature_matrix<Real>(ar, br, psi);
  const Real t = scaled_tolerance<Real>(tol);
  RankTrial out;
  out.predicted = predicted;
  out.measured_rank = numeric_rank<Real>(f, t);
  out.measured_kruskal = kruskal_rank<Real>(f, t);
  out.agree = out.measured_rank == predicted && out.measured_kruskal == predicted;
  const Vec<Real> s = singular_values<Real>(f);
  const auto r = static_cast<Eigen::Index>(predicted);
  if (r == 0 || r >= s.size()) {
    out.sv_gap = INFINITY;
  } else if (s[r] == Real(0)) {
    out.sv_gap = INFINITY;
  } else {
    out.sv_gap = to_double(Real(s[r - 1] / s[r]));
  }
  return out;
}

RankTrial measure_at(unsigned digits, const VectorXd& a, const VectorXd& b, const ActivationSpec& psi, double tol,
                     std::size_t predicted) {
  switch (digits) {
    case 0: return measure<double>(a, b, psi, tol, predicted);
    case 50: return measure<Real50>(a, b, psi, tol, predicted);
    case 100: return measure<Real100>(a, b, psi, tol, predicted);
    case 200: return measure<Real200>(a, b, psi, tol, predicted);
    case 400: return measure<Real400>(a, b, psi, tol, predicted);
    default: fail(Errc::invalid_argument, "supported precisions: 0 (double), 50, 100, 200, 400 digits");
  }
}

int bits_at(unsigned digits) {
  switch (digits) {
    case 0: return mantissa_bits<double>();
    case 50: return mantissa_bits<Real50>();
    case 100: return mantissa_bits<Real100>();
    case 200: return mantissa_bits<Real200>();
    default: return mantissa_bits<Real400>();
  }
}

}  // namespace

RankExperimentReport rank_experiment(const ActivationSpec& psi, std::size_t m, std::size_t n, const VectorXd& b,
                                     const RankExperimentOptions& opts) {
  require(m >= 1 && n >= 1, "m and n must be positive");
  require(static_cast<std::size_t>(b.size()) == n, "b must have n entries");
  std::vector<double> sorted(b.data(), b.data() + b.size());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t j = 0; j < n; ++j) {
    if (sorted[j] == 0.0 || (j > 0 && sorted[j] == sorted[j - 1])) {
      fail(Errc::degenerate_b, "degenerate b: entries must be nonzero and distinct");
    }
  }
  RankExperimentReport report;
  report.psi = psi.name();
  report.m = m;
  report.n = n;
  report.tolerance = opts.tol;
  report.precision_bits = bits_at(opts.digits);
  if (psi.is_polynomial()) {
    report.predicted = polynomial_rank_oracle(m, n, psi.nonzero_indices(kTaylorOrder));
  } else {
    report.predicted = analytic_rank_oracle(m, n);
  }
  double range = opts.a_range;
  if (range <= 0.0) {
    range = psi.entire() ? 1.0 : psi.rho() / b.cwiseAbs().maxCoeff();
  }
  for (std::size_t t = 0; t < opts.trials; ++t) {
    const std::uint64_t seed = opts.seed + t;
    Philox rng(seed);
    VectorXd a(static_cast<Eigen::Index>(m));
    for (auto& v : a) {
      v = rng.uniform(-range, range);
    }
    RankTrial trial = measure_at(opts.digits, a, b, psi, opts.tol, report.predicted);
    trial.seed = seed;
    report.trials.push_back(trial);
  }
  return report;
}

void write_rank_csv_header(std::ostream& out) {
  out << "psi,m,n,predicted,measured_rank,measured_kruskal,agree,seed\n";
}

void write_rank_csv(std::ostream& out, const RankExperimentReport& report) {
  for (const auto& t : report.trials) {
    out << report.psi << ',' << report.m << ',' << report.n << ',' << t.predicted << ',' << t.measured_rank << ','
        << t.measured_kruskal << ',' << (t.agree ? 1 : 0) << ',' << t.seed << '\n';
  }
}

std::vector<Context> enumerate_contexts(std::size_t omega, std::size_t max_len) {
  require(omega >= 1, "omega must be positive");
  std::size_t total = 0;
  std::size_t level = 1;
  for (std::size_t t = 1; t <= max_len; ++t) {
    level *= omega;
    total += level;
    if (total > kInjectivityMaxContexts) {
      fail(Errc::enumeration_bound_exceeded, "enumeration bound exceeded");
    }
  }
  std::vector<Context> out;
  out.reserve(total);
  std::vector<Context> frontier{Context{}};
  for (std::size_t t = 1; t <= max_len; ++t) {
    std::vector<Context> next;
    next.reserve(frontier.size() * omega);
    for (const auto& c : frontier) {
      for (std::size_t g = 1; g <= omega; ++g) {
        Context e = c;
        e.push_back(static_cast<TokenId>(g));
        next.push_back(std::move(e));
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> collision_pairs(const std::vector<double>& values, double tol) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size() && values[order[j]] - values[order[i]] <= tol; ++j) {
      out.emplace_back(std::min(order[i], order[j]), std::max(order[i], order[j]));
    }
  }
  return out;
}

InjectivityReport injectivity_test(Variant variant, std::size_t omega, std::size_t max_len, const VectorXd& z,
                                   const VectorXd& u, double tol) {
  require(static_cast<std::size_t>(z.size()) == omega, "z must have omega entries");
  require(static_cast<std::size_t>(u.size()) >= max_len, "u must have at least T entries");
  const auto contexts = enumerate_contexts(omega, max_len);
  InjectivityReport r;
  r.omega = omega;
  r.max_len = max_len;
  r.variant = variant;
  r.num_contexts = contexts.size();
  r.tol = tol;
  std::vector<double> f;
  f.reserve(contexts.size());
  for (const auto& c : contexts) {
    f.push_back(scalar_feature<double>(variant, z, u, c));
  }
  r.min_abs = INFINITY;
  for (double v : f) {
    r.min_abs = std::min(r.min_abs, std::abs(v));
    r.zeros += std::abs(v) <= tol ? 1 : 0;
  }
  std::sort(f.begin(), f.end());
  r.min_gap = INFINITY;
  for (std::size_t i = 1; i < f.size(); ++i) {
    const double gap = f[i] - f[i - 1];
    r.min_gap = std::min(r.min_gap, gap);
    r.collisions += gap <= tol ? 1 : 0;
  }
  r.pass = r.min_abs > tol && r.min_gap > tol;
  return r;
}

}  // namespace ntpcap
