#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ntpcap/activation.hpp"
#include "ntpcap/error.hpp"
#include "ntpcap/linalg.hpp"
#include "ntpcap/model.hpp"

namespace ntpcap {

inline constexpr std::size_t kKruskalMaxColumns = 12;
inline constexpr std::size_t kInjectivityMaxContexts = 1000000;

/// (i, j) -> psi(a_i b_j).
template <class Real>
Mat<Real> feature_matrix(const Vec<Real>& a, const Vec<Real>& b, const ActivationSpec& psi) {
  Mat<Real> out(a.size(), b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      out(i, j) = psi.eval<Real>(a[i] * b[j]);
    }
  }
  return out;
}

/// Number of singular values above tol * sigma_max.
template <class Real>
std::size_t numeric_rank(const Mat<Real>& a, const Real& tol) {
  const Vec<Real> s = singular_values<Real>(a);
  if (s.size() == 0 || s[0] == Real(0)) {
    return 0;
  }
  const Real cut = tol * s[0];
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    r += s[i] > cut ? 1 : 0;
  }
  return r;
}

inline std::size_t numeric_rank(const MatrixXd& a, double tol = 1e-10) { return numeric_rank<double>(a, tol); }

namespace detail {

template <class Real>
bool columns_independent(const Mat<Real>& a, const std::vector<Eigen::Index>& cols, const Real& cut) {
  if (static_cast<Eigen::Index>(cols.size()) > a.rows()) {
    return false;
  }
  Mat<Real> sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    sub.col(static_cast<Eigen::Index>(k)) = a.col(cols[k]);
  }
  const Vec<Real> s = singular_values<Real>(sub);
  return s[s.size() - 1] > cut;
}

}  // namespace detail

/// Largest k such that every k columns are independent: each k-column
/// submatrix must have its smallest singular value above tol * sigma_max(A).
template <class Real>
std::size_t kruskal_rank(const Mat<Real>& a, const Real& tol) {
  const auto n = static_cast<std::size_t>(a.cols());
  if (n > kKruskalMaxColumns) {
    fail(Errc::enumeration_bound_exceeded, "enumeration bound exceeded: " + std::to_string(n) + " columns");
  }
  const Vec<Real> s = singular_values<Real>(a);
  if (s.size() == 0 || s[0] == Real(0)) {
    return 0;
  }
  const Real cut = tol * s[0];
  const std::size_t top = std::min<std::size_t>(n, static_cast<std::size_t>(a.rows()));
  // If every k-subset is independent so is every smaller subset, so the
  // first k (from the top) that passes is the answer.
  for (std::size_t k = top; k >= 1; --k) {
    std::vector<Eigen::Index> cols(k);
    for (std::size_t i = 0; i < k; ++i) {
      cols[i] = static_cast<Eigen::Index>(i);
    }
    bool all = true;
    while (all) {
      all = detail::columns_independent<Real>(a, cols, cut);
      // Next combination in lexicographic order.
      std::size_t i = k;
      while (i > 0 && cols[i - 1] == static_cast<Eigen::Index>(n - k + i - 1)) {
        --i;
      }
      if (i == 0) {
        break;
      }
      ++cols[i - 1];
      for (std::size_t j = i; j < k; ++j) {
        cols[j] = cols[j - 1] + 1;
      }
    }
    if (all) {
      return k;
    }
  }
  return 0;
}

inline std::size_t kruskal_rank(const MatrixXd& a, double tol = 1e-10) { return kruskal_rank<double>(a, tol); }

std::size_t polynomial_rank_oracle(std::size_t m, std::size_t n, const std::vector<std::size_t>& K);
std::size_t analytic_rank_oracle(std::size_t m, std::size_t n);

/// Exact rank over the rationals by fraction-free elimination.
using Rational = boost::multiprecision::cpp_rational;
std::size_t exact_rank(std::vector<std::vector<Rational>> a);
/// psi(a_i b_j) for psi(x) = sum_k coeffs[k] x^k, exactly.
std::vector<std::vector<Rational>> exact_polynomial_feature_matrix(const std::vector<long>& a, const std::vector<long>& b,
                                                                   const std::vector<long>& coeffs);

struct RankTrial {
  std::uint64_t seed = 0;
  std::size_t predicted = 0;
  std::size_t measured_rank = 0;
  std::size_t measured_kruskal = 0;
  bool agree = false;
  double sv_gap = 0.0;  // sigma_r / sigma_{r+1} at the predicted cut, inf when r = min(m, n)
};

struct RankExperimentReport {
  std::string psi;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t predicted = 0;
  double tolerance = 0.0;
  int precision_bits = 0;
  std::vector<RankTrial> trials;

  double agreement_rate() const;
};

struct RankExperimentOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  double tol = 1e-10;     // relative, at double precision; scaled with the working precision
  unsigned digits = 50;   // 0 keeps the measurement in double precision
  /// Half-width of the uniform distribution of a. 0: the largest value with
  /// |a_i b_j| < rho for analytic psi, 1 for polynomials.
  double a_range = 0.0;
};

/// Default b for analytic experiments: (1, ..., n) / n.
VectorXd default_b(std::size_t n);

/// Samples a, builds psi(a b^T) and compares numeric and Kruskal rank with the
/// rank oracle (min{m, n, |K|} for polynomials, min{m, n} otherwise).
RankExperimentReport rank_experiment(const ActivationSpec& psi, std::size_t m, std::size_t n, const VectorXd& b,
                                     const RankExperimentOptions& opts);

void write_rank_csv_header(std::ostream& out);
void write_rank_csv(std::ostream& out, const RankExperimentReport& report);

struct InjectivityReport {
  std::size_t omega = 0;
  std::size_t max_len = 0;
  Variant variant = Variant::self_attention;
  std::size_t num_contexts = 0;
  double min_abs = 0.0;
  double min_gap = 0.0;
  std::size_t zeros = 0;       // contexts with |f| <= tol
  std::size_t collisions = 0;  // adjacent sorted pairs with gap <= tol
  double tol = 0.0;
  bool pass = false;
};

/// Every context of length 1..T over [omega].
std::vector<Context> enumerate_contexts(std::size_t omega, std::size_t max_len);

/// Evaluates f on every context of length 1..T and checks that the values are
/// nonzero and pairwise distinct beyond tol.
InjectivityReport injectivity_test(Variant variant, std::size_t omega, std::size_t max_len, const VectorXd& z,
                                   const VectorXd& u, double tol);

/// Pairs (i, j), i < j, with |values_i - values_j| <= tol.
std::vector<std::pair<std::size_t, std::size_t>> collision_pairs(const std::vector<double>& values, double tol);

}  // namespace ntpcap
