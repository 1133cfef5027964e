#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ntpcap/precision.hpp"

namespace ntpcap {

/// Radius used for activations analytic on the whole real line.
inline constexpr double kInfiniteRadius = 1e15;

enum class ActivationKind { tanh, logistic, arctan, gelu, polynomial };

/// Activation psi with its Taylor data at the analyticity point eta.
class ActivationSpec {
 public:
  static ActivationSpec tanh();
  static ActivationSpec logistic();
  static ActivationSpec arctan();
  static ActivationSpec gelu();
  /// psi(x) = sum_k coeffs[k] x^k, expanded at eta = 0.
  static ActivationSpec polynomial(std::vector<double> coeffs);
  /// "tanh", "logistic" (or "sigmoid"), "arctan", "gelu", or "poly:c0,c1,...".
  static ActivationSpec from_name(std::string_view name);

  ActivationKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double eta() const { return eta_; }
  double rho() const { return rho_; }
  bool entire() const { return rho_ >= kInfiniteRadius; }
  bool is_polynomial() const { return kind_ == ActivationKind::polynomial; }

  template <class Real>
  Real eval(const Real& x) const;
  double operator()(double x) const { return eval<double>(x); }
  double derivative(double x) const;

  /// c_k = psi^(k)(eta) / k!.
  double taylor_coefficient(std::size_t k) const;
  /// Partial Taylor sum about eta with terms 0..order.
  double taylor_sum(double x, std::size_t order) const;
  /// Indices k <= k_max with c_k != 0. For gelu, k with |k! c_k| > 1e-12.
  std::vector<std::size_t> nonzero_indices(std::size_t k_max) const;

 private:
  ActivationSpec(ActivationKind kind, std::string name, double rho);

  ActivationKind kind_;
  std::string name_;
  double eta_ = 0.0;
  double rho_;
  std::vector<double> coeffs_;  // Taylor coefficients, precomputed up to kTaylorOrder
};

inline constexpr std::size_t kTaylorOrder = 64;

template <class Real>
Real ActivationSpec::eval(const Real& x) const {
  using std::atan;
  using std::erf;
  using std::exp;
  using std::sqrt;
  using std::tanh;
  switch (kind_) {
    case ActivationKind::tanh:
      return tanh(x);
    case ActivationKind::logistic:
      return Real(1) / (Real(1) + exp(-x));
    case ActivationKind::arctan:
      return atan(x);
    case ActivationKind::gelu:
      return x * (Real(1) + erf(x / sqrt(Real(2)))) / Real(2);
    case ActivationKind::polynomial: {
      Real acc(0);
      for (std::size_t k = coeffs_.size(); k-- > 0;) {
        acc = acc * x + Real(coeffs_[k]);
      }
      return acc;
    }
  }
  return Real(0);
}

}  // namespace ntpcap
