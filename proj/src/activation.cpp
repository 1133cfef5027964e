#include "ntpcap/activation.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ntpcap/error.hpp"

namespace ntpcap {

namespace {

// tanh' = 1 - tanh^2 gives (k+1) a_{k+1} = [k == 0] - sum_{i+j=k} a_i a_j.
std::vector<double> tanh_series(std::size_t order) {
  std::vector<double> a(order + 1, 0.0);
  for (std::size_t k = 0; k < order; ++k) {
    double conv = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
      conv += a[i] * a[k - i];
    }
    a[k + 1] = ((k == 0 ? 1.0 : 0.0) - conv) / static_cast<double>(k + 1);
  }
  return a;
}

}  // namespace

ActivationSpec::ActivationSpec(ActivationKind kind, std::string name, double rho)
    : kind_(kind), name_(std::move(name)), rho_(rho) {}

ActivationSpec ActivationSpec::tanh() {
  ActivationSpec s(ActivationKind::tanh, "tanh", std::numbers::pi / 2);
  s.coeffs_ = tanh_series(kTaylorOrder);
  return s;
}

ActivationSpec ActivationSpec::logistic() {
  // sigma(x) = 1/2 + tanh(x/2)/2; nearest complex singularities at +-i pi.
  ActivationSpec s(ActivationKind::logistic, "logistic", std::numbers::pi);
  const auto t = tanh_series(kTaylorOrder);
  s.coeffs_.resize(kTaylorOrder + 1);
  for (std::size_t k = 0; k <= kTaylorOrder; ++k) {
    s.coeffs_[k] = t[k] / std::ldexp(1.0, static_cast<int>(k) + 1);
  }
  s.coeffs_[0] = 0.5;
  return s;
}

ActivationSpec ActivationSpec::arctan() {
  ActivationSpec s(ActivationKind::arctan, "arctan", 1.0);
  s.coeffs_.assign(kTaylorOrder + 1, 0.0);
  for (std::size_t k = 1; k <= kTaylorOrder; k += 2) {
    s.coeffs_[k] = ((k / 2) % 2 == 0 ? 1.0 : -1.0) / static_cast<double>(k);
  }
  return s;
}

ActivationSpec ActivationSpec::gelu() {
  // x Phi(x) = x/2 + sum_n (-1)^n x^(2n+2) / (sqrt(2 pi) 2^n n! (2n+1)).
  ActivationSpec s(ActivationKind::gelu, "gelu", kInfiniteRadius);
  s.coeffs_.assign(kTaylorOrder + 1, 0.0);
  s.coeffs_[1] = 0.5;
  double denom = std::sqrt(2.0 * std::numbers::pi);  // sqrt(2 pi) 2^n n!
  for (std::size_t n = 0; 2 * n + 2 <= kTaylorOrder; ++n) {
    if (n > 0) {
      denom *= 2.0 * static_cast<double>(n);
    }
    s.coeffs_[2 * n + 2] = (n % 2 == 0 ? 1.0 : -1.0) / (denom * static_cast<double>(2 * n + 1));
  }
  return s;
}

ActivationSpec ActivationSpec::polynomial(std::vector<double> coeffs) {
  require(!coeffs.empty(), "polynomial needs at least one coefficient");
  std::ostringstream name;
  name << "poly:";
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    name << (k ? "," : "") << coeffs[k];
  }
  ActivationSpec s(ActivationKind::polynomial, name.str(), kInfiniteRadius);
  s.coeffs_ = std::move(coeffs);
  return s;
}

ActivationSpec ActivationSpec::from_name(std::string_view name) {
  if (name == "tanh") {
    return tanh();
  }
  if (name == "logistic" || name == "sigmoid") {
    return logistic();
  }
  if (name == "arctan" || name == "atan") {
    return arctan();
  }
  if (name == "gelu") {
    return gelu();
  }
  if (name.starts_with("poly:")) {
    std::vector<double> coeffs;
    std::string rest(name.substr(5));
    std::istringstream in(rest);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        std::size_t used = 0;
        coeffs.push_back(std::stod(item, &used));
        if (used != item.size()) {
          throw std::invalid_argument(item);
        }
      } catch (const std::exception&) {
        fail(Errc::invalid_argument, "bad polynomial coefficient '" + item + "'");
      }
    }
    return polynomial(std::move(coeffs));
  }
  fail(Errc::invalid_argument, "unknown activation '" + std::string(name) + "'");
}

double ActivationSpec::derivative(double x) const {
  switch (kind_) {
    case ActivationKind::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::logistic: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case ActivationKind::arctan:
      return 1.0 / (1.0 + x * x);
    case ActivationKind::gelu:
      return 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2)) + x * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    case ActivationKind::polynomial: {
      double acc = 0.0;
      for (std::size_t k = coeffs_.size(); k-- > 1;) {
        acc = acc * x + static_cast<double>(k) * coeffs_[k];
      }
      return acc;
    }
  }
  return 0.0;
}

double ActivationSpec::taylor_coefficient(std::size_t k) const {
  if (k < coeffs_.size()) {
    return coeffs_[k];
  }
  if (is_polynomial()) {
    return 0.0;
  }
  fail(Errc::invalid_argument, "Taylor coefficient order beyond " + std::to_string(kTaylorOrder));
}

double ActivationSpec::taylor_sum(double x, std::size_t order) const {
  double acc = 0.0;
  for (std::size_t k = order + 1; k-- > 0;) {
    acc = acc * (x - eta_) + taylor_coefficient(k);
  }
  return acc;
}

std::vector<std::size_t> ActivationSpec::nonzero_indices(std::size_t k_max) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k <= k_max; ++k) {
    if (is_polynomial() && k >= coeffs_.size()) {
      break;
    }
    const double c = taylor_coefficient(k);
    if (kind_ == ActivationKind::gelu) {
      // Threshold on the derivative k! c_k.
      if (std::abs(c) * std::exp(std::lgamma(static_cast<double>(k) + 1.0)) > 1e-12) {
        out.push_back(k);
      }
    } else if (c != 0.0) {
      out.push_back(k);
    }
  }
  return out;
}

}  // namespace ntpcap
