#include "ntpcap/model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace ntpcap {

std::vector<double> softmax(const std::vector<double>& x) {
  const VectorXd v = Eigen::Map<const VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  const VectorXd s = softmax<double>(v);
  return {s.data(), s.data() + s.size()};
}

Variant parse_variant(std::string_view name) {
  if (name == "self-attention" || name == "attention" || name == "self_attention") {
    return Variant::self_attention;
  }
  if (name == "token-average" || name == "token_average") {
    return Variant::token_average;
  }
  fail(Errc::invalid_argument, "unknown variant '" + std::string(name) + "'");
}

std::string_view variant_name(Variant v) {
  return v == Variant::self_attention ? "self-attention" : "token-average";
}

TransformerParams TransformerParams::zeros(const Dims& dims, const ModelOptions& options) {
  require(dims.d >= 1 && dims.m0 >= 1 && dims.d0 >= 1 && dims.dr >= 1 && dims.m >= 1, "dimensions must be positive");
  require(dims.omega >= 1, "vocabulary size must be positive");
  TransformerParams p;
  p.dims = dims;
  p.options = options;
  const auto d = static_cast<Eigen::Index>(dims.d);
  const auto d0 = static_cast<Eigen::Index>(dims.d0);
  const auto dr = static_cast<Eigen::Index>(dims.dr);
  const auto m = static_cast<Eigen::Index>(dims.m);
  const auto omega = static_cast<Eigen::Index>(dims.omega);
  p.Z = MatrixXd::Zero(d, omega);
  p.U = options.sinusoidal_positions ? sinusoidal_positions(dims.d, dims.max_len)
                                     : MatrixXd::Zero(d, static_cast<Eigen::Index>(dims.max_len));
  p.W1.assign(dims.m0, MatrixXd::Zero(d, dr));
  p.W2.assign(dims.m0, MatrixXd::Zero(d, dr));
  p.W3.assign(dims.m0, MatrixXd::Zero(d, d0));
  p.W0 = MatrixXd::Zero(static_cast<Eigen::Index>(dims.m0) * d0, d);
  p.W = MatrixXd::Zero(d, m);
  p.b = VectorXd::Zero(m);
  p.V = MatrixXd::Zero(m, omega);
  p.empty_logits = VectorXd::Zero(omega - 1);
  if (options.attention_bias) {
    p.bq.assign(dims.m0, VectorXd::Zero(dr));
    p.bk.assign(dims.m0, VectorXd::Zero(dr));
    p.bv.assign(dims.m0, VectorXd::Zero(d0));
    p.bo = VectorXd::Zero(d);
  }
  if (options.output_bias) {
    p.c = VectorXd::Zero(omega);
  }
  return p;
}

void TransformerParams::check_shapes() const {
  const auto d = static_cast<Eigen::Index>(dims.d);
  const auto d0 = static_cast<Eigen::Index>(dims.d0);
  const auto dr = static_cast<Eigen::Index>(dims.dr);
  const auto m = static_cast<Eigen::Index>(dims.m);
  const auto omega = static_cast<Eigen::Index>(dims.omega);
  auto shape = [](const MatrixXd& a, Eigen::Index r, Eigen::Index c, const char* name) {
    if (a.rows() != r || a.cols() != c) {
      fail(Errc::invalid_argument, std::string("parameter ") + name + " has the wrong shape");
    }
  };
  auto len = [](const VectorXd& a, Eigen::Index n, const char* name) {
    if (a.size() != n) {
      fail(Errc::invalid_argument, std::string("parameter ") + name + " has the wrong length");
    }
  };
  shape(Z, d, omega, "Z");
  shape(U, d, static_cast<Eigen::Index>(dims.max_len), "U");
  require(W1.size() == dims.m0 && W2.size() == dims.m0 && W3.size() == dims.m0, "one attention triple per head");
  for (std::size_t r = 0; r < dims.m0; ++r) {
    shape(W1[r], d, dr, "W1");
    shape(W2[r], d, dr, "W2");
    shape(W3[r], d, d0, "W3");
  }
  shape(W0, static_cast<Eigen::Index>(dims.m0) * d0, d, "W0");
  shape(W, d, m, "W");
  len(b, m, "b");
  shape(V, m, omega, "V");
  len(empty_logits, omega - 1, "empty_logits");
  if (options.attention_bias) {
    require(bq.size() == dims.m0 && bk.size() == dims.m0 && bv.size() == dims.m0, "one bias triple per head");
    for (std::size_t r = 0; r < dims.m0; ++r) {
      len(bq[r], dr, "bq");
      len(bk[r], dr, "bk");
      len(bv[r], d0, "bv");
    }
    len(bo, d, "bo");
  }
  if (options.output_bias) {
    len(c, omega, "c");
  }
}

std::size_t TransformerParams::num_entries() const {
  auto n = [](const auto& a) { return static_cast<std::size_t>(a.size()); };
  std::size_t total = n(Z) + n(W0) + n(W) + n(b) + n(V) + n(empty_logits);
  if (!options.sinusoidal_positions) {
    total += n(U);
  }
  for (std::size_t r = 0; r < W1.size(); ++r) {
    total += n(W1[r]) + n(W2[r]) + n(W3[r]);
  }
  for (std::size_t r = 0; r < bq.size(); ++r) {
    total += n(bq[r]) + n(bk[r]) + n(bv[r]);
  }
  return total + n(bo) + n(c);
}

MatrixXd sinusoidal_positions(std::size_t d, std::size_t max_len) {
  MatrixXd u(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(max_len));
  for (std::size_t t = 0; t < max_len; ++t) {
    for (std::size_t i = 0; i < d; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(d));
      const double angle = static_cast<double>(t) * freq;
      u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = i % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return u;
}

VectorXd attention_output(const TransformerParams& p, ContextView ctx) {
  const auto& dm = p.dims;
  detail::check_context(dm.omega, dm.max_len, ctx);
  const auto tau = static_cast<Eigen::Index>(ctx.size());
  MatrixXd X(static_cast<Eigen::Index>(dm.d), tau);
  for (Eigen::Index t = 0; t < tau; ++t) {
    X.col(t) = p.Z.col(ctx[static_cast<std::size_t>(t)] - 1) + p.U.col(t);
  }
  const VectorXd last = X.col(tau - 1);
  const auto d0 = static_cast<Eigen::Index>(dm.d0);
  VectorXd heads(static_cast<Eigen::Index>(dm.m0) * d0);
  for (std::size_t r = 0; r < dm.m0; ++r) {
    MatrixXd K = p.W1[r].transpose() * X;
    VectorXd q = p.W2[r].transpose() * last;
    MatrixXd Vh = p.W3[r].transpose() * X;
    if (p.options.attention_bias) {
      K.colwise() += p.bk[r];
      q += p.bq[r];
      Vh.colwise() += p.bv[r];
    }
    const VectorXd a = softmax<double>(K.transpose() * q);
    heads.segment(static_cast<Eigen::Index>(r) * d0, d0) = Vh * a;
  }
  VectorXd out = p.W0.transpose() * heads;
  if (p.options.attention_bias) {
    out += p.bo;
  }
  if (p.options.skip_connection) {
    out += last;
  }
  return out;
}

VectorXd transformer_logits(const TransformerParams& p, const ActivationSpec& psi, ContextView ctx) {
  if (ctx.empty()) {
    return empty_context_logits<double>(p.empty_logits);
  }
  const VectorXd x = attention_output(p, ctx);
  VectorXd pre = p.W.transpose() * x + p.b;
  VectorXd h;
  if (p.options.hidden == HiddenNonlinearity::softmax) {
    h = softmax<double>(pre);
  } else {
    h = pre.unaryExpr([&](double v) { return psi(v); });
  }
  VectorXd logits = p.V.transpose() * h;
  if (p.options.output_bias) {
    logits += p.c;
  }
  return logits;
}

std::vector<double> transformer_forward(const TransformerParams& p, const ActivationSpec& psi, ContextView ctx) {
  const VectorXd s = softmax<double>(transformer_logits(p, psi, ctx));
  return {s.data(), s.data() + s.size()};
}

TransformerParams lift_scalar(const ScalarParams& sp, std::size_t d, std::size_t m0, std::size_t d0, std::size_t dr) {
  Dims dims;
  dims.d = d;
  dims.m0 = m0;
  dims.d0 = d0;
  dims.dr = dr;
  dims.m = sp.m();
  dims.omega = sp.omega();
  dims.max_len = sp.max_len();
  require(static_cast<std::size_t>(sp.empty_logits.size()) + 1 == dims.omega, "empty_logits must have omega - 1 entries");
  TransformerParams p = TransformerParams::zeros(dims);
  const double dd = static_cast<double>(d);
  const auto ones = [](std::size_t n) { return VectorXd::Ones(static_cast<Eigen::Index>(n)); };
  p.Z = ones(d) * sp.z.transpose() / std::sqrt(dd);
  p.U = ones(d) * sp.u.transpose() / std::sqrt(dd);
  for (std::size_t r = 0; r < m0; ++r) {
    p.W1[r] = ones(d) * ones(dr).transpose() / std::sqrt(dd * static_cast<double>(dr));
    p.W2[r] = p.W1[r];
    p.W3[r] = ones(d) * ones(d0).transpose() / std::sqrt(dd * static_cast<double>(d0));
  }
  p.W0 = ones(m0 * d0) * ones(d).transpose() / (static_cast<double>(m0) * std::sqrt(dd * static_cast<double>(d0)));
  p.W = ones(d) * sp.w.transpose() / std::sqrt(dd);
  p.b = sp.b;
  p.V = sp.V;
  p.empty_logits = sp.empty_logits;
  return p;
}

std::uint64_t param_count(const Dims& dims) {
  const std::uint64_t omega = dims.omega;
  const std::uint64_t m = dims.m;
  const std::uint64_t d = dims.d;
  return omega * m + m * (d + 1) + 2 * dims.m0 * (dims.d0 + dims.dr) * d + (omega + dims.max_len) * d;
}

Dims experiment_dims(std::size_t omega, std::size_t m, std::size_t max_len) {
  Dims dims;
  dims.d = 16;
  dims.m0 = 1;
  dims.d0 = 16;
  dims.dr = 16;
  dims.m = m;
  dims.omega = omega;
  dims.max_len = max_len;
  return dims;
}

ModelOptions experiment_options() {
  ModelOptions o;
  o.attention_bias = true;
  o.output_bias = true;
  o.sinusoidal_positions = true;
  return o;
}

std::uint64_t experiment_param_count(std::size_t omega, std::size_t m) {
  Dims dims = experiment_dims(omega, m, 0);
  const std::uint64_t d = dims.d;
  const std::uint64_t heads = dims.m0;
  std::uint64_t k = param_count(dims);
  k += heads * (2 * dims.dr + dims.d0) + d;  // attention projection biases and W0 bias
  k += omega;                                // output-layer bias
  return k;
}

CapacityBounds capacity_bounds(double k, std::size_t omega, std::size_t m) {
  if (omega < 2) {
    fail(Errc::invalid_argument, "capacity bounds need omega >= 2");
  }
  require(m >= 1, "m must be positive");
  const double w1 = static_cast<double>(omega - 1);
  CapacityBounds out;
  out.general_upper = k / w1;
  out.empirical_upper = (2.0 + 1.0 / w1) * k / w1 + 2.0;
  out.lower = static_cast<double>(m);
  out.ratio = out.general_upper / out.lower;
  return out;
}

namespace {

nlohmann::ordered_json matrix_json(const MatrixXd& a) {
  nlohmann::ordered_json j;
  j["shape"] = {a.rows(), a.cols()};
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(a.size()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      data.push_back(a(i, k));
    }
  }
  j["data"] = std::move(data);
  return j;
}

MatrixXd matrix_from(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
  const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 2 || shape[0] != rows || shape[1] != cols || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    fail(Errc::parse, "array " + name + " has the wrong shape");
  }
  MatrixXd a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) {
      a(i, k) = data[static_cast<std::size_t>(i * cols + k)];
    }
  }
  return a;
}

}  // namespace

std::string params_to_json(const TransformerParams& p) {
  nlohmann::ordered_json j;
  const auto& d = p.dims;
  j["dims"] = {{"d", d.d}, {"m0", d.m0}, {"d0", d.d0}, {"dr", d.dr}, {"m", d.m}, {"omega", d.omega}, {"max_len", d.max_len}};
  j["options"] = {{"skip_connection", p.options.skip_connection},
                  {"attention_bias", p.options.attention_bias},
                  {"output_bias", p.options.output_bias},
                  {"sinusoidal_positions", p.options.sinusoidal_positions},
                  {"hidden", p.options.hidden == HiddenNonlinearity::softmax ? "softmax" : "activation"}};
  nlohmann::ordered_json arrays;
  arrays["Z"] = matrix_json(p.Z);
  arrays["U"] = matrix_json(p.U);
  for (std::size_t r = 0; r < d.m0; ++r) {
    const auto s = std::to_string(r);
    arrays["W1_" + s] = matrix_json(p.W1[r]);
    arrays["W2_" + s] = matrix_json(p.W2[r]);
    arrays["W3_" + s] = matrix_json(p.W3[r]);
    if (p.options.attention_bias) {
      arrays["bq_" + s] = matrix_json(p.bq[r]);
      arrays["bk_" + s] = matrix_json(p.bk[r]);
      arrays["bv_" + s] = matrix_json(p.bv[r]);
    }
  }
  arrays["W0"] = matrix_json(p.W0);
  if (p.options.attention_bias) {
    arrays["bo"] = matrix_json(p.bo);
  }
  arrays["W"] = matrix_json(p.W);
  arrays["b"] = matrix_json(p.b);
  arrays["V"] = matrix_json(p.V);
  if (p.options.output_bias) {
    arrays["c"] = matrix_json(p.c);
  }
  arrays["empty_logits"] = matrix_json(p.empty_logits);
  j["arrays"] = std::move(arrays);
  return j.dump();
}

TransformerParams params_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const auto& jd = j.at("dims");
    Dims d;
    d.d = jd.at("d");
    d.m0 = jd.at("m0");
    d.d0 = jd.at("d0");
    d.dr = jd.at("dr");
    d.m = jd.at("m");
    d.omega = jd.at("omega");
    d.max_len = jd.at("max_len");
    ModelOptions o;
    if (j.contains("options")) {
      const auto& jo = j.at("options");
      o.skip_connection = jo.value("skip_connection", false);
      o.attention_bias = jo.value("attention_bias", false);
      o.output_bias = jo.value("output_bias", false);
      o.sinusoidal_positions = jo.value("sinusoidal_positions", false);
      o.hidden = jo.value("hidden", std::string("activation")) == "softmax" ? HiddenNonlinearity::softmax
                                                                          : HiddenNonlinearity::activation;
    }
    TransformerParams p = TransformerParams::zeros(d, o);
    const auto& a = j.at("arrays");
    auto mat = [&](const std::string& name, MatrixXd& dst) { dst = matrix_from(a.at(name), dst.rows(), dst.cols(), name); };
    auto vec = [&](const std::string& name, VectorXd& dst) { dst = matrix_from(a.at(name), dst.size(), 1, name); };
    mat("Z", p.Z);
    mat("U", p.U);
    for (std::size_t r = 0; r < d.m0; ++r) {
      const auto s = std::to_string(r);
      mat("W1_" + s, p.W1[r]);
      mat("W2_" + s, p.W2[r]);
      mat("W3_" + s, p.W3[r]);
      if (o.attention_bias) {
        vec("bq_" + s, p.bq[r]);
        vec("bk_" + s, p.bk[r]);
        vec("bv_" + s, p.bv[r]);
      }
    }
    mat("W0", p.W0);
    if (o.attention_bias) {
      vec("bo", p.bo);
    }
    mat("W", p.W);
    vec("b", p.b);
    mat("V", p.V);
    if (o.output_bias) {
      vec("c", p.c);
    }
    vec("empty_logits", p.empty_logits);
    return p;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, std::string("bad parameter JSON: ") + e.what());
  }
}

}  // namespace ntpcap
