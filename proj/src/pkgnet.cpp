#include "pkglab/pkgnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include "pkglab/config.hpp"
#include "pkglab/parallel.hpp"

namespace pkglab::pkgnet {

namespace {

constexpr double kCoordinateScale = 15.0;
constexpr double kPowerOffsetDbm = 10.0;
constexpr double kPowerSpanDb = 20.0;
constexpr double kKappaScale = 10.0;

/// Offsets of each parameter block inside Network::params.
struct Layout {
  Eigen::Index w1, b1, w2, b2, wp, bp, wt, bt, total;

  explicit Layout(const Architecture& a) {
    const Eigen::Index in = a.input_dim;
    const Eigen::Index h = a.hidden;
    const Eigen::Index np = a.p_outputs();
    const Eigen::Index nt = a.theta_outputs();
    w1 = 0;
    b1 = w1 + h * in;
    w2 = b1 + h;
    b2 = w2 + h * h;
    wp = b2 + h;
    bp = wp + np * h;
    wt = bp + np;
    bt = wt + nt * h;
    total = bt + nt;
  }
};

using ConstMap = Eigen::Map<const RealMatrix>;
using ConstVecMap = Eigen::Map<const RealVector>;
using MutMap = Eigen::Map<RealMatrix>;
using MutVecMap = Eigen::Map<RealVector>;

void check_arch(const Architecture& a) {
  if (a.input_dim < 1 || a.hidden < 1 || a.M < 1 || a.L < 1) {
    throw ConfigError("pkgnet: architecture dimensions must be positive");
  }
}

/// ln|D K D^H + N| for D = blkdiag(Q, ..., Q), with the gradient with respect
/// to Q (as d/dRe + i d/dIm) and the derivative along dK/dq = K1.
struct LogDetTerm {
  double value = 0.0;
  ComplexMatrix grad_Q;
  double d_q = 0.0;
};

LogDetTerm log_det_term(const ComplexMatrix& Q, const ComplexMatrix& K,
                        const ComplexMatrix& K1, const ComplexMatrix& N) {
  const Eigen::Index M = Q.rows();
  const Eigen::Index blocks = K.rows() / M;
  ComplexMatrix DK(K.rows(), K.cols());
  for (Eigen::Index j = 0; j < blocks; ++j) DK.middleRows(M * j, M) = Q * K.middleRows(M * j, M);
  ComplexMatrix A(K.rows(), K.rows());
  for (Eigen::Index j = 0; j < blocks; ++j) {
    A.middleCols(M * j, M) = DK.middleCols(M * j, M) * Q.adjoint();
  }
  A = numerics::hermitian_part(A + N);
  Eigen::LLT<ComplexMatrix> llt(A);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("pkgnet gradient: covariance is not positive definite");
  }
  LogDetTerm t;
  const ComplexMatrix& Lf = llt.matrixLLT();
  for (Eigen::Index i = 0; i < Lf.rows(); ++i) t.value += 2.0 * std::log(Lf(i, i).real());

  const ComplexMatrix X = llt.solve(DK);
  t.grad_Q = ComplexMatrix::Zero(M, M);
  for (Eigen::Index j = 0; j < blocks; ++j) t.grad_Q += 2.0 * X.block(M * j, M * j, M, M);

  ComplexMatrix DK1(K1.rows(), K1.cols());
  for (Eigen::Index j = 0; j < blocks; ++j) {
    DK1.middleRows(M * j, M) = Q * K1.middleRows(M * j, M);
  }
  ComplexMatrix DK1D(K1.rows(), K1.rows());
  for (Eigen::Index j = 0; j < blocks; ++j) {
    DK1D.middleCols(M * j, M) = DK1.middleCols(M * j, M) * Q.adjoint();
  }
  t.d_q = llt.solve(DK1D).trace().real();
  return t;
}

ComplexMatrix blocks2(const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& c,
                      const ComplexMatrix& d) {
  return numerics::block2x2(a, b, c, d);
}

void accumulate(ComplexMatrix& g, double& dq, const LogDetTerm& t, double sign) {
  g += sign * t.grad_Q;
  dq += sign * t.d_q;
}

}  // namespace

Eigen::Index Architecture::parameter_count() const { return Layout(*this).total; }

Architecture architecture_for(Case c, int M, int L, int hidden) {
  Architecture a;
  a.input_dim = c == Case::EveBlind ? 6 : 9;
  a.hidden = hidden;
  a.M = M;
  a.L = L;
  check_arch(a);
  return a;
}

RealVector normalize_features(const FeatureRow& row, Case c) {
  RealVector f(c == Case::EveBlind ? 6 : 9);
  f(0) = row.bob(0) / kCoordinateScale;
  f(1) = row.bob(1) / kCoordinateScale;
  f(2) = row.bob(2) / kCoordinateScale;
  f(3) = (row.P_max_dbm - kPowerOffsetDbm) / kPowerSpanDb;
  f(4) = row.eta;
  f(5) = row.kappa / kKappaScale;
  if (c == Case::EveAware) {
    f(6) = row.eve(0) / kCoordinateScale;
    f(7) = row.eve(1) / kCoordinateScale;
    f(8) = row.eve(2) / kCoordinateScale;
  }
  return f;
}

ChannelStatistics row_statistics(const Scenario& base, const FeatureRow& row) {
  SystemGeometry g = base.geometry;
  g.bob_position = row.bob;
  g.eve_position = row.eve;
  StatisticsOptions o = base.options;
  o.P_max_dbm = row.P_max_dbm;
  o.eta = row.eta;
  o.kappa = row.kappa;
  return build_statistics(g, o);
}

Network Network::initialize(const Architecture& arch, std::uint64_t seed) {
  check_arch(arch);
  Network net = zeros(arch);
  net.seed = seed;
  const Layout lay(arch);
  Rng rng = Rng(seed).split("pkgnet-init");
  auto fill = [&](Eigen::Index offset, Eigen::Index fan_out, Eigen::Index fan_in) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (Eigen::Index k = 0; k < fan_out * fan_in; ++k) {
      net.params(offset + k) = rng.uniform(-limit, limit);
    }
  };
  fill(lay.w1, arch.hidden, arch.input_dim);
  fill(lay.w2, arch.hidden, arch.hidden);
  fill(lay.wp, arch.p_outputs(), arch.hidden);
  fill(lay.wt, arch.theta_outputs(), arch.hidden);
  return net;
}

Network Network::zeros(const Architecture& arch) {
  check_arch(arch);
  Network net;
  net.arch = arch;
  net.params = RealVector::Zero(arch.parameter_count());
  return net;
}

ForwardCache forward(const Network& net, const RealVector& features) {
  const Architecture& a = net.arch;
  if (features.size() != a.input_dim) {
    throw ConfigError("pkgnet forward: expected " + std::to_string(a.input_dim) +
                      " features, got " + std::to_string(features.size()));
  }
  if (net.params.size() != a.parameter_count()) {
    throw ConfigError("pkgnet forward: parameter vector does not match architecture");
  }
  const Layout lay(a);
  const double* p = net.params.data();
  ConstMap W1(p + lay.w1, a.hidden, a.input_dim);
  ConstVecMap b1(p + lay.b1, a.hidden);
  ConstMap W2(p + lay.w2, a.hidden, a.hidden);
  ConstVecMap b2(p + lay.b2, a.hidden);
  ConstMap Wp(p + lay.wp, a.p_outputs(), a.hidden);
  ConstVecMap bp(p + lay.bp, a.p_outputs());
  ConstMap Wt(p + lay.wt, a.theta_outputs(), a.hidden);
  ConstVecMap bt(p + lay.bt, a.theta_outputs());

  ForwardCache c;
  c.input = features;
  c.z1 = W1 * features + b1;
  c.a1 = c.z1.cwiseMax(0.0);
  c.z2 = W2 * c.a1 + b2;
  c.a2 = c.z2.cwiseMax(0.0);
  c.p_raw = Wp * c.a2 + bp;
  c.theta_raw = Wt * c.a2 + bt;
  return c;
}

RealVector backward(const Network& net, const ForwardCache& c, const RealVector& g_p,
                    const RealVector& g_theta) {
  const Architecture& a = net.arch;
  const Layout lay(a);
  const double* p = net.params.data();
  ConstMap W2(p + lay.w2, a.hidden, a.hidden);
  ConstMap Wp(p + lay.wp, a.p_outputs(), a.hidden);
  ConstMap Wt(p + lay.wt, a.theta_outputs(), a.hidden);

  RealVector grad = RealVector::Zero(lay.total);
  double* g = grad.data();
  MutMap(g + lay.wp, a.p_outputs(), a.hidden) = g_p * c.a2.transpose();
  MutVecMap(g + lay.bp, a.p_outputs()) = g_p;
  MutMap(g + lay.wt, a.theta_outputs(), a.hidden) = g_theta * c.a2.transpose();
  MutVecMap(g + lay.bt, a.theta_outputs()) = g_theta;

  RealVector g_z2 = Wp.transpose() * g_p + Wt.transpose() * g_theta;
  for (Eigen::Index i = 0; i < g_z2.size(); ++i) {
    if (!(c.z2(i) > 0.0)) g_z2(i) = 0.0;
  }
  MutMap(g + lay.w2, a.hidden, a.hidden) = g_z2 * c.a1.transpose();
  MutVecMap(g + lay.b2, a.hidden) = g_z2;

  RealVector g_z1 = W2.transpose() * g_z2;
  for (Eigen::Index i = 0; i < g_z1.size(); ++i) {
    if (!(c.z1(i) > 0.0)) g_z1(i) = 0.0;
  }
  MutMap(g + lay.w1, a.hidden, a.input_dim) = g_z1 * c.input.transpose();
  MutVecMap(g + lay.b1, a.hidden) = g_z1;
  return grad;
}

DesignPoint normalize_outputs(const RealVector& p_raw, const RealVector& theta_raw,
                              double P_max, int M, int L) {
  if (p_raw.size() != 2 * M * M || theta_raw.size() != 2 * L) {
    throw ConfigError("normalize_outputs: raw output sizes do not match M and L");
  }
  const double norm = p_raw.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw NumericalError("normalize_outputs: precoder output has zero or non-finite norm");
  }
  DesignPoint d;
  d.P.resize(M, M);
  const double scale = std::sqrt(P_max) / norm;
  for (int r = 0; r < M; ++r) {
    for (int col = 0; col < M; ++col) {
      const int k = r * M + col;
      d.P(r, col) = Complex(p_raw(k), p_raw(M * M + k)) * scale;
    }
  }
  d.theta.resize(L);
  for (int l = 0; l < L; ++l) {
    const double re = theta_raw(l);
    const double im = theta_raw(l + L);
    const double r = std::hypot(re, im);
    if (r > 0.0) {
      d.theta(l) = Complex(re / r, im / r);
    } else {
      std::cerr << "warning: IRS element " << l << " has a zero phase output; using phase 0\n";
      d.theta(l) = 1.0;
    }
  }
  return d;
}

double row_objective(const DesignPoint& design, const ChannelStatistics& stats, Case c) {
  const SkrReport r = skr_lower_bound(design, stats);
  return c == Case::EveBlind ? r.mi_ab : r.rsk;
}

DesignGradient objective_gradient(const DesignPoint& design, const ChannelStatistics& s,
                                  Case c) {
  const Eigen::Index M = design.P.rows();
  if (M != s.M() || design.theta.size() != s.L()) {
    throw ConfigError("objective_gradient: design does not match statistics");
  }
  const ComplexMatrix Q = design.P.transpose();
  const ComplexMatrix R = s.R_B.cast<Complex>();
  const ComplexMatrix I = ComplexMatrix::Identity(M, M);
  const ComplexMatrix Z = ComplexMatrix::Zero(M, M);
  const double q = phase_quadratic(design.theta, s.R_I);
  const double cu = reflect_gain_u(s);
  const double ce = reflect_gain_e(s);
  const double cx = s.rho * reflect_gain_ue(s);
  const double sU = s.beta_hab + cu * q;
  const double sE = s.beta_hae + ce * q;
  const double sX = s.rho * std::sqrt(s.beta_hab * s.beta_hae) + cx * q;
  const double Pb = s.P_b;
  const double rPb = std::sqrt(Pb);
  const double d2 = s.delta2;
  const ComplexMatrix noise_lower = blocks2(Z, Z, Z, d2 * I);

  const LogDetTerm Ta = log_det_term(Q, Pb * sU * R + d2 * I, Pb * cu * R, Z);
  const LogDetTerm Tb = log_det_term(Q, sU * R, cu * R, d2 * I);
  const LogDetTerm Tab = log_det_term(
      Q, blocks2(Pb * sU * R + d2 * I, rPb * sU * R, rPb * sU * R, sU * R),
      blocks2(Pb * cu * R, rPb * cu * R, rPb * cu * R, cu * R), noise_lower);

  ComplexMatrix gQ = ComplexMatrix::Zero(M, M);
  double dq = 0.0;
  double nats = 0.0;
  if (c == Case::EveBlind) {
    nats = Ta.value + Tb.value - Tab.value;
    accumulate(gQ, dq, Ta, 1.0);
    accumulate(gQ, dq, Tb, 1.0);
    accumulate(gQ, dq, Tab, -1.0);
  } else {
    const LogDetTerm Te = log_det_term(Q, sE * R, ce * R, d2 * I);
    const LogDetTerm Tae = log_det_term(
        Q, blocks2(Pb * sU * R + d2 * I, rPb * sX * R, rPb * sX * R, sE * R),
        blocks2(Pb * cu * R, rPb * cx * R, rPb * cx * R, ce * R), noise_lower);
    const LogDetTerm Tbe =
        log_det_term(Q, blocks2(sU * R, sX * R, sX * R, sE * R),
                     blocks2(cu * R, cx * R, cx * R, ce * R), d2 * ComplexMatrix::Identity(2 * M, 2 * M));
    const double rsk1 = Tb.value - Tab.value - Te.value + Tae.value;
    const double rsk2 = Ta.value - Tab.value - Te.value + Tbe.value;
    accumulate(gQ, dq, Tab, -1.0);
    accumulate(gQ, dq, Te, -1.0);
    if (rsk2 > rsk1) {
      nats = rsk2;
      accumulate(gQ, dq, Ta, 1.0);
      accumulate(gQ, dq, Tbe, 1.0);
    } else {
      nats = rsk1;
      accumulate(gQ, dq, Tb, 1.0);
      accumulate(gQ, dq, Tae, 1.0);
    }
  }

  DesignGradient out;
  out.value = nats / std::numbers::ln2;
  out.dP = gQ.transpose() / std::numbers::ln2;
  const RealMatrix W = s.R_I.cwiseProduct(s.R_I);
  out.dtheta = 2.0 * (dq / std::numbers::ln2) * (W.cast<Complex>() * design.theta);
  return out;
}

RawGradient raw_output_gradient(const RealVector& p_raw, const RealVector& theta_raw,
                                const ChannelStatistics& stats, Case c) {
  const int M = stats.M();
  const int L = stats.L();
  const DesignPoint design = normalize_outputs(p_raw, theta_raw, stats.P_max, M, L);
  const DesignGradient dg = objective_gradient(design, stats, c);

  RawGradient out;
  out.value = dg.value;
  // Power normalization w = sqrt(P_max) v / |v|.
  RealVector g_w(2 * M * M);
  for (int r = 0; r < M; ++r) {
    for (int col = 0; col < M; ++col) {
      const int k = r * M + col;
      g_w(k) = dg.dP(r, col).real();
      g_w(M * M + k) = dg.dP(r, col).imag();
    }
  }
  const double norm = p_raw.norm();
  out.g_p = (std::sqrt(stats.P_max) / norm) *
            (g_w - p_raw * (p_raw.dot(g_w) / (norm * norm)));

  // Unit-modulus normalization theta_l = (a + ib) / |a + ib|.
  out.g_theta = RealVector::Zero(2 * L);
  for (int l = 0; l < L; ++l) {
    const double a = theta_raw(l);
    const double b = theta_raw(l + L);
    const double r = std::hypot(a, b);
    if (!(r > 0.0)) continue;
    const double ua = a / r;
    const double ub = b / r;
    const double ga = dg.dtheta(l).real();
    const double gb = dg.dtheta(l).imag();
    const double radial = ua * ga + ub * gb;
    out.g_theta(l) = (ga - ua * radial) / r;
    out.g_theta(l + L) = (gb - ub * radial) / r;
  }
  return out;
}

Batch make_batch(const Scenario& base, const std::vector<FeatureRow>& rows) {
  Batch b;
  b.rows = rows;
  b.stats.reserve(rows.size());
  for (const FeatureRow& row : rows) b.stats.push_back(row_statistics(base, row));
  return b;
}

double loss(const Network& net, const Batch& batch, Case c) {
  if (batch.rows.empty()) throw ConfigError("pkgnet loss: empty batch");
  double total = 0.0;
  for (std::size_t k = 0; k < batch.rows.size(); ++k) {
    const ForwardCache fc = forward(net, normalize_features(batch.rows[k], c));
    const DesignPoint d = normalize_outputs(fc.p_raw, fc.theta_raw, batch.stats[k].P_max,
                                            net.arch.M, net.arch.L);
    total -= row_objective(d, batch.stats[k], c);
  }
  return total / static_cast<double>(batch.rows.size());
}

LossGradient loss_and_gradient(const Network& net, const Batch& batch, Case c, int workers) {
  const std::size_t n = batch.rows.size();
  if (n == 0) throw ConfigError("pkgnet loss: empty batch");
  std::vector<double> values(n);
  std::vector<RealVector> grads(n);
  parallel_for(
      n,
      [&](std::size_t k) {
        const ForwardCache fc = forward(net, normalize_features(batch.rows[k], c));
        const DesignPoint d = normalize_outputs(fc.p_raw, fc.theta_raw, batch.stats[k].P_max,
                                                net.arch.M, net.arch.L);
        values[k] = -row_objective(d, batch.stats[k], c);
        const RawGradient rg = raw_output_gradient(fc.p_raw, fc.theta_raw, batch.stats[k], c);
        grads[k] = backward(net, fc, -rg.g_p, -rg.g_theta);
      },
      workers);
  LossGradient out;
  out.gradient = RealVector::Zero(net.params.size());
  for (std::size_t k = 0; k < n; ++k) {
    out.loss += values[k];
    out.gradient += grads[k];
  }
  out.loss /= static_cast<double>(n);
  out.gradient /= static_cast<double>(n);
  if (!out.gradient.allFinite() || !std::isfinite(out.loss)) {
    throw NumericalError("pkgnet: non-finite loss or gradient");
  }
  return out;
}

std::vector<FeatureRow> sample_rows(std::size_t n, const SamplingRanges& r, Case c,
                                    double lambda, Rng rng) {
  std::vector<FeatureRow> rows(n);
  for (FeatureRow& row : rows) {
    row.bob = Vec3(rng.uniform(r.ue_min, r.ue_max), rng.uniform(r.ue_min, r.ue_max), 0.0);
    row.P_max_dbm = rng.uniform(r.P_min_dbm, r.P_max_dbm);
    row.eta = rng.uniform(r.eta_min, r.eta_max);
    row.kappa = rng.uniform(r.kappa_min, r.kappa_max);
    if (c == Case::EveAware) {
      row.eve = Vec3(rng.uniform(r.ue_min, r.ue_max), rng.uniform(r.ue_min, r.ue_max), 0.0);
    } else {
      row.eve = row.bob - Vec3(0.5 * lambda, 0.0, 0.0);
    }
  }
  return rows;
}

TrainResult train(const TrainConfig& cfg, Case c, const Scenario& base,
                  const EpochCallback& on_epoch) {
  if (cfg.epochs_max < 1 || cfg.samples_per_epoch < 1 || cfg.batch_size < 1 ||
      cfg.validation_size < 1 || cfg.early_stop_patience < 1 || !(cfg.learning_rate > 0.0)) {
    throw ConfigError("train: counts and learning rate must be positive");
  }
  const int M = base.geometry.M;
  const int L = base.geometry.L();
  const Rng root(cfg.seed);
  const double lambda = base.geometry.lambda;
  const Batch train_set = make_batch(
      base, sample_rows(static_cast<std::size_t>(cfg.samples_per_epoch), cfg.ranges, c, lambda,
                        root.split("train-rows")));
  const Batch validation = make_batch(
      base, sample_rows(static_cast<std::size_t>(cfg.validation_size), cfg.ranges, c, lambda,
                        root.split("validation-rows")));

  TrainResult result;
  Network net = Network::initialize(architecture_for(c, M, L, cfg.hidden), cfg.seed);
  RealVector m = RealVector::Zero(net.params.size());
  RealVector v = RealVector::Zero(net.params.size());
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  long step = 0;

  double best = std::numeric_limits<double>::infinity();
  Network best_net = net;
  int stale = 0;
  std::vector<std::size_t> order(train_set.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs_max; ++epoch) {
    Rng shuffle_rng = root.split("shuffle", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    double train_total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      Batch batch;
      for (std::size_t i = start; i < end; ++i) {
        batch.rows.push_back(train_set.rows[order[i]]);
        batch.stats.push_back(train_set.stats[order[i]]);
      }
      const LossGradient lg = loss_and_gradient(net, batch, c, cfg.workers);
      ++step;
      m = beta1 * m + (1.0 - beta1) * lg.gradient;
      v = beta2 * v + (1.0 - beta2) * lg.gradient.cwiseProduct(lg.gradient);
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      net.params.array() -=
          cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
      train_total += lg.loss;
      ++batches;
    }
    const double val = loss(net, validation, c);
    if (!std::isfinite(val) || !net.params.allFinite()) {
      std::ostringstream msg;
      msg << "train: divergence at epoch " << epoch << " (validation loss " << val << ")";
      throw NumericalError(msg.str());
    }
    if (val < best) {
      best = val;
      best_net = net;
      result.best_epoch = epoch;
      stale = 0;
    } else {
      ++stale;
    }
    EpochLog entry{epoch, train_total / static_cast<double>(batches), val, best};
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (stale >= cfg.early_stop_patience) {
      result.early_stopped = true;
      break;
    }
  }
  result.network = best_net;
  return result;
}

DesignPoint infer(const Network& net, const FeatureRow& row, Case c) {
  const ForwardCache fc = forward(net, normalize_features(row, c));
  return normalize_outputs(fc.p_raw, fc.theta_raw, dbm_to_watt(row.P_max_dbm), net.arch.M,
                           net.arch.L);
}

DesignPoint random_design(int M, int L, double P_max, Rng& rng) {
  DesignPoint d;
  d.P = rng.complex_normal_matrix(M, M);
  d.P *= std::sqrt(P_max) / d.P.norm();
  d.theta.resize(L);
  for (int l = 0; l < L; ++l) {
    d.theta(l) = std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi));
  }
  return d;
}

void save_model(const std::string& path, const Model& model) {
  using config::Json;
  const Network& net = model.network;
  const Architecture& a = net.arch;
  const Layout lay(a);
  Json j;
  j["format"] = "pkgnet";
  j["version"] = 1;
  j["case"] = model.which == Case::EveBlind ? 1 : 2;
  j["architecture"] = {{"input_dim", a.input_dim}, {"hidden", a.hidden}, {"M", a.M}, {"L", a.L}};
  j["seed"] = net.seed;
  j["normalization"] = {{"coordinate_scale", kCoordinateScale},
                        {"p_max_offset_dbm", kPowerOffsetDbm},
                        {"p_max_span_db", kPowerSpanDb},
                        {"kappa_scale", kKappaScale}};
  j["scenario"] = config::scenario_to_json(model.scenario);
  auto layer = [&](const char* name, Eigen::Index w, Eigen::Index b, Eigen::Index rows,
                   Eigen::Index cols) {
    ConstMap W(net.params.data() + w, rows, cols);
    Json weights = Json::array();
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) weights.push_back(W(r, c));
    }
    Json bias = Json::array();
    for (Eigen::Index r = 0; r < rows; ++r) bias.push_back(net.params(b + r));
    return Json{{"name", name}, {"rows", rows}, {"cols", cols},
                {"weights", weights}, {"bias", bias}};
  };
  j["layers"] = Json::array({layer("hidden1", lay.w1, lay.b1, a.hidden, a.input_dim),
                             layer("hidden2", lay.w2, lay.b2, a.hidden, a.hidden),
                             layer("head_p", lay.wp, lay.bp, a.p_outputs(), a.hidden),
                             layer("head_theta", lay.wt, lay.bt, a.theta_outputs(), a.hidden)});
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model file '" + path + "'");
  out << j.dump(1) << "\n";
  if (!out) throw ConfigError("failed writing model file '" + path + "'");
}

Model load_model(const std::string& path) {
  using config::Json;
  const Json j = config::read_json_file(path);
  try {
    if (j.at("format") != "pkgnet" || j.at("version") != 1) {
      throw ConfigError("model file '" + path + "' has an unsupported format");
    }
    Model model;
    model.which = j.at("case").get<int>() == 2 ? Case::EveAware : Case::EveBlind;
    Architecture a;
    a.input_dim = j.at("architecture").at("input_dim").get<int>();
    a.hidden = j.at("architecture").at("hidden").get<int>();
    a.M = j.at("architecture").at("M").get<int>();
    a.L = j.at("architecture").at("L").get<int>();
    const int expected_inputs = model.which == Case::EveBlind ? 6 : 9;
    if (a.input_dim != expected_inputs) {
      throw ConfigError("model file '" + path + "': input_dim does not match its case");
    }
    model.network = Network::zeros(a);
    model.network.seed = j.at("seed").get<std::uint64_t>();
    model.scenario = config::scenario_from_json(j.at("scenario"));
    if (model.scenario.geometry.M != a.M || model.scenario.geometry.L() != a.L) {
      throw ConfigError("model file '" + path + "': scenario dimensions disagree");
    }
    const Layout lay(a);
    const Eigen::Index offsets[4][2] = {
        {lay.w1, lay.b1}, {lay.w2, lay.b2}, {lay.wp, lay.bp}, {lay.wt, lay.bt}};
    const Eigen::Index shapes[4][2] = {{a.hidden, a.input_dim},
                                       {a.hidden, a.hidden},
                                       {a.p_outputs(), a.hidden},
                                       {a.theta_outputs(), a.hidden}};
    const Json& layers = j.at("layers");
    if (!layers.is_array() || layers.size() != 4) {
      throw ConfigError("model file '" + path + "': expected 4 layers");
    }
    for (std::size_t i = 0; i < 4; ++i) {
      const Json& layer = layers[i];
      const Eigen::Index rows = shapes[i][0];
      const Eigen::Index cols = shapes[i][1];
      if (layer.at("rows").get<Eigen::Index>() != rows ||
          layer.at("cols").get<Eigen::Index>() != cols ||
          layer.at("weights").size() != static_cast<std::size_t>(rows * cols) ||
          layer.at("bias").size() != static_cast<std::size_t>(rows)) {
        throw ConfigError("model file '" + path + "': layer shape mismatch");
      }
      MutMap W(model.network.params.data() + offsets[i][0], rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          W(r, c) = layer.at("weights")[static_cast<std::size_t>(r * cols + c)].get<double>();
        }
        model.network.params(offsets[i][1] + r) =
            layer.at("bias")[static_cast<std::size_t>(r)].get<double>();
      }
    }
    if (!model.network.params.allFinite()) {
      throw ConfigError("model file '" + path + "': non-finite weights");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("model file '" + path + "': " + e.what());
  }
}

}  // namespace pkglab::pkgnet
