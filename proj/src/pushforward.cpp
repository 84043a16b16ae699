#include "memlab/pushforward.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "memlab/errors.hpp"

namespace memlab {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kConditionLimit = 1e14;
}  // namespace

GaussianPushforward::GaussianPushforward(const DesignMatrix& design,
                                         const Eigen::VectorXd& omega_diag) {
  if (omega_diag.size() != design.cols())
    throw std::invalid_argument("GaussianPushforward: omega diagonal has wrong length");
  const Eigen::MatrixXd& X = design.entries();
  Eigen::MatrixXd covariance = X * omega_diag.asDiagonal() * X.transpose();
  factorize(covariance);
}

GaussianPushforward::GaussianPushforward(const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != covariance.cols())
    throw std::invalid_argument("GaussianPushforward: covariance must be square");
  factorize(covariance);
}

void GaussianPushforward::factorize(const Eigen::MatrixXd& covariance) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("GaussianPushforward: eigendecomposition failed");
  eigenvalues_ = solver.eigenvalues().reverse();
  basis_ = solver.eigenvectors().rowwise().reverse();
  eigenvalues_ = eigenvalues_.cwiseMax(0.0);
  Eigen::MatrixXd rebuilt = basis_ * eigenvalues_.asDiagonal() * basis_.transpose();
  double denom = covariance.norm();
  reconstruction_error_ = denom > 0.0 ? (rebuilt - covariance).norm() / denom : 0.0;
}

SpectralMeasure GaussianPushforward::spectrum() const {
  return SpectralMeasure::from_eigenvalues(eigenvalues_);
}

Eigen::VectorXd GaussianPushforward::solve_shifted(const Eigen::VectorXd& y, double t) const {
  Eigen::VectorXd z = basis_.transpose() * y;
  z.array() /= (eigenvalues_.array() + t);
  return basis_ * z;
}

Eigen::VectorXd GaussianPushforward::apply(const Eigen::VectorXd& y, double t) const {
  Eigen::VectorXd z = basis_.transpose() * y;
  z.array() *= (eigenvalues_.array() + t);
  return basis_ * z;
}

void GaussianPushforward::check_conditioning(double t) const {
  double hi = eigenvalues_[0] + t;
  double lo = eigenvalues_[n() - 1] + t;
  if (!(lo > 0.0) || hi / lo > kConditionLimit)
    throw SingularCovarianceError("pushforward covariance condition number exceeds 1e14");
}

double GaussianPushforward::log_density(const Eigen::VectorXd& y, double t) const {
  check_conditioning(t);
  Eigen::VectorXd z = basis_.transpose() * y;
  double quad = (z.array().square() / (eigenvalues_.array() + t)).sum();
  double log_det = (eigenvalues_.array() + t).log().sum();
  return -0.5 * (n() * kLog2Pi + log_det + quad);
}

Eigen::VectorXd GaussianPushforward::score(const Eigen::VectorXd& y, double t) const {
  check_conditioning(t);
  return -solve_shifted(y, t);
}

double GaussianPushforward::fisher_trace(double t) const {
  return (eigenvalues_.array() + t).inverse().sum() / n();
}

double GaussianPushforward::fisher_trace_derivative(double t) const {
  return -(eigenvalues_.array() + t).inverse().square().sum() / n();
}

double GaussianPushforward::mean_eigenvalue() const { return eigenvalues_.mean(); }

bool GaussianPushforward::singular(double rel_floor) const {
  return eigenvalues_[n() - 1] < rel_floor * eigenvalues_[0];
}

namespace {

std::vector<std::vector<int>> enumerate_supports(int d, int K, std::int64_t count) {
  std::vector<std::vector<int>> supports;
  supports.reserve(static_cast<std::size_t>(count));
  std::vector<int> current(K);
  for (int i = 0; i < K; ++i) current[i] = i;
  while (true) {
    supports.push_back(current);
    int pos = K - 1;
    while (pos >= 0 && current[pos] == d - K + pos) --pos;
    if (pos < 0) break;
    ++current[pos];
    for (int j = pos + 1; j < K; ++j) current[j] = current[j - 1] + 1;
  }
  return supports;
}

}  // namespace

MixturePushforward::MixturePushforward(const DesignMatrix& design, const PriorSpec& prior)
    : design_(design), prior_(prior), n_(design.rows()) {
  prior_.validate();
  if (prior_.kind != PriorKind::SparseMixture)
    throw UnsupportedPriorError("MixturePushforward: prior is not a sparse mixture");
  if (prior_.d != design.cols())
    throw std::invalid_argument("MixturePushforward: prior dimension does not match design");
  std::int64_t count = prior_.mixture_components();
  if (count > kMaxComponents)
    throw TooManyComponentsError("sparse mixture has " + std::to_string(count) +
                                 " components; the enumeration budget is 10^6");
  eta_over_d_ = prior_.eta / prior_.d;
  spike_scale_ = (1.0 - prior_.eta) / prior_.K;
  supports_ = enumerate_supports(prior_.d, prior_.K, count);

  averaged_ = std::make_unique<GaussianPushforward>(
      design, Eigen::VectorXd::Constant(prior_.d, 1.0 / prior_.d));
}

std::shared_ptr<const MixturePushforward::NoiseContext> MixturePushforward::context(
    double t) const {
  {
    std::lock_guard<std::mutex> lock(context_mutex_);
    auto it = context_cache_.find(t);
    if (it != context_cache_.end()) return it->second;
  }

  auto ctx = std::make_shared<NoiseContext>();
  ctx->t = t;
  ctx->spike_scale = spike_scale_;
  const Eigen::MatrixXd& X = design_.entries();
  const Eigen::MatrixXd& U = design_.gram_basis();
  ctx->base_eigenvalues = eta_over_d_ * design_.gram_eigenvalues().array() + t;

  // Conservative conditioning bound shared by every component.
  double col_norm_max = X.colwise().squaredNorm().maxCoeff();
  double hi = ctx->base_eigenvalues[0] + spike_scale_ * prior_.K * col_norm_max;
  double lo = ctx->base_eigenvalues[n_ - 1];
  if (!(lo > 0.0) || hi / lo > kConditionLimit)
    throw SingularCovarianceError("sparse mixture component covariance condition exceeds 1e14");

  Eigen::MatrixXd W = U.transpose() * X;  // n x d
  ctx->base_inverse_design = U * ctx->base_eigenvalues.cwiseInverse().asDiagonal() * W;
  ctx->gram = W.transpose() * ctx->base_eigenvalues.cwiseInverse().asDiagonal() * W;
  ctx->base_log_det = ctx->base_eigenvalues.array().log().sum();

  const int K = prior_.K;
  ctx->capacitance_inverse.reserve(supports_.size());
  ctx->capacitance_log_det.reserve(supports_.size());
  Eigen::MatrixXd cap(K, K);
  for (const auto& support : supports_) {
    for (int a = 0; a < K; ++a)
      for (int b = 0; b < K; ++b)
        cap(a, b) = (a == b ? 1.0 : 0.0) + spike_scale_ * ctx->gram(support[a], support[b]);
    Eigen::LLT<Eigen::MatrixXd> llt(cap);
    if (llt.info() != Eigen::Success)
      throw SingularCovarianceError("sparse mixture capacitance factorization failed");
    Eigen::MatrixXd L = llt.matrixL();
    ctx->capacitance_log_det.push_back(2.0 * L.diagonal().array().log().sum());
    ctx->capacitance_inverse.push_back(llt.solve(Eigen::MatrixXd::Identity(K, K)));
  }

  std::lock_guard<std::mutex> lock(context_mutex_);
  context_cache_[t] = ctx;
  return ctx;
}

MixturePushforward::Evaluation MixturePushforward::evaluate(const Eigen::VectorXd& y,
                                                            const NoiseContext& ctx) const {
  const int K = prior_.K;
  const double c = ctx.spike_scale;
  const std::int64_t M = components();

  const Eigen::MatrixXd& U = design_.gram_basis();
  Eigen::VectorXd uy = U.transpose() * y;
  Eigen::VectorXd uy_scaled = uy.array() / ctx.base_eigenvalues.array();
  Eigen::VectorXd w = U * uy_scaled;                       // B^{-1} y
  double q0 = uy.dot(uy_scaled);                           // y' B^{-1} y
  Eigen::VectorXd u = design_.entries().transpose() * w;  // X' B^{-1} y

  double base = -0.5 * (n_ * kLog2Pi + ctx.base_log_det);
  Eigen::VectorXd log_dens(M);
  Eigen::MatrixXd alphas(K, M);
  Eigen::VectorXd u_s(K), alpha(K);
  for (std::int64_t m = 0; m < M; ++m) {
    const auto& support = supports_[m];
    for (int k = 0; k < K; ++k) u_s[k] = u[support[k]];
    alpha.noalias() = ctx.capacitance_inverse[m] * u_s;
    alphas.col(m) = alpha;
    double quad = q0 - c * u_s.dot(alpha);
    log_dens[m] = base - 0.5 * ctx.capacitance_log_det[m] - 0.5 * quad;
  }

  double peak = log_dens.maxCoeff();
  Eigen::VectorXd resp = (log_dens.array() - peak).exp();
  double mass = resp.sum();
  resp /= mass;

  Evaluation out;
  out.log_density = peak + std::log(mass) - std::log(static_cast<double>(M));
  out.responsibilities = std::move(resp);

  Eigen::VectorXd accum = Eigen::VectorXd::Zero(prior_.d);
  for (std::int64_t m = 0; m < M; ++m) {
    const auto& support = supports_[m];
    double r = out.responsibilities[m];
    for (int k = 0; k < K; ++k) accum[support[k]] += r * alphas(k, m);
  }
  out.score = -w + c * (ctx.base_inverse_design * accum);
  return out;
}

MixturePushforward::Evaluation MixturePushforward::evaluate(const Eigen::VectorXd& y,
                                                            double t) const {
  return evaluate(y, *context(t));
}

Eigen::MatrixXd MixturePushforward::log_density_hessian(const Eigen::VectorXd& y,
                                                        const NoiseContext& ctx) const {
  const int K = prior_.K;
  const double c = ctx.spike_scale;
  const std::int64_t M = components();

  const Eigen::MatrixXd& U = design_.gram_basis();
  Eigen::VectorXd uy = U.transpose() * y;
  Eigen::VectorXd uy_scaled = uy.array() / ctx.base_eigenvalues.array();
  Eigen::VectorXd w = U * uy_scaled;
  double q0 = uy.dot(uy_scaled);
  Eigen::VectorXd u = design_.entries().transpose() * w;

  double base = -0.5 * (n_ * kLog2Pi + ctx.base_log_det);
  Eigen::VectorXd log_dens(M);
  Eigen::MatrixXd alphas(K, M);
  Eigen::VectorXd u_s(K), alpha(K);
  for (std::int64_t m = 0; m < M; ++m) {
    const auto& support = supports_[m];
    for (int k = 0; k < K; ++k) u_s[k] = u[support[k]];
    alpha.noalias() = ctx.capacitance_inverse[m] * u_s;
    alphas.col(m) = alpha;
    log_dens[m] = base - 0.5 * ctx.capacitance_log_det[m] - 0.5 * (q0 - c * u_s.dot(alpha));
  }
  double peak = log_dens.maxCoeff();
  Eigen::VectorXd resp = (log_dens.array() - peak).exp();
  resp /= resp.sum();

  // Core of the rank-structured part: sum_S r_S [ c Cinv_S + c^2 (alpha alpha' - abar abar') ].
  Eigen::MatrixXd core = Eigen::MatrixXd::Zero(prior_.d, prior_.d);
  Eigen::VectorXd alpha_bar = Eigen::VectorXd::Zero(prior_.d);
  for (std::int64_t m = 0; m < M; ++m) {
    const auto& support = supports_[m];
    double r = resp[m];
    const Eigen::MatrixXd& cinv = ctx.capacitance_inverse[m];
    for (int a = 0; a < K; ++a) {
      alpha_bar[support[a]] += r * alphas(a, m);
      for (int b = 0; b < K; ++b) {
        core(support[a], support[b]) +=
            r * (c * cinv(a, b) + c * c * alphas(a, m) * alphas(b, m));
      }
    }
  }
  core.noalias() -= (c * c) * alpha_bar * alpha_bar.transpose();

  Eigen::MatrixXd base_inverse =
      U * ctx.base_eigenvalues.cwiseInverse().asDiagonal() * U.transpose();
  Eigen::MatrixXd hessian = -base_inverse;
  hessian.noalias() +=
      ctx.base_inverse_design * core * ctx.base_inverse_design.transpose();
  return hessian;
}

Eigen::VectorXd MixturePushforward::posterior_mean_theta(const Eigen::VectorXd& y, double sigma2,
                                                         const NoiseContext& ctx) const {
  if (ctx.t != sigma2)
    throw std::invalid_argument("posterior_mean_theta: context noise level mismatch");
  const int K = prior_.K;
  const double c = ctx.spike_scale;
  const std::int64_t M = components();

  const Eigen::MatrixXd& U = design_.gram_basis();
  Eigen::VectorXd uy = U.transpose() * y;
  Eigen::VectorXd uy_scaled = uy.array() / ctx.base_eigenvalues.array();
  Eigen::VectorXd w = U * uy_scaled;
  double q0 = uy.dot(uy_scaled);
  Eigen::VectorXd u = design_.entries().transpose() * w;

  double base = -0.5 * (n_ * kLog2Pi + ctx.base_log_det);
  Eigen::VectorXd log_dens(M);
  Eigen::MatrixXd alphas(K, M);
  Eigen::VectorXd u_s(K), alpha(K);
  for (std::int64_t m = 0; m < M; ++m) {
    const auto& support = supports_[m];
    for (int k = 0; k < K; ++k) u_s[k] = u[support[k]];
    alpha.noalias() = ctx.capacitance_inverse[m] * u_s;
    alphas.col(m) = alpha;
    log_dens[m] = base - 0.5 * ctx.capacitance_log_det[m] - 0.5 * (q0 - c * u_s.dot(alpha));
  }
  double peak = log_dens.maxCoeff();
  Eigen::VectorXd resp = (log_dens.array() - peak).exp();
  resp /= resp.sum();

  // theta_hat = (eta/d) X' (sum_S r_S v_S) + c * spike,
  // with v_S = B^{-1}y - c Binv X_S alpha_S and spike_i = sum_{S: i in S} r_S x_i' v_S.
  Eigen::VectorXd accum = Eigen::VectorXd::Zero(prior_.d);
  Eigen::VectorXd spike = Eigen::VectorXd::Zero(prior_.d);
  Eigen::VectorXd g_alpha(K);
  for (std::int64_t m = 0; m < M; ++m) {
    const auto& support = supports_[m];
    double r = resp[m];
    for (int a = 0; a < K; ++a) {
      accum[support[a]] += r * alphas(a, m);
      double dot = 0.0;
      for (int b = 0; b < K; ++b) dot += ctx.gram(support[a], support[b]) * alphas(b, m);
      spike[support[a]] += r * (u[support[a]] - c * dot);
    }
  }
  Eigen::VectorXd v_bar = w - c * (ctx.base_inverse_design * accum);
  return eta_over_d_ * (design_.entries().transpose() * v_bar) + c * spike;
}

std::pair<double, Eigen::VectorXd> pushforward_logdensity_and_score(const DesignMatrix& design,
                                                                    const PriorSpec& prior,
                                                                    const Eigen::VectorXd& y) {
  prior.validate();
  if (y.size() != design.rows())
    throw std::invalid_argument("pushforward_logdensity_and_score: y has wrong length");
  switch (prior.kind) {
    case PriorKind::IsotropicGaussian:
    case PriorKind::LowRankGaussian: {
      GaussianPushforward push(design, prior.covariance_diagonal());
      return {push.log_density(y), push.score(y)};
    }
    case PriorKind::SparseMixture: {
      MixturePushforward push(design, prior);
      auto eval = push.evaluate(y, 0.0);
      return {eval.log_density, eval.score};
    }
    case PriorKind::ScalarTwoPointMixture: {
      if (design.rows() != 1 || design.cols() != 1)
        throw UnsupportedPriorError("scalar two-point mixture requires a 1x1 design");
      double x = design.entries()(0, 0);
      double center = std::abs(x);
      double s = prior.eta * x * x;
      double value = y[0];
      double a = -0.5 * (value - center) * (value - center) / s;
      double b = -0.5 * (value + center) * (value + center) / s;
      double peak = std::max(a, b);
      double log_p = peak + std::log(0.5 * (std::exp(a - peak) + std::exp(b - peak))) -
                     0.5 * std::log(2.0 * M_PI * s);
      Eigen::VectorXd score(1);
      score[0] = -(value - center * std::tanh(center * value / s)) / s;
      return {log_p, score};
    }
  }
  throw UnsupportedPriorError("unknown prior kind");
}

}  // namespace memlab
