#include "memlab/model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "memlab/errors.hpp"

namespace memlab {

namespace {
constexpr double kMinSigma2 = 1e-12;
}

ModelInstance::ModelInstance(DesignMatrix design, PriorSpec prior, double sigma2)
    : design_(std::move(design)), prior_(std::move(prior)), sigma2_(sigma2) {
  build();
}

ModelInstance::ModelInstance(DesignMatrix design, PriorSpec prior, double sigma2,
                             Eigen::MatrixXd sigma)
    : design_(std::move(design)), prior_(std::move(prior)), sigma2_(sigma2),
      sigma_(std::move(sigma)) {
  build();
}

void ModelInstance::build() {
  prior_.validate();
  if (prior_.d != design_.cols())
    throw std::invalid_argument("ModelInstance: prior dimension does not match design");
  if (!(sigma2_ >= kMinSigma2))
    throw std::invalid_argument("ModelInstance: sigma2 must be at least 1e-12");
  if (prior_.kind == PriorKind::ScalarTwoPointMixture)
    throw UnsupportedPriorError(
        "ModelInstance: the scalar two-point mixture lives in the scalar lab");

  if (prior_.kind == PriorKind::SparseMixture) {
    mixture_ = std::make_shared<MixturePushforward>(design_, prior_);
    spectrum_ = mixture_->averaged().spectrum();
  } else {
    gaussian_ = std::make_shared<GaussianPushforward>(design_, prior_.covariance_diagonal());
    spectrum_ = gaussian_->spectrum();
  }

  if (!sigma_) {
    lambda_sigma_ = design_.gram_eigenvalues()[0] / design_.rows();
  } else {
    if (sigma_->rows() != prior_.d || sigma_->cols() != prior_.d)
      throw std::invalid_argument("ModelInstance: Sigma must be d x d");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(*sigma_);
    if (solver.info() != Eigen::Success || solver.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("ModelInstance: Sigma must be positive definite");
    Eigen::MatrixXd inv_root = solver.eigenvectors() *
                               solver.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                               solver.eigenvectors().transpose();
    Eigen::MatrixXd scaled = design_.entries() * inv_root;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(scaled * scaled.transpose());
    lambda_sigma_ = gram.eigenvalues().maxCoeff() / design_.rows();
  }
  if (!(lambda_sigma_ > 0.0) || !std::isfinite(lambda_sigma_))
    throw std::invalid_argument("ModelInstance: lambda_Sigma must be finite and positive");
}

const Eigen::MatrixXd& ModelInstance::sigma_matrix() const {
  if (!sigma_) throw std::logic_error("ModelInstance: Sigma is the identity");
  return *sigma_;
}

double ModelInstance::sigma_norm2(const Eigen::VectorXd& v) const {
  if (!sigma_) return v.squaredNorm();
  return v.dot(*sigma_ * v);
}

double ModelInstance::sigma_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  if (!sigma_) return a.dot(b);
  return a.dot(*sigma_ * b);
}

const GaussianPushforward& ModelInstance::gaussian() const {
  if (!gaussian_) throw UnsupportedPriorError("model prior is not a single Gaussian");
  return *gaussian_;
}

const MixturePushforward& ModelInstance::sparse_mixture() const {
  if (!mixture_) throw UnsupportedPriorError("model prior is not a sparse mixture");
  return *mixture_;
}

const Eigen::VectorXd& ModelInstance::pushforward_eigenvalues() const {
  if (gaussian_) return gaussian_->eigenvalues();
  return mixture_->averaged().eigenvalues();
}

std::string ModelInstance::describe() const {
  std::ostringstream os;
  os << "n=" << n() << ";d=" << d() << ";prior=" << prior_.describe() << ";sigma2=" << sigma2_;
  return os.str();
}

}  // namespace memlab
