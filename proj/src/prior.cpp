#include "gle/prior.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace gle {

DiscretePrior::DiscretePrior(Eigen::MatrixXd atoms, Eigen::VectorXd weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  const int K = static_cast<int>(atoms_.rows());
  if (K < 1 || atoms_.cols() < 1)
    throw std::invalid_argument("DiscretePrior: need K >= 1 atoms, B >= 1");
  if (weights_.size() != K)
    throw std::invalid_argument("DiscretePrior: weights/atoms size mismatch");
  if ((weights_.array() <= 0.0).any())
    throw std::invalid_argument("DiscretePrior: all weights must be > 0");
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("DiscretePrior: weights must sum to 1");
  weights_ /= total;
  s_max_ = atoms_.array().abs().maxCoeff();
  if (!std::isfinite(s_max_))
    throw std::invalid_argument("DiscretePrior: atoms must be finite");
}

DiscretePrior DiscretePrior::binary() {
  Eigen::MatrixXd a(2, 1);
  a << 1.0, -1.0;
  Eigen::Vector2d p(0.5, 0.5);
  return DiscretePrior(a, p);
}

DiscretePrior DiscretePrior::sparse(double rho, double a) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("sparse prior: rho must be in (0,1)");
  Eigen::MatrixXd atoms(2, 1);
  atoms << 0.0, a;
  Eigen::Vector2d p(1.0 - rho, rho);
  return DiscretePrior(atoms, p);
}

DiscretePrior DiscretePrior::one_hot(int B) {
  if (B < 1) throw std::invalid_argument("one_hot prior: B must be >= 1");
  Eigen::MatrixXd atoms = Eigen::MatrixXd::Identity(B, B);
  Eigen::VectorXd p = Eigen::VectorXd::Constant(B, 1.0 / B);
  return DiscretePrior(atoms, p);
}

DiscretePrior DiscretePrior::from_json(const nlohmann::json& doc) {
  const int B = doc.at("B").get<int>();
  const auto& ja = doc.at("atoms");
  const auto& jw = doc.at("weights");
  const int K = static_cast<int>(ja.size());
  if (K < 1 || static_cast<int>(jw.size()) != K)
    throw std::invalid_argument("prior json: atoms/weights size mismatch");
  Eigen::MatrixXd atoms(K, B);
  for (int k = 0; k < K; ++k) {
    if (static_cast<int>(ja[k].size()) != B)
      throw std::invalid_argument("prior json: atom dimension != B");
    for (int j = 0; j < B; ++j) atoms(k, j) = ja[k][j].get<double>();
  }
  Eigen::VectorXd weights(K);
  for (int k = 0; k < K; ++k) weights[k] = jw[k].get<double>();
  return DiscretePrior(atoms, weights);
}

DiscretePrior DiscretePrior::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open prior file: " + path);
  nlohmann::json doc;
  in >> doc;
  return from_json(doc);
}

DiscretePrior DiscretePrior::parse(const std::string& name) {
  if (name == "binary") return binary();
  if (name.rfind("sparse:", 0) == 0)
    return sparse(std::stod(name.substr(7)));
  if (name.rfind("onehot:", 0) == 0)
    return one_hot(std::stoi(name.substr(7)));
  return from_json_file(name);
}

Eigen::VectorXd DiscretePrior::mean() const {
  return atoms_.transpose() * weights_;
}

double DiscretePrior::second_moment() const {
  return weights_.dot(atoms_.rowwise().squaredNorm());
}

double DiscretePrior::prior_variance() const {
  return second_moment() - mean().squaredNorm();
}

double DiscretePrior::entropy() const {
  return -weights_.dot(weights_.array().log().matrix());
}

int DiscretePrior::sample_atom(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  const int K = num_atoms();
  for (int k = 0; k < K; ++k) {
    acc += weights_[k];
    if (u < acc) return k;
  }
  return K - 1;
}

Eigen::VectorXd DiscretePrior::sample_sections(int L, Rng& rng) const {
  if (L < 1) throw std::invalid_argument("sample_sections: L must be >= 1");
  const int B = section_dim();
  Eigen::VectorXd out(static_cast<Eigen::Index>(L) * B);
  for (int l = 0; l < L; ++l)
    out.segment(static_cast<Eigen::Index>(l) * B, B) =
        atoms_.row(sample_atom(rng)).transpose();
  return out;
}

Eigen::VectorXd DiscretePrior::posterior_log_weights(const Eigen::VectorXd& y,
                                                     double sigma2) const {
  const int K = num_atoms();
  Eigen::VectorXd lw(K);
  for (int k = 0; k < K; ++k)
    lw[k] = std::log(weights_[k]) -
            (y - atoms_.row(k).transpose()).squaredNorm() / (2.0 * sigma2);
  lw.array() -= lw.maxCoeff();
  return lw;
}

Eigen::VectorXd DiscretePrior::denoise(const Eigen::VectorXd& y,
                                       double sigma2) const {
  if (!(sigma2 > 0.0)) throw std::domain_error("denoise: sigma2 must be > 0");
  if (y.size() != section_dim())
    throw std::invalid_argument("denoise: y has wrong dimension");
  const Eigen::VectorXd w = posterior_log_weights(y, sigma2).array().exp();
  return (atoms_.transpose() * w) / w.sum();
}

Eigen::MatrixXd DiscretePrior::denoiser_jacobian(const Eigen::VectorXd& y,
                                                 double sigma2) const {
  if (!(sigma2 > 0.0))
    throw std::domain_error("denoiser_jacobian: sigma2 must be > 0");
  const Eigen::VectorXd w = posterior_log_weights(y, sigma2).array().exp();
  const double z = w.sum();
  const Eigen::VectorXd m = (atoms_.transpose() * w) / z;
  Eigen::MatrixXd second =
      atoms_.transpose() * w.asDiagonal() * atoms_ / z;  // <x x^T>
  return (second - m * m.transpose()) / sigma2;
}

namespace {

// E over S is always the exact atom sum; the Gaussian average differs by B.
double mmse_gh(const DiscretePrior& prior, double sigma, int gh_nodes) {
  const auto& rule = gauss_hermite(gh_nodes);
  const int K = prior.num_atoms();
  double acc = 0.0;
  Eigen::VectorXd y(1);
  for (int k = 0; k < K; ++k) {
    const double a = prior.atoms()(k, 0);
    double inner = 0.0;
    for (int i = 0; i < rule.nodes.size(); ++i) {
      y[0] = a + rule.nodes[i] * sigma;
      const double d = a - prior.denoise(y, sigma * sigma)[0];
      inner += rule.weights[i] * d * d;
    }
    acc += prior.weights()[k] * inner;
  }
  return acc;
}

MmseEstimate mmse_qmc(const DiscretePrior& prior, double sigma,
                      int n_samples) {
  const int B = prior.section_dim();
  const int K = prior.num_atoms();
  const Eigen::MatrixXd z = qmc_gaussian(n_samples, B);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    double f = 0.0;
    for (int k = 0; k < K; ++k) {
      const Eigen::VectorXd a = prior.atoms().row(k).transpose();
      const Eigen::VectorXd y = a + sigma * z.row(i).transpose();
      f += prior.weights()[k] * (a - prior.denoise(y, sigma * sigma)).squaredNorm();
    }
    sum += f;
    sumsq += f * f;
  }
  const double mean = sum / n_samples;
  const double var = std::max(0.0, sumsq / n_samples - mean * mean);
  return {mean, std::sqrt(var / n_samples)};
}

}  // namespace

MmseEstimate mmse_fn_with_error(const DiscretePrior& prior, double snr,
                                const QuadratureSpec& quad) {
  if (snr < 0.0) throw std::domain_error("mmse_fn: snr must be >= 0");
  if (snr == 0.0) return {prior.prior_variance(), 0.0};
  const double sigma = 1.0 / std::sqrt(snr);
  MmseEstimate est;
  if (prior.section_dim() == 1)
    est = {mmse_gh(prior, sigma, quad.gh_nodes), 0.0};
  else
    est = mmse_qmc(prior, sigma, quad.qmc_samples);
  est.value = std::max(0.0, est.value);
  return est;
}

double mmse_fn(const DiscretePrior& prior, double snr,
               const QuadratureSpec& quad) {
  return mmse_fn_with_error(prior, snr, quad).value;
}

namespace {

double log_mix(const DiscretePrior& prior, const Eigen::VectorXd& shift,
               double sigma, double sigma2) {
  // ln sum_l p_l exp(-||a_l - shift||^2 / (2 sigma^2)), max-subtracted
  const int K = prior.num_atoms();
  Eigen::VectorXd lw(K);
  for (int l = 0; l < K; ++l)
    lw[l] = std::log(prior.weights()[l]) -
            (prior.atoms().row(l).transpose() - shift).squaredNorm() /
                (2.0 * sigma2);
  const double m = lw.maxCoeff();
  return m + std::log((lw.array() - m).exp().sum());
}

}  // namespace

double denoising_mi(const DiscretePrior& prior, double sigma2,
                    const QuadratureSpec& quad) {
  if (!(sigma2 > 0.0))
    throw std::domain_error("denoising_mi: sigma2 must be > 0");
  const double sigma = std::sqrt(sigma2);
  const int B = prior.section_dim();
  const int K = prior.num_atoms();
  double acc = 0.0;
  if (B == 1) {
    const auto& rule = gauss_hermite(quad.gh_nodes);
    Eigen::VectorXd shift(1);
    for (int k = 0; k < K; ++k) {
      const double a = prior.atoms()(k, 0);
      double inner = 0.0;
      for (int i = 0; i < rule.nodes.size(); ++i) {
        shift[0] = a + rule.nodes[i] * sigma;
        inner += rule.weights[i] * log_mix(prior, shift, sigma, sigma2);
      }
      acc += prior.weights()[k] * inner;
    }
  } else {
    const Eigen::MatrixXd z = qmc_gaussian(quad.qmc_samples, B);
    for (int i = 0; i < quad.qmc_samples; ++i) {
      double f = 0.0;
      for (int k = 0; k < K; ++k) {
        const Eigen::VectorXd shift = prior.atoms().row(k).transpose() +
                                      sigma * z.row(i).transpose();
        f += prior.weights()[k] * log_mix(prior, shift, sigma, sigma2);
      }
      acc += f;
    }
    acc /= quad.qmc_samples;
  }
  return std::max(0.0, -acc - 0.5 * B);
}

}  // namespace gle
