#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include "gle/quadrature.hpp"
#include "gle/rng.hpp"

namespace gle {

/// Discrete prior on B-dimensional sections: P0 = sum_k p_k delta(. - a_k).
/// Immutable after construction.
class DiscretePrior {
 public:
  /// atoms is K x B (one atom per row), weights has K entries summing to 1
  /// (renormalized if off by <= 1e-9, rejected otherwise).
  DiscretePrior(Eigen::MatrixXd atoms, Eigen::VectorXd weights);

  static DiscretePrior binary();                        // +-1 w.p. 1/2, B=1
  static DiscretePrior sparse(double rho, double a = 1.0);  // {0, a}, B=1
  static DiscretePrior one_hot(int B);                  // B-dim superposition
  static DiscretePrior from_json(const nlohmann::json& doc);
  static DiscretePrior from_json_file(const std::string& path);

  /// Parse "binary", "sparse:<rho>", "onehot:<B>", or a JSON file path.
  static DiscretePrior parse(const std::string& name);

  int section_dim() const { return static_cast<int>(atoms_.cols()); }
  int num_atoms() const { return static_cast<int>(atoms_.rows()); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double s_max() const { return s_max_; }

  Eigen::VectorXd mean() const;
  double second_moment() const;   // v = E||S||^2
  double prior_variance() const;  // v - ||mean||^2
  double entropy() const;         // H(S) in nats

  int sample_atom(Rng& rng) const;
  /// L i.i.d. sections concatenated into a vector of length L*B.
  Eigen::VectorXd sample_sections(int L, Rng& rng) const;

  /// Posterior mean of the B-dim channel y = x + z*Sigma, x ~ P0.
  Eigen::VectorXd denoise(const Eigen::VectorXd& y, double sigma2) const;
  /// Gradient of denoise w.r.t. y: (1/sigma2) * posterior covariance.
  Eigen::MatrixXd denoiser_jacobian(const Eigen::VectorXd& y,
                                    double sigma2) const;

 private:
  Eigen::MatrixXd atoms_;    // K x B
  Eigen::VectorXd weights_;  // K
  double s_max_;

  /// log posterior atom weights at observation y, max-subtracted.
  Eigen::VectorXd posterior_log_weights(const Eigen::VectorXd& y,
                                        double sigma2) const;
};

/// MMSE of the B-dim scalar channel at the given snr (= 1/Sigma^2).
/// snr = 0 returns the prior variance exactly.
double mmse_fn(const DiscretePrior& prior, double snr,
               const QuadratureSpec& quad = {});

/// Same, with the QMC standard error for B > 1 (0 for B = 1).
struct MmseEstimate {
  double value;
  double stderr;
};
MmseEstimate mmse_fn_with_error(const DiscretePrior& prior, double snr,
                                const QuadratureSpec& quad = {});

/// Mutual information of the B-dim denoising channel y = s + z*Sigma.
double denoising_mi(const DiscretePrior& prior, double sigma2,
                    const QuadratureSpec& quad = {});

}  // namespace gle
