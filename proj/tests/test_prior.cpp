#include <doctest.h>

#include <cmath>
#include <fstream>

#include "gle/prior.hpp"

using namespace gle;

namespace {

// Simpson quadrature of f(z) against the standard normal density.
template <typename F>
double normal_expectation(F f, int n = 8000, double range = 12.0) {
  const double h = 2.0 * range / n;
  auto g = [&](double z) {
    return f(z) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  };
  double sum = g(-range) + g(range);
  for (int i = 1; i < n; ++i)
    sum += g(-range + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Closed form for the symmetric binary prior: mmse = 1 - E[tanh(snr + sqrt(snr) Z)].
double binary_mmse_oracle(double snr) {
  return 1.0 - normal_expectation([&](double z) {
           return std::tanh(snr + std::sqrt(snr) * z);
         });
}

}  // namespace

TEST_CASE("moments") {
  auto binary = DiscretePrior::binary();
  CHECK(binary.mean()[0] == doctest::Approx(0.0));
  CHECK(binary.second_moment() == doctest::Approx(1.0));

  Eigen::MatrixXd a(1, 2);
  a << 0.3, -0.4;
  Eigen::VectorXd p(1);
  p << 1.0;
  DiscretePrior single(a, p);
  CHECK(single.mean()[0] == doctest::Approx(0.3));
  CHECK(single.mean()[1] == doctest::Approx(-0.4));
  CHECK(single.second_moment() == doctest::Approx(0.25));

  auto onehot = DiscretePrior::one_hot(2);
  CHECK(onehot.mean()[0] == doctest::Approx(0.5));
  CHECK(onehot.mean()[1] == doctest::Approx(0.5));
  CHECK(onehot.second_moment() == doctest::Approx(1.0));
}

TEST_CASE("entropy") {
  CHECK(DiscretePrior::binary().entropy() == doctest::Approx(std::log(2.0)));
  Eigen::MatrixXd a(1, 1);
  a << 2.0;
  Eigen::VectorXd p1(1);
  p1 << 1.0;
  CHECK(DiscretePrior(a, p1).entropy() == doctest::Approx(0.0));
  CHECK(DiscretePrior::sparse(0.25).entropy() ==
        doctest::Approx(-0.25 * std::log(0.25) - 0.75 * std::log(0.75)));
}

TEST_CASE("sample_sections") {
  Eigen::MatrixXd a(1, 1);
  a << 1.5;
  Eigen::VectorXd p1(1);
  p1 << 1.0;
  DiscretePrior single(a, p1);
  Rng rng(1);
  Eigen::VectorXd s = single.sample_sections(7, rng);
  CHECK((s.array() == 1.5).all());

  auto binary = DiscretePrior::binary();
  const int L = 100000;
  Rng rng2(2);
  Eigen::VectorXd sig = binary.sample_sections(L, rng2);
  const double frac_plus = (sig.array() > 0).count() / static_cast<double>(L);
  CHECK(std::abs(frac_plus - 0.5) < 3.0 * std::sqrt(0.25 / L));

  Rng r1(77), r2(77);
  CHECK((binary.sample_sections(100, r1) - binary.sample_sections(100, r2))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("denoise") {
  auto binary = DiscretePrior::binary();
  Eigen::VectorXd y0(1);
  y0 << 0.0;
  CHECK(binary.denoise(y0, 0.7)[0] == doctest::Approx(0.0));

  Eigen::MatrixXd a(1, 1);
  a << -0.8;
  Eigen::VectorXd p1(1);
  p1 << 1.0;
  DiscretePrior single(a, p1);
  Eigen::VectorXd y(1);
  y << 3.2;
  CHECK(single.denoise(y, 2.0)[0] == doctest::Approx(-0.8));

  Eigen::VectorXd y1(1);
  y1 << 1.0;
  CHECK(binary.denoise(y1, 1.0)[0] == doctest::Approx(std::tanh(1.0)));

  CHECK_THROWS_AS(binary.denoise(y1, 0.0), std::domain_error);
  CHECK_THROWS_AS(binary.denoise(y1, -1.0), std::domain_error);
}

TEST_CASE("denoise stays in the atom convex hull") {
  auto sparse = DiscretePrior::sparse(0.2, 1.3);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd y(1);
    y << 6.0 * rng.gaussian();
    const double s2 = 0.01 + 4.0 * rng.uniform();
    const double out = sparse.denoise(y, s2)[0];
    CHECK(out >= 0.0);
    CHECK(out <= 1.3);
  }
}

TEST_CASE("denoiser_jacobian closed forms") {
  Eigen::MatrixXd a(1, 2);
  a << 0.1, 0.2;
  Eigen::VectorXd p1(1);
  p1 << 1.0;
  DiscretePrior single(a, p1);
  Eigen::VectorXd y2(2);
  y2 << 1.0, -1.0;
  CHECK(single.denoiser_jacobian(y2, 0.5).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0));

  auto binary = DiscretePrior::binary();
  for (double yv : {-1.5, 0.0, 0.4, 2.0}) {
    for (double s2 : {0.3, 1.0, 2.5}) {
      Eigen::VectorXd y(1);
      y << yv;
      const double t = std::tanh(yv / s2);
      CHECK(binary.denoiser_jacobian(y, s2)(0, 0) ==
            doctest::Approx((1.0 - t * t) / s2).epsilon(1e-12));
    }
  }

  // sigma2 -> infinity kills the Jacobian
  Eigen::VectorXd y(1);
  y << 0.7;
  CHECK(binary.denoiser_jacobian(y, 1e8)(0, 0) < 2e-8);
}

TEST_CASE("denoiser_jacobian matches finite differences") {
  auto onehot = DiscretePrior::one_hot(3);
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd y(3);
    for (int j = 0; j < 3; ++j) y[j] = 2.0 * rng.gaussian();
    const double s2 = 0.05 + 2.0 * rng.uniform();
    const Eigen::MatrixXd jac = onehot.denoiser_jacobian(y, s2);
    const double h = 1e-6 * std::max(1.0, y.norm());
    for (int j = 0; j < 3; ++j) {
      Eigen::VectorXd yp = y, ym = y;
      yp[j] += h;
      ym[j] -= h;
      const Eigen::VectorXd fd =
          (onehot.denoise(yp, s2) - onehot.denoise(ym, s2)) / (2.0 * h);
      for (int r = 0; r < 3; ++r) {
        const double scale = std::max(std::abs(fd[r]), 1e-4);
        CHECK(std::abs(jac(r, j) - fd[r]) / scale < 1e-5);
      }
    }
    // symmetric PSD with bounded trace
    CHECK((jac - jac.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
  }
}

TEST_CASE("mmse_fn against the closed binary form") {
  auto binary = DiscretePrior::binary();
  CHECK(mmse_fn(binary, 0.0) == doctest::Approx(1.0));
  CHECK(mmse_fn(binary, 1e6) <= std::exp(-10.0));
  CHECK(mmse_fn(binary, 1.0) ==
        doctest::Approx(binary_mmse_oracle(1.0)).epsilon(1e-8));
  CHECK(mmse_fn(binary, 0.37) ==
        doctest::Approx(binary_mmse_oracle(0.37)).epsilon(1e-8));
}

TEST_CASE("mmse_fn monotone non-increasing in snr") {
  auto sparse = DiscretePrior::sparse(0.1);
  double prev = mmse_fn(sparse, 0.0);
  for (int i = 0; i < 50; ++i) {
    const double snr = std::pow(10.0, -2.0 + 4.0 * i / 49.0);
    const double m = mmse_fn(sparse, snr);
    CHECK(m <= prev + 1e-12);
    prev = m;
  }
}

TEST_CASE("mmse_fn exponential decay regime") {
  auto binary = DiscretePrior::binary();
  // slope of ln mmse over snr in [10, 40]
  const double lo = std::log(mmse_fn(binary, 10.0));
  const double hi = std::log(mmse_fn(binary, 40.0));
  CHECK((hi - lo) / 30.0 <= -0.4);
  double prev = lo;
  for (double snr = 12.0; snr <= 40.0; snr += 2.0) {
    const double cur = std::log(mmse_fn(binary, snr));
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("posterior variance identity ties mmse to the Jacobian") {
  // mmse(1/sigma2) = E_y[sigma2 * tr J(y)] with y = s + sigma z
  auto sparse = DiscretePrior::sparse(0.3, 1.1);
  const auto& rule = gauss_hermite(201);
  for (double s2 : {0.2, 0.9, 3.0}) {
    const double sigma = std::sqrt(s2);
    double avg = 0.0;
    for (int k = 0; k < sparse.num_atoms(); ++k) {
      for (int i = 0; i < rule.nodes.size(); ++i) {
        Eigen::VectorXd y(1);
        y << sparse.atoms()(k, 0) + sigma * rule.nodes[i];
        avg += sparse.weights()[k] * rule.weights[i] * s2 *
               sparse.denoiser_jacobian(y, s2).trace();
      }
    }
    CHECK(mmse_fn(sparse, 1.0 / s2) == doctest::Approx(avg).epsilon(1e-6));
  }
}

TEST_CASE("mmse_fn_with_error reports a QMC stderr for B > 1") {
  auto onehot = DiscretePrior::one_hot(3);
  auto est = mmse_fn_with_error(onehot, 2.0);
  CHECK(est.value > 0.0);
  CHECK(est.value < onehot.second_moment());
  CHECK(est.stderr > 0.0);
  auto binary_est = mmse_fn_with_error(DiscretePrior::binary(), 2.0);
  CHECK(binary_est.stderr == 0.0);
}

TEST_CASE("json round trip and validation") {
  nlohmann::json doc = {
      {"B", 2},
      {"atoms", {{1.0, 0.0}, {0.0, 1.0}}},
      {"weights", {0.5, 0.5}},
  };
  auto prior = DiscretePrior::from_json(doc);
  CHECK(prior.section_dim() == 2);
  CHECK(prior.num_atoms() == 2);
  CHECK(prior.second_moment() == doctest::Approx(1.0));

  doc["weights"] = {0.5, 0.5 + 5e-10};  // renormalized
  CHECK_NOTHROW(DiscretePrior::from_json(doc));
  doc["weights"] = {0.5, 0.6};  // rejected
  CHECK_THROWS(DiscretePrior::from_json(doc));
  doc["weights"] = {0.5, -0.5};
  CHECK_THROWS(DiscretePrior::from_json(doc));
}

TEST_CASE("parse builtins and files") {
  auto sparse = DiscretePrior::parse("sparse:0.1");
  CHECK(sparse.second_moment() == doctest::Approx(0.1));
  auto onehot = DiscretePrior::parse("onehot:4");
  CHECK(onehot.section_dim() == 4);
  CHECK(onehot.entropy() == doctest::Approx(std::log(4.0)));

  const std::string path = "parse_prior_tmp.json";
  {
    std::ofstream out(path);
    out << R"({"B":1,"atoms":[[2.0],[-2.0]],"weights":[0.5,0.5]})";
  }
  auto loaded = DiscretePrior::parse(path);
  CHECK(loaded.second_moment() == doctest::Approx(4.0));
  CHECK(loaded.s_max() == doctest::Approx(2.0));
}
