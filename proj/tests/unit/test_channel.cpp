#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mimopc/channel.hpp"
#include "mimopc/geometry.hpp"

using namespace mimopc;

TEST_CASE("local scattering: diagonal, Hermitian, PSD, trace") {
  Rng rng(1);
  std::uniform_real_distribution<double> B(1e-12, 1e-6), Phi(-std::numbers::pi, std::numbers::pi);
  const double asd = 10 * std::numbers::pi / 180;
  for (int i = 0; i < 1000; ++i) {
    const double beta = B(rng);
    const auto R = local_scattering(beta, Phi(rng), asd, Index{16});
    for (Index m = 0; m < 16; ++m) CHECK(R(m, m) == std::complex<double>(beta, 0));
    CHECK((R - R.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(is_hermitian_psd(R));
    CHECK(std::abs(R.trace().real() / 16 - beta) <= 1e-12 * beta);
  }
}

TEST_CASE("local scattering with zero spread is rank one") {
  const double beta = 2.5, phi = 0.3;
  const Index M = 8;
  const auto R = local_scattering(beta, phi, 0.0, M);
  Eigen::VectorXcd a(M);
  for (Index m = 0; m < M; ++m) {
    a(m) = std::polar(1.0, std::numbers::pi * static_cast<double>(m) * std::sin(phi));
  }
  const Eigen::MatrixXcd expected = beta * a * a.adjoint();
  CHECK((R - expected).cwiseAbs().maxCoeff() <= 1e-12 * beta);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(R);
  CHECK(es.eigenvalues()(M - 1) == doctest::Approx(beta * M));
  CHECK(std::abs(es.eigenvalues()(M - 2)) <= 1e-9 * beta * M);
}

TEST_CASE("local scattering with one antenna") {
  const auto R = local_scattering(0.7, 1.0, 0.2, Index{1});
  REQUIRE(R.rows() == 1);
  CHECK(R(0, 0) == std::complex<double>(0.7, 0));
}

TEST_CASE("off-diagonal decay with lag") {
  const auto R = local_scattering(1.0, 0.4, 0.5, Index{12});
  for (Index d = 1; d + 1 < 12; ++d) CHECK(std::abs(R(d + 1, 0)) <= std::abs(R(d, 0)));
  CHECK(std::abs(R(11, 0)) < 1e-6);
}

TEST_CASE("uncorrelated matrices") {
  const auto R = uncorrelated(2.0, Index{3});
  CHECK(R.isApprox(Eigen::MatrixXcd::Identity(3, 3) * 2.0));
  CHECK(uncorrelated(0.0, Index{4}).cwiseAbs().maxCoeff() == 0.0);
  CHECK(uncorrelated(0.3, Index{5}).trace().real() / 5 == doctest::Approx(0.3));
}
