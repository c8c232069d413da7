#include <cmath>
#include <complex>
#include <stdexcept>

#include <doctest.h>

#include "cglmp/bell.hpp"
#include "cglmp/rng.hpp"
#include "cglmp/state.hpp"

using namespace cglmp;

namespace {

Vector random_unit_vector(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Vector v(n);
  for (int i = 0; i < n; ++i)
    v[i] = Complex(rng.uniform01() - 0.5, rng.uniform01() - 0.5);
  v.normalize();
  return v;
}

}  // namespace

TEST_CASE("maximally entangled state has uniform diagonal amplitudes") {
  for (int d : {2, 3, 4, 8}) {
    BipartiteState psi = maximally_entangled(d);
    double c = 1.0 / std::sqrt(static_cast<double>(d));
    CHECK(psi.dim() == d);
    CHECK(psi.amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        Complex expected = i == k ? Complex(c, 0.0) : Complex(0.0, 0.0);
        CHECK(std::abs(psi.amplitude(i, k) - expected) < 1e-15);
      }
    CHECK(psi.is_schmidt_diagonal());
  }
  CHECK_THROWS_AS(maximally_entangled(1), std::invalid_argument);
}

TEST_CASE("gamma state interpolates between product-like and maximal entanglement") {
  BipartiteState psi = gamma_state(0.7393724305634157);
  double g = 0.7393724305634157;
  double norm = std::sqrt(2.0 * (1.0 + g * g));
  CHECK(psi.amplitude(0, 0).real() == doctest::Approx(1.0 / norm).epsilon(1e-12));
  CHECK(psi.amplitude(1, 1).real() == doctest::Approx(g / norm).epsilon(1e-12));
  CHECK(psi.amplitude(2, 2).real() == doctest::Approx(g / norm).epsilon(1e-12));
  CHECK(psi.amplitude(3, 3).real() == doctest::Approx(1.0 / norm).epsilon(1e-12));

  BipartiteState unit = gamma_state(1.0);
  BipartiteState mes = maximally_entangled(4);
  CHECK((unit.amplitudes() - mes.amplitudes()).norm() < 1e-12);

  CHECK_THROWS_AS(gamma_state(0.0), std::invalid_argument);
  CHECK_THROWS_AS(gamma_state(-0.2), std::invalid_argument);
}

TEST_CASE("pump profile maps intensities to Schmidt coefficients") {
  PumpProfile gamma_like{{1.0, 0.5, 0.5, 1.0}};
  BipartiteState psi = pump_to_state(gamma_like);
  BipartiteState reference = gamma_state(std::sqrt(0.5));
  CHECK((psi.amplitudes() - reference.amplitudes()).norm() < 1e-12);

  BipartiteState uniform = pump_to_state(PumpProfile{{2.5, 2.5, 2.5, 2.5}});
  CHECK((uniform.amplitudes() - maximally_entangled(4).amplitudes()).norm() < 1e-12);

  BipartiteState single = pump_to_state(PumpProfile{{3.0, 0.0, 0.0, 0.0}});
  CHECK(single.amplitude(0, 0).real() == doctest::Approx(1.0));
  CHECK(std::abs(single.amplitude(1, 1)) < 1e-15);

  CHECK_THROWS_AS(pump_to_state(PumpProfile{{0.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(pump_to_state(PumpProfile{{1.0, -0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(pump_to_state(PumpProfile{{1.0}}), std::invalid_argument);
}

TEST_CASE("pump profiles are scale invariant") {
  SplitMix64 rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    PumpProfile profile{{rng.uniform01() + 0.01, rng.uniform01() + 0.01,
                         rng.uniform01() + 0.01, rng.uniform01() + 0.01}};
    double scale = 0.1 + 10.0 * rng.uniform01();
    PumpProfile scaled = profile;
    for (double& v : scaled.intensities) v *= scale;
    CHECK((pump_to_state(profile).amplitudes() - pump_to_state(scaled).amplitudes())
              .norm() < 1e-12);
  }
}

TEST_CASE("state constructors enforce the unit-norm invariant") {
  Vector bad(4);
  bad << 1.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS((PureState(bad)), std::invalid_argument);
  CHECK(PureState(bad, true).is_unnormalized_intermediate());
  CHECK_THROWS_AS(BipartiteState(2, bad), std::invalid_argument);

  Vector one(1);
  one << 1.0;
  CHECK_THROWS_AS((PureState(one)), std::invalid_argument);

  Vector wrong_len(6);
  wrong_len.setZero();
  wrong_len[0] = 1.0;
  CHECK_THROWS_AS(BipartiteState(2, wrong_len), std::invalid_argument);

  PureState ok(random_unit_vector(4, 7));
  CHECK(ok.dim() == 4);
  CHECK_THROWS_AS(ok.amplitude(4), std::invalid_argument);
}

TEST_CASE("depolarize mixes toward the identity") {
  BipartiteState psi = maximally_entangled(4);

  DensityOperator pure = depolarize(psi, 1.0);
  Matrix projector = psi.amplitudes() * psi.amplitudes().adjoint();
  CHECK((pure.matrix() - projector).cwiseAbs().maxCoeff() < 1e-14);

  DensityOperator white = depolarize(psi, 0.0);
  CHECK((white.matrix() - Matrix::Identity(16, 16) / 16.0).cwiseAbs().maxCoeff() <
        1e-14);

  SplitMix64 rng(11);
  for (double lambda : {0.2, 0.5, 0.9}) {
    DensityOperator rho = depolarize(BipartiteState(4, random_unit_vector(16, rng())),
                                     lambda);
    CHECK((rho.matrix() - rho.matrix().adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(rho.matrix().trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix());
    CHECK(solver.eigenvalues().minCoeff() > -1e-12);
  }

  CHECK_THROWS_AS(depolarize(psi, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(depolarize(psi, 1.1), std::invalid_argument);
}

TEST_CASE("depolarizing to the critical weight reaches the classical bound") {
  BipartiteState psi = maximally_entangled(4);
  double s = s_value(quantum_table(depolarize(psi, 0.6905497394878108))).value;
  CHECK(s == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("global phase fixing makes the leading coefficient real positive") {
  Vector v = random_unit_vector(9, 21);
  v *= std::exp(Complex(0.0, 1.234));
  Vector w = v;
  fix_global_phase(w);
  CHECK(w[0].imag() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(w[0].real() > 0.0);
  CHECK(std::abs(std::abs(w.dot(v)) - 1.0) < 1e-12);

  Vector leading_zero(3);
  leading_zero << Complex(0.0, 0.0), Complex(0.0, 0.6), Complex(0.8, 0.0);
  fix_global_phase(leading_zero);
  CHECK(leading_zero[1].real() == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(std::abs(leading_zero[1].imag()) < 1e-14);
}

TEST_CASE("density operator constructor validates shape and normalization") {
  Matrix bad_trace = Matrix::Identity(4, 4);
  CHECK_THROWS_AS(DensityOperator(2, bad_trace), std::invalid_argument);

  Matrix not_hermitian = Matrix::Zero(4, 4);
  not_hermitian(0, 1) = Complex(0.5, 0.0);
  not_hermitian(0, 0) = 1.0;
  CHECK_THROWS_AS(DensityOperator(2, not_hermitian), std::invalid_argument);

  Matrix wrong_size = Matrix::Identity(3, 3) / 3.0;
  CHECK_THROWS_AS(DensityOperator(2, wrong_size), std::invalid_argument);
}
