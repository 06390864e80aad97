#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "anomaly/fock.hpp"
#include "anomaly/multivector.hpp"
#include "anomaly/scalar.hpp"

using namespace anomaly;

namespace {

Clifford<Scalar> random_element(int n, std::mt19937& rng, int max_terms = 6) {
  std::uniform_int_distribution<std::uint32_t> mask(0, (1u << n) - 1);
  std::uniform_int_distribution<int> num(-5, 5);
  std::uniform_int_distribution<int> den(1, 4);
  Clifford<Scalar> r(n);
  for (int t = 0; t < max_terms; ++t)
    r.add(Mono{mask(rng), mask(rng)}, Scalar(Rational(num(rng), den(rng))));
  return r;
}

} // namespace

TEST_CASE("scalar ring") {
  Scalar a = Scalar::pi_half_pow(1, Rational(2));       // 2 sqrt(pi)
  Scalar b = Scalar::pi_half_pow(-1, Rational(1, 2));   // 1/(2 sqrt(pi))
  CHECK(a * b == Scalar(1));
  CHECK((a - a).is_zero());
  CHECK(Scalar(3) + Scalar(Rational(-3)) == Scalar());
  CHECK(Scalar::pi_half_pow(2).to_double() == doctest::Approx(3.14159265358979).epsilon(1e-12));
  CHECK_THROWS(Scalar::pi_half_pow(1).rational());
  CHECK(a.inverse() * a == Scalar(1));
}

TEST_CASE("generator relations") {
  const int n = 3;
  auto e1 = Clifford<Scalar>::e(n, 0);
  auto eh1 = Clifford<Scalar>::ehat(n, 0);
  auto e2 = Clifford<Scalar>::e(n, 1);
  CHECK(e1 * e1 == Clifford<Scalar>(n, Scalar(-1)));
  CHECK(eh1 * eh1 == Clifford<Scalar>(n, Scalar(1)));
  CHECK((e1 * eh1 + eh1 * e1).is_zero());
  CHECK((e1 * e2 + e2 * e1).is_zero());
}

TEST_CASE("wedge basics") {
  const int n = 2;
  auto e1 = Exterior<Scalar>::e(n, 0);
  auto e2 = Exterior<Scalar>::e(n, 1);
  auto h1 = Exterior<Scalar>::ehat(n, 0);
  auto h2 = Exterior<Scalar>::ehat(n, 1);
  CHECK((e1 * e1).is_zero());
  CHECK(e1 * h1 == Exterior<Scalar>::unit(n, Mono{1, 1}, Scalar(1)));
  CHECK((e1 * e2) * (h1 * h2) == Exterior<Scalar>::unit(n, Mono{3, 3}, Scalar(1)));
  // graded commutativity
  CHECK(e1 * e2 == -(e2 * e1));
  CHECK((e1 * e2) * h1 == h1 * (e1 * e2));
}

TEST_CASE("symbol and quantize are inverse on the full basis") {
  for (int n = 1; n <= 4; ++n) {
    for (std::uint32_t e = 0; e < (1u << n); ++e)
      for (std::uint32_t h = 0; h < (1u << n); ++h) {
        auto a = Clifford<Scalar>::unit(n, Mono{e, h}, Scalar(1));
        CHECK(quantize(symbol(a)) == a);
      }
  }
  // symbol_0 of e1*e1 = symbol_0(-1) = -1
  auto e1 = Clifford<Scalar>::e(2, 0);
  CHECK(symbol_k(e1 * e1, 0) == Exterior<Scalar>(2, Scalar(-1)));
}

TEST_CASE("fock representation is a homomorphism") {
  std::mt19937 rng(7);
  for (int n = 1; n <= 3; ++n)
    for (int trial = 0; trial < 10; ++trial) {
      auto a = random_element(n, rng);
      auto b = random_element(n, rng);
      CHECK(fock_rep(a * b) == fock_rep(a) * fock_rep(b));
    }
  CHECK(fock_rep(Clifford<Scalar>(2, Scalar(1))) == FockOperator<Scalar>::identity(2));
}

TEST_CASE("fock representation of e1 ehat1 at n=1") {
  // basis {1, e}: 1 -> -1, e -> e
  auto f = fock_rep(Clifford<Scalar>::e(1, 0) * Clifford<Scalar>::ehat(1, 0));
  CHECK(f.at(0, 0) == Scalar(-1));
  CHECK(f.at(1, 1) == Scalar(1));
  CHECK(f.at(0, 1) == Scalar(0));
  CHECK(f.at(1, 0) == Scalar(0));
}

TEST_CASE("volume element acts as pi^{n/2} (-1)^N") {
  for (int n = 1; n <= 4; ++n) {
    auto f = fock_rep(Clifford<Scalar>::volume(n));
    for (std::uint32_t x = 0; x < (1u << n); ++x)
      for (std::uint32_t y = 0; y < (1u << n); ++y) {
        Scalar expect;
        if (x == y) expect = Scalar::pi_half_pow(n, (std::popcount(x) & 1) ? Rational(-1) : Rational(1));
        CHECK(f.at(y, x) == expect);
      }
  }
}

TEST_CASE("supertrace: two algorithms agree exactly") {
  std::mt19937 rng(11);
  for (int n = 1; n <= 4; ++n)
    for (int trial = 0; trial < 50; ++trial) {
      auto a = random_element(n, rng);
      CHECK(supertrace_fock(a) == supertrace_berezin(a));
    }
}

TEST_CASE("supertrace vanishes below top filtration degree") {
  for (int n = 1; n <= 4; ++n)
    for (std::uint32_t e = 0; e < (1u << n); ++e)
      for (std::uint32_t h = 0; h < (1u << n); ++h) {
        auto a = Clifford<Scalar>::unit(n, Mono{e, h}, Scalar(1));
        const Scalar s = supertrace_fock(a);
        if (Mono{e, h}.degree() < 2 * n)
          CHECK(s.is_zero());
        else
          CHECK_FALSE(s.is_zero());
      }
}

TEST_CASE("supertrace of omega is (4 pi)^{n/2}") {
  for (int n = 1; n <= 4; ++n) {
    const Scalar expect = Scalar::pi_half_pow(n, Rational(1ll << n));
    CHECK(supertrace_fock(Clifford<Scalar>::volume(n)) == expect);
    CHECK(supertrace_berezin(Clifford<Scalar>::volume(n)) == expect);
  }
  CHECK(supertrace(Clifford<Scalar>(2, Scalar(1))).is_zero());
  // n=1: Str(e1 ehat1) = -2
  CHECK(supertrace_fock(Clifford<Scalar>::e(1, 0) * Clifford<Scalar>::ehat(1, 0)) == Scalar(-2));
}

TEST_CASE("supertrace kills supercommutators") {
  std::mt19937 rng(13);
  for (int n = 1; n <= 3; ++n)
    for (int trial = 0; trial < 20; ++trial) {
      auto a = random_element(n, rng);
      auto b = random_element(n, rng);
      // [a,b]_s = ab - (-1)^{|a||b|} ba, expanded over parity blocks
      auto a0 = a.even_part();
      auto a1 = a.odd_part();
      auto b0 = b.even_part();
      auto b1 = b.odd_part();
      auto super = a0 * b - b * a0 + a1 * b0 - b0 * a1 + a1 * b1 + b1 * a1;
      CHECK(supertrace_fock(super).is_zero());
    }
}

TEST_CASE("berezin trace") {
  for (int n = 1; n <= 4; ++n) {
    CHECK(berezin_trace(symbol(Clifford<Scalar>::volume(n))) == Scalar(1));
    const std::uint32_t full = (1u << n) - 1;
    Scalar expect = Scalar::pi_half_pow(-n, ((n * (n + 1) / 2) % 2) ? Rational(-1) : Rational(1));
    CHECK(berezin_trace(Exterior<Scalar>::unit(n, Mono{full, full}, Scalar(1))) == expect);
    CHECK(berezin_trace(Exterior<Scalar>::unit(n, Mono{full, full >> 1}, Scalar(1))).is_zero());
  }
}

TEST_CASE("clifford product is associative") {
  std::mt19937 rng(17);
  for (int n = 1; n <= 4; ++n)
    for (int trial = 0; trial < 10; ++trial) {
      auto a = random_element(n, rng, 4);
      auto b = random_element(n, rng, 4);
      auto c = random_element(n, rng, 4);
      CHECK((a * b) * c == a * (b * c));
    }
}

TEST_CASE("exterior_exp") {
  const int n = 2;
  CHECK(exterior_exp(Exterior<Scalar>(n)) == Exterior<Scalar>(n, Scalar(1)));
  // degree-2n element: square vanishes
  auto top = Exterior<Scalar>::unit(n, Mono{3, 3}, Scalar(Rational(5, 7)));
  CHECK(exterior_exp(top) == Exterior<Scalar>(n, Scalar(1)) + top);
  CHECK_THROWS(exterior_exp(Exterior<Scalar>::e(n, 0)));
  CHECK_THROWS(exterior_exp(Exterior<Scalar>(n, Scalar(1))));

  // round-trip with a formal log on 1 + nilpotent
  std::mt19937 rng(23);
  std::uniform_int_distribution<int> num(-3, 3);
  for (int trial = 0; trial < 10; ++trial) {
    Exterior<Scalar> x(3);
    x.add(Mono{3, 0}, Scalar(num(rng)));
    x.add(Mono{0, 3}, Scalar(num(rng)));
    x.add(Mono{5, 3}, Scalar(Rational(num(rng), 2)));
    auto ex = exterior_exp(x);
    // log(1+u) = u - u^2/2 + u^3/3
    auto u = ex - Exterior<Scalar>(3, Scalar(1));
    auto log = u - (u * u) * Scalar(Rational(1, 2)) + (u * u * u) * Scalar(Rational(1, 3));
    CHECK(log == x);
  }
}

TEST_CASE("lambda element matches the derivation action") {
  std::mt19937 rng(29);
  std::uniform_int_distribution<int> num(-3, 3);
  for (int n = 2; n <= 4; ++n)
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<std::vector<Scalar>> A(n, std::vector<Scalar>(n, Scalar(0)));
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          A[i][j] = Scalar(num(rng));
          A[j][i] = -A[i][j];
        }
      auto lhs = fock_rep(minus_lambda_element<Scalar>(A, n));
      auto rhs = so_derivation<Scalar>(A, n);
      // fock_rep(-lambda_A) = -(derivation action of A)
      CHECK(lhs + rhs == FockOperator<Scalar>(n));
    }
}

TEST_CASE("lambda_exp float mode") {
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  auto one = lambda_exp(zero);
  CHECK(one.coeff(Mono{}) == doctest::Approx(1.0));
  CHECK(one.filtration_degree() == 0);

  // n=2 rotation: action on Lambda V matches Lambda(exp(-A))? The derivation
  // action integrates to the exterior power of the group element.
  const double theta = 0.7;
  Eigen::MatrixXd A(2, 2);
  A << 0, theta, -theta, 0;
  auto el = lambda_exp(A);
  auto F = fock_rep(el).to_eigen();
  Eigen::MatrixXd Q = (-A).exp();
  Eigen::MatrixXd LQ = exterior_power_matrix(Q);
  CHECK((F - LQ).cwiseAbs().maxCoeff() < 1e-12);

  // group-likeness
  auto inv = lambda_exp(Eigen::MatrixXd(-A));
  auto prod = fock_rep(el * inv).to_eigen();
  CHECK((prod - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);

  // commuting block rotations multiply
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4, 4);
  B(0, 1) = 0.3;
  B(1, 0) = -0.3;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(4, 4);
  C(2, 3) = -0.9;
  C(3, 2) = 0.9;
  auto lhs = fock_rep(lambda_exp(B) * lambda_exp(C)).to_eigen();
  auto rhs = fock_rep(lambda_exp(Eigen::MatrixXd(B + C))).to_eigen();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXd bad(2, 2);
  bad << 1, 0, 0, 1;
  CHECK_THROWS(lambda_exp(bad));
}

TEST_CASE("lambda_exp exact mode at A = 0") {
  std::vector<std::vector<Scalar>> zero(3, std::vector<Scalar>(3, Scalar(0)));
  CHECK(lambda_exp_exact(zero, 3) == Clifford<Scalar>(3, Scalar(1)));
}

TEST_CASE("sigma0 projection") {
  const int n = 2;
  auto a = Clifford<Scalar>::e(n, 0) * Clifford<Scalar>::ehat(n, 1);
  CHECK(sigma0_projection(a, 2, 1).is_zero());
  auto b = Clifford<Scalar>::e(n, 0) * Clifford<Scalar>::ehat(n, 0);
  CHECK(sigma0_projection(b, 2, 1) == Exterior<Scalar>::unit(n, Mono{1, 1}, Scalar(1)));
  // n0 = n reduces to symbol_k
  std::mt19937 rng(31);
  auto r = random_element(n, rng);
  for (int k = 0; k <= 2 * n; ++k) CHECK(sigma0_projection(r, k, n) == symbol_k(r, k));
}
