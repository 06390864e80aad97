#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "anomaly/spectral.hpp"

using namespace anomaly;

namespace {

constexpr double pi = std::numbers::pi;

Eigen::MatrixXd rot2(double a) {
  Eigen::MatrixXd r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

CircleModel trivial_model(int N, int rank = 1) {
  CircleModel m;
  m.N = N;
  m.rank = rank;
  m.g = [](double) { return 1.0; };
  m.h = [rank](double) { return Eigen::MatrixXd::Identity(rank, rank); };
  m.U = Eigen::MatrixXd::Identity(rank, rank);
  return m;
}

// reflection-symmetric rank-1 circle with smooth non-parallel g and h
CircleModel curved_model(int N) {
  CircleModel m = trivial_model(N);
  m.g = [](double t) { return 1.0 + 0.3 * std::cos(t); };
  m.h = [](double t) {
    return Eigen::MatrixXd::Constant(1, 1, std::exp(0.3 * std::cos(t) + 0.1 * std::cos(2 * t)));
  };
  return m;
}

std::vector<CohomologyBlock> circle_blocks(const CircleModel& m, bool reflection) {
  const double dth = 2.0 * pi / m.N;
  std::vector<CohomologyBlock> blocks(2);
  blocks[0].degree = 0;
  blocks[0].chi = 1.0;
  blocks[0].cocycles = Eigen::MatrixXd::Ones(m.N, 1);
  blocks[1].degree = 1;
  blocks[1].chi = reflection ? -1.0 : 1.0;
  blocks[1].cocycles = Eigen::MatrixXd::Constant(m.N, 1, dth);
  blocks[1].gauge_pins = 1;
  return blocks;
}

double reduced_theta_prime(const SpectralDegree& s0) {
  double acc = 0.0;
  for (int i = s0.kerdim; i < s0.evals.size(); ++i)
    acc += std::log(s0.evals(i)) * s0.vecs.col(i).dot(s0.gammaS * s0.vecs.col(i));
  return acc;
}

} // namespace

TEST_CASE("trivial circle complex") {
  const int N = 16;
  auto dc = build_complex(trivial_model(N));
  const auto sp = analyze(dc);
  REQUIRE(sp.size() == 2);
  CHECK(sp[0].kerdim == 1);
  CHECK(sp[1].kerdim == 1);
  // lattice-normalized spectrum of the flat Laplacian: 2 - 2 cos(2 pi k / N)
  std::vector<double> expect;
  for (int k = 0; k < N; ++k) expect.push_back(2.0 - 2.0 * std::cos(2.0 * pi * k / N));
  std::sort(expect.begin(), expect.end());
  for (int i = 0; i < N; ++i) CHECK(sp[0].evals(i) == doctest::Approx(expect[i]).epsilon(1e-12));
  // positivity
  CHECK(sp[0].evals.minCoeff() > -1e-10 * sp[0].evals.maxCoeff());
  CHECK(sp[1].evals.minCoeff() > -1e-10 * sp[1].evals.maxCoeff());
}

TEST_CASE("holonomy removes the kernel and pins the torsion") {
  const double phi = 1.1;
  for (int N : {16, 64}) {
    auto m = trivial_model(N, 2);
    m.U = rot2(phi);
    auto dc = build_complex(m);
    const auto sp = analyze(dc);
    CHECK(sp[0].kerdim == 0);
    CHECK(sp[1].kerdim == 0);
    // combinatorial determinant of the twisted difference operator is
    // grid-independent: log tau = -log(4 sin^2(phi/2))
    const double expect = -std::log(4.0 * std::pow(std::sin(phi / 2.0), 2));
    CHECK(log_torsion(sp) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("isometry commutes with the Laplacians") {
  auto m = curved_model(24);
  m.iso_kind = 2;
  auto dc = build_complex(m);
  for (int q = 0; q < 2; ++q) {
    const Eigen::MatrixXd L = dc.laplacian(q);
    const Eigen::MatrixXd G = dc.deg[q].gamma;
    CHECK((G * L - L * G).cwiseAbs().maxCoeff() < 1e-12 * L.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("zeta values against direct traces") {
  auto m = curved_model(20);
  m.iso_kind = 2;
  auto dc = build_complex(m);
  const auto sp = analyze(dc);
  // s = -1 and s = -2 are plain polynomial traces (the kernel contributes 0)
  const Eigen::MatrixXd L1 = dc.laplacian(1);
  const Eigen::MatrixXd G1 = dc.deg[1].gamma;
  CHECK(zeta_theta(sp, -1.0) == doctest::Approx(-(G1 * L1).trace()).epsilon(1e-12));
  CHECK(zeta_theta(sp, -2.0) == doctest::Approx(-(G1 * L1 * L1).trace()).epsilon(1e-12));
  CHECK(std::isfinite(zeta_theta(sp, 0.0)));
  // numerical s-derivative at 0
  const double ds = 1e-6;
  const double fd = (zeta_theta(sp, ds) - zeta_theta(sp, -ds)) / (2.0 * ds);
  CHECK(std::abs(fd - theta_prime_zero(sp)) < 1e-8);
}

TEST_CASE("degree-0 reduction of theta on the circle") {
  for (int iso : {0, 1, 2}) {
    auto m = curved_model(24);
    m.iso_kind = iso;
    m.iso_param = (iso == 1) ? 5 : 0;
    if (iso == 1) {
      // rotation-invariant data
      m.g = [](double) { return 1.3; };
      m.h = [](double) { return Eigen::MatrixXd::Constant(1, 1, 0.7); };
    }
    auto dc = build_complex(m);
    const auto sp = analyze(dc);
    CHECK(theta_prime_zero(sp) == doctest::Approx(reduced_theta_prime(sp[0])).epsilon(1e-10));
  }
}

TEST_CASE("equivariant log metric closed cases") {
  const int N = 32;
  const double dth = 2.0 * pi / N;
  auto m = trivial_model(N);
  auto blocks = circle_blocks(m, false);
  CHECK(equivariant_log_metric(build_complex(m), blocks) ==
        doctest::Approx(-2.0 * std::log(dth)).epsilon(1e-12));

  // scaling h by e^c shifts the degree-0 Gram by c per kernel vector
  const double c = 0.37;
  auto ms = m;
  ms.h = [c](double) { return Eigen::MatrixXd::Constant(1, 1, std::exp(c)); };
  const std::vector<CohomologyBlock> only0{blocks[0]};
  CHECK(equivariant_log_metric(build_complex(ms), only0) -
            equivariant_log_metric(build_complex(m), only0) ==
        doctest::Approx(c).epsilon(1e-12));
}

TEST_CASE("harmonic representative is class-invariant") {
  auto m = curved_model(48);
  auto dc = build_complex(m);
  auto blocks = circle_blocks(m, false);
  const double base = equivariant_log_metric(dc, blocks);
  // shift the degree-1 cocycle by an exact form: same class, same metric
  std::mt19937 rng(57);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd w(m.N);
  for (int i = 0; i < m.N; ++i) w(i) = u(rng);
  blocks[1].cocycles += dc.d[0] * w;
  CHECK(equivariant_log_metric(dc, blocks) == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("variation identities for the discrete Laplacians") {
  auto m = curved_model(64);
  auto blocks = circle_blocks(m, false);

  SUBCASE("metric family") {
    m.gdot = [](double t) { return std::cos(t); };
    const auto res = laplacian_variation_check(m, blocks, 1e-4);
    CHECK(res.laplacian[0] < 1e-6);
    CHECK(res.laplacian[1] < 1e-6);
    CHECK(res.log_metric < 1e-6);
  }
  SUBCASE("fiber family") {
    m.hdot = [&m](double t) {
      return Eigen::MatrixXd((0.4 + 0.25 * std::cos(t)) * m.h(t));
    };
    const auto res = laplacian_variation_check(m, blocks, 1e-4);
    CHECK(res.laplacian[0] < 1e-6);
    CHECK(res.laplacian[1] < 1e-6);
    CHECK(res.log_metric < 1e-6);
  }
  SUBCASE("constant family") {
    m.gdot = [](double) { return 0.0; };
    const auto res = laplacian_variation_check(m, blocks, 1e-4);
    CHECK(res.laplacian[0] == 0.0);
    CHECK(res.laplacian[1] == 0.0);
    CHECK(res.log_metric < 1e-14);
  }
}

TEST_CASE("graded heat trace reduces to the kernel character") {
  for (int iso : {0, 2}) {
    auto m = curved_model(24);
    m.iso_kind = iso;
    m.hdot = [&m](double t) { return Eigen::MatrixXd(0.3 * m.h(t)); };
    auto dc = build_complex(m);
    const auto sp = analyze(dc);
    double kerchar = 0.0;
    for (int q = 0; q < 2; ++q) {
      const double sign = (q % 2 ? -1.0 : 1.0);
      for (int i = 0; i < sp[q].kerdim; ++i)
        kerchar += sign * sp[q].vecs.col(i).dot(sp[q].gammaS * sp[q].vecs.col(i));
    }
    for (double t : {0.5, 2.0, 10.0})
      CHECK(heat_supertrace(dc, sp, false, t) == doctest::Approx(kerchar).epsilon(1e-10));
    CHECK(std::isfinite(heat_supertrace(dc, sp, true, 1.0)));
  }
}

TEST_CASE("linear extrapolation to t = 0") {
  CHECK(lim_t0([](double t) { return 3.5 - 2.0 * t; }, 0.1, 0.5, 8) ==
        doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("finite-dimensional variation identity for graded families") {
  SUBCASE("diagonal closed form") {
    Eigen::VectorXd lam(3), mu(3);
    lam << 1.0, 2.0, 4.0;
    mu << 0.3, -0.7, 1.1;
    GradedFamily f;
    f.H = {[](double) { return Eigen::MatrixXd::Zero(3, 3); },
           [=](double e) { return Eigen::MatrixXd((lam + e * mu).asDiagonal()); }};
    f.gamma = {Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3)};
    CHECK(prop_var_finite_check(f, 1e-5) < 1e-9);
    // check the value itself against -sum (-1)^q q mu/lambda
    const double step = 1e-5;
    auto tp = [&](double e) {
      double acc = 0.0;
      for (int i = 0; i < 3; ++i) acc += std::log(lam(i) + e * mu(i));
      return acc;
    };
    const double fd = (tp(step) - tp(-step)) / (2.0 * step);
    CHECK(fd == doctest::Approx((mu.array() / lam.array()).sum()).epsilon(1e-8));
  }
  SUBCASE("random graded families") {
    std::mt19937 rng(61);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      GradedFamily f;
      for (int q = 0; q < 3; ++q) {
        const int n = 4 + int(rng() % 13); // dims up to 16
        Eigen::MatrixXd G(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) G(i, j) = u(rng);
        const Eigen::MatrixXd W = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();
        Eigen::VectorXd lam(n), mu(n), sgn(n);
        const int ker = int(rng() % 3);
        for (int i = 0; i < n; ++i) {
          lam(i) = (i < ker) ? 0.0 : 0.5 + std::abs(u(rng)) * 3.0;
          mu(i) = (i < ker) ? 0.0 : u(rng);
          sgn(i) = (rng() % 2) ? 1.0 : -1.0;
        }
        f.H.push_back([=](double e) {
          return Eigen::MatrixXd(W * (lam + e * mu).asDiagonal() * W.transpose());
        });
        f.gamma.push_back(W * sgn.asDiagonal() * W.transpose());
      }
      CHECK(prop_var_finite_check(f, 1e-5) < 1e-6);
    }
  }
  SUBCASE("kernel jump aborts") {
    GradedFamily f;
    f.H = {[](double) { return Eigen::MatrixXd::Zero(2, 2); },
           [](double e) { return Eigen::MatrixXd(Eigen::Vector2d(1.0, e * e).asDiagonal()); }};
    f.gamma = {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)};
    CHECK_THROWS_AS(prop_var_finite_check(f, 1e-3), ConstantKernelViolation);
  }
}

TEST_CASE("guard band flags near-kernel eigenvalues") {
  DiscreteComplex dc;
  dc.deg.resize(1);
  auto& D = dc.deg[0];
  Eigen::VectorXd diag(3);
  diag << 1.0, 5e-8, 0.0;
  D.K = Eigen::MatrixXd(diag.asDiagonal());
  SpMat eye(3, 3);
  eye.setIdentity();
  D.M = D.Msqrt = D.Minvsqrt = D.gamma = eye;
  CHECK_THROWS_AS(analyze(dc), IllConditioned);
}

TEST_CASE("reflection anomaly with a fiber-metric family") {
  auto m = curved_model(256);
  m.iso_kind = 2;
  auto v = [](double t) { return 0.4 + 0.25 * std::cos(t); };
  m.hdot = [&m, v](double t) { return Eigen::MatrixXd(v(t) * m.h(t)); };
  const auto rep = anomaly_experiment(m, circle_blocks(m, true), 'h');
  CHECK(rep.rhs == doctest::Approx(v(0.0) + v(pi)).epsilon(1e-12));
  CHECK(std::abs(rep.lhs - rep.rhs) < 1e-6);
}

TEST_CASE("vanishing variations") {
  SUBCASE("identity isometry, fiber family") {
    auto m = curved_model(256);
    m.hdot = [&m](double t) { return Eigen::MatrixXd((0.4 + 0.25 * std::cos(t)) * m.h(t)); };
    const auto rep = anomaly_experiment(m, circle_blocks(m, false), 'h');
    CHECK(rep.rhs == 0.0);
    CHECK(std::abs(rep.lhs) < 1e-6);
  }
  SUBCASE("identity isometry, metric family") {
    auto m = curved_model(256);
    m.gdot = [&m](double t) { return m.g(t) * std::cos(t); };
    const auto rep = anomaly_experiment(m, circle_blocks(m, false), 'g');
    CHECK(rep.rhs == 0.0);
    CHECK(std::abs(rep.lhs) < 1e-6);
  }
  SUBCASE("reflection, metric family with flat fixed points") {
    auto m = curved_model(256);
    m.iso_kind = 2;
    m.gdot = [&m](double t) { return m.g(t) * (std::cos(t) - std::cos(3 * t)); };
    const auto rep = anomaly_experiment(m, circle_blocks(m, true), 'g');
    CHECK(rep.rhs == 0.0);
    CHECK(std::abs(rep.lhs) < 1e-6);
  }
}

TEST_CASE("torsion convergence under refinement with holonomy") {
  const double phi = 0.8;
  auto tau = [&](int N) {
    auto m = trivial_model(N, 2);
    m.U = rot2(phi);
    return log_torsion(analyze(build_complex(m)));
  };
  const double t1 = tau(32), t2 = tau(64), t3 = tau(128);
  const double r12 = t2 + (t2 - t1) / 3.0;
  const double r23 = t3 + (t3 - t2) / 3.0;
  CHECK(std::abs(r23 - r12) < 1e-6);
}

TEST_CASE("torus complex structure") {
  TorusModel tm;
  tm.N = 8;
  tm.h = [](double x, double y) { return std::exp(0.2 * std::cos(x) + 0.3 * std::cos(y)); };
  tm.minus_id = true;
  auto dc = torus_complex(tm);
  // d1 d0 = 0
  const Eigen::MatrixXd dd = Eigen::MatrixXd(SpMat(dc.d[1] * dc.d[0]));
  CHECK(dd.cwiseAbs().maxCoeff() == 0.0);
  // kernel dimensions of the de Rham complex of T^2
  const auto sp = analyze(dc);
  CHECK(sp[0].kerdim == 1);
  CHECK(sp[1].kerdim == 2);
  CHECK(sp[2].kerdim == 1);
  // theta reduction to degrees 0 and 2 (gamma-weighted)
  CHECK(torus_theta_prime_zero(dc) == doctest::Approx(theta_prime_zero(sp)).epsilon(1e-9));
}

TEST_CASE("torus anomaly at the four fixed points") {
  TorusModel tm;
  tm.N = 16;
  tm.h = [](double x, double y) { return std::exp(0.2 * std::cos(x) + 0.3 * std::cos(y)); };
  auto v = [](double x, double y) { return 0.3 + 0.2 * std::cos(x) * std::cos(y); };
  tm.hdot = [&tm, v](double x, double y) { return v(x, y) * tm.h(x, y); };
  tm.minus_id = true;
  const auto rep = torus_anomaly(tm);
  const double expect = v(0, 0) + v(pi, 0) + v(0, pi) + v(pi, pi);
  CHECK(rep.rhs == doctest::Approx(expect).epsilon(1e-12));
  CHECK(std::abs(rep.lhs - rep.rhs) < 1e-6);

  tm.minus_id = false;
  const auto rep0 = torus_anomaly(tm);
  CHECK(rep0.rhs == 0.0);
  CHECK(std::abs(rep0.lhs) < 1e-6);
}

TEST_CASE("model validation") {
  auto m = curved_model(16);
  m.U = Eigen::MatrixXd::Constant(1, 1, 2.0);
  CHECK_THROWS(build_complex(m));
  auto m2 = curved_model(16);
  m2.iso_kind = 2;
  m2.g = [](double t) { return 1.0 + 0.3 * std::sin(t); }; // not reflection-symmetric
  CHECK_THROWS(build_complex(m2));
  auto m3 = curved_model(16);
  m3.g = [](double t) { return std::cos(t); }; // not positive
  CHECK_THROWS(build_complex(m3));
}
