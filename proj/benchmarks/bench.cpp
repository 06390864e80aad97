#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "anomaly/chern_weil.hpp"
#include "anomaly/fock.hpp"
#include "anomaly/local_index.hpp"
#include "anomaly/multivector.hpp"
#include "anomaly/spectral.hpp"
#include "anomaly/transport.hpp"

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

void clifford_product(benchmark::State& state) {
  const int n = int(state.range(0));
  std::mt19937 rng(11);
  const auto a = random_element(n, rng, 8);
  const auto b = random_element(n, rng, 8);
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
}
BENCHMARK(clifford_product)->Arg(2)->Arg(4)->Arg(6)->Arg(8);

void supertrace(benchmark::State& state) {
  const int n = int(state.range(0));
  std::mt19937 rng(12);
  const auto a = random_element(n, rng, 12);
  for (auto _ : state) benchmark::DoNotOptimize(supertrace_fock(a));
}
BENCHMARK(supertrace)->Arg(2)->Arg(4)->Arg(6);

void euler_density(benchmark::State& state) {
  const int n = int(state.range(0));
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FormMatrix<double> Om(n, std::vector<Form<double>>(n, Form<double>(n)));
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < k; ++l) {
      Om[k][l] = Form<double>::unit(n, Mono{3, 0}, u(rng));
      Om[l][k] = -Om[k][l];
    }
  for (auto _ : state) benchmark::DoNotOptimize(euler_form(Om, n));
}
BENCHMARK(euler_density)->Arg(2)->Arg(4)->Arg(6);

void transport_solve(benchmark::State& state) {
  const int steps = int(state.range(0));
  std::mt19937 rng(14);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PointGeometry g;
  g.n = 4;
  g.fiber = 2;
  g.R.assign(4 * 4 * 4 * 4, 0.0);
  Eigen::MatrixXd h(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j <= i; ++j) h(i, j) = h(j, i) = u(rng);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
          g.Rt(i, j, k, l) = h(i, k) * h(j, l) - h(i, l) * h(j, k);
  g.omega.assign(4, Eigen::MatrixXd::Zero(2, 2));
  g.domega.assign(4, std::vector<Eigen::MatrixXd>(4, Eigen::MatrixXd::Zero(2, 2)));
  g.r = 0.3;
  g.gdot = Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
  for (auto _ : state) benchmark::DoNotOptimize(transport_ode_solve(g, A, steps, 1.0));
}
BENCHMARK(transport_solve)->Arg(16)->Arg(64)->Arg(256);

CircleModel bench_circle(int N) {
  CircleModel m;
  m.N = N;
  m.rank = 1;
  m.g = [](double t) { return 1.0 + 0.3 * std::cos(t); };
  m.h = [](double t) {
    return Eigen::MatrixXd::Constant(1, 1, std::exp(0.3 * std::cos(t)));
  };
  m.U = Eigen::MatrixXd::Identity(1, 1);
  return m;
}

void circle_complex_build(benchmark::State& state) {
  const auto m = bench_circle(int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_complex(m));
}
BENCHMARK(circle_complex_build)->Arg(256)->Arg(1024)->Arg(4096);

void circle_torsion(benchmark::State& state) {
  const auto m = bench_circle(int(state.range(0)));
  for (auto _ : state) {
    const auto dc = build_complex(m);
    benchmark::DoNotOptimize(log_torsion(analyze(dc)));
  }
}
BENCHMARK(circle_torsion)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
