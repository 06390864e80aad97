#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "anomaly/json_io.hpp"
#include "anomaly/suite.hpp"

namespace {

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw CLI::ValidationError("--out", "cannot write " + path);
  out << content;
}

int run_spectral(const std::string& shape, const std::string& config_path,
                 const std::string& gamma, const std::string& vary,
                 const std::string& report_path, const std::string& csv_path) {
  auto job = anomaly::parse_spectral_config(read_file(config_path));
  if (job.shape != shape) {
    std::cerr << "config shape '" << job.shape << "' does not match the subcommand\n";
    return 1;
  }
  if (!gamma.empty()) anomaly::apply_gamma(job, gamma);
  if (!vary.empty()) anomaly::apply_vary(job, vary);
  const auto rep = anomaly::run_spectral_job(job);
  write_output(report_path, anomaly::torsion_report_json(rep));
  if (!csv_path.empty()) write_output(csv_path, anomaly::torsion_convergence_csv(rep));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification suites and spectral experiments for the torsion-anomaly library"};
  app.require_subcommand(1);

  // suite <name> [--seed N] [--config path] [--out path] [--format f] [--tolerance-scale s]
  std::string suite_name;
  std::uint64_t seed = 42;
  std::string config, out, format = "text";
  double tol_scale = 1.0;
  auto* suite = app.add_subcommand("suite", "run a module verification suite");
  suite->add_option("name", suite_name, "algebra|chernweil|asymptotics|transport|localindex|spectral|all")
      ->required();
  suite->add_option("--seed", seed, "seed for the randomized checks");
  suite->add_option("--config", config, "spectral job config (json), used by the spectral suite");
  suite->add_option("--out", out, "report path (stdout when omitted)");
  suite->add_option("--format", format, "json|csv|text")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  suite->add_option("--tolerance-scale", tol_scale, "global multiplier for numeric tolerances");

  // spectral circle|torus --config c.json [--gamma g] [--vary hF|gTM] [--report r.json] [--csv c.csv]
  auto* spectral = app.add_subcommand("spectral", "run a grid anomaly/torsion experiment");
  std::string sconfig, sgamma, svary, sreport, scsv;
  for (const char* shape : {"circle", "torus"}) {
    auto* sub = spectral->add_subcommand(shape);
    sub->add_option("--config", sconfig, "model config (json)")->required();
    sub->add_option("--gamma", sgamma, "identity|reflection|rotation:<j>|minus_id");
    sub->add_option("--vary", svary, "hF|gTM");
    sub->add_option("--report", sreport, "report json path (stdout when omitted)");
    sub->add_option("--csv", scsv, "convergence table csv path");
  }
  spectral->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (suite->parsed()) {
      const auto results = anomaly::run_suite(suite_name, seed, config, tol_scale);
      write_output(out, anomaly::emit_report(results, format, now_utc()));
      for (const auto& r : results)
        if (!r.all_pass()) return 1;
      return 0;
    }
    const std::string shape = spectral->get_subcommands().front()->get_name();
    return run_spectral(shape, sconfig, sgamma, svary, sreport, scsv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
