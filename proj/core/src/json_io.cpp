#include "anomaly/json_io.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace anomaly {

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

// f(theta) = const + sum a cos(k theta) + sum b sin(k theta)
struct TrigSpec {
  double c0 = 0.0;
  std::vector<std::pair<int, double>> cos, sin;

  double operator()(double t) const {
    double v = c0;
    for (const auto& [k, a] : cos) v += a * std::cos(k * t);
    for (const auto& [k, a] : sin) v += a * std::sin(k * t);
    return v;
  }
};

// f(x, y) = const + sum a cos(k x) + sum a cos(k y) + sum a cos(kx x) cos(ky y)
struct TrigSpec2 {
  double c0 = 0.0;
  std::vector<std::pair<int, double>> cosx, cosy;
  std::vector<std::tuple<int, int, double>> cosxy;

  double operator()(double x, double y) const {
    double v = c0;
    for (const auto& [k, a] : cosx) v += a * std::cos(k * x);
    for (const auto& [k, a] : cosy) v += a * std::cos(k * y);
    for (const auto& [kx, ky, a] : cosxy) v += a * std::cos(kx * x) * std::cos(ky * y);
    return v;
  }
};

std::vector<std::pair<int, double>> parse_terms(const json& j, const char* key) {
  std::vector<std::pair<int, double>> out;
  if (!j.contains(key)) return out;
  for (const auto& row : j.at(key)) {
    if (!row.is_array() || row.size() != 2)
      throw std::invalid_argument(std::string("each '") + key + "' entry must be [k, coeff]");
    out.emplace_back(row[0].get<int>(), row[1].get<double>());
  }
  return out;
}

TrigSpec parse_trig(const json& j) {
  TrigSpec s;
  s.c0 = j.value("const", 0.0);
  s.cos = parse_terms(j, "cos");
  s.sin = parse_terms(j, "sin");
  return s;
}

TrigSpec2 parse_trig2(const json& j) {
  TrigSpec2 s;
  s.c0 = j.value("const", 0.0);
  s.cosx = parse_terms(j, "cosx");
  s.cosy = parse_terms(j, "cosy");
  if (j.contains("cosxy"))
    for (const auto& row : j.at("cosxy")) {
      if (!row.is_array() || row.size() != 3)
        throw std::invalid_argument("each 'cosxy' entry must be [kx, ky, coeff]");
      s.cosxy.emplace_back(row[0].get<int>(), row[1].get<int>(), row[2].get<double>());
    }
  return s;
}

Eigen::MatrixXd rotation2(double a) {
  Eigen::MatrixXd r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

void set_circle_functions(CircleModel& m, const TrigSpec& gspec, const TrigSpec& fspec,
                          const TrigSpec& vspec, bool has_family, char vary) {
  const int rank = m.rank;
  m.g = [gspec](double t) { return gspec(t); };
  m.h = [fspec, rank](double t) {
    return Eigen::MatrixXd(std::exp(fspec(t)) * Eigen::MatrixXd::Identity(rank, rank));
  };
  if (!has_family) return;
  if (vary == 'h') {
    m.hdot = [fspec, vspec, rank](double t) {
      return Eigen::MatrixXd(vspec(t) * std::exp(fspec(t)) *
                             Eigen::MatrixXd::Identity(rank, rank));
    };
  } else {
    m.gdot = [gspec, vspec](double t) { return vspec(t) * gspec(t); };
  }
}

} // namespace

std::vector<CohomologyBlock> circle_cohomology_blocks(int N, int rank, bool reflection) {
  if (rank != 1)
    throw std::invalid_argument("cohomology blocks are only assembled for rank-1 circle models");
  const double dth = 2.0 * std::numbers::pi / N;
  std::vector<CohomologyBlock> blocks(2);
  blocks[0].degree = 0;
  blocks[0].chi = 1.0;
  blocks[0].cocycles = Eigen::MatrixXd::Ones(N, 1);
  blocks[1].degree = 1;
  blocks[1].chi = reflection ? -1.0 : 1.0;
  blocks[1].cocycles = Eigen::MatrixXd::Constant(N, 1, dth);
  blocks[1].gauge_pins = 1;
  return blocks;
}

SpectralJob parse_spectral_config(const std::string& json_text) {
  const json j = json::parse(json_text);
  SpectralJob job;
  job.shape = j.value("shape", "circle");
  const int N = j.value("N", 64);
  if (N < 4) throw std::invalid_argument("grid size must be at least 4");

  const bool has_family = j.contains("family");
  std::string fam_case = "hF";
  if (has_family) {
    fam_case = j.at("family").value("case", "hF");
    job.step = j.at("family").value("step", 1e-4);
  }
  if (fam_case != "hF" && fam_case != "gTM")
    throw std::invalid_argument("family case must be hF or gTM");
  job.vary = (fam_case == "hF") ? 'h' : 'g';

  if (j.contains("refine"))
    for (const auto& n : j.at("refine")) job.refine.push_back(n.get<int>());
  if (job.refine.empty()) job.refine.push_back(N);

  if (job.shape == "circle") {
    CircleModel& m = job.circle;
    m.N = N;
    m.rank = j.value("rank", 1);
    const double phi = j.value("holonomy", 0.0);
    if (phi != 0.0) {
      m.rank = 2;
      m.U = rotation2(phi);
    } else {
      m.U = Eigen::MatrixXd::Identity(m.rank, m.rank);
    }
    TrigSpec gspec;
    gspec.c0 = 1.0;
    if (j.contains("g")) gspec = parse_trig(j.at("g"));
    TrigSpec fspec;
    if (j.contains("h")) fspec = parse_trig(j.at("h"));
    TrigSpec vspec;
    if (has_family) vspec = parse_trig(j.at("family").at("direction"));
    set_circle_functions(m, gspec, fspec, vspec, has_family, job.vary);
  } else if (job.shape == "torus") {
    TorusModel& m = job.torus;
    m.N = N;
    TrigSpec2 fspec;
    if (j.contains("h")) fspec = parse_trig2(j.at("h"));
    m.h = [fspec](double x, double y) { return std::exp(fspec(x, y)); };
    if (has_family) {
      if (job.vary != 'h')
        throw std::invalid_argument("torus models only support fiber-metric families");
      const TrigSpec2 vspec = parse_trig2(j.at("family").at("direction"));
      m.hdot = [fspec, vspec](double x, double y) {
        return vspec(x, y) * std::exp(fspec(x, y));
      };
    }
  } else {
    throw std::invalid_argument("shape must be circle or torus");
  }

  if (j.contains("isometry")) {
    const auto& iso = j.at("isometry");
    if (iso.is_string())
      apply_gamma(job, iso.get<std::string>());
    else if (iso.is_object() && iso.contains("rotation"))
      apply_gamma(job, "rotation:" + std::to_string(iso.at("rotation").get<int>()));
    else
      throw std::invalid_argument("isometry must be a string or {\"rotation\": j}");
  }
  return job;
}

void apply_gamma(SpectralJob& job, const std::string& gamma) {
  if (job.shape == "torus") {
    if (gamma == "identity")
      job.torus.minus_id = false;
    else if (gamma == "minus_id")
      job.torus.minus_id = true;
    else
      throw std::invalid_argument("torus isometry must be identity or minus_id");
    return;
  }
  if (gamma == "identity") {
    job.circle.iso_kind = 0;
  } else if (gamma == "reflection") {
    job.circle.iso_kind = 2;
  } else if (gamma.rfind("rotation:", 0) == 0) {
    job.circle.iso_kind = 1;
    job.circle.iso_param = std::stoi(gamma.substr(9));
  } else {
    throw std::invalid_argument("circle isometry must be identity, reflection, or rotation:<j>");
  }
}

void apply_vary(SpectralJob& job, const std::string& vary) {
  if (vary == "hF")
    job.vary = 'h';
  else if (vary == "gTM")
    job.vary = 'g';
  else
    throw std::invalid_argument("family case must be hF or gTM");
}

TorsionReport run_spectral_job(const SpectralJob& job) {
  TorsionReport rep;
  const bool has_family =
      (job.shape == "circle")
          ? (job.vary == 'h' ? bool(job.circle.hdot) : bool(job.circle.gdot))
          : bool(job.torus.hdot);
  for (std::size_t i = 0; i < job.refine.size(); ++i) {
    const int N = job.refine[i];
    if (job.shape == "circle") {
      CircleModel m = job.circle;
      m.N = N;
      if (!has_family) {
        // frozen model: report the torsion of each grid
        const double lt = log_torsion(analyze(build_complex(m)));
        rep.label = "circle / torsion";
        rep.log_tau = lt;
        rep.convergence.emplace_back(N, lt);
        continue;
      }
      const bool refl = (m.iso_kind == 2);
      const auto r = anomaly_experiment(m, circle_cohomology_blocks(N, m.rank, refl), job.vary,
                                        job.step);
      rep = TorsionReport{r.label, r.log_tau, r.log_metric, r.log_norm,
                          r.lhs,   r.rhs,     r.err,        rep.convergence};
      rep.convergence.emplace_back(N, r.lhs);
    } else {
      TorusModel m = job.torus;
      m.N = N;
      if (!has_family) throw std::invalid_argument("torus jobs need a fiber-metric family");
      const auto r = torus_anomaly(m, job.step);
      rep = TorsionReport{r.label, r.log_tau, r.log_metric, r.log_norm,
                          r.lhs,   r.rhs,     r.err,        rep.convergence};
      rep.convergence.emplace_back(N, r.lhs);
    }
  }
  if (!has_family && rep.convergence.size() >= 3) {
    // Richardson drift of the second-order extrapolants across the last
    // three refinements; stored as the reported error
    const auto& c = rep.convergence;
    const double t1 = c[c.size() - 3].second, t2 = c[c.size() - 2].second,
                 t3 = c[c.size() - 1].second;
    rep.err = std::abs((t3 + (t3 - t2) / 3.0) - (t2 + (t2 - t1) / 3.0));
  }
  return rep;
}

std::string torsion_report_json(const TorsionReport& rep) {
  ojson j;
  j["label"] = rep.label;
  j["log_tau"] = rep.log_tau;
  j["log_metric"] = rep.log_metric;
  j["log_norm"] = rep.log_norm;
  j["lhs"] = rep.lhs;
  j["rhs"] = rep.rhs;
  j["err"] = rep.err;
  ojson conv = ojson::array();
  for (std::size_t i = 0; i < rep.convergence.size(); ++i) {
    const auto& [N, value] = rep.convergence[i];
    ojson row;
    row["N"] = N;
    row["value"] = value;
    if (i >= 1) {
      const double prev = rep.convergence[i - 1].second;
      row["extrapolation"] = value + (value - prev) / 3.0;
    }
    conv.push_back(row);
  }
  j["convergence"] = conv;
  return j.dump(2) + "\n";
}

std::string torsion_convergence_csv(const TorsionReport& rep) {
  std::ostringstream os;
  os << "N,value,extrapolation\n";
  os.precision(17);
  for (std::size_t i = 0; i < rep.convergence.size(); ++i) {
    const auto& [N, value] = rep.convergence[i];
    os << N << "," << value << ",";
    if (i >= 1) {
      const double prev = rep.convergence[i - 1].second;
      os << value + (value - prev) / 3.0;
    }
    os << "\n";
  }
  return os.str();
}

} // namespace anomaly
