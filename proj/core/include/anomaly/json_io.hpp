#pragma once

#include <string>
#include <vector>

#include "anomaly/spectral.hpp"

namespace anomaly {

// A fully assembled spectral job: one of the two grid models plus the family
// direction and refinement schedule needed by the anomaly experiments.
//
// Config schema (JSON):
//   {
//     "shape": "circle" | "torus",
//     "N": 256, "rank": 1,
//     "holonomy": 0.0,                     // seam angle; nonzero forces rank 2
//     "isometry": "identity" | "reflection" | "minus_id" | {"rotation": j},
//     "g": {"const": 1.0, "cos": [[1, 0.3]], "sin": []},       // circle only
//     "h": {"const": 0.0, "cos": [[1, 0.3]], "sin": []},       // exponent f, h = exp(f)
//     "family": {"case": "hF" | "gTM",
//                "direction": {"const": 0.4, "cos": [[1, 0.25]], "sin": []},
//                "step": 1e-4},
//     "refine": [64, 128, 256]             // grid sizes; last one is reported
//   }
// Torus h/direction specs use "cosx"/"cosy"/"cosxy" ([[kx, ky, a]]) instead
// of "cos"/"sin". Families act multiplicatively: h(eps) = exp(f + eps v) and
// g(eps) = g (1 + eps w), so hdot = v h and gdot = w g.
struct SpectralJob {
  std::string shape = "circle";
  CircleModel circle;
  TorusModel torus;
  char vary = 'h';
  double step = 1e-4;
  std::vector<int> refine;
};

SpectralJob parse_spectral_config(const std::string& json_text);

// Override the isometry / family case after parsing (CLI flags). gamma is
// one of identity, reflection, rotation:<j>, minus_id; vary is hF or gTM.
void apply_gamma(SpectralJob& job, const std::string& gamma);
void apply_vary(SpectralJob& job, const std::string& vary);

// Standard cohomology data of the circle models: the constant 0-cocycle and
// the constant 1-cochain [d theta], with the reflection character on H^1.
std::vector<CohomologyBlock> circle_cohomology_blocks(int N, int rank, bool reflection);

// Run the experiment over the refinement schedule; the report carries the
// largest grid's values plus the (N, lhs) convergence rows.
TorsionReport run_spectral_job(const SpectralJob& job);

std::string torsion_report_json(const TorsionReport& rep);
std::string torsion_convergence_csv(const TorsionReport& rep);

} // namespace anomaly
