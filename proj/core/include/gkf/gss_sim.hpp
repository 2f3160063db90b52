#pragma once

#include <cstdint>
#include <string>

#include "gkf/graph.hpp"
#include "gkf/linalg.hpp"
#include "gkf/models.hpp"

namespace gkf {

struct GeneratorConfig {
  std::string name = "custom";
  double lambda0 = 20.0;  // mean length of 0-runs
  double lambda1 = 5.0;   // mean length of 1-runs
  double theta_tm = 0.6;
  double theta_sp = 0.3;
  double psi0 = -0.5;
  double psi1 = 2.0;
  double sigma_eta = 0.25;
  double sigma_nu = 0.12;
  Nonlinearity rho_st = Nonlinearity::kIdentity;
  Nonlinearity rho_ro = Nonlinearity::kIdentity;
  Index n_nodes = 12;
  Index steps = 5000;
  std::uint64_t seed = 0;

  static GeneratorConfig lingss(std::uint64_t seed = 0);
  static GeneratorConfig nonlingss(std::uint64_t seed = 0);
  // "lingss" or "nonlingss"; throws DataError otherwise.
  static GeneratorConfig preset(const std::string& name, std::uint64_t seed = 0);

  void validate() const;
  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

// Time-indexed arrays, row t = time step t, one column per node.
struct Episode {
  GeneratorConfig config;
  GraphTopology topology;
  Matrix inputs;
  Matrix states;
  Matrix outputs;

  Index steps() const { return inputs.rows(); }
};

// Connected undirected 0/1 graph: Erdos-Renyi(p = 0.3) resampled until
// connected, falling back to a ring with random chords after 1000 attempts.
GraphTopology gen_topology(Index n_nodes, std::uint64_t seed);

// Alternating runs of 0's and 1's with zero-truncated Poisson(lambda0) and
// Poisson(lambda1) lengths, one independent stream per node.
Matrix gen_inputs(const GeneratorConfig& cfg);

// s_0 ~ N(0, sigma_eta^2); s_t = rho_st(M (s_{t-1} + x_{t-1})) + eta_{t-1};
// y_t = rho_ro(psi0 + psi1 s_t) + nu_t.
Episode simulate(const GeneratorConfig& cfg, const GraphTopology& topology, const Matrix& inputs);

// Topology, inputs and simulation from cfg.seed.
Episode generate_episode(const GeneratorConfig& cfg);

// Long-run fraction of ones implied by the run-length distributions.
double expected_ones_fraction(double lambda0, double lambda1);

}  // namespace gkf
