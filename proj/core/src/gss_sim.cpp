#include "gkf/gss_sim.hpp"

#include <cmath>
#include <sstream>

#include "gkf/errors.hpp"
#include "gkf/replica.hpp"
#include "gkf/rng.hpp"

namespace gkf {
namespace {

constexpr double kEdgeProbability = 0.3;
constexpr int kMaxTopologyAttempts = 1000;
constexpr double kDivergenceBound = 1e6;

std::uint64_t truncated_poisson(Rng& rng, double rate) {
  for (;;) {
    const std::uint64_t k = rng.poisson(rate);
    if (k >= 1) return k;
  }
}

std::string describe(const GeneratorConfig& c) {
  std::ostringstream os;
  os << "config '" << c.name << "' (theta_tm=" << c.theta_tm << ", theta_sp=" << c.theta_sp
     << ", psi0=" << c.psi0 << ", psi1=" << c.psi1 << ", sigma_eta=" << c.sigma_eta
     << ", sigma_nu=" << c.sigma_nu << ", rho_st=" << to_string(c.rho_st)
     << ", rho_ro=" << to_string(c.rho_ro) << ", nodes=" << c.n_nodes << ", seed=" << c.seed
     << ")";
  return os.str();
}

}  // namespace

GeneratorConfig GeneratorConfig::lingss(std::uint64_t seed) {
  GeneratorConfig c;
  c.name = "lingss";
  c.seed = seed;
  return c;
}

GeneratorConfig GeneratorConfig::nonlingss(std::uint64_t seed) {
  GeneratorConfig c;
  c.name = "nonlingss";
  c.theta_sp = -0.3;
  c.psi0 = -2.0;
  c.psi1 = 5.0;
  c.rho_st = Nonlinearity::kTanh;
  c.rho_ro = Nonlinearity::kTanh;
  c.seed = seed;
  return c;
}

GeneratorConfig GeneratorConfig::preset(const std::string& name, std::uint64_t seed) {
  if (name == "lingss") return lingss(seed);
  if (name == "nonlingss") return nonlingss(seed);
  throw DataError("unknown preset '" + name + "' (expected lingss or nonlingss)");
}

void GeneratorConfig::validate() const {
  if (!(lambda0 > 0.0) || !(lambda1 > 0.0)) throw DataError("Poisson rates must be positive");
  if (!(sigma_eta >= 0.0) || !(sigma_nu >= 0.0)) {
    throw DataError("noise standard deviations must be non-negative");
  }
  if (n_nodes < 1) throw DataError("n_nodes must be at least 1");
  if (steps < 1) throw DataError("steps must be at least 1");
  for (double v : {theta_tm, theta_sp, psi0, psi1, lambda0, lambda1, sigma_eta, sigma_nu}) {
    if (!std::isfinite(v)) throw DataError("generator parameters must be finite");
  }
}

double expected_ones_fraction(double lambda0, double lambda1) {
  const double mean0 = lambda0 / (1.0 - std::exp(-lambda0));
  const double mean1 = lambda1 / (1.0 - std::exp(-lambda1));
  return mean1 / (mean0 + mean1);
}

GraphTopology gen_topology(Index n_nodes, std::uint64_t seed) {
  if (n_nodes < 1) throw DataError("gen_topology: n_nodes must be at least 1");
  Rng rng(seed, StreamId::kTopology);
  for (int attempt = 0; attempt < kMaxTopologyAttempts; ++attempt) {
    Matrix a = Matrix::Zero(n_nodes, n_nodes);
    for (Index i = 0; i < n_nodes; ++i) {
      for (Index j = i + 1; j < n_nodes; ++j) {
        if (rng.uniform() < kEdgeProbability) a(i, j) = a(j, i) = 1.0;
      }
    }
    GraphTopology g(std::move(a));
    if (g.is_connected()) return g;
  }
  Matrix a = Matrix::Zero(n_nodes, n_nodes);
  for (Index i = 0; i < n_nodes; ++i) {
    const Index j = (i + 1) % n_nodes;
    if (i != j) a(i, j) = a(j, i) = 1.0;
  }
  for (Index c = 0; c < n_nodes / 2; ++c) {
    const auto i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n_nodes)));
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n_nodes)));
    if (i != j) a(i, j) = a(j, i) = 1.0;
  }
  return GraphTopology(std::move(a));
}

Matrix gen_inputs(const GeneratorConfig& cfg) {
  cfg.validate();
  Matrix x(cfg.steps, cfg.n_nodes);
  const double p_zero_start = cfg.lambda0 / (cfg.lambda0 + cfg.lambda1);
  for (Index v = 0; v < cfg.n_nodes; ++v) {
    Rng rng(cfg.seed, Rng::substream(StreamId::kInputs, static_cast<std::uint64_t>(v)));
    bool ones = rng.uniform() >= p_zero_start;
    Index t = 0;
    while (t < cfg.steps) {
      const std::uint64_t run = truncated_poisson(rng, ones ? cfg.lambda1 : cfg.lambda0);
      for (std::uint64_t k = 0; k < run && t < cfg.steps; ++k, ++t) x(t, v) = ones ? 1.0 : 0.0;
      ones = !ones;
    }
  }
  return x;
}

Episode simulate(const GeneratorConfig& cfg, const GraphTopology& topology, const Matrix& inputs) {
  cfg.validate();
  const Index n = topology.n_nodes();
  if (inputs.cols() != n || inputs.rows() < 1) {
    throw DimensionError("simulate: inputs must be T x |V| with |V| = " + std::to_string(n));
  }
  const Index steps = inputs.rows();
  const ReplicaParams params{cfg.theta_tm, cfg.theta_sp, cfg.psi0, cfg.psi1, cfg.rho_st, cfg.rho_ro};

  Rng init_rng(cfg.seed, StreamId::kInitialState);
  Rng state_rng(cfg.seed, StreamId::kStateNoise);
  Rng readout_rng(cfg.seed, StreamId::kReadoutNoise);

  Episode ep{cfg, topology, inputs, Matrix(steps, n), Matrix(steps, n)};
  Vector s(n);
  for (Index v = 0; v < n; ++v) s[v] = init_rng.normal(0.0, cfg.sigma_eta);
  for (Index t = 0; t < steps; ++t) {
    if (t > 0) {
      s = replica_transition(s, inputs.row(t - 1).transpose(), params, topology);
      for (Index v = 0; v < n; ++v) s[v] += state_rng.normal(0.0, cfg.sigma_eta);
    }
    if (!s.allFinite() || s.cwiseAbs().maxCoeff() > kDivergenceBound) {
      throw GeneratorInstabilityError("state diverged at step " + std::to_string(t) + " for " +
                                      describe(cfg));
    }
    ep.states.row(t) = s.transpose();
    Vector y = replica_readout(s, params);
    for (Index v = 0; v < n; ++v) y[v] += readout_rng.normal(0.0, cfg.sigma_nu);
    ep.outputs.row(t) = y.transpose();
  }
  return ep;
}

Episode generate_episode(const GeneratorConfig& cfg) {
  cfg.validate();
  const GraphTopology topology = gen_topology(cfg.n_nodes, cfg.seed);
  return simulate(cfg, topology, gen_inputs(cfg));
}

}  // namespace gkf
