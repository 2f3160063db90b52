#include <gtest/gtest.h>

#include <cmath>
#include <deque>

#include "gkf/errors.hpp"
#include "gkf/gss_sim.hpp"
#include "gkf/replica.hpp"

namespace gkf {
namespace {

bool bfs_connected(const Matrix& a) {
  const Index n = a.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::deque<Index> queue = {0};
  seen[0] = true;
  Index count = 1;
  while (!queue.empty()) {
    const Index v = queue.front();
    queue.pop_front();
    for (Index u = 0; u < n; ++u) {
      if (a(v, u) != 0.0 && !seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = true;
        ++count;
        queue.push_back(u);
      }
    }
  }
  return count == n;
}

ReplicaParams truth(const GeneratorConfig& c) {
  return {c.theta_tm, c.theta_sp, c.psi0, c.psi1, c.rho_st, c.rho_ro};
}

TEST(Topology, SingleNode) {
  const GraphTopology g = gen_topology(1, 3);
  EXPECT_EQ(g.n_nodes(), 1);
  EXPECT_TRUE(g.edges().empty());
}

TEST(Topology, ConnectedSymmetricDeterministic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GraphTopology g = gen_topology(12, seed);
    EXPECT_TRUE(bfs_connected(g.adjacency())) << seed;
    EXPECT_EQ(g.adjacency(), g.adjacency().transpose());
    EXPECT_EQ(g.adjacency().diagonal(), Vector::Zero(12));
    EXPECT_EQ(g.adjacency(), gen_topology(12, seed).adjacency());
  }
}

TEST(Topology, LinGssStability) {
  const GraphTopology g = gen_topology(12, 1);
  const Matrix m = 0.6 * Matrix::Identity(12, 12) + 0.3 * g.normalized_sym();
  EXPECT_LE(m.selfadjointView<Eigen::Lower>().eigenvalues().cwiseAbs().maxCoeff(), 0.9 + 1e-12);
}

TEST(Inputs, BinaryAndDeterministic) {
  GeneratorConfig cfg = GeneratorConfig::lingss(4);
  cfg.steps = 2000;
  const Matrix a = gen_inputs(cfg);
  EXPECT_EQ(a.rows(), 2000);
  EXPECT_EQ(a.cols(), 12);
  EXPECT_TRUE((a.array() == 0.0 || a.array() == 1.0).all());
  EXPECT_EQ(a, gen_inputs(cfg));
  cfg.seed = 5;
  EXPECT_NE(a, gen_inputs(cfg));
}

TEST(Inputs, OnesFractionMatchesRenewalRatio) {
  const double expected = expected_ones_fraction(20.0, 5.0);
  // Zero-truncated means: 20/(1-e^-20) and 5/(1-e^-5).
  EXPECT_NEAR(expected, (5.0 / (1.0 - std::exp(-5.0))) /
                            (20.0 / (1.0 - std::exp(-20.0)) + 5.0 / (1.0 - std::exp(-5.0))),
              1e-15);
  EXPECT_NEAR(expected, 0.201, 0.001);
  GeneratorConfig cfg = GeneratorConfig::lingss(6);
  cfg.n_nodes = 1;
  cfg.steps = 100000;
  EXPECT_NEAR(gen_inputs(cfg).mean(), expected, 0.02);
}

TEST(Inputs, RunsAreNonEmpty) {
  GeneratorConfig cfg = GeneratorConfig::lingss(7);
  cfg.lambda0 = 0.3;
  cfg.lambda1 = 0.3;
  cfg.steps = 5000;
  const Matrix a = gen_inputs(cfg);
  // With rates this small a zero-length run would otherwise be common.
  EXPECT_NEAR(a.mean(), 0.5, 0.05);
}

TEST(Simulate, NoiselessZeroInputIsConstant) {
  for (auto cfg : {GeneratorConfig::lingss(1), GeneratorConfig::nonlingss(1)}) {
    cfg.sigma_eta = 0.0;
    cfg.sigma_nu = 0.0;
    cfg.steps = 50;
    const GraphTopology g = gen_topology(cfg.n_nodes, 1);
    const Episode ep = simulate(cfg, g, Matrix::Zero(50, 12));
    EXPECT_EQ(ep.states, Matrix::Zero(50, 12));
    const double y0 = activate(cfg.rho_ro, cfg.psi0);
    EXPECT_TRUE(ep.outputs.isApproxToConstant(y0, 0.0)) << cfg.name;
  }
}

TEST(Simulate, NoiseVariances) {
  for (const auto& base : {GeneratorConfig::lingss(2), GeneratorConfig::nonlingss(2)}) {
    GeneratorConfig cfg = base;
    cfg.steps = 10000;
    const Episode ep = generate_episode(cfg);
    const ReplicaModel model(ep.topology, truth(cfg));
    double eta_sq = 0.0;
    double nu_sq = 0.0;
    Index n_eta = 0;
    Index n_nu = 0;
    for (Index t = 0; t < ep.steps(); ++t) {
      const Vector s = ep.states.row(t).transpose();
      nu_sq += (ep.outputs.row(t).transpose() - model.readout(s)).squaredNorm();
      n_nu += 12;
      if (t > 0) {
        const Vector prev = ep.states.row(t - 1).transpose();
        const Vector x = ep.inputs.row(t - 1).transpose();
        eta_sq += (s - model.transition(prev, x)).squaredNorm();
        n_eta += 12;
      }
    }
    const double var_eta = eta_sq / static_cast<double>(n_eta);
    const double var_nu = nu_sq / static_cast<double>(n_nu);
    EXPECT_NEAR(var_eta / (cfg.sigma_eta * cfg.sigma_eta), 1.0, 0.02) << cfg.name;
    EXPECT_NEAR(var_nu / (cfg.sigma_nu * cfg.sigma_nu), 1.0, 0.02) << cfg.name;
  }
}

TEST(Simulate, LinGssMarginalOutputVariance) {
  GeneratorConfig cfg = GeneratorConfig::lingss(3);
  cfg.steps = 20000;
  const Episode ep = generate_episode(cfg);
  const ReplicaModel model(ep.topology, truth(cfg));
  // Residual around the noise-free one-step prediction: sigma_nu^2 + (psi1 sigma_eta)^2.
  double sq = 0.0;
  for (Index t = 1; t < ep.steps(); ++t) {
    const Vector s_pred = model.transition(ep.states.row(t - 1).transpose(),
                                           ep.inputs.row(t - 1).transpose());
    sq += (ep.outputs.row(t).transpose() - model.readout(s_pred)).squaredNorm();
  }
  EXPECT_NEAR(sq / static_cast<double>((ep.steps() - 1) * 12), 0.2644, 0.01);
}

TEST(Simulate, Deterministic) {
  GeneratorConfig cfg = GeneratorConfig::nonlingss(9);
  cfg.steps = 300;
  const Episode a = generate_episode(cfg);
  const Episode b = generate_episode(cfg);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.outputs, b.outputs);
  EXPECT_EQ(a.inputs, b.inputs);
}

TEST(Simulate, LinGssStaysBounded) {
  GeneratorConfig cfg = GeneratorConfig::lingss(10);
  cfg.steps = 100000;
  const Episode ep = generate_episode(cfg);
  EXPECT_LT(ep.states.cwiseAbs().maxCoeff(), 10.0);
}

TEST(Simulate, DivergenceIsReported) {
  GeneratorConfig cfg = GeneratorConfig::lingss(11);
  cfg.theta_tm = 1.5;
  cfg.steps = 1000;
  EXPECT_THROW(generate_episode(cfg), GeneratorInstabilityError);
}

TEST(Simulate, SingleNodeEpisode) {
  GeneratorConfig cfg = GeneratorConfig::lingss(12);
  cfg.n_nodes = 1;
  cfg.steps = 100;
  const Episode ep = generate_episode(cfg);
  EXPECT_EQ(ep.states.cols(), 1);
  EXPECT_TRUE(ep.states.allFinite());
}

TEST(Config, PresetsAndValidation) {
  EXPECT_EQ(GeneratorConfig::preset("lingss", 3), GeneratorConfig::lingss(3));
  const GeneratorConfig nl = GeneratorConfig::preset("nonlingss");
  EXPECT_EQ(nl.rho_st, Nonlinearity::kTanh);
  EXPECT_DOUBLE_EQ(nl.psi1, 5.0);
  EXPECT_THROW(GeneratorConfig::preset("other"), DataError);
  GeneratorConfig bad = GeneratorConfig::lingss();
  bad.sigma_nu = -1.0;
  EXPECT_THROW(bad.validate(), DataError);
}

}  // namespace
}  // namespace gkf
