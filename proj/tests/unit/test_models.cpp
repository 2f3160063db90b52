#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "gkf/diffable.hpp"
#include "gkf/gss_sim.hpp"
#include "gkf/replica.hpp"
#include "gkf/stgnn.hpp"
#include "support.hpp"

namespace gkf {
namespace {

RowMatrix relu(const RowMatrix& m) { return m.cwiseMax(0.0); }

// Independent dense-algebra evaluation of the STGNN transition.
Vector stgnn_oracle(const Vector& s, const Vector& x, const StgnnParams& p, const Matrix& a_row) {
  const Index dh = p.w_self.rows();
  const Index n = s.size() / dh;
  RowMatrix u(n, dh);
  for (Index v = 0; v < n; ++v) {
    for (Index k = 0; k < dh; ++k) u(v, k) = s(v * dh + k) + x(v * dh + k);
  }
  const RowMatrix hidden = relu((u * p.gamma.w1).rowwise() + p.gamma.b1);
  const RowMatrix z = (hidden * p.gamma.w2).rowwise() + p.gamma.b2;
  const RowMatrix pre = z * p.w_self + a_row * z * p.w_neigh;
  const RowMatrix out = u + RowMatrix(pre.array().tanh());
  Vector flat(n * dh);
  for (Index v = 0; v < n; ++v) {
    for (Index k = 0; k < dh; ++k) flat(v * dh + k) = out(v, k);
  }
  return flat;
}

std::vector<std::unique_ptr<GssModel>> jacobian_models() {
  Rng rng(17, StreamId::kTest);
  const GraphTopology g = testing::random_graph(rng, 6, 0.4);
  std::vector<std::unique_ptr<GssModel>> models;
  models.push_back(std::make_unique<ReplicaModel>(g, ReplicaParams::lingss()));
  models.push_back(std::make_unique<ReplicaModel>(g, ReplicaParams::nonlingss()));
  models.push_back(StgnnModel::random_init(g, 3).clone());
  models.push_back(std::make_unique<LinearAdjacencyModel>(g, 0.5, 0.2, -0.1, 1.3));
  models.push_back(std::make_unique<ReplicaModel>(GraphTopology::undirected(1, {}),
                                                  ReplicaParams::nonlingss()));
  return models;
}

TEST(Replica, ZeroIsFixedPoint) {
  const GraphTopology g = testing::path_graph(3);
  for (const auto& p : {ReplicaParams::lingss(), ReplicaParams::nonlingss()}) {
    EXPECT_EQ(replica_transition(Vector::Zero(3), Vector::Zero(3), p, g), Vector::Zero(3));
  }
}

TEST(Replica, TwoNodeLinGss) {
  const GraphTopology g = testing::path_graph(2);
  Vector s(2);
  s << 1.0, 0.0;
  const Vector out = replica_transition(s, Vector::Zero(2), ReplicaParams::lingss(), g);
  EXPECT_NEAR(out(0), 0.75, 1e-15);
  EXPECT_NEAR(out(1), 0.15, 1e-15);
  // Input and state enter only through their sum.
  Vector half = 0.5 * s;
  EXPECT_LE((replica_transition(half, half, ReplicaParams::lingss(), g) - out).norm(), 1e-15);
}

TEST(Replica, Readout) {
  EXPECT_DOUBLE_EQ(replica_readout(Vector::Ones(1), ReplicaParams::lingss())(0), 1.5);
  EXPECT_NEAR(replica_readout(Vector::Constant(1, 0.4), ReplicaParams::nonlingss())(0), 0.0, 1e-15);

  ReplicaParams flat = ReplicaParams::nonlingss();
  flat.psi1 = 0.0;
  const ReplicaModel m(testing::path_graph(3), flat);
  Vector s(3);
  s << -1.0, 0.2, 3.0;
  EXPECT_TRUE(m.readout(s).isApproxToConstant(std::tanh(-2.0)));
  EXPECT_EQ(m.readout_jacobian(s), Matrix::Zero(3, 3));
}

TEST(Replica, ParamsRoundTrip) {
  ReplicaModel m(testing::path_graph(3), ReplicaParams::lingss());
  Vector expected(4);
  expected << 0.6, 0.3, -0.5, 2.0;
  EXPECT_EQ(m.params(), expected);
  m.set_params(2.0 * expected);
  EXPECT_EQ(m.replica_params().theta_sp, 0.6);
  EXPECT_EQ(m.param_layout().total(), 4);
}

TEST(Stgnn, ParameterCountAndDims) {
  const StgnnModel m = StgnnModel::random_init(testing::path_graph(12), 1);
  EXPECT_EQ(m.param_layout().total(), 344);
  EXPECT_EQ(m.state_dim(), 84);
  EXPECT_EQ(m.output_dim(), 12);
  EXPECT_EQ(m.encode(Vector::Ones(12)).size(), 84);
  Vector p = m.params();
  StgnnModel copy = StgnnModel::random_init(testing::path_graph(12), 2);
  copy.set_params(p);
  EXPECT_EQ(copy.params(), p);
}

TEST(Stgnn, ZeroWeightsIsResidualIdentity) {
  Rng rng(2, StreamId::kTest);
  const GraphTopology g = testing::random_graph(rng, 5, 0.5);
  const StgnnParams zeros = StgnnParams::zeros({});
  const Vector s = testing::random_vector(rng, 35);
  const Vector x = testing::random_vector(rng, 35);
  EXPECT_LE((stgnn_transition(s, x, zeros, g) - (s + x)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Stgnn, MatchesDenseOracle) {
  Rng rng(3, StreamId::kTest);
  for (int trial = 0; trial < 5; ++trial) {
    const GraphTopology g = testing::random_graph(rng, 6, 0.4);
    const StgnnParams p = StgnnParams::random({}, rng);
    const Vector s = testing::random_vector(rng, 42);
    const Vector x = testing::random_vector(rng, 42);
    EXPECT_LE((stgnn_transition(s, x, p, g) - stgnn_oracle(s, x, p, g.normalized_row()))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-13);
  }
}

TEST(Stgnn, EmptyGraphHasNoNeighborMixing) {
  Rng rng(4, StreamId::kTest);
  const GraphTopology empty = GraphTopology::undirected(4, {});
  const StgnnParams p = StgnnParams::random({}, rng);
  const Vector s = testing::random_vector(rng, 28);
  const Vector x = testing::random_vector(rng, 28);
  const Vector out = stgnn_transition(s, x, p, empty);
  EXPECT_LE((out - stgnn_oracle(s, x, p, Matrix::Zero(4, 4))).cwiseAbs().maxCoeff(), 1e-14);
  // Each node evolves alone: changing node 0 leaves the others untouched.
  Vector s2 = s;
  s2.head(7).array() += 1.0;
  EXPECT_EQ(stgnn_transition(s2, x, p, empty).tail(21), out.tail(21));
}

TEST(Jacobians, MatchFiniteDifferences) {
  Rng rng(5, StreamId::kTest);
  for (const auto& model : jacobian_models()) {
    const DiffFn f = transition_fn(*model);
    const DiffFn h = readout_fn(*model);
    for (int point = 0; point < 20; ++point) {
      const Vector s = testing::random_vector(rng, model->state_dim());
      const Vector x = model->encode(testing::random_vector(rng, model->input_dim()));
      const Vector in[] = {s, x};
      EXPECT_LE(max_relative_error(f.jacobian(0, in), fd_jacobian(f, 0, in)), 1e-4)
          << model->family() << " F";
      EXPECT_LE(max_relative_error(f.jacobian(1, in), fd_jacobian(f, 1, in)), 1e-4)
          << model->family() << " d/dx";
      const DiffFn l = transition_noise_fn(*model, s, x);
      const Vector noise = Vector::Zero(model->noise_dim());
      const Vector lin[] = {noise};
      EXPECT_LE(max_relative_error(l.jacobian(0, lin), fd_jacobian(l, 0, lin)), 1e-4)
          << model->family() << " L";
      const Vector sin[] = {s};
      EXPECT_LE(max_relative_error(h.jacobian(0, sin), fd_jacobian(h, 0, sin)), 1e-4)
          << model->family() << " H";
      const DiffFn m = readout_noise_fn(*model, s);
      const Vector nu = Vector::Zero(model->output_dim());
      const Vector min[] = {nu};
      EXPECT_LE(max_relative_error(m.jacobian(0, min), fd_jacobian(m, 0, min)), 1e-4)
          << model->family() << " M";
    }
  }
}

TEST(Jacobians, ParamVjpMatchesFiniteDifferences) {
  Rng rng(6, StreamId::kTest);
  for (const auto& model : jacobian_models()) {
    const Vector s = testing::random_vector(rng, model->state_dim());
    const Vector x = model->encode(testing::random_vector(rng, model->input_dim()));
    const Vector ct = testing::random_vector(rng, model->state_dim());
    const Vector ct_y = testing::random_vector(rng, model->output_dim());
    const Vector p0 = model->params();
    auto probe = model->clone();
    const Vector fd_tr = fd_gradient(
        [&](const Vector& p) {
          probe->set_params(p);
          return ct.dot(probe->transition(s, x));
        },
        p0);
    const Vector fd_ro = fd_gradient(
        [&](const Vector& p) {
          probe->set_params(p);
          return ct_y.dot(probe->readout(s));
        },
        p0);
    EXPECT_LE(max_relative_error(model->transition_param_vjp(s, x, ct), fd_tr), 1e-4)
        << model->family();
    EXPECT_LE(max_relative_error(model->readout_param_vjp(s, ct_y), fd_ro), 1e-4)
        << model->family();
  }
}

TEST(Jacobians, WindowLossGradientMatchesFiniteDifferences) {
  Rng rng(7, StreamId::kTest);
  GeneratorConfig cfg = GeneratorConfig::lingss(3);
  cfg.n_nodes = 5;
  cfg.steps = 40;
  const Episode ep = generate_episode(cfg);
  std::vector<std::unique_ptr<GssModel>> models;
  models.push_back(ReplicaModel::random_init(ep.topology, Nonlinearity::kTanh, Nonlinearity::kTanh, 4)
                       .clone());
  models.push_back(StgnnModel::random_init(ep.topology, 5).clone());
  const std::vector<Index> starts = {0, 7, 20};
  for (const auto& model : models) {
    RowMatrix start_states(3, model->state_dim());
    for (Index i = 0; i < start_states.size(); ++i) start_states.data()[i] = 0.3 * rng.normal();
    const WindowBatch batch{ep.inputs, ep.outputs, starts, start_states, 12};
    Vector grad;
    model->window_loss(batch, &grad);
    auto probe = model->clone();
    const Vector fd = fd_gradient(
        [&](const Vector& p) {
          probe->set_params(p);
          return probe->window_loss(batch, nullptr);
        },
        model->params());
    const double scale = std::max(1e-3, fd.cwiseAbs().maxCoeff());
    EXPECT_LE((grad - fd).cwiseAbs().maxCoeff() / scale, 1e-4) << model->family();
  }
}

TEST(AlphaJacobian, AdditiveScalarIsDiagonalEmbedding) {
  const ReplicaModel m(testing::path_graph(3), ReplicaParams::lingss());
  const Tensor3 l = alpha_jacobian(m, Vector::Ones(3), Vector::Zero(3));
  for (Index v = 0; v < 3; ++v) {
    for (Index i = 0; i < 3; ++i) {
      for (Index j = 0; j < 3; ++j) EXPECT_EQ(l(v, i, j), (v == i && i == j) ? 1.0 : 0.0);
    }
  }
}

TEST(AlphaJacobian, AdjacencyModeAnalytic) {
  Rng rng(8, StreamId::kTest);
  const GraphTopology g = testing::random_graph(rng, 4, 0.5);
  const double theta_sp = 0.35;
  const LinearAdjacencyModel m(g, 0.4, theta_sp, 0.0, 1.0);
  const Vector s = testing::random_vector(rng, 4);
  const Vector x = testing::random_vector(rng, 4);
  const Vector u = s + x;
  const Tensor3 l = alpha_jacobian(m, s, x);
  for (Index v = 0; v < 4; ++v) {
    for (Index i = 0; i < 4; ++i) {
      for (Index j = 0; j < 4; ++j) {
        EXPECT_NEAR(l(v, i, j), v == i ? theta_sp * u(j) : 0.0, 1e-15);
      }
    }
  }
  const Tensor3 zero = alpha_jacobian(m, s, -s);
  for (double v : zero.data()) EXPECT_EQ(v, 0.0);
}

TEST(Equivariance, NodePermutation) {
  Rng rng(9, StreamId::kTest);
  const GraphTopology g = testing::random_graph(rng, 7, 0.4);
  const auto perm = testing::random_permutation(rng, 7);
  const GraphTopology gp = g.permuted(perm);
  const StgnnModel st = StgnnModel::random_init(g, 11);
  std::vector<std::pair<std::unique_ptr<GssModel>, std::unique_ptr<GssModel>>> pairs;
  pairs.emplace_back(std::make_unique<ReplicaModel>(g, ReplicaParams::nonlingss()),
                     std::make_unique<ReplicaModel>(gp, ReplicaParams::nonlingss()));
  pairs.emplace_back(st.clone(), std::make_unique<StgnnModel>(gp, st.stgnn_params()));
  for (const auto& [m, mp] : pairs) {
    const Index d = m->state_features();
    const Vector s = testing::random_vector(rng, m->state_dim());
    const Vector x = testing::random_vector(rng, m->input_dim());
    const Vector xe = m->encode(x);
    const Vector out = m->transition(s, xe);
    const Vector out_p = mp->transition(testing::permute_nodes(s, perm, d),
                                        mp->encode(testing::permute_nodes(x, perm)));
    EXPECT_LE((out_p - testing::permute_nodes(out, perm, d)).cwiseAbs().maxCoeff(), 1e-13)
        << m->family();
    EXPECT_LE((mp->readout(testing::permute_nodes(s, perm, d)) -
               testing::permute_nodes(m->readout(s), perm))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-13);
  }
}

TEST(Replica, ReproducesNoiselessGenerator) {
  for (auto cfg : {GeneratorConfig::lingss(5), GeneratorConfig::nonlingss(5)}) {
    cfg.sigma_eta = 0.0;
    cfg.sigma_nu = 0.0;
    cfg.steps = 500;
    const Episode ep = generate_episode(cfg);
    ReplicaParams p{cfg.theta_tm, cfg.theta_sp, cfg.psi0, cfg.psi1, cfg.rho_st, cfg.rho_ro};
    const ReplicaModel m(ep.topology, p);
    const Vector s0 = ep.states.row(0).transpose();
    const RowMatrix run = free_run(m, ep.inputs.topRows(ep.steps() - 1), s0);
    ASSERT_EQ(run.rows(), ep.steps());
    EXPECT_LE((Matrix(run) - ep.states).cwiseAbs().maxCoeff(), 1e-12) << cfg.name;
    double worst = 0.0;
    for (Index t = 0; t < ep.steps(); ++t) {
      const Vector s = ep.states.row(t).transpose();
      const Vector y = ep.outputs.row(t).transpose();
      worst = std::max(worst, (m.readout(s) - y).cwiseAbs().maxCoeff());
    }
    EXPECT_LE(worst, 1e-12) << cfg.name;
  }
}

}  // namespace
}  // namespace gkf
