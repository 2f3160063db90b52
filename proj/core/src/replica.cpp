#include "gkf/replica.hpp"

#include <string>
#include <vector>

#include "gkf/errors.hpp"
#include "gkf/rng.hpp"

namespace gkf {
namespace {

Vector apply(Nonlinearity rho, const Vector& z) {
  Vector out(z.size());
  for (Index i = 0; i < z.size(); ++i) out[i] = activate(rho, z[i]);
  return out;
}

Vector derivative(Nonlinearity rho, const Vector& z) {
  Vector out(z.size());
  for (Index i = 0; i < z.size(); ++i) out[i] = activate_derivative(rho, z[i]);
  return out;
}

void check_scalar_node_inputs(const Vector& s, const Vector& x_enc, Index n) {
  if (s.size() != n || x_enc.size() != n) {
    throw DimensionError("replica: state and input must have one entry per node (" +
                         std::to_string(n) + ")");
  }
}

}  // namespace

ReplicaParams ReplicaParams::lingss() {
  return {0.6, 0.3, -0.5, 2.0, Nonlinearity::kIdentity, Nonlinearity::kIdentity};
}

ReplicaParams ReplicaParams::nonlingss() {
  return {0.6, -0.3, -2.0, 5.0, Nonlinearity::kTanh, Nonlinearity::kTanh};
}

Vector replica_transition(const Vector& s, const Vector& x_enc, const ReplicaParams& params,
                          const GraphTopology& topology) {
  const Index n = topology.n_nodes();
  check_scalar_node_inputs(s, x_enc, n);
  const Vector u = s + x_enc;
  const Vector z = params.theta_tm * u + params.theta_sp * (topology.normalized_sym() * u);
  return apply(params.rho_st, z);
}

Vector replica_readout(const Vector& s, const ReplicaParams& params) {
  const Vector r = (params.psi1 * s).array() + params.psi0;
  return apply(params.rho_ro, r);
}

ScalarMixingModel::ScalarMixingModel(GraphTopology topology, ReplicaParams params,
                                     Matrix graph_operator)
    : GssModel(std::move(topology)), params_(params), graph_operator_(std::move(graph_operator)) {}

Matrix ScalarMixingModel::mixing() const {
  const Index n = n_nodes();
  return params_.theta_tm * Matrix::Identity(n, n) + params_.theta_sp * graph_operator_;
}

Vector ScalarMixingModel::encode(const Vector& x) const {
  if (x.size() != input_dim()) throw DimensionError("replica: input length mismatch");
  return x;
}

Vector ScalarMixingModel::transition(const Vector& s, const Vector& x_enc) const {
  check_scalar_node_inputs(s, x_enc, n_nodes());
  const Vector u = s + x_enc;
  return apply(params_.rho_st, params_.theta_tm * u + params_.theta_sp * (graph_operator_ * u));
}

Vector ScalarMixingModel::readout(const Vector& s) const {
  check_state(s);
  return replica_readout(s, params_);
}

Matrix ScalarMixingModel::transition_jacobian(const Vector& s, const Vector& x_enc) const {
  check_scalar_node_inputs(s, x_enc, n_nodes());
  const Matrix mix = mixing();
  const Vector z = mix * (s + x_enc);
  return derivative(params_.rho_st, z).asDiagonal() * mix;
}

Matrix ScalarMixingModel::readout_jacobian(const Vector& s) const {
  check_state(s);
  const Vector r = (params_.psi1 * s).array() + params_.psi0;
  return (params_.psi1 * derivative(params_.rho_ro, r)).asDiagonal();
}

Vector ScalarMixingModel::params() const {
  Vector p(4);
  p << params_.theta_tm, params_.theta_sp, params_.psi0, params_.psi1;
  return p;
}

void ScalarMixingModel::set_params(const Vector& p) {
  if (p.size() != 4) throw DimensionError("replica: expected 4 parameters");
  params_.theta_tm = p[0];
  params_.theta_sp = p[1];
  params_.psi0 = p[2];
  params_.psi1 = p[3];
}

Vector ScalarMixingModel::transition_param_vjp(const Vector& s, const Vector& x_enc,
                                               const Vector& cotangent) const {
  check_scalar_node_inputs(s, x_enc, n_nodes());
  const Vector u = s + x_enc;
  const Vector gu = graph_operator_ * u;
  const Vector gz =
      cotangent.cwiseProduct(derivative(params_.rho_st, params_.theta_tm * u + params_.theta_sp * gu));
  Vector g = Vector::Zero(4);
  g[0] = gz.dot(u);
  g[1] = gz.dot(gu);
  return g;
}

Vector ScalarMixingModel::readout_param_vjp(const Vector& s, const Vector& cotangent) const {
  check_state(s);
  const Vector r = (params_.psi1 * s).array() + params_.psi0;
  const Vector gr = cotangent.cwiseProduct(derivative(params_.rho_ro, r));
  Vector g = Vector::Zero(4);
  g[2] = gr.sum();
  g[3] = gr.dot(s);
  return g;
}

double ScalarMixingModel::window_loss(const WindowBatch& batch, Vector* grad) const {
  const Index n = n_nodes();
  const Index len = batch.length;
  const auto n_windows = static_cast<Index>(batch.starts.size());
  if (len < 1) throw DimensionError("window length must be positive");
  if (batch.start_states.rows() != n_windows || batch.start_states.cols() != n) {
    throw DimensionError("window start states have the wrong shape");
  }
  const Matrix mix = mixing();
  const Matrix mix_t = mix.transpose();
  const double scale = 1.0 / static_cast<double>(n_windows * len * n);

  double loss = 0.0;
  Vector g = Vector::Zero(4);
  std::vector<Vector> states(static_cast<std::size_t>(len));
  std::vector<Vector> pre_readout(static_cast<std::size_t>(len));
  std::vector<Vector> errors(static_cast<std::size_t>(len));
  std::vector<Vector> mixed_in(static_cast<std::size_t>(len));
  std::vector<Vector> pre_act(static_cast<std::size_t>(len));

  for (Index b = 0; b < n_windows; ++b) {
    const Index t0 = batch.starts[static_cast<std::size_t>(b)];
    if (t0 < 0 || t0 + len > batch.outputs.rows()) {
      throw DimensionError("window " + std::to_string(b) + " exceeds the episode");
    }
    Vector s = batch.start_states.row(b).transpose();
    for (Index k = 0; k < len; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      states[kk] = s;
      pre_readout[kk] = (params_.psi1 * s).array() + params_.psi0;
      errors[kk] = apply(params_.rho_ro, pre_readout[kk]) - batch.outputs.row(t0 + k).transpose();
      loss += errors[kk].squaredNorm();
      if (k + 1 < len) {
        mixed_in[kk] = s + batch.inputs.row(t0 + k).transpose();
        pre_act[kk] = mix * mixed_in[kk];
        s = apply(params_.rho_st, pre_act[kk]);
      }
    }
    if (grad == nullptr) continue;

    Vector gs_next = Vector::Zero(n);
    for (Index k = len - 1; k >= 0; --k) {
      const auto kk = static_cast<std::size_t>(k);
      Vector gs = Vector::Zero(n);
      if (k + 1 < len) {
        const Vector gz = gs_next.cwiseProduct(derivative(params_.rho_st, pre_act[kk]));
        g[0] += gz.dot(mixed_in[kk]);
        g[1] += gz.dot(graph_operator_ * mixed_in[kk]);
        gs = mix_t * gz;
      }
      const Vector gr =
          (2.0 * scale) * errors[kk].cwiseProduct(derivative(params_.rho_ro, pre_readout[kk]));
      g[2] += gr.sum();
      g[3] += gr.dot(states[kk]);
      gs += params_.psi1 * gr;
      gs_next = gs;
    }
  }
  if (grad != nullptr) *grad = g;
  return loss * scale;
}

ReplicaModel::ReplicaModel(GraphTopology topology, ReplicaParams params)
    : ScalarMixingModel(topology, params, topology.normalized_sym()) {}

ReplicaModel ReplicaModel::random_init(GraphTopology topology, Nonlinearity rho_st,
                                       Nonlinearity rho_ro, std::uint64_t seed) {
  Rng rng(seed, StreamId::kWeightInit);
  ReplicaParams p;
  p.theta_tm = rng.uniform(0.0, 0.5);
  p.theta_sp = rng.uniform(-0.4, 0.4);
  p.psi0 = rng.uniform(-1.0, 1.0);
  p.psi1 = rng.uniform(-1.0, 1.0);
  p.rho_st = rho_st;
  p.rho_ro = rho_ro;
  return ReplicaModel(std::move(topology), p);
}

std::unique_ptr<GssModel> ReplicaModel::clone() const {
  return std::make_unique<ReplicaModel>(*this);
}

LinearAdjacencyModel::LinearAdjacencyModel(GraphTopology topology, double theta_tm,
                                           double theta_sp, double psi0, double psi1)
    : ScalarMixingModel(topology,
                        {theta_tm, theta_sp, psi0, psi1, Nonlinearity::kIdentity,
                         Nonlinearity::kIdentity},
                        topology.adjacency()) {}

std::unique_ptr<GssModel> LinearAdjacencyModel::clone() const {
  return std::make_unique<LinearAdjacencyModel>(*this);
}

Vector LinearAdjacencyModel::transition_with_noise(const Vector& s, const Vector& x_enc,
                                                   const Vector& noise) const {
  const Index n = n_nodes();
  check_scalar_node_inputs(s, x_enc, n);
  if (noise.size() != n * n) throw DimensionError("adjacency noise must have |V|^2 entries");
  const Eigen::Map<const RowMatrix> alpha(noise.data(), n, n);
  const Vector u = s + x_enc;
  return params_.theta_tm * u + params_.theta_sp * ((graph_operator_ + alpha) * u);
}

Matrix LinearAdjacencyModel::noise_jacobian(const Vector& s, const Vector& x_enc) const {
  const Index n = n_nodes();
  check_scalar_node_inputs(s, x_enc, n);
  const Vector u = s + x_enc;
  Matrix l = Matrix::Zero(n, n * n);
  for (Index v = 0; v < n; ++v) {
    for (Index j = 0; j < n; ++j) l(v, v * n + j) = params_.theta_sp * u[j];
  }
  return l;
}

}  // namespace gkf
