#pragma once

#include <cstdint>

#include "gkf/models.hpp"

namespace gkf {

struct ReplicaParams {
  double theta_tm = 0.0;
  double theta_sp = 0.0;
  double psi0 = 0.0;
  double psi1 = 0.0;
  Nonlinearity rho_st = Nonlinearity::kIdentity;
  Nonlinearity rho_ro = Nonlinearity::kIdentity;

  // Ground-truth parameters of the two synthetic systems.
  static ReplicaParams lingss();
  static ReplicaParams nonlingss();
};

// rho_st((theta_tm I + theta_sp A_bar)(s + x_enc))
Vector replica_transition(const Vector& s, const Vector& x_enc, const ReplicaParams& params,
                          const GraphTopology& topology);
// rho_ro(psi0 + psi1 s), node-wise.
Vector replica_readout(const Vector& s, const ReplicaParams& params);

// Scalar-node model with transition rho_st((theta_tm I + theta_sp G)(s + x))
// and readout rho_ro(psi0 + psi1 s). Parameters are laid out as
// [theta_tm, theta_sp | psi0, psi1]; the encoder is the identity.
class ScalarMixingModel : public GssModel {
 public:
  Index input_features() const override { return 1; }
  Index state_features() const override { return 1; }
  Index output_features() const override { return 1; }

  Vector encode(const Vector& x) const override;
  Vector transition(const Vector& s, const Vector& x_enc) const override;
  Vector readout(const Vector& s) const override;
  Matrix transition_jacobian(const Vector& s, const Vector& x_enc) const override;
  Matrix readout_jacobian(const Vector& s) const override;

  ParamLayout param_layout() const override { return {0, 2, 2}; }
  Vector params() const override;
  void set_params(const Vector& params) override;

  Vector transition_param_vjp(const Vector& s, const Vector& x_enc,
                              const Vector& cotangent) const override;
  Vector readout_param_vjp(const Vector& s, const Vector& cotangent) const override;
  double window_loss(const WindowBatch& batch, Vector* grad) const override;

  const ReplicaParams& replica_params() const { return params_; }

 protected:
  ScalarMixingModel(GraphTopology topology, ReplicaParams params, Matrix graph_operator);

  Matrix mixing() const;

  ReplicaParams params_;
  Matrix graph_operator_;
};

// Approximating family structurally identical to the synthetic generator;
// the graph operator is the symmetric normalization A_bar.
class ReplicaModel final : public ScalarMixingModel {
 public:
  ReplicaModel(GraphTopology topology, ReplicaParams params);

  // theta_tm ~ U(0, 0.5), theta_sp ~ U(-0.4, 0.4), psi ~ U(-1, 1); keeps the
  // identity-nonlinearity recursion stable at initialization.
  static ReplicaModel random_init(GraphTopology topology, Nonlinearity rho_st, Nonlinearity rho_ro,
                                  std::uint64_t seed);

  std::string family() const override { return "replica"; }
  std::unique_ptr<GssModel> clone() const override;
};

// Adjacency-noise test model: f(s, x, alpha) = (theta_tm I + theta_sp (A + alpha))(s + x)
// with the raw (unnormalized) adjacency and identity nonlinearities.
class LinearAdjacencyModel final : public ScalarMixingModel {
 public:
  LinearAdjacencyModel(GraphTopology topology, double theta_tm, double theta_sp, double psi0,
                       double psi1);

  std::string family() const override { return "linear-adjacency"; }
  std::unique_ptr<GssModel> clone() const override;
  NoiseMode noise_mode() const override { return NoiseMode::kAdjacency; }

  Vector transition_with_noise(const Vector& s, const Vector& x_enc,
                               const Vector& noise) const override;
  Matrix noise_jacobian(const Vector& s, const Vector& x_enc) const override;
};

}  // namespace gkf
