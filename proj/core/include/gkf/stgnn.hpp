#pragma once

#include <cstdint>

#include "gkf/models.hpp"

namespace gkf {

class Rng;

// Node-wise two-layer dense network: relu(x W1 + b1) W2 + b2, rows are nodes.
struct DenseLayers {
  RowMatrix w1;
  Eigen::RowVectorXd b1;
  RowMatrix w2;
  Eigen::RowVectorXd b2;

  static DenseLayers zeros(Index in, Index hidden, Index out);
  Index size() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
};

struct StgnnDims {
  Index input = 1;
  Index state = 7;
  Index output = 1;
  Index hidden = 7;
};

struct StgnnParams {
  DenseLayers encoder;
  DenseLayers gamma;
  RowMatrix w_self;   // W'
  RowMatrix w_neigh;  // W''
  DenseLayers readout;

  static StgnnParams zeros(const StgnnDims& dims);
  // Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static StgnnParams random(const StgnnDims& dims, Rng& rng);

  StgnnDims dims() const;
  ParamLayout layout() const;
  // [encoder | gamma, W', W'' | readout], each matrix row-major.
  Vector flatten() const;
  void assign(const Vector& flat);
};

// s + x_enc + tanh(z W' + A_tilde z W''), z = gamma(s + x_enc); s is |V| x d_h
// flattened node-major.
Vector stgnn_transition(const Vector& s, const Vector& x_enc, const StgnnParams& params,
                        const GraphTopology& topology);

class StgnnModel final : public GssModel {
 public:
  StgnnModel(GraphTopology topology, StgnnParams params);
  static StgnnModel random_init(GraphTopology topology, std::uint64_t seed,
                                const StgnnDims& dims = {});

  std::string family() const override { return "stgnn"; }
  std::unique_ptr<GssModel> clone() const override;

  Index input_features() const override { return dims_.input; }
  Index state_features() const override { return dims_.state; }
  Index output_features() const override { return dims_.output; }

  Vector encode(const Vector& x) const override;
  Vector transition(const Vector& s, const Vector& x_enc) const override;
  Vector readout(const Vector& s) const override;
  Matrix transition_jacobian(const Vector& s, const Vector& x_enc) const override;
  Matrix readout_jacobian(const Vector& s) const override;

  ParamLayout param_layout() const override { return params_.layout(); }
  Vector params() const override { return params_.flatten(); }
  void set_params(const Vector& params) override { params_.assign(params); }

  Vector transition_param_vjp(const Vector& s, const Vector& x_enc,
                              const Vector& cotangent) const override;
  Vector readout_param_vjp(const Vector& s, const Vector& cotangent) const override;
  double window_loss(const WindowBatch& batch, Vector* grad) const override;

  const StgnnParams& stgnn_params() const { return params_; }

 private:
  StgnnDims dims_;
  StgnnParams params_;
};

}  // namespace gkf
