#include "gkf/stgnn.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "gkf/errors.hpp"
#include "gkf/rng.hpp"

namespace gkf {
namespace {

struct DenseCache {
  RowMatrix input;
  RowMatrix pre;
  RowMatrix hidden;
};

struct TransitionCache {
  DenseCache gamma;
  RowMatrix z;
  RowMatrix az;
  RowMatrix activated;
};

RowMatrix as_nodes(const Vector& v, Index rows, Index cols) {
  return Eigen::Map<const RowMatrix>(v.data(), rows, cols);
}

Vector flat(const RowMatrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

RowMatrix relu_mask(const RowMatrix& pre) { return (pre.array() > 0.0).cast<double>().matrix(); }

RowMatrix dense_forward(const DenseLayers& m, const RowMatrix& in, DenseCache* cache) {
  RowMatrix pre = (in * m.w1).rowwise() + m.b1;
  RowMatrix hidden = pre.cwiseMax(0.0);
  RowMatrix out = (hidden * m.w2).rowwise() + m.b2;
  if (cache != nullptr) {
    cache->input = in;
    cache->pre = std::move(pre);
    cache->hidden = std::move(hidden);
  }
  return out;
}

// Accumulates parameter gradients into g and returns d loss / d input.
RowMatrix dense_backward(const DenseLayers& m, const DenseCache& c, const RowMatrix& g_out,
                         DenseLayers& g) {
  g.w2.noalias() += c.hidden.transpose() * g_out;
  g.b2 += g_out.colwise().sum();
  const RowMatrix g_hidden = (g_out * m.w2.transpose()).cwiseProduct(relu_mask(c.pre));
  g.w1.noalias() += c.input.transpose() * g_hidden;
  g.b1 += g_hidden.colwise().sum();
  return g_hidden * m.w1.transpose();
}

// Applies the node operator to each stacked graph block of n rows.
RowMatrix propagate(const Matrix& op, const RowMatrix& z, Index n) {
  RowMatrix out(z.rows(), z.cols());
  for (Index r = 0; r < z.rows(); r += n) {
    out.middleRows(r, n).noalias() = op * z.middleRows(r, n);
  }
  return out;
}

RowMatrix propagate_transpose(const Matrix& op, const RowMatrix& z, Index n) {
  RowMatrix out(z.rows(), z.cols());
  for (Index r = 0; r < z.rows(); r += n) {
    out.middleRows(r, n).noalias() = op.transpose() * z.middleRows(r, n);
  }
  return out;
}

// u = s + x_enc stacked as rows; returns u + tanh(z W' + A z W'').
RowMatrix transition_forward(const StgnnParams& p, const Matrix& a_tilde, Index n,
                             const RowMatrix& u, TransitionCache* cache) {
  RowMatrix z = dense_forward(p.gamma, u, cache != nullptr ? &cache->gamma : nullptr);
  RowMatrix az = propagate(a_tilde, z, n);
  RowMatrix activated = (z * p.w_self + az * p.w_neigh).array().tanh().matrix();
  RowMatrix out = u + activated;
  if (cache != nullptr) {
    cache->z = std::move(z);
    cache->az = std::move(az);
    cache->activated = std::move(activated);
  }
  return out;
}

RowMatrix transition_backward(const StgnnParams& p, const Matrix& a_tilde, Index n,
                              const TransitionCache& c, const RowMatrix& g_out, StgnnParams& g) {
  const RowMatrix g_pre =
      g_out.cwiseProduct((1.0 - c.activated.array().square()).matrix());
  g.w_self.noalias() += c.z.transpose() * g_pre;
  g.w_neigh.noalias() += c.az.transpose() * g_pre;
  const RowMatrix g_z =
      g_pre * p.w_self.transpose() + propagate_transpose(a_tilde, g_pre * p.w_neigh.transpose(), n);
  return g_out + dense_backward(p.gamma, c.gamma, g_z, g.gamma);
}

void fill_uniform(RowMatrix& m, double bound, Rng& rng) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
  }
}

void fill_uniform(Eigen::RowVectorXd& v, double bound, Rng& rng) {
  for (Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-bound, bound);
}

DenseLayers random_dense(Index in, Index hidden, Index out, Rng& rng) {
  DenseLayers d = DenseLayers::zeros(in, hidden, out);
  const double b1 = 1.0 / std::sqrt(static_cast<double>(in));
  const double b2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  fill_uniform(d.w1, b1, rng);
  fill_uniform(d.b1, b1, rng);
  fill_uniform(d.w2, b2, rng);
  fill_uniform(d.b2, b2, rng);
  return d;
}

class FlatWriter {
 public:
  explicit FlatWriter(Index n) : out_(n) {}
  template <typename M>
  void put(const M& m) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) out_[pos_++] = m(i, j);
    }
  }
  void put(const DenseLayers& d) {
    put(d.w1);
    put(d.b1);
    put(d.w2);
    put(d.b2);
  }
  Vector take() { return std::move(out_); }

 private:
  Vector out_;
  Index pos_ = 0;
};

class FlatReader {
 public:
  explicit FlatReader(const Vector& in) : in_(in) {}
  template <typename M>
  void get(M& m) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) m(i, j) = in_[pos_++];
    }
  }
  void get(DenseLayers& d) {
    get(d.w1);
    get(d.b1);
    get(d.w2);
    get(d.b2);
  }

 private:
  const Vector& in_;
  Index pos_ = 0;
};

}  // namespace

DenseLayers DenseLayers::zeros(Index in, Index hidden, Index out) {
  return {RowMatrix::Zero(in, hidden), Eigen::RowVectorXd::Zero(hidden),
          RowMatrix::Zero(hidden, out), Eigen::RowVectorXd::Zero(out)};
}

StgnnParams StgnnParams::zeros(const StgnnDims& d) {
  return {DenseLayers::zeros(d.input, d.hidden, d.state),
          DenseLayers::zeros(d.state, d.hidden, d.state),
          RowMatrix::Zero(d.state, d.state),
          RowMatrix::Zero(d.state, d.state),
          DenseLayers::zeros(d.state, d.hidden, d.output)};
}

StgnnParams StgnnParams::random(const StgnnDims& d, Rng& rng) {
  StgnnParams p;
  p.encoder = random_dense(d.input, d.hidden, d.state, rng);
  p.gamma = random_dense(d.state, d.hidden, d.state, rng);
  const double bound = 1.0 / std::sqrt(static_cast<double>(d.state));
  p.w_self = RowMatrix::Zero(d.state, d.state);
  p.w_neigh = RowMatrix::Zero(d.state, d.state);
  fill_uniform(p.w_self, bound, rng);
  fill_uniform(p.w_neigh, bound, rng);
  p.readout = random_dense(d.state, d.hidden, d.output, rng);
  return p;
}

StgnnDims StgnnParams::dims() const {
  return {encoder.w1.rows(), encoder.w2.cols(), readout.w2.cols(), encoder.w1.cols()};
}

ParamLayout StgnnParams::layout() const {
  return {encoder.size(), gamma.size() + w_self.size() + w_neigh.size(), readout.size()};
}

Vector StgnnParams::flatten() const {
  FlatWriter w(layout().total());
  w.put(encoder);
  w.put(gamma);
  w.put(w_self);
  w.put(w_neigh);
  w.put(readout);
  return w.take();
}

void StgnnParams::assign(const Vector& flat_params) {
  if (flat_params.size() != layout().total()) {
    throw DimensionError("stgnn: expected " + std::to_string(layout().total()) +
                         " parameters, got " + std::to_string(flat_params.size()));
  }
  FlatReader r(flat_params);
  r.get(encoder);
  r.get(gamma);
  r.get(w_self);
  r.get(w_neigh);
  r.get(readout);
}

Vector stgnn_transition(const Vector& s, const Vector& x_enc, const StgnnParams& params,
                        const GraphTopology& topology) {
  const Index n = topology.n_nodes();
  const Index d = params.w_self.rows();
  if (s.size() != n * d || x_enc.size() != n * d) {
    throw DimensionError("stgnn_transition: state/input must be |V| x d_h = " +
                         std::to_string(n * d));
  }
  const RowMatrix u = as_nodes(s, n, d) + as_nodes(x_enc, n, d);
  return flat(transition_forward(params, topology.normalized_row(), n, u, nullptr));
}

StgnnModel::StgnnModel(GraphTopology topology, StgnnParams params)
    : GssModel(std::move(topology)), dims_(params.dims()), params_(std::move(params)) {}

StgnnModel StgnnModel::random_init(GraphTopology topology, std::uint64_t seed,
                                   const StgnnDims& dims) {
  Rng rng(seed, StreamId::kWeightInit);
  return StgnnModel(std::move(topology), StgnnParams::random(dims, rng));
}

std::unique_ptr<GssModel> StgnnModel::clone() const { return std::make_unique<StgnnModel>(*this); }

Vector StgnnModel::encode(const Vector& x) const {
  if (x.size() != input_dim()) throw DimensionError("stgnn: input length mismatch");
  return flat(dense_forward(params_.encoder, as_nodes(x, n_nodes(), dims_.input), nullptr));
}

Vector StgnnModel::transition(const Vector& s, const Vector& x_enc) const {
  check_state(s);
  check_encoded(x_enc);
  return stgnn_transition(s, x_enc, params_, topology_);
}

Vector StgnnModel::readout(const Vector& s) const {
  check_state(s);
  return flat(dense_forward(params_.readout, as_nodes(s, n_nodes(), dims_.state), nullptr));
}

Matrix StgnnModel::transition_jacobian(const Vector& s, const Vector& x_enc) const {
  check_state(s);
  check_encoded(x_enc);
  const Index n = n_nodes();
  const Index d = dims_.state;
  const Matrix& a_tilde = topology_.normalized_row();
  const RowMatrix u = as_nodes(s, n, d) + as_nodes(x_enc, n, d);
  DenseCache gc;
  const RowMatrix z = dense_forward(params_.gamma, u, &gc);
  const RowMatrix az = propagate(a_tilde, z, n);
  const RowMatrix act = (z * params_.w_self + az * params_.w_neigh).array().tanh().matrix();
  const RowMatrix mask = relu_mask(gc.pre);

  // Column convention: dz_k = G_k du_k with G_k = W2^T diag(mask_k) W1^T.
  std::vector<Matrix> self_term(static_cast<std::size_t>(n));
  std::vector<Matrix> neigh_term(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    const Matrix g_k = params_.gamma.w2.transpose() * mask.row(k).transpose().asDiagonal() *
                       params_.gamma.w1.transpose();
    self_term[static_cast<std::size_t>(k)] = params_.w_self.transpose() * g_k;
    neigh_term[static_cast<std::size_t>(k)] = params_.w_neigh.transpose() * g_k;
  }

  Matrix jac = Matrix::Zero(n * d, n * d);
  for (Index i = 0; i < n; ++i) {
    const Vector dtanh = (1.0 - act.row(i).array().square()).transpose();
    for (Index k = 0; k < n; ++k) {
      auto block = jac.block(i * d, k * d, d, d);
      if (i == k) {
        block = Matrix::Identity(d, d) + dtanh.asDiagonal() * self_term[static_cast<std::size_t>(k)];
      }
      if (a_tilde(i, k) != 0.0) {
        block += a_tilde(i, k) * (dtanh.asDiagonal() * neigh_term[static_cast<std::size_t>(k)]);
      }
    }
  }
  return jac;
}

Matrix StgnnModel::readout_jacobian(const Vector& s) const {
  check_state(s);
  const Index n = n_nodes();
  const Index d = dims_.state;
  const Index dy = dims_.output;
  DenseCache rc;
  dense_forward(params_.readout, as_nodes(s, n, d), &rc);
  const RowMatrix mask = relu_mask(rc.pre);
  Matrix jac = Matrix::Zero(n * dy, n * d);
  for (Index i = 0; i < n; ++i) {
    jac.block(i * dy, i * d, dy, d) = params_.readout.w2.transpose() *
                                      mask.row(i).transpose().asDiagonal() *
                                      params_.readout.w1.transpose();
  }
  return jac;
}

Vector StgnnModel::transition_param_vjp(const Vector& s, const Vector& x_enc,
                                        const Vector& cotangent) const {
  check_state(s);
  check_encoded(x_enc);
  if (cotangent.size() != state_dim()) throw DimensionError("stgnn: cotangent length mismatch");
  const Index n = n_nodes();
  const Index d = dims_.state;
  const RowMatrix u = as_nodes(s, n, d) + as_nodes(x_enc, n, d);
  TransitionCache cache;
  transition_forward(params_, topology_.normalized_row(), n, u, &cache);
  StgnnParams g = StgnnParams::zeros(dims_);
  transition_backward(params_, topology_.normalized_row(), n, cache, as_nodes(cotangent, n, d), g);
  return g.flatten();
}

Vector StgnnModel::readout_param_vjp(const Vector& s, const Vector& cotangent) const {
  check_state(s);
  if (cotangent.size() != output_dim()) throw DimensionError("stgnn: cotangent length mismatch");
  const Index n = n_nodes();
  DenseCache cache;
  dense_forward(params_.readout, as_nodes(s, n, dims_.state), &cache);
  StgnnParams g = StgnnParams::zeros(dims_);
  dense_backward(params_.readout, cache, as_nodes(cotangent, n, dims_.output), g.readout);
  return g.flatten();
}

double StgnnModel::window_loss(const WindowBatch& batch, Vector* grad) const {
  const Index n = n_nodes();
  const Index d = dims_.state;
  const Index dx = dims_.input;
  const Index dy = dims_.output;
  const Index len = batch.length;
  const auto n_windows = static_cast<Index>(batch.starts.size());
  if (len < 1) throw DimensionError("window length must be positive");
  if (batch.start_states.rows() != n_windows || batch.start_states.cols() != n * d) {
    throw DimensionError("window start states have the wrong shape");
  }
  for (Index b = 0; b < n_windows; ++b) {
    const Index t0 = batch.starts[static_cast<std::size_t>(b)];
    if (t0 < 0 || t0 + len > batch.outputs.rows()) {
      throw DimensionError("window " + std::to_string(b) + " exceeds the episode");
    }
  }
  const Matrix& a_tilde = topology_.normalized_row();
  const Index rows = n_windows * n;
  const double scale = 1.0 / static_cast<double>(n_windows * len * n * dy);

  auto gather = [&](const Matrix& source, Index k, Index features) {
    RowMatrix out(rows, features);
    for (Index b = 0; b < n_windows; ++b) {
      const Vector row = source.row(batch.starts[static_cast<std::size_t>(b)] + k).transpose();
      out.middleRows(b * n, n) = as_nodes(row, n, features);
    }
    return out;
  };

  const auto steps = static_cast<std::size_t>(len);
  std::vector<DenseCache> readout_cache(steps);
  std::vector<DenseCache> encoder_cache(steps);
  std::vector<TransitionCache> transition_cache(steps);
  std::vector<RowMatrix> errors(steps);

  RowMatrix state = Eigen::Map<const RowMatrix>(batch.start_states.data(), rows, d);
  double loss = 0.0;
  for (Index k = 0; k < len; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    errors[kk] = dense_forward(params_.readout, state, grad ? &readout_cache[kk] : nullptr) -
                 gather(batch.outputs, k, dy);
    loss += errors[kk].squaredNorm();
    if (k + 1 < len) {
      const RowMatrix x_enc = dense_forward(params_.encoder, gather(batch.inputs, k, dx),
                                            grad ? &encoder_cache[kk] : nullptr);
      state = transition_forward(params_, a_tilde, n, state + x_enc,
                                 grad ? &transition_cache[kk] : nullptr);
    }
  }
  if (grad != nullptr) {
    StgnnParams g = StgnnParams::zeros(dims_);
    RowMatrix g_next = RowMatrix::Zero(rows, d);
    for (Index k = len - 1; k >= 0; --k) {
      const auto kk = static_cast<std::size_t>(k);
      RowMatrix g_state = RowMatrix::Zero(rows, d);
      if (k + 1 < len) {
        g_state = transition_backward(params_, a_tilde, n, transition_cache[kk], g_next, g);
        dense_backward(params_.encoder, encoder_cache[kk], g_state, g.encoder);
      }
      g_state += dense_backward(params_.readout, readout_cache[kk], (2.0 * scale) * errors[kk],
                                g.readout);
      g_next = std::move(g_state);
    }
    *grad = g.flatten();
  }
  return loss * scale;
}

}  // namespace gkf
