#include "pdgnn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <tuple>

#include "binio.hpp"
#include "pdgnn/rng.hpp"

namespace pdgnn {

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<std::tuple<int, int, double>> triplets) {
  for (const auto& [r, c, v] : triplets) {
    if (r < 0 || r >= n || c < 0 || c >= n) throw std::out_of_range("triplet index out of range");
    (void)v;
  }
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });

  SparseMatrix s;
  s.n = n;
  s.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    auto [r, c, v] = triplets[i];
    if (!s.col.empty() && i > 0 && std::get<0>(triplets[i - 1]) == r &&
        std::get<1>(triplets[i - 1]) == c) {
      s.val.back() += v;  // duplicate entries accumulate
    } else {
      s.col.push_back(c);
      s.val.push_back(v);
      ++s.row_ptr[static_cast<std::size_t>(r) + 1];
    }
  }
  for (int i = 0; i < n; ++i) s.row_ptr[i + 1] += s.row_ptr[i];
  return s;
}

Matrix SparseMatrix::apply(const Matrix& x) const {
  if (x.rows() != n) throw std::invalid_argument("sparse apply: dimension mismatch");
  Matrix y = Matrix::Zero(x.rows(), x.cols());
  for (int i = 0; i < n; ++i) {
    for (int idx = row_ptr[i]; idx < row_ptr[i + 1]; ++idx) {
      y.row(i) += val[idx] * x.row(col[idx]);
    }
  }
  return y;
}

Matrix SparseMatrix::dense() const {
  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int idx = row_ptr[i]; idx < row_ptr[i + 1]; ++idx) d(i, col[idx]) += val[idx];
  }
  return d;
}

WeightTransform default_transform(EdgeAttribute weight_attribute) {
  return weight_attribute == EdgeAttribute::Amount ? WeightTransform::Log1p
                                                   : WeightTransform::Raw;
}

SparseMatrix normalized_laplacian(const AccountSubgraph& sub, WeightTransform transform) {
  const int n = static_cast<int>(sub.nodes.size());
  if (n == 0) throw std::invalid_argument("normalized_laplacian: empty subgraph");

  // Symmetrized weighted adjacency: entry (u,v) = w(u->v) + w(v->u).
  std::vector<std::tuple<int, int, double>> wt;
  wt.reserve(sub.edges.size() * 2);
  for (const auto& e : sub.edges) {
    double w = e.weight;
    if (w < 0.0) throw std::invalid_argument("normalized_laplacian: negative edge weight");
    if (transform == WeightTransform::Log1p) w = std::log1p(w);
    if (e.src == e.dst) continue;  // graphs carry no self-loops; stay defensive
    wt.emplace_back(static_cast<int>(e.src), static_cast<int>(e.dst), w);
    wt.emplace_back(static_cast<int>(e.dst), static_cast<int>(e.src), w);
  }
  SparseMatrix adj = SparseMatrix::from_triplets(n, std::move(wt));

  std::vector<double> degree(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int idx = adj.row_ptr[i]; idx < adj.row_ptr[i + 1]; ++idx) degree[i] += adj.val[idx];
  }

  std::vector<std::tuple<int, int, double>> lt;
  lt.reserve(adj.val.size() + static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) lt.emplace_back(i, i, 1.0);  // zero-degree rows stay I
  for (int i = 0; i < n; ++i) {
    for (int idx = adj.row_ptr[i]; idx < adj.row_ptr[i + 1]; ++idx) {
      const int j = adj.col[idx];
      const double w = adj.val[idx];
      if (w <= 0.0) continue;
      lt.emplace_back(i, j, -w / std::sqrt(degree[i] * degree[j]));
    }
  }
  return SparseMatrix::from_triplets(n, std::move(lt));
}

PowerIterationResult lambda_max(const SparseMatrix& l, double tol, int max_iters) {
  const int n = l.n;
  PowerIterationResult res;
  if (n == 0) return res;

  // Fixed pseudo-random start: an all-ones start can be exactly orthogonal
  // to the dominant eigenvector (it is for a single unit edge).
  Rng rng(0x9e3779b97f4a7c15ULL);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(-1.0, 1.0);
  v.normalize();

  double estimate = 0.0;
  for (int iter = 1; iter <= max_iters; ++iter) {
    Vector y = l.apply(v);
    const double rayleigh = v.dot(y);
    const double norm = y.norm();
    res.iterations = iter;
    if (norm < 1e-300) {
      // start vector landed in the kernel; nudge and continue
      for (int i = 0; i < n; ++i) v(i) = rng.uniform(-1.0, 1.0);
      v.normalize();
      continue;
    }
    v = y / norm;
    if (iter > 1 && std::abs(rayleigh - estimate) < tol) {
      res.value = rayleigh;
      res.converged = true;
      return res;
    }
    estimate = rayleigh;
  }
  res.value = estimate;  // best effort, flagged unconverged
  return res;
}

ScaledOperator scale_operator(const SparseMatrix& l, double lambda) {
  ScaledOperator out;
  if (lambda <= 0.0) {
    // 2.0 is the spectral ceiling of the normalized Laplacian.
    out.lambda = 2.0;
    out.lambda_substituted = true;
  } else {
    out.lambda = lambda;
  }

  const double scale = 2.0 / out.lambda;
  std::vector<std::tuple<int, int, double>> triplets;
  triplets.reserve(l.val.size() + static_cast<std::size_t>(l.n));
  for (int i = 0; i < l.n; ++i) {
    for (int idx = l.row_ptr[i]; idx < l.row_ptr[i + 1]; ++idx) {
      triplets.emplace_back(i, l.col[idx], scale * l.val[idx]);
    }
  }
  for (int i = 0; i < l.n; ++i) triplets.emplace_back(i, i, -1.0);
  out.op = SparseMatrix::from_triplets(l.n, std::move(triplets));
  return out;
}

void ChebLayer::zero_grads() {
  for (auto& g : grads) g.setZero();
}

namespace {

ChebLayer make_layer(int d_in, int d_out, int order, Rng& rng) {
  ChebLayer layer;
  layer.d_in = d_in;
  layer.d_out = d_out;
  const double bound = std::sqrt(6.0 / (d_in + d_out));
  for (int k = 0; k < order; ++k) {
    Matrix w(d_in, d_out);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
    }
    layer.weights.push_back(std::move(w));
    layer.grads.push_back(Matrix::Zero(d_in, d_out));
  }
  return layer;
}

}  // namespace

Matrix cheb_forward(const ChebLayer& layer, const ScaledOperator& op, const Matrix& x,
                    LayerCache* cache) {
  const int order = layer.order();
  if (order == 0) throw std::invalid_argument("cheb_forward: layer has no weights");
  if (x.cols() != layer.d_in) throw std::invalid_argument("cheb_forward: feature dim mismatch");
  if (x.rows() != op.op.n) throw std::invalid_argument("cheb_forward: node count mismatch");

  std::vector<Matrix> t;
  t.reserve(order);
  t.push_back(x);
  if (order > 1) t.push_back(op.op.apply(x));
  for (int k = 2; k < order; ++k) {
    t.push_back(2.0 * op.op.apply(t[k - 1]) - t[k - 2]);
  }

  Matrix pre = t[0] * layer.weights[0];
  for (int k = 1; k < order; ++k) pre += t[k] * layer.weights[k];

  Matrix h = pre.cwiseMax(0.0);
  if (cache) {
    cache->t = std::move(t);
    cache->pre = std::move(pre);
  }
  return h;
}

Matrix cheb_backward(ChebLayer& layer, const ScaledOperator& op, const LayerCache& cache,
                     const Matrix& d_out) {
  const int order = layer.order();
  if (static_cast<int>(cache.t.size()) != order) {
    throw std::invalid_argument("cheb_backward: cache does not match layer");
  }

  // ReLU subgradient at 0 is 0.
  Matrix d_pre = (cache.pre.array() > 0.0).select(d_out, 0.0);

  for (int k = 0; k < order; ++k) {
    layer.grads[k] += cache.t[k].transpose() * d_pre;
  }

  // T_k(L~) is symmetric, so dX = sum_k T_k(L~) dPre W_k^T; one recursion
  // over dPre serves every order.
  Matrix u_prev = d_pre;  // T_0 dPre
  Matrix d_x = u_prev * layer.weights[0].transpose();
  if (order > 1) {
    Matrix u_cur = op.op.apply(d_pre);  // T_1 dPre
    d_x += u_cur * layer.weights[1].transpose();
    for (int k = 2; k < order; ++k) {
      Matrix u_next = 2.0 * op.op.apply(u_cur) - u_prev;
      d_x += u_next * layer.weights[k].transpose();
      u_prev = std::move(u_cur);
      u_cur = std::move(u_next);
    }
  }
  return d_x;
}

Vector pool(const Matrix& h, Pooling mode, std::vector<Eigen::Index>* argmax) {
  if (h.rows() == 0) throw std::invalid_argument("pool: empty representation");
  if (mode == Pooling::Average) {
    if (argmax) argmax->clear();
    return h.colwise().mean().transpose();
  }
  Vector z(h.cols());
  if (argmax) argmax->assign(static_cast<std::size_t>(h.cols()), 0);
  for (Eigen::Index c = 0; c < h.cols(); ++c) {
    Eigen::Index row = 0;
    z(c) = h.col(c).maxCoeff(&row);
    if (argmax) (*argmax)[static_cast<std::size_t>(c)] = row;
  }
  return z;
}

Vector softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp();
  return e / e.sum();
}

Eigen::Vector2d classify(const Vector& z, const Matrix& w, const Matrix& b) {
  if (w.rows() != z.size() || w.cols() != 2 || b.rows() != 1 || b.cols() != 2) {
    throw std::invalid_argument("classify: dimension mismatch");
  }
  Vector logits = w.transpose() * z + b.transpose();
  Vector p = softmax(logits);
  return {p(0), p(1)};
}

double cross_entropy(double p_pos, int label) {
  constexpr double eps = 1e-12;
  const double p = std::clamp(p_pos, eps, 1.0 - eps);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

Model Model::init(const ModelConfig& cfg) {
  if (cfg.d_in <= 0 || cfg.hidden <= 0 || cfg.cheb_order <= 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  Model m;
  m.cfg_ = cfg;
  Rng rng(splitmix64(cfg.seed));
  m.layer1_ = make_layer(cfg.d_in, cfg.hidden, cfg.cheb_order, rng);
  m.layer2_ = make_layer(cfg.hidden, cfg.hidden, cfg.cheb_order, rng);
  const double bound = std::sqrt(6.0 / (cfg.hidden + 2));
  m.cls_w_.resize(cfg.hidden, 2);
  for (Eigen::Index r = 0; r < m.cls_w_.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cls_w_.cols(); ++c) m.cls_w_(r, c) = rng.uniform(-bound, bound);
  }
  m.cls_b_ = Matrix::Zero(1, 2);
  m.cls_w_grad_ = Matrix::Zero(cfg.hidden, 2);
  m.cls_b_grad_ = Matrix::Zero(1, 2);
  return m;
}

Eigen::Vector2d Model::forward(const ScaledOperator& op, const Matrix& x,
                               ModelCache* cache) const {
  ModelCache local;
  ModelCache& c = cache ? *cache : local;

  c.h1 = cheb_forward(layer1_, op, x, &c.l1);
  c.h2 = cheb_forward(layer2_, op, c.h1, &c.l2);
  c.z = pool(c.h2, cfg_.pooling, &c.argmax);
  c.logits = (cls_w_.transpose() * c.z) + cls_b_.transpose();
  c.probs = classify(c.z, cls_w_, cls_b_);
  c.valid = true;
  return c.probs;
}

void Model::backward(const ScaledOperator& op, const ModelCache& cache, int label, double scale) {
  if (!cache.valid) throw std::invalid_argument("backward: missing forward cache");

  Eigen::Vector2d d_logits = cache.probs;
  d_logits(label == 1 ? 1 : 0) -= 1.0;
  d_logits *= scale;

  cls_w_grad_ += cache.z * d_logits.transpose();
  cls_b_grad_ += d_logits.transpose();

  Vector d_z = cls_w_ * d_logits;

  const Eigen::Index n = cache.h2.rows();
  Matrix d_h2;
  if (cfg_.pooling == Pooling::Average) {
    d_h2 = Matrix::Ones(n, 1) * (d_z.transpose() / static_cast<double>(n));
  } else {
    d_h2 = Matrix::Zero(n, cache.h2.cols());
    for (Eigen::Index col = 0; col < cache.h2.cols(); ++col) {
      d_h2(cache.argmax[static_cast<std::size_t>(col)], col) = d_z(col);
    }
  }

  Matrix d_h1 = cheb_backward(layer2_, op, cache.l2, d_h2);
  cheb_backward(layer1_, op, cache.l1, d_h1);
}

void Model::zero_grads() {
  layer1_.zero_grads();
  layer2_.zero_grads();
  cls_w_grad_.setZero();
  cls_b_grad_.setZero();
}

std::vector<Matrix*> Model::parameters() {
  std::vector<Matrix*> ps;
  for (auto& w : layer1_.weights) ps.push_back(&w);
  for (auto& w : layer2_.weights) ps.push_back(&w);
  ps.push_back(&cls_w_);
  ps.push_back(&cls_b_);
  return ps;
}

std::vector<Matrix*> Model::gradients() {
  std::vector<Matrix*> gs;
  for (auto& g : layer1_.grads) gs.push_back(&g);
  for (auto& g : layer2_.grads) gs.push_back(&g);
  gs.push_back(&cls_w_grad_);
  gs.push_back(&cls_b_grad_);
  return gs;
}

std::vector<const Matrix*> Model::parameters() const {
  std::vector<const Matrix*> ps;
  for (const auto& w : layer1_.weights) ps.push_back(&w);
  for (const auto& w : layer2_.weights) ps.push_back(&w);
  ps.push_back(&cls_w_);
  ps.push_back(&cls_b_);
  return ps;
}

AdamState::AdamState(const std::vector<Matrix*>& params) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Matrix* p : params) {
    m_.push_back(Matrix::Zero(p->rows(), p->cols()));
    v_.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
}

void AdamState::step(const std::vector<Matrix*>& params, const std::vector<Matrix*>& grads,
                     const AdamConfig& cfg) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw std::invalid_argument("adam: parameter list does not match state");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& g = *grads[i];
    m_[i] = cfg.beta1 * m_[i] + (1.0 - cfg.beta1) * g;
    v_[i] = cfg.beta2 * v_[i] + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    const Matrix m_hat = m_[i] / c1;
    const Matrix v_hat = v_[i] / c2;
    params[i]->array() -= cfg.lr * m_hat.array() / (v_hat.array().sqrt() + cfg.eps);
  }
}

PreparedGraph prepare_subgraph(const AccountSubgraph& sub, WeightTransform transform,
                               double lambda_tol, int lambda_iters) {
  PreparedGraph pg;
  SparseMatrix l = normalized_laplacian(sub, transform);
  auto pi = lambda_max(l, lambda_tol, lambda_iters);
  pg.op = scale_operator(l, pi.value);
  pg.features = sub.features;
  pg.label = sub.label;
  return pg;
}

std::vector<PreparedGraph> prepare_dataset(const Dataset& ds) {
  const WeightTransform transform = default_transform(ds.strategy.weight_attribute);
  std::vector<PreparedGraph> out;
  out.reserve(ds.items.size());
  for (const auto& sub : ds.items) out.push_back(prepare_subgraph(sub, transform));
  return out;
}

namespace {

constexpr char kCheckpointMagic[9] = "PDGNNCK1";

void write_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) binio::write_f64(out, m(r, c));
  }
}

void read_matrix(std::istream& in, Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = binio::read_f64(in);
  }
}

}  // namespace

void save_checkpoint(const Model& m, std::ostream& out) {
  const auto& cfg = m.config();
  binio::write_magic(out, kCheckpointMagic);
  binio::write_u32(out, static_cast<std::uint32_t>(cfg.d_in));
  binio::write_u32(out, static_cast<std::uint32_t>(cfg.hidden));
  binio::write_u32(out, static_cast<std::uint32_t>(cfg.cheb_order));
  binio::write_u8(out, cfg.pooling == Pooling::Average ? 0 : 1);
  binio::write_u64(out, cfg.seed);
  for (const Matrix* p : m.parameters()) write_matrix(out, *p);
  if (!out) throw ConfigError("failed to write checkpoint");
}

Model load_checkpoint(std::istream& in) {
  binio::expect_magic(in, kCheckpointMagic, "checkpoint");
  ModelConfig cfg;
  cfg.d_in = static_cast<int>(binio::read_u32(in));
  cfg.hidden = static_cast<int>(binio::read_u32(in));
  cfg.cheb_order = static_cast<int>(binio::read_u32(in));
  cfg.pooling = binio::read_u8(in) == 0 ? Pooling::Average : Pooling::Max;
  cfg.seed = binio::read_u64(in);
  Model m = Model::init(cfg);
  for (Matrix* p : m.parameters()) read_matrix(in, *p);
  return m;
}

void save_checkpoint_file(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  save_checkpoint(m, out);
}

Model load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);
  return load_checkpoint(in);
}

}  // namespace pdgnn
