#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pdgnn/sampler.hpp"

namespace pdgnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// CSR sparse matrix for graph operators. Triplets are deduplicated and rows
// hold ascending column indices, so products are evaluated in a fixed order.
struct SparseMatrix {
  int n = 0;
  std::vector<int> row_ptr;  // size n+1
  std::vector<int> col;
  std::vector<double> val;

  static SparseMatrix from_triplets(int n, std::vector<std::tuple<int, int, double>> triplets);

  // this * x
  Matrix apply(const Matrix& x) const;
  Matrix dense() const;
};

enum class WeightTransform { Raw, Log1p };

// Log-compress raw amount weights; transaction counts stay as-is.
WeightTransform default_transform(EdgeAttribute weight_attribute);

// L = I - D^{-1/2} W~ D^{-1/2} with W~ the symmetrized (W + W^T) weighted
// adjacency of the subgraph. Zero-degree nodes keep a unit diagonal. Throws
// on a negative edge weight.
SparseMatrix normalized_laplacian(const AccountSubgraph& sub,
                                  WeightTransform transform = WeightTransform::Raw);

struct PowerIterationResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Dominant eigenvalue of a symmetric PSD matrix by power iteration from a
// fixed pseudo-random start vector. Returns the best Rayleigh-quotient
// estimate, flagged unconverged after max_iters instead of aborting.
PowerIterationResult lambda_max(const SparseMatrix& l, double tol = 1e-8, int max_iters = 1000);

struct ScaledOperator {
  SparseMatrix op;          // 2 L / lambda - I, spectrum in [-1, 1]
  double lambda = 2.0;
  bool lambda_substituted = false;  // set when lambda <= 0 forced the 2.0 fallback
};

ScaledOperator scale_operator(const SparseMatrix& l, double lambda);

// One Chebyshev convolution: H = ReLU(sum_k T_k(L~) X W_k). Holds the K
// order weights and matching gradient buffers.
struct ChebLayer {
  int d_in = 0;
  int d_out = 0;
  std::vector<Matrix> weights;
  std::vector<Matrix> grads;

  int order() const { return static_cast<int>(weights.size()); }
  void zero_grads();
};

struct LayerCache {
  std::vector<Matrix> t;  // T_k(L~) X for every order
  Matrix pre;             // pre-activation
};

// Recursion-based forward: T_0 = I, T_1 = L~, T_k = 2 L~ T_{k-1} - T_{k-2},
// applied to X column blocks without materializing any dense T_k.
Matrix cheb_forward(const ChebLayer& layer, const ScaledOperator& op, const Matrix& x,
                    LayerCache* cache = nullptr);

// Accumulates dL/dW_k into layer.grads and returns dL/dX. Uses the symmetry
// of T_k(L~) to push gradients back through the same recursion.
Matrix cheb_backward(ChebLayer& layer, const ScaledOperator& op, const LayerCache& cache,
                     const Matrix& d_out);

enum class Pooling { Average, Max };

// Columnwise mean or max readout. `argmax` (max mode) records the winning
// row per column for the backward pass. Throws on an empty input.
Vector pool(const Matrix& h, Pooling mode, std::vector<Eigen::Index>* argmax = nullptr);

// Numerically stable softmax (max-subtraction).
Vector softmax(const Vector& logits);

// softmax(W^T z + b): probability vector [p_normal, p_phishing].
// w is hidden x 2, b is 1 x 2.
Eigen::Vector2d classify(const Vector& z, const Matrix& w, const Matrix& b);

// Binary cross-entropy on the phishing-class probability, clamped to
// [eps, 1-eps] with eps = 1e-12.
double cross_entropy(double p_pos, int label);

struct ModelConfig {
  int d_in = kFeatureDim;
  int hidden = 128;
  int cheb_order = 3;
  Pooling pooling = Pooling::Average;
  std::uint64_t seed = 0;
};

struct ModelCache {
  LayerCache l1;
  LayerCache l2;
  Matrix h1;
  Matrix h2;
  Vector z;
  std::vector<Eigen::Index> argmax;
  Eigen::Vector2d logits;
  Eigen::Vector2d probs;
  bool valid = false;
};

// Two Chebyshev layers, a pooling readout and a linear softmax classifier.
class Model {
public:
  Model() = default;

  // Weights uniform in +-sqrt(6/(d_in+d_out)) per matrix, biases zero; fill
  // order is fixed so a seed pins every parameter.
  static Model init(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }

  // Probability vector [p_normal, p_phishing] for one prepared subgraph.
  Eigen::Vector2d forward(const ScaledOperator& op, const Matrix& x,
                          ModelCache* cache = nullptr) const;

  // Accumulates gradients of `scale` * cross_entropy(item) into the gradient
  // buffers. Requires a cache produced by forward; throws otherwise.
  void backward(const ScaledOperator& op, const ModelCache& cache, int label, double scale);

  void zero_grads();

  // Aligned parameter / gradient views, fixed order: layer1 W_k..., layer2
  // W_k..., classifier W, classifier b.
  std::vector<Matrix*> parameters();
  std::vector<Matrix*> gradients();
  std::vector<const Matrix*> parameters() const;

  ChebLayer& layer1() { return layer1_; }
  ChebLayer& layer2() { return layer2_; }
  const ChebLayer& layer1() const { return layer1_; }
  const ChebLayer& layer2() const { return layer2_; }
  Matrix& classifier_w() { return cls_w_; }
  Matrix& classifier_b() { return cls_b_; }
  const Matrix& classifier_w() const { return cls_w_; }
  const Matrix& classifier_b() const { return cls_b_; }

private:
  ModelConfig cfg_;
  ChebLayer layer1_;
  ChebLayer layer2_;
  Matrix cls_w_;  // hidden x 2
  Matrix cls_b_;  // 1 x 2
  Matrix cls_w_grad_;
  Matrix cls_b_grad_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over an aligned parameter/gradient list.
class AdamState {
public:
  explicit AdamState(const std::vector<Matrix*>& params);

  void step(const std::vector<Matrix*>& params, const std::vector<Matrix*>& grads,
            const AdamConfig& cfg = {});

  long step_count() const { return t_; }

private:
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
};

// Subgraph with its spectral operator and feature matrix precomputed; the
// operator is fixed per subgraph, so this happens once, not per epoch.
struct PreparedGraph {
  ScaledOperator op;
  Matrix features;
  int label = 0;
};

PreparedGraph prepare_subgraph(const AccountSubgraph& sub, WeightTransform transform,
                               double lambda_tol = 1e-12, int lambda_iters = 10000);
std::vector<PreparedGraph> prepare_dataset(const Dataset& ds);

// Checkpoint: header (dims, order, pooling, seed) + raw parameter doubles.
// Loading reproduces bit-identical inference.
void save_checkpoint(const Model& m, std::ostream& out);
Model load_checkpoint(std::istream& in);
void save_checkpoint_file(const Model& m, const std::string& path);
Model load_checkpoint_file(const std::string& path);

}  // namespace pdgnn
