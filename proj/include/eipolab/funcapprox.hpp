#ifndef EIPOLAB_FUNCAPPROX_HPP_
#define EIPOLAB_FUNCAPPROX_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "eipolab/checkpoint.hpp"
#include "eipolab/common.hpp"

namespace eipolab::funcapprox {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Parameters

struct TensorSlot {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
};

// Flat parameter storage with a stable per-tensor index map. Tensors are
// stored column-major at their slot offset.
class ParamVector {
 public:
  std::size_t add(std::string name, int rows, int cols);

  std::size_t size() const { return static_cast<std::size_t>(data_.size()); }
  const std::vector<TensorSlot>& slots() const { return slots_; }
  const TensorSlot& slot(std::size_t i) const { return slots_.at(i); }

  Eigen::Map<Matrix> tensor(std::size_t i);
  Eigen::Map<const Matrix> tensor(std::size_t i) const;

  Vector& flat() { return data_; }
  const Vector& flat() const { return data_; }

  std::vector<double> flatten() const;
  // Throws UsageError on a length mismatch.
  void unflatten(std::span<const double> values);

  // Hash of slot names and shapes; stored in checkpoint headers.
  std::uint64_t architecture_hash() const;

 private:
  std::vector<TensorSlot> slots_;
  Vector data_;
};

// ---------------------------------------------------------------------------
// Reverse-mode tape over dense matrices

class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  double scalar() const { return value()(0, 0); }
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  Var constant(Matrix value);
  // Leaf bound to one tensor of a parameter vector. Repeated requests for
  // the same tensor return the same leaf.
  Var param(const ParamVector& params, std::size_t slot);

  // Record a named component; reported if the loss turns out non-finite.
  void tag(Var v, std::string name);

  // Seeds d(root)/d(root) = 1 and propagates to every node.
  void backward(Var root);

  // Gradient of the last backward() root w.r.t. every tensor of params,
  // flattened in ParamVector order. Tensors not touched are zero.
  Vector param_grad(const ParamVector& params) const;

  // Names of tagged components holding non-finite values.
  std::vector<std::string> non_finite_tags() const;

  // Internal API used by the op implementations.
  Var push(Matrix value, std::vector<int> inputs, Backward backward);
  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  Matrix& grad(int id);
  const std::vector<int>& inputs(int id) const { return nodes_[static_cast<std::size_t>(id)].inputs; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<int> inputs;
    Backward backward;
    const ParamVector* owner = nullptr;
    std::size_t slot = 0;
  };
  std::vector<Node> nodes_;
  std::vector<std::pair<int, std::string>> tags_;
};

// Differentiable primitives. Shapes follow Eigen: rows are batch samples.
Var matmul(Var a, Var b);
Var add_bias(Var x, Var bias);  // x: N x K, bias: K x 1 (broadcast over rows)
Var tanh(Var x);
Var relu(Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);          // elementwise
Var scale(Var a, double s);
Var exp(Var a);
Var square(Var a);
Var minimum(Var a, Var b);      // elementwise; ties route gradient to a
Var clip(Var a, double lo, double hi);  // zero gradient outside [lo, hi]
Var log_softmax(Var logits);    // row-wise
Var pick(Var x, std::span<const int> cols);  // N x K -> N x 1, x(i, cols[i])
Var row_sum(Var x);             // N x K -> N x 1
Var mean(Var x);                // -> 1 x 1
Var sum(Var x);                 // -> 1 x 1
Var dot_flat(Var a, const Matrix& b);  // sum(a .* b) -> 1 x 1
// Row-wise Shannon entropy of softmax(logits): N x K -> N x 1.
Var entropy(Var logits);

// Evaluates loss_fn on a fresh tape and returns (loss, dloss/dparams).
// Throws NumericError naming offending tagged components if the loss is
// not finite.
struct ValueAndGrad {
  double value = 0.0;
  Vector grad;
};
using LossFn = std::function<Var(Tape&, const ParamVector&)>;
ValueAndGrad value_and_grad(const LossFn& loss_fn, const ParamVector& params);

// Central finite differences of loss_fn w.r.t. params (test oracle helper).
Vector finite_difference_grad(const LossFn& loss_fn, ParamVector params,
                              double h = 1e-5);

// ---------------------------------------------------------------------------
// Networks

enum class Activation { kIdentity, kTanh, kRelu };

// Tape-free dense layer: x * w + bias (broadcast). Shared by the taped and
// inference paths so both produce bit-identical activations.
Matrix dense(const Matrix& x, const Eigen::Map<const Matrix>& w,
             const Eigen::Map<const Matrix>& bias);
Matrix activate(const Matrix& x, Activation act);

// Row-wise log-softmax (tape-free).
Matrix log_softmax_rows(const Matrix& logits);

class Mlp {
 public:
  Mlp() = default;
  Mlp(ParamVector& params, const std::string& prefix, std::vector<int> sizes,
      Activation hidden, Activation output);

  // Orthogonal init with the given gains; biases zero. An output gain of 0
  // zero-initializes the final layer.
  void init(ParamVector& params, Rng& rng, double hidden_gain,
            double output_gain) const;

  Var forward(Tape& tape, const ParamVector& params, Var x) const;
  Matrix forward(const ParamVector& params, const Matrix& x) const;

  int in_dim() const { return sizes_.front(); }
  int out_dim() const { return sizes_.back(); }

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> weight_slots_;
  std::vector<std::size_t> bias_slots_;
  Activation hidden_ = Activation::kTanh;
  Activation output_ = Activation::kIdentity;
};

// Fills m with an orthogonal (semi-orthogonal for non-square) matrix scaled
// by gain.
void orthogonal_init(Eigen::Map<Matrix> m, Rng& rng, double gain);

struct PolicyOutputs {
  Matrix logits_e;
  Matrix logits_ei;
  Matrix v_e;   // N x 1
  Matrix v_ei;  // N x 1
};

struct PolicyVars {
  Var logits_e;
  Var logits_ei;
  Var v_e;
  Var v_ei;
};

// Shared tanh backbone feeding two policy heads (extrinsic, mixed) and two
// value heads. Policy heads start at zero so both policies start uniform and
// identical.
class PolicyPair {
 public:
  static constexpr int kDefaultHidden = 64;

  PolicyPair(int obs_dim, int num_actions, std::uint64_t init_seed,
             int hidden = kDefaultHidden);

  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }
  int obs_dim() const { return obs_dim_; }
  int num_actions() const { return num_actions_; }

  // Throws UsageError when obs.cols() != obs_dim().
  PolicyOutputs forward(const Matrix& obs) const;
  PolicyVars forward(Tape& tape, const ParamVector& params, Var obs) const;

  // Slot ranges of each component, for interference tests.
  enum class Part { kBackbone, kPiE, kPiEI, kVE, kVEI };
  std::vector<std::size_t> slots_of(Part part) const;

 private:
  void check_dim(long cols) const;

  int obs_dim_;
  int num_actions_;
  ParamVector params_;
  Mlp backbone_;
  Mlp pi_e_;
  Mlp pi_ei_;
  Mlp v_e_;
  Mlp v_ei_;
};

// Shannon entropy of softmax(logits) for one logit vector.
double entropy_bonus(std::span<const double> logits);

// ---------------------------------------------------------------------------
// Optimizer

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double max_grad_norm = 1.0;  // <= 0 disables clipping
};

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, AdamConfig config);

  // Clips the global gradient norm, then applies one bias-corrected
  // adaptive-moment update. Returns the pre-clip norm. Throws NumericError
  // on non-finite gradients and UsageError on shape mismatch.
  double step(ParamVector& params, const Vector& grad);

  std::uint64_t steps() const { return step_; }
  const AdamConfig& config() const { return config_; }
  const Vector& first_moment() const { return m_; }
  const Vector& second_moment() const { return v_; }

  void save(ByteWriter& w) const;
  void load(ByteReader& r);

 private:
  AdamConfig config_;
  Vector m_;
  Vector v_;
  std::uint64_t step_ = 0;
};

// Serializes / restores a parameter vector with its layout hash.
void save_params(ByteWriter& w, const ParamVector& params);
void load_params(ByteReader& r, ParamVector& params);

}  // namespace eipolab::funcapprox

#endif  // EIPOLAB_FUNCAPPROX_HPP_
