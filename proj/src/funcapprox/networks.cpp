#include <cmath>
#include <random>

#include "eipolab/funcapprox.hpp"

namespace eipolab::funcapprox {

// --- ParamVector -------------------------------------------------------------

std::size_t ParamVector::add(std::string name, int rows, int cols) {
  TensorSlot s{std::move(name), rows, cols, size()};
  const auto n = static_cast<Eigen::Index>(rows) * cols;
  Vector grown = Vector::Zero(data_.size() + n);
  grown.head(data_.size()) = data_;
  data_ = std::move(grown);
  slots_.push_back(std::move(s));
  return slots_.size() - 1;
}

Eigen::Map<Matrix> ParamVector::tensor(std::size_t i) {
  const auto& s = slots_.at(i);
  return {data_.data() + s.offset, s.rows, s.cols};
}

Eigen::Map<const Matrix> ParamVector::tensor(std::size_t i) const {
  const auto& s = slots_.at(i);
  return {data_.data() + s.offset, s.rows, s.cols};
}

std::vector<double> ParamVector::flatten() const {
  return {data_.data(), data_.data() + data_.size()};
}

void ParamVector::unflatten(std::span<const double> values) {
  if (values.size() != size()) {
    throw UsageError("unflatten: expected " + std::to_string(size()) +
                     " values, got " + std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) data_(static_cast<Eigen::Index>(i)) = values[i];
}

std::uint64_t ParamVector::architecture_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& s : slots_) {
    for (char c : s.name) feed(static_cast<unsigned char>(c));
    feed(static_cast<std::uint64_t>(s.rows));
    feed(static_cast<std::uint64_t>(s.cols));
  }
  return h;
}

void save_params(ByteWriter& w, const ParamVector& params) {
  w.u64(params.architecture_hash());
  w.f64s({params.flat().data(), params.size()});
}

void load_params(ByteReader& r, ParamVector& params) {
  if (r.u64() != params.architecture_hash()) {
    throw ConfigError("checkpoint architecture hash does not match network");
  }
  r.f64s_into({params.flat().data(), params.size()});
}

// --- layers -----------------------------------------------------------------

Matrix dense(const Matrix& x, const Eigen::Map<const Matrix>& w,
             const Eigen::Map<const Matrix>& bias) {
  Matrix out = x * w;
  out.rowwise() += bias.col(0).transpose();
  return out;
}

Matrix activate(const Matrix& x, Activation act) {
  switch (act) {
    case Activation::kTanh: return x.array().tanh().matrix();
    case Activation::kRelu: return x.cwiseMax(0.0);
    case Activation::kIdentity: return x;
  }
  return x;
}

namespace {

Var activate(Var x, Activation act) {
  switch (act) {
    case Activation::kTanh: return tanh(x);
    case Activation::kRelu: return relu(x);
    case Activation::kIdentity: return x;
  }
  return x;
}

}  // namespace

void orthogonal_init(Eigen::Map<Matrix> m, Rng& rng, double gain) {
  if (gain == 0.0) {
    m.setZero();
    return;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool transposed = m.rows() < m.cols();
  Matrix a(transposed ? m.cols() : m.rows(), transposed ? m.rows() : m.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  const Vector d = qr.matrixQR().diagonal();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (d(j) < 0.0) q.col(j) *= -1.0;
  }
  if (transposed) {
    m = gain * q.transpose();
  } else {
    m = gain * q;
  }
}

Mlp::Mlp(ParamVector& params, const std::string& prefix, std::vector<int> sizes,
         Activation hidden, Activation output)
    : sizes_(std::move(sizes)), hidden_(hidden), output_(output) {
  if (sizes_.size() < 2) throw UsageError("Mlp needs at least two sizes");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const std::string tag = prefix + "." + std::to_string(l);
    weight_slots_.push_back(params.add(tag + ".w", sizes_[l], sizes_[l + 1]));
    bias_slots_.push_back(params.add(tag + ".b", sizes_[l + 1], 1));
  }
}

void Mlp::init(ParamVector& params, Rng& rng, double hidden_gain,
               double output_gain) const {
  for (std::size_t l = 0; l < weight_slots_.size(); ++l) {
    const bool last = l + 1 == weight_slots_.size();
    orthogonal_init(params.tensor(weight_slots_[l]), rng,
                    last ? output_gain : hidden_gain);
    params.tensor(bias_slots_[l]).setZero();
  }
}

Var Mlp::forward(Tape& tape, const ParamVector& params, Var x) const {
  for (std::size_t l = 0; l < weight_slots_.size(); ++l) {
    const bool last = l + 1 == weight_slots_.size();
    x = add_bias(matmul(x, tape.param(params, weight_slots_[l])),
                 tape.param(params, bias_slots_[l]));
    x = activate(x, last ? output_ : hidden_);
  }
  return x;
}

Matrix Mlp::forward(const ParamVector& params, const Matrix& x) const {
  Matrix h = x;
  for (std::size_t l = 0; l < weight_slots_.size(); ++l) {
    const bool last = l + 1 == weight_slots_.size();
    h = activate(dense(h, params.tensor(weight_slots_[l]), params.tensor(bias_slots_[l])),
                 last ? output_ : hidden_);
  }
  return h;
}

// --- PolicyPair -------------------------------------------------------------

PolicyPair::PolicyPair(int obs_dim, int num_actions, std::uint64_t init_seed,
                       int hidden)
    : obs_dim_(obs_dim), num_actions_(num_actions) {
  backbone_ = Mlp(params_, "backbone", {obs_dim, hidden, hidden},
                  Activation::kTanh, Activation::kTanh);
  pi_e_ = Mlp(params_, "pi_e", {hidden, num_actions}, Activation::kIdentity,
              Activation::kIdentity);
  pi_ei_ = Mlp(params_, "pi_ei", {hidden, num_actions}, Activation::kIdentity,
               Activation::kIdentity);
  v_e_ = Mlp(params_, "v_e", {hidden, 1}, Activation::kIdentity,
             Activation::kIdentity);
  v_ei_ = Mlp(params_, "v_ei", {hidden, 1}, Activation::kIdentity,
              Activation::kIdentity);
  Rng rng(init_seed);
  const double root2 = std::sqrt(2.0);
  backbone_.init(params_, rng, root2, root2);
  pi_e_.init(params_, rng, 0.0, 0.0);
  pi_ei_.init(params_, rng, 0.0, 0.0);
  v_e_.init(params_, rng, 1.0, 1.0);
  v_ei_.init(params_, rng, 1.0, 1.0);
}

void PolicyPair::check_dim(long cols) const {
  if (cols != obs_dim_) {
    throw UsageError("observation width " + std::to_string(cols) +
                     " does not match network input " + std::to_string(obs_dim_));
  }
}

PolicyOutputs PolicyPair::forward(const Matrix& obs) const {
  check_dim(obs.cols());
  const Matrix h = backbone_.forward(params_, obs);
  return {pi_e_.forward(params_, h), pi_ei_.forward(params_, h),
          v_e_.forward(params_, h), v_ei_.forward(params_, h)};
}

PolicyVars PolicyPair::forward(Tape& tape, const ParamVector& params,
                               Var obs) const {
  check_dim(obs.value().cols());
  Var h = backbone_.forward(tape, params, obs);
  return {pi_e_.forward(tape, params, h), pi_ei_.forward(tape, params, h),
          v_e_.forward(tape, params, h), v_ei_.forward(tape, params, h)};
}

std::vector<std::size_t> PolicyPair::slots_of(Part part) const {
  const char* prefix = "";
  switch (part) {
    case Part::kBackbone: prefix = "backbone."; break;
    case Part::kPiE: prefix = "pi_e."; break;
    case Part::kPiEI: prefix = "pi_ei."; break;
    case Part::kVE: prefix = "v_e."; break;
    case Part::kVEI: prefix = "v_ei."; break;
  }
  std::vector<std::size_t> out;
  const std::string p(prefix);
  for (std::size_t i = 0; i < params_.slots().size(); ++i) {
    if (params_.slot(i).name.starts_with(p)) out.push_back(i);
  }
  return out;
}

double entropy_bonus(std::span<const double> logits) {
  double mx = -INFINITY;
  for (double z : logits) mx = std::max(mx, z);
  double s = 0.0;
  for (double z : logits) s += std::exp(z - mx);
  const double lse = mx + std::log(s);
  double h = 0.0;
  for (double z : logits) {
    const double lp = z - lse;
    const double p = std::exp(lp);
    if (p > 0.0) h -= p * lp;
  }
  return h;
}

// --- Adam -------------------------------------------------------------------

Adam::Adam(std::size_t size, AdamConfig config)
    : config_(config),
      m_(Vector::Zero(static_cast<Eigen::Index>(size))),
      v_(Vector::Zero(static_cast<Eigen::Index>(size))) {}

double Adam::step(ParamVector& params, const Vector& grad) {
  if (grad.size() != m_.size() || params.flat().size() != m_.size()) {
    throw UsageError("optimizer shape mismatch");
  }
  if (!grad.allFinite()) throw NumericError("non-finite gradient");
  const double norm = grad.norm();
  const double c = (config_.max_grad_norm > 0.0 && norm > config_.max_grad_norm)
                       ? config_.max_grad_norm / norm
                       : 1.0;
  ++step_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(config_.beta1, t);
  const double bc2 = 1.0 - std::pow(config_.beta2, t);
  auto& p = params.flat();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double g = grad(i) * c;
    m_(i) = config_.beta1 * m_(i) + (1.0 - config_.beta1) * g;
    v_(i) = config_.beta2 * v_(i) + (1.0 - config_.beta2) * g * g;
    const double mhat = m_(i) / bc1;
    const double vhat = v_(i) / bc2;
    p(i) -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
  }
  return norm;
}

void Adam::save(ByteWriter& w) const {
  w.u64(step_);
  w.f64s({m_.data(), static_cast<std::size_t>(m_.size())});
  w.f64s({v_.data(), static_cast<std::size_t>(v_.size())});
}

void Adam::load(ByteReader& r) {
  step_ = r.u64();
  r.f64s_into({m_.data(), static_cast<std::size_t>(m_.size())});
  r.f64s_into({v_.data(), static_cast<std::size_t>(v_.size())});
}

}  // namespace eipolab::funcapprox
