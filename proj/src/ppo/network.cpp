#include "shepherd/ppo/network.hpp"

#include <cmath>
#include <stdexcept>

namespace shepherd::ppo {

MlpLayout::MlpLayout(std::vector<int> sizes, Eigen::Index offset)
    : sizes_(std::move(sizes)), offset_(offset) {
  if (sizes_.size() < 2) throw std::invalid_argument("MlpLayout: need input and output sizes");
  Eigen::Index cursor = offset_;
  for (int l = 0; l < num_layers(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1)
      throw std::invalid_argument("MlpLayout: layer sizes must be positive");
    weight_offsets_.push_back(cursor);
    cursor += static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l];
    bias_offsets_.push_back(cursor);
    cursor += sizes_[l + 1];
  }
  count_ = cursor - offset_;
}

Matrix MlpLayout::forward(const Vector& params, const Matrix& x, Tape* tape) const {
  if (x.rows() != input_dim()) throw std::invalid_argument("MlpLayout: input dimension mismatch");
  if (tape) {
    tape->inputs.clear();
    tape->inputs.reserve(num_layers() + 1);
    tape->inputs.push_back(x);
  }
  Matrix h = x;
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::Map<const Matrix> W(params.data() + weight_offsets_[l], sizes_[l + 1], sizes_[l]);
    Eigen::Map<const Vector> b(params.data() + bias_offsets_[l], sizes_[l + 1]);
    Matrix z = W * h;
    z.colwise() += b;
    if (l + 1 < num_layers()) z = z.cwiseMax(0.0);
    if (tape) tape->inputs.push_back(z);
    h = std::move(z);
  }
  return h;
}

void MlpLayout::backward(const Vector& params, const Tape& tape, const Matrix& grad_output,
                         Vector& grad) const {
  Matrix g = grad_output;
  for (int l = num_layers() - 1; l >= 0; --l) {
    Eigen::Map<const Matrix> W(params.data() + weight_offsets_[l], sizes_[l + 1], sizes_[l]);
    Eigen::Map<Matrix> dW(grad.data() + weight_offsets_[l], sizes_[l + 1], sizes_[l]);
    Eigen::Map<Vector> db(grad.data() + bias_offsets_[l], sizes_[l + 1]);
    const Matrix& input = tape.inputs[l];
    dW.noalias() += g * input.transpose();
    db += g.rowwise().sum();
    if (l == 0) break;
    Matrix back = W.transpose() * g;
    // input = relu(z) > 0 exactly where z > 0.
    g = back.cwiseProduct((input.array() > 0.0).cast<double>().matrix());
  }
}

void MlpLayout::initialize(Vector& params, std::mt19937_64& rng, double hidden_gain,
                           double output_gain) const {
  for (int l = 0; l < num_layers(); ++l) {
    const double gain = (l + 1 == num_layers()) ? output_gain : hidden_gain;
    const double s = gain * std::sqrt(3.0 / sizes_[l]);
    std::uniform_real_distribution<double> uniform(-s, s);
    const Eigen::Index nw = static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l];
    for (Eigen::Index k = 0; k < nw; ++k) params[weight_offsets_[l] + k] = uniform(rng);
    params.segment(bias_offsets_[l], sizes_[l + 1]).setZero();
  }
}

PolicyNetwork::PolicyNetwork(NetworkSpec spec) : spec_(std::move(spec)) {
  if (spec_.observation_dim < 1 || spec_.action_dim < 1)
    throw std::invalid_argument("PolicyNetwork: dimensions must be positive");
  if (!(spec_.action_bound > 0.0))
    throw std::invalid_argument("PolicyNetwork: action bound must be positive");
  std::vector<int> actor_sizes{spec_.observation_dim};
  actor_sizes.insert(actor_sizes.end(), spec_.hidden.begin(), spec_.hidden.end());
  std::vector<int> critic_sizes = actor_sizes;
  actor_sizes.push_back(spec_.action_dim);
  critic_sizes.push_back(1);

  actor_ = MlpLayout(actor_sizes, 0);
  log_std_offset_ = actor_.parameter_count();
  critic_ = MlpLayout(critic_sizes, log_std_offset_ + spec_.action_dim);
  params_ = Vector::Zero(critic_.offset() + critic_.parameter_count());
  params_.segment(log_std_offset_, spec_.action_dim).setConstant(spec_.log_std_init);
}

PolicyNetwork PolicyNetwork::initialized(NetworkSpec spec, std::uint64_t seed) {
  PolicyNetwork net(std::move(spec));
  std::mt19937_64 rng(seed);
  const double relu_gain = std::sqrt(2.0);
  net.actor_.initialize(net.params_, rng, relu_gain, 0.01);
  net.critic_.initialize(net.params_, rng, relu_gain, 1.0);
  return net;
}

PolicyNetwork::ActorOutput PolicyNetwork::actor_forward(const Matrix& obs,
                                                        MlpLayout::Tape* tape) const {
  Matrix raw = actor_.forward(params_, obs, tape);
  return {spec_.action_bound * raw.array().tanh().matrix(), log_std()};
}

PolicyNetwork::ActorOutput PolicyNetwork::actor_forward(const std::vector<double>& obs) const {
  if (static_cast<int>(obs.size()) != spec_.observation_dim)
    throw std::invalid_argument("actor_forward: observation dimension mismatch");
  Eigen::Map<const Vector> x(obs.data(), spec_.observation_dim);
  return actor_forward(Matrix(x));
}

Matrix PolicyNetwork::value(const Matrix& obs, MlpLayout::Tape* tape) const {
  return critic_.forward(params_, obs, tape);
}

void PolicyNetwork::actor_backward(const MlpLayout::Tape& tape, const Matrix& grad_mean,
                                   Vector& grad) const {
  const Matrix& raw = tape.inputs.back();
  const Matrix t = raw.array().tanh().matrix();
  const Matrix grad_raw =
      grad_mean.cwiseProduct((spec_.action_bound * (1.0 - t.array().square())).matrix());
  actor_.backward(params_, tape, grad_raw, grad);
}

void PolicyNetwork::critic_backward(const MlpLayout::Tape& tape, const Matrix& grad_value,
                                    Vector& grad) const {
  critic_.backward(params_, tape, grad_value, grad);
}

std::vector<PolicyNetwork::TensorView> PolicyNetwork::tensors() const {
  std::vector<TensorView> out;
  auto add_mlp = [&out](const std::string& prefix, const MlpLayout& mlp) {
    for (int l = 0; l < mlp.num_layers(); ++l) {
      const auto& s = mlp.sizes();
      out.push_back({prefix + "." + std::to_string(l) + ".weight", s[l + 1], s[l],
                     mlp.weight_offset(l)});
      out.push_back({prefix + "." + std::to_string(l) + ".bias", s[l + 1], 1, mlp.bias_offset(l)});
    }
  };
  add_mlp("actor", actor_);
  out.push_back({"actor.log_std", spec_.action_dim, 1, log_std_offset_});
  add_mlp("critic", critic_);
  return out;
}

bool PolicyNetwork::operator==(const PolicyNetwork& other) const {
  return spec_.observation_dim == other.spec_.observation_dim &&
         spec_.action_dim == other.spec_.action_dim && spec_.hidden == other.spec_.hidden &&
         spec_.action_bound == other.spec_.action_bound && params_.size() == other.params_.size() &&
         params_ == other.params_;
}

}  // namespace shepherd::ppo
