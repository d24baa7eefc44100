#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

namespace shepherd::ppo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Fully connected ReLU network whose weights live in an external flat
/// parameter vector starting at `offset`. Batches are column-major: one
/// sample per column.
class MlpLayout {
 public:
  MlpLayout() = default;
  /// sizes = {input, hidden..., output}.
  MlpLayout(std::vector<int> sizes, Eigen::Index offset);

  struct Tape {
    /// Input to every layer; the last entry is the (linear) output.
    std::vector<Matrix> inputs;
  };

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& sizes() const { return sizes_; }
  Eigen::Index offset() const { return offset_; }
  Eigen::Index parameter_count() const { return count_; }

  Eigen::Index weight_offset(int layer) const { return weight_offsets_[layer]; }
  Eigen::Index bias_offset(int layer) const { return bias_offsets_[layer]; }

  Matrix forward(const Vector& params, const Matrix& x, Tape* tape = nullptr) const;
  /// Accumulates d loss / d params into grad given d loss / d output.
  void backward(const Vector& params, const Tape& tape, const Matrix& grad_output,
                Vector& grad) const;

  /// Uniform fan-in initialization: W ~ U(-s, s), s = gain * sqrt(3 / fan_in),
  /// biases zero. Hidden layers use hidden_gain, the last layer output_gain.
  void initialize(Vector& params, std::mt19937_64& rng, double hidden_gain,
                  double output_gain) const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> weight_offsets_;
  std::vector<Eigen::Index> bias_offsets_;
  Eigen::Index offset_ = 0;
  Eigen::Index count_ = 0;
};

struct NetworkSpec {
  int observation_dim = 4;
  int action_dim = 2;
  std::vector<int> hidden = {64, 64, 64, 64};
  double action_bound = 3.0;
  double log_std_init = 0.0;
};

/// Actor-critic pair with a state-independent log standard deviation. The
/// actor mean is action_bound * tanh(raw), so it always lies strictly inside
/// the action box.
class PolicyNetwork {
 public:
  PolicyNetwork() = default;
  explicit PolicyNetwork(NetworkSpec spec);

  /// Random weights (seeded), log_std = spec.log_std_init.
  static PolicyNetwork initialized(NetworkSpec spec, std::uint64_t seed);

  const NetworkSpec& spec() const { return spec_; }
  const MlpLayout& actor() const { return actor_; }
  const MlpLayout& critic() const { return critic_; }
  Eigen::Index log_std_offset() const { return log_std_offset_; }
  Eigen::Index actor_parameter_count() const { return log_std_offset_ + spec_.action_dim; }

  Vector& parameters() { return params_; }
  const Vector& parameters() const { return params_; }
  Eigen::Index parameter_count() const { return params_.size(); }

  Vector log_std() const { return params_.segment(log_std_offset_, spec_.action_dim); }

  struct ActorOutput {
    Matrix mean;  // action_dim x batch
    Vector log_std;
  };
  ActorOutput actor_forward(const Matrix& obs, MlpLayout::Tape* tape = nullptr) const;
  /// Convenience for a single observation.
  ActorOutput actor_forward(const std::vector<double>& obs) const;

  Matrix value(const Matrix& obs, MlpLayout::Tape* tape = nullptr) const;

  /// Backprop d loss / d mean (after the tanh head) into grad.
  void actor_backward(const MlpLayout::Tape& tape, const Matrix& grad_mean, Vector& grad) const;
  void critic_backward(const MlpLayout::Tape& tape, const Matrix& grad_value, Vector& grad) const;

  /// Named tensors in checkpoint order: (name, rows, cols, offset). Tensor
  /// values are stored column-major in the flat vector.
  struct TensorView {
    std::string name;
    Eigen::Index rows;
    Eigen::Index cols;
    Eigen::Index offset;
  };
  std::vector<TensorView> tensors() const;

  bool operator==(const PolicyNetwork& other) const;

 private:
  NetworkSpec spec_;
  MlpLayout actor_;
  MlpLayout critic_;
  Eigen::Index log_std_offset_ = 0;
  Vector params_;
};

}  // namespace shepherd::ppo
