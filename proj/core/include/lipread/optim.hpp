#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lipread/layers.hpp"

namespace lipread::nn {

enum class OptimizerKind { adam, sgd };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& name);

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  /// Applies one update from the accumulated gradients.
  virtual void step(const std::vector<Parameter*>& params) = 0;
  virtual void set_learning_rate(double lr) = 0;
};

class Adam final : public Optimizer {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-7)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(const std::vector<Parameter*>& params) override;
  void set_learning_rate(double lr) override { lr_ = lr; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_count_ = 0;
  std::vector<std::vector<Scalar>> m_, v_;
};

/// Plain SGD with optional classical momentum.
class Sgd final : public Optimizer {
 public:
  explicit Sgd(double lr, double momentum = 0.0) : lr_(lr), momentum_(momentum) {}
  void step(const std::vector<Parameter*>& params) override;
  void set_learning_rate(double lr) override { lr_ = lr; }

 private:
  double lr_, momentum_;
  std::vector<std::vector<Scalar>> velocity_;
};

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double lr);

void zero_grad(const std::vector<Parameter*>& params);

}  // namespace lipread::nn
