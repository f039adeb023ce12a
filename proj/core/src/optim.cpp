#include "lipread/optim.hpp"

#include <cmath>

#include "lipread/errors.hpp"

namespace lipread::nn {

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  throw InvalidArgument("unknown optimizer '" + name + "'");
}

void Adam::step(const std::vector<Parameter*>& params) {
  if (m_.size() != params.size()) {
    m_.clear();
    v_.clear();
    for (const auto* p : params) {
      m_.emplace_back(p->value.size(), 0.0);
      v_.emplace_back(p->value.size(), 0.0);
    }
  }
  ++step_count_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  const double alpha = lr_ * std::sqrt(c2) / c1;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const Scalar g = p.grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      p.value[i] -= alpha * m[i] / (std::sqrt(v[i]) + eps_ * std::sqrt(c2));
    }
  }
}

void Sgd::step(const std::vector<Parameter*>& params) {
  if (velocity_.size() != params.size()) {
    velocity_.clear();
    for (const auto* p : params) velocity_.emplace_back(p->value.size(), 0.0);
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    auto& vel = velocity_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      vel[i] = momentum_ * vel[i] - lr_ * p.grad[i];
      p.value[i] += vel[i];
    }
  }
}

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double lr) {
  if (kind == OptimizerKind::adam) return std::make_unique<Adam>(lr);
  return std::make_unique<Sgd>(lr, 0.9);
}

void zero_grad(const std::vector<Parameter*>& params) {
  for (auto* p : params) p->grad.fill(0.0);
}

}  // namespace lipread::nn
