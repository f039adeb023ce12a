#pragma once

// Central finite differences against the analytic backward pass.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lipread/layers.hpp"

namespace oracle {

struct GradSample {
  std::size_t param = 0, index = 0;
  double analytic = 0, numeric = 0, rel_error = 0;
};

struct GradCheck {
  std::vector<GradSample> samples;
  double max_rel_error = 0;
};

inline double rel_error(double a, double n) {
  const double scale = std::max({std::abs(a), std::abs(n), 1e-7});
  return std::abs(a - n) / scale;
}

/// Moves every parameter by N(0, sigma). Freshly built networks have zero
/// biases, which parks units whose inputs are all zero exactly on the ReLU
/// kink where finite differences see half the slope.
inline void jitter_parameters(lipread::nn::Layer& net, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto* p : net.parameters())
    for (auto& v : p->value.values()) v += noise(rng);
}

/// Loss is mean softmax cross-entropy; dropout masks are pinned by reseeding
/// before every forward pass.
inline GradCheck gradient_check(lipread::nn::Layer& net, const lipread::nn::Tensor& x, const std::vector<int>& labels,
                                int count, std::uint64_t seed, double eps = 1e-6) {
  using lipread::nn::softmax_cross_entropy;
  const std::uint64_t mask_seed = seed ^ 0x9e3779b97f4a7c15ULL;
  auto params = net.parameters();
  const auto loss = [&] {
    net.reseed(mask_seed);
    return softmax_cross_entropy(net.forward(x), labels, nullptr);
  };

  for (auto* p : params) p->grad.fill(0.0);
  net.reseed(mask_seed);
  lipread::nn::Tensor g;
  softmax_cross_entropy(net.forward(x), labels, &g);
  net.backward(g);

  std::size_t total = 0;
  for (auto* p : params) total += p->value.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);

  GradCheck out;
  for (int k = 0; k < count; ++k) {
    std::size_t flat = pick(rng), pi = 0;
    while (flat >= params[pi]->value.size()) flat -= params[pi++]->value.size();
    auto& v = params[pi]->value[flat];
    const double saved = v;
    v = saved + eps;
    const double up = loss();
    v = saved - eps;
    const double down = loss();
    v = saved;
    GradSample s{pi, flat, params[pi]->grad[flat], (up - down) / (2 * eps), 0};
    s.rel_error = rel_error(s.analytic, s.numeric);
    out.max_rel_error = std::max(out.max_rel_error, s.rel_error);
    out.samples.push_back(s);
  }
  return out;
}

}  // namespace oracle
