#pragma once

#include <span>
#include <vector>

#include "uavsim/rng.hpp"

namespace uavsim {

using Tensor = std::vector<double>;

// Fully-connected net, tanh hidden activations, linear output. Parameters
// are stored as an ordered tensor list (w0, b0, w1, b1, ...) so the same
// optimizer path handles nets and standalone tensors alike; weights are
// row-major [out][in].
struct Mlp {
  std::vector<int> sizes;
  std::vector<Tensor> params;

  int n_layers() const { return static_cast<int>(sizes.size()) - 1; }
  int input_size() const { return sizes.front(); }
  int output_size() const { return sizes.back(); }
  Tensor& w(int layer) { return params[2 * layer]; }
  Tensor& b(int layer) { return params[2 * layer + 1]; }
  const Tensor& w(int layer) const { return params[2 * layer]; }
  const Tensor& b(int layer) const { return params[2 * layer + 1]; }
};

// Orthogonal-style init (Gram-Schmidt over Gaussian rows), gain sqrt(2) on
// hidden layers and `final_gain` on the output layer; biases zero.
Mlp make_mlp(const std::vector<int>& sizes, Rng& rng, double final_gain = 1.0);

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input);

// Post-activation values per layer, kept for the backward pass.
struct MlpActivations {
  std::vector<Tensor> post;  // post[l] is the output of layer l
};

std::vector<double> mlp_forward_cached(const Mlp& net,
                                       std::span<const double> input,
                                       MlpActivations& acts);

// Reverse-mode gradients of the forward map; accumulates into `grads`,
// which must be shaped like net.params (see make_grads).
void mlp_backprop(const Mlp& net, std::span<const double> input,
                  const MlpActivations& acts,
                  std::span<const double> output_grad,
                  std::vector<Tensor>& grads);

std::vector<Tensor> make_grads(const Mlp& net);
void zero_grads(std::vector<Tensor>& grads);

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  long step = 0;
};

AdamState make_adam_state(const std::vector<Tensor*>& params);

// Bias-corrected Adam step over an ordered tensor list.
void adam_update(const std::vector<Tensor*>& params,
                 const std::vector<const Tensor*>& grads, AdamState& state,
                 const AdamConfig& cfg);

// Scales the gradient list so its global L2 norm is at most max_norm.
void clip_grad_norm(std::vector<Tensor*> grads, double max_norm);

}  // namespace uavsim
