#include "uavsim/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uavsim {

namespace {

// Orthonormalize Gaussian rows (or columns when rows > cols) and scale.
Tensor orthogonal_matrix(int rows, int cols, double gain, Rng& rng) {
  const bool wide = rows <= cols;
  const int nvec = wide ? rows : cols;
  const int dim = wide ? cols : rows;
  std::vector<Tensor> vecs(nvec, Tensor(dim));
  for (auto& v : vecs)
    for (auto& x : v) x = rng.normal();
  for (int i = 0; i < nvec; ++i) {
    for (int j = 0; j < i; ++j) {
      double d = 0.0;
      for (int k = 0; k < dim; ++k) d += vecs[i][k] * vecs[j][k];
      for (int k = 0; k < dim; ++k) vecs[i][k] -= d * vecs[j][k];
    }
    double n2 = 0.0;
    for (double x : vecs[i]) n2 += x * x;
    const double inv = 1.0 / std::sqrt(std::max(n2, 1e-30));
    for (auto& x : vecs[i]) x *= inv;
  }
  Tensor w(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      w[static_cast<std::size_t>(r) * cols + c] =
          gain * (wide ? vecs[r][c] : vecs[c][r]);
  return w;
}

}  // namespace

Mlp make_mlp(const std::vector<int>& sizes, Rng& rng, double final_gain) {
  if (sizes.size() < 2)
    throw std::invalid_argument("make_mlp: need at least input and output");
  Mlp net;
  net.sizes = sizes;
  const int layers = net.n_layers();
  for (int l = 0; l < layers; ++l) {
    const double gain = (l == layers - 1) ? final_gain : std::sqrt(2.0);
    net.params.push_back(orthogonal_matrix(sizes[l + 1], sizes[l], gain, rng));
    net.params.push_back(Tensor(sizes[l + 1], 0.0));
  }
  return net;
}

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input) {
  MlpActivations acts;
  return mlp_forward_cached(net, input, acts);
}

std::vector<double> mlp_forward_cached(const Mlp& net,
                                       std::span<const double> input,
                                       MlpActivations& acts) {
  if (static_cast<int>(input.size()) != net.input_size())
    throw std::invalid_argument("mlp_forward: input size mismatch");
  acts.post.assign(net.n_layers(), {});
  const double* cur = input.data();
  int cur_n = net.input_size();
  for (int l = 0; l < net.n_layers(); ++l) {
    const int out_n = net.sizes[l + 1];
    const bool last = l == net.n_layers() - 1;
    Tensor& out = acts.post[l];
    out.assign(out_n, 0.0);
    const Tensor& w = net.w(l);
    const Tensor& b = net.b(l);
    for (int r = 0; r < out_n; ++r) {
      double acc = b[r];
      const double* wr = w.data() + static_cast<std::size_t>(r) * cur_n;
      for (int c = 0; c < cur_n; ++c) acc += wr[c] * cur[c];
      out[r] = last ? acc : std::tanh(acc);
    }
    cur = out.data();
    cur_n = out_n;
  }
  return acts.post.back();
}

void mlp_backprop(const Mlp& net, std::span<const double> input,
                  const MlpActivations& acts,
                  std::span<const double> output_grad,
                  std::vector<Tensor>& grads) {
  if (static_cast<int>(output_grad.size()) != net.output_size())
    throw std::invalid_argument("mlp_backprop: output_grad size mismatch");
  if (grads.size() != net.params.size())
    throw std::invalid_argument("mlp_backprop: grads shape mismatch");
  const int layers = net.n_layers();
  Tensor delta(output_grad.begin(), output_grad.end());
  for (int l = layers - 1; l >= 0; --l) {
    const int out_n = net.sizes[l + 1];
    const int in_n = net.sizes[l];
    const bool last = l == layers - 1;
    if (!last) {
      // tanh'(z) expressed through the cached post-activation
      const Tensor& a = acts.post[l];
      for (int r = 0; r < out_n; ++r) delta[r] *= 1.0 - a[r] * a[r];
    }
    const double* prev =
        (l == 0) ? input.data() : acts.post[l - 1].data();
    Tensor& dw = grads[2 * l];
    Tensor& db = grads[2 * l + 1];
    for (int r = 0; r < out_n; ++r) {
      db[r] += delta[r];
      double* dwr = dw.data() + static_cast<std::size_t>(r) * in_n;
      for (int c = 0; c < in_n; ++c) dwr[c] += delta[r] * prev[c];
    }
    if (l > 0) {
      const Tensor& w = net.w(l);
      Tensor next(in_n, 0.0);
      for (int r = 0; r < out_n; ++r) {
        const double* wr = w.data() + static_cast<std::size_t>(r) * in_n;
        for (int c = 0; c < in_n; ++c) next[c] += wr[c] * delta[r];
      }
      delta = std::move(next);
    }
  }
}

std::vector<Tensor> make_grads(const Mlp& net) {
  std::vector<Tensor> g;
  g.reserve(net.params.size());
  for (const auto& p : net.params) g.emplace_back(p.size(), 0.0);
  return g;
}

void zero_grads(std::vector<Tensor>& grads) {
  for (auto& g : grads) std::fill(g.begin(), g.end(), 0.0);
}

AdamState make_adam_state(const std::vector<Tensor*>& params) {
  AdamState st;
  for (const auto* p : params) {
    st.m.emplace_back(p->size(), 0.0);
    st.v.emplace_back(p->size(), 0.0);
  }
  return st;
}

void adam_update(const std::vector<Tensor*>& params,
                 const std::vector<const Tensor*>& grads, AdamState& state,
                 const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_update: tensor list mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, state.step);
  const double bc2 = 1.0 - std::pow(cfg.beta2, state.step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p[k] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

void clip_grad_norm(std::vector<Tensor*> grads, double max_norm) {
  if (max_norm <= 0.0) return;
  double n2 = 0.0;
  for (const auto* g : grads)
    for (double x : *g) n2 += x * x;
  const double norm = std::sqrt(n2);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (auto* g : grads)
    for (double& x : *g) x *= scale;
}

}  // namespace uavsim
