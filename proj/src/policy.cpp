#include "uavsim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace uavsim {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)
constexpr double kSquashClamp = 1.0 - 1e-6;

double clamp_delta(double a) { return std::clamp(a, -kSquashClamp, kSquashClamp); }

double log_sum_exp(std::span<const double> v) {
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

PolicyOutput PolicyNet::forward(std::span<const double> obs) const {
  MlpActivations acts;
  return forward_cached(obs, acts);
}

PolicyOutput PolicyNet::forward_cached(std::span<const double> obs,
                                       MlpActivations& acts) const {
  const auto raw = mlp_forward_cached(net, obs, acts);
  PolicyOutput out;
  for (int i = 0; i < 3; ++i) {
    out.mean[i] = raw[i];
    out.log_std[i] = log_std[i];
  }
  out.gbs_logits.assign(raw.begin() + 3, raw.end());
  return out;
}

PolicyNet make_policy(int obs_dim, int n_logits, int hidden,
                      double log_std_init, Rng& rng) {
  PolicyNet p;
  p.net = make_mlp({obs_dim, hidden, hidden, 3 + n_logits}, rng, 0.01);
  p.log_std.assign(3, log_std_init);
  p.n_logits = n_logits;
  return p;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  const double lse = log_sum_exp(logits);
  for (std::size_t i = 0; i < logits.size(); ++i)
    p[i] = std::exp(logits[i] - lse);
  return p;
}

SampledAction policy_sample(const PolicyOutput& out, Rng& rng) {
  SampledAction a;
  double d[3];
  for (int i = 0; i < 3; ++i) {
    const double u = out.mean[i] + std::exp(out.log_std[i]) * rng.normal();
    d[i] = clamp_delta(std::tanh(u));
  }
  a.delta = {d[0], d[1], d[2]};
  if (!out.gbs_logits.empty()) {
    const auto probs = softmax(out.gbs_logits);
    const double r = rng.uniform();
    double acc = 0.0;
    a.gbs_slot = static_cast<int>(probs.size()) - 1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (r < acc) {
        a.gbs_slot = static_cast<int>(i);
        break;
      }
    }
  }
  // One code path for densities: the sampler reports exactly what
  // policy_logprob would recompute for the emitted action.
  a.log_prob = policy_logprob(out, a.delta, a.gbs_slot);
  return a;
}

SampledAction policy_mode(const PolicyOutput& out) {
  SampledAction a;
  a.delta = {clamp_delta(std::tanh(out.mean[0])),
             clamp_delta(std::tanh(out.mean[1])),
             clamp_delta(std::tanh(out.mean[2]))};
  if (!out.gbs_logits.empty()) {
    a.gbs_slot = 0;
    for (std::size_t i = 1; i < out.gbs_logits.size(); ++i)
      if (out.gbs_logits[i] > out.gbs_logits[a.gbs_slot])
        a.gbs_slot = static_cast<int>(i);
  }
  a.log_prob = policy_logprob(out, a.delta, a.gbs_slot);
  return a;
}

double policy_logprob(const PolicyOutput& out, const Vec3& delta,
                      int gbs_slot) {
  const double d[3] = {delta.x, delta.y, delta.z};
  double lp = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double a = clamp_delta(d[i]);
    const double u = std::atanh(a);
    const double sigma = std::exp(out.log_std[i]);
    const double zn = (u - out.mean[i]) / sigma;
    lp += -0.5 * zn * zn - out.log_std[i] - kHalfLog2Pi;
    lp -= std::log(1.0 - a * a);  // tanh change of variables
  }
  if (!out.gbs_logits.empty()) {
    if (gbs_slot < 0 || gbs_slot >= static_cast<int>(out.gbs_logits.size()))
      throw std::invalid_argument("policy_logprob: gbs slot out of range");
    lp += out.gbs_logits[gbs_slot] - log_sum_exp(out.gbs_logits);
  }
  return lp;
}

double policy_entropy(const PolicyOutput& out) {
  double h = 0.0;
  for (int i = 0; i < 3; ++i) h += 0.5 + kHalfLog2Pi + out.log_std[i];
  if (!out.gbs_logits.empty()) {
    const double lse = log_sum_exp(out.gbs_logits);
    for (const double z : out.gbs_logits) {
      const double logp = z - lse;
      h -= std::exp(logp) * logp;
    }
  }
  return h;
}

void policy_logprob_grad(const PolicyOutput& out, const Vec3& delta,
                         int gbs_slot, double scale, std::span<double> d_out,
                         std::span<double> d_log_std) {
  const double d[3] = {delta.x, delta.y, delta.z};
  for (int i = 0; i < 3; ++i) {
    const double a = clamp_delta(d[i]);
    const double u = std::atanh(a);
    const double sigma = std::exp(out.log_std[i]);
    const double zn = (u - out.mean[i]) / sigma;
    d_out[i] += scale * zn / sigma;          // d lp / d mean
    d_log_std[i] += scale * (zn * zn - 1.0); // d lp / d log_std
  }
  if (!out.gbs_logits.empty()) {
    const auto probs = softmax(out.gbs_logits);
    for (std::size_t j = 0; j < probs.size(); ++j)
      d_out[3 + j] += scale * ((static_cast<int>(j) == gbs_slot ? 1.0 : 0.0) -
                               probs[j]);
  }
}

void policy_entropy_grad(const PolicyOutput& out, double scale,
                         std::span<double> d_out,
                         std::span<double> d_log_std) {
  for (int i = 0; i < 3; ++i) d_log_std[i] += scale;
  if (!out.gbs_logits.empty()) {
    const auto probs = softmax(out.gbs_logits);
    double h_cat = 0.0;
    for (double p : probs)
      if (p > 0.0) h_cat -= p * std::log(p);
    for (std::size_t j = 0; j < probs.size(); ++j) {
      const double logp = probs[j] > 0.0 ? std::log(probs[j]) : 0.0;
      d_out[3 + j] += scale * (-probs[j] * (logp + h_cat));
    }
  }
}

const char* agent_kind_name(AgentKind k) {
  switch (k) {
    case AgentKind::dupac: return "dupac";
    case AgentKind::baseline: return "baseline";
    case AgentKind::random: return "random";
  }
  return "dupac";
}

AgentKind agent_kind_from_name(const std::string& name) {
  if (name == "dupac") return AgentKind::dupac;
  if (name == "baseline") return AgentKind::baseline;
  if (name == "random") return AgentKind::random;
  throw std::invalid_argument("unknown agent kind: " + name);
}

namespace {

constexpr char kMagic[8] = {'U', 'A', 'V', 'S', 'I', 'M', 'A', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

struct Reader {
  const unsigned char* p;
  const unsigned char* end;

  void need(std::size_t n) const {
    if (static_cast<std::size_t>(end - p) < n)
      throw std::runtime_error("checkpoint: truncated file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
    p += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(p[i]) << (8 * i);
    p += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

void put_mlp_shapes(std::string& out, const Mlp& net) {
  put_u32(out, static_cast<std::uint32_t>(net.sizes.size()));
  for (int s : net.sizes) put_u32(out, static_cast<std::uint32_t>(s));
}

Mlp read_mlp_shapes(Reader& r) {
  const std::uint32_t n = r.u32();
  if (n < 2 || n > 64) throw std::runtime_error("checkpoint: bad layer count");
  Mlp net;
  net.sizes.resize(n);
  for (auto& s : net.sizes) {
    s = static_cast<int>(r.u32());
    if (s <= 0 || s > 1 << 20) throw std::runtime_error("checkpoint: bad layer size");
  }
  for (int l = 0; l < net.n_layers(); ++l) {
    net.params.emplace_back(
        static_cast<std::size_t>(net.sizes[l + 1]) * net.sizes[l]);
    net.params.emplace_back(net.sizes[l + 1]);
  }
  return net;
}

}  // namespace

void save_agent(const Agent& agent, const std::string& path) {
  std::string out;
  out.append(kMagic, 8);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(agent.kind));
  put_u32(out, static_cast<std::uint32_t>(agent.obs_dim));
  put_u32(out, static_cast<std::uint32_t>(agent.n_gbs));
  put_mlp_shapes(out, agent.policy.net);
  put_mlp_shapes(out, agent.value);
  put_u32(out, static_cast<std::uint32_t>(agent.policy.log_std.size()));
  put_f64(out, agent.ret_count);
  put_f64(out, agent.ret_mean);
  put_f64(out, agent.ret_m2);
  for (const auto& t : agent.policy.net.params)
    for (double v : t) put_f64(out, v);
  for (double v : agent.policy.log_std) put_f64(out, v);
  for (const auto& t : agent.value.params)
    for (double v : t) put_f64(out, v);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("checkpoint write failed: " + path);
}

Agent load_agent(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string data((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  if (data.size() < 8 || std::memcmp(data.data(), kMagic, 8) != 0)
    throw std::runtime_error("checkpoint: bad magic");
  Reader r{reinterpret_cast<const unsigned char*>(data.data()) + 8,
           reinterpret_cast<const unsigned char*>(data.data()) + data.size()};
  if (r.u32() != kVersion) throw std::runtime_error("checkpoint: bad version");
  Agent a;
  const std::uint32_t kind = r.u32();
  if (kind > 2) throw std::runtime_error("checkpoint: bad agent kind");
  a.kind = static_cast<AgentKind>(kind);
  a.obs_dim = static_cast<int>(r.u32());
  a.n_gbs = static_cast<int>(r.u32());
  a.policy.net = read_mlp_shapes(r);
  a.value = read_mlp_shapes(r);
  const std::uint32_t nls = r.u32();
  if (nls != 3) throw std::runtime_error("checkpoint: bad log_std length");
  a.policy.log_std.resize(nls);
  a.policy.n_logits = a.policy.net.output_size() - 3;
  a.ret_count = r.f64();
  a.ret_mean = r.f64();
  a.ret_m2 = r.f64();
  for (auto& t : a.policy.net.params)
    for (auto& v : t) v = r.f64();
  for (auto& v : a.policy.log_std) v = r.f64();
  for (auto& t : a.value.params)
    for (auto& v : t) v = r.f64();
  if (r.p != r.end) throw std::runtime_error("checkpoint: trailing bytes");
  return a;
}

}  // namespace uavsim
