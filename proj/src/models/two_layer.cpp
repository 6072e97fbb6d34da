#include "sgdlab/models/two_layer.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sgdlab/core/errors.hpp"
#include "sgdlab/core/kernels.hpp"
#include "sgdlab/core/linalg.hpp"

namespace sgdlab {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

namespace {

// Shared view of the two network models. `nu` is empty for the binary mixture.
struct Net {
  int N;
  int K;
  double lambda;
  double alpha;
  const std::vector<double>& mu;
  const std::vector<double>* nu;
  ModelFamily family;
};

Net view(const BgmmModel& m) {
  return {m.N(), 2, m.lambda(), m.alpha(), m.mu(), nullptr, ModelFamily::bgmm};
}
Net view(const XorGmmModel& m) {
  return {m.N(), m.K(), m.lambda(), m.alpha(), m.mu(), &m.nu(), ModelFamily::xor_gmm};
}

void check_unit(const std::vector<double>& a, int N, const char* name) {
  if (a.size() != static_cast<std::size_t>(N))
    throw SchemaError(fmt::format("{} must have dimension {}", name, N));
  if (std::abs(norm(a) - 1.0) > 1e-12) throw DomainError(fmt::format("{} must be a unit vector", name));
}

void check_point(const Net& net, const ParamPoint& x) {
  const std::size_t want = static_cast<std::size_t>(net.K) * (1 + static_cast<std::size_t>(net.N));
  if (x.family != net.family || x.theta.size() != want)
    throw SchemaError(fmt::format("network point must have dimension {}", want));
}

double noise_scale(double lambda) { return std::isinf(lambda) ? 0.0 : 1.0 / std::sqrt(lambda); }

// Fills d.x with a fresh sample; buffers are reused across steps.
void sample_into(const Net& net, RngStream& rng, MixtureDatum& d) {
  d.x.resize(static_cast<std::size_t>(net.N));
  const double s = noise_scale(net.lambda);
  double sign;
  const std::vector<double>* center;
  if (net.nu == nullptr) {
    d.y = rng.coin() ? 1 : 0;
    sign = d.y == 1 ? 1.0 : -1.0;
    center = &net.mu;
  } else {
    const std::uint64_t b = rng.bits();
    d.y = static_cast<int>(b >> 63);
    sign = ((b >> 62) & 1) ? 1.0 : -1.0;
    center = d.y == 1 ? &net.mu : net.nu;
  }
  if (s == 0.0) {
    for (int i = 0; i < net.N; ++i) d.x[i] = sign * (*center)[i];
    return;
  }
  rng.fill_normal(d.x);
  simd::axpby(sign, center->data(), s, d.x.data(), d.x.size());
}

struct Forward {
  std::vector<double> pre;
  double out;
};

Forward forward(const Net& net, const std::vector<double>& th, const std::vector<double>& x) {
  Forward f{std::vector<double>(static_cast<std::size_t>(net.K)), 0.0};
  for (int i = 0; i < net.K; ++i) {
    f.pre[i] = simd::dot(th.data() + net.K + static_cast<std::size_t>(i) * net.N, x.data(), x.size());
    if (f.pre[i] >= 0) f.out += th[i] * f.pre[i];
  }
  return f;
}

std::vector<double> grad(const Net& net, const ParamPoint& p, const MixtureDatum& d) {
  check_point(net, p);
  if (d.x.size() != static_cast<std::size_t>(net.N)) throw SchemaError("datum dimension mismatch");
  const auto& th = p.theta;
  const Forward f = forward(net, th, d.x);
  const double e = sigmoid(f.out) - d.y;
  std::vector<double> g(th.size());
  for (int i = 0; i < net.K; ++i) {
    const bool on = f.pre[i] >= 0;
    g[i] = (on ? f.pre[i] : 0.0) * e + net.alpha * th[i];
    const double c = on ? th[i] * e : 0.0;
    const std::size_t off = net.K + static_cast<std::size_t>(i) * net.N;
    for (int j = 0; j < net.N; ++j) g[off + j] = c * d.x[j] + net.alpha * th[off + j];
  }
  return g;
}

double loss_impl(const Net& net, const ParamPoint& p, const MixtureDatum& d) {
  check_point(net, p);
  const Forward f = forward(net, p.theta, d.x);
  const double ridge = simd::sum_sq(p.theta.data(), p.theta.size());
  return softplus(f.out) - d.y * f.out + 0.5 * net.alpha * ridge;
}

// Summary coordinates: v, m (per mean), then R_perp upper triangle.
std::vector<double> summary_values(const Net& net, const std::vector<double>& th) {
  const int K = net.K;
  const std::size_t N = static_cast<std::size_t>(net.N);
  auto W = [&](int i) { return th.data() + K + static_cast<std::size_t>(i) * N; };
  std::vector<double> mmu(K), mnu(K, 0.0);
  for (int i = 0; i < K; ++i) {
    mmu[i] = simd::dot(W(i), net.mu.data(), N);
    if (net.nu) mnu[i] = simd::dot(W(i), net.nu->data(), N);
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(3 * K + K * (K + 1) / 2));
  for (int i = 0; i < K; ++i) out.push_back(th[i]);
  for (int i = 0; i < K; ++i) out.push_back(mmu[i]);
  if (net.nu)
    for (int i = 0; i < K; ++i) out.push_back(mnu[i]);
  std::vector<double> diag(K);
  for (int i = 0; i < K; ++i) {
    for (int j = i; j < K; ++j) {
      double r = simd::dot(W(i), W(j), N) - mmu[i] * mmu[j] - mnu[i] * mnu[j];
      if (i == j) {
        const double scale = simd::sum_sq(W(i), N);
        if (r < 0) {
          if (r < -1e-10 * std::max(scale, 1.0))
            throw DomainError(fmt::format("negative R_perp diagonal {:.3g}", r));
          r = 0;
        }
        diag[i] = r;
      }
      out.push_back(r);
    }
  }
  // Cauchy-Schwarz on the Gram matrix
  std::size_t pos = out.size() - static_cast<std::size_t>(K * (K + 1) / 2);
  for (int i = 0; i < K; ++i)
    for (int j = i; j < K; ++j, ++pos)
      if (i != j && out[pos] * out[pos] > diag[i] * diag[j] * (1 + 1e-8) + 1e-14)
        throw DomainError("R_perp Gram matrix is not positive semidefinite");
  return out;
}

Trajectory run(const Net& net, const Schema& schema, ParamPoint p, double delta, std::int64_t steps,
               RngStream& rng, std::int64_t stride) {
  check_point(net, p);
  if (!(delta > 0)) throw DomainError("delta must be positive");
  if (steps < 0) throw DomainError("steps must be non-negative");
  if (stride < 1) throw DomainError("record_stride must be >= 1");
  const auto& KS = simd::active();
  const int K = net.K;
  const std::size_t N = static_cast<std::size_t>(net.N);
  auto& th = p.theta;
  MixtureDatum d;
  std::vector<double> pre(K);
  Trajectory traj(schema);
  traj.reserve(static_cast<std::size_t>(steps / stride + 2));
  traj.append(0.0, summary_values(net, th));
  const double shrink = 1.0 - delta * net.alpha;
  for (std::int64_t step = 1; step <= steps; ++step) {
    sample_into(net, rng, d);
    double out = 0;
    for (int i = 0; i < K; ++i) {
      pre[i] = KS.dot(th.data() + K + i * N, d.x.data(), N);
      if (pre[i] >= 0) out += th[i] * pre[i];
    }
    if (!std::isfinite(out))
      throw DivergenceError(fmt::format("network SGD diverged at step {}", step), step,
                            static_cast<double>(step) * delta);
    const double e = sigmoid(out) - d.y;
    for (int i = 0; i < K; ++i) {
      const double vi = th[i];
      if (pre[i] >= 0) {
        th[i] = shrink * vi - delta * pre[i] * e;
        KS.axpby(-delta * vi * e, d.x.data(), shrink, th.data() + K + i * N, N);
      } else {
        th[i] = shrink * vi;
        KS.axpby(0.0, d.x.data(), shrink, th.data() + K + i * N, N);
      }
    }
    if (step % stride == 0 || step == steps) {
      auto u = summary_values(net, th);
      for (double x : u)
        if (!std::isfinite(x))
          throw DivergenceError(fmt::format("network SGD diverged at step {}", step), step,
                                static_cast<double>(step) * delta);
      traj.append(static_cast<double>(step) * delta, u);
    }
  }
  return traj;
}

// Orthonormal directions in the complement of the given unit vectors.
std::vector<std::vector<double>> complement_frame(int count, int N,
                                                  const std::vector<const std::vector<double>*>& avoid,
                                                  RngStream& rng) {
  if (N < count + static_cast<int>(avoid.size()))
    throw DomainError("dimension too small for a warm start");
  std::vector<std::vector<double>> frame;
  std::vector<double> u(static_cast<std::size_t>(N));
  while (static_cast<int>(frame.size()) < count) {
    rng.fill_normal(u);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto* a : avoid) {
        const double c = simd::dot(u.data(), a->data(), u.size());
        simd::axpby(-c, a->data(), 1.0, u.data(), u.size());
      }
      for (const auto& f : frame) {
        const double c = simd::dot(u.data(), f.data(), u.size());
        simd::axpby(-c, f.data(), 1.0, u.data(), u.size());
      }
    }
    const double nu = norm(u);
    if (nu < 1e-8) continue;
    for (double& x : u) x /= nu;
    frame.push_back(u);
  }
  return frame;
}

ParamPoint lift(const Net& net, const Schema& schema, const SummaryVec& target, RngStream& rng) {
  require_same_schema(target.schema(), schema, "warm_start");
  const int K = net.K;
  const std::size_t N = static_cast<std::size_t>(net.N);
  const auto& u = target.values();
  Eigen::MatrixXd R(K, K);
  std::size_t pos = static_cast<std::size_t>(net.nu ? 3 * K : 2 * K);
  for (int i = 0; i < K; ++i)
    for (int j = i; j < K; ++j, ++pos) R(i, j) = R(j, i) = u[pos];
  const Eigen::MatrixXd S = psd_sqrt(R);
  std::vector<const std::vector<double>*> avoid{&net.mu};
  if (net.nu) avoid.push_back(net.nu);
  const auto frame = complement_frame(K, net.N, avoid, rng);
  ParamPoint p{net.family, std::vector<double>(static_cast<std::size_t>(K) * (1 + N), 0.0)};
  for (int i = 0; i < K; ++i) {
    p.theta[i] = u[i];
    double* w = p.theta.data() + K + i * N;
    const double mm = u[K + i];
    const double mn = net.nu ? u[2 * K + i] : 0.0;
    for (std::size_t a = 0; a < N; ++a) {
      double x = mm * net.mu[a];
      if (net.nu) x += mn * (*net.nu)[a];
      for (int j = 0; j < K; ++j) x += S(i, j) * frame[j][a];
      w[a] = x;
    }
  }
  return p;
}

}  // namespace

std::string gram_name(int i, int j, int K) {
  return K < 10 ? fmt::format("R{}{}", i, j) : fmt::format("R{}_{}", i, j);
}

Schema bgmm_schema() {
  static const Schema s{"v1", "v2", "m1", "m2", "R11", "R12", "R22"};
  return s;
}

Schema xor_schema(int K) {
  std::vector<std::string> names;
  for (int i = 1; i <= K; ++i) names.push_back(fmt::format("v{}", i));
  for (int i = 1; i <= K; ++i) names.push_back(fmt::format("mmu{}", i));
  for (int i = 1; i <= K; ++i) names.push_back(fmt::format("mnu{}", i));
  for (int i = 1; i <= K; ++i)
    for (int j = i; j <= K; ++j) names.push_back(gram_name(i, j, K));
  return Schema(std::move(names));
}

BgmmModel::BgmmModel(int N, double lambda, double alpha, std::vector<double> mu)
    : N_(N), lambda_(lambda), alpha_(alpha), mu_(std::move(mu)), schema_(bgmm_schema()) {
  if (N < 3) throw DomainError("bGMM needs N >= 3");
  if (!(lambda > 0)) throw DomainError("bGMM needs lambda > 0");
  if (!(alpha >= 0)) throw DomainError("bGMM needs alpha >= 0");
  check_unit(mu_, N, "mu");
}

BgmmModel BgmmModel::with_axis_mean(int N, double lambda, double alpha) {
  std::vector<double> mu(static_cast<std::size_t>(std::max(N, 1)), 0.0);
  mu[0] = 1.0;
  return BgmmModel(N, lambda, alpha, std::move(mu));
}

XorGmmModel::XorGmmModel(int N, int K, double lambda, double alpha, std::vector<double> mu,
                         std::vector<double> nu)
    : N_(N), K_(K), lambda_(lambda), alpha_(alpha), mu_(std::move(mu)), nu_(std::move(nu)),
      schema_(xor_schema(K)) {
  if (K < 4) throw DomainError("XOR model needs K >= 4");
  if (N < K + 2) throw DomainError("XOR model needs N >= K + 2");
  if (!(lambda > 0)) throw DomainError("XOR model needs lambda > 0");
  if (!(alpha >= 0)) throw DomainError("XOR model needs alpha >= 0");
  check_unit(mu_, N, "mu");
  check_unit(nu_, N, "nu");
  if (std::abs(simd::dot(mu_.data(), nu_.data(), mu_.size())) > 1e-12)
    throw DomainError("mu and nu must be orthogonal");
}

XorGmmModel XorGmmModel::with_axis_means(int N, int K, double lambda, double alpha) {
  std::vector<double> mu(static_cast<std::size_t>(std::max(N, 2)), 0.0), nu = mu;
  mu[0] = 1.0;
  nu[1] = 1.0;
  return XorGmmModel(N, K, lambda, alpha, std::move(mu), std::move(nu));
}

MixtureDatum sample_datum(const BgmmModel& model, RngStream& rng) {
  MixtureDatum d;
  sample_into(view(model), rng, d);
  return d;
}
MixtureDatum sample_datum(const XorGmmModel& model, RngStream& rng) {
  MixtureDatum d;
  sample_into(view(model), rng, d);
  return d;
}

std::vector<double> grad_loss(const BgmmModel& model, const ParamPoint& x, const MixtureDatum& d) {
  return grad(view(model), x, d);
}
std::vector<double> grad_loss(const XorGmmModel& model, const ParamPoint& x, const MixtureDatum& d) {
  return grad(view(model), x, d);
}
double loss(const BgmmModel& model, const ParamPoint& x, const MixtureDatum& d) {
  return loss_impl(view(model), x, d);
}
double loss(const XorGmmModel& model, const ParamPoint& x, const MixtureDatum& d) {
  return loss_impl(view(model), x, d);
}

SummaryVec summary(const BgmmModel& model, const ParamPoint& x) {
  check_point(view(model), x);
  return SummaryVec(model.schema(), summary_values(view(model), x.theta));
}
SummaryVec summary(const XorGmmModel& model, const ParamPoint& x) {
  check_point(view(model), x);
  return SummaryVec(model.schema(), summary_values(view(model), x.theta));
}

Trajectory sgd_run(const BgmmModel& model, ParamPoint x0, double delta, std::int64_t steps,
                   RngStream& rng, std::int64_t record_stride) {
  return run(view(model), model.schema(), std::move(x0), delta, steps, rng, record_stride);
}
Trajectory sgd_run(const XorGmmModel& model, ParamPoint x0, double delta, std::int64_t steps,
                   RngStream& rng, std::int64_t record_stride) {
  return run(view(model), model.schema(), std::move(x0), delta, steps, rng, record_stride);
}

double bgmm_noiseless_loss(std::span<const double> u, double alpha) {
  if (u.size() != 7) throw SchemaError("bGMM summary has 7 coordinates");
  const double v1 = u[0], v2 = u[1], m1 = u[2], m2 = u[3];
  const double vgp = v1 * std::max(m1, 0.0) + v2 * std::max(m2, 0.0);
  const double vgm = v1 * std::max(-m1, 0.0) + v2 * std::max(-m2, 0.0);
  const double ridge = v1 * v1 + v2 * v2 + m1 * m1 + m2 * m2 + u[4] + u[6];
  return 0.5 * (softplus(-vgp) + softplus(vgm)) + 0.5 * alpha * ridge;
}

double xor_noiseless_loss(std::span<const double> u, int K, double alpha) {
  if (u.size() != static_cast<std::size_t>(3 * K + K * (K + 1) / 2))
    throw SchemaError("XOR summary size mismatch");
  double mp = 0, mm = 0, np = 0, nm = 0, ridge = 0;
  for (int i = 0; i < K; ++i) {
    const double v = u[i], a = u[K + i], b = u[2 * K + i];
    mp += v * std::max(a, 0.0);
    mm += v * std::max(-a, 0.0);
    np += v * std::max(b, 0.0);
    nm += v * std::max(-b, 0.0);
    ridge += v * v + a * a + b * b;
  }
  std::size_t pos = static_cast<std::size_t>(3 * K);
  for (int i = 0; i < K; ++i)
    for (int j = i; j < K; ++j, ++pos)
      if (i == j) ridge += u[pos];
  return 0.25 * (softplus(-mp) + softplus(-mm) + softplus(np) + softplus(nm)) + 0.5 * alpha * ridge;
}

double population_loss(const BgmmModel& model, const SummaryVec& u) {
  require_same_schema(u.schema(), model.schema(), "bGMM population_loss");
  return bgmm_noiseless_loss(u.span(), model.alpha());
}
double population_loss(const XorGmmModel& model, const SummaryVec& u) {
  require_same_schema(u.schema(), model.schema(), "XOR population_loss");
  return xor_noiseless_loss(u.span(), model.K(), model.alpha());
}

ParamPoint random_init(const BgmmModel& model, RngStream& rng) {
  const std::size_t N = static_cast<std::size_t>(model.N());
  ParamPoint p{ModelFamily::bgmm, std::vector<double>(2 + 2 * N)};
  p.theta[0] = rng.normal();
  p.theta[1] = rng.normal();
  std::span<double> w(p.theta.data() + 2, 2 * N);
  rng.fill_normal(w);
  const double s = std::isinf(model.lambda()) ? 0.0 : 1.0 / std::sqrt(model.lambda() * model.N());
  for (double& x : w) x *= s;
  return p;
}

ParamPoint random_init(const XorGmmModel& model, RngStream& rng) {
  const std::size_t N = static_cast<std::size_t>(model.N()), K = static_cast<std::size_t>(model.K());
  ParamPoint p{ModelFamily::xor_gmm, std::vector<double>(K + K * N)};
  rng.fill_normal(p.theta);
  const double s = 1.0 / std::sqrt(static_cast<double>(model.N()));
  for (std::size_t i = K; i < p.theta.size(); ++i) p.theta[i] *= s;
  return p;
}

ParamPoint warm_start(const BgmmModel& model, const SummaryVec& target, RngStream& rng) {
  return lift(view(model), model.schema(), target, rng);
}
ParamPoint warm_start(const XorGmmModel& model, const SummaryVec& target, RngStream& rng) {
  return lift(view(model), model.schema(), target, rng);
}

}  // namespace sgdlab
