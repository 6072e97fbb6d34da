#include "sgdlab/models/tensor_pca.hpp"

#include <cmath>

#include <fmt/format.h>

#include "sgdlab/core/errors.hpp"
#include "sgdlab/core/kernels.hpp"

namespace sgdlab {

namespace {

double ipow(double x, int p) {
  double r = 1;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

void check_dim(const TensorPcaModel& model, const ParamPoint& x) {
  if (x.family != ModelFamily::tensor_pca || x.theta.size() != static_cast<std::size_t>(model.n()))
    throw SchemaError(fmt::format("tensor PCA point must have dimension {}", model.n()));
}

std::size_t tensor_size(int n, int k) {
  std::size_t s = 1;
  for (int i = 0; i < k; ++i) s *= static_cast<std::size_t>(n);
  return s;
}

// Visits every multi-index of an n^k tensor in row-major order.
template <class F>
void for_each_index(int n, int k, F&& f) {
  std::vector<int> idx(k, 0);
  std::size_t flat = 0;
  while (true) {
    f(flat, idx);
    ++flat;
    int p = k - 1;
    while (p >= 0 && ++idx[p] == n) idx[p--] = 0;
    if (p < 0) return;
  }
}

}  // namespace

Schema tensor_pca_schema() {
  static const Schema s{"m", "r2"};
  return s;
}

TensorPcaModel::TensorPcaModel(int n, int k, double lambda, double alpha, std::vector<double> spike)
    : n_(n), k_(k), lambda_(lambda), alpha_(alpha), spike_(std::move(spike)),
      schema_(tensor_pca_schema()) {
  if (n < 2 || k < 2) throw DomainError("tensor PCA needs n >= 2 and k >= 2");
  if (!(lambda > 0)) throw DomainError("tensor PCA needs lambda > 0");
  if (!(alpha >= 0)) throw DomainError("tensor PCA needs alpha >= 0");
  if (spike_.size() != static_cast<std::size_t>(n)) throw SchemaError("spike dimension mismatch");
  if (std::abs(norm(spike_) - 1.0) > 1e-12) throw DomainError("spike must be a unit vector");
}

TensorPcaModel TensorPcaModel::with_axis_spike(int n, int k, double lambda, double alpha) {
  std::vector<double> v(static_cast<std::size_t>(std::max(n, 0)), 0.0);
  if (!v.empty()) v[0] = 1.0;
  return TensorPcaModel(n, k, lambda, alpha, std::move(v));
}

PcaDatum sample_datum(const TensorPcaModel& model, RngStream& rng) {
  LazyTensorNoise noise;
  noise.z.resize(static_cast<std::size_t>(model.n()));
  rng.fill_normal(noise.z);
  noise.xi = rng.normal();
  return PcaDatum{std::move(noise)};
}

DenseTensor sample_dense_noise(const TensorPcaModel& model, RngStream& rng) {
  DenseTensor t{model.n(), model.k(), std::vector<double>(tensor_size(model.n(), model.k()))};
  rng.fill_normal(t.w);
  return t;
}

std::vector<double> noise_contraction(const DenseTensor& w, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(w.n)) throw SchemaError("contraction dimension mismatch");
  std::vector<double> g(x.size(), 0.0);
  for_each_index(w.n, w.k, [&](std::size_t flat, const std::vector<int>& idx) {
    const double wv = w.w[flat];
    for (int slot = 0; slot < w.k; ++slot) {
      double p = wv;
      for (int l = 0; l < w.k; ++l)
        if (l != slot) p *= x[idx[l]];
      g[idx[slot]] += p;
    }
  });
  return g;
}

std::vector<double> noise_contraction(const TensorPcaModel& model, const LazyTensorNoise& noise,
                                      std::span<const double> x) {
  const int k = model.k();
  const double r2 = simd::sum_sq(x.data(), x.size());
  const double r = std::sqrt(r2);
  const double a = std::sqrt(static_cast<double>(k)) * ipow(r, k - 1);
  // sqrt(k(k-1)) |x|^{k-1} xi xhat = sqrt(k(k-1)) |x|^{k-2} xi x
  const double b = std::sqrt(static_cast<double>(k) * (k - 1)) * ipow(r, k - 2) * noise.xi;
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = a * noise.z[i] + b * x[i];
  return g;
}

DenseTensor materialize_noise(const TensorPcaModel& model, std::span<const double> x,
                              const LazyTensorNoise& noise, RngStream& rng) {
  const int n = model.n(), k = model.k();
  DenseTensor w = sample_dense_noise(model, rng);
  const double r2 = simd::sum_sq(x.data(), x.size());
  if (r2 == 0.0) return w;  // contraction map is zero; nothing to condition on
  const std::vector<double> target = noise_contraction(model, noise, x);
  const std::vector<double> current = noise_contraction(w, x);
  // C C^T = a I + b x x^T
  const double a = k * ipow(r2, k - 1);
  const double b = static_cast<double>(k) * (k - 1) * ipow(r2, k - 2);
  std::vector<double> diff(n);
  double xd = 0;
  for (int i = 0; i < n; ++i) {
    diff[i] = target[i] - current[i];
    xd += x[i] * diff[i];
  }
  const double s = b / (a + b * r2);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = (diff[i] - s * xd * x[i]) / a;
  // W += C^T y
  for_each_index(n, k, [&](std::size_t flat, const std::vector<int>& idx) {
    double acc = 0;
    for (int slot = 0; slot < k; ++slot) {
      double p = y[idx[slot]];
      for (int l = 0; l < k; ++l)
        if (l != slot) p *= x[idx[l]];
      acc += p;
    }
    w.w[flat] += acc;
  });
  return w;
}

std::vector<double> grad_loss(const TensorPcaModel& model, const ParamPoint& x, const PcaDatum& d) {
  check_dim(model, x);
  const int k = model.k();
  const auto& th = x.theta;
  std::vector<double> g = std::visit(
      [&](const auto& noise) {
        using T = std::decay_t<decltype(noise)>;
        if constexpr (std::is_same_v<T, LazyTensorNoise>) {
          if (noise.z.size() != th.size()) throw SchemaError("lazy noise dimension mismatch");
          return noise_contraction(model, noise, th);
        } else {
          if (noise.n != model.n() || noise.k != k) throw SchemaError("noise tensor shape mismatch");
          return noise_contraction(noise, th);
        }
      },
      d.noise);
  const auto& v = model.spike();
  const double m = simd::dot(th.data(), v.data(), th.size());
  const double r2 = simd::sum_sq(th.data(), th.size());
  const double cs = -2.0 * model.lambda() * k * ipow(m, k - 1);
  const double cx = 2.0 * k * ipow(r2, k - 1) + model.alpha();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = -2.0 * g[i] + cs * v[i] + cx * th[i];
  return g;
}

double loss(const TensorPcaModel& model, const ParamPoint& x, const PcaDatum& d) {
  check_dim(model, x);
  const auto* w = std::get_if<DenseTensor>(&d.noise);
  if (!w) throw DomainError("loss value needs an explicit noise tensor");
  const int k = model.k();
  const auto& th = x.theta;
  double wx = 0;
  for_each_index(w->n, w->k, [&](std::size_t flat, const std::vector<int>& idx) {
    double p = w->w[flat];
    for (int l = 0; l < k; ++l) p *= th[idx[l]];
    wx += p;
  });
  const double m = simd::dot(th.data(), model.spike().data(), th.size());
  const double r2 = simd::sum_sq(th.data(), th.size());
  return -2.0 * (wx + model.lambda() * ipow(m, k)) + ipow(r2, k) + 0.5 * model.alpha() * r2;
}

SummaryVec summary(const TensorPcaModel& model, const ParamPoint& x) {
  check_dim(model, x);
  const double m = simd::dot(x.theta.data(), model.spike().data(), x.theta.size());
  const double r2 = simd::sum_sq(x.theta.data(), x.theta.size());
  return SummaryVec(model.schema(), {m, std::max(r2 - m * m, 0.0)});
}

Trajectory sgd_run(const TensorPcaModel& model, ParamPoint x0, double delta, std::int64_t steps,
                   RngStream& rng, std::int64_t record_stride) {
  check_dim(model, x0);
  if (!(delta > 0)) throw DomainError("delta must be positive");
  if (steps < 0) throw DomainError("steps must be non-negative");
  if (record_stride < 1) throw DomainError("record_stride must be >= 1");
  const auto& K = simd::active();
  const std::size_t n = x0.theta.size();
  const int k = model.k();
  const double lam = model.lambda(), alpha = model.alpha();
  const double sk = std::sqrt(static_cast<double>(k));
  const double skk = std::sqrt(static_cast<double>(k) * (k - 1));
  const auto& v = model.spike();
  std::vector<double>& x = x0.theta;
  std::vector<double> z(n);

  Trajectory traj(model.schema());
  traj.reserve(static_cast<std::size_t>(steps / record_stride + 2));
  double m = K.dot(x.data(), v.data(), n);
  double r2 = K.sum_sq(x.data(), n);
  auto record = [&](std::int64_t step) {
    const double u[2] = {m, std::max(r2 - m * m, 0.0)};
    traj.append(static_cast<double>(step) * delta, u);
  };
  record(0);
  for (std::int64_t step = 1; step <= steps; ++step) {
    rng.fill_normal(z);
    const double xi = rng.normal();
    const double r = std::sqrt(r2);
    // x <- x - delta * grad, with the noise contraction a z + b x.
    const double a = sk * ipow(r, k - 1);
    const double b = skk * ipow(r, k - 2) * xi;
    const double c0 = 1.0 - delta * (2.0 * k * ipow(r2, k - 1) + alpha) + 2.0 * delta * b;
    const double c1 = 2.0 * delta * a;
    const double c2 = 2.0 * delta * lam * k * ipow(m, k - 1);
    K.update3(c0, x.data(), c1, z.data(), c2, v.data(), n);
    m = K.dot(x.data(), v.data(), n);
    r2 = K.sum_sq(x.data(), n);
    if (!std::isfinite(r2) || !std::isfinite(m))
      throw DivergenceError(fmt::format("tensor PCA SGD diverged at step {}", step), step,
                            static_cast<double>(step) * delta);
    if (step % record_stride == 0 || step == steps) record(step);
  }
  return traj;
}

TensorPcaV tensor_pca_V(const TensorPcaModel& model, const ParamPoint& x) {
  check_dim(model, x);
  const int k = model.k();
  const double r2 = simd::sum_sq(x.theta.data(), x.theta.size());
  return {4.0 * k * (k - 1) * ipow(r2, k - 2), 4.0 * k * ipow(r2, k - 1)};
}

double population_loss(const TensorPcaModel& model, const SummaryVec& u) {
  require_same_schema(u.schema(), model.schema(), "tensor PCA population_loss");
  const double m = u[0], r2 = u[1] + u[0] * u[0];
  const int k = model.k();
  return -2.0 * model.lambda() * ipow(m, k) + ipow(r2, k) + 0.5 * model.alpha() * r2;
}

ParamPoint random_init(const TensorPcaModel& model, RngStream& rng) {
  ParamPoint p{ModelFamily::tensor_pca, std::vector<double>(static_cast<std::size_t>(model.n()))};
  rng.fill_normal(p.theta);
  const double s = 1.0 / std::sqrt(static_cast<double>(model.n()));
  for (double& x : p.theta) x *= s;
  return p;
}

ParamPoint warm_start(const TensorPcaModel& model, double m, double r2, RngStream& rng) {
  if (!(r2 >= 0)) throw DomainError("warm start needs r2 >= 0");
  const auto& v = model.spike();
  std::vector<double> u(v.size());
  double nu = 0;
  while (nu < 1e-8) {
    rng.fill_normal(u);
    const double c = simd::dot(u.data(), v.data(), u.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] -= c * v[i];
    nu = norm(u);
  }
  ParamPoint p{ModelFamily::tensor_pca, std::vector<double>(v.size())};
  const double s = std::sqrt(r2) / nu;
  for (std::size_t i = 0; i < u.size(); ++i) p.theta[i] = m * v[i] + s * u[i];
  return p;
}

}  // namespace sgdlab
