#include "sgdlab/limits/gaussian_expectations.hpp"

#include <cmath>

#include "sgdlab/core/errors.hpp"
#include "sgdlab/core/linalg.hpp"
#include "sgdlab/models/two_layer.hpp"

namespace sgdlab {

GmmExpectationSampler::GmmExpectationSampler(int K, bool xor_means, int samples, RngStream& stream)
    : K_(K), xor_(xor_means), pairs_((samples + 1) / 2) {
  if (samples < 1) throw DomainError("Monte Carlo needs at least one sample");
  base_.resize(static_cast<std::size_t>(pairs_) * (K + 2));
  stream.fill_normal(base_);
}

GmmExpectations GmmExpectationSampler::evaluate(std::span<const double> v,
                                                std::span<const double> m_mu,
                                                std::span<const double> m_nu,
                                                const Eigen::MatrixXd& R, double lambda) const {
  const int K = K_;
  const Eigen::MatrixXd S = psd_sqrt(R);
  const double s = std::isinf(lambda) ? 0.0 : 1.0 / std::sqrt(lambda);

  // Mixture components: (coefficient on mu, coefficient on nu, label).
  struct Comp {
    double cm, cn;
    int y;
  };
  std::vector<Comp> comps;
  if (xor_) comps = {{1, 0, 1}, {-1, 0, 1}, {0, 1, 0}, {0, -1, 0}};
  else comps = {{1, 0, 1}, {-1, 0, 0}};
  const double wcomp = 1.0 / (2.0 * comps.size());  // antithetic twin times components

  // Accumulators: per-pair means, then first and second moments across pairs.
  const int nstat = 2 * K + 2 * K * K;
  std::vector<double> sum(nstat, 0.0), sum2(nstat, 0.0), cur(nstat);
  std::vector<double> xi(K), pre(K);
  std::vector<double> eta(K);
  for (int p = 0; p < pairs_; ++p) {
    const double* b = base_.data() + static_cast<std::size_t>(p) * (K + 2);
    std::fill(cur.begin(), cur.end(), 0.0);
    for (int twin = 0; twin < 2; ++twin) {
      const double sg = twin == 0 ? 1.0 : -1.0;
      const double zm = sg * s * b[0];
      const double zn = xor_ ? sg * s * b[1] : 0.0;
      for (int i = 0; i < K; ++i) eta[i] = sg * s * b[2 + i];
      for (int i = 0; i < K; ++i) {
        double acc = 0;
        for (int j = 0; j < K; ++j) acc += S(i, j) * eta[j];
        xi[i] = acc;
      }
      for (const Comp& c : comps) {
        double out = 0;
        for (int i = 0; i < K; ++i) {
          const double mn = xor_ ? m_nu[i] : 0.0;
          pre[i] = m_mu[i] * (c.cm + zm) + mn * (c.cn + zn) + xi[i];
          if (pre[i] >= 0) out += v[i] * pre[i];
        }
        const double e = sigmoid(out) - c.y;
        const double xmu = c.cm + zm, xnu = c.cn + zn;
        for (int i = 0; i < K; ++i) {
          if (pre[i] < 0) continue;
          cur[i] += wcomp * xmu * e;
          cur[K + i] += wcomp * xnu * e;
          for (int j = 0; j < K; ++j) {
            cur[2 * K + i * K + j] += wcomp * xi[j] * e;
            if (pre[j] >= 0) cur[2 * K + K * K + i * K + j] += wcomp * e * e;
          }
        }
      }
    }
    for (int q = 0; q < nstat; ++q) {
      sum[q] += cur[q];
      sum2[q] += cur[q] * cur[q];
    }
  }
  const double n = pairs_;
  auto mean = [&](int q) { return sum[q] / n; };
  auto se = [&](int q) {
    if (pairs_ < 2) return 0.0;
    const double var = std::max(sum2[q] / n - mean(q) * mean(q), 0.0) * n / (n - 1);
    return std::sqrt(var / n);
  };
  GmmExpectations r;
  r.A_mu.resize(K);
  r.A_nu.resize(K);
  r.A_mu_se.resize(K);
  r.A_nu_se.resize(K);
  r.A_perp.resize(K, K);
  r.B.resize(K, K);
  r.A_perp_se.resize(K, K);
  r.B_se.resize(K, K);
  for (int i = 0; i < K; ++i) {
    r.A_mu[i] = mean(i);
    r.A_mu_se[i] = se(i);
    r.A_nu[i] = xor_ ? mean(K + i) : 0.0;
    r.A_nu_se[i] = xor_ ? se(K + i) : 0.0;
    for (int j = 0; j < K; ++j) {
      r.A_perp(i, j) = mean(2 * K + i * K + j);
      r.A_perp_se(i, j) = se(2 * K + i * K + j);
      r.B(i, j) = mean(2 * K + K * K + i * K + j);
      r.B_se(i, j) = se(2 * K + K * K + i * K + j);
    }
  }
  return r;
}

namespace {

Eigen::MatrixXd gram_from(std::span<const double> u, std::size_t offset, int K) {
  Eigen::MatrixXd R(K, K);
  std::size_t pos = offset;
  for (int i = 0; i < K; ++i)
    for (int j = i; j < K; ++j, ++pos) R(i, j) = R(j, i) = u[pos];
  return R;
}

}  // namespace

GmmExpectations bgmm_gaussian_expectations(const SummaryVec& u, double lambda, McConfig& mc) {
  require_same_schema(u.schema(), bgmm_schema(), "bgmm_gaussian_expectations");
  GmmExpectationSampler sampler(2, false, mc.samples, mc.stream);
  const auto x = u.span();
  return sampler.evaluate(x.subspan(0, 2), x.subspan(2, 2), {}, gram_from(x, 4, 2), lambda);
}

GmmExpectations xor_gaussian_expectations(const SummaryVec& u, double lambda, McConfig& mc) {
  const std::size_t n = u.size();
  int K = 1;
  while (static_cast<std::size_t>(3 * K + K * (K + 1) / 2) < n) ++K;
  require_same_schema(u.schema(), xor_schema(K), "xor_gaussian_expectations");
  GmmExpectationSampler sampler(K, true, mc.samples, mc.stream);
  const auto x = u.span();
  return sampler.evaluate(x.subspan(0, K), x.subspan(K, K), x.subspan(2 * K, K),
                          gram_from(x, 3 * K, K), lambda);
}

}  // namespace sgdlab
