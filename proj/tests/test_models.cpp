#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sgdlab/core/errors.hpp"
#include "sgdlab/core/rng.hpp"
#include "sgdlab/fixedpoints/fixed_points.hpp"
#include "sgdlab/models/any_model.hpp"

using namespace sgdlab;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

PcaDatum dense_datum(const TensorPcaModel& m, RngStream& rng) {
  return PcaDatum{sample_dense_noise(m, rng)};
}

template <class Model, class D>
std::vector<double> fd_grad(const Model& model, ParamPoint x, const D& d, double h) {
  std::vector<double> g(x.theta.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x0 = x.theta[i];
    x.theta[i] = x0 + h;
    const double lp = loss(model, x, d);
    x.theta[i] = x0 - h;
    const double lm = loss(model, x, d);
    x.theta[i] = x0;
    g[i] = (lp - lm) / (2 * h);
  }
  return g;
}

// Pre-activations W_i . X for a network point.
std::vector<double> preacts(int K, int N, const ParamPoint& p, const MixtureDatum& d) {
  std::vector<double> out(K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < N; ++j) out[i] += p.theta[K + i * N + j] * d.x[j];
  return out;
}

double ks_stat(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i;
    else ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("tensor PCA gradient matches finite differences") {
    for (int k : {2, 3}) {
      CAPTURE(k);
      auto model = TensorPcaModel::with_axis_spike(5, k, 1.7, 0.3);
      auto rng = make_rng(11, k);
      ParamPoint x{ModelFamily::tensor_pca, std::vector<double>(5)};
      rng.fill_normal(x.theta);
      const auto d = dense_datum(model, rng);
      const auto g = grad_loss(model, x, d);
      const auto fd = fd_grad(model, x, d, 1e-5);
      for (std::size_t i = 0; i < g.size(); ++i) CHECK(rel_err(g[i], fd[i]) <= 1e-6);
    }
  }

  TEST_CASE("lazy noise gradient equals the materialized tensor gradient") {
    for (int k : {2, 3}) {
      for (int n : {3, 15}) {
        CAPTURE(k);
        CAPTURE(n);
        auto model = TensorPcaModel::with_axis_spike(n, k, 2.0, 0.1);
        auto rng = make_rng(5, 100 * k + n);
        ParamPoint x{ModelFamily::tensor_pca, std::vector<double>(n)};
        rng.fill_normal(x.theta);
        const PcaDatum lazy = sample_datum(model, rng);
        auto mrng = make_rng(6, n);
        const auto dense =
            materialize_noise(model, x.theta, std::get<LazyTensorNoise>(lazy.noise), mrng);
        const auto g1 = grad_loss(model, x, lazy);
        const auto g2 = grad_loss(model, x, PcaDatum{dense});
        for (std::size_t i = 0; i < g1.size(); ++i) CHECK(std::abs(g1[i] - g2[i]) <= 1e-10);
      }
    }
  }

  TEST_CASE("tensor PCA gradient vanishes at the origin") {
    auto model = TensorPcaModel::with_axis_spike(8, 2, 1.2, 0.5);
    auto rng = make_rng(1, 1);
    ParamPoint x{ModelFamily::tensor_pca, std::vector<double>(8, 0.0)};
    for (double g : grad_loss(model, x, sample_datum(model, rng))) CHECK(g == 0.0);
    for (double g : grad_loss(model, x, dense_datum(model, rng))) CHECK(g == 0.0);
  }

  TEST_CASE("summaries of aligned points") {
    auto pca = TensorPcaModel::with_axis_spike(6, 3, 1.0, 0.0);
    ParamPoint x{ModelFamily::tensor_pca, pca.spike()};
    auto u = summary(pca, x);
    CHECK(u.at("m") == doctest::Approx(1.0));
    CHECK(u.at("r2") == doctest::Approx(0.0));

    auto bg = BgmmModel::with_axis_mean(7, 10.0, 0.1);
    ParamPoint w{ModelFamily::bgmm, std::vector<double>(2 + 14, 0.0)};
    w.theta[0] = 0.4;
    w.theta[1] = -2.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 7; ++j) w.theta[2 + 7 * i + j] = bg.mu()[j];
    auto s = summary(bg, w);
    CHECK(s.at("m1") == doctest::Approx(1.0));
    CHECK(s.at("m2") == doctest::Approx(1.0));
    CHECK(s.at("v2") == -2.0);
    for (const char* r : {"R11", "R12", "R22"}) CHECK(std::abs(s.at(r)) <= 1e-14);
  }

  TEST_CASE("schema sizes") {
    CHECK(bgmm_schema().size() == 7);
    CHECK(xor_schema(4).size() == 22);
    CHECK(gram_name(1, 2, 4) == "R12");
  }

  TEST_CASE("tensor_pca_V closed form") {
    auto model = TensorPcaModel::with_axis_spike(4, 2, 1.0, 0.0);
    ParamPoint e1{ModelFamily::tensor_pca, {1, 0, 0, 0}};
    const auto V = tensor_pca_V(model, e1);
    CHECK(V.c_xx + V.c_id == doctest::Approx(16.0));
    CHECK(V.c_id == doctest::Approx(8.0));
    ParamPoint zero{ModelFamily::tensor_pca, {0, 0, 0, 0}};
    const auto V0 = tensor_pca_V(TensorPcaModel::with_axis_spike(4, 3, 1.0, 0.0), zero);
    CHECK(V0.c_xx == 0.0);
    CHECK(V0.c_id == 0.0);
  }

  TEST_CASE("noise gradient covariance matches V by Monte Carlo") {
    const int n = 20;
    auto model = TensorPcaModel::with_axis_spike(n, 2, 1.0, 0.0);
    auto rng = make_rng(21, 0);
    ParamPoint x{ModelFamily::tensor_pca, std::vector<double>(n)};
    rng.fill_normal(x.theta);
    for (double& t : x.theta) t *= 1.0 / std::sqrt(double(n));
    const auto V = tensor_pca_V(model, x);
    const int M = 100000;
    std::vector<double> acc(n * n, 0.0);
    for (int s = 0; s < M; ++s) {
      const auto c = noise_contraction(model, std::get<LazyTensorNoise>(sample_datum(model, rng).noise),
                                       x.theta);
      // grad H = -2 * contraction
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc[i * n + j] += 4.0 * c[i] * c[j];
    }
    double worst = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double want = V.c_xx * x.theta[i] * x.theta[j] + (i == j ? V.c_id : 0.0);
        const double got = acc[i * n + j] / M;
        // Off-diagonals are tiny, so compare against the diagonal scale.
        worst = std::max(worst, std::abs(got - want) / V.c_id);
      }
    CHECK(worst <= 0.05);
  }

  TEST_CASE("dense noise contraction has the same covariance") {
    const int n = 4;
    auto model = TensorPcaModel::with_axis_spike(n, 3, 1.0, 0.0);
    auto rng = make_rng(22, 0);
    ParamPoint x{ModelFamily::tensor_pca, {0.5, -0.3, 0.8, 0.1}};
    const auto V = tensor_pca_V(model, x);
    const int M = 40000;
    double d00 = 0, d01 = 0;
    for (int s = 0; s < M; ++s) {
      const auto c = noise_contraction(sample_dense_noise(model, rng), x.theta);
      d00 += 4 * c[0] * c[0];
      d01 += 4 * c[0] * c[1];
    }
    CHECK(d00 / M == doctest::Approx(V.c_xx * 0.25 + V.c_id).epsilon(0.05));
    CHECK(std::abs(d01 / M - V.c_xx * 0.5 * -0.3) <= 0.05 * V.c_id);
  }

  TEST_CASE("network gradients match finite differences away from kinks") {
    auto rng = make_rng(31, 0);
    auto bg = BgmmModel::with_axis_mean(6, 4.0, 0.1);
    auto xr = XorGmmModel::with_axis_means(6, 4, 4.0, 0.1);
    int checked = 0;
    for (int trial = 0; trial < 50 && checked < 10; ++trial) {
      auto p = random_init(bg, rng);
      for (double& t : p.theta) t *= 3;
      auto d = sample_datum(bg, rng);
      auto pre = preacts(2, 6, p, d);
      if (std::abs(pre[0]) <= 0.1 || std::abs(pre[1]) <= 0.1) continue;
      auto g = grad_loss(bg, p, d);
      auto fd = fd_grad(bg, p, d, 1e-5);
      for (std::size_t i = 0; i < g.size(); ++i) CHECK(rel_err(g[i], fd[i]) <= 1e-4);
      ++checked;
    }
    CHECK(checked == 10);
    checked = 0;
    for (int trial = 0; trial < 200 && checked < 10; ++trial) {
      auto p = random_init(xr, rng);
      auto d = sample_datum(xr, rng);
      auto pre = preacts(4, 6, p, d);
      if (std::any_of(pre.begin(), pre.end(), [](double a) { return std::abs(a) <= 0.1; })) continue;
      auto g = grad_loss(xr, p, d);
      auto fd = fd_grad(xr, p, d, 1e-5);
      for (std::size_t i = 0; i < g.size(); ++i) CHECK(rel_err(g[i], fd[i]) <= 1e-4);
      ++checked;
    }
    CHECK(checked == 10);
  }

  TEST_CASE("dimension mismatch is a schema error") {
    auto bg = BgmmModel::with_axis_mean(6, 4.0, 0.1);
    auto rng = make_rng(1, 2);
    ParamPoint p{ModelFamily::bgmm, std::vector<double>(5)};
    CHECK_THROWS_AS(grad_loss(bg, p, sample_datum(bg, rng)), SchemaError);
    auto pca = TensorPcaModel::with_axis_spike(4, 2, 1.0, 0.0);
    ParamPoint q{ModelFamily::tensor_pca, std::vector<double>(3)};
    CHECK_THROWS_AS(grad_loss(pca, q, sample_datum(pca, rng)), SchemaError);
  }

  TEST_CASE("noise-free bGMM data sits on the means") {
    auto bg = BgmmModel::with_axis_mean(5, INFINITY, 0.1);
    auto rng = make_rng(2, 0);
    for (int s = 0; s < 20; ++s) {
      auto d = sample_datum(bg, rng);
      const double sign = d.y == 1 ? 1.0 : -1.0;
      for (int j = 0; j < 5; ++j) CHECK(d.x[j] == sign * bg.mu()[j]);
    }
  }

  TEST_CASE("bGMM sampler moments") {
    auto bg = BgmmModel::with_axis_mean(3, 1.0, 0.1);
    auto rng = make_rng(3, 0);
    double s1 = 0, s2 = 0;
    int count = 0, ones = 0;
    const int M = 100000;
    for (int s = 0; s < M; ++s) {
      auto d = sample_datum(bg, rng);
      CHECK_UNARY(d.y == 0 || d.y == 1);
      if (d.y != 1) continue;
      ++ones;
      const double p = d.x[0];
      s1 += p;
      s2 += p * p;
      ++count;
    }
    const double mean = s1 / count, var = s2 / count - mean * mean;
    CHECK(std::abs(mean - 1.0) <= 0.01);
    CHECK(std::abs(var - 1.0) <= 0.02);
    CHECK(std::abs(double(ones) / M - 0.5) <= 0.01);
  }

  TEST_CASE("XOR sampler: mean projections are uncorrelated within a class") {
    auto xr = XorGmmModel::with_axis_means(6, 4, 4.0, 0.1);
    auto rng = make_rng(4, 0);
    double s[2][5] = {};
    for (int t = 0; t < 100000; ++t) {
      auto d = sample_datum(xr, rng);
      const double a = d.x[0], b = d.x[1];  // axis means: mu = e1, nu = e2
      auto& c = s[d.y];
      c[0] += 1;
      c[1] += a;
      c[2] += b;
      c[3] += a * b;
    }
    for (auto& c : s) {
      const double cov = c[3] / c[0] - (c[1] / c[0]) * (c[2] / c[0]);
      CHECK(std::abs(cov) <= 0.01);
    }
  }

  TEST_CASE("XOR random init concentrates") {
    const int N = 10000;
    auto xr = XorGmmModel::with_axis_means(N, 4, 1.0, 0.1);
    auto rng = make_rng(5, 0);
    auto u = summary(xr, random_init(xr, rng));
    for (int i = 1; i <= 4; ++i) {
      CHECK(std::abs(u.at(gram_name(i, i, 4)) - 1.0) <= 0.05);
      CHECK(std::abs(u.at("mmu" + std::to_string(i))) <= 0.03);
    }
  }

  TEST_CASE("population loss examples") {
    auto pca = TensorPcaModel::with_axis_spike(4, 2, 1.0, 0.0);
    CHECK(population_loss(pca, SummaryVec(tensor_pca_schema(), {0, 0})) == 0.0);
    auto pca3 = TensorPcaModel::with_axis_spike(4, 3, 2.0, 0.0);
    // -2*2*0.5^3 + (0.25 + 0.75)^3
    CHECK(population_loss(pca3, SummaryVec(tensor_pca_schema(), {0.5, 0.75})) ==
          doctest::Approx(0.5));

    auto bg = BgmmModel::with_axis_mean(4, INFINITY, 0.1);
    CHECK(population_loss(bg, SummaryVec(bgmm_schema(), std::vector<double>(7, 0.0))) ==
          doctest::Approx(std::log(2.0)));
    const double C = bgmm_c_alpha(0.1);
    CHECK(C == doctest::Approx(std::log(4.0)));
    const double a = std::sqrt(C);
    SummaryVec st(bgmm_schema(), {a, -a, a, -a, 0, 0, 0});
    CHECK(population_loss(bg, st) == doctest::Approx(std::log(1.25) + 0.2 * std::log(4.0)));
    CHECK(population_loss(bg, st) == doctest::Approx(0.50046).epsilon(1e-3));
    CHECK_THROWS_AS(population_loss(bg, SummaryVec(tensor_pca_schema(), {0, 0})), SchemaError);
  }

  TEST_CASE("zero-step runs record only the start") {
    auto pca = TensorPcaModel::with_axis_spike(10, 2, 1.0, 0.0);
    auto rng = make_rng(7, 0);
    auto x0 = random_init(pca, rng);
    auto traj = sgd_run(pca, x0, 0.1, 0, rng);
    REQUIRE(traj.size() == 1);
    CHECK(traj.times()[0] == 0.0);
    CHECK(traj.back().values() == summary(pca, x0).values());

    auto bg = BgmmModel::with_axis_mean(10, 10.0, 0.1);
    auto p0 = random_init(bg, rng);
    auto tb = sgd_run(bg, p0, 0.1, 0, rng);
    REQUIRE(tb.size() == 1);
    CHECK(tb.back().values() == summary(bg, p0).values());
  }

  TEST_CASE("recorded times are step times delta") {
    auto pca = TensorPcaModel::with_axis_spike(10, 2, 1.0, 0.0);
    auto rng = make_rng(7, 1);
    auto traj = sgd_run(pca, random_init(pca, rng), 0.05, 23, rng, 5);
    // steps 0, 5, 10, 15, 20, 23
    REQUIRE(traj.size() == 6);
    CHECK(traj.times()[1] == doctest::Approx(0.25));
    CHECK(traj.t_end() == doctest::Approx(23 * 0.05));
  }

  TEST_CASE("runs blow up into a divergence error") {
    auto pca = TensorPcaModel::with_axis_spike(10, 3, 1.0, 0.0);
    auto rng = make_rng(8, 0);
    auto x0 = warm_start(pca, 0.0, 100.0, rng);
    try {
      (void)sgd_run(pca, x0, 1.0, 1000, rng);
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.step >= 1);
      CHECK(e.step <= 1000);
    }
  }

  TEST_CASE("warm starts reproduce their targets") {
    auto rng = make_rng(9, 0);
    auto pca = TensorPcaModel::with_axis_spike(50, 2, 1.0, 0.0);
    auto u = summary(pca, warm_start(pca, 0.3, 0.7, rng));
    CHECK(u.at("m") == doctest::Approx(0.3));
    CHECK(u.at("r2") == doctest::Approx(0.7));

    auto bg = BgmmModel::with_axis_mean(30, 10.0, 0.1);
    SummaryVec tb(bgmm_schema(), {1.0, -0.5, 0.7, -0.2, 0.5, 0.1, 0.3});
    auto ub = summary(bg, warm_start(bg, tb, rng));
    for (std::size_t i = 0; i < 7; ++i) CHECK(ub[i] == doctest::Approx(tb[i]).epsilon(1e-9));

    auto xr = XorGmmModel::with_axis_means(30, 4, 10.0, 0.1);
    std::vector<double> vals(22, 0.0);
    for (int i = 0; i < 4; ++i) {
      vals[i] = 0.5 * (i + 1);
      vals[4 + i] = 0.1 * i;
      vals[8 + i] = -0.2 * i;
    }
    for (int i = 1; i <= 4; ++i) vals[xor_schema(4).index(gram_name(i, i, 4))] = 0.2 * i;
    vals[xor_schema(4).index(gram_name(1, 3, 4))] = 0.1;
    SummaryVec tx(xor_schema(4), vals);
    auto ux = summary(xr, warm_start(xr, tx, rng));
    for (std::size_t i = 0; i < 22; ++i) CHECK(std::abs(ux[i] - tx[i]) <= 1e-9);
  }

  TEST_CASE("summary invariants hold along network runs") {
    auto xr = XorGmmModel::with_axis_means(40, 4, 10.0, 0.1);
    auto rng = make_rng(10, 0);
    auto traj = sgd_run(xr, random_init(xr, rng), 1.0 / 40, 2000, rng, 50);
    for (std::size_t r = 0; r < traj.size(); ++r) {
      auto u = traj.point(r);
      for (int i = 1; i <= 4; ++i) {
        CHECK(u.at(gram_name(i, i, 4)) >= 0.0);
        for (int j = i + 1; j <= 4; ++j) {
          const double rij = u.at(gram_name(i, j, 4));
          CHECK(rij * rij <= u.at(gram_name(i, i, 4)) * u.at(gram_name(j, j, 4)) * (1 + 1e-8) + 1e-14);
        }
      }
    }
  }

  TEST_CASE("PCA k=2 above threshold approaches sqrt(lambda - 1)") {
    const int n = 2000;
    auto pca = TensorPcaModel::with_axis_spike(n, 2, 1.2, 0.0);
    auto rng = make_rng(12, 0);
    auto traj = sgd_run(pca, warm_start(pca, 0.3, 1.0, rng), 1.0 / n, 20 * n, rng, n);
    const auto end = traj.back();
    CHECK(std::abs(end.at("m")) == doctest::Approx(std::sqrt(0.2)).epsilon(0.1));
    CHECK(end.at("r2") + end.at("m") * end.at("m") == doctest::Approx(1.2).epsilon(0.1));
  }

  TEST_CASE("bGMM endpoints land near a noiseless fixed-point set") {
    const int N = 500;
    auto bg = BgmmModel::with_axis_mean(N, 100.0, 0.1);
    auto rng = make_rng(13, 0);
    auto traj = sgd_run(bg, random_init(bg, rng), 1.0 / N, 100 * N, rng, 100 * N);
    const auto fps = bgmm_fixed_points(0.1);
    // Runs end on a stable point or on one of the quarter rings.
    double best = INFINITY;
    for (const auto& f : fps) best = std::min(best, f.distance(traj.back()));
    CHECK(best <= 0.1);
  }

  TEST_CASE("PCA summary and loss law are rotation invariant") {
    const int n = 5, k = 3;
    auto rng = make_rng(14, 0);
    // Random orthogonal Q from a Householder reflection.
    std::vector<double> h(n);
    rng.fill_normal(h);
    const double hn = norm(h);
    for (double& t : h) t /= hn;
    auto reflect = [&](std::vector<double> v) {
      double c = 0;
      for (int i = 0; i < n; ++i) c += h[i] * v[i];
      for (int i = 0; i < n; ++i) v[i] -= 2 * c * h[i];
      return v;
    };
    auto base = TensorPcaModel::with_axis_spike(n, k, 1.5, 0.2);
    TensorPcaModel rot(n, k, 1.5, 0.2, reflect(base.spike()));
    ParamPoint x{ModelFamily::tensor_pca, std::vector<double>(n)};
    rng.fill_normal(x.theta);
    ParamPoint qx{ModelFamily::tensor_pca, reflect(x.theta)};
    auto u1 = summary(base, x), u2 = summary(rot, qx);
    CHECK(u1.at("m") == doctest::Approx(u2.at("m")));
    CHECK(u1.at("r2") == doctest::Approx(u2.at("r2")));

    const int M = 10000;
    std::vector<double> l1(M), l2(M);
    for (int s = 0; s < M; ++s) {
      l1[s] = loss(base, x, dense_datum(base, rng));
      l2[s] = loss(rot, qx, dense_datum(rot, rng));
    }
    // Two-sample KS critical value at level 0.01.
    CHECK(ks_stat(l1, l2) <= 1.628 * std::sqrt(2.0 / M));
  }
}
