#include "sgdlab/limits/gmm_limits.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include <fmt/format.h>

#include "sgdlab/core/errors.hpp"
#include "sgdlab/models/two_layer.hpp"

namespace sgdlab {

double bgmm_c_alpha(double alpha) { return std::log(1.0 - 2.0 * alpha) - std::log(2.0 * alpha); }
double xor_c_alpha(double alpha) { return std::log(1.0 - 4.0 * alpha) - std::log(4.0 * alpha); }

namespace {

Eigen::MatrixXd gram(std::span<const double> u, std::size_t off, int K) {
  Eigen::MatrixXd R(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = i; j < K; ++j, ++off) R(i, j) = R(j, i) = u[off];
  return R;
}

// Layout shared by both networks: v, m_mu, [m_nu], R upper triangle.
struct Layout {
  int K;
  bool has_nu;
  std::size_t mu() const { return static_cast<std::size_t>(K); }
  std::size_t nu() const { return static_cast<std::size_t>(2 * K); }
  std::size_t r() const { return static_cast<std::size_t>(has_nu ? 3 * K : 2 * K); }
  std::size_t size() const { return r() + static_cast<std::size_t>(K * (K + 1) / 2); }
};

// h = -f + g from the Gaussian functionals; se propagates independent errors.
void assemble(const Layout& L, std::span<const double> u, const GmmExpectations& E, double lambda,
              double alpha, double c_delta, std::span<double> h, std::vector<double>* se) {
  const int K = L.K;
  const double inv_l = std::isinf(lambda) ? 0.0 : 1.0 / lambda;
  auto mnu = [&](int i) { return L.has_nu ? u[L.nu() + i] : 0.0; };
  for (int i = 0; i < K; ++i) {
    const double v = u[i], mm = u[L.mu() + i], mn = mnu(i);
    h[i] = -(mm * E.A_mu[i] + mn * E.A_nu[i] + E.A_perp(i, i) + alpha * v);
    h[L.mu() + i] = -(v * E.A_mu[i] + alpha * mm);
    if (L.has_nu) h[L.nu() + i] = -(v * E.A_nu[i] + alpha * mn);
    if (se) {
      (*se)[i] = std::hypot(mm * E.A_mu_se[i], mn * E.A_nu_se[i], E.A_perp_se(i, i));
      (*se)[L.mu() + i] = std::abs(v) * E.A_mu_se[i];
      if (L.has_nu) (*se)[L.nu() + i] = std::abs(v) * E.A_nu_se[i];
    }
  }
  std::size_t pos = L.r();
  for (int i = 0; i < K; ++i)
    for (int j = i; j < K; ++j, ++pos) {
      const double vi = u[i], vj = u[j];
      h[pos] = -(vi * E.A_perp(i, j) + vj * E.A_perp(j, i) + 2.0 * alpha * u[pos]) +
               c_delta * vi * vj * inv_l * E.B(i, j);
      if (se)
        (*se)[pos] = std::hypot(vi * E.A_perp_se(i, j), vj * E.A_perp_se(j, i),
                                c_delta * vi * vj * inv_l * E.B_se(i, j));
    }
}

GmmExpectations evaluate_at(const GmmExpectationSampler& s, const Layout& L,
                            std::span<const double> u, double lambda) {
  return s.evaluate(u.subspan(0, L.K), u.subspan(L.mu(), L.K),
                    L.has_nu ? u.subspan(L.nu(), L.K) : std::span<const double>{},
                    gram(u, L.r(), L.K), lambda);
}

RhsEstimate mc_rhs(const Layout& L, const Schema& schema, const SummaryVec& u, double lambda,
                   double alpha, double c_delta, McConfig& mc) {
  require_same_schema(u.schema(), schema, "ballistic rhs");
  GmmExpectationSampler sampler(L.K, L.has_nu, mc.samples, mc.stream);
  const auto E = evaluate_at(sampler, L, u.span(), lambda);
  std::vector<double> h(L.size()), se(L.size());
  assemble(L, u.span(), E, lambda, alpha, c_delta, h, &se);
  return {SummaryVec(schema, std::move(h)), std::move(se)};
}

OdeSystem mc_system(const Layout& L, Schema schema, double lambda, double alpha, double c_delta,
                    McConfig mc) {
  auto sampler = std::make_shared<GmmExpectationSampler>(L.K, L.has_nu, mc.samples, mc.stream);
  return {std::move(schema), [=](std::span<const double> u, std::span<double> out) {
            const auto E = evaluate_at(*sampler, L, u, lambda);
            assemble(L, u, E, lambda, alpha, c_delta, out, nullptr);
          }};
}

// Indicator of a strictly positive preactivation, with the 0+/0- tag deciding ties.
bool active(double pre, int tag) { return pre > 0 || (pre == 0 && tag > 0); }

// lambda = infinity functionals: data sit exactly at the mixture centers.
void noiseless_field(const Layout& L, std::span<const double> u, double alpha,
                     const XorSignTags& tags, std::span<double> h) {
  const int K = L.K;
  struct Comp {
    double cm, cn;
    int y;
  };
  static const Comp bgmm_comps[] = {{1, 0, 1}, {-1, 0, 0}};
  static const Comp xor_comps[] = {{1, 0, 1}, {-1, 0, 1}, {0, 1, 0}, {0, -1, 0}};
  std::span<const Comp> comps = L.has_nu ? std::span<const Comp>(xor_comps) : std::span<const Comp>(bgmm_comps);
  const double w = 1.0 / static_cast<double>(comps.size());
  auto tag_of = [](const std::vector<int>& t, int i) { return t.empty() ? 0 : t[i]; };
  GmmExpectations E;
  E.A_mu.assign(K, 0.0);
  E.A_nu.assign(K, 0.0);
  E.A_perp = Eigen::MatrixXd::Zero(K, K);
  E.B = Eigen::MatrixXd::Zero(K, K);
  std::vector<double> pre(K);
  std::vector<int> on(K);
  for (const Comp& c : comps) {
    double out = 0;
    for (int i = 0; i < K; ++i) {
      const double mn = L.has_nu ? u[L.nu() + i] : 0.0;
      pre[i] = c.cm * u[L.mu() + i] + c.cn * mn;
      // A zero preactivation comes from a zero coordinate; the tag is read
      // through the sign of the center.
      const int tag = c.cm != 0 ? static_cast<int>(c.cm) * tag_of(tags.mu, i)
                                : static_cast<int>(c.cn) * tag_of(tags.nu, i);
      on[i] = active(pre[i], tag);
      if (on[i]) out += u[i] * pre[i];
    }
    const double e = sigmoid(out) - c.y;
    for (int i = 0; i < K; ++i) {
      if (!on[i]) continue;
      E.A_mu[i] += w * c.cm * e;
      E.A_nu[i] += w * c.cn * e;
    }
  }
  assemble(L, u, E, std::numeric_limits<double>::infinity(), alpha, 0.0, h, nullptr);
}

void check_ring(std::span<const double> a, double C, const char* what) {
  double s = 0;
  for (double x : a) s += x * x;
  if (std::abs(s - C) > 1e-8)
    throw DomainError(fmt::format("{}: squared norm {} is off the ring C = {}", what, s, C));
}

}  // namespace

RhsEstimate bgmm_ballistic_rhs(const SummaryVec& u, double lambda, double alpha, double c_delta,
                               McConfig& mc) {
  return mc_rhs({2, false}, bgmm_schema(), u, lambda, alpha, c_delta, mc);
}

OdeSystem bgmm_ballistic(double lambda, double alpha, double c_delta, McConfig mc) {
  return mc_system({2, false}, bgmm_schema(), lambda, alpha, c_delta, std::move(mc));
}

RhsEstimate xor_ballistic_rhs(const SummaryVec& u, int K, double lambda, double alpha,
                              double c_delta, McConfig& mc) {
  return mc_rhs({K, true}, xor_schema(K), u, lambda, alpha, c_delta, mc);
}

OdeSystem xor_ballistic(int K, double lambda, double alpha, double c_delta, McConfig mc) {
  return mc_system({K, true}, xor_schema(K), lambda, alpha, c_delta, std::move(mc));
}

SummaryVec bgmm_ballistic_rhs_noiseless(const SummaryVec& u, double alpha) {
  return evaluate(bgmm_noiseless(alpha), u);
}

OdeSystem bgmm_noiseless(double alpha) {
  return {bgmm_schema(), [alpha](std::span<const double> u, std::span<double> out) {
            noiseless_field({2, false}, u, alpha, {}, out);
          }};
}

XorSignTags random_sign_tags(int K, RngStream& rng) {
  XorSignTags t{std::vector<int>(K), std::vector<int>(K)};
  for (int i = 0; i < K; ++i) t.mu[i] = rng.coin() ? 1 : -1;
  for (int i = 0; i < K; ++i) t.nu[i] = rng.coin() ? 1 : -1;
  return t;
}

SummaryVec xor_ballistic_rhs_noiseless(const SummaryVec& u, int K, double alpha,
                                       const XorSignTags& tags) {
  return evaluate(xor_noiseless(K, alpha, tags), u);
}

OdeSystem xor_noiseless(int K, double alpha, XorSignTags tags) {
  if (K < 1) throw DomainError("XOR width must be positive");
  if ((!tags.mu.empty() && tags.mu.size() != static_cast<std::size_t>(K)) ||
      (!tags.nu.empty() && tags.nu.size() != static_cast<std::size_t>(K)))
    throw SchemaError("sign tags must have one entry per hidden unit");
  return {xor_schema(K), [K, alpha, tags = std::move(tags)](std::span<const double> u, std::span<double> out) {
            if (u.size() != Layout{K, true}.size()) throw SchemaError("XOR field size mismatch");
            noiseless_field({K, true}, u, alpha, tags, out);
          }};
}

Schema bgmm_diffusive_schema() {
  static const Schema s{"vt1", "vt2", "mt1", "mt2", "R11", "R12", "R22"};
  return s;
}

SdeSystem bgmm_diffusive(std::array<double, 2> a, double alpha) {
  if (!(alpha > 0 && alpha < 0.25)) throw DomainError("quarter rings exist only for 0 < alpha < 1/4");
  if (a[0] < 0 || a[1] < 0) throw DomainError("ring point must have a_i >= 0");
  check_ring(a, bgmm_c_alpha(alpha), "bgmm_diffusive");
  const double g = alpha - 2.0 * alpha * alpha;
  SdeSystem sys;
  sys.schema = bgmm_diffusive_schema();
  sys.drift = [a, alpha, g](std::span<const double> u, std::span<double> out) {
    const double s = a[0] * (u[0] + u[2]) + a[1] * (u[1] + u[3]);
    for (int i = 0; i < 2; ++i) {
      out[i] = alpha * (u[2 + i] - u[i]) + a[i] * g * s;
      out[2 + i] = alpha * (u[i] - u[2 + i]) + a[i] * g * s;
    }
    for (int j = 4; j < 7; ++j) out[j] = -2.0 * alpha * u[j];
  };
  Eigen::VectorXd p = Eigen::VectorXd::Zero(7);
  p << a[0], a[1], a[0], a[1], 0, 0, 0;
  const Eigen::MatrixXd factor = psd_sqrt(alpha * alpha * p * p.transpose());
  sys.diffusion_factor = [factor](std::span<const double>) { return factor; };
  return sys;
}

Schema xor_diffusive_schema() {
  std::vector<std::string> names{"vt1", "vt2", "vt3", "vt4", "mtmu1", "mtmu2", "mtnu3", "mtnu4"};
  for (int i = 1; i <= 4; ++i)
    for (int j = i; j <= 4; ++j) names.push_back(gram_name(i, j, 4));
  static const Schema s(std::move(names));
  return s;
}

SdeSystem xor_diffusive(std::array<double, 2> a_mu, std::array<double, 2> a_nu, double alpha) {
  if (!(alpha > 0 && alpha < 0.125)) throw DomainError("XOR rings exist only for 0 < alpha < 1/8");
  const double C = xor_c_alpha(alpha);
  check_ring(a_mu, C, "xor_diffusive mu ring");
  check_ring(a_nu, C, "xor_diffusive nu ring");
  const double g = alpha - 4.0 * alpha * alpha;
  SdeSystem sys;
  sys.schema = xor_diffusive_schema();
  // vt_i at i, the paired m coordinate at 4 + i.
  const std::array<double, 4> a{a_mu[0], a_mu[1], a_nu[0], a_nu[1]};
  sys.drift = [a, alpha, g](std::span<const double> u, std::span<double> out) {
    const double s_mu = a[0] * (u[0] + u[4]) + a[1] * (u[1] + u[5]);
    const double s_nu = a[2] * (u[2] + u[6]) + a[3] * (u[3] + u[7]);
    for (int i = 0; i < 4; ++i) {
      const double s = i < 2 ? s_mu : s_nu;
      out[i] = alpha * (u[4 + i] - u[i]) + a[i] * g * s;
      out[4 + i] = alpha * (u[i] - u[4 + i]) + a[i] * g * s;
    }
    for (std::size_t j = 8; j < u.size(); ++j) out[j] = -2.0 * alpha * u[j];
  };
  Eigen::VectorXd P = Eigen::VectorXd::Zero(18), Q = Eigen::VectorXd::Zero(18);
  P(0) = P(4) = a[0];
  P(1) = P(5) = a[1];
  Q(2) = Q(6) = a[2];
  Q(3) = Q(7) = a[3];
  const Eigen::MatrixXd sigma =
      alpha * alpha * (3.0 * P * P.transpose() + 3.0 * Q * Q.transpose() - P * Q.transpose() - Q * P.transpose());
  const Eigen::MatrixXd factor = psd_sqrt(sigma);
  sys.diffusion_factor = [factor](std::span<const double>) { return factor; };
  return sys;
}

}  // namespace sgdlab
