#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "sgdlab/core/errors.hpp"
#include "sgdlab/fixedpoints/fixed_points.hpp"
#include "sgdlab/models/two_layer.hpp"

namespace sgdlab {

namespace {

using Unit = RingPiece::Unit;

FixedPointRecord make_record(std::string label, Stability s, Schema schema, std::string kind,
                             double C) {
  FixedPointRecord r;
  r.label = std::move(label);
  r.stability = s;
  r.schema = std::move(schema);
  r.kind = std::move(kind);
  r.radius2 = C;
  return r;
}

RingPiece origin_piece(std::size_t dim) { return RingPiece{std::vector<double>(dim, 0.0), {}, 0, 0}; }

// Union-find over partition indices.
struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(static_cast<std::size_t>(n)) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  void join(int a, int b) { p[find(a)] = find(b); }
};

constexpr const char* kBlockName[4] = {"mu+", "mu-", "nu+", "nu-"};

int encode(const std::vector<int>& block_of) {
  int code = 0;
  for (auto it = block_of.rbegin(); it != block_of.rend(); ++it) code = code * 5 + (*it + 1);
  return code;
}

std::string describe_partition(const XorPartition& p) {
  std::string out;
  for (int b = 0; b < 4; ++b) {
    std::vector<int> members;
    for (std::size_t i = 0; i < p.block_of.size(); ++i)
      if (p.block_of[i] == b) members.push_back(static_cast<int>(i) + 1);
    if (!members.empty()) out += fmt::format("{}{{{}}}", kBlockName[b], fmt::join(members, ","));
  }
  return out;
}

std::string describe_mask(unsigned mask) {
  std::vector<std::string> names;
  for (int b = 0; b < 4; ++b)
    if (mask & (1u << b)) names.emplace_back(kBlockName[b]);
  return fmt::format("blocks({})", fmt::join(names, ","));
}

}  // namespace

std::vector<FixedPointRecord> bgmm_fixed_points(double alpha) {
  if (!(alpha > 0)) throw DomainError("alpha must be positive");
  const Schema schema = bgmm_schema();
  std::vector<FixedPointRecord> out;
  const bool origin_stable = alpha >= 0.25;
  auto origin = make_record(origin_stable ? "stable:origin" : "unstable:origin",
                            origin_stable ? Stability::stable : Stability::unstable, schema, "point", 0);
  origin.pieces.push_back(origin_piece(schema.size()));
  out.push_back(std::move(origin));
  if (alpha < 0.25) {
    const double C = bgmm_c_alpha(alpha);
    // Unit i moves v_i and m_i together (v = m on every fixed point).
    auto unit = [](int block, int i, double s) { return Unit{block, {{i, s}, {2 + i, s}}}; };
    for (double s : {1.0, -1.0}) {
      auto r = make_record(s > 0 ? "unstable:quarter(+,+)" : "unstable:quarter(-,-)", Stability::unstable,
                           schema, "ring", C);
      r.pieces.push_back(RingPiece{std::vector<double>(7, 0.0), {unit(0, 0, s), unit(0, 1, s)}, 1, C});
      out.push_back(std::move(r));
    }
    for (double s : {1.0, -1.0}) {
      auto r = make_record(s > 0 ? "stable:(+,-)" : "stable:(-,+)", Stability::stable, schema, "point", C);
      r.pieces.push_back(RingPiece{std::vector<double>(7, 0.0), {unit(0, 0, s), unit(1, 1, -s)}, 2, C});
      out.push_back(std::move(r));
    }
  }
  const OdeSystem sys = bgmm_noiseless(alpha);
  RngStream rng(0, 0);
  for (auto& r : out) r.residual = max_residual(r, sys, rng);
  return out;
}

unsigned XorPartition::nonempty_mask() const {
  unsigned m = 0;
  for (int b : block_of)
    if (b >= 0) m |= 1u << b;
  return m;
}

XorConnectivity xor_connectivity(int K) {
  if (K < 1 || K > 10) throw DomainError("XOR partition enumeration supports 1 <= K <= 10");
  int total = 1;
  for (int i = 0; i < K; ++i) total *= 5;
  XorConnectivity rep;
  rep.partitions.resize(static_cast<std::size_t>(total));
  for (int code = 0; code < total; ++code) {
    auto& bo = rep.partitions[code].block_of;
    bo.resize(static_cast<std::size_t>(K));
    for (int i = 0, c = code; i < K; ++i, c /= 5) bo[i] = c % 5 - 1;
  }
  // Moving one unit between a block and I_0 is an edge as long as no block
  // becomes empty; edges are symmetric, so it suffices to add moves into I_0.
  Dsu dsu(total);
  for (int code = 0; code < total; ++code) {
    const auto& bo = rep.partitions[code].block_of;
    std::array<int, 4> size{};
    for (int b : bo)
      if (b >= 0) ++size[b];
    for (int i = 0; i < K; ++i) {
      if (bo[i] < 0 || size[bo[i]] < 2) continue;
      auto moved = bo;
      moved[i] = -1;
      dsu.join(code, encode(moved));
    }
  }
  std::map<int, int> id;
  rep.component_of.resize(static_cast<std::size_t>(total));
  for (int code = 0; code < total; ++code) {
    const int root = dsu.find(code);
    auto [it, fresh] = id.emplace(root, static_cast<int>(id.size()));
    rep.component_of[code] = it->second;
    if (fresh && rep.partitions[code].nonempty_mask() == 0xF) ++rep.stable_components;
  }
  rep.components = static_cast<int>(id.size());
  return rep;
}

RingPiece xor_piece(const XorPartition& p, int K, double C) {
  const std::size_t dim = xor_schema(K).size();
  RingPiece piece{std::vector<double>(dim, 0.0), {}, 4, C};
  for (int i = 0; i < K; ++i) {
    const int b = p.block_of[i];
    if (b < 0) continue;
    // mu blocks: v = a, m_mu = +-a. nu blocks: v = -a, m_nu = +-a.
    const bool mu = b < 2;
    const double sm = b % 2 == 0 ? 1.0 : -1.0;
    const int m_index = (mu ? K : 2 * K) + i;
    piece.units.push_back(Unit{b, {{i, mu ? 1.0 : -1.0}, {m_index, sm}}});
  }
  return piece;
}

std::vector<FixedPointRecord> xor_fixed_points(double alpha, int K, XorConnectivity* report) {
  if (!(alpha > 0)) throw DomainError("alpha must be positive");
  if (K < 4) throw DomainError("XOR fixed-point taxonomy needs K >= 4");
  const Schema schema = xor_schema(K);
  std::vector<FixedPointRecord> out;
  if (alpha >= 0.125) {
    auto r = make_record("stable:origin", Stability::stable, schema, "point", 0);
    r.pieces.push_back(origin_piece(schema.size()));
    out.push_back(std::move(r));
    if (report) *report = XorConnectivity{1, 1, {}, {}};
  } else {
    const double C = xor_c_alpha(alpha);
    XorConnectivity conn = xor_connectivity(K);
    std::vector<std::vector<int>> members(static_cast<std::size_t>(conn.components));
    for (std::size_t code = 0; code < conn.partitions.size(); ++code)
      members[conn.component_of[code]].push_back(static_cast<int>(code));
    std::map<std::string, int> seen;
    for (const auto& mem : members) {
      const XorPartition& first = conn.partitions[mem.front()];
      const unsigned mask = first.nonempty_mask();
      const Stability s = mask == 0xF ? Stability::stable : Stability::unstable;
      std::string body = mask == 0 ? "origin" : mem.size() == 1 ? describe_partition(first) : describe_mask(mask);
      if (int n = seen[body]++; n > 0) body += fmt::format("#{}", n);
      auto r = make_record(fmt::format("{}:{}", stability_name(s), body), s, schema,
                           mask == 0 ? "point" : "partition", mask == 0 ? 0.0 : C);
      for (int code : mem) r.pieces.push_back(xor_piece(conn.partitions[code], K, C));
      out.push_back(std::move(r));
    }
    if (report) *report = std::move(conn);
  }
  const OdeSystem sys = xor_noiseless(K, alpha);
  RngStream rng(0, 0);
  for (auto& r : out) r.residual = max_residual(r, sys, rng, 1);
  return out;
}

}  // namespace sgdlab
