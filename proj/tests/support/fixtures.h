#ifndef PAN_TESTS_FIXTURES_H
#define PAN_TESTS_FIXTURES_H

// Seeded instance generators and brute-force oracles shared by the unit
// tests and the acceptance suite. Oracles deliberately avoid the library's
// search and enumeration code paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pan/agreement_opt.h"
#include "pan/bosco.h"
#include "pan/econ.h"
#include "pan/rng.h"
#include "pan/topology.h"

namespace pan::testing {

// Files under data/, located through PAN_DATA_DIR (set by ctest).
inline std::string DataPath(const std::string& name) {
  const char* dir = std::getenv("PAN_DATA_DIR");
  return std::string(dir ? dir : "data") + "/" + name;
}

// ------------------------------------------------------------ economics

// Parties X=1 and Y=2 peer with each other. Each has two providers, one
// further peer, an end-host stub and one AS customer. Grants are drawn so
// the agreement has between 1 and `max_segments` new segments.
inline agreement::FlowVolumeInstance RandomFlowInstance(std::uint64_t seed, int max_segments = 3) {
  Rng rng(seed);
  using econ::AsEconProfile;
  using econ::FlowAssignment;
  using econ::PricingFunction;

  const AsId x(1), y(2);
  auto make_party = [&](AsId self, AsId partner, std::uint64_t base, AsEconProfile& p,
                        FlowAssignment& f) {
    p.as_id = self;
    f.owner = self;
    const double betas[] = {1.0, 1.0, 1.25, 0.8};
    for (std::uint64_t k = 0; k < 2; ++k) {
      const AsId prov(base + k);
      p.providers.insert(prov);
      p.provider_prices[prov] = PricingFunction::Make(rng.Uniform(0.2, 2.0), betas[rng.Below(4)]);
      f.per_neighbor[prov] = rng.Uniform(0.5, 3.0);
    }
    const AsId peer(base + 2), cust(base + 3), stub = AsId::StubOf(self);
    p.peers.insert(peer);
    p.peers.insert(partner);
    f.per_neighbor[peer] = rng.Uniform(0.0, 2.0);
    for (AsId c : {cust, stub}) {
      p.customers.insert(c);
      p.customer_prices[c] = PricingFunction::Make(rng.Uniform(0.5, 4.0), betas[rng.Below(4)]);
      f.per_neighbor[c] = rng.Uniform(0.5, 3.0);
    }
    p.internal_cost = econ::InternalCostFunction::Linear(rng.Uniform(0.05, 1.0));
  };

  AsEconProfile px, py;
  FlowAssignment fx, fy;
  make_party(x, y, 10, px, fx);
  make_party(y, x, 20, py, fy);

  // Grantable neighbors: providers and the outside peer.
  const std::vector<AsId> grant_x{AsId(10), AsId(11), AsId(12)};
  const std::vector<AsId> grant_y{AsId(20), AsId(21), AsId(22)};
  const int segments = 1 + static_cast<int>(rng.Below(static_cast<std::uint64_t>(max_segments)));
  econ::Agreement ag;
  ag.party_x = x;
  ag.party_y = y;
  std::set<AsId> gx, gy;
  for (int s = 0; s < segments; ++s) {
    // Alternate with a random start so both sides usually grant something.
    const bool from_x = (s + static_cast<int>(rng.Below(2))) % 2 == 0;
    auto& pool = from_x ? grant_x : grant_y;
    auto& chosen = from_x ? gx : gy;
    for (int tries = 0; tries < 8; ++tries) {
      const AsId z = pool[rng.Below(pool.size())];
      if (chosen.insert(z).second) break;
    }
  }
  for (AsId z : gx) (px.providers.count(z) ? ag.granted_by_x.providers : ag.granted_by_x.peers).insert(z);
  for (AsId z : gy) (py.providers.count(z) ? ag.granted_by_y.providers : ag.granted_by_y.peers).insert(z);

  std::map<econ::PathSegment, double> caps;
  auto add_demand_and_reroute = [&](const AsEconProfile& b, FlowAssignment& f, AsId partner,
                                    const std::set<AsId>& targets) {
    for (AsId z : targets) {
      if (rng.Uniform01() < 0.85) {
        const AsId c = rng.Below(2) ? AsId(b.as_id.value * 10 + 3) : AsId::StubOf(b.as_id);
        const AsId cust = b.customers.count(c) ? c : AsId::StubOf(b.as_id);
        caps[{cust, b.as_id, partner, z}] = rng.Uniform(0.0, 1.5);
      }
      for (AsId p : b.providers) {
        if (rng.Uniform01() < 0.5) {
          const double v = rng.Uniform(0.0, f.per_neighbor[p] / 4.0);
          f.per_segment[{b.as_id, p, z}] = v;
        }
      }
    }
  };
  add_demand_and_reroute(px, fx, y, gy);
  add_demand_and_reroute(py, fy, x, gx);
  return agreement::FlowVolumeInstance::Build(px, fx, py, fy, ag, caps);
}

struct GridOracleResult {
  double product = -std::numeric_limits<double>::infinity();
  std::vector<double> point;
  std::size_t evaluations = 0;
  bool feasible = false;
};

// Exhaustive search over a uniform grid of the decision box, restricted to
// points where both utilities are non-negative. Coordinates with an empty
// range are held at zero; the remaining ones share `budget` evaluations.
inline GridOracleResult GridOracle(const agreement::FlowVolumeInstance& inst, std::size_t budget) {
  const agreement::CompiledInstance ev(inst);
  const auto lo = inst.LowerBounds();
  const auto hi = inst.UpperBounds();
  std::vector<std::size_t> live;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    if (hi[k] > lo[k]) live.push_back(k);
  }
  std::size_t per = 1;
  if (!live.empty()) {
    per = static_cast<std::size_t>(
        std::floor(std::pow(static_cast<double>(budget), 1.0 / static_cast<double>(live.size()))));
    per = std::max<std::size_t>(per, 2);
  }
  GridOracleResult best;
  std::vector<std::size_t> idx(live.size(), 0);
  std::vector<double> p(lo.size(), 0.0);
  while (true) {
    for (std::size_t j = 0; j < live.size(); ++j) {
      const std::size_t k = live[j];
      p[k] = lo[k] + (hi[k] - lo[k]) * static_cast<double>(idx[j]) / static_cast<double>(per - 1);
    }
    const auto u = ev.Evaluate(p);
    ++best.evaluations;
    if (u.u_x >= -1e-12 && u.u_y >= -1e-12 && u.product() > best.product) {
      best.product = u.product();
      best.point = p;
      best.feasible = true;
    }
    std::size_t j = 0;
    while (j < live.size() && ++idx[j] == per) idx[j++] = 0;
    if (j == live.size()) break;
  }
  return best;
}

// Closed-form cash transfer, written independently of the library.
inline double NbsTransfer(double ux, double uy) { return (ux - uy) / 2.0; }

// ------------------------------------------------------------ topology

// Random graph on ASes 1..n: each unordered pair is a provider-customer link
// with a random orientation, a peering, or absent.
inline topo::AsGraph RandomGraph(std::uint64_t seed, std::size_t n, double p_pc = 0.25,
                                 double p_peer = 0.2) {
  Rng rng(seed);
  topo::AsGraph::Builder b;
  for (std::size_t i = 1; i <= n; ++i) b.AddNode(AsId(i));
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i + 1; j <= n; ++j) {
      const double r = rng.Uniform01();
      if (r < p_pc) {
        if (rng.Below(2)) {
          b.AddProviderCustomer(AsId(i), AsId(j));
        } else {
          b.AddProviderCustomer(AsId(j), AsId(i));
        }
      } else if (r < p_pc + p_peer) {
        b.AddPeering(AsId(i), AsId(j));
      }
    }
  }
  return std::move(b).Build();
}

// The example topology with ASes A..I as 1..9.
inline constexpr std::uint64_t kA = 1, kB = 2, kC = 3, kD = 4, kE = 5, kF = 6, kG = 7, kH = 8,
                               kI = 9;

inline std::string ExampleRelationships() {
  return "1|3|-1\n1|4|-1\n2|5|-1\n2|6|-1\n2|7|-1\n4|8|-1\n5|9|-1\n"
         "1|2|0\n3|4|0\n3|5|0\n4|5|0\n5|6|0\n6|7|0\n";
}

inline topo::AsGraph ExampleGraph() {
  std::istringstream in(ExampleRelationships());
  return topo::ParseAsRelationships(in, "example");
}

// Relation of b seen from a, straight from the link list.
inline topo::Rel OracleRel(const topo::AsGraph& g, AsId a, AsId b) {
  for (AsId p : g.Providers(a)) if (p == b) return topo::Rel::kProvider;
  for (AsId p : g.Peers(a)) if (p == b) return topo::Rel::kPeer;
  for (AsId p : g.Customers(a)) if (p == b) return topo::Rel::kCustomer;
  return topo::Rel::kNone;
}

// A triple (a, m, z) is valley-free iff both hops are links and m has a or
// z as a customer.
inline bool OracleGrc(const topo::AsGraph& g, AsId a, AsId m, AsId z) {
  if (a == m || m == z || a == z) return false;
  if (OracleRel(g, a, m) == topo::Rel::kNone || OracleRel(g, m, z) == topo::Rel::kNone) return false;
  return OracleRel(g, m, a) == topo::Rel::kCustomer || OracleRel(g, m, z) == topo::Rel::kCustomer;
}

inline std::set<std::array<AsId, 3>> OracleGrcPaths(const topo::AsGraph& g, AsId src) {
  std::set<std::array<AsId, 3>> out;
  for (AsId m : g.nodes()) {
    for (AsId z : g.nodes()) {
      if (OracleGrc(g, src, m, z)) out.insert({src, m, z});
    }
  }
  return out;
}

// MA paths of src by scanning every triple against every agreement.
// Returns (hops -> direct?) with direct winning over indirect.
inline std::map<std::array<AsId, 3>, bool> OracleMaPaths(
    const topo::AsGraph& g, const std::vector<topo::MutualityAgreement>& mas, AsId src) {
  std::map<std::array<AsId, 3>, bool> out;
  for (AsId m : g.nodes()) {
    for (AsId z : g.nodes()) {
      if (src == m || m == z || src == z) continue;
      if (OracleGrc(g, src, m, z)) continue;
      bool direct = false, indirect = false;
      for (const auto& ma : mas) {
        for (int side = 0; side < 2; ++side) {
          const AsId ben = side ? ma.b : ma.a;
          const AsId partner = side ? ma.a : ma.b;
          const auto& grants = side ? ma.grants_to_b : ma.grants_to_a;
          const bool granted_z = std::find(grants.begin(), grants.end(), z) != grants.end();
          const bool granted_src = std::find(grants.begin(), grants.end(), src) != grants.end();
          if (m == partner && ben == src && granted_z) direct = true;
          if (m == partner && ben == z && granted_src) indirect = true;
        }
      }
      if (direct) {
        out[{src, m, z}] = true;
      } else if (indirect) {
        out[{src, m, z}] = false;
      }
    }
  }
  return out;
}

// ------------------------------------------------------------ bargaining

// Expected post-negotiation utility of X claiming `claim` at true utility
// u, by midpoint integration over Y's utility.
inline double OracleClaimPayoff(const bosco::Claim& claim, double u, const bosco::Strategy& sy,
                                const bosco::UtilityDistribution& uy, std::size_t steps) {
  const double lo = uy.lo(), hi = uy.hi();
  const double h = (hi - lo) / static_cast<double>(steps);
  double acc = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double v = lo + (static_cast<double>(i) + 0.5) * h;
    const auto out = bosco::Settle(claim, sy.ClaimAt(v), u, v);
    if (out.concluded) acc += out.post_u_x * uy.Density(v) * h;
  }
  return acc;
}

struct MonteCarlo {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// E[N] by sampling both utilities and settling the claims.
inline MonteCarlo McNashProduct(const bosco::Strategy* sx, const bosco::Strategy* sy,
                                const bosco::UtilityDistribution& ux,
                                const bosco::UtilityDistribution& uy, std::size_t samples,
                                std::uint64_t seed) {
  Rng rng(seed);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double a = ux.Sample(rng);
    const double b = uy.Sample(rng);
    const auto cx = sx ? sx->ClaimAt(a) : bosco::Claim::Of(a);
    const auto cy = sy ? sy->ClaimAt(b) : bosco::Claim::Of(b);
    const auto out = bosco::Settle(cx, cy, a, b);
    const double n = out.concluded ? out.post_u_x * out.post_u_y : 0.0;
    s1 += n;
    s2 += n * n;
  }
  const double nn = static_cast<double>(samples);
  MonteCarlo mc;
  mc.mean = s1 / nn;
  mc.stderr_ = std::sqrt(std::max(0.0, s2 / nn - mc.mean * mc.mean) / nn);
  return mc;
}

}  // namespace pan::testing

#endif  // PAN_TESTS_FIXTURES_H
