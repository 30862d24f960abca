#include "pan/econ.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pan {

std::string AsId::ToString() const {
  if (is_stub()) return "@" + std::to_string(stub_owner().value);
  return std::to_string(value);
}

namespace econ {
namespace {

bool Finite(double x) { return std::isfinite(x); }

std::string SegmentString(const PathSegment& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "-";
    out += s[i].ToString();
  }
  return out;
}

// Relative slack used when checking that flow bookkeeping adds up.
bool NearlyEqual(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

PricingFunction PricingFunction::Make(double alpha, double beta) {
  if (!Finite(alpha) || !Finite(beta) || alpha < 0.0 || beta < 0.0) {
    throw InputError("pricing function needs finite alpha >= 0 and beta >= 0");
  }
  return PricingFunction{alpha, beta};
}

double PricingFunction::operator()(double flow) const { return EvalPricing(*this, flow); }

double EvalPricing(const PricingFunction& p, double flow) {
  if (!(flow >= 0.0)) throw std::domain_error("pricing evaluated at negative flow");
  if (p.beta == 0.0) return p.alpha;
  if (p.beta == 1.0) return p.alpha * flow;
  return p.alpha * std::pow(flow, p.beta);
}

InternalCostFunction InternalCostFunction::Linear(double unit_cost) {
  if (!Finite(unit_cost) || unit_cost < 0.0) {
    throw InputError("linear internal cost needs a finite unit cost >= 0");
  }
  InternalCostFunction f;
  f.unit_cost_ = unit_cost;
  return f;
}

InternalCostFunction InternalCostFunction::Tabulated(
    std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) throw InputError("tabulated internal cost needs >= 2 points");
  if (points.front().first != 0.0) {
    throw InputError("tabulated internal cost must start at flow 0");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& [f, c] = points[i];
    if (!Finite(f) || !Finite(c) || c < 0.0) {
      throw InputError("tabulated internal cost needs finite, non-negative points");
    }
    if (i > 0 && (f <= points[i - 1].first || c < points[i - 1].second)) {
      throw InputError("tabulated internal cost must be strictly increasing in flow and "
                       "non-decreasing in cost");
    }
  }
  InternalCostFunction out;
  out.points_ = std::move(points);
  return out;
}

double InternalCostFunction::operator()(double total_flow) const {
  if (!(total_flow >= 0.0)) throw std::domain_error("internal cost at negative flow");
  if (points_.empty()) return unit_cost_ * total_flow;
  auto it = std::upper_bound(points_.begin(), points_.end(), total_flow,
                             [](double f, const auto& p) { return f < p.first; });
  // `it` is the first point strictly beyond total_flow; interpolate between
  // its predecessor and it, or extrapolate along the last segment.
  std::size_t hi = static_cast<std::size_t>(it - points_.begin());
  if (hi >= points_.size()) hi = points_.size() - 1;
  if (hi == 0) hi = 1;
  const auto& [f0, c0] = points_[hi - 1];
  const auto& [f1, c1] = points_[hi];
  return c0 + (c1 - c0) * (total_flow - f0) / (f1 - f0);
}

double FlowAssignment::To(AsId neighbor) const {
  auto it = per_neighbor.find(neighbor);
  return it == per_neighbor.end() ? 0.0 : it->second;
}

double FlowAssignment::Total() const {
  double sum = 0.0;
  for (const auto& [_, v] : per_neighbor) sum += v;
  return 0.5 * sum;
}

void FlowAssignment::Validate() const {
  for (const auto& [n, v] : per_neighbor) {
    if (!Finite(v) || v < 0.0) {
      throw InputError("flow " + owner.ToString() + "-" + n.ToString() + " is negative");
    }
  }
  for (const auto& [seg, v] : per_segment) {
    if (seg.size() < 2) throw InputError("segment needs at least two hops");
    if (!Finite(v) || v < 0.0) {
      throw InputError("segment " + SegmentString(seg) + " has negative volume");
    }
    for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
      AsId other;
      if (seg[i] == owner) {
        other = seg[i + 1];
      } else if (seg[i + 1] == owner) {
        other = seg[i];
      } else {
        continue;
      }
      if (v > To(other) * (1.0 + 1e-12) + 1e-12) {
        throw InputError("segment " + SegmentString(seg) + " exceeds link volume " +
                         owner.ToString() + "-" + other.ToString());
      }
    }
  }
}

Relation AsEconProfile::RelationTo(AsId neighbor) const {
  if (providers.count(neighbor)) return Relation::kProvider;
  if (peers.count(neighbor)) return Relation::kPeer;
  if (customers.count(neighbor)) return Relation::kCustomer;
  return Relation::kNone;
}

void AsEconProfile::Validate() const {
  const std::string who = as_id.ToString();
  for (const auto* set : {&providers, &peers, &customers}) {
    if (set->count(as_id)) throw InputError("AS " + who + " lists itself as a neighbor");
  }
  for (AsId p : providers) {
    if (peers.count(p) || customers.count(p)) {
      throw InputError("AS " + who + ": neighbor " + p.ToString() + " in several sets");
    }
  }
  for (AsId p : peers) {
    if (customers.count(p)) {
      throw InputError("AS " + who + ": neighbor " + p.ToString() + " in several sets");
    }
  }
  for (const auto& [n, price] : provider_prices) {
    if (!providers.count(n)) {
      throw InputError("AS " + who + ": provider price for non-provider " + n.ToString());
    }
    PricingFunction::Make(price.alpha, price.beta);
  }
  for (const auto& [n, price] : customer_prices) {
    if (!customers.count(n)) {
      throw InputError("AS " + who + ": customer price for non-customer " + n.ToString());
    }
    PricingFunction::Make(price.alpha, price.beta);
  }
}

UtilityBreakdown TotalUtility(const AsEconProfile& profile, const FlowAssignment& flows) {
  for (const auto& [n, _] : flows.per_neighbor) {
    if (profile.RelationTo(n) == Relation::kNone) {
      throw InputError("flow from " + profile.as_id.ToString() + " to non-neighbor " +
                       n.ToString());
    }
  }
  UtilityBreakdown out;
  for (const auto& [customer, price] : profile.customer_prices) {
    out.revenue += EvalPricing(price, flows.To(customer));
  }
  out.cost = profile.internal_cost(flows.Total());
  for (const auto& [provider, price] : profile.provider_prices) {
    out.cost += EvalPricing(price, flows.To(provider));
  }
  return out;
}

std::set<AsId> GrantedSet::All() const {
  std::set<AsId> out = providers;
  out.insert(peers.begin(), peers.end());
  out.insert(customers.begin(), customers.end());
  return out;
}

bool GrantedSet::Contains(AsId as) const {
  return providers.count(as) || peers.count(as) || customers.count(as);
}

AsId Agreement::PartnerOf(AsId party) const {
  if (party == party_x) return party_y;
  if (party == party_y) return party_x;
  throw InputError("AS " + party.ToString() + " is not a party of the agreement");
}

const GrantedSet& Agreement::GrantedBy(AsId party) const {
  if (party == party_x) return granted_by_x;
  if (party == party_y) return granted_by_y;
  throw InputError("AS " + party.ToString() + " is not a party of the agreement");
}

void Agreement::Validate(const AsEconProfile& x, const AsEconProfile& y) const {
  if (x.as_id != party_x || y.as_id != party_y) {
    throw InputError("agreement parties do not match the supplied profiles");
  }
  if (party_x == party_y) throw InputError("agreement needs two distinct parties");
  auto check = [](const GrantedSet& g, const AsEconProfile& p) {
    auto subset = [&](const std::set<AsId>& part, const std::set<AsId>& whole,
                      const char* kind) {
      for (AsId a : part) {
        if (!whole.count(a)) {
          throw InputError("AS " + p.as_id.ToString() + " grants " + a.ToString() +
                           " which is not one of its " + kind);
        }
      }
    };
    subset(g.providers, p.providers, "providers");
    subset(g.peers, p.peers, "peers");
    subset(g.customers, p.customers, "customers");
  };
  check(granted_by_x, x);
  check(granted_by_y, y);
}

FlowAssignment ApplyAgreement(const AsEconProfile& profile, const FlowAssignment& flows,
                              const Agreement& agreement, const AgreementFlowDelta& delta) {
  const AsId self = profile.as_id;
  const AsId partner = agreement.PartnerOf(self);
  if (flows.owner != self) throw InputError("flow assignment belongs to another AS");
  if (profile.RelationTo(partner) == Relation::kNone) {
    throw InputError("agreement partner " + partner.ToString() + " is not a neighbor of " +
                     self.ToString());
  }

  FlowAssignment out = flows;
  auto add_link = [&](AsId n, double v) { out.per_neighbor[n] += v; };

  // Attracted and rerouted totals of `self` per destination of its segments.
  std::map<AsId, double> attracted_to;
  std::map<AsId, double> rerouted_to;

  for (const auto& [key, v] : delta.attracted_customer_volumes) {
    if (key.size() != 4) throw InputError("attracted volume key must be (C, B, M, Z)");
    if (key[1] != self) continue;
    if (!(v >= 0.0)) throw InputError("negative attracted volume");
    if (key[2] != partner) throw InputError("attracted traffic must use the partner");
    if (!profile.customers.count(key[0])) {
      throw InputError("attracted traffic from non-customer " + key[0].ToString());
    }
    if (auto cap = delta.demand_caps.find(key); cap != delta.demand_caps.end()) {
      if (v > cap->second * (1.0 + 1e-12) + 1e-12) {
        throw InfeasibleError("attracted volume exceeds customer demand on " +
                              SegmentString(key));
      }
    }
    attracted_to[key[3]] += v;
    add_link(key[0], v);
    out.per_segment[key] += v;
  }

  for (const auto& [key, v] : delta.rerouted_volumes) {
    if (key.size() != 3) throw InputError("rerouted volume key must be (B, P, Z)");
    if (key[0] != self) continue;
    if (!(v >= 0.0)) throw InputError("negative rerouted volume");
    const AsId via = key[1];
    if (via == partner || profile.RelationTo(via) == Relation::kNone) {
      throw InputError("traffic can only be rerouted off an existing neighbor link");
    }
    double available = flows.To(via);
    if (auto seg = flows.per_segment.find(key); seg != flows.per_segment.end()) {
      available = std::min(available, seg->second);
    }
    if (v > available * (1.0 + 1e-12) + 1e-12) {
      throw InfeasibleError("rerouting " + std::to_string(v) + " off " +
                            self.ToString() + "-" + via.ToString() + " exceeds existing " +
                            std::to_string(available));
    }
    rerouted_to[key[2]] += v;
    add_link(via, -v);
    if (auto seg = out.per_segment.find(key); seg != out.per_segment.end()) {
      seg->second = std::max(0.0, seg->second - v);
    }
  }

  const GrantedSet& by_partner = agreement.GrantedBy(partner);
  const GrantedSet& by_self = agreement.GrantedBy(self);
  std::set<AsId> own_segment_targets;
  for (const auto& [seg, v] : delta.new_segment_volumes) {
    if (seg.size() != 3) throw InputError("new segment key must be (B, M, Z)");
    if (!(v >= 0.0)) throw InputError("negative segment volume");
    if (seg[0] == self && seg[1] == partner) {
      if (!by_partner.Contains(seg[2])) {
        throw InputError("segment " + SegmentString(seg) + " not granted by the partner");
      }
      own_segment_targets.insert(seg[2]);
      const double carried = attracted_to[seg[2]] + rerouted_to[seg[2]];
      if (!NearlyEqual(carried, v)) {
        throw InputError("segment " + SegmentString(seg) +
                         ": attracted plus rerouted volume differs from segment volume");
      }
      add_link(partner, v);
    } else if (seg[0] == partner && seg[1] == self) {
      if (!by_self.Contains(seg[2])) {
        throw InputError("segment " + SegmentString(seg) + " not granted by " +
                         self.ToString());
      }
      add_link(partner, v);
      add_link(seg[2], v);
    } else {
      throw InputError("segment " + SegmentString(seg) + " does not belong to the agreement");
    }
    out.per_segment[seg] += v;
  }
  for (const auto& [z, v] : attracted_to) {
    if (!own_segment_targets.count(z) && v > 0.0) {
      throw InputError("attracted traffic towards " + z.ToString() + " without a segment");
    }
  }
  for (const auto& [z, v] : rerouted_to) {
    if (!own_segment_targets.count(z) && v > 0.0) {
      throw InputError("rerouted traffic towards " + z.ToString() + " without a segment");
    }
  }

  for (auto& [n, v] : out.per_neighbor) {
    if (v < 0.0) {
      if (v > -1e-12) {
        v = 0.0;
      } else {
        throw InfeasibleError("negative flow on " + self.ToString() + "-" + n.ToString());
      }
    }
  }
  return out;
}

AgreementUtility ComputeAgreementUtility(const AsEconProfile& profile,
                                         const FlowAssignment& before,
                                         const FlowAssignment& after) {
  const UtilityBreakdown b = TotalUtility(profile, before);
  const UtilityBreakdown a = TotalUtility(profile, after);
  return AgreementUtility{a.revenue - b.revenue, a.cost - b.cost};
}

}  // namespace econ
}  // namespace pan
