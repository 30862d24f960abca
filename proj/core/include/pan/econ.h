#ifndef PAN_ECON_H
#define PAN_ECON_H

// Economic model of an AS: link pricing, internal cost, flow bookkeeping and
// the utility an AS derives from a change in its flow composition.

#include <map>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include "pan/types.h"

namespace pan::econ {

// p(f) = alpha * f^beta. beta = 0 is a flat fee, beta = 1 pay-per-use,
// beta > 1 superlinear (congestion) pricing.
struct PricingFunction {
  double alpha = 0.0;
  double beta = 1.0;

  // Throws InputError on negative or non-finite parameters.
  static PricingFunction Make(double alpha, double beta);

  double operator()(double flow) const;
};

// Throws std::domain_error for negative flow.
double EvalPricing(const PricingFunction& p, double flow);

// Non-negative, non-decreasing cost of carrying a total flow through an AS.
class InternalCostFunction {
 public:
  InternalCostFunction() = default;

  static InternalCostFunction Linear(double unit_cost);

  // Piecewise-linear interpolation through (flow, cost) points sorted by
  // flow; the first point must be at flow 0. Beyond the last point the last
  // segment's slope is extended.
  static InternalCostFunction Tabulated(std::vector<std::pair<double, double>> points);

  double operator()(double total_flow) const;

  bool is_linear() const { return points_.empty(); }
  double unit_cost() const { return unit_cost_; }
  const std::vector<std::pair<double, double>>& points() const { return points_; }

 private:
  double unit_cost_ = 0.0;
  std::vector<std::pair<double, double>> points_;
};

// An ordered sequence of ASes, e.g. (X, Y, Z) for the segment X-Y-Z.
using PathSegment = std::vector<AsId>;

// Flow volumes seen by one AS (`owner`). per_neighbor holds link volumes
// f_XY; per_segment holds volumes of multi-hop segments touching the owner.
struct FlowAssignment {
  AsId owner;
  std::map<AsId, double> per_neighbor;
  std::map<PathSegment, double> per_segment;

  // Volume on the link to `neighbor`; 0 when absent.
  double To(AsId neighbor) const;

  // Total flow through the owner. Every unit crossing the AS is observed on
  // two adjacent links (end-host traffic on the stub link), so this is half
  // the sum of the link volumes.
  double Total() const;

  // Throws InputError on negative volumes or segment volumes exceeding the
  // volume of a constituent link incident to the owner.
  void Validate() const;
};

enum class Relation { kNone, kProvider, kPeer, kCustomer };

struct AsEconProfile {
  AsId as_id;
  std::set<AsId> providers;  // pi(X)
  std::set<AsId> peers;      // epsilon(X)
  std::set<AsId> customers;  // gamma(X), including the end-host stub if modeled
  std::map<AsId, PricingFunction> provider_prices;  // what X pays provider Y
  std::map<AsId, PricingFunction> customer_prices;  // what customer Y pays X
  InternalCostFunction internal_cost;

  // What `neighbor` is to this AS.
  Relation RelationTo(AsId neighbor) const;

  // Throws InputError if the neighbor sets overlap, contain the AS itself,
  // or a price is attached to a neighbor of the wrong kind. Neighbors
  // without a price entry are settlement-free.
  void Validate() const;
};

struct UtilityBreakdown {
  double revenue = 0.0;  // r_X
  double cost = 0.0;     // c_X
  double utility() const { return revenue - cost; }
};

// r_X - c_X for the given flows. Throws InputError when flows reference a
// non-neighbor.
UtilityBreakdown TotalUtility(const AsEconProfile& profile, const FlowAssignment& flows);

// The neighbors one party of an agreement opens to the other.
struct GrantedSet {
  std::set<AsId> providers;
  std::set<AsId> peers;
  std::set<AsId> customers;

  std::set<AsId> All() const;
  bool Contains(AsId as) const;
  bool empty() const { return providers.empty() && peers.empty() && customers.empty(); }
};

struct FlowVolumeTargets {
  std::map<PathSegment, double> targets;
};

// Positive amount: party_x pays party_y.
struct CashTransfer {
  double amount = 0.0;
};

using Qualification = std::variant<std::monostate, FlowVolumeTargets, CashTransfer>;

// [X(up pi'_X, right eps'_X, down gamma'_X); Y(...)]: granted_by_x lists
// the neighbors of X that Y may reach through X.
struct Agreement {
  AsId party_x;
  AsId party_y;
  GrantedSet granted_by_x;
  GrantedSet granted_by_y;
  Qualification qualification;

  bool IsParty(AsId as) const { return as == party_x || as == party_y; }
  AsId PartnerOf(AsId party) const;
  const GrantedSet& GrantedBy(AsId party) const;

  // Throws InputError unless each granted set is drawn from the matching
  // neighbor set of its granting party.
  void Validate(const AsEconProfile& x, const AsEconProfile& y) const;
};

// Flow changes caused by an agreement, for both parties.
//
//   new_segment_volumes       (B, M, Z) -> f^(a): total volume M carries
//                             for beneficiary B towards Z in a_M.
//   attracted_customer_volumes (C, B, M, Z) -> delta f^(a): newly
//                             attracted traffic of B's customer C.
//   rerouted_volumes          (B, P, Z) -> f^updown: existing traffic of B
//                             towards Z moved off neighbor P (usually a
//                             provider) onto the new segment.
//   demand_caps               (C, B, M, Z) -> delta f^max.
//
// For every segment the beneficiary's attracted plus rerouted volume must
// equal the segment volume.
struct AgreementFlowDelta {
  std::map<PathSegment, double> new_segment_volumes;
  std::map<PathSegment, double> attracted_customer_volumes;
  std::map<PathSegment, double> rerouted_volumes;
  std::map<PathSegment, double> demand_caps;

  bool empty() const {
    return new_segment_volumes.empty() && attracted_customer_volumes.empty() &&
           rerouted_volumes.empty();
  }
};

// Post-agreement flows of profile.as_id (which must be a party). Provider
// flows follow f_DY + f_EDY - sum f^updown_DY; the peering link to the
// partner carries every new segment; customer links gain attracted traffic.
// Throws InputError on inconsistent deltas and InfeasibleError when more
// traffic is rerouted than exists.
FlowAssignment ApplyAgreement(const AsEconProfile& profile, const FlowAssignment& flows,
                              const Agreement& agreement, const AgreementFlowDelta& delta);

struct AgreementUtility {
  double delta_revenue = 0.0;
  double delta_cost = 0.0;
  double utility() const { return delta_revenue - delta_cost; }
};

// u_X(a) = U_X(after) - U_X(before).
AgreementUtility ComputeAgreementUtility(const AsEconProfile& profile,
                                         const FlowAssignment& before,
                                         const FlowAssignment& after);

}  // namespace pan::econ

#endif  // PAN_ECON_H
