#ifndef PAN_AGREEMENT_OPT_H
#define PAN_AGREEMENT_OPT_H

// Qualification of mutuality-based agreements: cash compensation via the
// Nash bargaining solution, and flow-volume targets via a Nash-product
// program over the new path segments.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pan/econ.h"

namespace pan::agreement {

double NashProduct(double u_x, double u_y);

struct NashObjective {
  double u_x = 0.0;
  double u_y = 0.0;

  double product() const { return NashProduct(u_x, u_y); }
  bool feasible(double slack = 0.0) const { return u_x >= -slack && u_y >= -slack; }
};

enum class CashStatus { kConcluded, kNotViable };

struct CashSolution {
  CashStatus status = CashStatus::kNotViable;
  double transfer = 0.0;  // Pi_{X->Y}; negative means Y pays X
  double post_u_x = 0.0;
  double post_u_y = 0.0;
};

// Pi = u_x - (u_x + u_y) / 2 whenever u_x + u_y >= 0.
CashSolution OptimizeCash(double u_x, double u_y);

// One decision unit of the flow-volume program: the new segment
// (beneficiary, partner, target). Its volume is the attracted customer
// traffic (from `customer`, at most demand_cap) plus rerouted existing
// traffic of the beneficiary towards `target` (at most the summed volume of
// reroute_sources, split across them in proportion to their volume).
struct NewSegment {
  AsId beneficiary;
  AsId partner;
  AsId target;
  AsId customer;
  double demand_cap = 0.0;
  std::vector<std::pair<AsId, double>> reroute_sources;  // (neighbor, volume)

  double reroutable() const;
  econ::PathSegment segment() const { return {beneficiary, partner, target}; }
  econ::PathSegment attracted_key() const { return {customer, beneficiary, partner, target}; }
};

struct FlowVolumeInstance {
  econ::AsEconProfile profile_x;
  econ::AsEconProfile profile_y;
  econ::FlowAssignment flows_x;
  econ::FlowAssignment flows_y;
  econ::Agreement agreement;
  std::vector<NewSegment> segments;

  // Derives the segments from the agreement's granted sets: for each party
  // B and each Z granted by its partner, one segment (B, partner, Z). Demand
  // comes from `demand_caps` keyed (C, B, partner, Z); a segment without a
  // demand entry attracts nothing. Reroutable traffic is read from B's
  // SEGFLOW entries (B, P, Z) over providers P.
  static FlowVolumeInstance Build(econ::AsEconProfile profile_x, econ::FlowAssignment flows_x,
                                  econ::AsEconProfile profile_y, econ::FlowAssignment flows_y,
                                  econ::Agreement agreement,
                                  const std::map<econ::PathSegment, double>& demand_caps);

  // Decision vector layout: [attracted_0, rerouted_0, attracted_1, ...].
  std::size_t dimension() const { return 2 * segments.size(); }
  std::vector<double> LowerBounds() const;
  std::vector<double> UpperBounds() const;

  // Throws InputError if data are inconsistent or not finite/non-negative.
  void Validate() const;
};

// Flow changes for a decision vector; throws on out-of-box points.
econ::AgreementFlowDelta MakeDelta(const FlowVolumeInstance& inst,
                                   const std::vector<double>& point);

// Agreement utilities at `point`, computed through econ::ApplyAgreement.
NashObjective EvaluatePoint(const FlowVolumeInstance& inst, const std::vector<double>& point);

// Fast evaluator for the same utilities. Post-agreement link volumes are
// affine in the decision vector; the coefficients are recovered by probing
// econ::ApplyAgreement once per coordinate, and the pricing/internal-cost
// functions are then evaluated directly.
class CompiledInstance {
 public:
  explicit CompiledInstance(const FlowVolumeInstance& inst);

  NashObjective Evaluate(const double* point) const;
  NashObjective Evaluate(const std::vector<double>& point) const { return Evaluate(point.data()); }

  std::size_t dimension() const { return dim_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

 private:
  struct Link {
    double base = 0.0;
    std::vector<double> coef;  // d volume / d point[k]
    econ::PricingFunction price;
    int sign = 0;  // +1 revenue (customer), -1 cost (provider), 0 free
  };
  struct Party {
    std::vector<Link> links;
    econ::InternalCostFunction internal_cost;
    double base_utility = 0.0;
  };
  double PartyUtility(const Party& p, const double* point) const;

  std::size_t dim_ = 0;
  std::vector<double> lower_;
  std::vector<double> upper_;
  Party x_;
  Party y_;
};

struct SolverConfig {
  int grid_points = 32;       // per coordinate in the coarse phase
  int ascent_iters = 4000;    // polling rounds in the local phase
  double tolerance = 1e-10;   // final step size, relative to each range
  int random_starts = 4;      // extra ascent starts drawn uniformly from the box
  int random_directions = 8;  // seeded extra poll directions per round
  std::uint64_t seed = 0;     // seeds the random starts
  std::size_t grid_budget = std::size_t{1} << 18;  // max coarse-grid evaluations
};

enum class FlowStatus { kOptimal, kDegenerateZero, kInfeasible };

std::string ToString(FlowStatus s);

struct FlowVolumeSolution {
  FlowStatus status = FlowStatus::kInfeasible;
  std::vector<double> point;                           // decision vector
  std::map<econ::PathSegment, double> targets;         // (B, M, Z) -> f^(a)
  std::map<econ::PathSegment, double> attracted;       // (B, M, Z) -> delta f^(a)
  NashObjective utilities;
  std::size_t evaluations = 0;
};

// Coarse grid over the decision box, then pattern-search ascent (axis,
// pairwise-diagonal and seeded random moves, halving steps) from the best grid
// points and from a maximin climb of the smaller utility. Ties in
// the Nash product prefer the smaller |u_x - u_y|.
FlowVolumeSolution OptimizeFlowVolumes(const FlowVolumeInstance& inst,
                                       const SolverConfig& cfg = {});

// Fills targets/attracted/utilities of a solution from a decision vector.
FlowVolumeSolution SolutionAt(const FlowVolumeInstance& inst, std::vector<double> point,
                              FlowStatus status);

struct AuditConfig {
  int grid_points = 16;       // neighborhood step = range / (grid_points - 1)
  int neighborhood = 2;       // +-steps per coordinate
  std::size_t max_neighborhood_points = 200000;
  std::size_t random_samples = 20000;
  std::uint64_t seed = 1;
  std::size_t probe_evaluations = 50000;  // dominance-seeking compass search
  double tolerance = 1e-7;    // relative to |u_x| + |u_y| (at least 1)
};

struct AuditViolation {
  enum class Kind { kDominated, kLessFair } kind;
  std::vector<double> point;
  NashObjective utilities;
};

struct AuditReport {
  bool vacuous = false;
  std::size_t points_checked = 0;
  std::vector<AuditViolation> violations;

  bool passed() const { return violations.empty(); }
};

// Brute-force certificate for a solution: no scanned feasible point
// Pareto-dominates it, and no point with the same Nash product is fairer.
// The scan covers a grid neighborhood, uniform samples of the box and a
// local search for a point that improves both utilities.
// Only optimal solutions are audited; others pass vacuously.
AuditReport ParetoFairnessAudit(const FlowVolumeInstance& inst, const FlowVolumeSolution& sol,
                                const AuditConfig& cfg = {});

// Worst violation of constraints I (viability), II (allowance covers
// attracted traffic) and III (demand caps) at a solution, >= 0.
double ConstraintViolation(const FlowVolumeInstance& inst, const FlowVolumeSolution& sol);

}  // namespace pan::agreement

#endif  // PAN_AGREEMENT_OPT_H
