#include "pan/agreement_opt.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pan/rng.h"

namespace pan::agreement {
namespace {

using econ::AsEconProfile;
using econ::FlowAssignment;
using econ::PathSegment;

constexpr double kFeasibilitySlack = 1e-12;

struct Candidate {
  std::vector<double> point;
  NashObjective value;
};

// Strict "a is preferable to b": larger Nash product, then fairer split.
bool Better(const NashObjective& a, const NashObjective& b) {
  const double pa = a.product();
  const double pb = b.product();
  const double eps = 1e-14 * std::max({1.0, std::abs(pa), std::abs(pb)});
  if (pa > pb + eps) return true;
  if (pb > pa + eps) return false;
  const double ga = std::abs(a.u_x - a.u_y);
  const double gb = std::abs(b.u_x - b.u_y);
  return ga < gb - 1e-14 * std::max({1.0, ga, gb});
}

bool Feasible(const NashObjective& v) { return v.feasible(kFeasibilitySlack); }

}  // namespace

double NashProduct(double u_x, double u_y) { return u_x * u_y; }

CashSolution OptimizeCash(double u_x, double u_y) {
  CashSolution out;
  if (!(u_x + u_y >= 0.0)) {
    out.status = CashStatus::kNotViable;
    return out;
  }
  out.status = CashStatus::kConcluded;
  const double half_surplus = (u_x + u_y) / 2.0;
  out.transfer = u_x - half_surplus;
  out.post_u_x = half_surplus;
  out.post_u_y = half_surplus;
  return out;
}

double NewSegment::reroutable() const {
  double sum = 0.0;
  for (const auto& [_, v] : reroute_sources) sum += v;
  return sum;
}

std::string ToString(FlowStatus s) {
  switch (s) {
    case FlowStatus::kOptimal: return "optimal";
    case FlowStatus::kDegenerateZero: return "degenerate_zero";
    case FlowStatus::kInfeasible: return "infeasible";
  }
  return "unknown";
}

FlowVolumeInstance FlowVolumeInstance::Build(AsEconProfile profile_x, FlowAssignment flows_x,
                                             AsEconProfile profile_y, FlowAssignment flows_y,
                                             econ::Agreement agreement,
                                             const std::map<PathSegment, double>& demand_caps) {
  FlowVolumeInstance inst;
  inst.profile_x = std::move(profile_x);
  inst.profile_y = std::move(profile_y);
  inst.flows_x = std::move(flows_x);
  inst.flows_y = std::move(flows_y);
  inst.agreement = std::move(agreement);
  inst.agreement.Validate(inst.profile_x, inst.profile_y);

  auto add_segments = [&](const AsEconProfile& b, const FlowAssignment& flows) {
    const AsId partner = inst.agreement.PartnerOf(b.as_id);
    for (AsId target : inst.agreement.GrantedBy(partner).All()) {
      NewSegment seg;
      seg.beneficiary = b.as_id;
      seg.partner = partner;
      seg.target = target;
      int demand_entries = 0;
      for (AsId c : b.customers) {
        auto it = demand_caps.find(PathSegment{c, b.as_id, partner, target});
        if (it == demand_caps.end()) continue;
        ++demand_entries;
        seg.customer = c;
        seg.demand_cap = it->second;
      }
      if (demand_entries > 1) {
        throw InputError("segment " + b.as_id.ToString() + "-" + partner.ToString() + "-" +
                         target.ToString() + " has demand from several customers");
      }
      if (demand_entries == 0) {
        const AsId stub = AsId::StubOf(b.as_id);
        seg.customer = b.customers.count(stub) || b.customers.empty() ? stub
                                                                      : *b.customers.begin();
      }
      for (AsId p : b.providers) {
        auto it = flows.per_segment.find(PathSegment{b.as_id, p, target});
        if (it != flows.per_segment.end() && it->second > 0.0) {
          seg.reroute_sources.emplace_back(p, it->second);
        }
      }
      inst.segments.push_back(std::move(seg));
    }
  };
  add_segments(inst.profile_x, inst.flows_x);
  add_segments(inst.profile_y, inst.flows_y);
  inst.Validate();
  return inst;
}

std::vector<double> FlowVolumeInstance::LowerBounds() const {
  return std::vector<double>(dimension(), 0.0);
}

std::vector<double> FlowVolumeInstance::UpperBounds() const {
  std::vector<double> ub;
  ub.reserve(dimension());
  for (const auto& s : segments) {
    ub.push_back(s.demand_cap);
    ub.push_back(s.reroutable());
  }
  return ub;
}

void FlowVolumeInstance::Validate() const {
  profile_x.Validate();
  profile_y.Validate();
  flows_x.Validate();
  flows_y.Validate();
  agreement.Validate(profile_x, profile_y);
  if (flows_x.owner != profile_x.as_id || flows_y.owner != profile_y.as_id) {
    throw InputError("flow assignments do not belong to the agreement parties");
  }
  std::map<PathSegment, double> per_link_reroute;
  for (const auto& s : segments) {
    if (!agreement.IsParty(s.beneficiary) || agreement.PartnerOf(s.beneficiary) != s.partner) {
      throw InputError("segment beneficiary/partner do not match the agreement");
    }
    if (!agreement.GrantedBy(s.partner).Contains(s.target)) {
      throw InputError("segment target " + s.target.ToString() + " is not granted");
    }
    if (!std::isfinite(s.demand_cap) || s.demand_cap < 0.0) {
      throw InputError("demand cap must be finite and >= 0");
    }
    const AsEconProfile& b = s.beneficiary == profile_x.as_id ? profile_x : profile_y;
    if (s.demand_cap > 0.0 && !b.customers.count(s.customer)) {
      throw InputError("attracting AS " + s.customer.ToString() + " is not a customer of " +
                       b.as_id.ToString());
    }
    for (const auto& [via, v] : s.reroute_sources) {
      if (!std::isfinite(v) || v < 0.0) throw InputError("reroutable volume must be >= 0");
      if (via == s.partner || b.RelationTo(via) == econ::Relation::kNone) {
        throw InputError("reroute source " + via.ToString() + " is not a usable neighbor");
      }
      per_link_reroute[PathSegment{s.beneficiary, via}] += v;
    }
  }
  for (const auto& [link, v] : per_link_reroute) {
    const FlowAssignment& f = link[0] == flows_x.owner ? flows_x : flows_y;
    if (v > f.To(link[1]) * (1.0 + 1e-12) + 1e-12) {
      throw InputError("reroutable traffic exceeds link volume " + link[0].ToString() + "-" +
                       link[1].ToString());
    }
  }
}

econ::AgreementFlowDelta MakeDelta(const FlowVolumeInstance& inst,
                                   const std::vector<double>& point) {
  if (point.size() != inst.dimension()) throw InputError("decision vector has wrong size");
  econ::AgreementFlowDelta delta;
  for (std::size_t i = 0; i < inst.segments.size(); ++i) {
    const NewSegment& s = inst.segments[i];
    const double attracted = point[2 * i];
    const double rerouted = point[2 * i + 1];
    const double reroutable = s.reroutable();
    const double slack = 1e-12;
    if (!(attracted >= -slack) || attracted > s.demand_cap * (1 + slack) + slack ||
        !(rerouted >= -slack) || rerouted > reroutable * (1 + slack) + slack) {
      throw InputError("decision vector outside the feasible box");
    }
    const double a = std::clamp(attracted, 0.0, s.demand_cap);
    const double r = std::clamp(rerouted, 0.0, reroutable);
    delta.new_segment_volumes[s.segment()] = a + r;
    if (s.demand_cap > 0.0) {
      delta.attracted_customer_volumes[s.attracted_key()] = a;
      delta.demand_caps[s.attracted_key()] = s.demand_cap;
    }
    if (r > 0.0) {
      for (const auto& [via, v] : s.reroute_sources) {
        delta.rerouted_volumes[PathSegment{s.beneficiary, via, s.target}] += r * v / reroutable;
      }
    }
  }
  return delta;
}

NashObjective EvaluatePoint(const FlowVolumeInstance& inst, const std::vector<double>& point) {
  const auto delta = MakeDelta(inst, point);
  const auto after_x = econ::ApplyAgreement(inst.profile_x, inst.flows_x, inst.agreement, delta);
  const auto after_y = econ::ApplyAgreement(inst.profile_y, inst.flows_y, inst.agreement, delta);
  return NashObjective{
      econ::ComputeAgreementUtility(inst.profile_x, inst.flows_x, after_x).utility(),
      econ::ComputeAgreementUtility(inst.profile_y, inst.flows_y, after_y).utility()};
}

CompiledInstance::CompiledInstance(const FlowVolumeInstance& inst)
    : dim_(inst.dimension()), lower_(inst.LowerBounds()), upper_(inst.UpperBounds()) {
  auto compile = [&](const AsEconProfile& profile, const FlowAssignment& flows, Party& party) {
    const std::vector<double> zero(dim_, 0.0);
    const FlowAssignment base =
        econ::ApplyAgreement(profile, flows, inst.agreement, MakeDelta(inst, zero));
    std::vector<FlowAssignment> probes(dim_);
    for (std::size_t k = 0; k < dim_; ++k) {
      if (upper_[k] <= 0.0) continue;
      std::vector<double> p = zero;
      p[k] = upper_[k];
      probes[k] = econ::ApplyAgreement(profile, flows, inst.agreement, MakeDelta(inst, p));
    }
    std::set<AsId> neighbors;
    for (const auto& [n, _] : base.per_neighbor) neighbors.insert(n);
    for (const auto& pr : probes) {
      for (const auto& [n, _] : pr.per_neighbor) neighbors.insert(n);
    }
    for (const auto& [n, _] : profile.customer_prices) neighbors.insert(n);
    for (const auto& [n, _] : profile.provider_prices) neighbors.insert(n);
    for (AsId n : neighbors) {
      Link link;
      link.base = base.To(n);
      link.coef.assign(dim_, 0.0);
      for (std::size_t k = 0; k < dim_; ++k) {
        if (upper_[k] > 0.0) link.coef[k] = (probes[k].To(n) - link.base) / upper_[k];
      }
      if (auto it = profile.customer_prices.find(n); it != profile.customer_prices.end()) {
        link.price = it->second;
        link.sign = +1;
      } else if (auto jt = profile.provider_prices.find(n); jt != profile.provider_prices.end()) {
        link.price = jt->second;
        link.sign = -1;
      }
      party.links.push_back(std::move(link));
    }
    party.internal_cost = profile.internal_cost;
    party.base_utility = econ::TotalUtility(profile, base).utility();
  };
  compile(inst.profile_x, inst.flows_x, x_);
  compile(inst.profile_y, inst.flows_y, y_);
}

double CompiledInstance::PartyUtility(const Party& p, const double* point) const {
  double revenue = 0.0;
  double cost = 0.0;
  double total = 0.0;
  for (const Link& l : p.links) {
    double v = l.base;
    for (std::size_t k = 0; k < dim_; ++k) v += l.coef[k] * point[k];
    v = std::max(0.0, v);
    total += v;
    if (l.sign > 0) {
      revenue += econ::EvalPricing(l.price, v);
    } else if (l.sign < 0) {
      cost += econ::EvalPricing(l.price, v);
    }
  }
  cost += p.internal_cost(0.5 * total);
  return revenue - cost - p.base_utility;
}

NashObjective CompiledInstance::Evaluate(const double* point) const {
  return NashObjective{PartyUtility(x_, point), PartyUtility(y_, point)};
}

FlowVolumeSolution SolutionAt(const FlowVolumeInstance& inst, std::vector<double> point,
                              FlowStatus status) {
  FlowVolumeSolution sol;
  sol.status = status;
  for (std::size_t i = 0; i < inst.segments.size(); ++i) {
    const auto seg = inst.segments[i].segment();
    sol.attracted[seg] = point[2 * i];
    sol.targets[seg] = point[2 * i] + point[2 * i + 1];
  }
  sol.utilities = EvaluatePoint(inst, point);
  sol.point = std::move(point);
  return sol;
}

namespace {

class PatternSearch {
 public:
  using Direction = std::vector<std::pair<std::size_t, double>>;

  PatternSearch(const CompiledInstance& model, const SolverConfig& cfg,
                std::vector<double> initial_step)
      : model_(model), cfg_(cfg), initial_step_(std::move(initial_step)) {
    for (std::size_t k = 0; k < model.dimension(); ++k) {
      if (model.upper()[k] > model.lower()[k]) active_.push_back(k);
    }
    // Axis moves and pairwise diagonals; the diagonals let the search slide
    // along ridges where one utility is traded against the other.
    for (std::size_t a = 0; a < active_.size(); ++a) {
      for (double s : {+1.0, -1.0}) dirs_.push_back({{active_[a], s}});
    }
    for (std::size_t a = 0; a < active_.size(); ++a) {
      for (std::size_t b = a + 1; b < active_.size(); ++b) {
        for (double sa : {+1.0, -1.0}) {
          for (double sb : {+1.0, -1.0}) dirs_.push_back({{active_[a], sa}, {active_[b], sb}});
        }
      }
    }
  }

  // `accept(candidate, current)` decides whether a move is taken.
  template <class Accept>
  Candidate Run(Candidate start, std::size_t& evaluations, Accept accept, Rng& rng) const {
    Candidate cur = std::move(start);
    std::vector<double> step = initial_step_;
    std::vector<double> cand(cur.point.size());
    std::vector<Direction> polled = dirs_;
    for (int round = 0; round < cfg_.ascent_iters; ++round) {
      bool improved = false;
      // Random directions with log-uniform scales per coordinate reach
      // ridges whose slope differs from the ratio of the ranges.
      polled.resize(dirs_.size());
      for (int r = 0; r < cfg_.random_directions && !active_.empty(); ++r) {
        Direction d;
        for (std::size_t k : active_) {
          if (rng.Below(3) == 0) continue;
          const double mag = std::exp2(-rng.Uniform(0.0, 8.0));
          d.emplace_back(k, rng.Below(2) ? mag : -mag);
        }
        if (!d.empty()) polled.push_back(std::move(d));
      }
      for (const auto& dir : polled) {
        // Keep stepping along a direction while it improves, doubling the
        // stride each time.
        for (double stride = 1.0;; stride *= 2) {
          cand = cur.point;
          bool moved = false;
          for (const auto& [k, s] : dir) {
            const double v = std::clamp(cur.point[k] + stride * s * step[k], model_.lower()[k],
                                        model_.upper()[k]);
            moved |= v != cur.point[k];
            cand[k] = v;
          }
          if (!moved) break;
          const NashObjective val = model_.Evaluate(cand);
          ++evaluations;
          if (!accept(val, cur.value)) break;
          cur.point = cand;
          cur.value = val;
          improved = true;
        }
      }
      if (improved) continue;
      bool all_small = true;
      for (std::size_t k : active_) {
        step[k] *= 0.5;
        const double range = model_.upper()[k] - model_.lower()[k];
        if (step[k] > cfg_.tolerance * range) all_small = false;
      }
      if (all_small) break;
    }
    return cur;
  }

 private:
  const CompiledInstance& model_;
  const SolverConfig& cfg_;
  std::vector<double> initial_step_;
  std::vector<std::size_t> active_;
  std::vector<Direction> dirs_;
};

}  // namespace

FlowVolumeSolution OptimizeFlowVolumes(const FlowVolumeInstance& inst, const SolverConfig& cfg) {
  inst.Validate();
  const CompiledInstance model(inst);
  const std::size_t dim = model.dimension();
  const auto& lo = model.lower();
  const auto& hi = model.upper();

  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < dim; ++k) {
    if (hi[k] > lo[k]) active.push_back(k);
  }

  // Coarse grid, shrunk per coordinate until it fits the evaluation budget.
  // Uniform levels are merged with dyadic ones crowding both bounds, since
  // the positive region often hugs a bound.
  auto grid_levels = [](int n) {
    std::vector<double> t;
    for (int j = 0; j < n; ++j) t.push_back(static_cast<double>(j) / (n - 1));
    for (int j = 1; j <= n / 2; ++j) {
      t.push_back(std::exp2(-j));
      t.push_back(1.0 - std::exp2(-j));
    }
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
  };
  // The merged count is not monotone in n, so take the richest set that fits.
  auto grid_size = [&](std::size_t per) {
    double total = 1.0;
    for (std::size_t i = 0; i < active.size(); ++i) total *= static_cast<double>(per);
    return total;
  };
  int points = 2;
  for (int n = 3; n <= std::max(2, cfg.grid_points); ++n) {
    const std::size_t per = grid_levels(n).size();
    if (grid_size(per) <= static_cast<double>(cfg.grid_budget) &&
        per > grid_levels(points).size()) {
      points = n;
    }
  }
  const std::vector<double> levels = grid_levels(points);
  const int n_levels = static_cast<int>(levels.size());

  std::size_t evaluations = 0;
  constexpr std::size_t kGridStarts = 4;
  std::vector<Candidate> best;  // kept sorted, best first
  auto offer = [&](const std::vector<double>& p, const NashObjective& v) {
    if (!Feasible(v)) return;
    if (best.size() == kGridStarts && !Better(v, best.back().value)) return;
    Candidate c{p, v};
    auto pos = std::find_if(best.begin(), best.end(),
                            [&](const Candidate& b) { return Better(v, b.value); });
    best.insert(pos, std::move(c));
    if (best.size() > kGridStarts) best.pop_back();
  };

  double max_abs_u = 0.0;
  // Best grid points by the smaller utility. Points where both utilities
  // vanish are the status quo and would trap the climb, so they are skipped.
  auto low = [](const NashObjective& v) { return std::min(v.u_x, v.u_y); };
  std::vector<Candidate> maximin;  // kept sorted, best first
  auto offer_low = [&](const std::vector<double>& p, const NashObjective& v) {
    if (std::max(std::abs(v.u_x), std::abs(v.u_y)) <= 1e-12) return;
    if (maximin.size() == kGridStarts && low(v) <= low(maximin.back().value)) return;
    auto pos = std::find_if(maximin.begin(), maximin.end(),
                            [&](const Candidate& b) { return low(v) > low(b.value); });
    maximin.insert(pos, Candidate{p, v});
    if (maximin.size() > kGridStarts) maximin.pop_back();
  };
  std::vector<int> odometer(active.size(), 0);
  std::vector<double> p(lo);
  for (;;) {
    for (std::size_t i = 0; i < active.size(); ++i) {
      const std::size_t k = active[i];
      p[k] = odometer[i] == n_levels - 1 ? hi[k] : lo[k] + (hi[k] - lo[k]) * levels[odometer[i]];
    }
    const NashObjective v = model.Evaluate(p);
    ++evaluations;
    max_abs_u = std::max({max_abs_u, std::abs(v.u_x), std::abs(v.u_y)});
    offer(p, v);
    offer_low(p, v);
    std::size_t i = 0;
    while (i < active.size() && ++odometer[i] == n_levels) odometer[i++] = 0;
    if (i == active.size()) break;
  }

  std::vector<Candidate> starts = best;
  Rng rng(DeriveSeed(cfg.seed, 0xf10e));
  for (int r = 0; r < cfg.random_starts && !active.empty(); ++r) {
    std::vector<double> q(lo);
    for (std::size_t k : active) q[k] = rng.Uniform(lo[k], hi[k]);
    const NashObjective v = model.Evaluate(q);
    ++evaluations;
    if (Feasible(v)) starts.push_back(Candidate{q, v});
  }

  std::vector<double> step(dim, 0.0);
  for (std::size_t k : active) step[k] = (hi[k] - lo[k]) / static_cast<double>(points - 1);
  const PatternSearch search(model, cfg, step);

  // Where the positive region is a sliver the grid misses, the Nash
  // product is flat at zero around every grid start. Climbing the smaller
  // utility first finds the sliver whenever some point has both positive.
  for (auto& m : maximin) {
    Candidate lift = search.Run(
        std::move(m), evaluations,
        [&](const NashObjective& c, const NashObjective& cur) { return low(c) > low(cur); }, rng);
    if (Feasible(lift.value)) starts.push_back(std::move(lift));
  }

  if (starts.empty()) {
    FlowVolumeSolution sol = SolutionAt(inst, lo, FlowStatus::kInfeasible);
    sol.evaluations = evaluations;
    return sol;
  }

  auto nash = [](const NashObjective& c, const NashObjective& cur) {
    return Feasible(c) && Better(c, cur);
  };
  Candidate winner = starts.front();
  for (auto& s : starts) {
    Candidate c = search.Run(std::move(s), evaluations, nash, rng);
    if (Better(c.value, winner.value)) winner = std::move(c);
  }

  const double scale = std::max(1.0, max_abs_u * max_abs_u);
  FlowVolumeSolution sol;
  if (winner.value.product() <= 1e-15 * scale) {
    sol = SolutionAt(inst, lo, FlowStatus::kDegenerateZero);
  } else {
    sol = SolutionAt(inst, std::move(winner.point), FlowStatus::kOptimal);
  }
  sol.evaluations = evaluations;
  return sol;
}

AuditReport ParetoFairnessAudit(const FlowVolumeInstance& inst, const FlowVolumeSolution& sol,
                                const AuditConfig& cfg) {
  AuditReport report;
  if (sol.status != FlowStatus::kOptimal) {
    report.vacuous = true;
    return report;
  }
  const CompiledInstance model(inst);
  const auto& lo = model.lower();
  const auto& hi = model.upper();
  const NashObjective ref = model.Evaluate(sol.point);
  const double tol = cfg.tolerance * std::max(1.0, std::abs(ref.u_x) + std::abs(ref.u_y));
  const double ref_gap = std::abs(ref.u_x - ref.u_y);

  auto check = [&](const std::vector<double>& p) {
    const NashObjective v = model.Evaluate(p);
    ++report.points_checked;
    if (!Feasible(v)) return;
    const bool weakly = v.u_x >= ref.u_x - tol && v.u_y >= ref.u_y - tol;
    if (weakly && (v.u_x > ref.u_x + tol || v.u_y > ref.u_y + tol)) {
      report.violations.push_back({AuditViolation::Kind::kDominated, p, v});
      return;
    }
    if (std::abs(v.product() - ref.product()) <= tol * std::max(1.0, std::abs(ref.product())) &&
        std::abs(v.u_x - v.u_y) < ref_gap - tol) {
      report.violations.push_back({AuditViolation::Kind::kLessFair, p, v});
    }
  };

  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < model.dimension(); ++k) {
    if (hi[k] > lo[k]) active.push_back(k);
  }
  const int width = 2 * cfg.neighborhood + 1;
  double total = 1.0;
  for (std::size_t i = 0; i < active.size(); ++i) total *= width;
  std::vector<double> step(model.dimension(), 0.0);
  for (std::size_t k : active) {
    step[k] = (hi[k] - lo[k]) / static_cast<double>(std::max(2, cfg.grid_points) - 1);
  }
  Rng rng(DeriveSeed(cfg.seed, 0xa0d1));

  if (total <= static_cast<double>(cfg.max_neighborhood_points)) {
    std::vector<int> odo(active.size(), -cfg.neighborhood);
    std::vector<double> p(sol.point);
    for (;;) {
      for (std::size_t i = 0; i < active.size(); ++i) {
        const std::size_t k = active[i];
        p[k] = std::clamp(sol.point[k] + odo[i] * step[k], lo[k], hi[k]);
      }
      check(p);
      std::size_t i = 0;
      while (i < active.size() && ++odo[i] > cfg.neighborhood) odo[i++] = -cfg.neighborhood;
      if (i == active.size()) break;
    }
  } else {
    for (std::size_t n = 0; n < cfg.max_neighborhood_points; ++n) {
      std::vector<double> p(sol.point);
      for (std::size_t k : active) {
        const double off =
            static_cast<double>(static_cast<std::int64_t>(rng.Below(width)) - cfg.neighborhood);
        p[k] = std::clamp(sol.point[k] + off * step[k], lo[k], hi[k]);
      }
      check(p);
    }
  }
  for (std::size_t n = 0; n < cfg.random_samples; ++n) {
    std::vector<double> p(lo);
    for (std::size_t k : active) p[k] = rng.Uniform(lo[k], hi[k]);
    check(p);
  }

  // Dominance probe: compass search on the smaller of the two utility gains
  // over the solution. Axis moves alone cannot find an improvement that
  // needs two segments to grow together, so pairwise diagonals and random
  // directions are polled as well.
  if (!active.empty() && report.violations.empty() && cfg.probe_evaluations > 0) {
    auto gain = [&](const NashObjective& v) {
      return Feasible(v) ? std::min(v.u_x - ref.u_x, v.u_y - ref.u_y)
                         : -std::numeric_limits<double>::infinity();
    };
    // Axis directions, a fan of 48 directions in every coordinate plane (the
    // cone of joint improvement can be narrow), and some dense ones.
    std::vector<std::vector<double>> dirs;
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (double si : {1.0, -1.0}) {
        std::vector<double> d(model.dimension(), 0.0);
        d[active[i]] = si;
        dirs.push_back(d);
      }
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        constexpr int kFan = 48;
        for (int a = 0; a < kFan; ++a) {
          if (a % (kFan / 4) == 0) continue;  // axis directions already present
          const double th = 2.0 * std::numbers::pi * a / kFan;
          std::vector<double> d(model.dimension(), 0.0);
          d[active[i]] = std::cos(th);
          d[active[j]] = std::sin(th);
          dirs.push_back(d);
        }
      }
    }
    for (int r = 0; r < 64; ++r) {
      std::vector<double> d(model.dimension(), 0.0);
      for (std::size_t k : active) d[k] = rng.Uniform(-1.0, 1.0);
      dirs.push_back(d);
    }
    std::vector<double> cur(sol.point);
    double cur_gain = 0.0;
    double scale = 0.5;
    std::size_t evals = 0;
    while (scale > 1e-6 && evals < cfg.probe_evaluations && report.violations.empty()) {
      double best_gain = cur_gain;
      std::vector<double> best;
      for (const auto& d : dirs) {
        std::vector<double> p(cur);
        for (std::size_t k : active) {
          p[k] = std::clamp(cur[k] + scale * d[k] * (hi[k] - lo[k]), lo[k], hi[k]);
        }
        const double g = gain(model.Evaluate(p));
        ++evals;
        if (g > best_gain) {
          best_gain = g;
          best = std::move(p);
        }
      }
      if (best.empty()) {
        scale *= 0.5;
        continue;
      }
      cur = std::move(best);
      cur_gain = best_gain;
      if (cur_gain > tol) check(cur);
    }
  }
  return report;
}

double ConstraintViolation(const FlowVolumeInstance& inst, const FlowVolumeSolution& sol) {
  double worst = 0.0;
  const NashObjective u = EvaluatePoint(inst, sol.point);
  worst = std::max({worst, -u.u_x, -u.u_y});
  for (std::size_t i = 0; i < inst.segments.size(); ++i) {
    const NewSegment& s = inst.segments[i];
    const double attracted = sol.point[2 * i];
    const double rerouted = sol.point[2 * i + 1];
    const double target = attracted + rerouted;
    worst = std::max({worst, -attracted, -rerouted, attracted - target,
                      attracted - s.demand_cap, rerouted - s.reroutable()});
    if (auto it = sol.targets.find(s.segment()); it != sol.targets.end()) {
      worst = std::max(worst, std::abs(it->second - target));
    }
  }
  return worst;
}

}  // namespace pan::agreement
