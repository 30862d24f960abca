#ifndef PAN_BOSCO_H
#define PAN_BOSCO_H

// One-shot bargaining over a cash transfer. The mediator publishes utility
// distributions and finite claim menus, the parties play threshold
// strategies, and the agreement is concluded iff the claims sum to >= 0.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pan/rng.h"

namespace pan::bosco {

// Piecewise-constant density on [edges.front(), edges.back()]. A uniform
// distribution is the single-bin case.
class UtilityDistribution {
 public:
  static UtilityDistribution Uniform(double lo, double hi);
  // `weights` are relative bin masses, normalized internally.
  static UtilityDistribution PiecewiseConstant(std::vector<double> edges,
                                               std::vector<double> weights);
  // "u1" = uniform(-1,1), "u2" = uniform(-0.5,1), "uniform:LO,HI" or
  // "pwc:E0,E1,...,En:W1,...,Wn".
  static UtilityDistribution Parse(const std::string& text);

  double Density(double u) const;
  double Cdf(double u) const;
  // P[a <= u < b]; bounds may be infinite.
  double Mass(double a, double b) const;
  // Integral of u * density over [a, b).
  double FirstMoment(double a, double b) const;
  double Sample(Rng& rng) const;

  double lo() const { return edges_.front(); }
  double hi() const { return edges_.back(); }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& bin_mass() const { return mass_; }
  std::string ToString() const;

 private:
  std::vector<double> edges_;
  std::vector<double> mass_;     // per bin, sums to 1
  std::vector<double> density_;  // per bin
  std::vector<double> cum_;      // cum_[k] = mass below edges_[k]
};

// A claim: either a finite amount of money or the cancel option, which is
// kept symbolic and never enters arithmetic.
struct Claim {
  bool cancel = true;
  double value = 0.0;

  static Claim Cancel() { return {}; }
  static Claim Of(double v) { return {false, v}; }
  std::string ToString() const;
  friend bool operator==(const Claim&, const Claim&) = default;
};

// Option 0 is cancel; options 1..W are the finite claims in increasing order.
class ChoiceSet {
 public:
  ChoiceSet() = default;
  // Throws InputError unless values are finite and strictly increasing.
  explicit ChoiceSet(std::vector<double> values);

  std::size_t W() const { return values_.size(); }
  std::size_t options() const { return values_.size() + 1; }
  Claim option(std::size_t i) const {
    return i == 0 ? Claim::Cancel() : Claim::Of(values_[i - 1]);
  }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

// sigma(u) = option i iff u in [t_i, t_{i+1}); t_0 = -inf, t_options = +inf.
// Empty intervals are allowed (t_i == t_{i+1}).
struct Strategy {
  ChoiceSet choices;
  std::vector<double> thresholds;

  // Claims the largest finite choice <= u, cancel below the smallest one.
  static Strategy FloorTruthful(const ChoiceSet& choices);

  std::size_t OptionAt(double u) const;
  Claim ClaimAt(double u) const { return choices.option(OptionAt(u)); }
  bool IntervalEmpty(std::size_t i) const { return !(thresholds[i] < thresholds[i + 1]); }
  // Throws InputError on a malformed threshold vector.
  void Validate() const;
};

// Same choice map and thresholds within `tol` (infinite values must match).
bool SameStrategy(const Strategy& a, const Strategy& b, double tol = 1e-9);

struct SettlementOutcome {
  bool concluded = false;
  double transfer = 0.0;  // X pays Y
  double post_u_x = 0.0;
  double post_u_y = 0.0;
};

SettlementOutcome Settle(const Claim& v_x, const Claim& v_y, double u_x, double u_y);

// Probability of each option of `sigma` under `u`; sums to 1.
std::vector<double> ChoiceProbabilities(const Strategy& sigma, const UtilityDistribution& u);

// Expected after-negotiation utility of claiming a choice is m * u + q.
struct ResponseLine {
  double m = 0.0;
  double q = 0.0;
};

// One line per option of v_x against the opponent strategy; cancel is (0, 0).
std::vector<ResponseLine> ResponseLines(const ChoiceSet& v_x, const Strategy& sigma_y,
                                        const UtilityDistribution& u_y);

// Upper envelope of the response lines walked from the cancel option towards
// steeper lines. Lines never on the envelope, and all but the lowest-index
// copy of identical lines, get empty intervals.
Strategy ComputeBestResponse(const std::vector<ResponseLine>& lines, const ChoiceSet& v_x);

struct EquilibriumConfig {
  int max_alternations = 500;
  int restarts = 10;        // random re-initializations after a failed run
  std::uint64_t seed = 0;   // drives the restart initializations
  double tolerance = 1e-9;  // fixpoint test on thresholds
};

struct Equilibrium {
  Strategy sigma_x;
  Strategy sigma_y;
  bool converged = false;
  bool verified = false;  // mutual best response recomputed after convergence
  int iterations = 0;     // alternations summed over all attempts
  int restarts_used = 0;
};

// Alternating best-response dynamics from the floor-truthful strategies.
Equilibrium FindEquilibrium(const ChoiceSet& v_x, const ChoiceSet& v_y,
                            const UtilityDistribution& u_x, const UtilityDistribution& u_y,
                            const EquilibriumConfig& cfg = {});

bool VerifyEquilibrium(const Strategy& sigma_x, const Strategy& sigma_y,
                       const UtilityDistribution& u_x, const UtilityDistribution& u_y,
                       double tol = 1e-9);

// Exact integral under the product of the marginals: strategies are step
// functions, so each pair of intervals contributes a closed-form term.
double ExpectedNashProduct(const Strategy& sigma_x, const Strategy& sigma_y,
                           const UtilityDistribution& u_x, const UtilityDistribution& u_y);

// Same quantity when both parties claim their true utility.
double TruthfulExpectedNashProduct(const UtilityDistribution& u_x,
                                   const UtilityDistribution& u_y);

// 1 - E[N | sigma] / E[N | truthful]. Throws InputError if the truthful
// baseline is zero.
double PriceOfDishonesty(const Strategy& sigma_x, const Strategy& sigma_y,
                         const UtilityDistribution& u_x, const UtilityDistribution& u_y);

// Options, cancel included, whose interval is non-empty.
std::size_t EquilibriumChoiceCount(const Strategy& sigma);

// Length of the shortest non-empty interval intersected with the support;
// a privacy diagnostic. Infinity when no finite choice is played.
double ShortestPlayedInterval(const Strategy& sigma, const UtilityDistribution& u);

// W distinct i.i.d. samples of `u`, sorted.
ChoiceSet GenerateChoiceSet(const UtilityDistribution& u, std::size_t w, Rng& rng);
ChoiceSet GenerateChoiceSet(const UtilityDistribution& u, std::size_t w, std::uint64_t seed);

// Worst-case slack of the mechanism properties at an equilibrium, computed
// exactly over all interval pairs with positive probability (utilities are
// linear on each interval, so the infimum sits at the left end).
struct PropertyReport {
  double min_post_utility = 0.0;    // strong individual rationality, >= 0
  double min_concluded_surplus = 0.0;  // soundness: u_x + u_y when concluded, >= 0
  double pod = 0.0;                 // in [0, 1]
  bool singleton_interval = false;  // privacy: a non-empty interval of zero length
  double shortest_interval = 0.0;
};

PropertyReport CheckProperties(const Strategy& sigma_x, const Strategy& sigma_y,
                               const UtilityDistribution& u_x, const UtilityDistribution& u_y);

struct PodExperimentConfig {
  UtilityDistribution u_x = UtilityDistribution::Uniform(-1, 1);
  UtilityDistribution u_y = UtilityDistribution::Uniform(-1, 1);
  std::vector<std::size_t> choice_counts{5, 10, 20, 50, 100, 200};
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  EquilibriumConfig equilibrium;
};

struct PodTrial {
  bool converged = false;
  double pod = 0.0;
  double eq_choices = 0.0;  // mean over both parties
  int iterations = 0;
};

struct PodRow {
  std::size_t w = 0;
  double min_pod = 0.0;
  double mean_pod = 0.0;
  double mean_eq_choices = 0.0;
  std::size_t converged = 0;
  std::size_t nonconverged = 0;
  bool missing() const { return converged == 0; }
};

// Trial t for W uses choice sets drawn from DeriveSeed(seed, W, t), so a row
// does not depend on which other W are requested or on the schedule.
PodTrial RunPodTrial(const PodExperimentConfig& cfg, std::size_t w, std::size_t trial);
std::vector<PodRow> PodExperiment(const PodExperimentConfig& cfg);

struct NegotiationConfig {
  UtilityDistribution u_x = UtilityDistribution::Uniform(-1, 1);
  UtilityDistribution u_y = UtilityDistribution::Uniform(-1, 1);
  std::size_t w = 50;
  std::size_t candidates = 20;  // random choice-set pairs tried by the mediator
  std::uint64_t seed = 0;
  EquilibriumConfig equilibrium;
};

struct NegotiationResult {
  ChoiceSet v_x;
  ChoiceSet v_y;
  Equilibrium equilibrium;
  double pod = 1.0;
  std::size_t candidate = 0;  // index of the chosen pair
  Claim claim_x;
  Claim claim_y;
  SettlementOutcome settlement;
};

// The mediator keeps the converged candidate with the lowest PoD; the
// parties then play it with their true utilities. Throws InfeasibleError
// if no candidate converges.
NegotiationResult Negotiate(const NegotiationConfig& cfg, double u_x, double u_y);

}  // namespace pan::bosco

#endif  // PAN_BOSCO_H
