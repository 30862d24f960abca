#include "pan/bosco.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "pan/parallel.h"
#include "pan/types.h"

namespace pan::bosco {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> ParseList(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = std::min(text.find(',', pos), text.size());
    const std::string tok = text.substr(pos, next - pos);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw InputError("bad number '" + tok + "' in distribution");
    }
    out.push_back(v);
    pos = next + 1;
  }
  return out;
}

std::string Num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Second antiderivative of s^2/4 * [s >= 0].
double TruthfulKernel(double s) { return s > 0.0 ? s * s * s * s / 48.0 : 0.0; }

// Smallest u in [a, b) with positive density, if any.
std::optional<double> LeftmostPlayed(const UtilityDistribution& u, double a, double b) {
  const auto& e = u.edges();
  const auto& mass = u.bin_mass();
  for (std::size_t k = 0; k < mass.size(); ++k) {
    if (mass[k] <= 0.0) continue;
    const double lo = std::max(a, e[k]);
    const double hi = std::min(b, e[k + 1]);
    if (lo < hi) return lo;
  }
  return std::nullopt;
}

Strategy RandomStrategy(const ChoiceSet& choices, const UtilityDistribution& u, Rng& rng) {
  Strategy s;
  s.choices = choices;
  std::vector<double> cuts(choices.W());
  for (double& c : cuts) c = rng.Uniform(u.lo(), u.hi());
  std::sort(cuts.begin(), cuts.end());
  s.thresholds.push_back(-kInf);
  s.thresholds.insert(s.thresholds.end(), cuts.begin(), cuts.end());
  s.thresholds.push_back(kInf);
  return s;
}

}  // namespace

UtilityDistribution UtilityDistribution::Uniform(double lo, double hi) {
  return PiecewiseConstant({lo, hi}, {1.0});
}

UtilityDistribution UtilityDistribution::PiecewiseConstant(std::vector<double> edges,
                                                           std::vector<double> weights) {
  if (edges.size() < 2 || weights.size() + 1 != edges.size()) {
    throw InputError("distribution needs n+1 edges for n weights");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!std::isfinite(edges[k]) || !std::isfinite(edges[k + 1]) || !(edges[k] < edges[k + 1])) {
      throw InputError("distribution edges must be finite and strictly increasing");
    }
    if (!std::isfinite(weights[k]) || weights[k] < 0.0) {
      throw InputError("distribution weights must be finite and >= 0");
    }
    total += weights[k];
  }
  if (!(total > 0.0)) throw InputError("distribution has no mass");
  UtilityDistribution d;
  d.edges_ = std::move(edges);
  d.cum_.push_back(0.0);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    d.mass_.push_back(weights[k] / total);
    d.density_.push_back(d.mass_[k] / (d.edges_[k + 1] - d.edges_[k]));
    d.cum_.push_back(d.cum_.back() + d.mass_[k]);
  }
  d.cum_.back() = 1.0;
  return d;
}

UtilityDistribution UtilityDistribution::Parse(const std::string& text) {
  if (text == "u1") return Uniform(-1.0, 1.0);
  if (text == "u2") return Uniform(-0.5, 1.0);
  if (text.rfind("uniform:", 0) == 0) {
    const auto v = ParseList(text.substr(8));
    if (v.size() != 2) throw InputError("uniform needs LO,HI");
    return Uniform(v[0], v[1]);
  }
  if (text.rfind("pwc:", 0) == 0) {
    const std::string body = text.substr(4);
    const auto colon = body.find(':');
    if (colon == std::string::npos) throw InputError("pwc needs EDGES:WEIGHTS");
    return PiecewiseConstant(ParseList(body.substr(0, colon)), ParseList(body.substr(colon + 1)));
  }
  throw InputError("unknown distribution '" + text + "'");
}

double UtilityDistribution::Density(double u) const {
  if (!(u >= edges_.front()) || !(u < edges_.back())) return 0.0;
  const auto k = std::upper_bound(edges_.begin(), edges_.end(), u) - edges_.begin() - 1;
  return density_[k];
}

double UtilityDistribution::Cdf(double u) const {
  if (!(u > edges_.front())) return 0.0;
  if (!(u < edges_.back())) return 1.0;
  const auto k = std::upper_bound(edges_.begin(), edges_.end(), u) - edges_.begin() - 1;
  return cum_[k] + density_[k] * (u - edges_[k]);
}

double UtilityDistribution::Mass(double a, double b) const {
  if (!(a < b)) return 0.0;
  return std::max(0.0, Cdf(b) - Cdf(a));
}

double UtilityDistribution::FirstMoment(double a, double b) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < mass_.size(); ++k) {
    const double lo = std::max(a, edges_[k]);
    const double hi = std::min(b, edges_[k + 1]);
    if (lo < hi) sum += density_[k] * (hi - lo) * (hi + lo) / 2.0;
  }
  return sum;
}

double UtilityDistribution::Sample(Rng& rng) const {
  const double r = rng.Uniform01();
  auto k = std::upper_bound(cum_.begin() + 1, cum_.end(), r) - cum_.begin() - 1;
  k = std::min<std::ptrdiff_t>(k, static_cast<std::ptrdiff_t>(mass_.size()) - 1);
  while (mass_[k] <= 0.0) --k;  // r never lands in an empty bin except on ties
  return edges_[k] + (edges_[k + 1] - edges_[k]) * rng.Uniform01();
}

std::string UtilityDistribution::ToString() const {
  if (mass_.size() == 1) return "uniform:" + Num(edges_[0]) + "," + Num(edges_[1]);
  std::string out = "pwc:";
  for (std::size_t k = 0; k < edges_.size(); ++k) out += (k ? "," : "") + Num(edges_[k]);
  out += ":";
  for (std::size_t k = 0; k < mass_.size(); ++k) out += (k ? "," : "") + Num(mass_[k]);
  return out;
}

std::string Claim::ToString() const { return cancel ? "cancel" : Num(value); }

ChoiceSet::ChoiceSet(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw InputError("choices must be finite");
    if (i > 0 && !(values_[i - 1] < values_[i])) {
      throw InputError("choices must be strictly increasing");
    }
  }
}

Strategy Strategy::FloorTruthful(const ChoiceSet& choices) {
  Strategy s;
  s.choices = choices;
  s.thresholds.push_back(-kInf);
  s.thresholds.insert(s.thresholds.end(), choices.values().begin(), choices.values().end());
  s.thresholds.push_back(kInf);
  return s;
}

std::size_t Strategy::OptionAt(double u) const {
  const auto it = std::upper_bound(thresholds.begin(), thresholds.end(), u);
  return static_cast<std::size_t>(it - thresholds.begin()) - 1;
}

void Strategy::Validate() const {
  if (thresholds.size() != choices.options() + 1) {
    throw InputError("strategy needs one threshold per option plus one");
  }
  if (thresholds.front() != -kInf || thresholds.back() != kInf) {
    throw InputError("strategy thresholds must start at -inf and end at +inf");
  }
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (std::isnan(thresholds[i]) || thresholds[i] < thresholds[i - 1]) {
      throw InputError("strategy thresholds must be non-decreasing");
    }
  }
}

bool SameStrategy(const Strategy& a, const Strategy& b, double tol) {
  if (a.choices.values() != b.choices.values() || a.thresholds.size() != b.thresholds.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.thresholds.size(); ++i) {
    const double x = a.thresholds[i];
    const double y = b.thresholds[i];
    if (std::isinf(x) || std::isinf(y)) {
      if (x != y) return false;
    } else if (std::abs(x - y) > tol) {
      return false;
    }
  }
  return true;
}

SettlementOutcome Settle(const Claim& v_x, const Claim& v_y, double u_x, double u_y) {
  SettlementOutcome out;
  if (v_x.cancel || v_y.cancel || !(v_x.value + v_y.value >= 0.0)) return out;
  out.concluded = true;
  out.transfer = (v_x.value - v_y.value) / 2.0;
  out.post_u_x = u_x - out.transfer;
  out.post_u_y = u_y + out.transfer;
  return out;
}

std::vector<double> ChoiceProbabilities(const Strategy& sigma, const UtilityDistribution& u) {
  std::vector<double> p(sigma.choices.options());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = u.Mass(sigma.thresholds[i], sigma.thresholds[i + 1]);
  }
  return p;
}

std::vector<ResponseLine> ResponseLines(const ChoiceSet& v_x, const Strategy& sigma_y,
                                        const UtilityDistribution& u_y) {
  const auto prob = ChoiceProbabilities(sigma_y, u_y);
  const auto& claims = sigma_y.choices.values();
  // Suffix sums over the opponent's finite claims; accumulating from the top
  // keeps m exactly non-decreasing in the claim.
  const std::size_t w = claims.size();
  std::vector<double> mass(w + 1, 0.0);
  std::vector<double> moment(w + 1, 0.0);
  for (std::size_t j = w; j-- > 0;) {
    mass[j] = mass[j + 1] + prob[j + 1];
    moment[j] = moment[j + 1] + prob[j + 1] * claims[j];
  }
  std::vector<ResponseLine> lines(v_x.options());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const double v = v_x.values()[i - 1];
    const std::size_t k = std::lower_bound(claims.begin(), claims.end(), -v) - claims.begin();
    lines[i].m = mass[k];
    lines[i].q = (moment[k] - v * mass[k]) / 2.0;
  }
  return lines;
}

Strategy ComputeBestResponse(const std::vector<ResponseLine>& lines, const ChoiceSet& v_x) {
  const std::size_t n = v_x.options();
  if (lines.size() != n) throw InputError("one response line per option required");
  Strategy s;
  s.choices = v_x;
  s.thresholds.assign(n + 1, kInf);
  s.thresholds[0] = -kInf;

  auto crossing = [&](std::size_t i, std::size_t j) {
    return (lines[j].q - lines[i].q) / (lines[i].m - lines[j].m);
  };
  std::size_t i = 0;
  for (;;) {
    std::size_t best = n;
    double best_u = kInf;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (lines[j].m == lines[i].m) continue;
      const double u = crossing(i, j);
      if (best == n || u < best_u || (u == best_u && lines[j].m > lines[best].m)) {
        best = j;
        best_u = u;
      }
    }
    if (best == n) break;
    s.thresholds[best] = std::max(best_u, s.thresholds[i]);
    i = best;
  }
  // Options skipped by the walk inherit the next threshold, giving them
  // empty intervals while keeping the vector non-decreasing.
  for (std::size_t k = n; k-- > 1;) {
    s.thresholds[k] = std::min(s.thresholds[k], s.thresholds[k + 1]);
  }
  return s;
}

bool VerifyEquilibrium(const Strategy& sigma_x, const Strategy& sigma_y,
                       const UtilityDistribution& u_x, const UtilityDistribution& u_y,
                       double tol) {
  const Strategy bx = ComputeBestResponse(ResponseLines(sigma_x.choices, sigma_y, u_y),
                                          sigma_x.choices);
  const Strategy by = ComputeBestResponse(ResponseLines(sigma_y.choices, sigma_x, u_x),
                                          sigma_y.choices);
  return SameStrategy(bx, sigma_x, tol) && SameStrategy(by, sigma_y, tol);
}

Equilibrium FindEquilibrium(const ChoiceSet& v_x, const ChoiceSet& v_y,
                            const UtilityDistribution& u_x, const UtilityDistribution& u_y,
                            const EquilibriumConfig& cfg) {
  Equilibrium eq;
  Rng rng(cfg.seed);
  for (int attempt = 0; attempt <= cfg.restarts; ++attempt) {
    Strategy sx = attempt == 0 ? Strategy::FloorTruthful(v_x) : RandomStrategy(v_x, u_x, rng);
    Strategy sy = attempt == 0 ? Strategy::FloorTruthful(v_y) : RandomStrategy(v_y, u_y, rng);
    eq.restarts_used = attempt;
    for (int it = 0; it < cfg.max_alternations; ++it) {
      ++eq.iterations;
      Strategy nx = ComputeBestResponse(ResponseLines(v_x, sy, u_y), v_x);
      Strategy ny = ComputeBestResponse(ResponseLines(v_y, nx, u_x), v_y);
      const bool fixpoint =
          SameStrategy(nx, sx, cfg.tolerance) && SameStrategy(ny, sy, cfg.tolerance);
      sx = std::move(nx);
      sy = std::move(ny);
      if (fixpoint) {
        eq.sigma_x = std::move(sx);
        eq.sigma_y = std::move(sy);
        eq.converged = true;
        eq.verified = VerifyEquilibrium(eq.sigma_x, eq.sigma_y, u_x, u_y, cfg.tolerance);
        return eq;
      }
    }
    eq.sigma_x = std::move(sx);
    eq.sigma_y = std::move(sy);
  }
  return eq;
}

double ExpectedNashProduct(const Strategy& sigma_x, const Strategy& sigma_y,
                           const UtilityDistribution& u_x, const UtilityDistribution& u_y) {
  struct Piece {
    double value, m0, m1;
  };
  auto pieces = [](const Strategy& s, const UtilityDistribution& u) {
    std::vector<Piece> out;
    for (std::size_t i = 1; i < s.choices.options(); ++i) {
      const double a = s.thresholds[i];
      const double b = s.thresholds[i + 1];
      const double m0 = u.Mass(a, b);
      if (m0 > 0.0) out.push_back({s.choices.values()[i - 1], m0, u.FirstMoment(a, b)});
    }
    return out;
  };
  const auto px = pieces(sigma_x, u_x);
  const auto py = pieces(sigma_y, u_y);
  // On a rectangle, (u_x - P)(u_y + P) integrates to
  // M1x M1y + P (M1x M0y - M0x M1y) - P^2 M0x M0y.
  double sum = 0.0;
  for (const Piece& x : px) {
    for (const Piece& y : py) {
      if (!(x.value + y.value >= 0.0)) continue;
      const double t = (x.value - y.value) / 2.0;
      sum += x.m1 * y.m1 + t * (x.m1 * y.m0 - x.m0 * y.m1) - t * t * x.m0 * y.m0;
    }
  }
  return sum;
}

double TruthfulExpectedNashProduct(const UtilityDistribution& u_x,
                                   const UtilityDistribution& u_y) {
  // Concluded iff u_x + u_y >= 0 with N = ((u_x + u_y) / 2)^2; over a
  // rectangle of constant density this is a second difference of the
  // kernel's antiderivative.
  const auto& ex = u_x.edges();
  const auto& ey = u_y.edges();
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < ex.size(); ++i) {
    const double dx = u_x.bin_mass()[i] / (ex[i + 1] - ex[i]);
    if (dx <= 0.0) continue;
    for (std::size_t j = 0; j + 1 < ey.size(); ++j) {
      const double dy = u_y.bin_mass()[j] / (ey[j + 1] - ey[j]);
      if (dy <= 0.0) continue;
      const double box = TruthfulKernel(ex[i + 1] + ey[j + 1]) - TruthfulKernel(ex[i] + ey[j + 1]) -
                         TruthfulKernel(ex[i + 1] + ey[j]) + TruthfulKernel(ex[i] + ey[j]);
      sum += dx * dy * box;
    }
  }
  return sum;
}

double PriceOfDishonesty(const Strategy& sigma_x, const Strategy& sigma_y,
                         const UtilityDistribution& u_x, const UtilityDistribution& u_y) {
  const double truthful = TruthfulExpectedNashProduct(u_x, u_y);
  if (!(truthful > 0.0)) {
    throw InputError("price of dishonesty undefined: agreement never viable under honesty");
  }
  return 1.0 - ExpectedNashProduct(sigma_x, sigma_y, u_x, u_y) / truthful;
}

std::size_t EquilibriumChoiceCount(const Strategy& sigma) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < sigma.choices.options(); ++i) n += !sigma.IntervalEmpty(i);
  return n;
}

double ShortestPlayedInterval(const Strategy& sigma, const UtilityDistribution& u) {
  double shortest = kInf;
  for (std::size_t i = 1; i < sigma.choices.options(); ++i) {
    const double a = std::max(sigma.thresholds[i], u.lo());
    const double b = std::min(sigma.thresholds[i + 1], u.hi());
    if (a < b && u.Mass(a, b) > 0.0) shortest = std::min(shortest, b - a);
  }
  return shortest;
}

ChoiceSet GenerateChoiceSet(const UtilityDistribution& u, std::size_t w, Rng& rng) {
  if (w == 0) throw InputError("choice set needs at least one choice");
  std::set<double> values;
  while (values.size() < w) values.insert(u.Sample(rng));
  return ChoiceSet(std::vector<double>(values.begin(), values.end()));
}

ChoiceSet GenerateChoiceSet(const UtilityDistribution& u, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  return GenerateChoiceSet(u, w, rng);
}

PropertyReport CheckProperties(const Strategy& sigma_x, const Strategy& sigma_y,
                               const UtilityDistribution& u_x, const UtilityDistribution& u_y) {
  PropertyReport r;
  r.min_post_utility = kInf;
  r.min_concluded_surplus = kInf;
  struct Played {
    double value, left;
  };
  auto played = [&](const Strategy& s, const UtilityDistribution& u) {
    std::vector<Played> out;
    for (std::size_t i = 1; i < s.choices.options(); ++i) {
      const double a = s.thresholds[i];
      const double b = s.thresholds[i + 1];
      if (a < b && !(b - a > 0.0)) r.singleton_interval = true;
      if (auto left = LeftmostPlayed(u, a, b)) out.push_back({s.choices.values()[i - 1], *left});
    }
    return out;
  };
  const auto px = played(sigma_x, u_x);
  const auto py = played(sigma_y, u_y);
  for (const Played& x : px) {
    for (const Played& y : py) {
      const auto out = Settle(Claim::Of(x.value), Claim::Of(y.value), x.left, y.left);
      if (!out.concluded) continue;
      r.min_post_utility = std::min({r.min_post_utility, out.post_u_x, out.post_u_y});
      r.min_concluded_surplus = std::min(r.min_concluded_surplus, x.left + y.left);
    }
  }
  if (std::isinf(r.min_post_utility)) r.min_post_utility = 0.0;
  if (std::isinf(r.min_concluded_surplus)) r.min_concluded_surplus = 0.0;
  r.pod = PriceOfDishonesty(sigma_x, sigma_y, u_x, u_y);
  r.shortest_interval =
      std::min(ShortestPlayedInterval(sigma_x, u_x), ShortestPlayedInterval(sigma_y, u_y));
  return r;
}

PodTrial RunPodTrial(const PodExperimentConfig& cfg, std::size_t w, std::size_t trial) {
  Rng rng(DeriveSeed(cfg.seed, w, trial));
  const ChoiceSet v_x = GenerateChoiceSet(cfg.u_x, w, rng);
  const ChoiceSet v_y = GenerateChoiceSet(cfg.u_y, w, rng);
  EquilibriumConfig ec = cfg.equilibrium;
  ec.seed = rng.NextU64();
  const Equilibrium eq = FindEquilibrium(v_x, v_y, cfg.u_x, cfg.u_y, ec);
  PodTrial t;
  t.iterations = eq.iterations;
  t.converged = eq.converged && eq.verified;
  if (!t.converged) return t;
  t.pod = PriceOfDishonesty(eq.sigma_x, eq.sigma_y, cfg.u_x, cfg.u_y);
  t.eq_choices =
      (EquilibriumChoiceCount(eq.sigma_x) + EquilibriumChoiceCount(eq.sigma_y)) / 2.0;
  return t;
}

std::vector<PodRow> PodExperiment(const PodExperimentConfig& cfg) {
  if (cfg.trials == 0) throw InputError("pod experiment needs at least one trial");
  std::vector<PodRow> rows;
  for (std::size_t w : cfg.choice_counts) {
    std::vector<PodTrial> trials(cfg.trials);
    ParallelFor(cfg.trials, cfg.threads, [&](std::size_t t) { trials[t] = RunPodTrial(cfg, w, t); });
    PodRow row;
    row.w = w;
    row.min_pod = kInf;
    double pod_sum = 0.0;
    double choice_sum = 0.0;
    for (const PodTrial& t : trials) {
      if (!t.converged) {
        ++row.nonconverged;
        continue;
      }
      ++row.converged;
      row.min_pod = std::min(row.min_pod, t.pod);
      pod_sum += t.pod;
      choice_sum += t.eq_choices;
    }
    if (row.converged > 0) {
      row.mean_pod = pod_sum / row.converged;
      row.mean_eq_choices = choice_sum / row.converged;
    } else {
      row.min_pod = row.mean_pod = row.mean_eq_choices = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

NegotiationResult Negotiate(const NegotiationConfig& cfg, double u_x, double u_y) {
  std::optional<NegotiationResult> best;
  for (std::size_t c = 0; c < cfg.candidates; ++c) {
    Rng rng(DeriveSeed(cfg.seed, 0x6e65, c));
    NegotiationResult r;
    r.v_x = GenerateChoiceSet(cfg.u_x, cfg.w, rng);
    r.v_y = GenerateChoiceSet(cfg.u_y, cfg.w, rng);
    EquilibriumConfig ec = cfg.equilibrium;
    ec.seed = rng.NextU64();
    r.equilibrium = FindEquilibrium(r.v_x, r.v_y, cfg.u_x, cfg.u_y, ec);
    if (!r.equilibrium.converged || !r.equilibrium.verified) continue;
    r.pod = PriceOfDishonesty(r.equilibrium.sigma_x, r.equilibrium.sigma_y, cfg.u_x, cfg.u_y);
    r.candidate = c;
    if (!best || r.pod < best->pod) best = std::move(r);
  }
  if (!best) throw InfeasibleError("no candidate choice-set pair reached an equilibrium");
  best->claim_x = best->equilibrium.sigma_x.ClaimAt(u_x);
  best->claim_y = best->equilibrium.sigma_y.ClaimAt(u_y);
  best->settlement = Settle(best->claim_x, best->claim_y, u_x, u_y);
  return *best;
}

}  // namespace pan::bosco
