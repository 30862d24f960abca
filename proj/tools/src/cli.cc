#include "pan/cli/cli.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pan/agreement_opt.h"
#include "pan/bosco.h"
#include "pan/cli/emit.h"
#include "pan/econ_io.h"
#include "pan/geo.h"
#include "pan/parallel.h"
#include "pan/topology.h"

#ifndef PAN_VERSION
#define PAN_VERSION "0.0.0"
#endif

namespace pan::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFormats = "relationships=caida-serial-1 econ=1 pfx2as=1 geo-csv=1 georel-csv=1 results=1";

// Output options shared by every subcommand.
struct Sink {
  std::string path;
  std::string format;
  bool force = false;
};

void AddSinkOptions(CLI::App* cmd, Sink& sink) {
  cmd->add_option("--out", sink.path, "Output file (stdout if omitted)");
  cmd->add_option("--format", sink.format, "csv or json (default: from --out extension)")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--force", sink.force, "Overwrite an existing output file");
}

// Never carries wall time or anything else that varies between runs.
Json ConfigBase(const std::string& command) {
  Json c;
  c["command"] = command;
  c["version"] = PAN_VERSION;
  return c;
}

void Emit(const Sink& sink, const Json& config, const Table& table, std::ostream& out) {
  const Format fmt = !sink.format.empty() ? ParseFormat(sink.format)
                     : sink.path.empty()  ? Format::kCsv
                                          : FormatForPath(sink.path);
  const std::string text = fmt == Format::kJson ? RenderJson(config, table) : RenderCsv(table);
  if (sink.path.empty()) {
    out << text;
  } else {
    WriteOutput(sink.path, text, sink.force);
  }
}

// Refuse up front, before any expensive work.
void CheckWritable(const Sink& sink) {
  if (!sink.path.empty() && !sink.force && std::filesystem::exists(sink.path)) {
    throw std::runtime_error("output '" + sink.path + "' exists; pass --force to overwrite");
  }
}

Cell Id(AsId as) { return as.value; }

std::string Fmt(double v) { return FormatDouble(v); }

// Mean over a selection, reported with the maximum.
struct Summary {
  double mean = 0.0;
  double max = 0.0;
};
template <typename Fn>
Summary Summarize(std::size_t n, Fn&& value) {
  Summary s;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = value(i);
    s.mean += v;
    s.max = i == 0 ? v : std::max(s.max, v);
  }
  if (n) s.mean /= static_cast<double>(n);
  return s;
}

// ---------------------------------------------------------------- commands

struct CashArgs {
  double ux = 0.0;
  double uy = 0.0;
  Sink sink;
};

int RunOptimizeCash(const CashArgs& a, std::ostream& out) {
  CheckWritable(a.sink);
  const auto sol = agreement::OptimizeCash(a.ux, a.uy);
  const bool concluded = sol.status == agreement::CashStatus::kConcluded;
  out << "status=" << (concluded ? "concluded" : "not_viable") << "\n";
  out << "Pi=" << Fmt(sol.transfer) << "\n";
  out << "post_u_x=" << Fmt(sol.post_u_x) << "\n";
  out << "post_u_y=" << Fmt(sol.post_u_y) << "\n";
  if (!a.sink.path.empty()) {
    Json cfg = ConfigBase("optimize-cash");
    cfg["ux"] = a.ux;
    cfg["uy"] = a.uy;
    Table t{{"u_x", "u_y", "status", "transfer", "post_u_x", "post_u_y"}, {}};
    t.Add({a.ux, a.uy, std::string(concluded ? "concluded" : "not_viable"), sol.transfer,
           sol.post_u_x, sol.post_u_y});
    Emit(a.sink, cfg, t, out);
  }
  return kExitOk;
}

struct FlowArgs {
  std::string econ;
  agreement::SolverConfig solver;
  std::uint64_t seed = 0;
  bool audit = false;
  Sink sink;
};

int RunOptimizeFlows(FlowArgs a, std::ostream& out) {
  CheckWritable(a.sink);
  const econ::EconModel m = econ::LoadEconModel(a.econ);
  if (!m.agreement) throw InputError(a.econ + ": no AGREE record");
  const econ::Agreement& ag = *m.agreement;
  const auto inst = agreement::FlowVolumeInstance::Build(
      m.Profile(ag.party_x), m.Flows(ag.party_x), m.Profile(ag.party_y), m.Flows(ag.party_y), ag,
      m.demand_caps);
  a.solver.seed = a.seed;
  const auto sol = agreement::OptimizeFlowVolumes(inst, a.solver);

  out << "agreement " << ag.party_x.ToString() << "-" << ag.party_y.ToString() << ": "
      << inst.segments.size() << " new segments\n";
  out << "status=" << agreement::ToString(sol.status) << "\n";
  if (sol.status != agreement::FlowStatus::kInfeasible) {
    out << "u_x=" << Fmt(sol.utilities.u_x) << " u_y=" << Fmt(sol.utilities.u_y)
        << " nash_product=" << Fmt(sol.utilities.product()) << "\n";
    out << "constraint_violation=" << Fmt(agreement::ConstraintViolation(inst, sol)) << "\n";
  }
  if (a.audit && sol.status == agreement::FlowStatus::kOptimal) {
    agreement::AuditConfig acfg;
    acfg.seed = DeriveSeed(a.seed, 1, 0);
    const auto rep = agreement::ParetoFairnessAudit(inst, sol, acfg);
    out << "audit=" << (rep.passed() ? "pass" : "fail") << " points=" << rep.points_checked
        << " violations=" << rep.violations.size() << "\n";
  }

  Json cfg = ConfigBase("optimize-flows");
  cfg["econ"] = a.econ;
  cfg["grid_points"] = a.solver.grid_points;
  cfg["ascent_iters"] = a.solver.ascent_iters;
  cfg["tolerance"] = a.solver.tolerance;
  cfg["random_starts"] = a.solver.random_starts;
  cfg["random_directions"] = a.solver.random_directions;
  cfg["seed"] = a.seed;
  cfg["status"] = agreement::ToString(sol.status);
  Table t{{"beneficiary", "partner", "target", "attracted", "rerouted", "volume", "u_x", "u_y"},
          {}};
  if (sol.status != agreement::FlowStatus::kInfeasible) {
    for (std::size_t s = 0; s < inst.segments.size(); ++s) {
      const auto& seg = inst.segments[s];
      const double att = sol.point[2 * s];
      const double rer = sol.point[2 * s + 1];
      t.Add({seg.beneficiary.ToString(), seg.partner.ToString(), seg.target.ToString(), att, rer,
             att + rer, sol.utilities.u_x, sol.utilities.u_y});
    }
  }
  Emit(a.sink, cfg, t, out);
  return sol.status == agreement::FlowStatus::kInfeasible ? kExitNoSolution : kExitOk;
}

struct MechanismArgs {
  int max_alternations = 500;
  int restarts = 10;
};

void AddMechanismOptions(CLI::App* cmd, MechanismArgs& m) {
  cmd->add_option("--max-alternations", m.max_alternations, "Best-response rounds per attempt")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--restarts", m.restarts, "Random restarts after a failed attempt")
      ->check(CLI::NonNegativeNumber);
}

struct PodArgs {
  std::string dist = "u1";
  std::string ux_dist;
  std::string uy_dist;
  std::vector<std::size_t> choices{5, 10, 20, 50, 100, 200};
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  MechanismArgs mech;
  Sink sink;
};

int RunPod(const PodArgs& a, std::ostream& out, std::ostream& err) {
  CheckWritable(a.sink);
  bosco::PodExperimentConfig cfg;
  cfg.u_x = bosco::UtilityDistribution::Parse(a.ux_dist.empty() ? a.dist : a.ux_dist);
  cfg.u_y = bosco::UtilityDistribution::Parse(a.uy_dist.empty() ? a.dist : a.uy_dist);
  cfg.choice_counts = a.choices;
  cfg.trials = a.trials;
  cfg.seed = a.seed;
  cfg.threads = WorkerCount();
  cfg.equilibrium.max_alternations = a.mech.max_alternations;
  cfg.equilibrium.restarts = a.mech.restarts;
  for (std::size_t w : a.choices) {
    if (w == 0) throw InputError("--choices entries must be positive");
  }

  const auto start = std::chrono::steady_clock::now();
  const auto rows = bosco::PodExperiment(cfg);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json jc = ConfigBase("pod");
  jc["ux_dist"] = cfg.u_x.ToString();
  jc["uy_dist"] = cfg.u_y.ToString();
  jc["choices"] = a.choices;
  jc["trials"] = a.trials;
  jc["seed"] = a.seed;
  jc["max_alternations"] = a.mech.max_alternations;
  jc["restarts"] = a.mech.restarts;
  Table t{{"W", "min_pod", "mean_pod", "mean_eq_choices", "nonconverged"}, {}};
  bool any_missing = false;
  for (const auto& r : rows) {
    any_missing |= r.missing();
    if (r.missing()) {
      t.Add({std::uint64_t{r.w}, std::monostate{}, std::monostate{}, std::monostate{},
             std::uint64_t{r.nonconverged}});
    } else {
      t.Add({std::uint64_t{r.w}, r.min_pod, r.mean_pod, r.mean_eq_choices,
             std::uint64_t{r.nonconverged}});
    }
  }
  Emit(a.sink, jc, t, out);
  // Timing goes to stderr so result files stay byte-stable.
  err << "pod: " << rows.size() << " rows, " << a.trials << " trials each, " << Fmt(secs)
      << " s\n";
  if (any_missing) {
    err << "pod: no equilibrium found for at least one W\n";
    return kExitNoSolution;
  }
  return kExitOk;
}

struct NegotiateArgs {
  std::string ux_dist = "u1";
  std::string uy_dist = "u1";
  double ux = 0.0;
  double uy = 0.0;
  std::size_t w = 50;
  std::size_t candidates = 20;
  std::uint64_t seed = 0;
  MechanismArgs mech;
  Sink sink;
};

void PrintStrategy(std::ostream& out, const char* who, const bosco::Strategy& s) {
  out << "equilibrium " << who << ":\n";
  for (std::size_t i = 0; i < s.choices.options(); ++i) {
    if (s.IntervalEmpty(i)) continue;
    out << "  " << s.choices.option(i).ToString() << " on [" << Fmt(s.thresholds[i]) << ", "
        << Fmt(s.thresholds[i + 1]) << ")\n";
  }
}

void PrintChoices(std::ostream& out, const char* who, const bosco::ChoiceSet& v) {
  out << "choices " << who << ": cancel";
  for (double x : v.values()) out << " " << Fmt(x);
  out << "\n";
}

int RunNegotiate(const NegotiateArgs& a, std::ostream& out) {
  CheckWritable(a.sink);
  bosco::NegotiationConfig cfg;
  cfg.u_x = bosco::UtilityDistribution::Parse(a.ux_dist);
  cfg.u_y = bosco::UtilityDistribution::Parse(a.uy_dist);
  cfg.w = a.w;
  cfg.candidates = a.candidates;
  cfg.seed = a.seed;
  cfg.equilibrium.max_alternations = a.mech.max_alternations;
  cfg.equilibrium.restarts = a.mech.restarts;
  if (a.w == 0 || a.candidates == 0) throw InputError("--choices and --candidates must be positive");

  const auto res = bosco::Negotiate(cfg, a.ux, a.uy);
  out << "distribution X: " << cfg.u_x.ToString() << "\n";
  out << "distribution Y: " << cfg.u_y.ToString() << "\n";
  out << "mediator: candidate " << res.candidate << " of " << a.candidates
      << ", PoD=" << Fmt(res.pod) << "\n";
  PrintChoices(out, "X", res.v_x);
  PrintChoices(out, "Y", res.v_y);
  PrintStrategy(out, "X", res.equilibrium.sigma_x);
  PrintStrategy(out, "Y", res.equilibrium.sigma_y);
  out << "claims: X=" << res.claim_x.ToString() << " Y=" << res.claim_y.ToString() << "\n";
  if (res.settlement.concluded) {
    out << "settlement: concluded, X pays Y " << Fmt(res.settlement.transfer)
        << ", post_u_x=" << Fmt(res.settlement.post_u_x)
        << ", post_u_y=" << Fmt(res.settlement.post_u_y) << "\n";
  } else {
    out << "settlement: cancelled\n";
  }

  if (!a.sink.path.empty()) {
    Json jc = ConfigBase("negotiate");
    jc["ux_dist"] = cfg.u_x.ToString();
    jc["uy_dist"] = cfg.u_y.ToString();
    jc["ux"] = a.ux;
    jc["uy"] = a.uy;
    jc["choices"] = a.w;
    jc["candidates"] = a.candidates;
    jc["seed"] = a.seed;
    jc["candidate"] = res.candidate;
    jc["pod"] = res.pod;
    jc["concluded"] = res.settlement.concluded;
    jc["transfer"] = res.settlement.transfer;
    Table t{{"party", "option", "cancel", "claim", "lower", "upper", "played"}, {}};
    auto rows = [&](const char* who, const bosco::Strategy& s) {
      for (std::size_t i = 0; i < s.choices.options(); ++i) {
        const auto c = s.choices.option(i);
        t.Add({std::string(who), std::uint64_t{i}, c.cancel,
               c.cancel ? Cell{std::monostate{}} : Cell{c.value}, s.thresholds[i],
               s.thresholds[i + 1], !s.IntervalEmpty(i)});
      }
    };
    rows("X", res.equilibrium.sigma_x);
    rows("Y", res.equilibrium.sigma_y);
    Emit(a.sink, jc, t, out);
  }
  return kExitOk;
}

topo::AsGraph LoadGraph(const std::string& path) { return topo::LoadAsRelationships(path); }

struct AnalyzeArgs {
  std::string rel;
  std::size_t sample = 500;
  std::uint64_t seed = 0;
  std::vector<std::size_t> top_n{1, 2, 5};
  Sink sink;
};

int RunAnalyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  CheckWritable(a.sink);
  const auto g = LoadGraph(a.rel);
  topo::MaCatalog mas(g, topo::GenerateMas(g));
  const auto sample = topo::SampleNodes(g, a.sample, a.seed);
  const auto rows = topo::DiversityStats(g, mas, sample, a.top_n, WorkerCount());

  Table t;
  t.columns = {"as",          "peers",          "grc_paths",          "grc_destinations",
               "ma_paths",    "ma_destinations", "ma_direct_paths",   "ma_direct_destinations",
               "added_paths", "added_destinations"};
  for (std::size_t n : a.top_n) {
    t.columns.push_back("top" + std::to_string(n) + "_paths");
    t.columns.push_back("top" + std::to_string(n) + "_destinations");
  }
  for (const auto& r : rows) {
    std::vector<Cell> row{Id(r.as),
                          std::uint64_t{r.peers},
                          std::uint64_t{r.grc.paths},
                          std::uint64_t{r.grc.destinations},
                          std::uint64_t{r.ma_all.paths},
                          std::uint64_t{r.ma_all.destinations},
                          std::uint64_t{r.ma_direct.paths},
                          std::uint64_t{r.ma_direct.destinations},
                          std::uint64_t{r.added_paths()},
                          std::uint64_t{r.added_destinations()}};
    for (const auto& s : r.top_n) {
      row.emplace_back(std::uint64_t{s.paths});
      row.emplace_back(std::uint64_t{s.destinations});
    }
    t.Add(std::move(row));
  }
  Json jc = ConfigBase("analyze");
  jc["rel"] = a.rel;
  jc["sample"] = a.sample;
  jc["seed"] = a.seed;
  jc["top_n"] = a.top_n;
  Emit(a.sink, jc, t, out);

  std::vector<std::size_t> peered;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].peers > 0) peered.push_back(i);
  }
  const std::size_t positive = static_cast<std::size_t>(
      std::count_if(peered.begin(), peered.end(), [&](std::size_t i) {
        return rows[i].added_paths() > 0;
      }));
  const auto paths = Summarize(rows.size(), [&](std::size_t i) {
    return static_cast<double>(rows[i].added_paths());
  });
  const auto dests = Summarize(rows.size(), [&](std::size_t i) {
    return static_cast<double>(rows[i].added_destinations());
  });
  err << "analyze: " << g.size() << " ASes, " << g.pc_edge_count() << " p2c and "
      << g.peer_edge_count() << " p2p links\n"
      << "analyze: sampled " << rows.size() << ", with peers " << peered.size()
      << ", gaining MA paths " << positive << "\n"
      << "analyze: additional paths avg " << Fmt(paths.mean) << " max " << Fmt(paths.max)
      << "; additional destinations avg " << Fmt(dests.mean) << " max " << Fmt(dests.max)
      << "\n";
  return kExitOk;
}

struct PairArgs {
  std::string rel;
  std::size_t pairs = 500;
  std::uint64_t seed = 0;
  Sink sink;
};

struct GeoArgs {
  PairArgs base;
  std::string pfx2as;
  std::string geo;
  std::string georel;
  bool strict = false;
};

void AddPairColumns(Table& t, const std::string& unit, const std::string& beat,
                    const std::string& gain) {
  t.columns = {"a",
               "b",
               "grc_paths",
               "ma_paths",
               "excluded_paths",
               "grc_min_" + unit,
               "grc_median_" + unit,
               "grc_max_" + unit,
               "ma_" + beat + "_min",
               "ma_" + beat + "_median",
               "ma_" + beat + "_max",
               gain};
}

std::vector<Cell> PairRow(const topo::PairComparison& c) {
  const Cell none = std::monostate{};
  return {Id(c.a),
          Id(c.b),
          std::uint64_t{c.grc_paths},
          std::uint64_t{c.ma_paths},
          std::uint64_t{c.excluded_paths},
          c.valid ? Cell{c.grc_min} : none,
          c.valid ? Cell{c.grc_median} : none,
          c.valid ? Cell{c.grc_max} : none,
          std::uint64_t{c.beat_min},
          std::uint64_t{c.beat_median},
          std::uint64_t{c.beat_max},
          c.valid ? Cell{c.improvement_pct} : none};
}

void ReportPairs(std::ostream& err, const char* cmd, const std::vector<topo::PairComparison>& rows,
                 std::size_t requested, const char* what) {
  std::size_t valid = 0, gaining = 0;
  for (const auto& r : rows) {
    if (!r.valid) continue;
    ++valid;
    if (r.improvement_pct > 0) ++gaining;
  }
  err << cmd << ": " << rows.size() << " of " << requested << " requested pairs, " << valid
      << " with metric; " << gaining << " gain an MA path " << what << "\n";
}

int RunGeo(const GeoArgs& a, std::ostream& out, std::ostream& err) {
  CheckWritable(a.base.sink);
  const auto g = LoadGraph(a.base.rel);
  topo::MaCatalog mas(g, topo::GenerateMas(g));
  const auto pfx = geo::LoadPfx2As(a.pfx2as);
  const auto db = geo::LoadGeoDb(a.geo);
  const auto rel = geo::LoadGeoRel(a.georel);
  const geo::GeoContext ctx(pfx, db, rel, a.strict);

  const auto pairs = topo::SampleConnectedPairs(g, a.base.pairs, a.base.seed);
  const auto metric = [&](const std::array<AsId, 3>& hops) -> std::optional<double> {
    const auto d = ctx.Geodistance(hops);
    if (!d) return std::nullopt;
    return d->km;
  };
  const auto rows = topo::ComparePairs(g, mas, pairs, topo::PairMetric::kGeodistance, metric,
                                       WorkerCount());
  // Paths whose distance used the centroid-midpoint fallback, per pair.
  std::vector<std::size_t> fallback(rows.size(), 0);
  ParallelFor(rows.size(), WorkerCount(), [&](std::size_t i) {
    const auto pp = topo::PathsBetween(g, mas, rows[i].a, rows[i].b);
    for (const auto* mids : {&pp.grc_middles, &pp.ma_middles}) {
      for (AsId m : *mids) {
        const auto d = ctx.Geodistance({rows[i].a, m, rows[i].b});
        if (d && d->fallback) ++fallback[i];
      }
    }
  });

  Table t;
  AddPairColumns(t, "km", "below", "reduction_pct");
  t.columns.push_back("fallback_paths");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto row = PairRow(rows[i]);
    row.emplace_back(std::uint64_t{fallback[i]});
    t.Add(std::move(row));
  }
  Json jc = ConfigBase("geo");
  jc["rel"] = a.base.rel;
  jc["pfx2as"] = a.pfx2as;
  jc["geo"] = a.geo;
  jc["georel"] = a.georel;
  jc["pairs"] = a.base.pairs;
  jc["seed"] = a.base.seed;
  jc["strict_geo"] = a.strict;
  Emit(a.base.sink, jc, t, out);
  err << "geo: " << ctx.located_ases() << " ASes geolocated\n";
  ReportPairs(err, "geo", rows, a.base.pairs, "below the minimum GRC geodistance");
  return kExitOk;
}

int RunBw(const PairArgs& a, std::ostream& out, std::ostream& err) {
  CheckWritable(a.sink);
  const auto g = LoadGraph(a.rel);
  topo::MaCatalog mas(g, topo::GenerateMas(g));
  const auto pairs = topo::SampleConnectedPairs(g, a.pairs, a.seed);
  const auto metric = [&](const std::array<AsId, 3>& hops) -> std::optional<double> {
    return topo::PathBandwidth(g, hops);
  };
  const auto rows =
      topo::ComparePairs(g, mas, pairs, topo::PairMetric::kBandwidth, metric, WorkerCount());
  Table t;
  AddPairColumns(t, "bw", "above", "increase_pct");
  for (const auto& r : rows) t.Add(PairRow(r));
  Json jc = ConfigBase("bw");
  jc["rel"] = a.rel;
  jc["pairs"] = a.pairs;
  jc["seed"] = a.seed;
  Emit(a.sink, jc, t, out);
  ReportPairs(err, "bw", rows, a.pairs, "above the maximum GRC bandwidth");
  return kExitOk;
}

void AddPairOptions(CLI::App* cmd, PairArgs& p) {
  cmd->add_option("--rel", p.rel, "CAIDA serial-1 AS relationships")->required();
  cmd->add_option("--pairs", p.pairs, "Connected AS pairs to sample")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", p.seed, "Master seed")->required();
  AddSinkOptions(cmd, p.sink);
}

}  // namespace

std::string VersionString() {
  return std::string("pan ") + PAN_VERSION + " (" + kFormats + ")";
}

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mutuality-based interconnection agreements: economics, bargaining, topology"};
  app.name(argc > 0 ? std::filesystem::path(argv[0]).filename().string() : "pan");
  app.require_subcommand(1);
  bool version = false;
  app.add_flag("--version", version, "Print artifact and data-format versions");

  CashArgs cash;
  auto* c_cash = app.add_subcommand("optimize-cash", "Nash bargaining cash transfer");
  c_cash->add_option("--ux", cash.ux, "Agreement utility of X")->required();
  c_cash->add_option("--uy", cash.uy, "Agreement utility of Y")->required();
  AddSinkOptions(c_cash, cash.sink);

  FlowArgs flows;
  auto* c_flows = app.add_subcommand("optimize-flows", "Flow-volume targets maximizing the Nash product");
  c_flows->add_option("--econ", flows.econ, "Economic model file")->required()->check(CLI::ExistingFile);
  c_flows->add_option("--grid-points", flows.solver.grid_points, "Coarse grid points per coordinate")
      ->check(CLI::Range(2, 1 << 20));
  c_flows->add_option("--ascent-iters", flows.solver.ascent_iters, "Pattern-search rounds")
      ->check(CLI::NonNegativeNumber);
  c_flows->add_option("--tolerance", flows.solver.tolerance, "Final relative step size")
      ->check(CLI::PositiveNumber);
  c_flows->add_option("--random-starts", flows.solver.random_starts, "Extra ascent starts")
      ->check(CLI::NonNegativeNumber);
  c_flows->add_option("--random-directions", flows.solver.random_directions,
                      "Seeded extra poll directions per round")
      ->check(CLI::NonNegativeNumber);
  c_flows->add_option("--seed", flows.seed, "Master seed")->required();
  c_flows->add_flag("--audit", flows.audit, "Run the Pareto/fairness audit on the result");
  AddSinkOptions(c_flows, flows.sink);

  PodArgs pod;
  auto* c_pod = app.add_subcommand("pod", "Price-of-Dishonesty experiment");
  c_pod->add_option("--dist", pod.dist, "Utility distribution of both parties (u1, u2, uniform:LO,HI, pwc:...)");
  c_pod->add_option("--ux-dist", pod.ux_dist, "Override for party X");
  c_pod->add_option("--uy-dist", pod.uy_dist, "Override for party Y");
  c_pod->add_option("--choices", pod.choices, "Choice-set sizes W")->delimiter(',');
  c_pod->add_option("--trials", pod.trials, "Trials per W")->check(CLI::PositiveNumber);
  c_pod->add_option("--seed", pod.seed, "Master seed")->required();
  AddMechanismOptions(c_pod, pod.mech);
  AddSinkOptions(c_pod, pod.sink);

  NegotiateArgs neg;
  auto* c_neg = app.add_subcommand("negotiate", "Run one BOSCO negotiation");
  c_neg->add_option("--ux-dist", neg.ux_dist, "Utility distribution of X");
  c_neg->add_option("--uy-dist", neg.uy_dist, "Utility distribution of Y");
  c_neg->add_option("--ux", neg.ux, "True utility of X")->required();
  c_neg->add_option("--uy", neg.uy, "True utility of Y")->required();
  c_neg->add_option("--choices", neg.w, "Finite claims per choice set");
  c_neg->add_option("--candidates", neg.candidates, "Choice-set pairs tried by the mediator");
  c_neg->add_option("--seed", neg.seed, "Master seed")->required();
  AddMechanismOptions(c_neg, neg.mech);
  AddSinkOptions(c_neg, neg.sink);

  AnalyzeArgs an;
  auto* c_an = app.add_subcommand("analyze", "Path-diversity statistics of MAs");
  c_an->add_option("--rel", an.rel, "CAIDA serial-1 AS relationships")->required();
  c_an->add_option("--sample", an.sample, "ASes to sample")->check(CLI::PositiveNumber);
  c_an->add_option("--seed", an.seed, "Master seed")->required();
  c_an->add_option("--top-n", an.top_n, "Top-n MA scenarios")->delimiter(',');
  AddSinkOptions(c_an, an.sink);

  GeoArgs geo;
  auto* c_geo = app.add_subcommand("geo", "Geodistance of MA paths vs GRC paths");
  AddPairOptions(c_geo, geo.base);
  c_geo->add_option("--pfx2as", geo.pfx2as, "Prefix-to-AS mapping")->required();
  c_geo->add_option("--geo", geo.geo, "Prefix geolocation CSV")->required();
  c_geo->add_option("--georel", geo.georel, "Interconnection geolocation CSV")->required();
  c_geo->add_flag("--strict-geo", geo.strict, "Drop paths with unknown interconnections");

  PairArgs bw;
  auto* c_bw = app.add_subcommand("bw", "Degree-gravity bandwidth of MA paths vs GRC paths");
  AddPairOptions(c_bw, bw);

  // --version alone is valid without a subcommand.
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--version") {
      out << VersionString() << "\n";
      return kExitOk;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ExtrasError& e) {
    err << app.get_name() << ": " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    // Required-option checks run before the extras check; an unknown flag
    // still takes precedence.
    std::vector<std::string> extras = app.remaining();
    for (const auto* sub : app.get_subcommands()) {
      const auto r = sub->remaining();
      extras.insert(extras.end(), r.begin(), r.end());
    }
    if (!extras.empty()) {
      err << app.get_name() << ": unexpected argument '" << extras.front() << "'\n"
          << app.help();
      return kExitUsage;
    }
    err << app.get_name() << ": " << e.what() << "\n";
    // No or unknown subcommand is a usage error; a bad value is an input error.
    return app.get_subcommands().empty() ? kExitUsage : kExitInput;
  }

  try {
    if (c_cash->parsed()) return RunOptimizeCash(cash, out);
    if (c_flows->parsed()) return RunOptimizeFlows(flows, out);
    if (c_pod->parsed()) return RunPod(pod, out, err);
    if (c_neg->parsed()) return RunNegotiate(neg, out);
    if (c_an->parsed()) return RunAnalyze(an, out, err);
    if (c_geo->parsed()) return RunGeo(geo, out, err);
    if (c_bw->parsed()) return RunBw(bw, out, err);
  } catch (const InfeasibleError& e) {
    err << app.get_name() << ": " << e.what() << "\n";
    return kExitNoSolution;
  } catch (const std::exception& e) {
    err << app.get_name() << ": " << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return Run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace pan::cli
