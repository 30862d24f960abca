#include "pan/topology.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

#include "pan/parallel.h"
#include "pan/rng.h"

namespace pan::topo {
namespace {

std::uint64_t PairKey(AsId a, AsId b) {
  const auto lo = std::min(a.value, b.value);
  const auto hi = std::max(a.value, b.value);
  return (lo << 32) | hi;
}

bool Has(const std::vector<AsId>& sorted, AsId x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

AsId ParseAsn(const std::string& tok) {
  std::uint64_t v = 0;
  std::istringstream ss(tok);
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos || !(ss >> v) ||
      v >= AsId::kStubBase) {
    throw InputError("bad ASN '" + tok + "'");
  }
  return AsId(v);
}

std::vector<AsId> Endpoints(const std::vector<PathRecord>& paths) {
  std::vector<AsId> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(p.hops[2]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t UnionSize(const std::vector<AsId>& a, const std::vector<AsId>& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() || j != b.end()) {
    ++n;
    if (j == b.end() || (i != a.end() && *i < *j)) {
      ++i;
    } else if (i == a.end() || *j < *i) {
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace

void AsGraph::Builder::CheckNew(AsId a, AsId b) {
  if (a == b) throw InputError("self-loop on AS " + a.ToString());
  if (a.is_stub() || b.is_stub()) throw InputError("stub ASes cannot appear in a topology");
  if (!seen_.emplace(PairKey(a, b), 1).second) {
    throw InputError("second relationship for pair " + a.ToString() + "-" + b.ToString());
  }
}

void AsGraph::Builder::AddProviderCustomer(AsId provider, AsId customer) {
  CheckNew(provider, customer);
  pc_.emplace_back(provider, customer);
}

void AsGraph::Builder::AddPeering(AsId a, AsId b) {
  CheckNew(a, b);
  peer_.emplace_back(a, b);
}

void AsGraph::Builder::AddNode(AsId as) {
  if (as.is_stub()) throw InputError("stub ASes cannot appear in a topology");
  extra_.push_back(as);
}

AsGraph AsGraph::Builder::Build() && {
  AsGraph g;
  std::vector<AsId> ids = extra_;
  for (const auto& [a, b] : pc_) ids.insert(ids.end(), {a, b});
  for (const auto& [a, b] : peer_) ids.insert(ids.end(), {a, b});
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  g.ids_ = std::move(ids);
  g.nodes_.resize(g.ids_.size());
  g.index_.reserve(g.ids_.size());
  for (std::uint32_t i = 0; i < g.ids_.size(); ++i) g.index_.emplace(g.ids_[i].value, i);
  for (const auto& [p, c] : pc_) {
    g.nodes_[g.index_.at(p.value)].customers.push_back(c);
    g.nodes_[g.index_.at(c.value)].providers.push_back(p);
  }
  for (const auto& [a, b] : peer_) {
    g.nodes_[g.index_.at(a.value)].peers.push_back(b);
    g.nodes_[g.index_.at(b.value)].peers.push_back(a);
  }
  for (Node& n : g.nodes_) {
    std::sort(n.providers.begin(), n.providers.end());
    std::sort(n.peers.begin(), n.peers.end());
    std::sort(n.customers.begin(), n.customers.end());
    n.all = n.providers;
    n.all.insert(n.all.end(), n.peers.begin(), n.peers.end());
    n.all.insert(n.all.end(), n.customers.begin(), n.customers.end());
    std::sort(n.all.begin(), n.all.end());
  }
  g.pc_edges_ = pc_.size();
  g.peer_edges_ = peer_.size();
  return g;
}

std::uint32_t AsGraph::IndexOf(AsId as) const {
  auto it = index_.find(as.value);
  if (it == index_.end()) throw InputError("unknown AS " + as.ToString());
  return it->second;
}

Rel AsGraph::RelationOf(AsId a, AsId b) const {
  const Node& n = node(a);
  if (Has(n.providers, b)) return Rel::kProvider;
  if (Has(n.peers, b)) return Rel::kPeer;
  if (Has(n.customers, b)) return Rel::kCustomer;
  return Rel::kNone;
}

AsGraph ParseAsRelationships(std::istream& in, const std::string& source) {
  AsGraph::Builder b;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    for (;;) {
      const auto bar = line.find('|', pos);
      f.push_back(line.substr(pos, bar - pos));
      if (bar == std::string::npos) break;
      pos = bar + 1;
    }
    if (f.size() < 3) throw ParseError(source, lineno, "expected as1|as2|rel");
    try {
      const AsId x = ParseAsn(f[0]);
      const AsId y = ParseAsn(f[1]);
      if (f[2] == "-1") {
        b.AddProviderCustomer(x, y);
      } else if (f[2] == "0") {
        b.AddPeering(x, y);
      } else {
        throw InputError("unknown relationship '" + f[2] + "'");
      }
    } catch (const InputError& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return std::move(b).Build();
}

AsGraph LoadAsRelationships(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return ParseAsRelationships(in, path);
}

bool GrcValid(const AsGraph& g, AsId a1, AsId a2, AsId a3) {
  if (a1 == a3 || a1 == a2 || a2 == a3) return false;
  const Rel first = g.RelationOf(a2, a1);
  const Rel second = g.RelationOf(a2, a3);
  if (first == Rel::kNone || second == Rel::kNone) return false;
  return first == Rel::kCustomer || second == Rel::kCustomer;
}

std::string ToString(PathKind k) {
  switch (k) {
    case PathKind::kGrc: return "grc";
    case PathKind::kMaDirect: return "ma_direct";
    case PathKind::kMaIndirect: return "ma_indirect";
  }
  return "unknown";
}

std::vector<PathRecord> EnumerateGrcPaths(const AsGraph& g, AsId src) {
  std::vector<PathRecord> out;
  for (AsId m : g.Neighbors(src)) {
    // Going up to m, m may forward anywhere; otherwise only to its customers.
    const bool src_is_customer = g.RelationOf(src, m) == Rel::kProvider;
    for (AsId z : src_is_customer ? g.Neighbors(m) : g.Customers(m)) {
      if (z != src) out.push_back({{src, m, z}, PathKind::kGrc, std::nullopt});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<MutualityAgreement> GenerateMas(const AsGraph& g) {
  auto grants = [&](AsId from, AsId to) {
    std::vector<AsId> open = g.Providers(from);
    open.insert(open.end(), g.Peers(from).begin(), g.Peers(from).end());
    std::sort(open.begin(), open.end());
    const auto& excluded = g.Customers(to);
    std::vector<AsId> out;
    for (AsId x : open) {
      if (x != to && !Has(excluded, x)) out.push_back(x);
    }
    return out;
  };
  std::vector<MutualityAgreement> mas;
  for (AsId a : g.nodes()) {
    for (AsId b : g.Peers(a)) {
      if (!(a < b)) continue;
      mas.push_back({a, b, grants(a, b), grants(b, a)});
    }
  }
  return mas;
}

MaCatalog::MaCatalog(const AsGraph& g, std::vector<MutualityAgreement> mas) : mas_(std::move(mas)) {
  for (std::size_t i = 0; i < mas_.size(); ++i) {
    MutualityAgreement& m = mas_[i];
    if (!g.Contains(m.a) || !g.Contains(m.b) || m.a == m.b) {
      throw InputError("MA parties must be two distinct ASes of the graph");
    }
    std::sort(m.grants_to_a.begin(), m.grants_to_a.end());
    std::sort(m.grants_to_b.begin(), m.grants_to_b.end());
    by_party_[m.a.value].push_back(i);
    by_party_[m.b.value].push_back(i);
  }
}

const std::vector<std::size_t>& MaCatalog::Involving(AsId as) const {
  auto it = by_party_.find(as.value);
  return it == by_party_.end() ? none_ : it->second;
}

std::vector<PathRecord> MaPaths(const AsGraph& g, const MaCatalog& mas, AsId src) {
  std::vector<PathRecord> out;
  for (std::size_t idx : mas.Involving(src)) {
    const MutualityAgreement& m = mas.mas()[idx];
    const AsId partner = m.a == src ? m.b : m.a;
    for (AsId x : m.GrantsTo(src)) {
      if (x != src) out.push_back({{src, partner, x}, PathKind::kMaDirect, idx});
    }
  }
  for (AsId a : g.Neighbors(src)) {
    for (std::size_t idx : mas.Involving(a)) {
      const MutualityAgreement& m = mas.mas()[idx];
      const AsId beneficiary = m.a == a ? m.b : m.a;
      if (beneficiary != src && Has(m.GrantsTo(beneficiary), src)) {
        out.push_back({{src, a, beneficiary}, PathKind::kMaIndirect, idx});
      }
    }
  }
  std::erase_if(out, [&](const PathRecord& p) {
    return GrcValid(g, p.hops[0], p.hops[1], p.hops[2]);
  });
  std::sort(out.begin(), out.end(), [](const PathRecord& x, const PathRecord& y) {
    return x.hops != y.hops ? x.hops < y.hops : x.kind < y.kind;
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const PathRecord& x, const PathRecord& y) { return x.hops == y.hops; }),
            out.end());
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> RankMas(const AsGraph& g, const MaCatalog& mas,
                                                        AsId src) {
  std::vector<std::pair<std::size_t, std::size_t>> ranked;
  for (std::size_t idx : mas.Involving(src)) {
    const MutualityAgreement& m = mas.mas()[idx];
    const AsId partner = m.a == src ? m.b : m.a;
    std::size_t n = 0;
    for (AsId x : m.GrantsTo(src)) n += x != src && !GrcValid(g, src, partner, x);
    ranked.emplace_back(idx, n);
  }
  auto partner_of = [&](std::size_t idx) {
    const MutualityAgreement& m = mas.mas()[idx];
    return m.a == src ? m.b : m.a;
  };
  std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return partner_of(x.first) < partner_of(y.first);
  });
  return ranked;
}

DiversityRow DiversityStatsFor(const AsGraph& g, const MaCatalog& mas, AsId as,
                               const std::vector<std::size_t>& top_n) {
  DiversityRow row;
  row.as = as;
  row.peers = g.Peers(as).size();
  const auto grc = EnumerateGrcPaths(g, as);
  const auto ma = MaPaths(g, mas, as);
  const auto grc_dests = Endpoints(grc);
  row.grc = {grc.size(), grc_dests.size()};
  row.ma_all = {grc.size() + ma.size(), UnionSize(grc_dests, Endpoints(ma))};

  std::vector<PathRecord> direct;
  for (const auto& p : ma) {
    if (p.kind == PathKind::kMaDirect) direct.push_back(p);
  }
  row.ma_direct = {grc.size() + direct.size(), UnionSize(grc_dests, Endpoints(direct))};

  const auto ranked = RankMas(g, mas, as);
  for (std::size_t n : top_n) {
    std::set<std::size_t> chosen;
    for (std::size_t k = 0; k < std::min(n, ranked.size()); ++k) chosen.insert(ranked[k].first);
    std::vector<PathRecord> picked;
    for (const auto& p : direct) {
      if (chosen.count(*p.agreement)) picked.push_back(p);
    }
    row.top_n.push_back({grc.size() + picked.size(), UnionSize(grc_dests, Endpoints(picked))});
  }
  return row;
}

std::vector<DiversityRow> DiversityStats(const AsGraph& g, const MaCatalog& mas,
                                         const std::vector<AsId>& sample,
                                         const std::vector<std::size_t>& top_n, unsigned threads) {
  std::vector<DiversityRow> rows(sample.size());
  ParallelFor(sample.size(), threads,
              [&](std::size_t i) { rows[i] = DiversityStatsFor(g, mas, sample[i], top_n); });
  return rows;
}

std::vector<AsId> SampleNodes(const AsGraph& g, std::size_t n, std::uint64_t seed) {
  std::vector<AsId> pool = g.nodes();
  n = std::min(n, pool.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.Below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

double LinkBandwidth(const AsGraph& g, AsId a, AsId b) {
  if (g.RelationOf(a, b) == Rel::kNone) {
    throw InputError("no link between " + a.ToString() + " and " + b.ToString());
  }
  return static_cast<double>(g.Degree(a)) * static_cast<double>(g.Degree(b));
}

double PathBandwidth(const AsGraph& g, const std::array<AsId, 3>& hops) {
  return std::min(LinkBandwidth(g, hops[0], hops[1]), LinkBandwidth(g, hops[1], hops[2]));
}

PairPaths PathsBetween(const AsGraph& g, const MaCatalog& mas, AsId a, AsId b) {
  PairPaths out;
  if (a == b) return out;
  const auto& na = g.Neighbors(a);
  const auto& nb = g.Neighbors(b);
  std::vector<AsId> common;
  std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
  for (AsId m : common) {
    if (GrcValid(g, a, m, b)) out.grc_middles.push_back(m);
  }
  // (a, m, b) is an MA path if m opens b to a, or opens a to b.
  for (auto [beneficiary, target] : {std::pair{a, b}, std::pair{b, a}}) {
    for (std::size_t idx : mas.Involving(beneficiary)) {
      const MutualityAgreement& m = mas.mas()[idx];
      const AsId partner = m.a == beneficiary ? m.b : m.a;
      if (partner != target && Has(m.GrantsTo(beneficiary), target)) {
        out.ma_middles.push_back(partner);
      }
    }
  }
  std::sort(out.ma_middles.begin(), out.ma_middles.end());
  out.ma_middles.erase(std::unique(out.ma_middles.begin(), out.ma_middles.end()),
                       out.ma_middles.end());
  std::erase_if(out.ma_middles, [&](AsId m) { return GrcValid(g, a, m, b); });
  return out;
}

std::vector<std::pair<AsId, AsId>> SampleConnectedPairs(const AsGraph& g, std::size_t n,
                                                        std::uint64_t seed,
                                                        std::size_t max_attempts) {
  std::vector<std::pair<AsId, AsId>> out;
  const std::size_t size = g.size();
  if (size < 2 || n == 0) return out;
  if (max_attempts == 0) max_attempts = 1000 * n + 100000;
  Rng rng(seed);
  std::set<std::pair<AsId, AsId>> seen;
  const MaCatalog empty(g, {});
  for (std::size_t attempt = 0; attempt < max_attempts && out.size() < n; ++attempt) {
    const AsId x = g.IdAt(static_cast<std::uint32_t>(rng.Below(size)));
    const AsId y = g.IdAt(static_cast<std::uint32_t>(rng.Below(size)));
    if (x == y) continue;
    const auto pair = std::minmax(x, y);
    if (seen.count(pair)) continue;
    if (PathsBetween(g, empty, pair.first, pair.second).grc_middles.empty()) continue;
    seen.insert(pair);
    out.push_back(pair);
  }
  return out;
}

PairComparison ComparePair(const AsGraph& g, const MaCatalog& mas, AsId a, AsId b,
                           PairMetric kind, const PathMetricFn& metric) {
  PairComparison row;
  row.a = a;
  row.b = b;
  const PairPaths paths = PathsBetween(g, mas, a, b);
  std::vector<double> grc;
  std::vector<double> ma;
  for (AsId m : paths.grc_middles) {
    if (auto v = metric({a, m, b})) {
      grc.push_back(*v);
    } else {
      ++row.excluded_paths;
    }
  }
  for (AsId m : paths.ma_middles) {
    if (auto v = metric({a, m, b})) {
      ma.push_back(*v);
    } else {
      ++row.excluded_paths;
    }
  }
  row.grc_paths = grc.size();
  row.ma_paths = ma.size();
  if (grc.empty()) return row;
  row.valid = true;
  std::sort(grc.begin(), grc.end());
  row.grc_min = grc.front();
  row.grc_max = grc.back();
  row.grc_median = grc[(grc.size() - 1) / 2];
  const bool lower_is_better = kind == PairMetric::kGeodistance;
  auto beats = [&](double v, double threshold) {
    return lower_is_better ? v < threshold : v > threshold;
  };
  for (double v : ma) {
    row.beat_min += beats(v, row.grc_min);
    row.beat_median += beats(v, row.grc_median);
    row.beat_max += beats(v, row.grc_max);
  }
  if (!ma.empty()) {
    const double best_grc = lower_is_better ? row.grc_min : row.grc_max;
    const double best_ma = lower_is_better ? *std::min_element(ma.begin(), ma.end())
                                           : *std::max_element(ma.begin(), ma.end());
    if (beats(best_ma, best_grc) && best_grc > 0.0) {
      row.improvement_pct = 100.0 * std::abs(best_grc - best_ma) / best_grc;
    }
  }
  return row;
}

std::vector<PairComparison> ComparePairs(const AsGraph& g, const MaCatalog& mas,
                                         const std::vector<std::pair<AsId, AsId>>& pairs,
                                         PairMetric kind, const PathMetricFn& metric,
                                         unsigned threads) {
  std::vector<PairComparison> rows(pairs.size());
  ParallelFor(pairs.size(), threads, [&](std::size_t i) {
    rows[i] = ComparePair(g, mas, pairs[i].first, pairs[i].second, kind, metric);
  });
  return rows;
}

}  // namespace pan::topo
