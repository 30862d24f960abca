#ifndef PAN_TOPOLOGY_H
#define PAN_TOPOLOGY_H

// AS-level topology, valley-free length-3 paths, and the paths opened by
// mutuality-based agreements (MAs) between peers.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pan/types.h"

namespace pan::topo {

enum class Rel : std::int8_t { kNone, kProvider, kPeer, kCustomer };

// Immutable after Build(). Neighbor lists are sorted by AsId.
class AsGraph {
 public:
  class Builder {
   public:
    // Throws InputError on self-loops and on a second link for a pair.
    void AddProviderCustomer(AsId provider, AsId customer);
    void AddPeering(AsId a, AsId b);
    void AddNode(AsId as);
    AsGraph Build() &&;

   private:
    void CheckNew(AsId a, AsId b);
    std::vector<std::pair<AsId, AsId>> pc_;
    std::vector<std::pair<AsId, AsId>> peer_;
    std::vector<AsId> extra_;
    std::unordered_map<std::uint64_t, std::uint8_t> seen_;  // pair key -> 1
  };

  std::size_t size() const { return ids_.size(); }
  const std::vector<AsId>& nodes() const { return ids_; }
  bool Contains(AsId as) const { return index_.count(as.value) > 0; }
  // Throws InputError for unknown ASes.
  std::uint32_t IndexOf(AsId as) const;
  AsId IdAt(std::uint32_t i) const { return ids_[i]; }

  const std::vector<AsId>& Providers(AsId as) const { return node(as).providers; }
  const std::vector<AsId>& Peers(AsId as) const { return node(as).peers; }
  const std::vector<AsId>& Customers(AsId as) const { return node(as).customers; }
  const std::vector<AsId>& Neighbors(AsId as) const { return node(as).all; }
  std::size_t Degree(AsId as) const { return node(as).all.size(); }

  // Relation of `b` as seen from `a`: kProvider means b is a's provider.
  Rel RelationOf(AsId a, AsId b) const;

  std::size_t pc_edge_count() const { return pc_edges_; }
  std::size_t peer_edge_count() const { return peer_edges_; }

 private:
  struct Node {
    std::vector<AsId> providers, peers, customers, all;
  };
  const Node& node(AsId as) const { return nodes_[IndexOf(as)]; }

  std::vector<AsId> ids_;
  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, std::uint32_t> index_;
  std::size_t pc_edges_ = 0;
  std::size_t peer_edges_ = 0;
};

// CAIDA serial-1 relationships: "a|b|-1" (a provides b) or "a|b|0"
// (peers); extra trailing fields (serial-2 source column) are ignored and
// '#' lines are comments. Throws ParseError with the line number.
AsGraph ParseAsRelationships(std::istream& in, const std::string& source = "<input>");
AsGraph LoadAsRelationships(const std::string& path);

// Valley-free rule for a middle AS: it carries traffic between two
// neighbors only if at least one of them is its customer.
bool GrcValid(const AsGraph& g, AsId a1, AsId a2, AsId a3);

enum class PathKind { kGrc, kMaDirect, kMaIndirect };
std::string ToString(PathKind k);

struct PathRecord {
  std::array<AsId, 3> hops;
  PathKind kind = PathKind::kGrc;
  std::optional<std::size_t> agreement;  // index into the MA list

  friend bool operator<(const PathRecord& a, const PathRecord& b) { return a.hops < b.hops; }
};

// All valley-free (src, M, Z) with Z != src, sorted by hops.
std::vector<PathRecord> EnumerateGrcPaths(const AsGraph& g, AsId src);

// MA between peers a and b. grants_to_b are ASes of a's provider/peer sets
// opened to b; grants_to_a likewise from b. Both sorted.
struct MutualityAgreement {
  AsId a;
  AsId b;
  std::vector<AsId> grants_to_b;
  std::vector<AsId> grants_to_a;

  const std::vector<AsId>& GrantsTo(AsId party) const {
    return party == b ? grants_to_b : grants_to_a;
  }
};

// One MA per peering link: a opens (providers(a) u peers(a)) minus the
// customers of b and b itself, and vice versa. Ordered by (min, max) AsId.
std::vector<MutualityAgreement> GenerateMas(const AsGraph& g);

// Lookup structure over an arbitrary MA list.
class MaCatalog {
 public:
  MaCatalog(const AsGraph& g, std::vector<MutualityAgreement> mas);

  const std::vector<MutualityAgreement>& mas() const { return mas_; }
  // Indices of the MAs that `as` is a party to.
  const std::vector<std::size_t>& Involving(AsId as) const;

 private:
  std::vector<MutualityAgreement> mas_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_party_;
  std::vector<std::size_t> none_;
};

// Every MA path has the form (beneficiary, partner, granted). From src's
// point of view it is direct when src is the beneficiary and indirect when
// src is the granted end (the path is then reported as (src, partner,
// beneficiary)). Valley-free triples are excluded; a triple reachable both
// ways is reported once, as direct. Sorted by hops.
std::vector<PathRecord> MaPaths(const AsGraph& g, const MaCatalog& mas, AsId src);

// Per-source direct path counts of each MA src is party to, ranked by count
// descending then partner AsId ascending: (MA index, count).
std::vector<std::pair<std::size_t, std::size_t>> RankMas(const AsGraph& g, const MaCatalog& mas,
                                                        AsId src);

struct ScenarioCount {
  std::size_t paths = 0;         // total length-3 paths in the scenario
  std::size_t destinations = 0;  // distinct endpoints reachable
};

struct DiversityRow {
  AsId as;
  std::size_t peers = 0;
  ScenarioCount grc;
  ScenarioCount ma_all;     // GRC plus every MA path
  ScenarioCount ma_direct;  // GRC plus directly gained MA paths
  std::vector<ScenarioCount> top_n;  // aligned with the requested n values

  std::size_t added_paths() const { return ma_all.paths - grc.paths; }
  std::size_t added_destinations() const { return ma_all.destinations - grc.destinations; }
};

DiversityRow DiversityStatsFor(const AsGraph& g, const MaCatalog& mas, AsId as,
                               const std::vector<std::size_t>& top_n);
// Rows in sample order; computed in parallel with `threads` workers.
std::vector<DiversityRow> DiversityStats(const AsGraph& g, const MaCatalog& mas,
                                         const std::vector<AsId>& sample,
                                         const std::vector<std::size_t>& top_n,
                                         unsigned threads = 1);

// Seeded draw of `n` distinct nodes (all nodes if n >= size), in draw order.
std::vector<AsId> SampleNodes(const AsGraph& g, std::size_t n, std::uint64_t seed);

// Degree-gravity capacity deg(a) * deg(b); throws InputError for non-links.
double LinkBandwidth(const AsGraph& g, AsId a, AsId b);
double PathBandwidth(const AsGraph& g, const std::array<AsId, 3>& hops);

// Middle ASes of the GRC and MA paths between a and b (either orientation).
struct PairPaths {
  std::vector<AsId> grc_middles;
  std::vector<AsId> ma_middles;
};
PairPaths PathsBetween(const AsGraph& g, const MaCatalog& mas, AsId a, AsId b);

// Seeded uniform draw of `n` distinct unordered pairs (a < b) joined by at
// least one valley-free length-3 path, by rejection over all node pairs.
// Returns fewer pairs if `max_attempts` is exhausted.
std::vector<std::pair<AsId, AsId>> SampleConnectedPairs(const AsGraph& g, std::size_t n,
                                                        std::uint64_t seed,
                                                        std::size_t max_attempts = 0);

enum class PairMetric { kGeodistance, kBandwidth };

// For one pair: statistics of the GRC paths under the metric and how many
// MA paths beat each of them. For geodistance "beat" means strictly lower,
// for bandwidth strictly higher. The median of an even count is the lower
// middle element.
struct PairComparison {
  AsId a;
  AsId b;
  std::size_t grc_paths = 0;
  std::size_t ma_paths = 0;
  std::size_t excluded_paths = 0;  // metric unavailable (missing geodata)
  double grc_min = 0.0;
  double grc_median = 0.0;
  double grc_max = 0.0;
  std::size_t beat_min = 0;
  std::size_t beat_median = 0;
  std::size_t beat_max = 0;
  // Geodistance: (best GRC - best MA) / best GRC in percent; bandwidth:
  // (best MA - best GRC) / best GRC. Zero when no MA path improves.
  double improvement_pct = 0.0;
  bool valid = false;  // false if no GRC path had a metric value
};

// `metric(hops)` returns the path's value or nullopt if unavailable.
using PathMetricFn = std::function<std::optional<double>(const std::array<AsId, 3>&)>;

PairComparison ComparePair(const AsGraph& g, const MaCatalog& mas, AsId a, AsId b,
                           PairMetric kind, const PathMetricFn& metric);
std::vector<PairComparison> ComparePairs(const AsGraph& g, const MaCatalog& mas,
                                         const std::vector<std::pair<AsId, AsId>>& pairs,
                                         PairMetric kind, const PathMetricFn& metric,
                                         unsigned threads = 1);

}  // namespace pan::topo

#endif  // PAN_TOPOLOGY_H
