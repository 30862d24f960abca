#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "pan/topology.h"
#include "pan/types.h"
#include "support/fixtures.h"

namespace pan::topo {
namespace {

using testing::kA;
using testing::kB;
using testing::kC;
using testing::kD;
using testing::kE;
using testing::kF;
using testing::kH;
using testing::kI;

AsId As(std::uint64_t v) { return AsId(v); }

std::vector<AsId> Ids(std::initializer_list<std::uint64_t> v) {
  std::vector<AsId> out;
  for (auto x : v) out.push_back(AsId(x));
  return out;
}

// The example agreement: D opens A to E, E opens B and F to D.
MaCatalog ExampleCatalog(const AsGraph& g) {
  return MaCatalog(g, {{As(kD), As(kE), Ids({kA}), Ids({kB, kF})}});
}

bool HasPath(const std::vector<PathRecord>& paths, std::array<AsId, 3> hops, PathKind kind) {
  return std::any_of(paths.begin(), paths.end(),
                     [&](const PathRecord& p) { return p.hops == hops && p.kind == kind; });
}

TEST(Parse, CommentsSerial2AndErrors) {
  std::istringstream in("# c\n1|2|-1|bgp\n2|3|0\r\n\n");
  const auto g = ParseAsRelationships(in);
  EXPECT_EQ(g.size(), 3u);
  EXPECT_EQ(g.RelationOf(As(2), As(1)), Rel::kProvider);
  EXPECT_EQ(g.RelationOf(As(1), As(2)), Rel::kCustomer);
  EXPECT_EQ(g.RelationOf(As(3), As(2)), Rel::kPeer);
  EXPECT_EQ(g.RelationOf(As(1), As(3)), Rel::kNone);

  for (const char* bad : {"1|2\n", "1|2|5\n", "x|2|0\n", "1|1|0\n", "1|2|0\n2|1|-1\n"}) {
    std::istringstream b(bad);
    EXPECT_THROW(ParseAsRelationships(b), ParseError) << bad;
  }
  try {
    std::istringstream b("1|2|0\n# x\n3|4|9\n");
    ParseAsRelationships(b, "f.rel");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
}

TEST(Parse, ExampleFileMatchesInlineTopology) {
  const auto g = LoadAsRelationships(testing::DataPath("example.rel"));
  const auto h = testing::ExampleGraph();
  EXPECT_EQ(g.size(), 9u);
  EXPECT_EQ(g.pc_edge_count(), 7u);
  EXPECT_EQ(g.peer_edge_count(), 6u);
  for (AsId a : h.nodes()) {
    for (AsId b : h.nodes()) EXPECT_EQ(g.RelationOf(a, b), h.RelationOf(a, b));
  }
}

TEST(Grc, MatchesOracleOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto g = testing::RandomGraph(seed, 4 + seed % 9);
    for (AsId src : g.nodes()) {
      std::set<std::array<AsId, 3>> got;
      for (const auto& p : EnumerateGrcPaths(g, src)) {
        EXPECT_EQ(p.kind, PathKind::kGrc);
        got.insert(p.hops);
      }
      EXPECT_EQ(got, testing::OracleGrcPaths(g, src)) << "seed " << seed << " src " << src.value;
    }
  }
}

TEST(Grc, ExampleRule) {
  const auto g = testing::ExampleGraph();
  // E carries D's traffic to B only if D or B is E's customer; neither is.
  EXPECT_FALSE(GrcValid(g, As(kD), As(kE), As(kB)));
  EXPECT_FALSE(GrcValid(g, As(kD), As(kE), As(kF)));
  EXPECT_TRUE(GrcValid(g, As(kD), As(kE), As(kI)));
  EXPECT_TRUE(GrcValid(g, As(kH), As(kD), As(kE)));
  EXPECT_TRUE(GrcValid(g, As(kC), As(kA), As(kD)));
  EXPECT_FALSE(GrcValid(g, As(kC), As(kD), As(kE)));
}

TEST(GenerateMas, GrantRuleOnExample) {
  const auto g = testing::ExampleGraph();
  const auto mas = GenerateMas(g);
  EXPECT_EQ(mas.size(), g.peer_edge_count());
  const auto it = std::find_if(mas.begin(), mas.end(),
                               [](const auto& m) { return m.a == As(kD) && m.b == As(kE); });
  ASSERT_NE(it, mas.end());
  EXPECT_EQ(it->grants_to_b, Ids({kA, kC}));       // D opens to E
  EXPECT_EQ(it->grants_to_a, Ids({kB, kC, kF}));   // E opens to D
  EXPECT_EQ(it->GrantsTo(As(kE)), Ids({kA, kC}));
}

TEST(GenerateMas, MatchesRuleOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = testing::RandomGraph(seed, 10);
    const auto mas = GenerateMas(g);
    EXPECT_EQ(mas.size(), g.peer_edge_count());
    for (const auto& m : mas) {
      EXPECT_LT(m.a, m.b);
      EXPECT_EQ(g.RelationOf(m.a, m.b), Rel::kPeer);
      for (int side = 0; side < 2; ++side) {
        const AsId from = side ? m.b : m.a;
        const AsId to = side ? m.a : m.b;
        std::vector<AsId> want;
        for (AsId x : g.nodes()) {
          const Rel r = testing::OracleRel(g, from, x);
          if ((r == Rel::kProvider || r == Rel::kPeer) && x != to &&
              testing::OracleRel(g, to, x) != Rel::kCustomer) {
            want.push_back(x);
          }
        }
        EXPECT_EQ(side ? m.grants_to_a : m.grants_to_b, want);
      }
    }
  }
}

TEST(MaPaths, ExampleAgreement) {
  const auto g = testing::ExampleGraph();
  const auto cat = ExampleCatalog(g);
  const auto d = MaPaths(g, cat, As(kD));
  EXPECT_TRUE(HasPath(d, {As(kD), As(kE), As(kB)}, PathKind::kMaDirect));
  EXPECT_TRUE(HasPath(d, {As(kD), As(kE), As(kF)}, PathKind::kMaDirect));
  EXPECT_EQ(d.size(), 2u);
  const auto e = MaPaths(g, cat, As(kE));
  ASSERT_EQ(e.size(), 1u);
  EXPECT_TRUE(HasPath(e, {As(kE), As(kD), As(kA)}, PathKind::kMaDirect));
  // The granted ends see the same paths reversed as indirect gains.
  EXPECT_TRUE(HasPath(MaPaths(g, cat, As(kA)), {As(kA), As(kD), As(kE)}, PathKind::kMaIndirect));
  EXPECT_TRUE(HasPath(MaPaths(g, cat, As(kB)), {As(kB), As(kE), As(kD)}, PathKind::kMaIndirect));
  EXPECT_TRUE(MaPaths(g, cat, As(kH)).empty());

  const auto grc = EnumerateGrcPaths(g, As(kD));
  EXPECT_FALSE(HasPath(grc, {As(kD), As(kE), As(kB)}, PathKind::kGrc));
}

TEST(MaPaths, MatchesOracleOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto g = testing::RandomGraph(seed, 4 + seed % 9);
    const auto mas = GenerateMas(g);
    const MaCatalog cat(g, mas);
    for (AsId src : g.nodes()) {
      std::map<std::array<AsId, 3>, bool> got;
      for (const auto& p : MaPaths(g, cat, src)) {
        EXPECT_TRUE(got.emplace(p.hops, p.kind == PathKind::kMaDirect).second)
            << "duplicate path";
        EXPECT_NE(p.kind, PathKind::kGrc);
        ASSERT_TRUE(p.agreement.has_value());
        const auto& ma = mas[*p.agreement];
        // The middle hop is always the counterparty of the agreement.
        const AsId other = p.kind == PathKind::kMaDirect ? src : p.hops[2];
        EXPECT_TRUE((ma.a == other && ma.b == p.hops[1]) || (ma.b == other && ma.a == p.hops[1]));
      }
      EXPECT_EQ(got, testing::OracleMaPaths(g, mas, src)) << "seed " << seed;
    }
  }
}

TEST(MaPaths, DirectWinsOverIndirect) {
  // (1, 2, 4) is reachable both ways: 2 opens 4 to 1 and opens 1 to 4.
  AsGraph::Builder b;
  b.AddPeering(As(1), As(2));
  b.AddPeering(As(2), As(4));
  const auto g = std::move(b).Build();
  const MaCatalog cat(g, {{As(1), As(2), {}, Ids({4})}, {As(2), As(4), Ids({1}), {}}});
  const auto p = MaPaths(g, cat, As(1));
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].kind, PathKind::kMaDirect);
}

TEST(RankMas, OrderedByCountThenPartner) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = testing::RandomGraph(seed, 12, 0.2, 0.35);
    const MaCatalog cat(g, GenerateMas(g));
    for (AsId src : g.nodes()) {
      const auto ranked = RankMas(g, cat, src);
      EXPECT_EQ(ranked.size(), cat.Involving(src).size());
      std::map<std::size_t, std::size_t> direct;
      for (const auto& p : MaPaths(g, cat, src)) {
        if (p.kind == PathKind::kMaDirect) ++direct[*p.agreement];
      }
      auto partner = [&](std::size_t idx) {
        const auto& m = cat.mas()[idx];
        return m.a == src ? m.b : m.a;
      };
      for (std::size_t k = 0; k < ranked.size(); ++k) {
        EXPECT_EQ(ranked[k].second, direct[ranked[k].first]);
        if (k == 0) continue;
        const auto& prev = ranked[k - 1];
        const auto& cur = ranked[k];
        EXPECT_TRUE(prev.second > cur.second ||
                    (prev.second == cur.second && partner(prev.first) < partner(cur.first)));
      }
    }
  }
}

TEST(Diversity, CountsAgainstOracleAndMonotone) {
  const std::vector<std::size_t> top_n{1, 2, 5};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = testing::RandomGraph(seed, 11);
    const auto mas = GenerateMas(g);
    const MaCatalog cat(g, mas);
    for (AsId src : g.nodes()) {
      const auto row = DiversityStatsFor(g, cat, src, top_n);
      const auto grc = testing::OracleGrcPaths(g, src);
      const auto ma = testing::OracleMaPaths(g, mas, src);
      std::set<AsId> d_grc, d_all, d_direct;
      for (const auto& h : grc) d_grc.insert(h[2]);
      d_all = d_direct = d_grc;
      std::size_t n_direct = 0;
      for (const auto& [h, direct] : ma) {
        d_all.insert(h[2]);
        if (direct) {
          d_direct.insert(h[2]);
          ++n_direct;
        }
      }
      EXPECT_EQ(row.peers, g.Peers(src).size());
      EXPECT_EQ(row.grc.paths, grc.size());
      EXPECT_EQ(row.grc.destinations, d_grc.size());
      EXPECT_EQ(row.ma_all.paths, grc.size() + ma.size());
      EXPECT_EQ(row.ma_all.destinations, d_all.size());
      EXPECT_EQ(row.ma_direct.paths, grc.size() + n_direct);
      EXPECT_EQ(row.ma_direct.destinations, d_direct.size());
      ASSERT_EQ(row.top_n.size(), 3u);
      EXPECT_GE(row.top_n[0].paths, row.grc.paths);
      for (std::size_t k = 1; k < 3; ++k) {
        EXPECT_GE(row.top_n[k].paths, row.top_n[k - 1].paths);
        EXPECT_GE(row.top_n[k].destinations, row.top_n[k - 1].destinations);
      }
      EXPECT_LE(row.top_n[2].paths, row.ma_direct.paths);
      if (cat.Involving(src).size() <= 5) {
        EXPECT_EQ(row.top_n[2].paths, row.ma_direct.paths);
      }
    }
  }
}

TEST(Diversity, ParallelMatchesSerial) {
  const auto g = testing::RandomGraph(5, 60, 0.05, 0.08);
  const MaCatalog cat(g, GenerateMas(g));
  const auto sample = SampleNodes(g, 40, 9);
  EXPECT_EQ(sample, SampleNodes(g, 40, 9));
  EXPECT_EQ(std::set<AsId>(sample.begin(), sample.end()).size(), 40u);
  const auto a = DiversityStats(g, cat, sample, {1, 3}, 1);
  const auto b = DiversityStats(g, cat, sample, {1, 3}, 6);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].as, b[i].as);
    EXPECT_EQ(a[i].ma_all.paths, b[i].ma_all.paths);
    EXPECT_EQ(a[i].top_n[1].destinations, b[i].top_n[1].destinations);
  }
}

TEST(Bandwidth, DegreeGravity) {
  const auto g = testing::ExampleGraph();
  EXPECT_DOUBLE_EQ(LinkBandwidth(g, As(kD), As(kE)), 20.0);
  EXPECT_DOUBLE_EQ(PathBandwidth(g, {As(kH), As(kD), As(kE)}), 4.0);
  EXPECT_THROW(LinkBandwidth(g, As(kH), As(kE)), InputError);
}

TEST(PathsBetween, MatchesTripleScan) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = testing::RandomGraph(seed, 10);
    const auto mas = GenerateMas(g);
    const MaCatalog cat(g, mas);
    for (AsId a : g.nodes()) {
      const auto oracle = testing::OracleMaPaths(g, mas, a);
      for (AsId b : g.nodes()) {
        if (a == b) continue;
        const auto pp = PathsBetween(g, cat, a, b);
        std::vector<AsId> grc, ma;
        for (AsId m : g.nodes()) {
          if (testing::OracleGrc(g, a, m, b)) grc.push_back(m);
          if (oracle.count({a, m, b})) ma.push_back(m);
        }
        EXPECT_EQ(pp.grc_middles, grc);
        EXPECT_EQ(pp.ma_middles, ma);
        EXPECT_EQ(PathsBetween(g, cat, b, a).ma_middles, ma);  // orientation-free
      }
    }
  }
}

TEST(SampleConnectedPairs, DistinctConnectedDeterministic) {
  const auto g = testing::RandomGraph(12, 40, 0.08, 0.1);
  const auto p = SampleConnectedPairs(g, 100, 4);
  EXPECT_EQ(p, SampleConnectedPairs(g, 100, 4));
  EXPECT_EQ(std::set(p.begin(), p.end()).size(), p.size());
  EXPECT_GT(p.size(), 50u);
  const MaCatalog empty(g, {});
  for (auto [a, b] : p) {
    EXPECT_LT(a, b);
    EXPECT_FALSE(PathsBetween(g, empty, a, b).grc_middles.empty());
  }
}

// Brute-force recount of the pair statistics under the bandwidth metric,
// with one middle AS treated as lacking data.
TEST(ComparePairs, MatchBruteForceRecount) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto g = testing::RandomGraph(seed, 14, 0.2, 0.3);
    const auto mas = GenerateMas(g);
    const MaCatalog cat(g, mas);
    const AsId missing = g.IdAt(0);
    auto deg = [&](AsId x) { return static_cast<double>(g.Neighbors(x).size()); };
    PathMetricFn metric = [&](const std::array<AsId, 3>& h) -> std::optional<double> {
      if (h[1] == missing) return std::nullopt;
      return std::min(deg(h[0]) * deg(h[1]), deg(h[1]) * deg(h[2]));
    };
    const auto pairs = SampleConnectedPairs(g, 30, seed);
    const auto rows = ComparePairs(g, cat, pairs, PairMetric::kBandwidth, metric, 3);
    ASSERT_EQ(rows.size(), pairs.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto [a, b] = pairs[i];
      const auto oracle = testing::OracleMaPaths(g, mas, a);
      std::vector<double> grc, ma;
      std::size_t excluded = 0;
      for (AsId m : g.nodes()) {
        const bool is_grc = testing::OracleGrc(g, a, m, b);
        const bool is_ma = oracle.count({a, m, b}) > 0;
        if (!is_grc && !is_ma) continue;
        const auto v = metric({a, m, b});
        if (!v) {
          ++excluded;
          continue;
        }
        (is_grc ? grc : ma).push_back(*v);
      }
      const auto& r = rows[i];
      EXPECT_EQ(r.grc_paths, grc.size());
      EXPECT_EQ(r.ma_paths, ma.size());
      EXPECT_EQ(r.excluded_paths, excluded);
      EXPECT_EQ(r.valid, !grc.empty());
      if (grc.empty()) continue;
      std::sort(grc.begin(), grc.end());
      const double med = grc[(grc.size() - 1) / 2];
      EXPECT_EQ(r.grc_min, grc.front());
      EXPECT_EQ(r.grc_median, med);
      EXPECT_EQ(r.grc_max, grc.back());
      EXPECT_EQ(r.beat_min, std::count_if(ma.begin(), ma.end(), [&](double v) { return v > grc.front(); }));
      EXPECT_EQ(r.beat_median, std::count_if(ma.begin(), ma.end(), [&](double v) { return v > med; }));
      EXPECT_EQ(r.beat_max, std::count_if(ma.begin(), ma.end(), [&](double v) { return v > grc.back(); }));
      const double best_ma = ma.empty() ? 0.0 : *std::max_element(ma.begin(), ma.end());
      const double want = best_ma > grc.back() ? 100.0 * (best_ma - grc.back()) / grc.back() : 0.0;
      EXPECT_NEAR(r.improvement_pct, want, 1e-12);
    }
  }
}

TEST(ComparePair, GeodistanceLowerIsBetter) {
  AsGraph::Builder b;
  b.AddProviderCustomer(As(10), As(1));
  b.AddProviderCustomer(As(10), As(2));
  b.AddPeering(As(1), As(20));
  b.AddPeering(As(20), As(2));
  const auto g = std::move(b).Build();
  const MaCatalog cat(g, {{As(1), As(20), {}, Ids({2})}});
  PathMetricFn km = [](const std::array<AsId, 3>& h) -> std::optional<double> {
    return h[1] == AsId(10) ? 1000.0 : 400.0;
  };
  const auto r = ComparePair(g, cat, As(1), As(2), PairMetric::kGeodistance, km);
  EXPECT_EQ(r.grc_paths, 1u);
  EXPECT_EQ(r.ma_paths, 1u);
  EXPECT_EQ(r.beat_min, 1u);
  EXPECT_NEAR(r.improvement_pct, 60.0, 1e-12);
}

}  // namespace
}  // namespace pan::topo
