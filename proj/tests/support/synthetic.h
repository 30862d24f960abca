#ifndef PAN_TESTS_SYNTHETIC_H
#define PAN_TESTS_SYNTHETIC_H

// Seeded stand-in for a CAIDA snapshot: a tiered AS hierarchy with a tier-1
// clique, degree-preferential provider choice, regional peering and a few
// open-peering hubs, plus matching pfx2as, prefix geolocation and
// interconnection files in the canonical formats the CLI reads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "pan/rng.h"

namespace pan::testing {

struct SyntheticFiles {
  std::string rel;
  std::string pfx2as;
  std::string geo;
  std::string georel;
  std::size_t ases = 0;
  std::size_t p2c = 0;
  std::size_t p2p = 0;
};

inline SyntheticFiles WriteSyntheticSnapshot(const std::string& dir, std::size_t n,
                                             std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t tier1 = 12;
  const std::size_t tier2 = std::max<std::size_t>(n / 12, 20);
  struct Region {
    double lat, lon;
  };
  const std::vector<Region> regions{{50, 8},    {40, -75}, {37, -120}, {35, 139},
                                    {1, 104},   {-23, -46}, {-33, 151}, {28, 77}};
  std::vector<std::size_t> region(n);
  std::vector<double> lat(n), lon(n);
  for (std::size_t i = 0; i < n; ++i) {
    region[i] = rng.Below(regions.size());
    lat[i] = std::clamp(regions[region[i]].lat + rng.Uniform(-6, 6), -89.0, 89.0);
    lon[i] = regions[region[i]].lon + rng.Uniform(-8, 8);
    if (lon[i] > 180) lon[i] -= 360;
    if (lon[i] < -180) lon[i] += 360;
  }

  std::set<std::pair<std::size_t, std::size_t>> linked;
  std::vector<std::pair<std::size_t, std::size_t>> pc, peer;
  std::vector<std::size_t> degree(n, 0);
  auto link = [&](std::size_t a, std::size_t b, bool provider_customer) {
    if (a == b || !linked.insert(std::minmax(a, b)).second) return false;
    (provider_customer ? pc : peer).emplace_back(a, b);
    ++degree[a];
    ++degree[b];
    return true;
  };
  // Provider drawn among [0, limit) with weight degree + 1.
  auto pick_provider = [&](std::size_t limit) {
    double total = 0;
    for (std::size_t j = 0; j < limit; ++j) total += static_cast<double>(degree[j] + 1);
    double r = rng.Uniform(0, total);
    for (std::size_t j = 0; j < limit; ++j) {
      r -= static_cast<double>(degree[j] + 1);
      if (r <= 0) return j;
    }
    return limit - 1;
  };

  for (std::size_t i = 0; i < tier1; ++i) {
    for (std::size_t j = i + 1; j < tier1; ++j) link(i, j, false);
  }
  for (std::size_t i = tier1; i < tier1 + tier2; ++i) {
    const std::size_t k = 1 + rng.Below(3);
    for (std::size_t t = 0; t < k; ++t) link(pick_provider(i), i, true);
  }
  // Stubs attach to the transit core; a few pick an earlier stub, which
  // turns it into a small regional provider.
  for (std::size_t i = tier1 + tier2; i < n; ++i) {
    const std::size_t k = 1 + (rng.Uniform01() < 0.35 ? 1 : 0);
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t p = rng.Uniform01() < 0.1
                                ? tier1 + tier2 + rng.Below(i - tier1 - tier2 + 1)
                                : pick_provider(tier1 + tier2);
      if (p < i) link(p, i, true);
    }
    if (degree[i] == 0) link(pick_provider(tier1 + tier2), i, true);
  }
  // Regional peering: transit ASes peer widely, a share of stubs peers at
  // local exchanges.
  std::vector<std::vector<std::size_t>> by_region(regions.size());
  for (std::size_t i = tier1; i < n; ++i) by_region[region[i]].push_back(i);
  for (std::size_t i = tier1; i < n; ++i) {
    const bool transit = i < tier1 + tier2;
    // Stub peer counts are heavy tailed, as at real exchanges.
    double want = transit ? 30.0 : 0.0;
    if (!transit && rng.Uniform01() < 0.5) want = std::floor(std::exp(rng.Uniform(0.0, 3.0)));
    const auto& pool = by_region[region[i]];
    for (int t = 0; t < static_cast<int>(want); ++t) {
      std::size_t j = pool[rng.Below(pool.size())];
      if (transit && rng.Uniform01() < 0.5) j = tier1 + rng.Below(tier2);
      link(std::min(i, j), std::max(i, j), false);
    }
  }

  // A few open-peering hubs peer with a large share of everyone.
  const std::size_t hubs = 6;
  for (std::size_t h = tier1; h < tier1 + hubs; ++h) {
    for (std::size_t i = tier1; i < n; ++i) {
      const double share = i < tier1 + tier2 ? 0.3 : 0.15;
      if (i != h && rng.Uniform01() < share) link(std::min(h, i), std::max(h, i), false);
    }
  }

  auto asn = [](std::size_t i) { return 1000 + 7 * i; };
  SyntheticFiles f;
  f.rel = dir + "/synthetic.as-rel.txt";
  f.pfx2as = dir + "/synthetic.pfx2as";
  f.geo = dir + "/synthetic.geo.csv";
  f.georel = dir + "/synthetic.georel.csv";
  f.ases = n;
  f.p2c = pc.size();
  f.p2p = peer.size();
  char buf[160];

  std::ofstream rel(f.rel);
  rel << "# synthetic serial-1 snapshot, seed " << seed << "\n";
  for (auto [a, b] : pc) rel << asn(a) << '|' << asn(b) << "|-1\n";
  for (auto [a, b] : peer) rel << asn(a) << '|' << asn(b) << "|0\n";

  std::ofstream pfx(f.pfx2as), geo(f.geo);
  geo << "network,latitude,longitude\n";
  std::uint32_t next = 16u << 24;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = 1 + rng.Below(3);
    for (std::size_t t = 0; t < k; ++t) {
      const std::uint32_t a = next;
      next += 1u << 12;
      char addr[32];
      std::snprintf(addr, sizeof addr, "%u.%u.%u.%u", a >> 24, (a >> 16) & 255,
                    (a >> 8) & 255, a & 255);
      pfx << addr << "\t20\t" << asn(i) << "\n";
      if (rng.Uniform01() < 0.03) continue;  // not geolocatable
      std::snprintf(buf, sizeof buf, "%s/20,%.4f,%.4f", addr,
                    std::clamp(lat[i] + rng.Uniform(-1, 1), -89.9, 89.9),
                    std::clamp(lon[i] + rng.Uniform(-1, 1), -179.9, 179.9));
      geo << buf << "\n";
    }
  }

  std::ofstream georel(f.georel);
  georel << "as1,as2,lat,lon\n";
  auto write_links = [&](const std::vector<std::pair<std::size_t, std::size_t>>& links) {
    for (auto [a, b] : links) {
      if (rng.Uniform01() < 0.4) continue;  // unknown: midpoint fallback
      const std::size_t k = 1 + rng.Below(3);
      for (std::size_t t = 0; t < k; ++t) {
        const std::size_t at = rng.Below(2) ? a : b;
        const Region r = regions[region[at]];
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.4f,%.4f\n", asn(a), asn(b),
                      r.lat + rng.Uniform(-2, 2), r.lon + rng.Uniform(-2, 2));
        georel << buf;
      }
    }
  };
  write_links(pc);
  write_links(peer);
  return f;
}

}  // namespace pan::testing

#endif  // PAN_TESTS_SYNTHETIC_H
