#include "pan/geo.h"

#include <arpa/inet.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <set>

namespace pan::geo {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::uint64_t PairKey(AsId a, AsId b) {
  const auto lo = std::min(a.value, b.value);
  const auto hi = std::max(a.value, b.value);
  return (lo << 32) | hi;
}

std::vector<std::string> Split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = line.find(sep, pos);
    std::string f = line.substr(pos, next - pos);
    if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
    out.push_back(std::move(f));
    if (next == std::string::npos) return out;
    pos = next + 1;
  }
}

std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    pos = line.find_first_not_of(" \t", pos);
    if (pos == std::string::npos) break;
    const auto end = line.find_first_of(" \t", pos);
    out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

bool ParseDouble(const std::string& s, double& v) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return !s.empty() && ec == std::errc() && ptr == s.data() + s.size();
}

double Number(const std::string& s) {
  double v = 0.0;
  if (!ParseDouble(s, v)) throw InputError("bad number '" + s + "'");
  return v;
}

AsId Asn(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || v >= AsId::kStubBase) {
    throw InputError("bad ASN '" + s + "'");
  }
  return AsId(v);
}

void Mask(std::array<std::uint8_t, 16>& addr, int length) {
  for (int i = 0; i < 16; ++i) {
    const int keep = std::clamp(length - 8 * i, 0, 8);
    addr[i] &= static_cast<std::uint8_t>(keep == 0 ? 0 : 0xff << (8 - keep));
  }
}

std::string Key(std::array<std::uint8_t, 16> addr, int length) {
  Mask(addr, length);
  return std::string(addr.begin(), addr.end());
}

template <typename Fn>
void ForEachLine(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    try {
      fn(line, lineno);
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
}

}  // namespace

void GeoPoint::Validate() const {
  if (!(std::abs(lat) <= 90.0) || !(std::abs(lon) <= 180.0)) {
    throw InputError("coordinates out of range");
  }
}

double HaversineKm(const GeoPoint& a, const GeoPoint& b) {
  const double dlat = (b.lat - a.lat) * kDeg;
  const double dlon = (b.lon - a.lon) * kDeg;
  const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(s)));
}

std::optional<GeoPoint> SphericalMean(const std::vector<GeoPoint>& points) {
  if (points.empty()) return std::nullopt;
  double x = 0.0, y = 0.0, z = 0.0;
  for (const GeoPoint& p : points) {
    x += std::cos(p.lat * kDeg) * std::cos(p.lon * kDeg);
    y += std::cos(p.lat * kDeg) * std::sin(p.lon * kDeg);
    z += std::sin(p.lat * kDeg);
  }
  const double n = static_cast<double>(points.size());
  x /= n;
  y /= n;
  z /= n;
  if (std::sqrt(x * x + y * y + z * z) < 1e-12) return std::nullopt;
  GeoPoint out{std::atan2(z, std::hypot(x, y)) / kDeg, std::atan2(y, x) / kDeg};
  if (out.lon == -180.0) out.lon = 180.0;
  return out;
}

IpPrefix IpPrefix::FromParts(const std::string& address, int length) {
  IpPrefix p;
  in_addr v4{};
  if (inet_pton(AF_INET, address.c_str(), &v4) == 1) {
    if (length < 0 || length > 32) throw InputError("bad IPv4 prefix length");
    p.v4 = true;
    p.addr[10] = p.addr[11] = 0xff;
    std::memcpy(p.addr.data() + 12, &v4, 4);
    p.length = 96 + length;
  } else {
    in6_addr v6{};
    if (inet_pton(AF_INET6, address.c_str(), &v6) != 1) {
      throw InputError("bad address '" + address + "'");
    }
    if (length < 0 || length > 128) throw InputError("bad IPv6 prefix length");
    std::memcpy(p.addr.data(), &v6, 16);
    p.length = length;
  }
  Mask(p.addr, p.length);
  return p;
}

IpPrefix IpPrefix::Parse(const std::string& cidr) {
  const auto slash = cidr.find('/');
  if (slash == std::string::npos) throw InputError("prefix '" + cidr + "' lacks /length");
  int length = 0;
  const std::string len = cidr.substr(slash + 1);
  auto [ptr, ec] = std::from_chars(len.data(), len.data() + len.size(), length);
  if (len.empty() || ec != std::errc() || ptr != len.data() + len.size()) {
    throw InputError("bad prefix length in '" + cidr + "'");
  }
  return FromParts(cidr.substr(0, slash), length);
}

std::string IpPrefix::ToString() const {
  char buf[INET6_ADDRSTRLEN] = {};
  if (v4) {
    inet_ntop(AF_INET, addr.data() + 12, buf, sizeof buf);
    return std::string(buf) + "/" + std::to_string(length - 96);
  }
  inet_ntop(AF_INET6, addr.data(), buf, sizeof buf);
  return std::string(buf) + "/" + std::to_string(length);
}

void PrefixGeoDb::Add(const IpPrefix& network, const GeoPoint& point) {
  point.Validate();
  auto [it, inserted] = by_length_[network.length].insert_or_assign(
      Key(network.addr, network.length), point);
  (void)it;
  count_ += inserted;
}

std::optional<GeoPoint> PrefixGeoDb::Lookup(const IpPrefix& prefix) const {
  for (auto it = by_length_.rbegin(); it != by_length_.rend(); ++it) {
    auto hit = it->second.find(Key(prefix.addr, it->first));
    if (hit != it->second.end()) return hit->second;
  }
  return std::nullopt;
}

std::vector<Pfx2AsRow> ParsePfx2As(std::istream& in, const std::string& source) {
  std::vector<Pfx2AsRow> rows;
  ForEachLine(in, source, [&](const std::string& line, std::size_t) {
    const auto f = SplitWhitespace(line);
    if (f.size() != 3) throw InputError("expected prefix, length, asn");
    Pfx2AsRow row;
    row.prefix = IpPrefix::FromParts(f[0], static_cast<int>(Number(f[1])));
    std::string asns = f[2];
    std::erase_if(asns, [](char c) { return c == '{' || c == '}'; });
    std::replace(asns.begin(), asns.end(), ',', '_');
    for (const auto& a : Split(asns, '_')) row.asns.push_back(Asn(a));
    rows.push_back(std::move(row));
  });
  return rows;
}

std::vector<Pfx2AsRow> LoadPfx2As(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return ParsePfx2As(in, path);
}

PrefixGeoDb ParseGeoDb(std::istream& in, const std::string& source) {
  PrefixGeoDb db;
  std::size_t col_net = 0, col_lat = 1, col_lon = 2;
  bool first = true;
  ForEachLine(in, source, [&](const std::string& line, std::size_t) {
    const auto f = Split(line, ',');
    if (first) {
      first = false;
      if (f[0].find('/') == std::string::npos) {
        auto find = [&](std::initializer_list<const char*> names) {
          for (std::size_t i = 0; i < f.size(); ++i) {
            for (const char* n : names) {
              if (f[i] == n) return i;
            }
          }
          throw InputError("geo header lacks a column named " + std::string(*names.begin()));
        };
        col_net = find({"network"});
        col_lat = find({"lat", "latitude"});
        col_lon = find({"lon", "longitude"});
        return;
      }
    }
    const std::size_t need = std::max({col_net, col_lat, col_lon}) + 1;
    if (f.size() < need) throw InputError("geo row has too few columns");
    // Blocks without coordinates exist in upstream data; they carry no fix.
    if (f[col_lat].empty() || f[col_lon].empty()) return;
    db.Add(IpPrefix::Parse(f[col_net]), GeoPoint{Number(f[col_lat]), Number(f[col_lon])});
  });
  return db;
}

PrefixGeoDb LoadGeoDb(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return ParseGeoDb(in, path);
}

std::vector<GeoRelRow> ParseGeoRel(std::istream& in, const std::string& source) {
  std::vector<GeoRelRow> rows;
  bool first = true;
  ForEachLine(in, source, [&](const std::string& line, std::size_t) {
    const auto f = Split(line, ',');
    if (first) {
      first = false;
      if (!f.empty() && !f[0].empty() && !std::isdigit(static_cast<unsigned char>(f[0][0]))) {
        return;  // header
      }
    }
    if (f.size() != 4) throw InputError("expected as1,as2,lat,lon");
    GeoRelRow row{Asn(f[0]), Asn(f[1]), GeoPoint{Number(f[2]), Number(f[3])}};
    row.point.Validate();
    rows.push_back(row);
  });
  return rows;
}

std::vector<GeoRelRow> LoadGeoRel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return ParseGeoRel(in, path);
}

std::optional<GeoPoint> AsCentroid(const std::vector<Pfx2AsRow>& rows, const PrefixGeoDb& db,
                                   AsId as) {
  std::vector<GeoPoint> points;
  std::set<std::string> seen;
  for (const auto& row : rows) {
    if (std::find(row.asns.begin(), row.asns.end(), as) == row.asns.end()) continue;
    if (!seen.insert(row.prefix.ToString()).second) continue;
    if (auto p = db.Lookup(row.prefix)) points.push_back(*p);
  }
  return SphericalMean(points);
}

std::vector<GeoPoint> LinkGeolocation(const std::vector<GeoRelRow>& rows, AsId a, AsId b) {
  std::vector<GeoPoint> out;
  for (const auto& r : rows) {
    if ((r.a == a && r.b == b) || (r.a == b && r.b == a)) out.push_back(r.point);
  }
  return out;
}

GeoContext::GeoContext(const std::vector<Pfx2AsRow>& pfx2as, const PrefixGeoDb& db,
                       const std::vector<GeoRelRow>& georel, bool strict)
    : strict_(strict) {
  // Each prefix is geolocated once and credited to every origin AS.
  std::unordered_map<std::uint64_t, std::vector<GeoPoint>> points;
  std::set<std::pair<std::uint64_t, std::string>> seen;
  for (const auto& row : pfx2as) {
    const auto p = db.Lookup(row.prefix);
    if (!p) continue;
    const std::string key = row.prefix.ToString();
    for (AsId as : row.asns) {
      if (seen.emplace(as.value, key).second) points[as.value].push_back(*p);
    }
  }
  for (auto& [as, pts] : points) {
    if (auto c = SphericalMean(pts)) centroids_.emplace(as, *c);
  }
  for (const auto& r : georel) links_[PairKey(r.a, r.b)].push_back(r.point);
}

GeoContext::GeoContext(std::unordered_map<std::uint64_t, GeoPoint> centroids,
                       const std::vector<GeoRelRow>& georel, bool strict)
    : centroids_(std::move(centroids)), strict_(strict) {
  for (const auto& r : georel) links_[PairKey(r.a, r.b)].push_back(r.point);
}

std::optional<GeoPoint> GeoContext::Centroid(AsId as) const {
  auto it = centroids_.find(as.value);
  if (it == centroids_.end()) return std::nullopt;
  return it->second;
}

LinkLocations GeoContext::Link(AsId a, AsId b) const {
  LinkLocations out;
  if (auto it = links_.find(PairKey(a, b)); it != links_.end()) {
    out.points = it->second;
    return out;
  }
  if (strict_) return out;
  const auto ca = Centroid(a);
  const auto cb = Centroid(b);
  if (!ca || !cb) return out;
  if (auto mid = SphericalMean({*ca, *cb})) {
    out.points.push_back(*mid);
    out.fallback = true;
  }
  return out;
}

std::optional<PathDistance> GeoContext::Geodistance(const std::array<AsId, 3>& hops) const {
  const auto a1 = Centroid(hops[0]);
  const auto a3 = Centroid(hops[2]);
  if (!a1 || !a3) return std::nullopt;
  const LinkLocations l12 = Link(hops[0], hops[1]);
  const LinkLocations l23 = Link(hops[1], hops[2]);
  if (l12.points.empty() || l23.points.empty()) return std::nullopt;
  PathDistance best;
  best.km = std::numeric_limits<double>::infinity();
  for (const GeoPoint& p : l12.points) {
    const double head = HaversineKm(*a1, p);
    for (const GeoPoint& q : l23.points) {
      best.km = std::min(best.km, head + HaversineKm(p, q) + HaversineKm(q, *a3));
    }
  }
  best.fallback = l12.fallback || l23.fallback;
  return best;
}

}  // namespace pan::geo
