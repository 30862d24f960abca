#ifndef PAN_GEO_H
#define PAN_GEO_H

// Geolocation of ASes and AS interconnections, and path geodistance.
//
// Canonical input formats:
//   pfx2as   "prefix<TAB>length<TAB>asn"; asn may be a MOAS list "a_b" or an
//            AS set "a,b", each member receives the prefix
//   geo db   CSV "network,lat,lon" (CIDR network); a header row naming
//            network/latitude/longitude columns selects them by name, which
//            also accepts GeoLite2 city-block files
//   georel   CSV "as1,as2,lat,lon", one row per interconnection point

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pan/types.h"

namespace pan::geo {

inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  // Throws InputError unless |lat| <= 90 and |lon| <= 180.
  void Validate() const;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

double HaversineKm(const GeoPoint& a, const GeoPoint& b);

// Unit-vector mean re-projected to the sphere, so longitudes wrap around
// the antimeridian. nullopt for an empty input or antipodal cancellation.
std::optional<GeoPoint> SphericalMean(const std::vector<GeoPoint>& points);

// IPv4 prefixes are stored IPv4-mapped in a 128-bit address.
struct IpPrefix {
  std::array<std::uint8_t, 16> addr{};
  int length = 0;  // in the 128-bit space
  bool v4 = false;

  static IpPrefix Parse(const std::string& cidr);                      // "a.b.c.d/n"
  static IpPrefix FromParts(const std::string& address, int length);  // pfx2as columns
  std::string ToString() const;
};

// Longest-prefix match over geolocated networks.
class PrefixGeoDb {
 public:
  void Add(const IpPrefix& network, const GeoPoint& point);
  // Location of the most specific network containing the prefix's base
  // address.
  std::optional<GeoPoint> Lookup(const IpPrefix& prefix) const;
  std::size_t size() const { return count_; }

 private:
  std::map<int, std::unordered_map<std::string, GeoPoint>> by_length_;
  std::size_t count_ = 0;
};

struct Pfx2AsRow {
  IpPrefix prefix;
  std::vector<AsId> asns;
};

std::vector<Pfx2AsRow> ParsePfx2As(std::istream& in, const std::string& source = "<input>");
std::vector<Pfx2AsRow> LoadPfx2As(const std::string& path);
PrefixGeoDb ParseGeoDb(std::istream& in, const std::string& source = "<input>");
PrefixGeoDb LoadGeoDb(const std::string& path);

struct GeoRelRow {
  AsId a;
  AsId b;
  GeoPoint point;
};

std::vector<GeoRelRow> ParseGeoRel(std::istream& in, const std::string& source = "<input>");
std::vector<GeoRelRow> LoadGeoRel(const std::string& path);

// Centre of gravity of an AS: the spherical mean of its geolocatable
// prefixes, each counted once. nullopt if none can be located.
std::optional<GeoPoint> AsCentroid(const std::vector<Pfx2AsRow>& rows, const PrefixGeoDb& db,
                                   AsId as);

// Recorded interconnection points for the pair in input order, either
// orientation; empty if unknown.
std::vector<GeoPoint> LinkGeolocation(const std::vector<GeoRelRow>& rows, AsId a, AsId b);

struct LinkLocations {
  std::vector<GeoPoint> points;
  bool fallback = false;  // midpoint of the two centroids
};

struct PathDistance {
  double km = 0.0;
  bool fallback = false;  // a link location came from the midpoint rule
};

// Precomputed centroids and interconnection points. Unknown interconnections
// fall back to the centroid midpoint unless `strict`.
class GeoContext {
 public:
  GeoContext(const std::vector<Pfx2AsRow>& pfx2as, const PrefixGeoDb& db,
             const std::vector<GeoRelRow>& georel, bool strict);
  // Direct construction, mainly for tests.
  GeoContext(std::unordered_map<std::uint64_t, GeoPoint> centroids,
             const std::vector<GeoRelRow>& georel, bool strict);

  std::optional<GeoPoint> Centroid(AsId as) const;
  LinkLocations Link(AsId a, AsId b) const;

  // d(A1, l12) + d(l12, l23) + d(l23, A3) minimised over the candidate
  // interconnection points; nullopt when geodata is missing.
  std::optional<PathDistance> Geodistance(const std::array<AsId, 3>& hops) const;

  std::size_t located_ases() const { return centroids_.size(); }
  bool strict() const { return strict_; }

 private:
  std::unordered_map<std::uint64_t, GeoPoint> centroids_;
  std::unordered_map<std::uint64_t, std::vector<GeoPoint>> links_;
  bool strict_ = false;
};

}  // namespace pan::geo

#endif  // PAN_GEO_H
