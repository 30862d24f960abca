#ifndef PAN_ECON_IO_H
#define PAN_ECON_IO_H

// Line-oriented economic model format. One record per line, fields
// separated by whitespace, '#' starts a comment. AS tokens are decimal
// ASNs; "@N" names the end-host stub of AS N.
//
//   PRICE   <provider> <customer> <alpha> <beta>   provider-customer link
//   PEER    <a> <b>                                settlement-free peering
//   ICOST   <as> linear <j>                        i(f) = j * f
//   ICOST   <as> table <f>:<c> <f>:<c> ...         piecewise linear
//   FLOW    <x> <y> <volume>                       link volume f_xy
//   SEGFLOW <x> <y> <z> <volume>                   segment volume f_xyz
//   AGREE   <x> <y>                                agreement parties
//   GRANT   <party> <neighbor>                     party opens neighbor
//   DEMAND  <customer> <beneficiary> <partner> <target> <cap>
//
// PRICE and PEER lines define the neighbor sets. FLOW values describe the
// link and are recorded for both endpoints; SEGFLOW values are recorded for
// every modeled AS on the segment.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "pan/econ.h"

namespace pan::econ {

struct EconModel {
  std::map<AsId, AsEconProfile> profiles;
  std::map<AsId, FlowAssignment> flows;
  std::optional<Agreement> agreement;
  // (C, B, M, Z) -> customer demand cap for the new segment (B, M, Z).
  std::map<PathSegment, double> demand_caps;

  const AsEconProfile& Profile(AsId as) const;
  // Empty assignment when the AS has no FLOW lines.
  FlowAssignment Flows(AsId as) const;
};

// Throws ParseError with the offending line number.
EconModel ParseEconModel(std::istream& in, const std::string& source = "<input>");
EconModel LoadEconModel(const std::string& path);

AsId ParseAsToken(const std::string& token);

}  // namespace pan::econ

#endif  // PAN_ECON_IO_H
