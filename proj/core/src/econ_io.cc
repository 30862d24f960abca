#include "pan/econ_io.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <vector>

namespace pan::econ {
namespace {

std::vector<std::string> Tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line.substr(0, line.find('#')));
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double ParseNumber(const std::string& tok) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InputError("bad number '" + tok + "'");
  return v;
}

AsEconProfile& ProfileFor(EconModel& m, AsId as) {
  auto [it, inserted] = m.profiles.try_emplace(as);
  if (inserted) it->second.as_id = as;
  return it->second;
}

FlowAssignment& FlowsFor(EconModel& m, AsId as) {
  auto [it, inserted] = m.flows.try_emplace(as);
  if (inserted) it->second.owner = as;
  return it->second;
}

}  // namespace

AsId ParseAsToken(const std::string& token) {
  std::string digits = token;
  bool stub = false;
  if (!digits.empty() && digits[0] == '@') {
    stub = true;
    digits.erase(0, 1);
  }
  std::uint64_t v = 0;
  const char* end = digits.data() + digits.size();
  auto [ptr, ec] = std::from_chars(digits.data(), end, v);
  if (digits.empty() || ec != std::errc() || ptr != end || v >= AsId::kStubBase) {
    throw InputError("bad AS token '" + token + "'");
  }
  return stub ? AsId::StubOf(AsId(v)) : AsId(v);
}

const AsEconProfile& EconModel::Profile(AsId as) const {
  auto it = profiles.find(as);
  if (it == profiles.end()) throw InputError("no economic profile for AS " + as.ToString());
  return it->second;
}

FlowAssignment EconModel::Flows(AsId as) const {
  auto it = flows.find(as);
  if (it != flows.end()) return it->second;
  FlowAssignment empty;
  empty.owner = as;
  return empty;
}

EconModel ParseEconModel(std::istream& in, const std::string& source) {
  EconModel m;
  std::map<AsId, GrantedSet> grants;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = Tokenize(line);
    if (tok.empty()) continue;
    const std::string& kw = tok[0];
    auto need = [&](std::size_t n) {
      if (tok.size() != n) {
        throw ParseError(source, lineno, kw + " expects " + std::to_string(n - 1) + " fields");
      }
    };
    try {
      if (kw == "PRICE") {
        need(5);
        const AsId p = ParseAsToken(tok[1]);
        const AsId c = ParseAsToken(tok[2]);
        const auto price = PricingFunction::Make(ParseNumber(tok[3]), ParseNumber(tok[4]));
        AsEconProfile& pp = ProfileFor(m, p);
        pp.customers.insert(c);
        pp.customer_prices[c] = price;
        if (!c.is_stub()) {
          AsEconProfile& cp = ProfileFor(m, c);
          cp.providers.insert(p);
          cp.provider_prices[p] = price;
        }
      } else if (kw == "PEER") {
        need(3);
        const AsId a = ParseAsToken(tok[1]);
        const AsId b = ParseAsToken(tok[2]);
        ProfileFor(m, a).peers.insert(b);
        ProfileFor(m, b).peers.insert(a);
      } else if (kw == "ICOST") {
        if (tok.size() < 4) throw ParseError(source, lineno, "ICOST expects a kind");
        AsEconProfile& p = ProfileFor(m, ParseAsToken(tok[1]));
        if (tok[2] == "linear") {
          need(4);
          p.internal_cost = InternalCostFunction::Linear(ParseNumber(tok[3]));
        } else if (tok[2] == "table") {
          std::vector<std::pair<double, double>> pts;
          for (std::size_t i = 3; i < tok.size(); ++i) {
            const auto colon = tok[i].find(':');
            if (colon == std::string::npos) throw InputError("table point needs f:c");
            pts.emplace_back(ParseNumber(tok[i].substr(0, colon)),
                             ParseNumber(tok[i].substr(colon + 1)));
          }
          p.internal_cost = InternalCostFunction::Tabulated(std::move(pts));
        } else {
          throw ParseError(source, lineno, "unknown ICOST kind '" + tok[2] + "'");
        }
      } else if (kw == "FLOW") {
        need(4);
        const AsId x = ParseAsToken(tok[1]);
        const AsId y = ParseAsToken(tok[2]);
        const double v = ParseNumber(tok[3]);
        FlowsFor(m, x).per_neighbor[y] = v;
        if (!y.is_stub()) FlowsFor(m, y).per_neighbor[x] = v;
      } else if (kw == "SEGFLOW") {
        need(5);
        PathSegment seg{ParseAsToken(tok[1]), ParseAsToken(tok[2]), ParseAsToken(tok[3])};
        const double v = ParseNumber(tok[4]);
        for (AsId a : seg) {
          if (!a.is_stub()) FlowsFor(m, a).per_segment[seg] = v;
        }
      } else if (kw == "AGREE") {
        need(3);
        if (m.agreement) throw ParseError(source, lineno, "only one AGREE line allowed");
        Agreement a;
        a.party_x = ParseAsToken(tok[1]);
        a.party_y = ParseAsToken(tok[2]);
        m.agreement = a;
      } else if (kw == "GRANT") {
        need(3);
        grants[ParseAsToken(tok[1])].customers.insert(ParseAsToken(tok[2]));
      } else if (kw == "DEMAND") {
        need(6);
        PathSegment key{ParseAsToken(tok[1]), ParseAsToken(tok[2]), ParseAsToken(tok[3]),
                        ParseAsToken(tok[4])};
        const double cap = ParseNumber(tok[5]);
        if (!(cap >= 0.0)) throw InputError("demand cap must be >= 0");
        m.demand_caps[key] = cap;
      } else {
        throw ParseError(source, lineno, "unknown record '" + kw + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(source, lineno, e.what());
    }
  }

  for (auto& [as, flows] : m.flows) {
    if (!m.profiles.count(as)) continue;
    try {
      flows.Validate();
    } catch (const InputError& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  for (const auto& [as, p] : m.profiles) {
    try {
      p.Validate();
    } catch (const InputError& e) {
      throw ParseError(source, lineno, e.what());
    }
  }

  // GRANT lines were collected untyped; sort each neighbor into the
  // granting party's provider/peer/customer set.
  if (!grants.empty() && !m.agreement) {
    throw ParseError(source, lineno, "GRANT without AGREE");
  }
  if (m.agreement) {
    Agreement& a = *m.agreement;
    for (const auto& [party, set] : grants) {
      if (!a.IsParty(party)) {
        throw ParseError(source, lineno, "GRANT by non-party " + party.ToString());
      }
      const AsEconProfile& p = m.Profile(party);
      GrantedSet& dst = party == a.party_x ? a.granted_by_x : a.granted_by_y;
      for (AsId n : set.customers) {
        switch (p.RelationTo(n)) {
          case Relation::kProvider: dst.providers.insert(n); break;
          case Relation::kPeer: dst.peers.insert(n); break;
          case Relation::kCustomer: dst.customers.insert(n); break;
          case Relation::kNone:
            throw ParseError(source, lineno, "AS " + party.ToString() + " grants non-neighbor " +
                                                 n.ToString());
        }
      }
    }
    if (!m.profiles.count(a.party_x) || !m.profiles.count(a.party_y)) {
      throw ParseError(source, lineno, "agreement party without profile");
    }
  }
  return m;
}

EconModel LoadEconModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return ParseEconModel(in, path);
}

}  // namespace pan::econ
