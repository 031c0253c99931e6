#pragma once

#include <json.hpp>

#include "anonsim/anonnet.hpp"
#include "anonsim/netlayer.hpp"
#include "anonsim/synth.hpp"

// Reference table for the hand-checkable six-AS fixture. t6_reference()
// derives every value from the brute-force oracles; t6_fastpath() rebuilds
// the same table through the production code paths. The checked-in fixture
// file must equal both, which pins the fixture values to the oracles and
// the fast paths to the fixture.
namespace anonsim::t6 {

using nlohmann::json;
using topology::AsGraph;

struct GuardSpec {
  const char* id;
  AsId host_as;
  double bandwidth;
};

inline constexpr GuardSpec kGselectGuards[] = {{"g5", 5, 300.0}, {"g3", 3, 100.0}};
inline constexpr GuardSpec kCrGuards[] = {{"g5", 5, 300.0}, {"g4", 4, 100.0}};
inline constexpr double kCrAlpha = 0.5;

namespace detail {

inline json path_json(const AsPath& p) {
  json a = json::array();
  for (AsId as : p) a.push_back(as);
  return a;
}

inline json paths_json(const std::vector<AsPath>& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(path_json(p));
  return a;
}

inline json ids_json(const std::vector<AsId>& ids) {
  json a = json::array();
  for (AsId as : ids) a.push_back(as);
  return a;
}

// The pieces each builder must supply; everything else is shared shape.
struct Backend {
  std::function<std::optional<AsPath>(AsId src, AsId dst)> best_path;
  std::function<std::vector<AsPath>(AsId, AsId, std::size_t, std::size_t)> enumerate;
  std::function<std::map<AsId, bool>(AsId origin, AsId attacker)> hijack;
  std::function<std::pair<std::uint64_t, std::uint64_t>(AsId, AsId)> resilience;
  std::function<std::vector<AsId>(const AsGraph&)> client_isps;
  std::function<std::vector<AsId>(AsId pred, std::uint32_t pos, std::size_t max_peer)>
      location_set;
  std::function<std::optional<std::pair<AsId, AsPath>>(AsId src, AsId helper, AsId dst)>
      phi;  // (midway, full path)
};

inline json build(const AsGraph& g, const Backend& b) {
  json out;
  out["client_isp_ases"] = ids_json(b.client_isps(g));

  json routing = json::object();
  json penultimate = json::object();
  for (AsId dst : g.ases()) {
    json per_src = json::object();
    json pens = json::object();
    for (AsId src : g.ases()) {
      auto p = b.best_path(src, dst);
      per_src[std::to_string(src)] = p ? path_json(*p) : json(nullptr);
      if (src != dst && p && p->size() >= 2)
        pens[std::to_string(src)] = (*p)[p->size() - 2];
      else
        pens[std::to_string(src)] = nullptr;
    }
    routing[std::to_string(dst)] = std::move(per_src);
    penultimate[std::to_string(dst)] = std::move(pens);
  }
  out["routing"] = std::move(routing);
  out["penultimate"] = std::move(penultimate);

  json routable = json::array();
  const struct {
    AsId src, dst;
    std::size_t max_peer, max_len;
  } routable_cases[] = {{6, 5, 1, 5}, {6, 5, 1, 4}, {6, 5, 0, 5}};
  for (const auto& c : routable_cases) {
    json e;
    e["src"] = c.src;
    e["dst"] = c.dst;
    e["max_peer_links"] = c.max_peer;
    e["max_len"] = c.max_len;
    e["paths"] = paths_json(b.enumerate(c.src, c.dst, c.max_peer, c.max_len));
    routable.push_back(std::move(e));
  }
  out["routable_paths"] = std::move(routable);

  json hijacks = json::array();
  const std::pair<AsId, AsId> hijack_cases[] = {{5, 3}, {4, 1}, {4, 3}};
  for (const auto& [origin, attacker] : hijack_cases) {
    json e;
    e["origin"] = origin;
    e["attacker"] = attacker;
    auto verdicts = b.hijack(origin, attacker);
    std::vector<AsId> hijacked;
    for (const auto& [as, hit] : verdicts)
      if (hit) hijacked.push_back(as);
    e["hijacked"] = ids_json(hijacked);
    hijacks.push_back(std::move(e));
  }
  out["hijack"] = std::move(hijacks);

  json resil = json::array();
  const std::pair<AsId, AsId> res_cases[] = {{6, 4}, {6, 5}};
  for (const auto& [client, guard] : res_cases) {
    auto [safe, cands] = b.resilience(client, guard);
    json e;
    e["client"] = client;
    e["guard_as"] = guard;
    e["safe"] = safe;
    e["candidates"] = cands;
    e["value"] = cands == 0 ? 1.0 : static_cast<double>(safe) / static_cast<double>(cands);
    resil.push_back(std::move(e));
  }
  out["resilience"] = std::move(resil);

  // Bandwidth-weighted suspect-free selection, assembled from the backend's
  // own paths so both routes stay self-contained.
  auto gselect = [&](const std::set<AsId>& suspects, AsId client) {
    json dist = json::object();
    double total = 0.0;
    std::vector<std::pair<const GuardSpec*, double>> kept;
    for (const auto& guard : kGselectGuards) {
      auto p = b.best_path(client, guard.host_as);
      if (!p) continue;
      bool clean = true;
      for (AsId as : *p) clean &= !suspects.count(as);
      if (!clean) continue;
      kept.emplace_back(&guard, guard.bandwidth);
      total += guard.bandwidth;
    }
    for (const auto& [guard, bw] : kept) dist[guard->id] = bw / total;
    return dist;
  };
  json gsel = json::array();
  const struct {
    std::set<AsId> suspects;
    AsId client;
  } gsel_cases[] = {{{1}, 6}, {{1}, 4}, {{2}, 6}};
  for (const auto& c : gsel_cases) {
    json e;
    e["suspects"] = ids_json({c.suspects.begin(), c.suspects.end()});
    e["client"] = c.client;
    e["dist"] = gselect(c.suspects, c.client);
    gsel.push_back(std::move(e));
  }
  out["gselect"] = std::move(gsel);

  {
    json e;
    e["client"] = 6;
    e["alpha"] = kCrAlpha;
    double bw_total = 0.0;
    for (const auto& guard : kCrGuards) bw_total += guard.bandwidth;
    double wsum = 0.0;
    std::vector<std::pair<const char*, double>> weights;
    for (const auto& guard : kCrGuards) {
      auto [safe, cands] = b.resilience(6, guard.host_as);
      const double r =
          cands == 0 ? 1.0 : static_cast<double>(safe) / static_cast<double>(cands);
      const double w = kCrAlpha * r + (1.0 - kCrAlpha) * (guard.bandwidth / bw_total);
      weights.emplace_back(guard.id, w);
      wsum += w;
    }
    json dist = json::object();
    for (const auto& [id, w] : weights) dist[id] = w / wsum;
    e["dist"] = std::move(dist);
    out["counter_raptor"] = std::move(e);
  }

  json lsets = json::array();
  const struct {
    AsId pred;
    std::uint32_t pos;
    std::size_t max_peer;
  } lset_cases[] = {{4, 3, 1}, {4, 2, 1}, {1, 4, 1}, {1, 4, 0}};
  for (const auto& c : lset_cases) {
    json e;
    e["predecessor"] = c.pred;
    e["position"] = c.pos;
    e["max_peer_links"] = c.max_peer;
    e["set"] = ids_json(b.location_set(c.pred, c.pos, c.max_peer));
    lsets.push_back(std::move(e));
  }
  out["location_sets"] = std::move(lsets);

  json phis = json::array();
  const struct {
    AsId src, helper, dst;
  } phi_cases[] = {{6, 1, 5}, {6, 2, 5}, {6, 3, 5}};
  for (const auto& c : phi_cases) {
    json e;
    e["src"] = c.src;
    e["helper"] = c.helper;
    e["dst"] = c.dst;
    auto built = b.phi(c.src, c.helper, c.dst);
    if (built) {
      e["midway"] = built->first;
      e["full_path"] = path_json(built->second);
    } else {
      e["midway"] = nullptr;
      e["full_path"] = nullptr;
    }
    phis.push_back(std::move(e));
  }
  out["phi"] = std::move(phis);

  json hsets = json::array();
  const std::pair<AsId, AsId> hset_cases[] = {{5, 2}, {5, 4}};
  for (const auto& [dst, pen] : hset_cases) {
    json e;
    e["dst"] = dst;
    e["penultimate"] = pen;
    std::vector<AsId> set;
    for (AsId src : g.ases()) {
      if (src == dst) continue;
      auto p = b.best_path(src, dst);
      if (p && p->size() >= 2 && (*p)[p->size() - 2] == pen) set.push_back(src);
    }
    e["set"] = ids_json(set);
    hsets.push_back(std::move(e));
  }
  out["hornet_source_sets"] = std::move(hsets);

  return out;
}

}  // namespace detail

// Every value derived from the sweep/enumeration oracles.
inline json t6_reference(const AsGraph& g) {
  detail::Backend b;
  b.best_path = [&](AsId src, AsId dst) { return synth::oracle_best_path(g, src, dst); };
  b.enumerate = [&](AsId src, AsId dst, std::size_t mp, std::size_t ml) {
    return synth::oracle_enumerate_paths(g, src, dst, mp, ml);
  };
  b.hijack = [&](AsId origin, AsId attacker) {
    return synth::oracle_hijack(g, origin, attacker);
  };
  b.resilience = [&](AsId client, AsId guard) {
    auto rc = synth::oracle_resilience(g, client, guard);
    return std::make_pair(rc.safe, rc.candidates);
  };
  b.client_isps = [](const AsGraph& graph) {
    std::vector<AsId> out;
    for (AsId as : graph.ases())
      if (graph.customers_of(as).empty()) out.push_back(as);
    return out;
  };
  b.location_set = [&](AsId pred, std::uint32_t pos, std::size_t max_peer) {
    std::vector<AsId> isps;
    for (AsId as : g.ases())
      if (g.customers_of(as).empty()) isps.push_back(as);
    std::vector<AsId> out;
    for (AsId s : isps) {
      if (pos == 2) {
        if (s == pred) out.push_back(s);
        continue;
      }
      if (s == pred) continue;
      bool hit = false;
      for (const auto& p : synth::oracle_enumerate_paths(g, s, pred, max_peer, pos - 1))
        if (p.size() == pos - 1) {
          hit = true;
          break;
        }
      if (hit) out.push_back(s);
    }
    return out;
  };
  b.phi = [&](AsId src, AsId helper,
              AsId dst) -> std::optional<std::pair<AsId, AsPath>> {
    auto half = synth::oracle_best_path(g, src, helper);
    if (!half) return std::nullopt;
    for (std::size_t i = half->size() - 1; i >= 1; --i) {
      const AsId midway = (*half)[i];
      auto tail = synth::oracle_best_path(g, midway, dst);
      if (!tail) continue;
      std::vector<topology::LinkRole> roles;
      roles.push_back(*g.role_between((*half)[i - 1], midway));
      for (std::size_t k = 0; k + 1 < tail->size(); ++k)
        roles.push_back(*g.role_between((*tail)[k], (*tail)[k + 1]));
      if (!synth::oracle_detail::roles_ok(roles, 1)) continue;
      AsPath full(half->begin(), half->begin() + static_cast<std::ptrdiff_t>(i));
      full.insert(full.end(), tail->begin(), tail->end());
      std::set<AsId> uniq(full.begin(), full.end());
      if (uniq.size() != full.size()) continue;
      return std::make_pair(midway, full);
    }
    return std::nullopt;
  };
  return detail::build(g, b);
}

// Every value derived from the production code paths.
inline json t6_fastpath(const AsGraph& g) {
  detail::Backend b;
  b.best_path = [&](AsId src, AsId dst) { return topology::best_path(g, src, dst); };
  b.enumerate = [&](AsId src, AsId dst, std::size_t mp, std::size_t ml) {
    return topology::routable_paths(g, src, dst, mp, ml);
  };
  b.hijack = [&](AsId origin, AsId attacker) {
    auto outcome = topology::simulate_hijack(g, origin, attacker);
    std::map<AsId, bool> verdicts;
    for (AsId as : g.ases()) verdicts[as] = outcome.hijacked(as);
    return verdicts;
  };
  b.resilience = [&](AsId client, AsId guard) {
    auto rc = topology::resilience_counts(g, client, guard);
    return std::make_pair(rc.safe, rc.candidates);
  };
  b.client_isps = [](const AsGraph& graph) { return topology::client_isp_ases(graph); };
  b.location_set = [&](AsId pred, std::uint32_t pos, std::size_t max_peer) {
    return netlayer::dovetail_location_set(g, {pred, pos, 0}, max_peer);
  };
  b.phi = [&](AsId src, AsId helper,
              AsId dst) -> std::optional<std::pair<AsId, AsPath>> {
    auto p = netlayer::phi_build(g, src, helper, dst);
    if (!p) return std::nullopt;
    return std::make_pair(p->midway, p->full_path);
  };
  return detail::build(g, b);
}

}  // namespace anonsim::t6
