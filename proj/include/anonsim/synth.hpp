#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "anonsim/anonnet.hpp"
#include "anonsim/rng.hpp"
#include "anonsim/routing.hpp"
#include "anonsim/topology.hpp"

// Seeded synthetic generators and the brute-force oracles the test and
// acceptance suites check the fast paths against. The oracles share nothing
// with the propagation code in routing.hpp beyond the graph type: routes are
// recomputed by per-AS sweeps over full candidate paths until a fixed point,
// with explicit AS-path loop detection.
namespace anonsim::synth {

using topology::AsGraph;
using topology::LinkRole;
using topology::RelKind;
using topology::Relationship;
using topology::RouteClass;

struct TopologyGenParams {
  std::size_t n_ases = 10;
  std::size_t n_tiers = 3;
  double peer_prob = 0.3;       // per-AS chance of one extra same-tier peer link
  double multihome_prob = 0.3;  // per-AS chance of a second provider
  std::uint64_t seed = 0;
};

// Tiered provider hierarchy: AS ids 1..n assigned top tier first, every
// non-top AS buys transit from the tier above, and the top tier is a full
// peer mesh so that policy-compliant routes exist between all ASes.
inline AsGraph gen_topology(const TopologyGenParams& params) {
  if (params.n_ases < 1) throw ValidationError("n_ases must be >= 1");
  if (params.n_tiers < 1) throw ValidationError("n_tiers must be >= 1");
  const std::size_t n = params.n_ases;
  const std::size_t tiers = std::min(params.n_tiers, n);

  // Tier sizes grow roughly 3x per level down, each tier nonempty,
  // remainder to the bottom tier.
  std::vector<std::size_t> tier_size(tiers, 1);
  {
    std::vector<double> w(tiers);
    double total = 0.0, weight = 1.0;
    for (std::size_t t = 0; t < tiers; ++t, weight *= 3.0) {
      w[t] = weight;
      total += weight;
    }
    const std::size_t spare = n - tiers;
    std::size_t assigned = 0;
    for (std::size_t t = 0; t < tiers; ++t) {
      const auto extra = static_cast<std::size_t>(w[t] / total * static_cast<double>(spare));
      tier_size[t] += extra;
      assigned += extra;
    }
    tier_size[tiers - 1] += spare - assigned;
  }

  std::vector<std::vector<AsId>> tier_members(tiers);
  {
    AsId next = 1;
    for (std::size_t t = 0; t < tiers; ++t)
      for (std::size_t k = 0; k < tier_size[t]; ++k) tier_members[t].push_back(next++);
  }

  Rng rng(params.seed);
  std::vector<Relationship> edges;
  std::set<std::pair<AsId, AsId>> linked;  // unordered pairs, min first
  auto mark = [&](AsId a, AsId b) {
    linked.emplace(std::min(a, b), std::max(a, b));
  };
  auto has_link = [&](AsId a, AsId b) {
    return linked.count({std::min(a, b), std::max(a, b)}) != 0;
  };

  for (AsId a : tier_members[0])
    for (AsId b : tier_members[0])
      if (a < b) {
        edges.push_back({a, b, RelKind::PeerPeer});
        mark(a, b);
      }

  for (std::size_t t = 1; t < tiers; ++t) {
    const auto& above = tier_members[t - 1];
    for (AsId as : tier_members[t]) {
      AsId p1 = above[rng.uniform_index(above.size())];
      edges.push_back({p1, as, RelKind::ProviderCustomer});
      mark(p1, as);
      if (above.size() >= 2 && rng.bernoulli(params.multihome_prob)) {
        AsId p2 = p1;
        while (p2 == p1) p2 = above[rng.uniform_index(above.size())];
        edges.push_back({p2, as, RelKind::ProviderCustomer});
        mark(p2, as);
      }
    }
  }

  for (std::size_t t = 1; t < tiers; ++t) {
    const auto& members = tier_members[t];
    if (members.size() < 2) continue;
    for (AsId as : members) {
      if (!rng.bernoulli(params.peer_prob)) continue;
      // a few attempts; dense tiers may simply have no free partner left
      for (int attempt = 0; attempt < 4; ++attempt) {
        AsId other = members[rng.uniform_index(members.size())];
        if (other == as || has_link(as, other)) continue;
        edges.push_back({as, other, RelKind::PeerPeer});
        mark(as, other);
        break;
      }
    }
  }

  std::vector<AsId> all;
  for (const auto& tm : tier_members) all.insert(all.end(), tm.begin(), tm.end());
  return AsGraph::from_edges(edges, all);
}

struct RelayGenParams {
  std::size_t n_relays = 10;
  double guard_fraction = 0.5;
  double bandwidth_min = 50.0;
  double bandwidth_max = 500.0;
  std::uint64_t seed = 0;
};

// Relays placed on uniformly drawn ASes with uniform bandwidths; at least
// one guard is forced so selection operations stay well-defined.
inline anonnet::RelaySet gen_relays(const topology::AsGraph& g,
                                    const RelayGenParams& params) {
  Rng rng(params.seed);
  anonnet::RelaySet set;
  for (std::size_t i = 0; i < params.n_relays; ++i) {
    anonnet::Relay relay;
    char buf[24];
    std::snprintf(buf, sizeof(buf), "r%04zu", i + 1);
    relay.id = buf;
    relay.host_as = g.ases()[rng.uniform_index(g.size())];
    relay.bandwidth = params.bandwidth_min +
                      (params.bandwidth_max - params.bandwidth_min) * rng.uniform01();
    relay.is_guard = rng.bernoulli(params.guard_fraction);
    set.relays.push_back(std::move(relay));
  }
  if (!set.relays.empty()) {
    bool any_guard = false;
    for (const auto& relay : set.relays) any_guard |= relay.is_guard;
    if (!any_guard) set.relays.front().is_guard = true;
  }
  return set;
}

// Rebuilds the graph with `n_add` new peer edges between previously
// unrelated ASes and `n_remove` existing peer edges dropped. Provider edges
// are untouched, so acyclicity is preserved; used to model routing churn.
inline AsGraph mutate_peer_edges(const AsGraph& g, std::size_t n_add,
                                 std::size_t n_remove, Rng& rng) {
  std::vector<Relationship> p2c;
  std::vector<std::pair<AsId, AsId>> peer_edges;
  std::set<std::pair<AsId, AsId>> linked;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const AsId a = g.as_at(i);
    for (auto c : g.customers_idx(i)) {
      p2c.push_back({a, g.as_at(c), RelKind::ProviderCustomer});
      linked.emplace(std::min(a, g.as_at(c)), std::max(a, g.as_at(c)));
    }
    for (auto p : g.peers_idx(i))
      if (a < g.as_at(p)) {
        peer_edges.emplace_back(a, g.as_at(p));
        linked.emplace(a, g.as_at(p));
      }
  }
  std::sort(peer_edges.begin(), peer_edges.end());

  for (std::size_t k = 0; k < n_remove && !peer_edges.empty(); ++k)
    peer_edges.erase(peer_edges.begin() +
                     static_cast<std::ptrdiff_t>(rng.uniform_index(peer_edges.size())));

  const auto& ases = g.ases();
  for (std::size_t k = 0; k < n_add && ases.size() >= 2; ++k) {
    for (int attempt = 0; attempt < 16; ++attempt) {
      AsId a = ases[rng.uniform_index(ases.size())];
      AsId b = ases[rng.uniform_index(ases.size())];
      if (a == b) continue;
      auto key = std::make_pair(std::min(a, b), std::max(a, b));
      if (linked.count(key)) continue;
      linked.insert(key);
      peer_edges.push_back(key);
      break;
    }
  }

  std::vector<Relationship> edges = p2c;
  for (const auto& [a, b] : peer_edges) edges.push_back({a, b, RelKind::PeerPeer});
  return AsGraph::from_edges(edges, ases);
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

inline constexpr std::size_t kOracleMaxAses = 16;

namespace oracle_detail {

inline void check_guard(const AsGraph& g) {
  if (g.size() > kOracleMaxAses)
    throw ValidationError("oracle guarded at " + std::to_string(kOracleMaxAses) +
                          " ASes, got " + std::to_string(g.size()));
}

// Independent valley-free role check (deliberately not validate_path).
inline bool roles_ok(const std::vector<LinkRole>& roles, std::size_t max_peers) {
  std::size_t peers = 0;
  int stage = 0;
  for (LinkRole r : roles) {
    if (r == LinkRole::Up) {
      if (stage > 0) return false;
    } else if (r == LinkRole::Peer) {
      if (stage > 1) return false;
      stage = 1;
      if (++peers > max_peers) return false;
    } else {
      stage = 2;
    }
  }
  return true;
}

}  // namespace oracle_detail

// Exhaustive DFS over all simple valley-free paths src -> dst with at most
// max_peer_links peer edges and max_len ASes. Guarded at small graphs.
inline std::vector<AsPath> oracle_enumerate_paths(const AsGraph& g, AsId src,
                                                  AsId dst,
                                                  std::size_t max_peer_links,
                                                  std::size_t max_len) {
  oracle_detail::check_guard(g);
  if (src == dst) throw ValidationError("oracle_enumerate_paths requires src != dst");
  g.index_of(src);
  g.index_of(dst);

  std::vector<AsPath> found;
  AsPath cur{src};
  std::vector<LinkRole> roles;
  auto walk = [&](auto&& self, AsId at) -> void {
    if (at == dst) {
      found.push_back(cur);
      return;
    }
    if (cur.size() >= max_len) return;
    for (AsId next : g.ases()) {
      if (std::find(cur.begin(), cur.end(), next) != cur.end()) continue;
      auto role = g.role_between(at, next);
      if (!role) continue;
      roles.push_back(*role);
      if (oracle_detail::roles_ok(roles, max_peer_links)) {
        cur.push_back(next);
        self(self, next);
        cur.pop_back();
      }
      roles.pop_back();
    }
  };
  walk(walk, src);
  std::sort(found.begin(), found.end());
  return found;
}

struct OracleRoute {
  AsPath path;      // from this AS to the terminating origin
  RouteClass cls = RouteClass::Origin;
};

// Route selection recomputed as a routing-protocol fixed point: every AS
// repeatedly re-selects the best among what its neighbors currently export
// (customer-learned and originated routes go to everybody, the rest only to
// customers), discarding announcements that contain itself. Converges under
// the acyclic-provider economy; the pass cap is an assertion of that.
inline std::vector<std::optional<OracleRoute>> oracle_routes(
    const AsGraph& g, const std::vector<AsId>& origins) {
  oracle_detail::check_guard(g);
  const std::size_t n = g.size();
  std::vector<std::optional<OracleRoute>> route(n);
  for (AsId o : origins) route[g.index_of(o)] = OracleRoute{{o}, RouteClass::Origin};

  auto rank = [](RouteClass c) { return static_cast<int>(c); };
  auto better = [&](const OracleRoute& a, const OracleRoute& b) {
    if (rank(a.cls) != rank(b.cls)) return rank(a.cls) < rank(b.cls);
    if (a.path.size() != b.path.size()) return a.path.size() < b.path.size();
    return a.path[1] < b.path[1];  // next hop; both paths start at this AS
  };

  const std::size_t max_passes = 4 * n + 8;
  std::size_t pass = 0;
  bool changed = true;
  while (changed) {
    if (++pass > max_passes)
      throw ValidationError("oracle_routes failed to converge");
    changed = false;
    for (std::size_t x = 0; x < n; ++x) {
      const AsId x_id = g.as_at(x);
      if (std::find(origins.begin(), origins.end(), x_id) != origins.end())
        continue;  // origins always keep their own announcement
      std::optional<OracleRoute> best;
      auto consider = [&](std::size_t nb, RouteClass cls_at_x, bool full_export) {
        const auto& r = route[nb];
        if (!r) return;
        if (!full_export && r->cls != RouteClass::Origin && r->cls != RouteClass::Customer)
          return;
        if (std::find(r->path.begin(), r->path.end(), x_id) != r->path.end())
          return;  // loop detection
        OracleRoute cand;
        cand.cls = cls_at_x;
        cand.path.reserve(r->path.size() + 1);
        cand.path.push_back(x_id);
        cand.path.insert(cand.path.end(), r->path.begin(), r->path.end());
        if (!best || better(cand, *best)) best = std::move(cand);
      };
      for (auto c : g.customers_idx(x)) consider(c, RouteClass::Customer, false);
      for (auto p : g.peers_idx(x)) consider(p, RouteClass::Peer, false);
      for (auto p : g.providers_idx(x)) consider(p, RouteClass::Provider, true);

      const auto& old = route[x];
      const bool differs = (!old && best) || (old && !best) ||
                           (old && best && (old->path != best->path || old->cls != best->cls));
      if (differs) {
        route[x] = std::move(best);
        changed = true;
      }
    }
  }
  return route;
}

inline std::optional<AsPath> oracle_best_path(const AsGraph& g, AsId src, AsId dst) {
  auto routes = oracle_routes(g, {dst});
  const auto& r = routes[g.index_of(src)];
  if (!r) return std::nullopt;
  return r->path;
}

// Per-AS hijack verdicts from the fixed-point oracle with both origins seeded.
inline std::map<AsId, bool> oracle_hijack(const AsGraph& g, AsId origin, AsId attacker) {
  if (origin == attacker) throw ValidationError("attacker must differ from origin");
  auto routes = oracle_routes(g, {origin, attacker});
  std::map<AsId, bool> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& r = routes[i];
    out[g.as_at(i)] = r && r->path.back() == attacker;
  }
  return out;
}

inline topology::ResilienceCounts oracle_resilience(const AsGraph& g, AsId client,
                                                    AsId guard_as) {
  if (client == guard_as)
    throw ValidationError("resilience requires client != guard AS");
  topology::ResilienceCounts rc;
  for (AsId attacker : g.ases()) {
    if (attacker == client || attacker == guard_as) continue;
    ++rc.candidates;
    if (!oracle_hijack(g, guard_as, attacker).at(client)) ++rc.safe;
  }
  return rc;
}

// Reference posterior: single product over all observations in extended
// precision, normalized once at the end (the fast path renormalizes per
// step). `likelihoods[k][i]` is Pr(obs k | candidate i).
inline std::vector<double> oracle_posterior(
    const std::vector<double>& prior,
    const std::vector<std::vector<double>>& likelihoods) {
  std::vector<long double> mass(prior.begin(), prior.end());
  for (const auto& row : likelihoods) {
    if (row.size() != prior.size())
      throw ValidationError("likelihood row size mismatch");
    for (std::size_t i = 0; i < mass.size(); ++i)
      mass[i] *= static_cast<long double>(row[i]);
  }
  long double total = 0.0L;
  for (auto m : mass) total += m;
  if (!(total > 0.0L))
    throw InconsistencyError("observations exclude every candidate");
  std::vector<double> out(mass.size());
  for (std::size_t i = 0; i < mass.size(); ++i)
    out[i] = static_cast<double>(mass[i] / total);
  return out;
}

}  // namespace anonsim::synth
