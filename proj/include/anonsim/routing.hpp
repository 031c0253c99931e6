#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "anonsim/topology.hpp"

namespace anonsim::topology {

enum class RouteClass : std::uint8_t {
  Origin = 0,
  Customer = 1,
  Peer = 2,
  Provider = 3,
};

namespace detail {

struct RouteEntry {
  bool reached = false;
  RouteClass cls = RouteClass::Origin;
  std::uint32_t len = 0;       // ASes on the path, endpoints included
  std::uint32_t next = 0;      // dense index of the next hop
  std::uint8_t originator = 0; // which seed the route terminates at
};

// Gao-Rexford decision process, one destination (or several equally-specific
// origins), computed in three waves:
//   1. customer routes climb the provider DAG breadth-first,
//   2. peer routes cross a single peer edge onto customer routes,
//   3. provider routes descend in topological order, each AS re-exporting
//      its selected route to its customers.
// Selection at each AS: customer > peer > provider, then fewest ASes, then
// lowest next-hop AS number. Because the provider relation is acyclic, no
// selected route can pass through an AS that is still unrouted, so AS-path
// loop checks never bind here (the sweep oracle still performs them).
inline std::vector<RouteEntry> propagate(const AsGraph& g,
                                         const std::vector<std::size_t>& seeds) {
  const std::size_t n = g.size();
  std::vector<RouteEntry> route(n);
  std::vector<std::uint32_t> level;
  for (std::size_t s_i = 0; s_i < seeds.size(); ++s_i) {
    auto& e = route[seeds[s_i]];
    e.reached = true;
    e.cls = RouteClass::Origin;
    e.len = 1;
    e.originator = static_cast<std::uint8_t>(s_i);
    level.push_back(static_cast<std::uint32_t>(seeds[s_i]));
  }

  // Wave 1: an AS adopts the shortest customer route on the level it is
  // first offered one; simultaneous offers break ties by lowest customer id.
  while (!level.empty()) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> offers;  // (to, from)
    for (std::uint32_t x : level)
      for (std::uint32_t p : g.providers_idx(x))
        if (!route[p].reached) offers.emplace_back(p, x);
    std::sort(offers.begin(), offers.end(), [&](const auto& l, const auto& r) {
      if (l.first != r.first) return l.first < r.first;
      return g.as_at(l.second) < g.as_at(r.second);
    });
    std::vector<std::uint32_t> next_level;
    for (const auto& [to, from] : offers) {
      if (route[to].reached) continue;
      route[to] = {true, RouteClass::Customer, route[from].len + 1, from,
                   route[from].originator};
      next_level.push_back(to);
    }
    level = std::move(next_level);
  }

  // Wave 2: peers export only customer-learned (or originated) routes, and
  // peer routes are never re-exported to peers or providers, so one pass
  // suffices. Applied simultaneously against the wave-1 state.
  std::vector<RouteEntry> peer_route(n);
  for (std::uint32_t x = 0; x < n; ++x) {
    if (route[x].reached) continue;
    RouteEntry best;
    AsId best_nh = 0;
    for (std::uint32_t p : g.peers_idx(x)) {
      const auto& r = route[p];
      if (!r.reached) continue;
      if (r.cls != RouteClass::Origin && r.cls != RouteClass::Customer) continue;
      const AsId nh = g.as_at(p);
      if (!best.reached || r.len + 1 < best.len ||
          (r.len + 1 == best.len && nh < best_nh)) {
        best = {true, RouteClass::Peer, r.len + 1, p, r.originator};
        best_nh = nh;
      }
    }
    peer_route[x] = best;
  }
  for (std::uint32_t x = 0; x < n; ++x)
    if (peer_route[x].reached) route[x] = peer_route[x];

  // Wave 3: providers export whatever they selected; descending in
  // topological order fixes every provider before its customers look up.
  for (std::uint32_t x : g.topo_order()) {
    if (route[x].reached) continue;
    RouteEntry best;
    AsId best_nh = 0;
    for (std::uint32_t p : g.providers_idx(x)) {
      const auto& r = route[p];
      if (!r.reached) continue;
      const AsId nh = g.as_at(p);
      if (!best.reached || r.len + 1 < best.len ||
          (r.len + 1 == best.len && nh < best_nh)) {
        best = {true, RouteClass::Provider, r.len + 1, p, r.originator};
        best_nh = nh;
      }
    }
    if (best.reached) route[x] = best;
  }
  return route;
}

}  // namespace detail

// Per-AS selected best path toward one destination. Immutable; reads are
// thread-safe, and states for different destinations are independent.
class RoutingState {
 public:
  RoutingState(const AsGraph& g, AsId destination)
      : graph_(&g),
        destination_(destination),
        routes_(detail::propagate(g, {g.index_of(destination)})) {}

  AsId destination() const { return destination_; }

  bool reachable(AsId src) const { return routes_[graph_->index_of(src)].reached; }

  std::optional<AsPath> path_from(AsId src) const {
    std::size_t i = graph_->index_of(src);
    if (!routes_[i].reached) return std::nullopt;
    AsPath path;
    path.reserve(routes_[i].len);
    while (true) {
      path.push_back(graph_->as_at(i));
      if (routes_[i].cls == RouteClass::Origin) break;
      i = routes_[i].next;
    }
    return path;
  }

  std::optional<RouteClass> route_class(AsId src) const {
    const auto& e = routes_[graph_->index_of(src)];
    if (!e.reached) return std::nullopt;
    return e.cls;
  }

  std::optional<std::uint32_t> path_length(AsId src) const {
    const auto& e = routes_[graph_->index_of(src)];
    if (!e.reached) return std::nullopt;
    return e.len;
  }

 private:
  const AsGraph* graph_;
  AsId destination_;
  std::vector<detail::RouteEntry> routes_;
};

inline RoutingState routing_state(const AsGraph& g, AsId destination) {
  return RoutingState(g, destination);
}

inline std::optional<AsPath> best_path(const AsGraph& g, AsId src, AsId dst) {
  return RoutingState(g, dst).path_from(src);
}

// Second-to-last AS of best_path(src, dst); for a two-AS path that is the
// source itself. Absent when unreachable.
inline std::optional<AsId> penultimate_hop(const AsGraph& g, AsId src, AsId dst) {
  auto p = best_path(g, src, dst);
  if (!p || p->size() < 2) return std::nullopt;
  return (*p)[p->size() - 2];
}

// Outcome of an equally-specific origin hijack: two origins announce, every
// AS runs the normal decision process, and an AS counts as hijacked when its
// selected route terminates at the attacker. Origins never defect.
class HijackOutcome {
 public:
  HijackOutcome(const AsGraph& g, AsId origin, AsId attacker)
      : graph_(&g), routes_(make_routes(g, origin, attacker)) {}

  bool hijacked(AsId as) const {
    const auto& e = routes_[graph_->index_of(as)];
    return e.reached && e.originator == 1;
  }

  std::optional<AsPath> path_from(AsId src) const {
    std::size_t i = graph_->index_of(src);
    if (!routes_[i].reached) return std::nullopt;
    AsPath path;
    while (true) {
      path.push_back(graph_->as_at(i));
      if (routes_[i].cls == RouteClass::Origin) break;
      i = routes_[i].next;
    }
    return path;
  }

 private:
  static std::vector<detail::RouteEntry> make_routes(const AsGraph& g, AsId origin,
                                                     AsId attacker) {
    if (origin == attacker) throw ValidationError("attacker must differ from origin");
    return detail::propagate(g, {g.index_of(origin), g.index_of(attacker)});
  }

  const AsGraph* graph_;
  std::vector<detail::RouteEntry> routes_;
};

inline HijackOutcome simulate_hijack(const AsGraph& g, AsId origin, AsId attacker) {
  return HijackOutcome(g, origin, attacker);
}

struct ResilienceCounts {
  std::uint64_t safe = 0;        // attackers whose hijack misses the client
  std::uint64_t candidates = 0;  // all ASes except client and guard AS
  double value() const {
    return candidates == 0 ? 1.0
                           : static_cast<double>(safe) / static_cast<double>(candidates);
  }
};

// Fraction of candidate attackers that fail to divert the client's traffic
// to the guard's AS with an equally-specific origin announcement.
inline ResilienceCounts resilience_counts(const AsGraph& g, AsId client,
                                          AsId guard_as) {
  if (client == guard_as)
    throw ValidationError("resilience requires client != guard AS");
  g.index_of(client);
  g.index_of(guard_as);
  ResilienceCounts rc;
  for (AsId attacker : g.ases()) {
    if (attacker == client || attacker == guard_as) continue;
    ++rc.candidates;
    if (!simulate_hijack(g, guard_as, attacker).hijacked(client)) ++rc.safe;
  }
  return rc;
}

inline double resilience(const AsGraph& g, AsId client, AsId guard_as) {
  return resilience_counts(g, client, guard_as).value();
}

// All simple valley-free paths from src to dst with at most max_peer_links
// peer edges and at most max_len ASes, in lexicographic order.
inline std::vector<AsPath> routable_paths(const AsGraph& g, AsId src, AsId dst,
                                          std::size_t max_peer_links,
                                          std::size_t max_len) {
  if (src == dst) throw ValidationError("routable_paths requires src != dst");
  const std::size_t si = g.index_of(src);
  const std::size_t di = g.index_of(dst);
  std::vector<AsPath> out;
  if (max_len < 2) return out;

  std::vector<std::uint32_t> stack{static_cast<std::uint32_t>(si)};
  std::vector<bool> visited(g.size(), false);
  visited[si] = true;

  // phase 0 climbing, 1 crossing, 2 descending (same automaton as
  // validate_path); extending an invalid prefix can never become valid.
  auto dfs = [&](auto&& self, std::size_t cur, int phase, std::size_t peers_used) -> void {
    if (cur == di) {
      AsPath p;
      p.reserve(stack.size());
      for (auto i : stack) p.push_back(g.as_at(i));
      out.push_back(std::move(p));
      return;
    }
    if (stack.size() == max_len) return;
    struct Step {
      AsId id;
      std::uint32_t idx;
      int phase;
      std::size_t peers;
    };
    std::vector<Step> steps;
    if (phase == 0)
      for (std::uint32_t p : g.providers_idx(cur))
        steps.push_back({g.as_at(p), p, 0, peers_used});
    if (phase <= 1 && peers_used < max_peer_links)
      for (std::uint32_t p : g.peers_idx(cur))
        steps.push_back({g.as_at(p), p, 1, peers_used + 1});
    for (std::uint32_t c : g.customers_idx(cur))
      steps.push_back({g.as_at(c), c, 2, peers_used});
    std::sort(steps.begin(), steps.end(),
              [](const Step& l, const Step& r) { return l.id < r.id; });
    for (const auto& s : steps) {
      if (visited[s.idx]) continue;
      visited[s.idx] = true;
      stack.push_back(s.idx);
      self(self, s.idx, s.phase, s.peers);
      stack.pop_back();
      visited[s.idx] = false;
    }
  };
  dfs(dfs, si, 0, 0);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace anonsim::topology
