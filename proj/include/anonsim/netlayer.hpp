#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "anonsim/rng.hpp"
#include "anonsim/routing.hpp"
#include "anonsim/topology.hpp"

// Routing/observation semantics of the network-layer anonymity protocols.
// Only who-sees-what is modeled; packet formats and key handling are not.
namespace anonsim::netlayer {

using topology::AsGraph;
using topology::LinkRole;

// Path positions are 1-based with the source at position 1; a path's length
// counts ASes inclusive of both endpoints.

struct DovetailPath {
  AsPath head;      // source -> matchmaker
  AsId dovetail = 0;  // second-to-last AS of head
  AsId matchmaker = 0;
};

struct DovetailObservation {
  AsId predecessor = 0;  // AS before the observer on the head path
  std::uint32_t position = 0;  // observer's 1-based position, >= 2
  AsId destination = 0;        // matchmaker the head targets
};

struct DovetailParams {
  std::uint32_t min_head_len = 6;  // headline value; desk topologies use less
  std::size_t max_peer_links = 1;
  std::size_t max_len = 8;
};

// Uniform choice among routable head segments of sufficient length; the
// dovetail is the second-to-last AS. Tail selection is irrelevant to the
// attacks modeled here and is omitted.
inline std::optional<DovetailPath> dovetail_build(const AsGraph& g, AsId src,
                                                  AsId matchmaker,
                                                  const DovetailParams& params,
                                                  Rng& rng) {
  if (src == matchmaker) throw ValidationError("source must differ from matchmaker");
  auto cands = topology::routable_paths(g, src, matchmaker, params.max_peer_links,
                                        params.max_len);
  std::erase_if(cands, [&](const AsPath& p) { return p.size() < params.min_head_len; });
  if (cands.empty()) return std::nullopt;
  const auto& head = cands[rng.uniform_index(cands.size())];
  DovetailPath out;
  out.head = head;
  out.dovetail = head[head.size() - 2];
  out.matchmaker = matchmaker;
  return out;
}

// What an on-path AS at `observer` would record for this head segment.
inline std::optional<DovetailObservation> dovetail_observe(const DovetailPath& path,
                                                           AsId observer) {
  auto it = std::find(path.head.begin(), path.head.end(), observer);
  if (it == path.head.end() || it == path.head.begin()) return std::nullopt;
  DovetailObservation obs;
  obs.predecessor = *(it - 1);
  obs.position = static_cast<std::uint32_t>(it - path.head.begin()) + 1;
  obs.destination = path.matchmaker;
  return obs;
}

// The set of client ISP ASes that can reach the observed predecessor with a
// valley-free simple path of exactly (position - 1) ASes. Deliberately uses
// only (predecessor, length): requiring extendability through the observer
// would be a stricter inference and is not applied.
inline std::vector<AsId> dovetail_location_set(const AsGraph& g,
                                               const DovetailObservation& obs,
                                               std::size_t max_peer_links) {
  if (obs.position < 2) throw ValidationError("observation position must be >= 2");
  const auto isps = topology::client_isp_ases(g);
  if (obs.position == 2) {
    std::vector<AsId> out;
    if (std::binary_search(isps.begin(), isps.end(), obs.predecessor))
      out.push_back(obs.predecessor);
    return out;
  }

  const std::size_t want = obs.position - 1;  // ASes on the source->pred path
  std::set<AsId> sources;
  // Walk backward from the predecessor, prepending edges. Phases read
  // forward must be non-decreasing (up=0 < peer=1 < down=2), so each
  // prepended edge's phase must not exceed the phase of the current first
  // edge. Simplicity is tracked explicitly.
  std::vector<bool> on_path(g.size(), false);
  const std::size_t pi = g.index_of(obs.predecessor);
  on_path[pi] = true;
  auto walk = [&](auto&& self, std::size_t cur, std::size_t count, int first_phase,
                  std::size_t peers_used) -> void {
    if (count == want) {
      sources.insert(g.as_at(cur));
      return;
    }
    auto step = [&](std::size_t nb, int phase, std::size_t peers) {
      if (on_path[nb]) return;
      on_path[nb] = true;
      self(self, nb, count + 1, phase, peers);
      on_path[nb] = false;
    };
    // prepending edge nb -> cur with forward role r requires r <= first_phase
    for (auto nb : g.customers_idx(cur))  // nb -> cur is Up (cur provides nb)
      step(nb, 0, peers_used);
    if (first_phase >= 1)
      for (auto nb : g.peers_idx(cur))
        if (peers_used < max_peer_links) step(nb, 1, peers_used + 1);
    if (first_phase >= 2)
      for (auto nb : g.providers_idx(cur))  // nb -> cur is Down
        step(nb, 2, peers_used);
  };
  walk(walk, pi, 1, 2, 0);

  std::vector<AsId> out;
  for (AsId s : sources)
    if (std::binary_search(isps.begin(), isps.end(), s)) out.push_back(s);
  return out;
}

struct PhiPath {
  AsPath half_path;  // source -> helper
  AsId midway = 0;
  std::size_t midway_index = 0;  // index of midway within full_path
  AsPath full_path;  // source -> destination
  AsId helper = 0;
};

enum class PhiPosition : std::uint8_t { BeforeMidway, Midway, AfterMidway };

struct PhiObservation {
  AsId predecessor = 0;
  PhiPosition relative_position = PhiPosition::Midway;
  AsId destination = 0;

  bool operator==(const PhiObservation&) const = default;
  bool operator<(const PhiObservation& o) const {
    if (predecessor != o.predecessor) return predecessor < o.predecessor;
    if (relative_position != o.relative_position)
      return relative_position < o.relative_position;
    return destination < o.destination;
  }
};

// Half-path to the helper, then a back-off from the helper toward the
// source: the midway is the first AS (walking backward) that can splice the
// traffic it imports from its half-path predecessor onto its own best route
// to the destination without creating a valley. The full path drops the
// spare tail beyond the midway. The routing-state overload lets callers
// that sweep many (source, helper) pairs reuse the per-destination tables.
inline std::optional<PhiPath> phi_build(const AsGraph& g, AsId src, AsId helper,
                                        AsId dst,
                                        const topology::RoutingState& to_helper,
                                        const topology::RoutingState& to_dst) {
  if (src == helper || src == dst || helper == dst)
    throw ValidationError("source, helper and destination must be distinct");
  auto half = to_helper.path_from(src);
  if (!half) return std::nullopt;

  for (std::size_t i = half->size() - 1; i >= 1; --i) {
    const AsId midway = (*half)[i];
    const AsId pred = (*half)[i - 1];
    auto tail = to_dst.path_from(midway);
    if (!tail) continue;
    auto import_role = g.role_between(pred, midway);
    // splice legality: the import edge role followed by the tail's roles
    // must still read uphill* peer? downhill*
    int phase = 0;
    std::size_t peers = 0;
    switch (*import_role) {
      case LinkRole::Up: phase = 0; break;
      case LinkRole::Peer: phase = 1; peers = 1; break;
      case LinkRole::Down: phase = 2; break;
    }
    bool ok = true;
    for (std::size_t k = 0; k + 1 < tail->size() && ok; ++k) {
      switch (*g.role_between((*tail)[k], (*tail)[k + 1])) {
        case LinkRole::Up:
          ok = phase == 0;
          break;
        case LinkRole::Peer:
          ok = phase <= 1 && ++peers <= 1;
          phase = 1;
          break;
        case LinkRole::Down:
          phase = 2;
          break;
      }
    }
    if (!ok) continue;

    AsPath full(half->begin(), half->begin() + static_cast<std::ptrdiff_t>(i));
    full.insert(full.end(), tail->begin(), tail->end());
    std::set<AsId> uniq(full.begin(), full.end());
    if (uniq.size() != full.size()) continue;  // splice must stay a simple path

    PhiPath out;
    out.half_path = *half;
    out.midway = midway;
    out.midway_index = i;
    out.full_path = std::move(full);
    out.helper = helper;
    return out;
  }
  return std::nullopt;
}

inline std::optional<PhiPath> phi_build(const AsGraph& g, AsId src, AsId helper,
                                        AsId dst) {
  topology::RoutingState to_helper(g, helper);
  topology::RoutingState to_dst(g, dst);
  return phi_build(g, src, helper, dst, to_helper, to_dst);
}

// Observers strictly before the midway never learn the destination and are
// useless to the linking adversary, so no observation is emitted for them.
inline std::optional<PhiObservation> phi_observe(const PhiPath& path, AsId adversary) {
  auto it = std::find(path.full_path.begin(), path.full_path.end(), adversary);
  if (it == path.full_path.end()) return std::nullopt;
  const auto idx = static_cast<std::size_t>(it - path.full_path.begin());
  if (idx < path.midway_index) return std::nullopt;
  PhiObservation obs;
  obs.predecessor = path.full_path[idx - 1];
  obs.relative_position =
      idx == path.midway_index ? PhiPosition::Midway : PhiPosition::AfterMidway;
  obs.destination = path.full_path.back();
  return obs;
}

struct HornetObservation {
  AsId destination = 0;
  AsId penultimate = 0;
  std::int64_t timestamp = 0;  // day index
};

// All ASes whose current route to dst passes through `penultimate` as the
// hop before the destination.
inline std::vector<AsId> hornet_source_set(const AsGraph& g, AsId dst,
                                           AsId penultimate) {
  topology::RoutingState rs(g, dst);
  std::vector<AsId> out;
  for (AsId src : g.ases()) {
    if (src == dst) continue;
    auto p = rs.path_from(src);
    if (p && p->size() >= 2 && (*p)[p->size() - 2] == penultimate)
      out.push_back(src);
  }
  return out;
}

}  // namespace anonsim::netlayer
