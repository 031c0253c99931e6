#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "anonsim/csv.hpp"
#include "anonsim/routing.hpp"
#include "anonsim/topology.hpp"

// Relay tables and the guard-selection algorithms under study: plain
// bandwidth weighting, suspect-avoiding g-select, resilience-blended
// selection, and medoid clustering of client locations. All operations are
// pure functions of immutable inputs.
namespace anonsim::anonnet {

using topology::AsGraph;

struct Relay {
  std::string id;
  AsId host_as = 0;
  double bandwidth = 0.0;
  bool is_guard = false;
};

struct RelaySet {
  std::vector<Relay> relays;

  std::vector<const Relay*> guards() const {
    std::vector<const Relay*> out;
    for (const auto& r : relays)
      if (r.is_guard) out.push_back(&r);
    std::sort(out.begin(), out.end(),
              [](const Relay* a, const Relay* b) { return a->id < b->id; });
    return out;
  }
};

// CSV header `id,as,bandwidth,is_guard`.
inline RelaySet parse_relays(std::string_view text) {
  RelaySet rs;
  const auto lines = csv::split_lines(text);
  if (lines.empty()) return rs;
  if (csv::trim(lines[0]) != "id,as,bandwidth,is_guard")
    throw ParseError(1, "expected header `id,as,bandwidth,is_guard`");
  std::set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    std::string_view line = csv::trim(lines[i]);
    if (line.empty()) continue;
    const auto f = csv::split_fields(line, ',');
    if (f.size() != 4) throw ParseError(lineno, "expected 4 fields");
    Relay r;
    r.id = std::string(csv::trim(f[0]));
    if (r.id.empty()) throw ParseError(lineno, "empty relay id");
    if (!seen.insert(r.id).second)
      throw ParseError(lineno, "duplicate relay id `" + r.id + "`");
    if (!csv::parse_int(f[1], r.host_as) || r.host_as < 1)
      throw ParseError(lineno, "bad AS number `" + std::string(f[1]) + "`");
    if (!csv::parse_double(f[2], r.bandwidth) || r.bandwidth < 0.0)
      throw ParseError(lineno, "bad bandwidth `" + std::string(f[2]) + "`");
    std::string_view guard = csv::trim(f[3]);
    if (guard == "1")
      r.is_guard = true;
    else if (guard == "0")
      r.is_guard = false;
    else
      throw ParseError(lineno, "is_guard must be 0 or 1");
    rs.relays.push_back(std::move(r));
  }
  return rs;
}

struct GuardEntry {
  std::string id;
  AsId host_as = 0;
  double probability = 0.0;
};

// Probability distribution over guard relays, entries sorted by relay id,
// zero-probability relays dropped. Sums to 1 within 1e-9.
class GuardDistribution {
 public:
  GuardDistribution() = default;

  // weights need not be normalized; negative weights are a logic error
  static GuardDistribution from_weights(std::vector<GuardEntry> weighted) {
    double total = 0.0;
    for (const auto& e : weighted) {
      if (e.probability < 0.0) throw ValidationError("negative guard weight");
      total += e.probability;
    }
    if (!(total > 0.0)) throw SelectionError("no guard carries positive weight");
    GuardDistribution d;
    for (auto& e : weighted) {
      if (e.probability == 0.0) continue;
      e.probability /= total;
      d.entries_.push_back(std::move(e));
    }
    std::sort(d.entries_.begin(), d.entries_.end(),
              [](const GuardEntry& a, const GuardEntry& b) { return a.id < b.id; });
    return d;
  }

  const std::vector<GuardEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  double probability_of(const std::string& id) const {
    for (const auto& e : entries_)
      if (e.id == id) return e.probability;
    return 0.0;
  }

  double sum() const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.probability;
    return s;
  }

  std::string to_csv() const {
    std::string out = "entity,probability\n";
    for (const auto& e : entries_)
      out += e.id + "," + csv::format_double(e.probability) + "\n";
    return out;
  }

 private:
  std::vector<GuardEntry> entries_;
};

// Guards chosen with probability proportional to bandwidth.
inline GuardDistribution vanilla_guard_dist(const RelaySet& relays) {
  std::vector<GuardEntry> w;
  for (const Relay* r : relays.guards())
    w.push_back({r->id, r->host_as, r->bandwidth});
  if (w.empty()) throw SelectionError("relay set has no guards");
  return GuardDistribution::from_weights(std::move(w));
}

// Bandwidth-weighted choice among guards whose client-guard path avoids all
// suspect ASes. Endpoint ASes count as on-path.
inline GuardDistribution gselect_guard_dist(const AsGraph& g, const RelaySet& relays,
                                            AsId client,
                                            const std::set<AsId>& suspects) {
  if (suspects.empty()) throw ValidationError("suspect set must be non-empty");
  g.index_of(client);
  std::map<AsId, std::optional<AsPath>> path_cache;
  std::vector<GuardEntry> w;
  for (const Relay* r : relays.guards()) {
    if (r->bandwidth <= 0.0) continue;
    auto [it, fresh] = path_cache.try_emplace(r->host_as);
    if (fresh) it->second = topology::best_path(g, client, r->host_as);
    if (!it->second) continue;  // unreachable guards are not selectable
    bool suspect_free = true;
    for (AsId as : *it->second)
      if (suspects.count(as)) {
        suspect_free = false;
        break;
      }
    if (suspect_free) w.push_back({r->id, r->host_as, r->bandwidth});
  }
  if (w.empty())
    throw SelectionError("no suspect-free guard reachable from AS " +
                         std::to_string(client));
  return GuardDistribution::from_weights(std::move(w));
}

struct CounterRaptorConfig {
  double alpha = 0.5;  // recommended default blend weight
};

// Guard weight alpha * resilience + (1 - alpha) * bandwidth fraction,
// renormalized. Resilience of a guard co-located with the client is taken
// as 1.0 (no third party sits between them to divert).
inline GuardDistribution counter_raptor_guard_dist(const AsGraph& g,
                                                   const RelaySet& relays,
                                                   AsId client,
                                                   const CounterRaptorConfig& cfg) {
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
    throw ValidationError("alpha must lie in [0,1]");
  g.index_of(client);
  auto guards = relays.guards();
  double bw_total = 0.0;
  for (const Relay* r : guards) bw_total += r->bandwidth;
  if (!(bw_total > 0.0)) throw SelectionError("relay set has no guard bandwidth");

  std::map<AsId, double> res_cache;
  std::vector<GuardEntry> w;
  for (const Relay* r : guards) {
    auto [it, fresh] = res_cache.try_emplace(r->host_as, 0.0);
    if (fresh)
      it->second = (r->host_as == client)
                       ? 1.0
                       : topology::resilience(g, client, r->host_as);
    const double weight =
        cfg.alpha * it->second + (1.0 - cfg.alpha) * (r->bandwidth / bw_total);
    w.push_back({r->id, r->host_as, weight});
  }
  return GuardDistribution::from_weights(std::move(w));
}

struct Clustering {
  std::map<AsId, AsId> assignment;  // client AS -> medoid AS
  std::vector<AsId> medoids;

  std::vector<AsId> members_of_cluster_containing(AsId client) const {
    auto it = assignment.find(client);
    if (it == assignment.end())
      throw ValidationError("client AS " + std::to_string(client) +
                            " is not assigned in this clustering");
    std::vector<AsId> out;
    for (const auto& [as, medoid] : assignment)
      if (medoid == it->second) out.push_back(as);
    return out;
  }
};

// Deterministic proxy for trust-aware location clustering: each client's
// feature vector is one bit per (top-k guard, adversary AS) pair marking
// adversary presence on the client-guard path, and clients join the medoid
// at minimal Hamming distance (ties to the lowest medoid AS number).
inline Clustering taps_cluster(const AsGraph& g, const std::set<AsId>& client_ases,
                               const std::vector<AsId>& medoids,
                               const std::vector<AsId>& adversary_ases,
                               const RelaySet& guards, std::size_t top_k_guards) {
  if (medoids.empty()) throw ValidationError("medoid list must be non-empty");
  if (top_k_guards < 1) throw ValidationError("top_k_guards must be >= 1");
  for (AsId m : medoids)
    if (!client_ases.count(m))
      throw ValidationError("medoid AS " + std::to_string(m) +
                            " is outside the client universe");

  auto sorted_guards = guards.guards();
  std::stable_sort(sorted_guards.begin(), sorted_guards.end(),
                   [](const Relay* a, const Relay* b) {
                     if (a->bandwidth != b->bandwidth) return a->bandwidth > b->bandwidth;
                     return a->id < b->id;
                   });
  if (sorted_guards.size() > top_k_guards) sorted_guards.resize(top_k_guards);
  if (sorted_guards.empty()) throw SelectionError("relay set has no guards");

  // one routing state per guard AS answers paths for every client at once
  std::map<AsId, topology::RoutingState> states;
  for (const Relay* r : sorted_guards)
    states.try_emplace(r->host_as, g, r->host_as);

  auto feature = [&](AsId client) {
    std::vector<bool> bits;
    bits.reserve(sorted_guards.size() * adversary_ases.size());
    for (const Relay* r : sorted_guards) {
      auto path = states.at(r->host_as).path_from(client);
      for (AsId adv : adversary_ases) {
        bool present = false;
        if (path)
          present = std::find(path->begin(), path->end(), adv) != path->end();
        bits.push_back(present);
      }
    }
    return bits;
  };

  std::map<AsId, std::vector<bool>> medoid_features;
  for (AsId m : medoids) medoid_features.emplace(m, feature(m));

  Clustering out;
  out.medoids = medoids;
  std::sort(out.medoids.begin(), out.medoids.end());
  for (AsId client : client_ases) {
    const auto bits = feature(client);
    AsId best_medoid = 0;
    std::size_t best_dist = ~std::size_t{0};
    for (AsId m : out.medoids) {
      const auto& mb = medoid_features.at(m);
      std::size_t dist = 0;
      for (std::size_t i = 0; i < bits.size(); ++i) dist += bits[i] != mb[i];
      if (dist < best_dist) {  // medoids scanned in ascending id: ties keep the lowest
        best_dist = dist;
        best_medoid = m;
      }
    }
    out.assignment[client] = best_medoid;
  }
  return out;
}

}  // namespace anonsim::anonnet
