#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "anonsim/anonnet.hpp"
#include "anonsim/mobility.hpp"
#include "anonsim/netlayer.hpp"
#include "anonsim/rng.hpp"
#include "anonsim/routing.hpp"

// The attack engines. Each is a deterministic function of topology,
// protocol model, scenario parameters, and seed. Connection linking is an
// oracle granted to the adversary: simulations know the ground-truth client
// and use it only to group observations, never as evidence.
namespace anonsim::attacks {

using anonnet::GuardDistribution;
using anonnet::RelaySet;
using topology::AsGraph;

// Possibility set over candidate client ASes. Shrinks only via
// intersection; `inconsistent` records that some update emptied it, which
// for an honest observation stream signals a linking error upstream.
struct AnonymitySet {
  std::vector<AsId> members;  // sorted
  bool inconsistent = false;

  static AnonymitySet of(std::vector<AsId> ases) {
    std::sort(ases.begin(), ases.end());
    ases.erase(std::unique(ases.begin(), ases.end()), ases.end());
    return {std::move(ases), false};
  }

  bool contains(AsId as) const {
    return std::binary_search(members.begin(), members.end(), as);
  }
  std::size_t size() const { return members.size(); }
};

inline AnonymitySet intersect(const AnonymitySet& a, std::vector<AsId> update) {
  std::sort(update.begin(), update.end());
  AnonymitySet out;
  out.inconsistent = a.inconsistent;
  std::set_intersection(a.members.begin(), a.members.end(), update.begin(),
                        update.end(), std::back_inserter(out.members));
  if (out.members.empty() && !a.members.empty()) out.inconsistent = true;
  return out;
}

// Probability distribution over candidate client ASes; sums to 1.
struct PosteriorBelief {
  std::vector<std::pair<AsId, double>> probabilities;  // sorted by AS

  static PosteriorBelief uniform(const std::vector<AsId>& candidates) {
    if (candidates.empty()) throw ValidationError("no candidates");
    PosteriorBelief b;
    for (AsId c : candidates)
      b.probabilities.emplace_back(c, 1.0 / static_cast<double>(candidates.size()));
    std::sort(b.probabilities.begin(), b.probabilities.end());
    return b;
  }

  double probability_of(AsId as) const {
    for (const auto& [a, p] : probabilities)
      if (a == as) return p;
    return 0.0;
  }

  // highest-probability AS; ties to the lowest AS number
  AsId map_estimate() const {
    AsId best = probabilities.front().first;
    double best_p = probabilities.front().second;
    for (const auto& [a, p] : probabilities)
      if (p > best_p) {
        best = a;
        best_p = p;
      }
    return best;
  }
};

// posterior(L) ∝ prior(L) * Π likelihood(obs, L), renormalized after each
// observation. Zero total mass means the observations exclude every
// candidate, which honest streams cannot produce.
template <typename Obs>
PosteriorBelief bayes_location_inference(
    const std::vector<AsId>& candidates,
    const std::function<double(const Obs&, AsId)>& likelihood,
    const PosteriorBelief& prior, const std::vector<Obs>& observations) {
  for (const auto& [as, p] : prior.probabilities)
    if (std::find(candidates.begin(), candidates.end(), as) == candidates.end())
      throw ValidationError("prior assigns mass outside the candidate set");
  PosteriorBelief post = prior;
  for (const auto& obs : observations) {
    double total = 0.0;
    for (auto& [as, p] : post.probabilities) {
      p *= likelihood(obs, as);
      total += p;
    }
    if (!(total > 0.0))
      throw InconsistencyError("observations exclude every candidate");
    for (auto& [as, p] : post.probabilities) p /= total;
  }
  return post;
}

struct GuessOutcome {
  std::optional<std::string> guess;  // empty = reject
  double score = 0.0;                // top weight ratio in [0,1]

  bool guessed() const { return guess.has_value(); }
};

// ---------------------------------------------------------------------------
// Mobility engines
// ---------------------------------------------------------------------------

// Probability that the adversary compromises the client-guard connection at
// least once across the client's movements: the guard is chosen once at the
// initial location, then Σ_g Pr(g) * [∃ location: compromised(loc, g)].
inline double mobility_compromise_prob(
    const std::vector<AsId>& locations,
    const std::function<GuardDistribution(AsId)>& guard_dist_at,
    const std::function<bool(AsId client_as, AsId guard_as)>& compromised) {
  if (locations.empty()) throw ValidationError("location sequence is empty");
  GuardDistribution dist = guard_dist_at(locations.front());
  if (dist.empty()) throw SelectionError("guard distribution is empty");
  double prob = 0.0;
  for (const auto& e : dist.entries()) {
    bool hit = false;
    for (AsId loc : locations)
      if (compromised(loc, e.host_as)) {
        hit = true;
        break;
      }
    if (hit) prob += e.probability;
  }
  return prob;
}

// Pseudonym linking against a mobility side channel: per observed day, drop
// candidates whose checked-in AS reaches the destination through a
// different penultimate hop (candidates with no data that day are kept),
// then weight survivors by e^(a * n_points) and guess the top candidate
// when its weight ratio clears the threshold.
inline GuessOutcome hornet_mobility_attack(
    const std::vector<mobility::MobilityTrace>& traces,
    const mobility::CountryAsMap& map, const AsGraph& graph, AsId dst,
    const std::vector<netlayer::HornetObservation>& target_connections,
    double a, double threshold) {
  if (!(a > 0.0)) throw ValidationError("weight exponent a must be positive");
  if (!(threshold > 0.0) || threshold > 1.0)
    throw ValidationError("threshold must lie in (0,1]");

  std::map<AsId, std::optional<AsId>> pen_cache;
  auto penultimate = [&](AsId src) {
    auto [it, fresh] = pen_cache.try_emplace(src);
    if (fresh)
      it->second = src == dst ? std::nullopt : topology::penultimate_hop(graph, src, dst);
    return it->second;
  };

  std::vector<const mobility::MobilityTrace*> survivors;
  std::vector<std::map<std::int64_t, AsId>> day_maps;
  for (const auto& t : traces) {
    survivors.push_back(&t);
    day_maps.push_back(mobility::day_locations(t, map));
  }

  for (const auto& obs : target_connections) {
    std::vector<const mobility::MobilityTrace*> next;
    std::vector<std::map<std::int64_t, AsId>> next_maps;
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      auto it = day_maps[i].find(obs.timestamp);
      bool keep = true;
      if (it != day_maps[i].end()) {
        auto pen = penultimate(it->second);
        keep = pen.has_value() && *pen == obs.penultimate;
      }
      if (keep) {
        next.push_back(survivors[i]);
        next_maps.push_back(std::move(day_maps[i]));
      }
    }
    survivors = std::move(next);
    day_maps = std::move(next_maps);
  }

  if (survivors.empty()) return {std::nullopt, 0.0};

  double total = 0.0;
  double best_w = -1.0;
  const mobility::MobilityTrace* best = nullptr;
  for (const auto* t : survivors) {
    const double w = std::exp(a * static_cast<double>(t->n_points()));
    total += w;
    // ties keep the lexicographically first user id
    if (w > best_w || (w == best_w && t->user < best->user)) {
      best_w = w;
      best = t;
    }
  }
  const double ratio = best_w / total;
  if (ratio >= threshold) return {best->user, ratio};
  return {std::nullopt, ratio};
}

// ---------------------------------------------------------------------------
// Guard-observation inference engines
// ---------------------------------------------------------------------------

// Simulates a client drawing guards (with replacement) from its own
// distribution while the adversary folds each identified guard into a
// posterior over candidate locations. Entry k holds the posterior after k
// observations; entry 0 is the uniform prior.
inline std::vector<PosteriorBelief> guard_inference_sim(
    const std::map<AsId, GuardDistribution>& dist_by_candidate, AsId true_client,
    const std::vector<AsId>& candidates, std::size_t n_observations, Rng& rng) {
  auto it = dist_by_candidate.find(true_client);
  if (it == dist_by_candidate.end() || it->second.empty())
    throw SelectionError("true client has no guard distribution");
  if (std::find(candidates.begin(), candidates.end(), true_client) == candidates.end())
    throw ValidationError("true client must be a candidate");

  const auto& true_dist = it->second;
  std::vector<double> weights;
  for (const auto& e : true_dist.entries()) weights.push_back(e.probability);

  std::vector<PosteriorBelief> out;
  out.push_back(PosteriorBelief::uniform(candidates));
  for (std::size_t k = 0; k < n_observations; ++k) {
    const std::string& guard_id = true_dist.entries()[rng.pick_weighted(weights)].id;
    PosteriorBelief next = out.back();
    double total = 0.0;
    for (auto& [as, p] : next.probabilities) {
      auto dit = dist_by_candidate.find(as);
      const double lik = dit == dist_by_candidate.end()
                             ? 0.0
                             : dit->second.probability_of(guard_id);
      p *= lik;
      total += p;
    }
    if (!(total > 0.0))
      throw InconsistencyError("guard observation excludes every candidate");
    for (auto& [as, p] : next.probabilities) p /= total;
    out.push_back(std::move(next));
  }
  return out;
}

// g-select flavor: candidate likelihoods are the suspect-free
// bandwidth-weighted distributions. Candidates whose suspect-free set is
// empty keep an empty distribution (they can never produce an observation).
inline std::vector<PosteriorBelief> denasa_guard_inference_sim(
    const AsGraph& graph, const RelaySet& relays, const std::set<AsId>& suspects,
    AsId true_client, const std::vector<AsId>& candidates,
    std::size_t n_observations, Rng& rng) {
  std::map<AsId, GuardDistribution> dists;
  for (AsId c : candidates) {
    try {
      dists.emplace(c, anonnet::gselect_guard_dist(graph, relays, c, suspects));
    } catch (const SelectionError&) {
      dists.emplace(c, GuardDistribution{});
    }
  }
  return guard_inference_sim(dists, true_client, candidates, n_observations, rng);
}

// ---------------------------------------------------------------------------
// Dovetail engines
// ---------------------------------------------------------------------------

struct DovetailSimResult {
  std::vector<std::size_t> set_sizes;  // after each connection
  AnonymitySet final_set;
  std::size_t n_observations = 0;
};

// Client makes repeated connections through random matchmakers; whenever the
// adversary lands in the dovetail position it intersects the location set
// derived from (predecessor, position). The set starts at all client ISPs.
inline DovetailSimResult dovetail_intersection_sim(
    const AsGraph& graph, AsId adversary, AsId true_client,
    const std::vector<AsId>& matchmakers, std::size_t n_connections,
    const netlayer::DovetailParams& params, Rng& rng) {
  if (matchmakers.empty()) throw ValidationError("matchmaker pool is empty");
  DovetailSimResult res;
  AnonymitySet current = AnonymitySet::of(topology::client_isp_ases(graph));
  if (!current.contains(true_client))
    throw ValidationError("true client must be a client ISP AS");

  std::map<std::pair<AsId, std::uint32_t>, std::vector<AsId>> lset_cache;
  for (std::size_t i = 0; i < n_connections; ++i) {
    AsId mm = matchmakers[rng.uniform_index(matchmakers.size())];
    if (mm != true_client) {
      auto path = netlayer::dovetail_build(graph, true_client, mm, params, rng);
      if (path && path->dovetail == adversary) {
        auto obs = netlayer::dovetail_observe(*path, adversary);
        if (obs) {
          auto key = std::make_pair(obs->predecessor, obs->position);
          auto [it, fresh] = lset_cache.try_emplace(key);
          if (fresh)
            it->second =
                netlayer::dovetail_location_set(graph, *obs, params.max_peer_links);
          current = intersect(current, it->second);
          ++res.n_observations;
        }
      }
    }
    res.set_sizes.push_back(current.size());
  }
  res.final_set = std::move(current);
  return res;
}

// Empirical dovetail-position frequency over uniformly sampled
// (source, matchmaker) pairs. Fractions sum to at most 1; samples whose
// build yields no path contribute nothing.
inline std::map<AsId, double> dovetail_frequency(const AsGraph& graph,
                                                 std::size_t n_samples,
                                                 const netlayer::DovetailParams& params,
                                                 Rng& rng) {
  if (n_samples < 1) throw ValidationError("n_samples must be >= 1");
  const auto isps = topology::client_isp_ases(graph);
  if (isps.empty()) throw ValidationError("graph has no client ISP ASes");
  const auto& all = graph.ases();
  std::map<AsId, std::size_t> counts;
  for (std::size_t i = 0; i < n_samples; ++i) {
    AsId src = isps[rng.uniform_index(isps.size())];
    AsId mm = src;
    while (mm == src) mm = all[rng.uniform_index(all.size())];
    auto path = netlayer::dovetail_build(graph, src, mm, params, rng);
    if (path) ++counts[path->dovetail];
  }
  std::map<AsId, double> out;
  for (const auto& [as, c] : counts)
    out[as] = static_cast<double>(c) / static_cast<double>(n_samples);
  return out;
}

// ---------------------------------------------------------------------------
// PHI engine
// ---------------------------------------------------------------------------

struct PhiSimResult {
  std::vector<PosteriorBelief> beliefs;  // entry k: after k connections
  std::vector<bool> observed;            // whether connection k produced evidence
};

// Repeated connections to a fixed destination through uniformly drawn
// helpers. When the adversary sits at or past the midway it learns
// (predecessor, relative position, destination) and folds the observation
// into a posterior. Likelihoods marginalize the helper choice:
//   Pr(O | L) = |{h : adversary observes O on L's connection via h}| / |helpers|
// Non-observations carry no term: the adversary is not assumed to know how
// often connections miss it.
inline PhiSimResult phi_inference_sim(const AsGraph& graph, AsId adversary,
                                      AsId true_src, AsId dst,
                                      const std::vector<AsId>& helpers,
                                      const std::vector<AsId>& candidates,
                                      std::size_t n_connections, Rng& rng) {
  if (helpers.empty()) throw ValidationError("helper pool is empty");
  if (true_src == dst) throw ValidationError("true source must differ from destination");

  std::vector<AsId> cands = candidates;
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  if (std::find(cands.begin(), cands.end(), true_src) == cands.end())
    throw ValidationError("true source must be a candidate");

  topology::RoutingState to_dst(graph, dst);
  std::map<AsId, topology::RoutingState> to_helper;
  for (AsId h : helpers) to_helper.try_emplace(h, graph, h);

  auto observe = [&](AsId src, AsId helper) -> std::optional<netlayer::PhiObservation> {
    if (src == helper || src == dst || helper == dst) return std::nullopt;
    auto path = netlayer::phi_build(graph, src, helper, dst, to_helper.at(helper), to_dst);
    if (!path) return std::nullopt;
    return netlayer::phi_observe(*path, adversary);
  };

  std::map<netlayer::PhiObservation, std::vector<double>> likelihood_rows;
  auto likelihood_row = [&](const netlayer::PhiObservation& obs) -> const std::vector<double>& {
    auto [it, fresh] = likelihood_rows.try_emplace(obs);
    if (fresh) {
      it->second.resize(cands.size(), 0.0);
      for (std::size_t ci = 0; ci < cands.size(); ++ci) {
        std::size_t hits = 0;
        for (AsId h : helpers) {
          auto o = observe(cands[ci], h);
          if (o && *o == obs) ++hits;
        }
        it->second[ci] =
            static_cast<double>(hits) / static_cast<double>(helpers.size());
      }
    }
    return it->second;
  };

  PhiSimResult res;
  res.beliefs.push_back(PosteriorBelief::uniform(cands));
  for (std::size_t k = 0; k < n_connections; ++k) {
    AsId helper = helpers[rng.uniform_index(helpers.size())];
    auto obs = observe(true_src, helper);
    PosteriorBelief next = res.beliefs.back();
    if (obs) {
      const auto& row = likelihood_row(*obs);
      double total = 0.0;
      for (std::size_t ci = 0; ci < cands.size(); ++ci) {
        next.probabilities[ci].second *= row[ci];
        total += next.probabilities[ci].second;
      }
      if (!(total > 0.0))
        throw InconsistencyError("observation excludes every candidate");
      for (auto& [as, p] : next.probabilities) p /= total;
    }
    res.observed.push_back(obs.has_value());
    res.beliefs.push_back(std::move(next));
  }
  return res;
}

// Midway-position frequency over uniformly sampled (source, helper,
// destination) triples; samples without a viable path contribute nothing.
inline std::map<AsId, double> phi_midway_frequency(const AsGraph& graph,
                                                   std::size_t n_samples, Rng& rng) {
  if (n_samples < 1) throw ValidationError("n_samples must be >= 1");
  const auto& all = graph.ases();
  if (all.size() < 3) throw ValidationError("graph too small for PHI sampling");
  std::map<AsId, std::size_t> counts;
  for (std::size_t i = 0; i < n_samples; ++i) {
    AsId src = all[rng.uniform_index(all.size())];
    AsId helper = src;
    while (helper == src) helper = all[rng.uniform_index(all.size())];
    AsId dst = src;
    while (dst == src || dst == helper) dst = all[rng.uniform_index(all.size())];
    auto path = netlayer::phi_build(graph, src, helper, dst);
    if (path) ++counts[path->midway];
  }
  std::map<AsId, double> out;
  for (const auto& [as, c] : counts)
    out[as] = static_cast<double>(c) / static_cast<double>(n_samples);
  return out;
}

// ---------------------------------------------------------------------------
// Cluster / route-change engines
// ---------------------------------------------------------------------------

// After n cluster formations the client is known to sit in the intersection
// of its clusters' member sets.
inline AnonymitySet taps_intersection_attack(
    const std::vector<anonnet::Clustering>& clusterings, AsId client) {
  if (clusterings.empty()) throw ValidationError("no clusterings supplied");
  AnonymitySet acc = AnonymitySet::of(clusterings.front().members_of_cluster_containing(client));
  for (std::size_t i = 1; i < clusterings.size(); ++i)
    acc = intersect(acc, clusterings[i].members_of_cluster_containing(client));
  return acc;
}

struct RouteChangeRecord {
  std::string probe;
  std::int64_t day = 0;
  AsId origin_as = 0;
  AsId penultimate = 0;
};

// CSV header `probe,day,origin_as,penultimate_as`.
inline std::vector<RouteChangeRecord> parse_route_change_log(std::string_view text) {
  const auto lines = csv::split_lines(text);
  if (!lines.empty() && csv::trim(lines[0]) != "probe,day,origin_as,penultimate_as")
    throw ParseError(1, "expected header `probe,day,origin_as,penultimate_as`");
  std::vector<RouteChangeRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    std::string_view line = csv::trim(lines[i]);
    if (line.empty()) continue;
    const auto f = csv::split_fields(line, ',');
    if (f.size() != 4) throw ParseError(lineno, "expected 4 fields");
    RouteChangeRecord r;
    r.probe = std::string(csv::trim(f[0]));
    if (r.probe.empty()) throw ParseError(lineno, "empty probe id");
    if (!csv::parse_int(f[1], r.day)) throw ParseError(lineno, "bad day index");
    if (!csv::parse_int(f[2], r.origin_as) || r.origin_as < 1)
      throw ParseError(lineno, "bad origin AS");
    if (!csv::parse_int(f[3], r.penultimate) || r.penultimate < 1)
      throw ParseError(lineno, "bad penultimate AS");
    out.push_back(std::move(r));
  }
  return out;
}

struct RouteChangeImpact {
  std::string probe;
  AsId origin_as = 0;
  std::int64_t day_before = 0;
  std::int64_t day_after = 0;
  std::size_t before_size = 0;  // |origin ASes matching the old penultimate|
  std::size_t after_size = 0;   // |… ∩ origin ASes matching the new penultimate|
};

struct RouteChangeStats {
  AsId origin_as = 0;
  std::size_t n_probes = 0;
  std::size_t n_changes = 0;
  double mean_changes_per_probe = 0.0;
  double mean_before_size = 0.0;  // over this AS's changes
  double mean_after_size = 0.0;
};

struct RouteChangeAnalysis {
  std::vector<RouteChangeImpact> changes;
  std::vector<RouteChangeStats> per_as;  // sorted by AS
};

// A change is a pair of consecutive records of one probe whose penultimate
// hops differ. The before-set collects origin ASes of probes that matched
// the old penultimate on the earlier day, the after-set intersects with
// matches of the new penultimate on the later day.
inline RouteChangeAnalysis route_change_analysis(std::vector<RouteChangeRecord> records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const RouteChangeRecord& a, const RouteChangeRecord& b) {
                     if (a.probe != b.probe) return a.probe < b.probe;
                     return a.day < b.day;
                   });

  // (day, penultimate) -> origin ASes with a matching record that day
  std::map<std::pair<std::int64_t, AsId>, std::set<AsId>> matches;
  for (const auto& r : records)
    matches[{r.day, r.penultimate}].insert(r.origin_as);

  RouteChangeAnalysis out;
  std::map<AsId, RouteChangeStats> stats;
  std::set<std::pair<AsId, std::string>> probes_seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    auto& st = stats[r.origin_as];
    st.origin_as = r.origin_as;
    if (probes_seen.insert({r.origin_as, r.probe}).second) ++st.n_probes;
    if (i == 0 || records[i - 1].probe != r.probe) continue;
    const auto& prev = records[i - 1];
    if (prev.penultimate == r.penultimate) continue;

    const auto& before = matches.at({prev.day, prev.penultimate});
    const auto& after_pool = matches.at({r.day, r.penultimate});
    std::size_t after = 0;
    for (AsId as : before)
      if (after_pool.count(as)) ++after;

    out.changes.push_back({r.probe, r.origin_as, prev.day, r.day, before.size(), after});
    ++st.n_changes;
    st.mean_before_size += static_cast<double>(before.size());
    st.mean_after_size += static_cast<double>(after);
  }
  for (auto& [as, st] : stats) {
    if (st.n_changes > 0) {
      st.mean_before_size /= static_cast<double>(st.n_changes);
      st.mean_after_size /= static_cast<double>(st.n_changes);
    }
    st.mean_changes_per_probe =
        st.n_probes == 0 ? 0.0
                         : static_cast<double>(st.n_changes) / static_cast<double>(st.n_probes);
    out.per_as.push_back(st);
  }
  return out;
}

}  // namespace anonsim::attacks
