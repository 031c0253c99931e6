#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "anonsim/attacks.hpp"
#include "anonsim/metrics.hpp"
#include "anonsim/synth.hpp"
#include "anonsim/version.hpp"

// Experiment runner: binds a JSON config to an attack engine and writes a
// tidy result table (trial, step, metric, value) plus a metadata block.
// Config + seed fully determine the output bytes; trials may execute in
// parallel because rows are canonically ordered before writing.
namespace anonsim::experiment {

using nlohmann::json;

struct ResultRow {
  std::uint32_t trial = 0;
  std::uint32_t step = 0;
  std::string metric;
  double value = 0.0;
};

inline std::string rows_to_csv(std::vector<ResultRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.trial != b.trial) return a.trial < b.trial;
    if (a.step != b.step) return a.step < b.step;
    return a.metric < b.metric;
  });
  std::string out = "trial,step,metric,value\n";
  for (const auto& r : rows) {
    out += std::to_string(r.trial);
    out += ',';
    out += std::to_string(r.step);
    out += ',';
    out += r.metric;
    out += ',';
    out += csv::format_double(r.value);
    out += '\n';
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// Config access helpers: every validation error names the offending field.
// ---------------------------------------------------------------------------

namespace cfg {

inline const json& require(const json& j, const std::string& field) {
  if (!j.contains(field)) throw ConfigError("missing field `" + field + "`");
  return j.at(field);
}

inline std::uint64_t u64(const json& j, const std::string& field) {
  const auto& v = require(j, field);
  if (!v.is_number_unsigned() && !v.is_number_integer())
    throw ConfigError("field `" + field + "` must be an integer");
  return v.get<std::uint64_t>();
}

inline std::uint64_t u64_or(const json& j, const std::string& field, std::uint64_t dflt) {
  return j.contains(field) ? u64(j, field) : dflt;
}

inline double num(const json& j, const std::string& field) {
  const auto& v = require(j, field);
  if (!v.is_number()) throw ConfigError("field `" + field + "` must be a number");
  return v.get<double>();
}

inline double num_or(const json& j, const std::string& field, double dflt) {
  return j.contains(field) ? num(j, field) : dflt;
}

inline std::string str(const json& j, const std::string& field) {
  const auto& v = require(j, field);
  if (!v.is_string()) throw ConfigError("field `" + field + "` must be a string");
  return v.get<std::string>();
}

inline AsId as_id(const json& j, const std::string& field) {
  auto v = u64(j, field);
  if (v < 1 || v > 0xffffffffULL)
    throw ConfigError("field `" + field + "` must be a positive AS number");
  return static_cast<AsId>(v);
}

inline std::vector<AsId> as_list(const json& j, const std::string& field) {
  const auto& v = require(j, field);
  if (!v.is_array()) throw ConfigError("field `" + field + "` must be an array");
  std::vector<AsId> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() && !e.is_number_unsigned())
      throw ConfigError("field `" + field + "` must hold AS numbers");
    out.push_back(e.get<AsId>());
  }
  return out;
}

}  // namespace cfg

// ---------------------------------------------------------------------------
// Input loading: file paths resolve relative to the config's directory;
// inline objects are synthesized through the seeded generators.
// ---------------------------------------------------------------------------

struct ExperimentContext {
  std::filesystem::path config_dir;
  json config;
  std::uint64_t seed = 0;

  std::filesystem::path resolve(const std::string& rel) const {
    std::filesystem::path p(rel);
    return p.is_absolute() ? p : config_dir / p;
  }

  topology::AsGraph load_topology() const {
    const auto& t = cfg::require(config, "topology");
    if (t.is_string())
      return topology::AsGraph::parse_serial2(read_file(resolve(t.get<std::string>())));
    if (!t.is_object()) throw ConfigError("field `topology` must be a path or object");
    synth::TopologyGenParams p;
    p.n_ases = cfg::u64(t, "n_ases");
    p.n_tiers = cfg::u64_or(t, "n_tiers", 3);
    p.peer_prob = cfg::num_or(t, "peer_prob", 0.3);
    p.multihome_prob = cfg::num_or(t, "multihome_prob", 0.3);
    p.seed = cfg::u64_or(t, "seed", seed);
    return synth::gen_topology(p);
  }

  anonnet::RelaySet load_relays(const topology::AsGraph& g) const {
    const auto& r = cfg::require(config, "relays");
    if (r.is_string())
      return anonnet::parse_relays(read_file(resolve(r.get<std::string>())));
    if (!r.is_object()) throw ConfigError("field `relays` must be a path or object");
    synth::RelayGenParams p;
    p.n_relays = cfg::u64(r, "n_relays");
    p.guard_fraction = cfg::num_or(r, "guard_fraction", 0.5);
    p.bandwidth_min = cfg::num_or(r, "bandwidth_min", 50.0);
    p.bandwidth_max = cfg::num_or(r, "bandwidth_max", 500.0);
    p.seed = cfg::u64_or(r, "seed", seed ^ 0x52656c6179ULL);
    return synth::gen_relays(g, p);
  }

  mobility::CountryAsMap load_country_map() const {
    const auto& m = cfg::require(config, "country_map");
    if (m.is_string())
      return mobility::parse_country_map(read_file(resolve(m.get<std::string>())));
    if (!m.is_object()) throw ConfigError("field `country_map` must be a path or object");
    mobility::CountryAsMap out;
    for (const auto& [country, as] : m.items()) {
      if (!as.is_number_integer() && !as.is_number_unsigned())
        throw ConfigError("field `country_map` must map countries to AS numbers");
      out.mapping[country] = as.get<AsId>();
    }
    return out;
  }

  std::vector<mobility::MobilityTrace> load_traces() const {
    if (config.contains("checkins"))
      return mobility::parse_checkins(read_file(resolve(cfg::str(config, "checkins"))));
    const auto& t = cfg::require(config, "gen_traces");
    if (!t.is_object()) throw ConfigError("field `gen_traces` must be an object");
    std::vector<std::string> countries;
    for (const auto& c : cfg::require(t, "countries")) {
      if (!c.is_string()) throw ConfigError("field `countries` must hold strings");
      countries.push_back(c.get<std::string>());
    }
    return mobility::gen_mobility_traces(cfg::u64(t, "n_users"), cfg::u64(t, "n_days"),
                                         countries, cfg::num_or(t, "move_prob", 0.3),
                                         cfg::u64_or(t, "seed", seed ^ 0x547261636bULL));
  }
};

// Runs fn(trial) for every trial, optionally across threads; row order is
// normalized later so scheduling never shows in the output.
template <typename Fn>
std::vector<ResultRow> run_trials(std::size_t n_trials, unsigned threads, Fn&& fn) {
  std::vector<ResultRow> rows;
  if (threads <= 1 || n_trials <= 1) {
    for (std::size_t t = 0; t < n_trials; ++t) {
      auto r = fn(t);
      rows.insert(rows.end(), r.begin(), r.end());
    }
    return rows;
  }
  std::vector<std::future<std::vector<ResultRow>>> futures;
  std::size_t chunk = (n_trials + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = std::min(n_trials, lo + chunk);
    if (lo >= hi) break;
    futures.push_back(std::async(std::launch::async, [lo, hi, &fn]() {
      std::vector<ResultRow> local;
      for (std::size_t t = lo; t < hi; ++t) {
        auto r = fn(t);
        local.insert(local.end(), r.begin(), r.end());
      }
      return local;
    }));
  }
  for (auto& f : futures) {
    auto r = f.get();
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Per-kind runners
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint32_t u32_checked(std::size_t v) {
  return static_cast<std::uint32_t>(v);
}

// vanilla-mobility, cr-mobility, denasa-mobility: per-user probability of a
// compromised client-guard connection across that user's movements.
inline std::vector<ResultRow> run_mobility_kind(const ExperimentContext& ctx,
                                                const std::string& kind,
                                                unsigned threads) {
  auto graph = ctx.load_topology();
  auto relays = ctx.load_relays(graph);
  auto map = ctx.load_country_map();
  auto traces = ctx.load_traces();

  std::vector<AsId> adversaries;
  std::set<AsId> suspects;
  double alpha = 0.5;
  if (kind == "denasa-mobility") {
    for (AsId s : cfg::as_list(ctx.config, "suspects")) suspects.insert(s);
    if (suspects.empty()) throw ConfigError("field `suspects` must be non-empty");
  } else {
    adversaries = cfg::as_list(ctx.config, "adversaries");
    if (adversaries.empty()) throw ConfigError("field `adversaries` must be non-empty");
    if (kind == "cr-mobility") alpha = cfg::num_or(ctx.config, "alpha", 0.5);
  }

  // hijack outcomes and routing states are shared across users
  std::map<std::pair<AsId, AsId>, topology::HijackOutcome> hijack_outcomes;
  std::map<AsId, topology::RoutingState> path_states;
  auto state_for = [&](AsId dst) -> const topology::RoutingState& {
    auto it = path_states.find(dst);
    if (it == path_states.end())
      it = path_states.emplace(dst, topology::RoutingState(graph, dst)).first;
    return it->second;
  };

  std::vector<ResultRow> rows;
  for (std::size_t ui = 0; ui < traces.size(); ++ui) {
    const auto& trace = traces[ui];
    auto locations = mobility::as_sequence(trace, map);
    if (locations.empty()) continue;
    for (AsId loc : locations) {
      if (!graph.contains(loc))
        throw ConfigError("country map references AS " + std::to_string(loc) +
                          " outside the topology");
    }
    const auto n_countries = detail::u32_checked(mobility::country_sequence(trace).size());

    auto dist_at = [&](AsId loc) {
      if (kind == "denasa-mobility")
        return anonnet::gselect_guard_dist(graph, relays, loc, suspects);
      if (kind == "cr-mobility")
        return anonnet::counter_raptor_guard_dist(graph, relays, loc, {alpha});
      return anonnet::vanilla_guard_dist(relays);
    };

    double prob = 0.0;
    bool skipped = false;
    try {
      if (kind == "denasa-mobility") {
        auto compromised = [&](AsId client, AsId guard_as) {
          auto p = state_for(guard_as).path_from(client);
          if (!p) return false;
          for (AsId as : *p)
            if (suspects.count(as)) return true;
          return false;
        };
        prob = attacks::mobility_compromise_prob(locations, dist_at, compromised);
      } else {
        double sum = 0.0;
        for (AsId adversary : adversaries) {
          auto compromised = [&](AsId client, AsId guard_as) {
            if (kind == "cr-mobility") {
              if (guard_as == adversary) return false;
              auto key = std::make_pair(guard_as, adversary);
              auto it = hijack_outcomes.find(key);
              if (it == hijack_outcomes.end())
                it = hijack_outcomes
                         .emplace(key, topology::simulate_hijack(graph, guard_as, adversary))
                         .first;
              return client != guard_as && client != adversary && it->second.hijacked(client);
            }
            auto p = state_for(guard_as).path_from(client);
            return p && std::find(p->begin(), p->end(), adversary) != p->end();
          };
          sum += attacks::mobility_compromise_prob(locations, dist_at, compromised);
        }
        prob = sum / static_cast<double>(adversaries.size());
      }
    } catch (const SelectionError&) {
      skipped = true;  // initial location offers no eligible guard
    }
    if (skipped) continue;
    rows.push_back({detail::u32_checked(ui), n_countries, "compromise_prob", prob});
  }
  (void)threads;
  return rows;
}

inline std::vector<ResultRow> run_hornet_mobility(const ExperimentContext& ctx) {
  auto graph = ctx.load_topology();
  auto map = ctx.load_country_map();
  auto traces = ctx.load_traces();
  const AsId dst = cfg::as_id(ctx.config, "dest");
  const double a = cfg::num_or(ctx.config, "a", 0.1);
  const double threshold = cfg::num(ctx.config, "threshold");

  std::vector<std::size_t> target_idx;
  if (ctx.config.contains("targets")) {
    std::set<std::string> wanted;
    for (const auto& t : ctx.config.at("targets")) wanted.insert(t.get<std::string>());
    for (std::size_t i = 0; i < traces.size(); ++i)
      if (wanted.count(traces[i].user)) target_idx.push_back(i);
    if (target_idx.size() != wanted.size())
      throw ConfigError("field `targets` names unknown users");
  } else {
    for (std::size_t i = 0; i < traces.size(); ++i) target_idx.push_back(i);
  }

  std::vector<ResultRow> rows;
  for (std::size_t k = 0; k < target_idx.size(); ++k) {
    const auto& target = traces[target_idx[k]];
    std::vector<netlayer::HornetObservation> obs;
    for (const auto& [day, as] : mobility::day_locations(target, map)) {
      if (as == dst) continue;
      auto pen = topology::penultimate_hop(graph, as, dst);
      if (pen) obs.push_back({dst, *pen, day});
    }
    auto outcome = attacks::hornet_mobility_attack(traces, map, graph, dst, obs, a, threshold);
    const auto trial = detail::u32_checked(k);
    const auto step = detail::u32_checked(target.n_points());
    rows.push_back({trial, step, "guessed", outcome.guessed() ? 1.0 : 0.0});
    rows.push_back({trial, step, "correct",
                    outcome.guessed() && *outcome.guess == target.user ? 1.0 : 0.0});
    rows.push_back({trial, step, "score", outcome.score});
  }
  return rows;
}

// denasa-inference / cr-inference: repeated guard observations feeding a
// posterior over candidate client locations.
inline std::vector<ResultRow> run_guard_inference(const ExperimentContext& ctx,
                                                  const std::string& kind,
                                                  unsigned threads) {
  auto graph = ctx.load_topology();
  auto relays = ctx.load_relays(graph);
  const auto n_observations = cfg::u64(ctx.config, "n_observations");
  const auto n_trials = cfg::u64_or(ctx.config, "trials", 1);

  std::vector<AsId> candidates;
  if (ctx.config.contains("candidates") && ctx.config.at("candidates").is_array()) {
    candidates = cfg::as_list(ctx.config, "candidates");
  } else {
    const std::string which =
        ctx.config.contains("candidates") ? cfg::str(ctx.config, "candidates") : "client_isps";
    if (which == "client_isps")
      candidates = topology::client_isp_ases(graph);
    else if (which == "all")
      candidates = graph.ases();
    else
      throw ConfigError("field `candidates` must be a list, `client_isps` or `all`");
  }
  std::sort(candidates.begin(), candidates.end());
  if (candidates.empty()) throw ConfigError("candidate set is empty");

  std::map<AsId, anonnet::GuardDistribution> dists;
  if (kind == "denasa-inference") {
    std::set<AsId> suspects;
    for (AsId s : cfg::as_list(ctx.config, "suspects")) suspects.insert(s);
    if (suspects.empty()) throw ConfigError("field `suspects` must be non-empty");
    for (AsId c : candidates) {
      try {
        dists.emplace(c, anonnet::gselect_guard_dist(graph, relays, c, suspects));
      } catch (const SelectionError&) {
        dists.emplace(c, anonnet::GuardDistribution{});
      }
    }
  } else {
    const double alpha = cfg::num_or(ctx.config, "alpha", 0.5);
    for (AsId c : candidates)
      dists.emplace(c, anonnet::counter_raptor_guard_dist(graph, relays, c, {alpha}));
  }

  std::vector<AsId> true_clients;
  if (ctx.config.contains("true_clients"))
    true_clients = cfg::as_list(ctx.config, "true_clients");
  else
    true_clients = candidates;
  for (AsId t : true_clients)
    if (!std::binary_search(candidates.begin(), candidates.end(), t))
      throw ConfigError("field `true_clients` must be a subset of the candidates");

  return run_trials(n_trials, threads, [&](std::size_t t) {
    Rng rng = derive_rng(ctx.seed, t);
    const AsId truth = true_clients[t % true_clients.size()];
    auto beliefs =
        attacks::guard_inference_sim(dists, truth, candidates, n_observations, rng);
    std::vector<ResultRow> rows;
    const auto trial = detail::u32_checked(t);
    for (std::size_t k = 0; k < beliefs.size(); ++k) {
      const auto step = detail::u32_checked(k);
      rows.push_back({trial, step, "entropy_bits", metrics::entropy_bits(beliefs[k])});
      rows.push_back({trial, step, "true_prob", beliefs[k].probability_of(truth)});
      rows.push_back(
          {trial, step, "map_correct", beliefs[k].map_estimate() == truth ? 1.0 : 0.0});
    }
    return rows;
  });
}

inline std::vector<ResultRow> run_dovetail(const ExperimentContext& ctx, unsigned threads) {
  auto graph = ctx.load_topology();
  netlayer::DovetailParams params;
  params.min_head_len = static_cast<std::uint32_t>(cfg::u64_or(ctx.config, "min_head_len", 6));
  params.max_peer_links = cfg::u64_or(ctx.config, "max_peer_links", 1);
  params.max_len = cfg::u64_or(ctx.config, "max_len", 8);
  const auto n_connections = cfg::u64(ctx.config, "n_connections");
  const auto n_trials = cfg::u64_or(ctx.config, "trials", 1);
  const auto mm_count = cfg::u64_or(ctx.config, "matchmaker_count", 0);

  std::vector<ResultRow> rows;

  AsId adversary = 0;
  const auto& adv = cfg::require(ctx.config, "adversary");
  if (adv.is_string() && adv.get<std::string>() == "auto") {
    const auto samples = cfg::u64_or(ctx.config, "frequency_samples", 10000);
    Rng rng = derive_rng(ctx.seed, 0xD0F7ULL);
    auto freq = attacks::dovetail_frequency(graph, samples, params, rng);
    if (freq.empty()) throw ConfigError("no dovetail was ever selected; adjust parameters");
    double best = -1.0;
    for (const auto& [as, frac] : freq) {
      rows.push_back({0, as, "dovetail_fraction", frac});
      if (frac > best) {
        best = frac;
        adversary = as;
      }
    }
    rows.push_back({0, 0, "adversary_as", static_cast<double>(adversary)});
  } else {
    adversary = cfg::as_id(ctx.config, "adversary");
    if (ctx.config.contains("frequency_samples")) {
      Rng rng = derive_rng(ctx.seed, 0xD0F7ULL);
      auto freq = attacks::dovetail_frequency(
          graph, cfg::u64(ctx.config, "frequency_samples"), params, rng);
      for (const auto& [as, frac] : freq)
        rows.push_back({0, as, "dovetail_fraction", frac});
    }
  }

  const auto isps = topology::client_isp_ases(graph);
  if (isps.empty()) throw ConfigError("topology has no client ISP ASes");

  auto trial_rows = run_trials(n_trials, threads, [&](std::size_t t) {
    Rng rng = derive_rng(ctx.seed, t);
    AsId client = isps[rng.uniform_index(isps.size())];
    std::vector<AsId> mms;
    if (mm_count > 0) {
      for (std::uint64_t i = 0; i < mm_count; ++i)
        mms.push_back(graph.ases()[rng.uniform_index(graph.size())]);
    } else {
      mms = graph.ases();
    }
    auto res = attacks::dovetail_intersection_sim(graph, adversary, client, mms,
                                                  n_connections, params, rng);
    std::vector<ResultRow> out;
    const auto trial = detail::u32_checked(t);
    for (std::size_t k = 0; k < res.set_sizes.size(); ++k)
      out.push_back({trial, detail::u32_checked(k + 1), "anonymity_set_size",
                     static_cast<double>(res.set_sizes[k])});
    out.push_back({trial, detail::u32_checked(n_connections), "n_observations",
                   static_cast<double>(res.n_observations)});
    return out;
  });
  rows.insert(rows.end(), trial_rows.begin(), trial_rows.end());
  return rows;
}

inline std::vector<ResultRow> run_phi(const ExperimentContext& ctx, unsigned threads) {
  auto graph = ctx.load_topology();
  const auto n_connections = cfg::u64(ctx.config, "n_connections");
  const auto n_trials = cfg::u64_or(ctx.config, "trials", 1);
  const auto helper_count = cfg::u64(ctx.config, "helper_count");
  const double threshold = cfg::num(ctx.config, "threshold");

  std::vector<ResultRow> rows;
  AsId adversary = 0;
  const auto& adv = cfg::require(ctx.config, "adversary");
  if (adv.is_string() && adv.get<std::string>() == "auto") {
    const auto samples = cfg::u64_or(ctx.config, "frequency_samples", 10000);
    Rng rng = derive_rng(ctx.seed, 0x9B1DULL);
    auto freq = attacks::phi_midway_frequency(graph, samples, rng);
    if (freq.empty()) throw ConfigError("no midway was ever selected; adjust parameters");
    double best = -1.0;
    for (const auto& [as, frac] : freq) {
      rows.push_back({0, as, "midway_fraction", frac});
      if (frac > best) {
        best = frac;
        adversary = as;
      }
    }
    rows.push_back({0, 0, "adversary_as", static_cast<double>(adversary)});
  } else {
    adversary = cfg::as_id(ctx.config, "adversary");
  }

  const auto& all = graph.ases();
  auto trial_rows = run_trials(n_trials, threads, [&](std::size_t t) {
    Rng rng = derive_rng(ctx.seed, t);
    AsId truth = all[rng.uniform_index(all.size())];
    AsId dst = truth;
    while (dst == truth) dst = all[rng.uniform_index(all.size())];
    std::vector<AsId> helpers;
    for (std::uint64_t i = 0; i < helper_count; ++i)
      helpers.push_back(all[rng.uniform_index(all.size())]);
    std::vector<AsId> candidates;
    for (AsId as : all)
      if (as != dst) candidates.push_back(as);
    auto res = attacks::phi_inference_sim(graph, adversary, truth, dst, helpers,
                                          candidates, n_connections, rng);
    std::vector<ResultRow> out;
    const auto trial = detail::u32_checked(t);
    for (std::size_t k = 0; k < res.beliefs.size(); ++k) {
      const auto& belief = res.beliefs[k];
      const AsId top = belief.map_estimate();
      const double top_p = belief.probability_of(top);
      const auto step = detail::u32_checked(k);
      out.push_back({trial, step, "entropy_bits", metrics::entropy_bits(belief)});
      out.push_back({trial, step, "top_score", top_p});
      out.push_back({trial, step, "guessed", top_p >= threshold ? 1.0 : 0.0});
      out.push_back(
          {trial, step, "correct", top_p >= threshold && top == truth ? 1.0 : 0.0});
    }
    return out;
  });
  rows.insert(rows.end(), trial_rows.begin(), trial_rows.end());
  return rows;
}

inline std::vector<ResultRow> run_taps(const ExperimentContext& ctx, unsigned threads) {
  auto graph = ctx.load_topology();
  auto relays = ctx.load_relays(graph);
  const auto formations = cfg::u64(ctx.config, "formations");
  if (formations < 1) throw ConfigError("field `formations` must be >= 1");
  const auto n_trials = cfg::u64_or(ctx.config, "trials", 1);
  const auto top_k = cfg::u64_or(ctx.config, "top_k_guards", 3);
  const auto churn_add = cfg::u64_or(ctx.config, "churn_add", 2);
  const auto churn_remove = cfg::u64_or(ctx.config, "churn_remove", 2);
  auto medoids = cfg::as_list(ctx.config, "medoids");
  auto adversaries = cfg::as_list(ctx.config, "adversary_ases");

  std::set<AsId> clients;
  if (ctx.config.contains("clients")) {
    for (AsId c : cfg::as_list(ctx.config, "clients")) clients.insert(c);
  } else {
    for (AsId c : graph.ases()) clients.insert(c);
  }

  return run_trials(n_trials, threads, [&](std::size_t t) {
    Rng rng = derive_rng(ctx.seed, t);
    std::vector<anonnet::Clustering> clusterings;
    topology::AsGraph current = graph;
    for (std::uint64_t f = 0; f < formations; ++f) {
      if (f > 0) current = synth::mutate_peer_edges(current, churn_add, churn_remove, rng);
      clusterings.push_back(
          anonnet::taps_cluster(current, clients, medoids, adversaries, relays, top_k));
    }
    std::vector<ResultRow> rows;
    std::size_t ci = 0;
    for (AsId client : clients) {
      for (std::uint64_t n = 1; n <= formations; ++n) {
        std::vector<anonnet::Clustering> prefix(clusterings.begin(),
                                                clusterings.begin() + n);
        auto set = attacks::taps_intersection_attack(prefix, client);
        rows.push_back({detail::u32_checked(t * clients.size() + ci),
                        detail::u32_checked(n), "anonymity_set_size",
                        static_cast<double>(set.size())});
      }
      ++ci;
    }
    return rows;
  });
}

inline std::vector<ResultRow> run_hornet_routing(const ExperimentContext& ctx,
                                                 unsigned threads) {
  const auto n_trials = cfg::u64_or(ctx.config, "trials", 1);

  if (ctx.config.contains("records")) {
    auto records = attacks::parse_route_change_log(
        read_file(ctx.resolve(cfg::str(ctx.config, "records"))));
    auto analysis = attacks::route_change_analysis(records);
    std::vector<ResultRow> rows;
    for (std::size_t i = 0; i < analysis.changes.size(); ++i) {
      rows.push_back({0, detail::u32_checked(i), "before_size",
                      static_cast<double>(analysis.changes[i].before_size)});
      rows.push_back({0, detail::u32_checked(i), "after_size",
                      static_cast<double>(analysis.changes[i].after_size)});
    }
    for (const auto& st : analysis.per_as) {
      rows.push_back({1, st.origin_as, "as_mean_changes_per_probe",
                      st.mean_changes_per_probe});
      rows.push_back({1, st.origin_as, "as_mean_before_size", st.mean_before_size});
      rows.push_back({1, st.origin_as, "as_mean_after_size", st.mean_after_size});
    }
    return rows;
  }

  auto graph = ctx.load_topology();
  const AsId dst = cfg::as_id(ctx.config, "dest");
  const auto n_probes = cfg::u64(ctx.config, "probes");
  const auto n_days = cfg::u64(ctx.config, "days");
  const auto churn_add = cfg::u64_or(ctx.config, "churn_add", 2);
  const auto churn_remove = cfg::u64_or(ctx.config, "churn_remove", 2);

  return run_trials(n_trials, threads, [&](std::size_t t) {
    Rng rng = derive_rng(ctx.seed, t);
    std::vector<std::pair<std::string, AsId>> probes;
    for (std::uint64_t i = 0; i < n_probes; ++i) {
      char buf[24];
      std::snprintf(buf, sizeof(buf), "p%04llu", static_cast<unsigned long long>(i + 1));
      AsId origin = dst;
      while (origin == dst) origin = graph.ases()[rng.uniform_index(graph.size())];
      probes.emplace_back(buf, origin);
    }
    std::vector<attacks::RouteChangeRecord> records;
    topology::AsGraph current = graph;
    for (std::uint64_t day = 0; day < n_days; ++day) {
      if (day > 0) current = synth::mutate_peer_edges(current, churn_add, churn_remove, rng);
      topology::RoutingState rs(current, dst);
      for (const auto& [probe, origin] : probes) {
        auto p = rs.path_from(origin);
        if (!p || p->size() < 2) continue;
        records.push_back(
            {probe, static_cast<std::int64_t>(day), origin, (*p)[p->size() - 2]});
      }
    }
    auto analysis = attacks::route_change_analysis(records);
    std::vector<ResultRow> rows;
    const auto trial = detail::u32_checked(t);
    for (std::size_t i = 0; i < analysis.changes.size(); ++i) {
      rows.push_back({trial, detail::u32_checked(i), "before_size",
                      static_cast<double>(analysis.changes[i].before_size)});
      rows.push_back({trial, detail::u32_checked(i), "after_size",
                      static_cast<double>(analysis.changes[i].after_size)});
    }
    return rows;
  });
}

}  // namespace detail

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{
      "vanilla-mobility", "cr-mobility",   "denasa-mobility", "hornet-mobility",
      "denasa-inference", "cr-inference",  "dovetail",        "phi",
      "taps",             "hornet-routing"};
  return kinds;
}

struct RunOptions {
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
};

struct RunResult {
  std::string csv;
  json meta;
  std::filesystem::path csv_path;
  std::filesystem::path meta_path;
};

inline RunResult run_experiment(const std::filesystem::path& config_path,
                                const RunOptions& opts = {}) {
  const std::string raw = read_file(config_path);
  json config;
  try {
    config = json::parse(raw);
  } catch (const json::exception& e) {
    throw ConfigError(config_path.string() + ": " + e.what());
  }

  ExperimentContext ctx;
  ctx.config_dir = config_path.has_parent_path() ? config_path.parent_path()
                                                 : std::filesystem::path(".");
  ctx.config = config;

  const std::string kind = cfg::str(config, "kind");
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
    throw ConfigError("unknown experiment kind `" + kind + "`");
  ctx.seed = cfg::u64(config, "seed");

  std::vector<ResultRow> rows;
  if (kind == "vanilla-mobility" || kind == "cr-mobility" || kind == "denasa-mobility")
    rows = detail::run_mobility_kind(ctx, kind, opts.threads);
  else if (kind == "hornet-mobility")
    rows = detail::run_hornet_mobility(ctx);
  else if (kind == "denasa-inference" || kind == "cr-inference")
    rows = detail::run_guard_inference(ctx, kind, opts.threads);
  else if (kind == "dovetail")
    rows = detail::run_dovetail(ctx, opts.threads);
  else if (kind == "phi")
    rows = detail::run_phi(ctx, opts.threads);
  else if (kind == "taps")
    rows = detail::run_taps(ctx, opts.threads);
  else
    rows = detail::run_hornet_routing(ctx, opts.threads);

  RunResult result;
  result.csv = rows_to_csv(std::move(rows));
  result.meta = json{{"kind", kind},
                     {"seed", ctx.seed},
                     {"config_hash", hex64(fnv1a64(raw))},
                     {"version", kVersion},
                     {"n_rows", std::count(result.csv.begin(), result.csv.end(), '\n') - 1}};

  const std::string stem = config_path.stem().string();
  std::filesystem::create_directories(opts.out_dir);
  result.csv_path = opts.out_dir / (stem + ".csv");
  result.meta_path = opts.out_dir / (stem + ".meta.json");
  {
    std::ofstream out(result.csv_path, std::ios::binary);
    out << result.csv;
  }
  {
    std::ofstream out(result.meta_path, std::ios::binary);
    out << result.meta.dump(2) << "\n";
  }
  return result;
}

// Quartile summaries of `value` grouped by a result-table column, one row
// per (metric, group).
inline std::string summarize_csv(const std::string& results_csv,
                                 const std::string& group_by) {
  const auto lines = csv::split_lines(results_csv);
  if (lines.empty()) throw ValidationError("empty results table");
  const auto header = csv::split_fields(lines[0], ',');
  std::size_t group_col = header.size();
  std::size_t metric_col = header.size();
  std::size_t value_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (csv::trim(header[i]) == group_by) group_col = i;
    if (csv::trim(header[i]) == "metric") metric_col = i;
    if (csv::trim(header[i]) == "value") value_col = i;
  }
  if (group_col == header.size())
    throw ValidationError("unknown column `" + group_by + "`");
  if (metric_col == header.size() || value_col == header.size())
    throw ValidationError("results table must have `metric` and `value` columns");

  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (csv::trim(lines[i]).empty()) continue;
    const auto f = csv::split_fields(lines[i], ',');
    if (f.size() != header.size())
      throw ParseError(i + 1, "row width differs from header");
    double v = 0.0;
    if (!csv::parse_double(f[value_col], v))
      throw ParseError(i + 1, "bad value `" + std::string(f[value_col]) + "`");
    groups[{std::string(f[metric_col]), std::string(f[group_col])}].push_back(v);
  }

  std::string out = "metric," + group_by + ",n,q1,median,q3,band_lo,band_hi\n";
  for (const auto& [key, values] : groups) {
    auto s = metrics::quartile_summary(values);
    out += key.first + "," + key.second + "," + std::to_string(s.n) + "," +
           csv::format_double(s.q1) + "," + csv::format_double(s.median) + "," +
           csv::format_double(s.q3) + "," + csv::format_double(s.band_lo) + "," +
           csv::format_double(s.band_hi) + "\n";
  }
  return out;
}

}  // namespace anonsim::experiment
