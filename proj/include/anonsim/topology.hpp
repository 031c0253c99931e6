#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "anonsim/common.hpp"
#include "anonsim/csv.hpp"

namespace anonsim::topology {

enum class RelKind : std::uint8_t {
  ProviderCustomer,  // a provides b
  PeerPeer,
};

struct Relationship {
  AsId a = 0;
  AsId b = 0;
  RelKind kind = RelKind::PeerPeer;
};

// Role of a path step x -> y.
enum class LinkRole : std::uint8_t {
  Up,    // customer -> provider
  Peer,  // peer -> peer
  Down,  // provider -> customer
};

// Immutable annotated AS-relationship graph. Adjacency is indexed by role;
// the provider->customer relation is validated acyclic at construction.
// Safe for unrestricted concurrent reads.
class AsGraph {
 public:
  static AsGraph from_edges(const std::vector<Relationship>& edges,
                            const std::vector<AsId>& extra_nodes = {}) {
    AsGraph g;
    g.build(edges, extra_nodes);
    return g;
  }

  // CAIDA serial-2 relationship text: `as1|as2|rel` with rel -1 (as1
  // provides as2) or 0 (peers); `#` starts a comment line.
  static AsGraph parse_serial2(std::string_view text) {
    std::vector<Relationship> edges;
    const auto lines = csv::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::size_t lineno = i + 1;
      std::string_view line = csv::trim(lines[i]);
      if (line.empty() || line.front() == '#') continue;
      const auto fields = csv::split_fields(line, '|');
      if (fields.size() != 3)
        throw ParseError(lineno, "expected `as1|as2|rel`");
      AsId a = 0, b = 0;
      int rel = 0;
      if (!csv::parse_int(fields[0], a) || a < 1)
        throw ParseError(lineno, "bad AS number `" + std::string(fields[0]) + "`");
      if (!csv::parse_int(fields[1], b) || b < 1)
        throw ParseError(lineno, "bad AS number `" + std::string(fields[1]) + "`");
      if (!csv::parse_int(fields[2], rel) || (rel != -1 && rel != 0))
        throw ParseError(lineno, "bad relationship code `" + std::string(fields[2]) + "`");
      if (a == b) throw ParseError(lineno, "self-loop on AS " + std::to_string(a));
      edges.push_back({a, b, rel == -1 ? RelKind::ProviderCustomer : RelKind::PeerPeer});
    }
    return from_edges(edges);
  }

  std::size_t size() const { return ases_.size(); }
  const std::vector<AsId>& ases() const { return ases_; }
  std::size_t n_edges() const { return n_edges_; }

  bool contains(AsId as) const { return id_to_idx_.count(as) != 0; }

  std::size_t index_of(AsId as) const {
    auto it = id_to_idx_.find(as);
    if (it == id_to_idx_.end()) throw UnknownAsError(as);
    return it->second;
  }

  AsId as_at(std::size_t idx) const { return ases_[idx]; }

  // Adjacency by dense index, each list sorted by AS number.
  const std::vector<std::uint32_t>& providers_idx(std::size_t i) const { return providers_[i]; }
  const std::vector<std::uint32_t>& customers_idx(std::size_t i) const { return customers_[i]; }
  const std::vector<std::uint32_t>& peers_idx(std::size_t i) const { return peers_[i]; }

  std::vector<AsId> providers_of(AsId as) const { return to_ids(providers_[index_of(as)]); }
  std::vector<AsId> customers_of(AsId as) const { return to_ids(customers_[index_of(as)]); }
  std::vector<AsId> peers_of(AsId as) const { return to_ids(peers_[index_of(as)]); }

  // Role of step x -> y, or nullopt when no edge connects them.
  std::optional<LinkRole> role_between(AsId x, AsId y) const {
    return role_between_idx(index_of(x), index_of(y));
  }

  std::optional<LinkRole> role_between_idx(std::size_t xi, std::size_t yi) const {
    if (sorted_contains(providers_[xi], static_cast<std::uint32_t>(yi))) return LinkRole::Up;
    if (sorted_contains(customers_[xi], static_cast<std::uint32_t>(yi))) return LinkRole::Down;
    if (sorted_contains(peers_[xi], static_cast<std::uint32_t>(yi))) return LinkRole::Peer;
    return std::nullopt;
  }

  // Dense indices in provider-before-customer order (tops first).
  const std::vector<std::uint32_t>& topo_order() const { return topo_order_; }

  // Serializes back to serial-2 with deterministic line order.
  std::string to_serial2() const {
    std::vector<Relationship> edges;
    edges.reserve(n_edges_);
    for (std::size_t i = 0; i < ases_.size(); ++i) {
      for (std::uint32_t c : customers_[i])
        edges.push_back({ases_[i], ases_[c], RelKind::ProviderCustomer});
      for (std::uint32_t p : peers_[i])
        if (ases_[i] < ases_[p])
          edges.push_back({ases_[i], ases_[p], RelKind::PeerPeer});
    }
    std::sort(edges.begin(), edges.end(), [](const auto& l, const auto& r) {
      if (l.a != r.a) return l.a < r.a;
      if (l.b != r.b) return l.b < r.b;
      return l.kind < r.kind;
    });
    std::string out;
    for (const auto& e : edges) {
      out += std::to_string(e.a);
      out += '|';
      out += std::to_string(e.b);
      out += e.kind == RelKind::ProviderCustomer ? "|-1\n" : "|0\n";
    }
    return out;
  }

 private:
  void build(const std::vector<Relationship>& edges,
             const std::vector<AsId>& extra_nodes) {
    for (const auto& e : edges) {
      if (e.a == e.b) throw ValidationError("self-loop on AS " + std::to_string(e.a));
      if (e.a < 1 || e.b < 1) throw ValidationError("AS numbers must be >= 1");
      add_as(e.a);
      add_as(e.b);
    }
    for (AsId as : extra_nodes) {
      if (as < 1) throw ValidationError("AS numbers must be >= 1");
      add_as(as);
    }
    std::sort(ases_.begin(), ases_.end());
    ases_.erase(std::unique(ases_.begin(), ases_.end()), ases_.end());
    id_to_idx_.reserve(ases_.size() * 2);
    for (std::size_t i = 0; i < ases_.size(); ++i) id_to_idx_[ases_[i]] = i;

    providers_.assign(ases_.size(), {});
    customers_.assign(ases_.size(), {});
    peers_.assign(ases_.size(), {});

    // kind per unordered pair: 0 peer, 1 = lower provides higher, 2 = higher
    // provides lower. Conflicting duplicates are rejected; identical
    // duplicates collapse.
    std::unordered_map<std::uint64_t, int> seen;
    seen.reserve(edges.size() * 2);
    for (const auto& e : edges) {
      const std::uint32_t ai = static_cast<std::uint32_t>(id_to_idx_[e.a]);
      const std::uint32_t bi = static_cast<std::uint32_t>(id_to_idx_[e.b]);
      const std::uint64_t key =
          (static_cast<std::uint64_t>(std::min(ai, bi)) << 32) | std::max(ai, bi);
      int kind;
      if (e.kind == RelKind::PeerPeer)
        kind = 0;
      else
        kind = (ai < bi) ? 1 : 2;
      auto [it, inserted] = seen.emplace(key, kind);
      if (!inserted) {
        if (it->second != kind)
          throw ValidationError("conflicting relationships between AS " +
                                std::to_string(e.a) + " and AS " + std::to_string(e.b));
        continue;
      }
      if (e.kind == RelKind::PeerPeer) {
        peers_[ai].push_back(bi);
        peers_[bi].push_back(ai);
      } else {
        customers_[ai].push_back(bi);
        providers_[bi].push_back(ai);
      }
      ++n_edges_;
    }
    for (auto& v : providers_) std::sort(v.begin(), v.end());
    for (auto& v : customers_) std::sort(v.begin(), v.end());
    for (auto& v : peers_) std::sort(v.begin(), v.end());
    compute_topo_order();
  }

  void add_as(AsId as) {
    if (id_to_idx_.emplace(as, 0).second) ases_.push_back(as);
  }

  // Kahn over provider->customer edges; doubles as the acyclicity check.
  void compute_topo_order() {
    std::vector<std::uint32_t> indeg(ases_.size(), 0);
    for (std::size_t i = 0; i < ases_.size(); ++i)
      indeg[i] = static_cast<std::uint32_t>(providers_[i].size());
    std::vector<std::uint32_t> queue;
    for (std::size_t i = 0; i < ases_.size(); ++i)
      if (indeg[i] == 0) queue.push_back(static_cast<std::uint32_t>(i));
    // queue stays sorted: nodes enter in increasing discovery order, and we
    // re-sort each wave so the order is a deterministic function of the graph.
    topo_order_.clear();
    std::size_t head = 0;
    while (head < queue.size()) {
      std::sort(queue.begin() + head, queue.end());
      std::uint32_t u = queue[head++];
      topo_order_.push_back(u);
      for (std::uint32_t c : customers_[u])
        if (--indeg[c] == 0) queue.push_back(c);
    }
    if (topo_order_.size() != ases_.size())
      throw ValidationError("provider-customer relation contains a cycle");
  }

  static bool sorted_contains(const std::vector<std::uint32_t>& v, std::uint32_t x) {
    return std::binary_search(v.begin(), v.end(), x);
  }

  std::vector<AsId> to_ids(const std::vector<std::uint32_t>& idxs) const {
    std::vector<AsId> out;
    out.reserve(idxs.size());
    for (auto i : idxs) out.push_back(ases_[i]);
    return out;
  }

  std::vector<AsId> ases_;
  std::unordered_map<AsId, std::size_t> id_to_idx_;
  std::vector<std::vector<std::uint32_t>> providers_;
  std::vector<std::vector<std::uint32_t>> customers_;
  std::vector<std::vector<std::uint32_t>> peers_;
  std::vector<std::uint32_t> topo_order_;
  std::size_t n_edges_ = 0;
};

// True iff every consecutive pair shares an edge, no AS repeats, and the
// role sequence climbs, crosses at most `max_peer_links` peer edges, then
// descends (uphill* peer* downhill* with the peer count bounded).
// Throws UnknownAsError for ASes outside the graph.
inline bool validate_path(const AsGraph& g, const AsPath& path,
                          std::size_t max_peer_links) {
  std::vector<std::size_t> idx(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) idx[i] = g.index_of(path[i]);
  if (path.size() < 2) return true;

  for (std::size_t i = 0; i < path.size(); ++i)
    for (std::size_t j = i + 1; j < path.size(); ++j)
      if (path[i] == path[j]) return false;

  int phase = 0;  // 0 climbing, 1 crossing peers, 2 descending
  std::size_t peers_used = 0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    auto role = g.role_between_idx(idx[i], idx[i + 1]);
    if (!role) return false;
    switch (*role) {
      case LinkRole::Up:
        if (phase != 0) return false;
        break;
      case LinkRole::Peer:
        if (phase == 2 || ++peers_used > max_peer_links) return false;
        phase = 1;
        break;
      case LinkRole::Down:
        phase = 2;
        break;
    }
  }
  return true;
}

// ASes with no customers: the possible client ISPs.
inline std::vector<AsId> client_isp_ases(const AsGraph& g) {
  std::vector<AsId> out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.customers_idx(i).empty()) out.push_back(g.as_at(i));
  return out;
}

}  // namespace anonsim::topology
