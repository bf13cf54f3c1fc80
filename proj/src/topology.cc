#include "sdngame/topology.h"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace sdngame {

namespace {

using nlohmann::json;

void Require(bool ok, const std::string& what) {
  if (!ok) throw ConfigValidationError(what);
}

bool InRange(const TopologyConfig& cfg, HostId h) {
  return h >= 0 && h < cfg.host_count;
}

template <typename T>
T Field(const json& doc, const char* key) {
  if (!doc.contains(key)) {
    throw ConfigParseError(std::string("missing field '") + key + "'");
  }
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigParseError(std::string("field '") + key + "': " + e.what());
  }
}

// Graph node numbering for reachability: hosts first, then switches, then
// routers.
struct NodeMap {
  std::map<int, int> switch_node;
  std::map<int, int> router_node;
  int node_count = 0;

  explicit NodeMap(const TopologyConfig& cfg) {
    node_count = cfg.host_count;
    for (const auto& s : cfg.subnets) switch_node.emplace(s.switch_id, node_count++);
    for (const auto& [sw, router] : cfg.trunk_links) {
      if (router_node.emplace(router, node_count).second) ++node_count;
    }
  }

  std::pair<int, int> Endpoints(const Link& link) const {
    switch (link.kind) {
      case LinkKind::kHostAccess:
        return {link.a, switch_node.at(link.b)};
      case LinkKind::kTrunk:
        return {switch_node.at(link.a), router_node.at(link.b)};
      case LinkKind::kRoute:
        return {link.a, link.b};
    }
    return {-1, -1};
  }
};

const char* KindName(LinkKind kind) {
  switch (kind) {
    case LinkKind::kHostAccess: return "host";
    case LinkKind::kTrunk: return "trunk";
    case LinkKind::kRoute: return "route";
  }
  return "?";
}

}  // namespace

std::vector<Link> TopologyConfig::Links() const {
  std::vector<Link> links;
  links.reserve(LinkCount());
  for (const auto& [h, s] : host_links) links.push_back({LinkKind::kHostAccess, h, s});
  for (const auto& [s, r] : trunk_links) links.push_back({LinkKind::kTrunk, s, r});
  for (const auto& [a, b] : route_links) links.push_back({LinkKind::kRoute, a, b});
  return links;
}

int TopologyConfig::LinkCount() const {
  return static_cast<int>(host_links.size() + trunk_links.size() +
                          route_links.size());
}

std::vector<int> TopologyConfig::IncidentLinks(HostId host) const {
  std::vector<int> out;
  int index = 0;
  for (const auto& [h, s] : host_links) {
    if (h == host) out.push_back(index);
    ++index;
  }
  index += static_cast<int>(trunk_links.size());
  for (const auto& [a, b] : route_links) {
    if (a == host || b == host) out.push_back(index);
    ++index;
  }
  return out;
}

void Validate(const TopologyConfig& cfg) {
  Require(cfg.host_count >= 1, "host_count must be at least 1");
  Require(cfg.s_max >= 1, "s_max must be at least 1");

  std::map<int, int> subnet_of_host;
  std::set<int> switches;
  for (const auto& subnet : cfg.subnets) {
    Require(switches.insert(subnet.switch_id).second,
            "subnet switch ids must be unique (switch " +
                std::to_string(subnet.switch_id) + " repeated)");
    for (HostId h : subnet.hosts) {
      Require(InRange(cfg, h), "subnet host id " + std::to_string(h) + " out of range");
      Require(subnet_of_host.emplace(h, subnet.switch_id).second,
              "host " + std::to_string(h) + " belongs to more than one subnet");
    }
  }
  Require(static_cast<int>(subnet_of_host.size()) == cfg.host_count,
          "every host must belong to exactly one subnet");

  for (const auto& [sw, router] : cfg.trunk_links) {
    Require(switches.count(sw) == 1,
            "trunk link references unknown switch " + std::to_string(sw));
    Require(router >= 0, "router ids must be non-negative");
  }
  std::set<std::pair<int, int>> seen_trunks(cfg.trunk_links.begin(), cfg.trunk_links.end());
  Require(seen_trunks.size() == cfg.trunk_links.size(), "duplicate trunk link");

  std::set<std::pair<int, int>> seen_access;
  for (const auto& [h, sw] : cfg.host_links) {
    Require(InRange(cfg, h), "host link references host " + std::to_string(h) + " out of range");
    Require(switches.count(sw) == 1,
            "host link references unknown switch " + std::to_string(sw));
    Require(subnet_of_host.at(h) == sw,
            "host " + std::to_string(h) + " linked to a switch outside its subnet");
    Require(seen_access.emplace(h, sw).second, "duplicate host link");
  }

  std::set<std::pair<int, int>> seen_routes;
  for (const auto& [a, b] : cfg.route_links) {
    Require(InRange(cfg, a) && InRange(cfg, b), "route link host id out of range");
    Require(a != b, "route link must join two distinct hosts");
    Require(seen_routes.emplace(std::min(a, b), std::max(a, b)).second,
            "duplicate route link");
  }

  Require(InRange(cfg, cfg.critical_server), "critical_server out of range");

  Require(static_cast<int>(cfg.backup_hosts.size()) == TopologyConfig::kBackupCount,
          "backup_hosts must list exactly 3 hosts");
  std::set<HostId> backups;
  for (HostId b : cfg.backup_hosts) {
    Require(InRange(cfg, b), "backup host " + std::to_string(b) + " out of range");
    Require(b != cfg.critical_server, "backup_hosts must exclude the critical server");
    Require(backups.insert(b).second, "backup_hosts must be distinct");
  }

  Require(!cfg.initially_compromised.empty(), "initially_compromised must be non-empty");
  for (HostId h : cfg.initially_compromised) {
    Require(InRange(cfg, h), "initially compromised host " + std::to_string(h) + " out of range");
    Require(h != cfg.critical_server,
            "initially_compromised must exclude the critical server");
  }
}

TopologyConfig LoadConfig(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigParseError(e.what());
  }
  if (!doc.is_object()) throw ConfigParseError("topology document must be an object");

  const int version = Field<int>(doc, "schema_version");
  if (version != TopologyConfig::kSchemaVersion) {
    throw ConfigParseError("unsupported schema_version " + std::to_string(version));
  }

  TopologyConfig cfg;
  cfg.host_count = Field<int>(doc, "host_count");
  cfg.s_max = doc.contains("s_max") ? Field<int>(doc, "s_max") : cfg.host_count;
  for (const auto& entry : Field<json>(doc, "subnets")) {
    cfg.subnets.push_back({Field<int>(entry, "switch"),
                           Field<std::vector<int>>(entry, "hosts")});
  }
  cfg.trunk_links = Field<std::vector<std::pair<int, int>>>(doc, "trunk_links");
  cfg.host_links = Field<std::vector<std::pair<int, int>>>(doc, "host_links");
  cfg.route_links = Field<std::vector<std::pair<int, int>>>(doc, "route_links");
  cfg.critical_server = Field<int>(doc, "critical_server");
  cfg.backup_hosts = Field<std::vector<int>>(doc, "backup_hosts");
  const auto compromised = Field<std::vector<int>>(doc, "initially_compromised");
  cfg.initially_compromised = {compromised.begin(), compromised.end()};

  Validate(cfg);
  return cfg;
}

TopologyConfig LoadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return LoadConfig(text.str());
}

std::string ToJson(const TopologyConfig& cfg) {
  json doc;
  doc["schema_version"] = TopologyConfig::kSchemaVersion;
  doc["host_count"] = cfg.host_count;
  doc["s_max"] = cfg.s_max;
  doc["subnets"] = json::array();
  for (const auto& s : cfg.subnets) {
    doc["subnets"].push_back({{"switch", s.switch_id}, {"hosts", s.hosts}});
  }
  doc["trunk_links"] = cfg.trunk_links;
  doc["host_links"] = cfg.host_links;
  doc["route_links"] = cfg.route_links;
  doc["critical_server"] = cfg.critical_server;
  doc["backup_hosts"] = cfg.backup_hosts;
  doc["initially_compromised"] = cfg.initially_compromised;
  return doc.dump(2) + "\n";
}

TopologyConfig DefaultTopologyConfig() {
  TopologyConfig cfg;
  cfg.host_count = 32;
  cfg.s_max = 32;
  const int sizes[] = {6, 8, 9, 9};
  HostId next = 0;
  for (int sw = 0; sw < 4; ++sw) {
    Subnet subnet{sw, {}};
    for (int i = 0; i < sizes[sw]; ++i) {
      subnet.hosts.push_back(next);
      cfg.host_links.emplace_back(next, sw);
      ++next;
    }
    cfg.subnets.push_back(std::move(subnet));
    cfg.trunk_links.emplace_back(sw, 0);
  }
  // Subnet 1 (0-5) -> subnets 2 and 3, subnet 2 (6-13) -> 3 and 4,
  // subnet 3 (14-22) -> 4.
  cfg.route_links = {{0, 6},   {1, 7},   {2, 14},  {3, 15},
                     {4, 8},   {5, 16},  {9, 17},  {10, 23},
                     {11, 18}, {12, 24}, {19, 25}, {20, 26}};
  cfg.critical_server = 31;
  cfg.backup_hosts = {13, 22, 30};
  cfg.initially_compromised = {0, 1};
  return cfg;
}

int NetworkState::CompromisedCount() const {
  return static_cast<int>(std::count(compromised.begin(), compromised.end(), true));
}

NetworkState InitialState(const TopologyConfig& cfg) {
  NetworkState state;
  state.compromised.assign(cfg.host_count, false);
  for (HostId h : cfg.initially_compromised) state.compromised[h] = true;
  state.link_active.assign(cfg.LinkCount(), true);
  state.server_at = cfg.critical_server;
  state.flags = cfg.initially_compromised;
  return state;
}

Observation Encode(const NetworkState& state, const TopologyConfig& cfg) {
  Observation obs;
  obs.reserve(cfg.ObservationWidth());
  for (int h = 0; h < cfg.host_count; ++h) obs.push_back(state.compromised[h] ? 0 : 1);
  for (bool active : state.link_active) obs.push_back(active ? 1 : 0);
  return obs;
}

std::set<HostId> AttackFrontier(const NetworkState& state, const TopologyConfig& cfg) {
  const NodeMap nodes(cfg);
  const auto links = cfg.Links();
  std::vector<std::vector<int>> adjacency(nodes.node_count);
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (!state.link_active[i]) continue;
    const auto [u, v] = nodes.Endpoints(links[i]);
    adjacency[u].push_back(v);
    adjacency[v].push_back(u);
  }

  std::vector<bool> visited(nodes.node_count, false);
  std::queue<int> pending;
  for (int h = 0; h < cfg.host_count; ++h) {
    if (state.compromised[h]) {
      visited[h] = true;
      pending.push(h);
    }
  }
  std::set<HostId> frontier;
  while (!pending.empty()) {
    const int u = pending.front();
    pending.pop();
    for (int v : adjacency[u]) {
      if (visited[v]) continue;
      visited[v] = true;
      if (v < cfg.host_count && !state.compromised[v]) {
        frontier.insert(v);
        continue;
      }
      pending.push(v);
    }
  }
  return frontier;
}

std::string SlotLayoutTable(const TopologyConfig& cfg) {
  std::ostringstream out;
  out << "slot  kind   endpoints\n";
  int slot = 0;
  for (int h = 0; h < cfg.host_count; ++h, ++slot) {
    out << std::setw(4) << slot << "  " << std::left << std::setw(5) << "node"
        << std::right << "  host " << h;
    if (h == cfg.critical_server) out << " [critical server]";
    if (std::find(cfg.backup_hosts.begin(), cfg.backup_hosts.end(), h) !=
        cfg.backup_hosts.end()) {
      out << " [backup]";
    }
    if (cfg.initially_compromised.count(h)) out << " [initially compromised]";
    out << "\n";
  }
  for (const Link& link : cfg.Links()) {
    out << std::setw(4) << slot++ << "  " << std::left << std::setw(5)
        << KindName(link.kind) << std::right << "  ";
    switch (link.kind) {
      case LinkKind::kHostAccess:
        out << "host " << link.a << " - switch " << link.b;
        break;
      case LinkKind::kTrunk:
        out << "switch " << link.a << " - router " << link.b;
        break;
      case LinkKind::kRoute:
        out << "host " << link.a << " - host " << link.b;
        break;
    }
    out << "\n";
  }
  out << "hosts=" << cfg.host_count << " links=" << cfg.LinkCount()
      << " width=" << cfg.ObservationWidth() << "\n";
  return out.str();
}

}  // namespace sdngame
