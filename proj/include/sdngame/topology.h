#ifndef SDNGAME_TOPOLOGY_H_
#define SDNGAME_TOPOLOGY_H_

#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sdngame {

using HostId = int;

// Agents see 0/1 slots: hosts in id order, then links in declaration order.
using Observation = std::vector<std::uint8_t>;

class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LinkKind { kHostAccess, kTrunk, kRoute };

// Endpoints of one link. For kHostAccess `a` is a host and `b` a switch; for
// kTrunk `a` is a switch and `b` a router; for kRoute both are hosts.
struct Link {
  LinkKind kind;
  int a;
  int b;
};

struct Subnet {
  int switch_id;
  std::vector<HostId> hosts;
};

struct TopologyConfig {
  static constexpr int kSchemaVersion = 1;
  static constexpr int kBackupCount = 3;

  int host_count = 0;
  std::vector<Subnet> subnets;
  std::vector<std::pair<int, int>> trunk_links;     // (switch, router)
  std::vector<std::pair<HostId, int>> host_links;   // (host, switch)
  std::vector<std::pair<HostId, HostId>> route_links;
  HostId critical_server = 0;
  std::vector<HostId> backup_hosts;
  std::set<HostId> initially_compromised;
  int s_max = 0;

  // Links in observation order: host_links, then trunk_links, then
  // route_links.
  std::vector<Link> Links() const;
  int LinkCount() const;
  int ObservationWidth() const { return host_count + LinkCount(); }
  // Indices into Links() of every link with `host` as an endpoint.
  std::vector<int> IncidentLinks(HostId host) const;
};

// Throws ConfigValidationError naming the first violated invariant.
void Validate(const TopologyConfig& cfg);

// Parses the JSON topology document. Throws ConfigParseError on malformed
// input and ConfigValidationError on invariant violations.
TopologyConfig LoadConfig(std::string_view text);
TopologyConfig LoadConfigFile(const std::filesystem::path& path);
std::string ToJson(const TopologyConfig& cfg);

// 32 hosts in subnets of 6/8/9/9 behind four switches and one router, with
// 12 cross-subnet route links: 32 + 48 = 80 observation slots.
TopologyConfig DefaultTopologyConfig();

struct NetworkState {
  std::vector<bool> compromised;  // per host
  std::vector<bool> link_active;  // per link, observation order
  HostId server_at = 0;
  std::set<HostId> flags;

  int CompromisedCount() const;
};

NetworkState InitialState(const TopologyConfig& cfg);

Observation Encode(const NetworkState& state, const TopologyConfig& cfg);

// Uncompromised hosts reachable from a compromised host over active links.
// Switches and the router forward; compromised hosts forward; an
// uncompromised host is a target, never a relay.
std::set<HostId> AttackFrontier(const NetworkState& state,
                                const TopologyConfig& cfg);

// One line per observation slot, as printed by `topo validate`.
std::string SlotLayoutTable(const TopologyConfig& cfg);

}  // namespace sdngame

#endif  // SDNGAME_TOPOLOGY_H_
