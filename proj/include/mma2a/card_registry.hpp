#pragma once

#include <chrono>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>

#include "mma2a/a2a.hpp"
#include "mma2a/clock.hpp"

namespace mma2a {

inline constexpr std::string_view kAgentCardPath = "/.well-known/agent-card.json";

/// Union of input modes across all skills of a card.
using CapabilitySet = std::set<std::string>;

CapabilitySet capability_set(const AgentCard& card);

/// Exact (case-insensitive) MIME membership, with `type/*` and `*/*` in the
/// set acting as wildcards.
bool capability_accepts(const CapabilitySet& caps, std::string_view mime);

/// GET <agent_url>/.well-known/agent-card.json. Throws network_unreachable,
/// http_status_error or card_parse_error.
AgentCard fetch_card_http(const std::string& agent_url);

struct RegistryConfig {
  std::chrono::seconds ttl{60};
  /// How long past expiry a stale card may still be served when a refetch fails.
  std::chrono::seconds stale_grace{300};
};

struct CachedCard {
  AgentCard card;
  CapabilitySet capabilities;
  Clock::time_point fetched_at;
};

/// TTL cache of Agent Cards keyed by agent URL. Safe for concurrent use;
/// concurrent misses for one URL share a single upstream fetch.
class CardRegistry {
 public:
  using Fetcher = std::function<AgentCard(const std::string& agent_url)>;
  using WarningSink = std::function<void(const std::string&)>;

  explicit CardRegistry(Fetcher fetcher = fetch_card_http, std::shared_ptr<const Clock> clock = steady_clock(),
                        RegistryConfig config = {});

  /// Always goes upstream and replaces the cached entry.
  AgentCard fetch_card(const std::string& agent_url);

  /// Cached entry if younger than the TTL, otherwise a (coalesced) refetch.
  /// A failed refetch falls back to the stale entry within the grace window.
  std::shared_ptr<const CachedCard> lookup(const std::string& agent_url);

  CapabilitySet get_capabilities(const std::string& agent_url) { return lookup(agent_url)->capabilities; }

  /// Wall-clock cost of one capability lookup (cache hit when warm).
  std::chrono::nanoseconds lookup_latency_probe(const std::string& agent_url);

  std::size_t fetch_count(const std::string& agent_url) const;
  std::size_t total_fetch_count() const;

  void set_warning_sink(WarningSink sink);
  const RegistryConfig& config() const noexcept { return config_; }

 private:
  using Entry = std::shared_ptr<const CachedCard>;

  Entry refresh(const std::string& agent_url, std::unique_lock<std::mutex>& lock);
  void warn(const std::string& message) const;

  Fetcher fetcher_;
  std::shared_ptr<const Clock> clock_;
  RegistryConfig config_;

  mutable std::mutex mutex_;
  std::map<std::string, Entry> entries_;
  std::map<std::string, std::shared_future<Entry>> inflight_;
  std::map<std::string, std::size_t> fetches_;
  WarningSink warning_sink_;
};

}  // namespace mma2a
