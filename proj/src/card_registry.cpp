#include "mma2a/card_registry.hpp"

#include <algorithm>
#include <cctype>

#include "mma2a/error.hpp"
#include "mma2a/http.hpp"

namespace mma2a {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string strip_trailing_slash(std::string url) {
  while (!url.empty() && url.back() == '/') url.pop_back();
  return url;
}

}  // namespace

CapabilitySet capability_set(const AgentCard& card) {
  CapabilitySet caps;
  for (const auto& skill : card.skills) {
    for (const auto& mode : skill.input_modes) caps.insert(lower(mode));
  }
  return caps;
}

bool capability_accepts(const CapabilitySet& caps, std::string_view mime) {
  const std::string m = lower(mime);
  if (caps.count(m) || caps.count("*/*")) return true;
  const auto slash = m.find('/');
  if (slash == std::string::npos) return false;
  return caps.count(m.substr(0, slash) + "/*") > 0;
}

AgentCard fetch_card_http(const std::string& agent_url) {
  const std::string url = strip_trailing_slash(agent_url) + std::string(kAgentCardPath);
  const HttpResponse res = http_get(url, HttpClientOptions{std::chrono::milliseconds(5'000), {}});
  if (res.status != 200) throw Error(ErrorCode::http_status_error, url + " returned " + std::to_string(res.status));
  Json j;
  try {
    j = Json::parse(res.body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::card_parse_error, url + ": " + e.what());
  }
  return card_from_json(j);
}

CardRegistry::CardRegistry(Fetcher fetcher, std::shared_ptr<const Clock> clock, RegistryConfig config)
    : fetcher_(std::move(fetcher)), clock_(std::move(clock)), config_(config) {}

AgentCard CardRegistry::fetch_card(const std::string& agent_url) {
  {
    std::lock_guard lock(mutex_);
    ++fetches_[agent_url];
  }
  AgentCard card = fetcher_(agent_url);
  auto entry = std::make_shared<const CachedCard>(CachedCard{card, capability_set(card), clock_->now()});
  std::lock_guard lock(mutex_);
  entries_[agent_url] = std::move(entry);
  return card;
}

std::shared_ptr<const CachedCard> CardRegistry::lookup(const std::string& agent_url) {
  std::unique_lock lock(mutex_);
  if (auto it = entries_.find(agent_url); it != entries_.end()) {
    if (clock_->now() - it->second->fetched_at < config_.ttl) return it->second;
  }
  return refresh(agent_url, lock);
}

CardRegistry::Entry CardRegistry::refresh(const std::string& agent_url, std::unique_lock<std::mutex>& lock) {
  if (auto it = inflight_.find(agent_url); it != inflight_.end()) {
    auto pending = it->second;
    lock.unlock();
    return pending.get();
  }

  std::promise<Entry> promise;
  inflight_[agent_url] = promise.get_future().share();
  ++fetches_[agent_url];
  lock.unlock();

  Entry fresh;
  std::exception_ptr failure;
  try {
    AgentCard card = fetcher_(agent_url);
    fresh = std::make_shared<const CachedCard>(CachedCard{card, capability_set(card), clock_->now()});
  } catch (...) {
    failure = std::current_exception();
  }

  lock.lock();
  inflight_.erase(agent_url);
  if (fresh) {
    entries_[agent_url] = fresh;
    promise.set_value(fresh);
    return fresh;
  }

  auto it = entries_.find(agent_url);
  if (it != entries_.end() && clock_->now() - it->second->fetched_at < config_.ttl + config_.stale_grace) {
    Entry stale = it->second;
    promise.set_value(stale);
    lock.unlock();
    std::string reason = "unknown error";
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      reason = e.what();
    } catch (...) {
    }
    warn("serving stale card for " + agent_url + " after refetch failure: " + reason);
    return stale;
  }
  promise.set_exception(failure);
  std::rethrow_exception(failure);
}

std::chrono::nanoseconds CardRegistry::lookup_latency_probe(const std::string& agent_url) {
  const auto start = std::chrono::steady_clock::now();
  const auto caps = get_capabilities(agent_url);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  (void)caps;
  return std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed);
}

std::size_t CardRegistry::fetch_count(const std::string& agent_url) const {
  std::lock_guard lock(mutex_);
  auto it = fetches_.find(agent_url);
  return it == fetches_.end() ? 0 : it->second;
}

std::size_t CardRegistry::total_fetch_count() const {
  std::lock_guard lock(mutex_);
  std::size_t total = 0;
  for (const auto& [url, n] : fetches_) total += n;
  return total;
}

void CardRegistry::set_warning_sink(WarningSink sink) {
  std::lock_guard lock(mutex_);
  warning_sink_ = std::move(sink);
}

void CardRegistry::warn(const std::string& message) const {
  WarningSink sink;
  {
    std::lock_guard lock(mutex_);
    sink = warning_sink_;
  }
  if (sink) sink(message);
}

}  // namespace mma2a
