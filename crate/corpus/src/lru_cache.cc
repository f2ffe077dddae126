// SPDX-License-Identifier: Apache-2.0
#include "lru_cache.h"

namespace cache {

std::optional<std::string> LruCache::Get(const std::string& key) {
  TRACE_EVENT("cache", "LruCache::Get");
  absl::MutexLock lock(&mu_);
  auto it = index_.find(key);
  if (it == index_.end()) {
    misses_++;
    metrics_->misses->Increment();
    VLOG(2) << "miss " << key;
    return std::nullopt;
  }
  order_.splice(order_.begin(), order_, it->second);
  hits_++;
  metrics_->hits->Increment();
  return it->second->second;
}

void LruCache::Put(const std::string& key, std::string value) {
  TRACE_EVENT("cache", "LruCache::Put");
  absl::MutexLock lock(&mu_);
  DCHECK(!key.empty());
  auto it = index_.find(key);
  if (it != index_.end()) {
    it->second->second = std::move(value);
    order_.splice(order_.begin(), order_, it->second);
    VLOG(3) << "refreshed " << key;
    return;
  }
  order_.emplace_front(key, std::move(value));
  index_[key] = order_.begin();
  index_.reserve(capacity_);
  while (index_.size() > capacity_) {
    const auto& last = order_.back();
    VLOG(1) << "evicting " << last.first;
    index_.erase(last.first);
    order_.pop_back();
    evictions_++;
    metrics_->evictions->Increment();
  }
  metrics_->size->Set(index_.size());
}

double LruCache::HitRate() const {
  int64_t total = hits_ + misses_;
  if (total == 0) {
    return 0;
  }
  return static_cast<double>(hits_) / total;
}

}  // namespace cache
