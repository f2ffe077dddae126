// SPDX-License-Identifier: Apache-2.0
#include "rate_limiter.h"

#include <algorithm>

namespace net {

RateLimiter::RateLimiter(int capacity, int refill_per_sec)
    : capacity_(capacity), refill_per_sec_(refill_per_sec), tokens_(capacity) {
  VLOG(1) << "rate limiter capacity=" << capacity << " refill=" << refill_per_sec;
}

bool RateLimiter::TryAcquire(int64_t now_ms, int cost) {
  TRACE_EVENT("net", "RateLimiter::TryAcquire");
  DCHECK_GE(now_ms, last_ms_);
  Refill(now_ms);
  if (cost <= 0 || cost > capacity_ + burst_) {
    LOG(WARNING) << "rejecting cost " << cost;
    metrics_->invalid_cost->Increment();
    return false;
  }
  if (tokens_ >= cost) {
    tokens_ -= cost;
    VLOG(2) << "acquired " << cost << ", left " << tokens_;
    metrics_->acquired->IncrementBy(cost);
    return true;
  }
  stats_.rejected++;
  metrics_->rejected->Increment();
  VLOG(2) << "rejected, tokens " << tokens_ << " < " << cost;
  return false;
}

void RateLimiter::Refill(int64_t now_ms) {
  if (last_ms_ == 0) {
    last_ms_ = now_ms;
    return;
  }
  int64_t elapsed = now_ms - last_ms_;
  int added = static_cast<int>(elapsed * refill_per_sec_ / 1000);
  VLOG(3) << "refill elapsed=" << elapsed << " added=" << added;
  if (added > 0) {
    tokens_ = std::min(capacity_, tokens_ + added);
    last_ms_ = now_ms;
    metrics_->tokens->Set(tokens_);
  }
}

double RateLimiter::Utilization() const {
  if (capacity_ == 0) return 0.0;
  return 1.0 - static_cast<double>(tokens_) / capacity_;
}

}  // namespace net
