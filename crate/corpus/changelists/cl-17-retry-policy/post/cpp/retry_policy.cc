// SPDX-License-Identifier: Apache-2.0
#include "retry_policy.h"

namespace rpc {

int64_t RetryPolicy::BackoffMs(int attempt) const {
  if (attempt <= 0) {
    return 0;
  }
  int64_t delay = initial_ms_;
  for (int i = 1; i < attempt; ++i) {
    delay = delay * multiplier_;
    if (delay > max_ms_) {
      delay = max_ms_;
      break;
    }
  }
  VLOG(2) << "attempt " << attempt << " backoff " << delay;
  return delay + jitter_ms_ * (attempt % 3);
}

bool RetryPolicy::ShouldRetry(const Status& s, int attempt) const {
  TRACE_EVENT("rpc", "RetryPolicy::ShouldRetry");
  if (attempt >= max_attempts_) {
    LOG(INFO) << "giving up after " << attempt << " attempts";
    metrics_->exhausted->Increment();
    return false;
  }
  if (s.code() == Code::kUnavailable || s.code() == Code::kDeadlineExceeded) {
    VLOG(1) << "retrying " << s;
    return true;
  }
  return s.code() == Code::kAborted && retry_aborted_;
}

void RetryPolicy::Wait(int attempt) {
  int64_t ms = BackoffMs(attempt);
  VLOG(1) << "sleeping " << ms << "ms";
  absl::SleepFor(absl::Milliseconds(ms));
  total_wait_ms_ += ms;
  metrics_->wait_ms->IncrementBy(ms);
}

}  // namespace rpc
