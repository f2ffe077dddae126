// SPDX-License-Identifier: Apache-2.0
#include "scheduler.h"

namespace jobs {

bool Scheduler::Submit(Job job) {
  TRACE_EVENT("jobs", "Scheduler::Submit");
  absl::MutexLock lock(&mu_);
  if (queue_.size() >= max_queue_) {
    LOG(WARNING) << "queue full, dropping " << job.name;
    dropped_++;
    metrics_->dropped->Increment();
    return false;
  }
  if (job.priority > kMaxPriority) {
    VLOG(1) << "clamping priority of " << job.name;
    job.priority = kMaxPriority;
  }
  queue_.push(std::move(job));
  metrics_->queued->Set(queue_.size());
  cv_.Signal();
  return true;
}

std::optional<Job> Scheduler::Next(int64_t now_ms) {
  TRACE_EVENT("jobs", "Scheduler::Next");
  absl::MutexLock lock(&mu_);
  while (!queue_.empty()) {
    Job job = queue_.top();
    queue_.pop();
    if (job.deadline_ms != 0 && job.deadline_ms < now_ms) {
      expired_++;
      metrics_->expired->Increment();
      VLOG(1) << "expired " << job.name;
      continue;
    }
    VLOG(2) << "dispatching " << job.name;
    return job;
  }
  return std::nullopt;
}

int Scheduler::Backlog() const {
  absl::MutexLock lock(&mu_);
  return static_cast<int>(queue_.size()) + running_;
}

}  // namespace jobs
