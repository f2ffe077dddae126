// SPDX-License-Identifier: Apache-2.0
#include "histogram.h"

#include <algorithm>

namespace metrics {

void Histogram::Add(double value) {
  DCHECK(std::isfinite(value));
  int bucket = static_cast<int>((value - min_) / width_);
  bucket = std::clamp(bucket, 0, num_buckets_ - 1);
  VLOG(3) << "value " << value << " -> bucket " << bucket;
  counts_[bucket]++;
  total_++;
  sum_ += value;
  if (value > max_seen_) {
    max_seen_ = value;
  }
}

double Histogram::Mean() const {
  if (total_ == 0) {
    return 0;
  }
  return sum_ / total_;
}

double Histogram::Percentile(double p) const {
  TRACE_EVENT("metrics", "Histogram::Percentile");
  DCHECK(p >= 0 && p <= 100);
  int64_t target = static_cast<int64_t>(p / 100 * total_);
  int64_t seen = 0;
  for (int i = 0; i < num_buckets_; ++i) {
    seen += counts_[i];
    if (seen >= target) {
      VLOG(2) << "p" << p << " in bucket " << i;
      return min_ + (i + 0.5) * width_;
    }
  }
  LOG(WARNING) << "percentile " << p << " fell through";
  return max_seen_;
}

void Histogram::Merge(const Histogram& other) {
  TRACE_EVENT("metrics", "Histogram::Merge");
  CHECK_EQ(num_buckets_, other.num_buckets_);
  CHECK_EQ(width_, other.width_);
  for (int i = 0; i < num_buckets_; ++i) {
    counts_[i] += other.counts_[i];
  }
  total_ += other.total_;
  sum_ += other.sum_;
  max_seen_ = std::max(max_seen_, other.max_seen_);
  LOG(INFO) << "merged histogram, total " << total_;
  merges_->Increment();
}

}  // namespace metrics
