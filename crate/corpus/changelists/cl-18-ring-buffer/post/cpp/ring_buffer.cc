// SPDX-License-Identifier: Apache-2.0
#include "ring_buffer.h"

namespace io {

bool RingBuffer::Push(uint8_t byte) {
  DCHECK_GT(capacity_, 0);
  if (size_ == capacity_) {
    overflow_++;
    metrics_->overflow->Increment();
    VLOG(2) << "overflow at size " << size_;
    return false;
  }
  data_[(head_ + size_) % capacity_] = byte;
  size_++;
  return true;
}

std::optional<uint8_t> RingBuffer::Pop() {
  if (size_ == 0) {
    VLOG(3) << "pop on empty buffer";
    return std::nullopt;
  }
  uint8_t b = data_[head_];
  head_ = (head_ + 1) % capacity_;
  size_--;
  return b;
}

size_t RingBuffer::Drain(uint8_t* out, size_t max) {
  TRACE_EVENT("io", "RingBuffer::Drain");
  DCHECK(out != nullptr);
  size_t n = 0;
  while (n < max && size_ > 0) {
    out[n] = data_[head_];
    head_ = (head_ + 1) % capacity_;
    size_--;
    n++;
  }
  VLOG(3) << "drained " << n;
  metrics_->drained->IncrementBy(n);
  return n;
}

}  // namespace io
