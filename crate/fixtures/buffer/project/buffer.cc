// SPDX-License-Identifier: Apache-2.0
#include "buffer.h"

void Buffer::Append(const std::string& s) {
  internal_.append(s);
}

Buffer Buffer::View() const {
  Buffer buf;
  buf.Append(internal_);
  return buf;
}

size_t Buffer::Size() const {
  return internal_.size();
}
