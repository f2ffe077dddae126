// SPDX-License-Identifier: Apache-2.0
#include <cstdio>

#include "buffer.h"

int main() {
  Buffer b;
  b.Append("abc");
  if (b.Size() != 3) {
    std::fprintf(stderr, "size %zu, want 3\n", b.Size());
    return 1;
  }
  return 0;
}
