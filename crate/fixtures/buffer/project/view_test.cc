// SPDX-License-Identifier: Apache-2.0
#include "buffer.h"

// Exercises View() without looking at the result.
int main() {
  Buffer b;
  b.Append("xy");
  Buffer v = b.View();
  (void)v;
  return 0;
}
