// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

class Buffer {
 public:
  void Append(const std::string& s);
  Buffer View() const;
  size_t Size() const;

 private:
  std::string internal_;
};
