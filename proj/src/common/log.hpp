// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace blt::log {

// Warnings go to stderr and, while a WarningCapture is alive on the calling
// thread, are also recorded so reports can embed them.
void warn(std::string_view message);

class WarningCapture {
 public:
  WarningCapture();
  ~WarningCapture();
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }

 private:
  friend void warn(std::string_view);
  std::vector<std::string> messages_;
  WarningCapture* previous_;
};

void set_stderr_enabled(bool enabled);

}  // namespace blt::log
