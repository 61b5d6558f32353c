// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include "common/log.hpp"

#include <atomic>
#include <iostream>

namespace blt::log {
namespace {

thread_local WarningCapture* active_capture = nullptr;
std::atomic<bool> stderr_enabled{true};

}  // namespace

WarningCapture::WarningCapture() : previous_(active_capture) { active_capture = this; }

WarningCapture::~WarningCapture() { active_capture = previous_; }

void warn(std::string_view message) {
  if (stderr_enabled.load(std::memory_order_relaxed)) {
    std::cerr << "[blt] warning: " << message << '\n';
  }
  if (active_capture != nullptr) active_capture->messages_.emplace_back(message);
}

void set_stderr_enabled(bool enabled) { stderr_enabled.store(enabled, std::memory_order_relaxed); }

}  // namespace blt::log
