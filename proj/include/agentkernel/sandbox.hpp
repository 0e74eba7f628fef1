#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

#include "agentkernel/types.hpp"

namespace agentkernel {

struct SandboxLimits {
    std::chrono::milliseconds wall_clock{10'000};
    std::size_t memory_mb = 512;
    std::string python = "python3";
};

/// Run Python `tests` (functions named test_*) against `code` in a child process confined to a
/// scratch directory, with CPU, address-space, and wall-clock limits. The child reports
/// {total, passed, failures[]} as one JSON document on a dedicated pipe.
///
/// A wall-clock overrun yields a report with a single "timeout" failure. Failure to start the
/// interpreter throws SandboxError.
TestReport run_unit_tests(const std::string& code, const std::string& tests,
                          const SandboxLimits& limits = {});

/// Body of the first fenced code block (``` ... ```), if any.
std::optional<std::string> extract_code(std::string_view text);

} // namespace agentkernel
