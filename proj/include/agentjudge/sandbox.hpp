#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <mutex>
#include <string>

namespace agentjudge {

struct SandboxOptions {
  std::chrono::seconds timeout{30};
  std::size_t memory_limit_bytes = std::size_t{1} << 30;
  std::string interpreter = "python3";
  /// Refuse to run when no network namespace can be created.
  bool require_network_isolation = true;
};

struct SandboxResult {
  int exit_code = -1;
  bool timed_out = false;
  bool network_isolated = false;
  std::string output;
};

/// Runs untrusted scripts in a child process with no network, a scratch
/// working directory, memory and CPU limits and a wall-clock timeout.
/// Runs are serialized.
class Sandbox {
 public:
  explicit Sandbox(SandboxOptions options = {}) : options_(std::move(options)) {}

  /// Writes `files` into the scratch directory, then runs `script` there.
  /// Output is stdout and stderr combined, capped at 64 KiB. Throws
  /// HandlerError when isolation is required but unavailable.
  SandboxResult run_python(const std::string& script,
                           const std::map<std::string, std::string>& files);

  const SandboxOptions& options() const noexcept { return options_; }

 private:
  SandboxOptions options_;
  std::mutex mutex_;
};

}  // namespace agentjudge
