#include "agentjudge/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "agentjudge/errors.hpp"

namespace agentjudge {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kOutputCap = 64 * 1024;

// Exit codes the child uses to report setup failures before exec.
constexpr int kNoIsolation = 121;
constexpr int kExecFailed = 122;

bool enter_network_namespace() {
  if (unshare(CLONE_NEWNET) == 0) return true;
  // Unprivileged fallback: a user namespace grants CAP_SYS_ADMIN over a
  // fresh network namespace.
  return unshare(CLONE_NEWUSER | CLONE_NEWNET) == 0;
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "agentjudge-sbx-XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) throw HandlerError("cannot create sandbox directory");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

SandboxResult Sandbox::run_python(const std::string& script,
                                  const std::map<std::string, std::string>& files) {
  std::lock_guard lock(mutex_);
  TempDir dir;
  for (const auto& [name, content] : files) {
    if (name.find('/') != std::string::npos || name == "." || name == "..") {
      throw PreconditionError("sandbox file names must be plain: " + name);
    }
    std::ofstream(dir.path() / name, std::ios::binary) << content;
  }
  std::ofstream(dir.path() / "check.py", std::ios::binary) << script;
  // The child may run as an unmapped user inside a fresh user namespace.
  fs::permissions(dir.path(), fs::perms::owner_all | fs::perms::group_read |
                                  fs::perms::group_exec | fs::perms::others_read |
                                  fs::perms::others_exec);

  int pipe_fds[2];
  if (pipe2(pipe_fds, O_CLOEXEC) != 0) throw HandlerError("pipe failed");

  const std::string dir_str = dir.path().string();
  const pid_t pid = fork();
  if (pid < 0) {
    close(pipe_fds[0]);
    close(pipe_fds[1]);
    throw HandlerError("fork failed");
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(pipe_fds[1], STDOUT_FILENO);
    dup2(pipe_fds[1], STDERR_FILENO);
    int devnull = open("/dev/null", O_RDONLY);
    if (devnull >= 0) dup2(devnull, STDIN_FILENO);
    const bool isolated = enter_network_namespace();
    if (!isolated && options_.require_network_isolation) _exit(kNoIsolation);
    rlimit mem{options_.memory_limit_bytes, options_.memory_limit_bytes};
    setrlimit(RLIMIT_AS, &mem);
    const auto cpu = static_cast<rlim_t>(options_.timeout.count());
    rlimit cpu_limit{cpu, cpu + 1};
    setrlimit(RLIMIT_CPU, &cpu_limit);
    rlimit files_limit{64, 64};
    setrlimit(RLIMIT_NOFILE, &files_limit);
    if (chdir(dir_str.c_str()) != 0) _exit(kExecFailed);
    execlp(options_.interpreter.c_str(), options_.interpreter.c_str(), "-I", "check.py",
           static_cast<char*>(nullptr));
    _exit(kExecFailed);
  }

  close(pipe_fds[1]);
  SandboxResult result;
  const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
  char buf[4096];
  bool open_pipe = true;
  while (open_pipe) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      result.timed_out = true;
      break;
    }
    pollfd pfd{pipe_fds[0], POLLIN, 0};
    const int ready = poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready == 0) {
      result.timed_out = true;
      break;
    }
    const ssize_t n = read(pipe_fds[0], buf, sizeof buf);
    if (n <= 0) {
      open_pipe = false;
    } else if (result.output.size() < kOutputCap) {
      result.output.append(buf, static_cast<std::size_t>(n));
    }
  }
  close(pipe_fds[0]);
  if (result.timed_out) {
    kill(-pid, SIGKILL);
    kill(pid, SIGKILL);
  }
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (result.output.size() > kOutputCap) result.output.resize(kOutputCap);

  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  if (!result.timed_out && result.exit_code == kNoIsolation) {
    throw HandlerError("sandbox could not isolate the network");
  }
  if (!result.timed_out && result.exit_code == kExecFailed) {
    throw HandlerError("sandbox could not start " + options_.interpreter);
  }
  // Without the requirement the child may have run with networking.
  result.network_isolated = options_.require_network_isolation;
  return result;
}

}  // namespace agentjudge
