#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <sys/types.h>
#include <vector>

namespace skyshard {

/// Child process with its stdout on a pipe. The destructor kills and reaps a
/// child that is still running.
class ChildProcess {
 public:
  ChildProcess() = default;
  /// argv[0] is the executable path. Throws IoError.
  static ChildProcess spawn(const std::vector<std::string>& argv, bool merge_stderr = false);
  ~ChildProcess();
  ChildProcess(ChildProcess&& o) noexcept;
  ChildProcess& operator=(ChildProcess&& o) noexcept;
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  pid_t pid() const { return pid_; }
  bool running() const { return pid_ > 0; }
  /// One line of stdout without the newline; empty string at EOF.
  std::string read_line();
  /// Everything left on stdout.
  std::string read_all();
  void signal(int sig);
  /// Waits for exit; returns the exit status, or 128 + signal number.
  int wait();

 private:
  pid_t pid_ = -1;
  int out_fd_ = -1;
  std::string buffered_;
};

/// Runs argv to completion; returns (exit status, stdout [+ stderr]).
std::pair<int, std::string> run_process(const std::vector<std::string>& argv, bool merge_stderr = false);

/// A `node serve` child process.
struct SpawnedNode {
  std::string node_id;
  std::string address;
  ChildProcess process;
};

/// Starts `exe node serve` and waits for its "listening <address>" line.
/// Throws NodeUnreachable if the child exits first.
SpawnedNode spawn_node(const std::string& exe, const std::string& node_id, const std::filesystem::path& data_dir,
                       bool sync_writes = true, const std::string& listen = "127.0.0.1:0");

}  // namespace skyshard
