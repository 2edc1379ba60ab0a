#include "skyshard/process.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <sys/wait.h>
#include <unistd.h>

#include "skyshard/error.hpp"

namespace skyshard {

ChildProcess ChildProcess::spawn(const std::vector<std::string>& argv, bool merge_stderr) {
  if (argv.empty()) fail(ErrorCode::InvalidArgument, "empty argv");
  int fds[2];
  if (::pipe(fds) != 0) fail(ErrorCode::IoError, std::string("pipe: ") + std::strerror(errno));
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    fail(ErrorCode::IoError, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::dup2(fds[1], STDOUT_FILENO);
    if (merge_stderr) ::dup2(fds[1], STDERR_FILENO);
    ::close(fds[0]);
    ::close(fds[1]);
    ::execv(args[0], args.data());
    ::_exit(127);
  }
  ::close(fds[1]);
  ChildProcess c;
  c.pid_ = pid;
  c.out_fd_ = fds[0];
  return c;
}

ChildProcess::~ChildProcess() {
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    wait();
  }
  if (out_fd_ >= 0) ::close(out_fd_);
}

ChildProcess::ChildProcess(ChildProcess&& o) noexcept
    : pid_(o.pid_), out_fd_(o.out_fd_), buffered_(std::move(o.buffered_)) {
  o.pid_ = -1;
  o.out_fd_ = -1;
}

ChildProcess& ChildProcess::operator=(ChildProcess&& o) noexcept {
  if (this != &o) {
    this->~ChildProcess();
    pid_ = o.pid_;
    out_fd_ = o.out_fd_;
    buffered_ = std::move(o.buffered_);
    o.pid_ = -1;
    o.out_fd_ = -1;
  }
  return *this;
}

std::string ChildProcess::read_line() {
  for (;;) {
    auto nl = buffered_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffered_.substr(0, nl);
      buffered_.erase(0, nl + 1);
      return line;
    }
    char buf[4096];
    ssize_t n = out_fd_ >= 0 ? ::read(out_fd_, buf, sizeof buf) : 0;
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return std::exchange(buffered_, {});
    buffered_.append(buf, static_cast<std::size_t>(n));
  }
}

std::string ChildProcess::read_all() {
  std::string out = std::exchange(buffered_, {});
  char buf[4096];
  for (;;) {
    ssize_t n = out_fd_ >= 0 ? ::read(out_fd_, buf, sizeof buf) : 0;
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return out;
    out.append(buf, static_cast<std::size_t>(n));
  }
}

void ChildProcess::signal(int sig) {
  if (pid_ > 0) ::kill(pid_, sig);
}

int ChildProcess::wait() {
  if (pid_ <= 0) return -1;
  int status = 0;
  while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
  }
  pid_ = -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

std::pair<int, std::string> run_process(const std::vector<std::string>& argv, bool merge_stderr) {
  ChildProcess c = ChildProcess::spawn(argv, merge_stderr);
  std::string out = c.read_all();
  return {c.wait(), out};
}

SpawnedNode spawn_node(const std::string& exe, const std::string& node_id, const std::filesystem::path& data_dir,
                       bool sync_writes, const std::string& listen) {
  std::vector<std::string> argv{exe, "node", "serve", "--node-id", node_id, "--listen", listen, "--data-dir",
                                data_dir.string()};
  if (!sync_writes) argv.push_back("--no-sync");
  SpawnedNode n{node_id, {}, ChildProcess::spawn(argv)};
  for (;;) {
    std::string line = n.process.read_line();
    if (line.rfind("listening ", 0) == 0) {
      n.address = line.substr(10);
      return n;
    }
    if (line.empty()) {
      int status = n.process.wait();
      fail(ErrorCode::NodeUnreachable, "node " + node_id + " exited with status " + std::to_string(status));
    }
  }
}

}  // namespace skyshard
