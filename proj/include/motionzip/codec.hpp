#pragma once

// Adapters that run an external codec tool as a child process and speak Y4M
// over its standard streams:
//   decode: compressed {input} file in, Y4M on the child's stdout
//   encode: Y4M on the child's stdin, compressed {output} file out
//
// Command templates are split into argv without a shell. Quote with '...' or
// "..." to keep spaces; wrap in `sh -c '...'` explicitly if redirection is
// needed.

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <streambuf>
#include <string>
#include <thread>
#include <vector>

#include "motionzip/error.hpp"
#include "motionzip/stream.hpp"
#include "motionzip/y4m.hpp"

extern char** environ;

namespace motionzip {

/// Shell-like word splitting: whitespace separates words, quotes group them,
/// backslash escapes the next character outside single quotes.
inline std::vector<std::string> split_command(std::string_view command) {
  std::vector<std::string> words;
  std::string word;
  bool in_word = false;
  char quote = 0;
  for (std::size_t i = 0; i < command.size(); ++i) {
    const char c = command[i];
    if (quote != 0) {
      if (c == quote) {
        quote = 0;
      } else if (c == '\\' && quote == '"' && i + 1 < command.size()) {
        word.push_back(command[++i]);
      } else {
        word.push_back(c);
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_word = true;
    } else if (c == '\\' && i + 1 < command.size()) {
      word.push_back(command[++i]);
      in_word = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_word) words.push_back(std::move(word));
      word.clear();
      in_word = false;
    } else {
      word.push_back(c);
      in_word = true;
    }
  }
  if (quote != 0) throw Error(Errc::InvalidArgument, "unbalanced quote in command template");
  if (in_word) words.push_back(std::move(word));
  return words;
}

/// Splits `command` and replaces every `{name}` occurrence inside each word.
inline std::vector<std::string> expand_command(
    std::string_view command, const std::map<std::string, std::string>& values) {
  auto words = split_command(command);
  if (words.empty()) throw Error(Errc::InvalidArgument, "empty command template");
  for (auto& w : words) {
    for (const auto& [name, value] : values) {
      const std::string key = "{" + name + "}";
      for (auto pos = w.find(key); pos != std::string::npos; pos = w.find(key, pos + value.size())) {
        w.replace(pos, key.size(), value);
      }
    }
  }
  return words;
}

namespace detail {

inline std::string_view require_placeholder(std::string_view command, std::string_view key) {
  if (command.find(key) == std::string_view::npos) {
    throw Error(Errc::InvalidArgument,
                "command template needs a " + std::string(key) + " placeholder");
  }
  return command;
}

inline void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] {
    struct sigaction current {};
    sigaction(SIGPIPE, nullptr, &current);
    if (current.sa_handler == SIG_DFL) {
      struct sigaction ign {};
      ign.sa_handler = SIG_IGN;
      sigemptyset(&ign.sa_mask);
      sigaction(SIGPIPE, &ign, nullptr);
    }
  });
}

class UniqueFd {
 public:
  UniqueFd() = default;
  explicit UniqueFd(int fd) : fd_(fd) {}
  UniqueFd(UniqueFd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  UniqueFd& operator=(UniqueFd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  UniqueFd(const UniqueFd&) = delete;
  UniqueFd& operator=(const UniqueFd&) = delete;
  ~UniqueFd() { reset(); }

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

inline std::pair<UniqueFd, UniqueFd> make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw Error(Errc::SpawnFailure, std::string("pipe: ") + std::strerror(errno));
  }
  return {UniqueFd(fds[0]), UniqueFd(fds[1])};
}

class FdInBuf final : public std::streambuf {
 public:
  explicit FdInBuf(int fd, std::size_t size = 1 << 20) : fd_(fd), buf_(size) {}

 protected:
  int_type underflow() override {
    if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
    ssize_t n;
    do {
      n = ::read(fd_, buf_.data(), buf_.size());
    } while (n < 0 && errno == EINTR);
    if (n <= 0) return traits_type::eof();
    setg(buf_.data(), buf_.data(), buf_.data() + n);
    return traits_type::to_int_type(*gptr());
  }

  std::streamsize xsgetn(char* s, std::streamsize count) override {
    std::streamsize done = 0;
    while (done < count) {
      const auto avail = egptr() - gptr();
      if (avail > 0) {
        const auto take = std::min<std::streamsize>(avail, count - done);
        std::memcpy(s + done, gptr(), static_cast<std::size_t>(take));
        gbump(static_cast<int>(take));
        done += take;
        continue;
      }
      if (count - done >= static_cast<std::streamsize>(buf_.size())) {
        // Large reads bypass the buffer.
        ssize_t n;
        do {
          n = ::read(fd_, s + done, static_cast<std::size_t>(count - done));
        } while (n < 0 && errno == EINTR);
        if (n <= 0) break;
        done += n;
      } else if (underflow() == traits_type::eof()) {
        break;
      }
    }
    return done;
  }

 private:
  int fd_;
  std::vector<char> buf_;
};

class FdOutBuf final : public std::streambuf {
 public:
  explicit FdOutBuf(int fd, std::size_t size = 1 << 20) : fd_(fd), buf_(size) {
    setp(buf_.data(), buf_.data() + buf_.size());
  }

  bool broken_pipe() const { return broken_pipe_; }

 protected:
  int_type overflow(int_type c) override {
    if (!drain()) return traits_type::eof();
    if (!traits_type::eq_int_type(c, traits_type::eof())) {
      *pptr() = traits_type::to_char_type(c);
      pbump(1);
    }
    return traits_type::not_eof(c);
  }

  int sync() override { return drain() ? 0 : -1; }

  std::streamsize xsputn(const char* s, std::streamsize count) override {
    if (count < static_cast<std::streamsize>(epptr() - pptr())) {
      std::memcpy(pptr(), s, static_cast<std::size_t>(count));
      pbump(static_cast<int>(count));
      return count;
    }
    if (!drain() || !write_all(s, static_cast<std::size_t>(count))) return 0;
    return count;
  }

 private:
  bool write_all(const char* p, std::size_t n) {
    while (n > 0) {
      const ssize_t w = ::write(fd_, p, n);
      if (w < 0) {
        if (errno == EINTR) continue;
        if (errno == EPIPE) broken_pipe_ = true;
        return false;
      }
      p += w;
      n -= static_cast<std::size_t>(w);
    }
    return true;
  }

  bool drain() {
    const auto pending = static_cast<std::size_t>(pptr() - pbase());
    setp(buf_.data(), buf_.data() + buf_.size());
    return write_all(buf_.data(), pending);
  }

  int fd_;
  std::vector<char> buf_;
  bool broken_pipe_ = false;
};

}  // namespace detail

/// A spawned child with optional stdin/stdout pipes and captured stderr.
class ChildProcess {
 public:
  struct Pipes {
    bool stdin_pipe = false;
    bool stdout_pipe = false;
  };

  ChildProcess(const std::vector<std::string>& argv, Pipes pipes) : command_(argv.front()) {
    detail::ignore_sigpipe_once();
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);

    detail::UniqueFd child_in, child_out;
    if (pipes.stdin_pipe) {
      auto [r, w] = detail::make_pipe();
      child_in = std::move(r);
      stdin_ = std::move(w);
      posix_spawn_file_actions_adddup2(&actions, child_in.get(), STDIN_FILENO);
    }
    if (pipes.stdout_pipe) {
      auto [r, w] = detail::make_pipe();
      stdout_ = std::move(r);
      child_out = std::move(w);
      posix_spawn_file_actions_adddup2(&actions, child_out.get(), STDOUT_FILENO);
    }
    auto [err_r, err_w] = detail::make_pipe();
    posix_spawn_file_actions_adddup2(&actions, err_w.get(), STDERR_FILENO);

    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    const int rc = ::posix_spawnp(&pid_, args[0], &actions, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) {
      pid_ = -1;
      throw Error(Errc::SpawnFailure, "cannot run '" + command_ + "': " + std::strerror(rc));
    }
    err_w.reset();
    stderr_thread_ = std::thread([this, fd = std::move(err_r)] { drain_stderr(fd.get()); });
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  ~ChildProcess() {
    stdin_.reset();
    stdout_.reset();
    if (pid_ > 0 && !status_) {
      ::kill(pid_, SIGKILL);
      reap();
    }
    if (stderr_thread_.joinable()) stderr_thread_.join();
  }

  int stdin_fd() const { return stdin_.get(); }
  int stdout_fd() const { return stdout_.get(); }
  void close_stdin() { stdin_.reset(); }
  void close_stdout() { stdout_.reset(); }
  const std::string& command() const { return command_; }

  /// Waits for exit and returns the exit code (128+signal when killed).
  int wait() {
    if (!status_) reap();
    if (stderr_thread_.joinable()) stderr_thread_.join();
    return *status_;
  }

  /// Waits and throws NonZeroExit carrying the child's stderr on failure.
  void wait_success() {
    const int code = wait();
    if (code != 0) {
      throw Error(Errc::NonZeroExit, command_ + " exited with status " + std::to_string(code) +
                                         diagnostic_suffix());
    }
  }

  std::string stderr_text() {
    std::lock_guard lock(err_mutex_);
    return err_text_;
  }

  std::string diagnostic_suffix() {
    auto text = stderr_text();
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    if (text.empty()) return {};
    // Keep the last line only; diagnostics are single-line.
    if (auto nl = text.find_last_of("\r\n"); nl != std::string::npos) text = text.substr(nl + 1);
    return ": " + text;
  }

 private:
  void reap() {
    int status = 0;
    pid_t r;
    do {
      r = ::waitpid(pid_, &status, 0);
    } while (r < 0 && errno == EINTR);
    if (r < 0) {
      status_ = 255;
    } else if (WIFEXITED(status)) {
      status_ = WEXITSTATUS(status);
    } else {
      status_ = 128 + WTERMSIG(status);
    }
  }

  void drain_stderr(int fd) {
    char buf[4096];
    for (;;) {
      const ssize_t n = ::read(fd, buf, sizeof buf);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      std::lock_guard lock(err_mutex_);
      err_text_.append(buf, static_cast<std::size_t>(n));
      constexpr std::size_t kKeep = 64 * 1024;
      if (err_text_.size() > 2 * kKeep) err_text_.erase(0, err_text_.size() - kKeep);
    }
  }

  std::string command_;
  pid_t pid_ = -1;
  std::optional<int> status_;
  detail::UniqueFd stdin_;
  detail::UniqueFd stdout_;
  std::thread stderr_thread_;
  std::mutex err_mutex_;
  std::string err_text_;
};

/// Frames decoded by an external tool from a compressed file.
class DecodeSource final : public FrameSource {
 public:
  DecodeSource(std::string_view command_template, const std::string& input_path)
      : child_(std::make_unique<ChildProcess>(
            expand_command(detail::require_placeholder(command_template, "{input}"),
                           {{"input", input_path}}),
            ChildProcess::Pipes{.stdin_pipe = false, .stdout_pipe = true})),
        buf_(child_->stdout_fd()),
        in_(&buf_) {
    try {
      reader_.emplace(in_);
    } catch (const Error&) {
      surface_child_failure();
      throw;
    }
  }

  const StreamHeader& header() const override { return reader_->header(); }

  std::optional<Frame> next() override {
    try {
      auto f = reader_->next();
      if (!f) close();
      return f;
    } catch (const Error&) {
      surface_child_failure();
      throw;
    }
  }

  void close() override {
    if (closed_) return;
    closed_ = true;
    child_->close_stdout();
    child_->wait_success();
  }

 private:
  // A truncated or missing stream usually means the tool failed; prefer its
  // exit status and stderr over the parse error.
  void surface_child_failure() {
    closed_ = true;
    child_->close_stdout();
    if (child_->wait() != 0) child_->wait_success();
  }

  std::unique_ptr<ChildProcess> child_;
  detail::FdInBuf buf_;
  std::istream in_;
  std::optional<Y4mReader> reader_;
  bool closed_ = false;
};

/// Frames piped as Y4M into an external encoder writing a compressed file.
class EncodeSink final : public FrameSink {
 public:
  EncodeSink(std::string command_template, std::string output_path)
      : template_(std::move(command_template)), output_path_(std::move(output_path)) {
    detail::require_placeholder(template_, "{output}");
  }

  void open(const StreamHeader& header) override {
    child_ = std::make_unique<ChildProcess>(
        expand_command(template_, {{"output", output_path_}}),
        ChildProcess::Pipes{.stdin_pipe = true, .stdout_pipe = false});
    buf_ = std::make_unique<detail::FdOutBuf>(child_->stdin_fd());
    out_ = std::make_unique<std::ostream>(buf_.get());
    guarded([&] { writer_.emplace(*out_, header); });
  }

  void write(const Frame& frame) override {
    guarded([&] { writer_.value().write(frame); });
  }

  void close() override {
    if (!child_ || closed_) return;
    closed_ = true;
    std::optional<Error> flush_error;
    try {
      writer_->flush();
    } catch (const Error& e) {
      flush_error = e;
    }
    child_->close_stdin();
    child_->wait_success();
    if (flush_error) throw translate(*flush_error);
  }

 private:
  template <typename F>
  void guarded(F&& op) {
    try {
      op();
    } catch (const Error& e) {
      throw translate(e);
    }
  }

  Error translate(const Error& e) {
    if (e.code() == Errc::SinkUnavailable && buf_->broken_pipe()) {
      closed_ = true;
      child_->close_stdin();
      const int code = child_->wait();
      return Error(Errc::BrokenPipe, child_->command() + " stopped reading (status " +
                                         std::to_string(code) + ")" +
                                         child_->diagnostic_suffix());
    }
    return e;
  }

  std::string template_;
  std::string output_path_;
  std::unique_ptr<ChildProcess> child_;
  std::unique_ptr<detail::FdOutBuf> buf_;
  std::unique_ptr<std::ostream> out_;
  std::optional<Y4mWriter> writer_;
  bool closed_ = false;
};

}  // namespace motionzip
