#pragma once

#include <chrono>
#include <map>
#include <semaphore>
#include <string>
#include <string_view>

namespace docenh {

struct ProcessResult {
  int exit_code = -1;  // -1 when killed by a signal or on timeout
  bool timed_out = false;
  std::string out;
  std::string err;
};

/// Runs `command` through /bin/sh -c, capturing both output streams. The
/// whole process group is killed when `timeout` elapses. Throws
/// std::system_error when the process cannot be spawned.
ProcessResult run_shell(const std::string& command, std::chrono::milliseconds timeout);

/// Single-quotes `value` for /bin/sh.
std::string shell_quote(std::string_view value);

/// Replaces each `{key}` in `templ` with the shell-quoted value.
std::string substitute_placeholders(std::string_view templ,
                                    const std::map<std::string, std::string>& values);

/// Caps how many external processes run at once across threads.
class ProcessLimiter {
 public:
  explicit ProcessLimiter(int slots);

  class Slot {
   public:
    explicit Slot(ProcessLimiter& owner) : owner_(owner) { owner_.sem_.acquire(); }
    ~Slot() { owner_.sem_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    ProcessLimiter& owner_;
  };

  Slot acquire() { return Slot(*this); }

 private:
  std::counting_semaphore<1024> sem_;
};

}  // namespace docenh
