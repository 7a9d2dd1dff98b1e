#pragma once
/*
  Real execution backend: spawns a shell command per run, enforces the cap
  by killing the process group on wall-clock timeout.

  The command template contains literal placeholders {instance}, {seed}
  and {cutoff} (cutoff in decimal seconds). Timing is wall-clock, because
  the captime is enforced by a wall-clock kill. Real runs are always
  non-resuming.
*/

#include <sys/types.h>
#include <sys/wait.h>

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "spc/runners.hpp"

namespace spc {

enum class NonzeroExitPolicy { TreatAsCompleted, TreatAsTimeout };

inline std::string substitute_placeholders(const std::string& tmpl, const std::string& instance,
                                           std::uint64_t seed, double cutoff_seconds) {
    auto replace_all = [](std::string s, const std::string& from, const std::string& to) {
        std::size_t pos = 0;
        while ((pos = s.find(from, pos)) != std::string::npos) {
            s.replace(pos, from.size(), to);
            pos += to.size();
        }
        return s;
    };
    char cutoff[64];
    std::snprintf(cutoff, sizeof(cutoff), "%.9g", cutoff_seconds);
    std::string s = replace_all(tmpl, "{instance}", instance);
    s = replace_all(s, "{seed}", std::to_string(seed));
    s = replace_all(s, "{cutoff}", cutoff);
    return s;
}

// Runs `command` via /bin/sh in its own process group; kills the group if
// wall-clock time exceeds `cap` seconds. Exit code 127 (shell could not
// exec the command) is reported as a spawn error.
inline RunResult run_command_capped(const std::string& command, double cap,
                                    NonzeroExitPolicy policy) {
    if (!(cap > 0.0)) throw std::invalid_argument("run_command_capped: cap must be > 0");

    const pid_t pid = ::fork();
    if (pid < 0) throw SourceError(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        ::setpgid(0, 0);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    ::setpgid(pid, pid);  // best effort; the child does the same

    const auto start = std::chrono::steady_clock::now();
    const auto deadline = start + std::chrono::duration<double>(cap);

    int status = 0;
    bool exited = false;
    bool timed_out = false;
    for (;;) {
        const pid_t w = ::waitpid(pid, &status, WNOHANG);
        if (w == pid) {
            exited = true;
            break;
        }
        if (w < 0) throw SourceError(std::string("waitpid failed: ") + std::strerror(errno));
        if (std::chrono::steady_clock::now() >= deadline) {
            timed_out = true;
            ::kill(-pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            break;
        }
        std::this_thread::sleep_for(std::chrono::microseconds(200));
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    RunResult res;
    res.measured = std::min(elapsed, cap);
    if (timed_out || !exited) {
        res.completed = false;
        res.measured = cap;
    } else if (WIFEXITED(status) && WEXITSTATUS(status) == 127) {
        throw SourceError("spawn failure (exit 127): " + command);
    } else if (WIFEXITED(status) && WEXITSTATUS(status) == 0) {
        res.completed = true;
    } else {
        // Solver answered with a nonzero status (or died on a signal).
        res.run_ok = false;
        res.completed = policy == NonzeroExitPolicy::TreatAsCompleted;
        if (!res.completed) res.measured = cap;
    }
    res.charged = res.measured;
    return res;
}

inline RunResult run_process(const std::string& command_template, const std::string& instance_path,
                             std::uint64_t seed, double cap,
                             NonzeroExitPolicy policy = NonzeroExitPolicy::TreatAsCompleted) {
    return run_command_capped(substitute_placeholders(command_template, instance_path, seed, cap),
                              cap, policy);
}

// RuntimeSource over one command template per configuration.
class ProcessSource : public RuntimeSource {
public:
    ProcessSource(std::vector<std::string> command_templates,
                  NonzeroExitPolicy policy = NonzeroExitPolicy::TreatAsCompleted)
        : templates_(std::move(command_templates)), policy_(policy) {}

    RunResult run(std::int64_t config_index, const std::string& instance_id,
                  std::uint64_t run_seed, double cap, double /*prev_cap*/) override {
        if (config_index < 0 || config_index >= static_cast<std::int64_t>(templates_.size()))
            throw SourceError("unknown config index " + std::to_string(config_index));
        return run_process(templates_[static_cast<std::size_t>(config_index)], instance_id,
                           run_seed, cap, policy_);
    }

private:
    std::vector<std::string> templates_;
    NonzeroExitPolicy policy_;
};

}  // namespace spc
