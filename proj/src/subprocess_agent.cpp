#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <sstream>

#include "trace/diagnostics.hpp"
#include "trace/io.hpp"

namespace trace {

namespace {

class AgentProcessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Pipe {
    int fds[2] = {-1, -1};
    Pipe() {
        if (pipe(fds) != 0)
            throw AgentProcessError(std::string("pipe failed: ") +
                                    std::strerror(errno));
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (fds[0] >= 0) ::close(fds[0]);
        fds[0] = -1;
    }
    void close_write() {
        if (fds[1] >= 0) ::close(fds[1]);
        fds[1] = -1;
    }
};

}  // namespace

SubprocessAgent::SubprocessAgent(std::string command, int max_tool_calls,
                                 int timeout_ms)
    : command_(std::move(command)),
      max_tool_calls_(max_tool_calls),
      timeout_ms_(timeout_ms) {}

Trajectory SubprocessAgent::run(const Task& task, std::span<const Step> hint,
                                std::uint64_t seed) {
    ordered_json request;
    request["task"] = task_to_json(task);
    request["hint_steps"] = ordered_json::array();
    {
        // Reuse the step schema for hints.
        Trajectory carrier;
        carrier.steps.assign(hint.begin(), hint.end());
        ordered_json as_json = trajectory_to_json(carrier);
        request["hint_steps"] = std::move(as_json["steps"]);
    }
    request["seed"] = seed;
    request["max_tool_calls"] = max_tool_calls_;
    const std::string payload = request.dump() + "\n";

    Pipe to_child;
    Pipe from_child;
    const pid_t pid = fork();
    if (pid < 0)
        throw AgentProcessError(std::string("fork failed: ") +
                                std::strerror(errno));
    if (pid == 0) {
        dup2(to_child.fds[0], STDIN_FILENO);
        dup2(from_child.fds[1], STDOUT_FILENO);
        to_child.close_read();
        to_child.close_write();
        from_child.close_read();
        from_child.close_write();
        execl("/bin/sh", "sh", "-c", command_.c_str(),
              static_cast<char*>(nullptr));
        _exit(127);
    }

    to_child.close_read();
    from_child.close_write();

    // Request payloads are small relative to the pipe buffer, but agents
    // may not read stdin at all, so tolerate EPIPE.
    signal(SIGPIPE, SIG_IGN);
    std::size_t written = 0;
    while (written < payload.size()) {
        const ssize_t n = ::write(to_child.fds[1], payload.data() + written,
                                  payload.size() - written);
        if (n < 0) {
            if (errno == EPIPE) break;
            throw AgentProcessError(std::string("write to agent failed: ") +
                                    std::strerror(errno));
        }
        written += static_cast<std::size_t>(n);
    }
    to_child.close_write();

    std::string output;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(timeout_ms_);
    char buffer[4096];
    bool timed_out = false;
    for (;;) {
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            timed_out = true;
            break;
        }
        pollfd pfd{from_child.fds[0], POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw AgentProcessError(std::string("poll failed: ") +
                                    std::strerror(errno));
        }
        if (ready == 0) {
            timed_out = true;
            break;
        }
        const ssize_t n = ::read(from_child.fds[0], buffer, sizeof(buffer));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw AgentProcessError(std::string("read from agent failed: ") +
                                    std::strerror(errno));
        }
        if (n == 0) break;  // EOF
        output.append(buffer, static_cast<std::size_t>(n));
    }
    from_child.close_read();

    if (timed_out) {
        kill(pid, SIGKILL);
        waitpid(pid, nullptr, 0);
        throw AgentProcessError("agent command timed out after " +
                                std::to_string(timeout_ms_) + " ms");
    }

    int status = 0;
    waitpid(pid, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        throw AgentProcessError(
            "agent command exited with status " +
            std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
    }

    std::istringstream stream(output);
    Parsed<Trajectory> parsed = parse_trajectories(stream);
    if (parsed.values.size() != 1)
        throw AgentProcessError("agent produced " +
                                std::to_string(parsed.values.size()) +
                                " trajectory records, expected 1");
    return std::move(parsed.values.front());
}

}  // namespace trace
