#include "greenfront/harness.hpp"

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <stdexcept>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace greenfront {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

void ignore_sigpipe_once() {
    static const bool done = [] {
        std::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)done;
}

// Child process with piped stdin/stdout; stderr is inherited.
class ChildProcess {
public:
    bool spawn(const std::string& command) {
        int to_child[2];
        int from_child[2];
        if (::pipe(to_child) != 0) return false;
        if (::pipe(from_child) != 0) {
            ::close(to_child[0]);
            ::close(to_child[1]);
            return false;
        }
        pid_ = ::fork();
        if (pid_ < 0) {
            for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) {
                ::close(fd);
            }
            return false;
        }
        if (pid_ == 0) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) {
                ::close(fd);
            }
            ::execl("/bin/sh", "sh", "-c", command.c_str(), nullptr);
            ::_exit(127);
        }
        ::close(to_child[0]);
        ::close(from_child[1]);
        stdin_fd_ = to_child[1];
        stdout_fd_ = from_child[0];
        return true;
    }

    ~ChildProcess() {
        close_stdin();
        if (stdout_fd_ >= 0) ::close(stdout_fd_);
        if (pid_ > 0) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, nullptr, 0);
        }
    }

    bool write_line(const std::string& line) {
        std::string payload = line + "\n";
        std::size_t written = 0;
        while (written < payload.size()) {
            const ssize_t n =
                ::write(stdin_fd_, payload.data() + written, payload.size() - written);
            if (n < 0) {
                if (errno == EINTR) continue;
                return false;
            }
            written += static_cast<std::size_t>(n);
        }
        return true;
    }

    enum class ReadStatus { Line, Eof, Timeout, Error };

    // Blocking buffered line read with a wall-clock deadline.
    ReadStatus read_line(Clock::time_point deadline, std::string* line) {
        while (true) {
            const auto newline = buffer_.find('\n');
            if (newline != std::string::npos) {
                *line = buffer_.substr(0, newline);
                buffer_.erase(0, newline + 1);
                if (!line->empty() && line->back() == '\r') line->pop_back();
                return ReadStatus::Line;
            }
            if (saw_eof_) return ReadStatus::Eof;

            const auto remaining = deadline - Clock::now();
            if (remaining <= Clock::duration::zero()) return ReadStatus::Timeout;
            struct pollfd pfd {stdout_fd_, POLLIN, 0};
            const int timeout_ms = static_cast<int>(std::min<std::int64_t>(
                std::chrono::duration_cast<std::chrono::milliseconds>(remaining).count() + 1,
                60'000));
            const int rc = ::poll(&pfd, 1, timeout_ms);
            if (rc < 0) {
                if (errno == EINTR) continue;
                return ReadStatus::Error;
            }
            if (rc == 0) continue;  // re-check deadline
            char chunk[4096];
            const ssize_t n = ::read(stdout_fd_, chunk, sizeof(chunk));
            if (n < 0) {
                if (errno == EINTR) continue;
                return ReadStatus::Error;
            }
            if (n == 0) {
                saw_eof_ = true;
                continue;
            }
            any_output_ = true;
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    void close_stdin() {
        if (stdin_fd_ >= 0) {
            ::close(stdin_fd_);
            stdin_fd_ = -1;
        }
    }

    void kill_hard() {
        if (pid_ > 0) ::kill(pid_, SIGKILL);
    }

    // Reap with a short grace period; SIGKILL when it does not exit.
    int wait_exit() {
        if (pid_ <= 0) return -1;
        int status = 0;
        for (int i = 0; i < 500; ++i) {
            const pid_t rc = ::waitpid(pid_, &status, WNOHANG);
            if (rc == pid_) {
                pid_ = -1;
                return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
            }
            ::usleep(10'000);
        }
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
        return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    }

    bool any_output() const { return any_output_; }

private:
    pid_t pid_ = -1;
    int stdin_fd_ = -1;
    int stdout_fd_ = -1;
    std::string buffer_;
    bool saw_eof_ = false;
    bool any_output_ = false;
};

struct ProtocolEvent {
    enum class Kind { Epoch, Trained, Evaluated, Oom, Error, Malformed, Unknown };
    Kind kind = Kind::Malformed;
    json payload;
};

ProtocolEvent parse_event(const std::string& line) {
    ProtocolEvent event;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("event") ||
        !doc["event"].is_string()) {
        event.kind = ProtocolEvent::Kind::Malformed;
        return event;
    }
    const std::string name = doc["event"].get<std::string>();
    event.payload = std::move(doc);
    if (name == "epoch") {
        event.kind = ProtocolEvent::Kind::Epoch;
    } else if (name == "trained") {
        event.kind = ProtocolEvent::Kind::Trained;
    } else if (name == "evaluated") {
        event.kind = ProtocolEvent::Kind::Evaluated;
    } else if (name == "oom") {
        event.kind = ProtocolEvent::Kind::Oom;
    } else if (name == "error") {
        event.kind = ProtocolEvent::Kind::Error;
    } else {
        event.kind = ProtocolEvent::Kind::Unknown;
    }
    return event;
}

}  // namespace

json config_to_json(const Configuration& config) {
    json j = json::object();
    for (const auto& [name, value] : config.assignments) {
        if (std::holds_alternative<bool>(value)) {
            j[name] = std::get<bool>(value);
        } else if (std::holds_alternative<std::int64_t>(value)) {
            j[name] = std::get<std::int64_t>(value);
        } else {
            j[name] = std::get<double>(value);
        }
    }
    return j;
}

Configuration config_from_json(const json& j) {
    Configuration config;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const json& value = it.value();
        if (value.is_boolean()) {
            config.set(it.key(), value.get<bool>());
        } else if (value.is_number_integer()) {
            config.set(it.key(), value.get<std::int64_t>());
        } else if (value.is_number()) {
            config.set(it.key(), value.get<double>());
        } else {
            throw std::invalid_argument("parameter '" + it.key() +
                                        "' must be a boolean or number");
        }
    }
    return config;
}

bool early_stop_check(const std::vector<double>& val_losses, int patience,
                      double min_delta) {
    if (patience < 1) {
        throw std::invalid_argument("patience must be >= 1");
    }
    if (min_delta < 0.0) {
        throw std::invalid_argument("min_delta must be >= 0");
    }
    if (val_losses.size() < static_cast<std::size_t>(patience) + 1) return false;
    for (std::size_t i = val_losses.size() - static_cast<std::size_t>(patience);
         i < val_losses.size(); ++i) {
        if (std::fabs(val_losses[i] - val_losses[i - 1]) >= min_delta) return false;
    }
    return true;
}

std::int64_t breakeven(double optimization_energy_joules,
                       double savings_per_unit_joules) {
    if (savings_per_unit_joules <= 0.0) {
        throw std::invalid_argument("never breaks even: savings per unit must be > 0");
    }
    if (optimization_energy_joules < 0.0) {
        throw std::invalid_argument("optimization energy must be nonnegative");
    }
    return static_cast<std::int64_t>(
        std::floor(optimization_energy_joules / savings_per_unit_joules));
}

TrialResult run_trial(const std::string& adapter_cmd, const Configuration& config,
                      int trial_id, const TrialOptions& options) {
    ignore_sigpipe_once();

    TrialResult result;
    result.performance = options.penalty_performance.value_or(0.0);
    const auto started = Clock::now();
    const auto deadline =
        started + std::chrono::duration_cast<Clock::duration>(
                      std::chrono::duration<double>(options.timeout_seconds));
    auto finish = [&](TrialResult r) {
        r.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
        return r;
    };
    auto fail = [&](std::string reason) {
        result.status = TrialStatus::Failed;
        result.efficiency = 0.0;
        result.failure_reason = std::move(reason);
        return finish(result);
    };

    ChildProcess child;
    if (!child.spawn(adapter_cmd)) {
        result.spawn_failure = true;
        return fail("adapter spawn failed: " + std::string(std::strerror(errno)));
    }

    std::vector<std::string> meter_warnings;
    const std::vector<PowerSource> sources =
        build_sources(options.meter, &meter_warnings);

    std::vector<double> losses;
    int epochs = 0;

    if (!options.skip_train) {
        json train_cmd = {{"cmd", "train"},
                          {"trial_id", trial_id},
                          {"config", config_to_json(config)},
                          {"dataset", options.dataset_ref}};
        MeterSession train_session(sources, options.meter);
        train_session.start();
        EnergyReport train_report;
        bool stop_sent = false;
        bool oom = false;
        if (!child.write_line(train_cmd.dump())) {
            train_session.stop();
            return fail("adapter closed stdin during train");
        }
        while (true) {
            std::string line;
            const auto status = child.read_line(deadline, &line);
            if (status == ChildProcess::ReadStatus::Timeout) {
                child.kill_hard();
                train_session.stop();
                return fail("trial timed out after " +
                            std::to_string(options.timeout_seconds) + " s");
            }
            if (status != ChildProcess::ReadStatus::Line) {
                train_session.stop();
                const int code = child.wait_exit();
                if (!child.any_output()) {
                    result.spawn_failure = code == 127 || code == 126;
                }
                return fail("adapter exited during train (code " +
                            std::to_string(code) + ")");
            }
            if (line.empty()) continue;
            ProtocolEvent event = parse_event(line);
            if (event.kind == ProtocolEvent::Kind::Epoch) {
                if (!event.payload.contains("val_loss") ||
                    !event.payload["val_loss"].is_number()) {
                    train_session.stop();
                    return fail("epoch event missing val_loss");
                }
                losses.push_back(event.payload["val_loss"].get<double>());
                ++epochs;
                if (!stop_sent && early_stop_check(losses, options.early_stop_patience,
                                                   options.early_stop_min_delta)) {
                    stop_sent = true;
                    child.write_line(json{{"cmd", "stop"}}.dump());
                }
            } else if (event.kind == ProtocolEvent::Kind::Trained) {
                train_report = train_session.stop();
                break;
            } else if (event.kind == ProtocolEvent::Kind::Oom) {
                train_session.stop();
                oom = true;
                break;
            } else if (event.kind == ProtocolEvent::Kind::Error) {
                train_session.stop();
                return fail("adapter error: " +
                            event.payload.value("message", std::string("unspecified")));
            } else if (event.kind == ProtocolEvent::Kind::Malformed) {
                train_session.stop();
                return fail("malformed protocol message: " + line);
            } else {
                train_session.stop();
                return fail("unknown protocol event: " + line);
            }
        }
        result.epochs_run = epochs;
        if (oom) {
            result.status = TrialStatus::Oom;
            result.efficiency = 0.0;
            result.failure_reason = "adapter reported out-of-memory";
            return finish(result);
        }
        // Training energy is informational; efficiency uses the evaluate
        // phase only.
        result.metadata["train_total_joules"] = train_report.total_joules;
        result.metadata["train_pue_adjusted_joules"] = train_report.pue_adjusted_joules;
        result.metadata["train_duration_seconds"] = train_report.duration_seconds;
    }

    json evaluate_cmd = {{"cmd", "evaluate"},
                         {"trial_id", trial_id},
                         {"config", config_to_json(config)}};
    MeterSession session(sources, options.meter);
    session.start();
    if (!child.write_line(evaluate_cmd.dump())) {
        session.stop();
        return fail("adapter closed stdin during evaluate");
    }
    json evaluated;
    while (true) {
        std::string line;
        const auto status = child.read_line(deadline, &line);
        if (status == ChildProcess::ReadStatus::Timeout) {
            child.kill_hard();
            session.stop();
            return fail("trial timed out after " +
                        std::to_string(options.timeout_seconds) + " s");
        }
        if (status != ChildProcess::ReadStatus::Line) {
            session.stop();
            const int code = child.wait_exit();
            if (!child.any_output()) {
                result.spawn_failure = code == 127 || code == 126;
            }
            return fail("adapter exited during evaluate (code " +
                        std::to_string(code) + ")");
        }
        if (line.empty()) continue;
        ProtocolEvent event = parse_event(line);
        if (event.kind == ProtocolEvent::Kind::Evaluated) {
            evaluated = std::move(event.payload);
            break;
        }
        if (event.kind == ProtocolEvent::Kind::Oom) {
            session.stop();
            result.status = TrialStatus::Oom;
            result.efficiency = 0.0;
            result.failure_reason = "adapter reported out-of-memory";
            return finish(result);
        }
        if (event.kind == ProtocolEvent::Kind::Epoch) {
            continue;  // stray epoch after train; tolerated
        }
        if (event.kind == ProtocolEvent::Kind::Error) {
            session.stop();
            return fail("adapter error: " +
                        event.payload.value("message", std::string("unspecified")));
        }
        session.stop();
        return fail((event.kind == ProtocolEvent::Kind::Malformed
                         ? "malformed protocol message: "
                         : "unknown protocol event: ") +
                    line);
    }
    result.energy = session.stop();
    result.energy.warnings.insert(result.energy.warnings.end(),
                                  meter_warnings.begin(), meter_warnings.end());

    child.close_stdin();
    child.wait_exit();

    if (!evaluated.contains("performance") || !evaluated["performance"].is_number() ||
        !evaluated.contains("samples") || !evaluated["samples"].is_number()) {
        return fail("evaluated event missing performance/samples");
    }
    result.performance = evaluated["performance"].get<double>();
    result.samples = evaluated["samples"].get<std::int64_t>();
    if (evaluated.contains("metadata") && evaluated["metadata"].is_object()) {
        for (auto it = evaluated["metadata"].begin(); it != evaluated["metadata"].end();
             ++it) {
            result.metadata[it.key()] = it.value();
        }
    }
    if (!std::isfinite(result.performance)) {
        return fail("non-finite performance value");
    }
    if (result.samples <= 0) {
        return fail("evaluated event reported no samples");
    }
    if (result.energy.pue_adjusted_joules <= 0.0) {
        return fail("meter recorded no energy for the evaluate phase");
    }
    result.status = TrialStatus::Ok;
    result.efficiency =
        static_cast<double>(result.samples) / result.energy.pue_adjusted_joules;
    result.failure_reason.clear();
    return finish(result);
}

}  // namespace greenfront
