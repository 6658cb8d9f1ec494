// Reference adapter for the line-delimited JSON trial protocol. The default
// behaviour models a synthetic tunable workload over a parameter x in [0,1]:
// performance rises with x while the "fe" metadata metric falls as 1 - x^2,
// so the two objectives trade off against each other. The failure modes
// exercise the engine's penalty and timeout handling.

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <string>
#include <thread>

#include <poll.h>
#include <unistd.h>

#include <json.hpp>

namespace {

using nlohmann::json;

struct Options {
    std::string mode = "synthetic";  // synthetic | plateau | oom | oom-eval |
                                     // crash | hang | error | noisy
    int epochs = 3;
    int work_ms = 0;  // busy time per evaluate, for metering demos
};

void emit(const json& j) {
    std::cout << j.dump() << "\n" << std::flush;
}

// Non-blocking check for a pending engine command between epochs.
bool stop_requested(int wait_ms) {
    struct pollfd pfd {STDIN_FILENO, POLLIN, 0};
    if (::poll(&pfd, 1, wait_ms) <= 0) return false;
    std::string line;
    if (!std::getline(std::cin, line)) return false;
    json doc = json::parse(line, nullptr, false);
    return !doc.is_discarded() && doc.value("cmd", "") == "stop";
}

double param_x(const json& config) {
    if (config.contains("x") && config["x"].is_number()) {
        return config["x"].get<double>();
    }
    for (const auto& [key, value] : config.items()) {
        if (value.is_number_float()) return value.get<double>();
    }
    return 0.5;
}

int run(const Options& options) {
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        json cmd = json::parse(line, nullptr, false);
        if (cmd.is_discarded() || !cmd.contains("cmd")) {
            emit({{"event", "error"}, {"message", "bad command"}});
            return 1;
        }
        const std::string name = cmd.value("cmd", "");

        if (options.mode == "crash") return 3;
        if (options.mode == "hang") {
            std::this_thread::sleep_for(std::chrono::hours(24));
            return 0;
        }
        if (options.mode == "oom") {
            emit({{"event", "oom"}});
            return 0;
        }
        if (options.mode == "error") {
            emit({{"event", "error"}, {"message", "synthetic failure"}});
            return 0;
        }

        if (name == "train") {
            if (options.mode == "plateau") {
                // Loss flattens after the first epoch; a well-behaved engine
                // stops us after epoch 4.
                const double losses[] = {1.0, 0.9995, 0.9990, 0.9985};
                bool stopped = false;
                for (int e = 0; e < options.epochs && !stopped; ++e) {
                    const double loss =
                        e < 4 ? losses[e] : 0.9985 - 0.0001 * (e - 3);
                    emit({{"event", "epoch"}, {"val_loss", loss}});
                    stopped = stop_requested(200);
                }
                emit({{"event", "trained"}});
            } else {
                for (int e = 0; e < options.epochs; ++e) {
                    emit({{"event", "epoch"}, {"val_loss", 1.0 / (e + 1)}});
                    if (stop_requested(0)) break;
                }
                emit({{"event", "trained"}});
            }
        } else if (name == "evaluate") {
            if (options.mode == "oom-eval") {
                emit({{"event", "oom"}});
                return 0;
            }
            const json config = cmd.value("config", json::object());
            const double x = param_x(config);
            if (options.work_ms > 0) {
                const auto until = std::chrono::steady_clock::now() +
                                   std::chrono::milliseconds(options.work_ms);
                volatile double sink = 0.0;
                while (std::chrono::steady_clock::now() < until) {
                    sink = sink + std::sqrt(sink + 1.0);
                }
            }
            double performance = x;
            if (options.mode == "noisy") {
                // Small deterministic wobble derived from x.
                performance += 0.01 * std::sin(1000.0 * x);
            }
            emit({{"event", "evaluated"},
                  {"performance", performance},
                  {"samples", 1000},
                  {"metadata",
                   {{"fe", 1.0 - x * x},
                    {"param_count", static_cast<int>(1000 * (1.0 + x))},
                    {"flops", static_cast<int>(2e6 * (1.0 + x))}}}});
        } else if (name == "stop") {
            // Stray stop outside training; nothing to do.
        } else {
            emit({{"event", "error"}, {"message", "unknown command '" + name + "'"}});
            return 1;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Options options;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        auto next = [&](const char* flag) {
            if (i + 1 >= argc) {
                std::cerr << "demo_adapter: " << flag << " needs a value\n";
                std::exit(2);
            }
            return std::string(argv[++i]);
        };
        if (arg == "--mode") {
            options.mode = next("--mode");
        } else if (arg == "--epochs") {
            options.epochs = std::stoi(next("--epochs"));
        } else if (arg == "--work-ms") {
            options.work_ms = std::stoi(next("--work-ms"));
        } else {
            std::cerr << "demo_adapter: unknown argument '" << arg << "'\n";
            return 2;
        }
    }
    return run(options);
}
