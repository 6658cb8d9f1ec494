#include "greenfront/meter.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace greenfront {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::atomic<bool> g_session_active{false};

double monotonic_seconds() {
    return std::chrono::duration<double>(Clock::now().time_since_epoch()).count();
}

bool read_double_file(const std::string& path, double* out) {
    std::ifstream in(path);
    if (!in) return false;
    double value = 0.0;
    in >> value;
    if (!in) return false;
    *out = value;
    return true;
}

}  // namespace

PowerSource PowerSource::constant(std::string component, double watts,
                                  std::string provenance) {
    if (watts < 0.0) {
        throw std::invalid_argument("constant power source requires watts >= 0");
    }
    PowerSource source;
    source.kind = Kind::Constant;
    source.component = std::move(component);
    source.watts = watts;
    source.provenance = std::move(provenance);
    return source;
}

PowerSource PowerSource::rapl(std::vector<RaplDomain> domains) {
    for (const auto& domain : domains) {
        if (domain.max_range_uj <= 0.0) {
            throw std::invalid_argument("RAPL domain '" + domain.component +
                                        "' requires max_range > 0");
        }
    }
    PowerSource source;
    source.kind = Kind::Rapl;
    source.rapl_domains = std::move(domains);
    return source;
}

PowerSource PowerSource::gpu_poll(std::string command) {
    PowerSource source;
    source.kind = Kind::GpuPoll;
    source.poll_command = std::move(command);
    return source;
}

double read_rapl_delta(double prev_counter_uj, double curr_counter_uj,
                       double max_range_uj) {
    if (max_range_uj <= 0.0) {
        throw std::invalid_argument("max_range_uj must be positive");
    }
    double delta = curr_counter_uj - prev_counter_uj;
    if (delta < 0.0) delta += max_range_uj;
    return delta * 1e-6;
}

std::map<std::string, double> estimate_constant_power(const MeterConfig& inventory) {
    if (inventory.cpu_tdp_watts < 0.0 || inventory.ram_gb < 0.0 ||
        inventory.cpu_core_fraction < 0.0 || inventory.gpu_tdp_watts < 0.0) {
        throw std::invalid_argument("inventory values must be nonnegative");
    }
    std::map<std::string, double> watts;
    watts["cpu"] = inventory.cpu_tdp_watts * inventory.cpu_core_fraction;
    watts["ram"] = 0.375 * inventory.ram_gb;
    if (inventory.gpu_present) watts["gpu"] = inventory.gpu_tdp_watts;
    return watts;
}

std::map<std::string, double> integrate(const std::vector<PowerSample>& samples) {
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].timestamp <= samples[i - 1].timestamp) {
            throw std::invalid_argument("sample timestamps must be strictly increasing");
        }
    }
    std::map<std::string, double> joules;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const PowerSample& a = samples[i - 1];
        const PowerSample& b = samples[i];
        const double dt = b.timestamp - a.timestamp;
        for (const auto& [component, wb] : b.watts_by_component) {
            auto it = a.watts_by_component.find(component);
            if (it == a.watts_by_component.end()) continue;
            joules[component] += 0.5 * (it->second + wb) * dt;
        }
    }
    return joules;
}

double apply_pue(double joules, double pue) {
    if (pue < 1.0) {
        throw std::invalid_argument("PUE must be >= 1");
    }
    return joules * pue;
}

double emissions(double kwh, double intensity) {
    if (kwh < 0.0 || intensity < 0.0) {
        throw std::invalid_argument("emissions inputs must be nonnegative");
    }
    return kwh * intensity;
}

namespace {

std::vector<RaplDomain> discover_rapl_domains() {
    std::vector<RaplDomain> domains;
    const fs::path root("/sys/class/powercap");
    std::error_code ec;
    if (!fs::is_directory(root, ec)) return domains;
    for (const auto& entry : fs::directory_iterator(root, ec)) {
        const std::string stem = entry.path().filename().string();
        // Top-level package domains only: "intel-rapl:N" without subdomain suffix.
        if (stem.rfind("intel-rapl:", 0) != 0) continue;
        if (std::count(stem.begin(), stem.end(), ':') != 1) continue;
        RaplDomain domain;
        domain.energy_path = (entry.path() / "energy_uj").string();
        double probe = 0.0;
        if (!read_double_file(domain.energy_path, &probe)) continue;
        if (!read_double_file((entry.path() / "max_energy_range_uj").string(),
                              &domain.max_range_uj) ||
            domain.max_range_uj <= 0.0) {
            continue;
        }
        std::ifstream name_file(entry.path() / "name");
        if (!(name_file >> domain.component) || domain.component.empty()) {
            domain.component = stem;
        }
        domains.push_back(std::move(domain));
    }
    return domains;
}

bool command_exists(const std::string& name) {
    std::string probe = "command -v " + name + " >/dev/null 2>&1";
    return std::system(probe.c_str()) == 0;
}

// One real (watts) per line/device.
double poll_gpu_watts(const std::string& command, bool* ok) {
    FILE* pipe = ::popen(command.c_str(), "r");
    if (pipe == nullptr) {
        *ok = false;
        return 0.0;
    }
    double total = 0.0;
    bool any = false;
    char line[256];
    while (std::fgets(line, sizeof(line), pipe) != nullptr) {
        try {
            total += std::stod(line);
            any = true;
        } catch (const std::exception&) {
        }
    }
    const int rc = ::pclose(pipe);
    *ok = any && rc == 0;
    return total;
}

constexpr const char* kGpuQuery =
    "nvidia-smi --query-gpu=power.draw --format=csv,noheader,nounits";

}  // namespace

std::vector<PowerSource> build_sources(const MeterConfig& config,
                                       std::vector<std::string>* warnings) {
    std::vector<PowerSource> sources;

    auto domains = discover_rapl_domains();
    if (!domains.empty()) {
        sources.push_back(PowerSource::rapl(std::move(domains)));
    } else if (config.cpu_tdp_watts > 0.0) {
        sources.push_back(PowerSource::constant(
            "cpu", config.cpu_tdp_watts * config.cpu_core_fraction, "tdp-fallback"));
        if (warnings != nullptr) {
            warnings->push_back(
                "RAPL counters unreadable; CPU power estimated from TDP inventory");
        }
    }

    if (config.ram_gb > 0.0) {
        sources.push_back(PowerSource::constant("ram", 0.375 * config.ram_gb,
                                                "0.375 W/GB estimate"));
    }

    if (config.gpu_present) {
        if (command_exists("nvidia-smi")) {
            sources.push_back(PowerSource::gpu_poll(kGpuQuery));
        } else {
            sources.push_back(
                PowerSource::constant("gpu", config.gpu_tdp_watts, "tdp-fallback"));
            if (warnings != nullptr) {
                warnings->push_back(
                    "nvidia-smi unavailable; GPU power estimated from TDP inventory");
            }
        }
    }
    return sources;
}

struct MeterSession::Impl {
    std::vector<PowerSource> sources;
    MeterConfig config;

    std::thread sampler;
    std::mutex mutex;
    std::condition_variable cv;
    bool stop_requested = false;
    bool active = false;

    // Single-writer sample buffer plus exact per-domain counter accounting.
    std::vector<PowerSample> samples;
    std::map<std::string, double> rapl_joules;
    std::map<std::string, double> rapl_prev_uj;
    std::vector<std::string> warnings;
    double started_at = 0.0;

    void take_sample(double now, double elapsed_since_prev) {
        PowerSample sample;
        sample.timestamp = now;
        for (const auto& source : sources) {
            switch (source.kind) {
                case PowerSource::Kind::Constant:
                    sample.watts_by_component[source.component] = source.watts;
                    break;
                case PowerSource::Kind::Rapl:
                    for (const auto& domain : source.rapl_domains) {
                        double counter = 0.0;
                        if (!read_double_file(domain.energy_path, &counter)) continue;
                        auto prev = rapl_prev_uj.find(domain.component);
                        if (prev != rapl_prev_uj.end() && elapsed_since_prev > 0.0) {
                            const double joules = read_rapl_delta(prev->second, counter,
                                                                  domain.max_range_uj);
                            rapl_joules[domain.component] += joules;
                            sample.watts_by_component[domain.component] =
                                joules / elapsed_since_prev;
                        }
                        rapl_prev_uj[domain.component] = counter;
                    }
                    break;
                case PowerSource::Kind::GpuPoll: {
                    bool ok = false;
                    const double watts = poll_gpu_watts(source.poll_command, &ok);
                    if (ok) sample.watts_by_component["gpu"] = watts;
                    break;
                }
            }
        }
        samples.push_back(std::move(sample));
    }

    void run() {
        double prev = started_at;
        std::unique_lock lock(mutex);
        while (!stop_requested) {
            const auto interval =
                std::chrono::duration<double>(config.interval_seconds);
            if (cv.wait_for(lock, interval, [this] { return stop_requested; })) {
                break;
            }
            const double now = monotonic_seconds();
            take_sample(now, now - prev);
            prev = now;
        }
    }
};

MeterSession::MeterSession(std::vector<PowerSource> sources, MeterConfig config)
    : impl_(std::make_unique<Impl>()) {
    if (config.interval_seconds <= 0.0) {
        throw std::invalid_argument("sampling interval must be positive");
    }
    if (config.pue < 1.0) {
        throw std::invalid_argument("PUE must be >= 1");
    }
    if (config.carbon_intensity < 0.0) {
        throw std::invalid_argument("carbon intensity must be nonnegative");
    }
    impl_->sources = std::move(sources);
    impl_->config = config;
}

MeterSession::~MeterSession() {
    if (impl_ && impl_->active) {
        try {
            stop();
        } catch (...) {
        }
    }
}

bool MeterSession::running() const { return impl_->active; }

void MeterSession::start() {
    if (impl_->active) {
        throw std::logic_error("meter session already started");
    }
    bool expected = false;
    if (!g_session_active.compare_exchange_strong(expected, true)) {
        throw std::logic_error("another meter session is active in this process");
    }
    impl_->stop_requested = false;
    impl_->samples.clear();
    impl_->rapl_joules.clear();
    impl_->rapl_prev_uj.clear();
    impl_->started_at = monotonic_seconds();
    impl_->take_sample(impl_->started_at, 0.0);
    impl_->active = true;
    impl_->sampler = std::thread([this] { impl_->run(); });
}

EnergyReport MeterSession::stop() {
    if (!impl_->active) {
        throw std::logic_error("meter session not started");
    }
    {
        std::lock_guard lock(impl_->mutex);
        impl_->stop_requested = true;
    }
    impl_->cv.notify_all();
    impl_->sampler.join();

    // Final forced sample so short sessions still bracket the workload.
    const double now = monotonic_seconds();
    const double prev_ts =
        impl_->samples.empty() ? impl_->started_at : impl_->samples.back().timestamp;
    if (now > prev_ts) {
        impl_->take_sample(now, now - prev_ts);
    }
    impl_->active = false;
    g_session_active.store(false);

    EnergyReport report;
    report.duration_seconds = now - impl_->started_at;
    report.sample_count = impl_->samples.size();
    report.warnings = impl_->warnings;

    // Wattage-sampled components integrate by trapezoid; RAPL domains carry
    // exact counter deltas and replace their trapezoid estimate.
    report.joules_by_component = integrate(impl_->samples);
    for (const auto& [component, joules] : impl_->rapl_joules) {
        report.joules_by_component[component] = joules;
    }

    for (const auto& [component, joules] : report.joules_by_component) {
        report.total_joules += joules;
    }
    report.pue_adjusted_joules = apply_pue(report.total_joules, impl_->config.pue);
    report.kwh = report.pue_adjusted_joules / 3.6e6;
    report.kg_co2eq = emissions(report.kwh, impl_->config.carbon_intensity);
    return report;
}

}  // namespace greenfront
