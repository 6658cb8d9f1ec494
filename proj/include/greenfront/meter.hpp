#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace greenfront {

// One RAPL powercap domain: a cumulative microjoule counter with wraparound.
struct RaplDomain {
    std::string component;       // e.g. "package-0"
    std::string energy_path;     // .../energy_uj
    double max_range_uj = 0.0;   // sibling max_energy_range_uj
};

struct PowerSource {
    enum class Kind { Rapl, GpuPoll, Constant };

    Kind kind = Kind::Constant;
    std::vector<RaplDomain> rapl_domains;  // rapl
    std::string poll_command;              // gpu_poll
    std::string component;                 // constant
    double watts = 0.0;                    // constant
    std::string provenance;                // constant, e.g. "tdp-fallback"

    static PowerSource constant(std::string component, double watts,
                                std::string provenance = "constant");
    static PowerSource rapl(std::vector<RaplDomain> domains);
    static PowerSource gpu_poll(std::string command);
};

struct PowerSample {
    double timestamp = 0.0;  // monotonic seconds
    std::map<std::string, double> watts_by_component;
};

struct MeterConfig {
    double interval_seconds = 1.0;
    double pue = 1.0;
    double carbon_intensity = 0.2375;  // kgCO2eq per kWh

    // Component inventory for constant-power fallbacks.
    double cpu_tdp_watts = 0.0;
    double cpu_core_fraction = 1.0;
    double ram_gb = 0.0;
    bool gpu_present = false;
    double gpu_tdp_watts = 0.0;
};

struct EnergyReport {
    std::map<std::string, double> joules_by_component;
    double total_joules = 0.0;
    double pue_adjusted_joules = 0.0;
    double kwh = 0.0;
    double kg_co2eq = 0.0;
    double duration_seconds = 0.0;
    std::size_t sample_count = 0;
    std::vector<std::string> warnings;
};

// Wraparound-safe microjoule counter difference, converted to joules.
double read_rapl_delta(double prev_counter_uj, double curr_counter_uj,
                       double max_range_uj);

// Constant-power model: RAM at 0.375 W/GB, CPU at TDP x core fraction.
std::map<std::string, double> estimate_constant_power(const MeterConfig& inventory);

// Trapezoidal power-to-energy integration, per component.
std::map<std::string, double> integrate(const std::vector<PowerSample>& samples);

double apply_pue(double joules, double pue);

double emissions(double kwh, double intensity);

// Builds the source list for a machine: RAPL when the powercap files are
// readable, otherwise a constant TDP fallback; RAM always constant; GPU via
// nvidia-smi polling when present (constant TDP when the tool is missing).
std::vector<PowerSource> build_sources(const MeterConfig& config,
                                       std::vector<std::string>* warnings = nullptr);

// Background power sampler. At most one session may be active per process:
// trials run exclusively, so machine-level attribution equals trial
// attribution. start/stop are the only cross-thread interactions.
class MeterSession {
public:
    MeterSession(std::vector<PowerSource> sources, MeterConfig config);
    ~MeterSession();

    MeterSession(const MeterSession&) = delete;
    MeterSession& operator=(const MeterSession&) = delete;

    void start();
    EnergyReport stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Convenience wrapper: meter `workload` with the machine's detected sources.
template <typename Workload>
EnergyReport measure(const MeterConfig& config, Workload&& workload) {
    std::vector<std::string> warnings;
    MeterSession session(build_sources(config, &warnings), config);
    session.start();
    workload();
    EnergyReport report = session.stop();
    report.warnings.insert(report.warnings.end(), warnings.begin(), warnings.end());
    return report;
}

}  // namespace greenfront
