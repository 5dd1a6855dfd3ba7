#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "retrial/arrivals.hpp"
#include "retrial/engine.hpp"

namespace retrial {

enum class Mode { retrial, standard, markov_oracle, dm2_oracle };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct ExperimentConfig {
    Mode mode = Mode::retrial;
    ArrivalSpec arrival = Deterministic{1.0};
    SystemParams params{2, 1.0, 10.0};
    double horizon = 100'000.0;
    std::uint64_t seed = 1;
    int replications = 1;
    std::optional<double> epsilon;  // defaults to 1 / (merged horizon)
    long ctmc_truncation = 60;
    long orbit_cap = 1'000'000;
    double burn_in = 0.0;
    int threads = 0;  // 0: hardware concurrency
    bool trace = false;
    std::string output_dir;

    void validate() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` text. Values are numbers, bare or quoted strings, or
/// one-level inline tables such as `arrival = {kind="poisson", rate=1}`.
/// `#` starts a comment. Unknown keys are rejected.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Inverse of parse_config for the arrival key, e.g. `{kind="deterministic", interval=1}`.
std::string format_arrival(const ArrivalSpec& spec);

/// Parses an inline-table arrival value.
ArrivalSpec parse_arrival(std::string_view text);

}  // namespace retrial
