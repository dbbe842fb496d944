#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ecl/curriculum.hpp"
#include "ecl/domain_probe.hpp"
#include "ecl/generator.hpp"
#include "ecl/model.hpp"

namespace ecl {

/// Everything a run needs. Parsed from one JSON document; unknown keys are
/// rejected and every field is validated before any work starts.
struct RunConfig {
    std::uint64_t seed = 7;
    GeneratorSpec generator{};
    std::vector<double> fractions = {0.05, 0.10, 0.25, 0.50, 1.00};
    std::size_t n_seeds = 10;
    ModelConfig model{};
    DomainProbeConfig domain_probe{};
    TrainConfig training{};
    /// Must be set to run with training.inv_ratio != 0.8.
    bool allow_inv_ratio_override = false;
    std::string output_dir = "ecl-out";
    std::size_t jobs = 1;

    void validate() const;
    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_config(const std::string& json_text);
std::string emit_config(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);

std::string emit_generator_spec(const GeneratorSpec& spec);
GeneratorSpec parse_generator_spec(const std::string& json_text);

}  // namespace ecl
