#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace ecl {

// Independent random streams derived from one master seed. Each purpose gets
// its own stream so that changing e.g. the shuffling policy never perturbs
// parameter initialization.
enum class SeedPurpose : std::uint64_t {
    Generation = 1,
    Subset = 2,
    Init = 3,
    WarmUpShuffle = 4,
    DomainInit = 5,
    DomainShuffle = 6,
    ValidationSplit = 7,
    Stage1Shuffle = 8,
    Stage2Inv = 9,
    Stage2Spec = 10,
    BaselineShuffle = 11,
    Run = 12,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// derive_seed(m, p, i) = splitmix64(splitmix64(splitmix64(m) ^ p) ^ i).
/// Counter-based: the i-th seed for a purpose never depends on how many
/// other seeds were drawn.
std::uint64_t derive_seed(std::uint64_t master, SeedPurpose purpose,
                          std::uint64_t index = 0) noexcept;

/// mt19937_64 with portable conversions. The engine sequence is fixed by the
/// standard; the <random> distributions are not, so uniform/normal/below are
/// implemented here to keep outputs identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (second variate cached).
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        shuffle(std::span<T>(items));
    }

    /// FNV-1a hash of the serialized engine state; used as a checkpoint tag in
    /// metrics logs.
    std::uint64_t state_hash() const;

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept;

}  // namespace ecl
