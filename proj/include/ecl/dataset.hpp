#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ecl/matrix.hpp"

namespace ecl {

using SampleId = std::int64_t;

struct Sample {
    SampleId id = 0;
    std::vector<double> features;
    int scene = 0;
    int device = 0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

enum class Split { Train, Test };

std::string to_string(Split s);

struct Dataset {
    std::vector<Sample> samples;
    int num_scenes = 0;
    int num_devices = 0;  // D_total, seen + unseen
    std::size_t feature_dim = 0;
    std::vector<int> seen_devices;
    std::vector<int> unseen_devices;
    Split split = Split::Train;

    std::size_t size() const noexcept { return samples.size(); }
    bool is_seen(int device) const;

    /// Throws ValidationError (naming the offending sample id where there is
    /// one) if any invariant is broken: label ranges, feature length and
    /// finiteness, unique ids, disjoint seen/unseen sets covering all labels,
    /// train split restricted to seen devices.
    void validate() const;

    /// Copy holding only the given sample indices, in the given order.
    Dataset select(const std::vector<std::size_t>& indices) const;

    /// Rows gathered into an N x F matrix.
    Matrix feature_matrix() const;
    Matrix feature_matrix(const std::vector<std::size_t>& indices) const;
    std::vector<int> scene_labels() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Text format, version 1. Header lines, then one record per sample:
//
//   ecl-dataset 1
//   split train|test
//   scenes C
//   devices D_total
//   features F
//   seen <device indices...>
//   unseen <device indices...>
//   samples N
//   <id> <scene> <device> <f_0> ... <f_{F-1}>      (N lines)
//   end
//
// Values are whitespace separated; doubles use shortest round-trip decimal.
// The closing `end` line makes a file cut inside its last number detectable.
std::string dataset_to_string(const Dataset& d);
Dataset dataset_from_string(const std::string& text);

void save_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Fractions supported by subset(), in percent.
inline constexpr int kSubsetPercents[] = {5, 10, 25, 50, 100};

/// Maps 0.05/0.10/0.25/0.50/1.00 to percent; throws ValidationError otherwise.
int fraction_to_percent(double fraction);

/// Stratified nested subset. Every (scene, device) stratum keeps
/// ceil(fraction * size) members chosen by a seeded permutation of that
/// stratum; since the permutation depends only on (seed, stratum), the 5%
/// subset is contained in the 10% one and so on. Output keeps dataset order.
Dataset subset(const Dataset& train, double fraction, std::uint64_t seed);

}  // namespace ecl
