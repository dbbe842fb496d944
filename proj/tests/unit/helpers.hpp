#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "ecl/dataset.hpp"
#include "ecl/matrix.hpp"
#include "ecl/rng.hpp"

namespace testing {

inline ecl::Matrix random_matrix(std::size_t rows, std::size_t cols, ecl::Rng& rng, double scale = 1.0) {
    ecl::Matrix m(rows, cols);
    for (auto& v : m.data()) v = rng.normal(0.0, scale);
    return m;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        ecl::Rng rng(std::hash<std::string>{}(tag));
        path_ = std::filesystem::temp_directory_path() /
                ("ecl-test-" + tag + "-" + std::to_string(rng.next_u64() % 1000000007ULL));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Small labelled dataset: features are a per-scene mean plus noise, with an
/// optional per-device offset along feature 0.
inline ecl::Dataset toy_dataset(int scenes, int devices, std::size_t per_cell, std::size_t F,
                                std::uint64_t seed, double device_offset = 0.0) {
    ecl::Dataset d;
    d.num_scenes = scenes;
    d.num_devices = devices;
    d.feature_dim = F;
    for (int k = 0; k < devices; ++k) d.seen_devices.push_back(k);
    ecl::Rng rng(seed);
    ecl::SampleId id = 0;
    for (int dev = 0; dev < devices; ++dev) {
        for (int c = 0; c < scenes; ++c) {
            for (std::size_t k = 0; k < per_cell; ++k) {
                ecl::Sample s;
                s.id = id++;
                s.scene = c;
                s.device = dev;
                s.features.resize(F);
                for (std::size_t f = 0; f < F; ++f) {
                    s.features[f] = (f % static_cast<std::size_t>(scenes) == static_cast<std::size_t>(c) ? 2.0 : 0.0) +
                                    rng.normal(0.0, 0.5);
                }
                s.features[0] += device_offset * dev;
                d.samples.push_back(std::move(s));
            }
        }
    }
    return d;
}

}  // namespace testing
