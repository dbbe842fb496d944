#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecl/dataset.hpp"

namespace ecl {

enum class CurveKind { Polynomial, Resonance };

std::string to_string(CurveKind k);
CurveKind curve_kind_from_string(const std::string& s);

/// Parameters of the synthetic multi-device scene benchmark.
///
/// A sample of scene c recorded on device d is
///
///   x = template_c + g * curve_d + noise,   noise ~ N(0, noise_std^2) per bin,
///
/// where template_c is a sum of Gaussian bumps over frequency bins and curve_d
/// is a Legendre polynomial of degree <= curve_degree over the normalized bin
/// axis, scaled by device_shift_strength. The per-sample coloration gain g
/// models how strongly the device response shows in a recording: a fraction
/// `ambiguous_fraction` of samples is drawn with g ~ U(0, ambiguous_gain_max),
/// the rest with g ~ U(visible_gain_min, 1).
///
/// Devices 0..D_seen-1 are seen (appear in train), D_seen..D_seen+D_unseen-1
/// are test-only.
struct GeneratorSpec {
    std::uint64_t seed = 2024;
    int num_scenes = 10;
    std::size_t feature_dim = 64;
    /// Train sample count per seen device; its length is D_seen.
    std::vector<std::size_t> train_counts = {3600, 480, 480, 480, 480, 480};
    int num_unseen_devices = 3;
    /// Test samples per device (seen and unseen), split evenly over scenes.
    std::size_t test_count_per_device = 300;

    double noise_std = 0.6;
    double device_shift_strength = 1.0;

    int min_bumps = 2;
    int max_bumps = 4;
    double bump_width_min = 2.0;
    double bump_width_max = 6.0;
    double bump_amplitude_min = 0.5;
    double bump_amplitude_max = 1.5;

    /// Polynomial: Legendre series of degree <= curve_degree. Resonance: a sum
    /// of resonance_count Gaussian peaks/notches with random centre, width in
    /// [resonance_width_min, resonance_width_max] and N(0, curve_scale) height.
    CurveKind curve_kind = CurveKind::Polynomial;
    int curve_degree = 4;
    /// Standard deviation of each coefficient (or peak height) before
    /// strength scaling.
    double curve_scale = 1.0;
    int resonance_count = 4;
    double resonance_width_min = 2.0;
    double resonance_width_max = 6.0;

    /// Visible coloration also flattens the scene template:
    /// template * (1 - g * contrast_loss * device_shift_strength), floored at 0.
    double contrast_loss = 0.0;

    double ambiguous_fraction = 0.3;
    double ambiguous_gain_max = 0.15;
    double visible_gain_min = 0.7;

    /// Share of each non-reference seen device's train samples concentrated on
    /// that device's two "preferred" scenes (the rest spread evenly); 0
    /// gives balanced scenes.
    double scene_device_coupling = 0.0;
    /// Seen devices keep their scene preference in the test split. Each
    /// coupled device prefers a different scene pair, so with
    /// num_scenes == 2 * (D_seen - 1) the seen-device test pool stays
    /// scene-balanced. Unseen devices are always balanced.
    bool test_follows_coupling = false;

    int num_seen_devices() const noexcept { return static_cast<int>(train_counts.size()); }
    int num_devices() const noexcept { return num_seen_devices() + num_unseen_devices; }

    void validate() const;
    friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

struct GeneratedData {
    Dataset train;
    Dataset test;
    /// Coloration gain g per sample, index-aligned with the datasets.
    std::vector<double> train_gain;
    std::vector<double> test_gain;
};

/// Pure function of spec. Train ids are 0..N_train-1, test ids follow.
GeneratedData generate(const GeneratorSpec& spec);

/// Scene templates (C x F), device-independent by construction.
std::vector<std::vector<double>> scene_templates(const GeneratorSpec& spec);
/// Device transfer curves (D_total x F), already scaled by shift strength.
std::vector<std::vector<double>> device_curves(const GeneratorSpec& spec);

/// Number of train samples of each scene for a seen device.
std::vector<std::size_t> scene_allocation(const GeneratorSpec& spec, int device);
/// Same split rule applied to n samples (used for coupled test pools).
std::vector<std::size_t> scene_allocation(const GeneratorSpec& spec, int device, std::size_t n);

}  // namespace ecl
