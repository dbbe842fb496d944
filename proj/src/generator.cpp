#include "ecl/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecl/error.hpp"
#include "ecl/rng.hpp"

namespace ecl {

std::string to_string(CurveKind k) { return k == CurveKind::Polynomial ? "polynomial" : "resonance"; }

CurveKind curve_kind_from_string(const std::string& s) {
    if (s == "polynomial") return CurveKind::Polynomial;
    if (s == "resonance") return CurveKind::Resonance;
    throw ValidationError("generator: unknown curve_kind '" + s + "'");
}

void GeneratorSpec::validate() const {
    if (num_scenes < 2) throw ValidationError("generator: need at least 2 scenes");
    if (feature_dim == 0) throw ValidationError("generator: feature_dim must be positive");
    if (train_counts.empty()) throw ValidationError("generator: need at least one seen device");
    for (std::size_t d = 0; d < train_counts.size(); ++d) {
        if (train_counts[d] == 0) {
            throw ValidationError("generator: train count of device " + std::to_string(d) +
                                  " is zero");
        }
    }
    if (num_unseen_devices < 0) throw ValidationError("generator: negative unseen device count");
    if (test_count_per_device == 0) throw ValidationError("generator: test count is zero");
    if (!(noise_std >= 0.0)) throw ValidationError("generator: noise_std must be >= 0");
    if (!(device_shift_strength >= 0.0)) {
        throw ValidationError("generator: device_shift_strength must be >= 0");
    }
    if (min_bumps < 1 || max_bumps < min_bumps) throw ValidationError("generator: bad bump range");
    if (!(bump_width_min > 0.0) || bump_width_max < bump_width_min) {
        throw ValidationError("generator: bad bump width range");
    }
    if (bump_amplitude_max < bump_amplitude_min) {
        throw ValidationError("generator: bad bump amplitude range");
    }
    if (curve_degree < 0) throw ValidationError("generator: curve_degree must be >= 0");
    if (!(curve_scale >= 0.0)) throw ValidationError("generator: curve_scale must be >= 0");
    if (resonance_count < 0) throw ValidationError("generator: resonance_count must be >= 0");
    if (!(resonance_width_min > 0.0) || resonance_width_max < resonance_width_min) {
        throw ValidationError("generator: bad resonance width range");
    }
    if (!(contrast_loss >= 0.0)) throw ValidationError("generator: contrast_loss must be >= 0");
    if (!(ambiguous_fraction >= 0.0 && ambiguous_fraction <= 1.0)) {
        throw ValidationError("generator: ambiguous_fraction must lie in [0, 1]");
    }
    if (!(ambiguous_gain_max >= 0.0) || !(visible_gain_min >= 0.0 && visible_gain_min <= 1.0)) {
        throw ValidationError("generator: bad gain ranges");
    }
    if (!(scene_device_coupling >= 0.0 && scene_device_coupling < 1.0)) {
        throw ValidationError("generator: scene_device_coupling must lie in [0, 1)");
    }
    for (std::size_t d = 0; d < train_counts.size(); ++d) {
        for (std::size_t n : scene_allocation(*this, static_cast<int>(d))) {
            if (n == 0) {
                throw ValidationError("generator: device " + std::to_string(d) +
                                      " has a scene with zero train samples");
            }
        }
        if (!test_follows_coupling) continue;
        for (std::size_t n : scene_allocation(*this, static_cast<int>(d), test_count_per_device)) {
            if (n == 0) {
                throw ValidationError("generator: device " + std::to_string(d) +
                                      " has a scene with zero test samples");
            }
        }
    }
}

std::vector<std::vector<double>> scene_templates(const GeneratorSpec& spec) {
    Rng rng(derive_seed(spec.seed, SeedPurpose::Generation, 0));
    const auto F = spec.feature_dim;
    std::vector<std::vector<double>> out(static_cast<std::size_t>(spec.num_scenes),
                                         std::vector<double>(F, 0.0));
    for (auto& tpl : out) {
        const auto span = static_cast<std::uint64_t>(spec.max_bumps - spec.min_bumps + 1);
        const int bumps = spec.min_bumps + static_cast<int>(rng.below(span));
        for (int b = 0; b < bumps; ++b) {
            const double centre = rng.uniform(0.0, static_cast<double>(F - 1));
            const double width = rng.uniform(spec.bump_width_min, spec.bump_width_max);
            const double amp = rng.uniform(spec.bump_amplitude_min, spec.bump_amplitude_max);
            for (std::size_t f = 0; f < F; ++f) {
                const double z = (static_cast<double>(f) - centre) / width;
                tpl[f] += amp * std::exp(-0.5 * z * z);
            }
        }
    }
    return out;
}

namespace {

std::vector<std::vector<double>> legendre_basis(std::size_t K, std::size_t F) {
    std::vector<std::vector<double>> basis(K, std::vector<double>(F, 0.0));
    for (std::size_t f = 0; f < F; ++f) {
        const double t = F > 1 ? 2.0 * static_cast<double>(f) / static_cast<double>(F - 1) - 1.0 : 0.0;
        double prev = 1.0, cur = t;
        basis[0][f] = 1.0;
        if (K > 1) basis[1][f] = t;
        for (std::size_t k = 1; k + 1 < K; ++k) {
            const double next = ((2.0 * k + 1.0) * t * cur - static_cast<double>(k) * prev) /
                                static_cast<double>(k + 1);
            prev = cur;
            cur = next;
            basis[k + 1][f] = next;
        }
    }
    return basis;
}

}  // namespace

std::vector<std::vector<double>> device_curves(const GeneratorSpec& spec) {
    Rng rng(derive_seed(spec.seed, SeedPurpose::Generation, 1));
    const auto F = spec.feature_dim;
    const auto D = static_cast<std::size_t>(spec.num_devices());
    std::vector<std::vector<double>> curves(D, std::vector<double>(F, 0.0));
    // Every random draw happens regardless of strength, so strength 0 and 1
    // share all other streams.
    if (spec.curve_kind == CurveKind::Polynomial) {
        const auto K = static_cast<std::size_t>(spec.curve_degree) + 1;
        const auto basis = legendre_basis(K, F);
        for (auto& curve : curves) {
            for (std::size_t k = 0; k < K; ++k) {
                const double a = rng.normal(0.0, spec.curve_scale) * spec.device_shift_strength;
                for (std::size_t f = 0; f < F; ++f) curve[f] += a * basis[k][f];
            }
        }
        return curves;
    }
    for (auto& curve : curves) {
        for (int r = 0; r < spec.resonance_count; ++r) {
            const double centre = rng.uniform(0.0, static_cast<double>(F - 1));
            const double width = rng.uniform(spec.resonance_width_min, spec.resonance_width_max);
            const double height = rng.normal(0.0, spec.curve_scale) * spec.device_shift_strength;
            for (std::size_t f = 0; f < F; ++f) {
                const double z = (static_cast<double>(f) - centre) / width;
                curve[f] += height * std::exp(-0.5 * z * z);
            }
        }
    }
    return curves;
}

std::vector<std::size_t> scene_allocation(const GeneratorSpec& spec, int device) {
    return scene_allocation(spec, device, spec.train_counts.at(static_cast<std::size_t>(device)));
}

std::vector<std::size_t> scene_allocation(const GeneratorSpec& spec, int device, std::size_t n) {
    const auto C = static_cast<std::size_t>(spec.num_scenes);
    std::size_t preferred_total = 0;
    if (device > 0 && device < spec.num_seen_devices() && spec.scene_device_coupling > 0.0) {
        preferred_total = static_cast<std::size_t>(
            std::llround(spec.scene_device_coupling * static_cast<double>(n)));
    }
    const std::size_t rest = n - preferred_total;
    std::vector<std::size_t> alloc(C, rest / C);
    for (std::size_t c = 0; c < rest % C; ++c) ++alloc[c];
    if (preferred_total > 0) {
        const std::size_t p1 = (2 * static_cast<std::size_t>(device - 1)) % C;
        const std::size_t p2 = (p1 + 1) % C;
        alloc[p1] += preferred_total - preferred_total / 2;
        alloc[p2] += preferred_total / 2;
    }
    return alloc;
}

namespace {

struct SampleRecipe {
    int scene;
    int device;
};

double draw_gain(const GeneratorSpec& spec, Rng& rng) {
    if (rng.uniform() < spec.ambiguous_fraction) return rng.uniform(0.0, spec.ambiguous_gain_max);
    return rng.uniform(spec.visible_gain_min, 1.0);
}

void synthesize(const GeneratorSpec& spec, const std::vector<std::vector<double>>& templates,
                const std::vector<std::vector<double>>& curves,
                const std::vector<SampleRecipe>& recipes, SampleId first_id, Dataset& out,
                std::vector<double>& gains) {
    out.samples.reserve(recipes.size());
    gains.reserve(recipes.size());
    for (std::size_t i = 0; i < recipes.size(); ++i) {
        const SampleId id = first_id + static_cast<SampleId>(i);
        Rng rng(derive_seed(spec.seed, SeedPurpose::Generation, 1000 + static_cast<std::uint64_t>(id)));
        const double g = draw_gain(spec, rng);
        const auto& tpl = templates[static_cast<std::size_t>(recipes[i].scene)];
        const auto& curve = curves[static_cast<std::size_t>(recipes[i].device)];
        Sample s;
        s.id = id;
        s.scene = recipes[i].scene;
        s.device = recipes[i].device;
        s.features.resize(spec.feature_dim);
        const double keep = std::max(0.0, 1.0 - g * spec.contrast_loss * spec.device_shift_strength);
        for (std::size_t f = 0; f < spec.feature_dim; ++f) {
            s.features[f] = keep * tpl[f] + g * curve[f] + rng.normal(0.0, spec.noise_std);
        }
        out.samples.push_back(std::move(s));
        gains.push_back(g);
    }
}

}  // namespace

GeneratedData generate(const GeneratorSpec& spec) {
    spec.validate();
    const auto templates = scene_templates(spec);
    const auto curves = device_curves(spec);
    const int D_seen = spec.num_seen_devices();
    const int D_total = spec.num_devices();

    GeneratedData out;
    for (Dataset* d : {&out.train, &out.test}) {
        d->num_scenes = spec.num_scenes;
        d->num_devices = D_total;
        d->feature_dim = spec.feature_dim;
        d->seen_devices.resize(static_cast<std::size_t>(D_seen));
        std::iota(d->seen_devices.begin(), d->seen_devices.end(), 0);
        d->unseen_devices.resize(static_cast<std::size_t>(spec.num_unseen_devices));
        std::iota(d->unseen_devices.begin(), d->unseen_devices.end(), D_seen);
    }
    out.train.split = Split::Train;
    out.test.split = Split::Test;

    std::vector<SampleRecipe> train_recipes;
    for (int d = 0; d < D_seen; ++d) {
        const auto alloc = scene_allocation(spec, d);
        for (int c = 0; c < spec.num_scenes; ++c) {
            for (std::size_t k = 0; k < alloc[static_cast<std::size_t>(c)]; ++k) {
                train_recipes.push_back({c, d});
            }
        }
    }
    std::vector<SampleRecipe> test_recipes;
    const auto C = static_cast<std::size_t>(spec.num_scenes);
    for (int d = 0; d < D_total; ++d) {
        std::vector<std::size_t> alloc(C, spec.test_count_per_device / C);
        for (std::size_t c = 0; c < spec.test_count_per_device % C; ++c) ++alloc[c];
        if (spec.test_follows_coupling) alloc = scene_allocation(spec, d, spec.test_count_per_device);
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t k = 0; k < alloc[c]; ++k) test_recipes.push_back({static_cast<int>(c), d});
        }
    }

    synthesize(spec, templates, curves, train_recipes, 0, out.train, out.train_gain);
    synthesize(spec, templates, curves, test_recipes, static_cast<SampleId>(train_recipes.size()),
               out.test, out.test_gain);
    out.train.validate();
    out.test.validate();
    return out;
}

}  // namespace ecl
