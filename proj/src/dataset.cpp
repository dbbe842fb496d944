#include "ecl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "ecl/error.hpp"
#include "ecl/rng.hpp"
#include "ecl/text_io.hpp"

namespace ecl {

std::string to_string(Split s) { return s == Split::Train ? "train" : "test"; }

bool Dataset::is_seen(int device) const {
    return std::find(seen_devices.begin(), seen_devices.end(), device) != seen_devices.end();
}

void Dataset::validate() const {
    if (num_scenes <= 0) throw ValidationError("dataset needs at least one scene class");
    if (num_devices <= 0) throw ValidationError("dataset needs at least one device");
    if (feature_dim == 0) throw ValidationError("feature dimension must be positive");
    if (samples.empty()) throw ValidationError("dataset is empty");

    std::set<int> seen(seen_devices.begin(), seen_devices.end());
    std::set<int> unseen(unseen_devices.begin(), unseen_devices.end());
    for (int d : seen) {
        if (d < 0 || d >= num_devices) throw ValidationError("seen device index out of range");
        if (unseen.count(d)) {
            throw ValidationError("device " + std::to_string(d) + " is both seen and unseen");
        }
    }
    for (int d : unseen) {
        if (d < 0 || d >= num_devices) throw ValidationError("unseen device index out of range");
    }

    std::unordered_set<SampleId> ids;
    ids.reserve(samples.size());
    for (const auto& s : samples) {
        const std::string who = "sample " + std::to_string(s.id);
        if (!ids.insert(s.id).second) throw ValidationError("duplicate " + who);
        if (s.scene < 0 || s.scene >= num_scenes) {
            throw ValidationError(who + ": scene label " + std::to_string(s.scene) +
                                  " out of range");
        }
        if (s.device < 0 || s.device >= num_devices) {
            throw ValidationError(who + ": device label " + std::to_string(s.device) +
                                  " >= device count " + std::to_string(num_devices));
        }
        if (!seen.count(s.device) && !unseen.count(s.device)) {
            throw ValidationError(who + ": device " + std::to_string(s.device) +
                                  " is neither seen nor unseen");
        }
        if (split == Split::Train && !seen.count(s.device)) {
            throw ValidationError(who + ": train split holds unseen device " +
                                  std::to_string(s.device));
        }
        if (s.features.size() != feature_dim) {
            throw ValidationError(who + ": expected " + std::to_string(feature_dim) +
                                  " features, got " + std::to_string(s.features.size()));
        }
        for (double v : s.features) {
            if (!std::isfinite(v)) throw ValidationError(who + ": non-finite feature");
        }
    }
}

Dataset Dataset::select(const std::vector<std::size_t>& indices) const {
    Dataset out = *this;
    out.samples.clear();
    out.samples.reserve(indices.size());
    for (std::size_t i : indices) out.samples.push_back(samples.at(i));
    return out;
}

Matrix Dataset::feature_matrix() const {
    Matrix m(samples.size(), feature_dim);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::copy(samples[i].features.begin(), samples[i].features.end(), m.row(i).begin());
    }
    return m;
}

Matrix Dataset::feature_matrix(const std::vector<std::size_t>& indices) const {
    Matrix m(indices.size(), feature_dim);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto& f = samples[indices[r]].features;
        std::copy(f.begin(), f.end(), m.row(r).begin());
    }
    return m;
}

std::vector<int> Dataset::scene_labels() const {
    std::vector<int> y;
    y.reserve(samples.size());
    for (const auto& s : samples) y.push_back(s.scene);
    return y;
}

// ---------------------------------------------------------------------------

std::string dataset_to_string(const Dataset& d) {
    std::string out;
    out.reserve(d.samples.size() * (d.feature_dim * 20 + 24) + 128);
    out += "ecl-dataset 1\n";
    out += "split " + to_string(d.split) + "\n";
    out += "scenes " + std::to_string(d.num_scenes) + "\n";
    out += "devices " + std::to_string(d.num_devices) + "\n";
    out += "features " + std::to_string(d.feature_dim) + "\n";
    out += "seen";
    for (int s : d.seen_devices) out += " " + std::to_string(s);
    out += "\nunseen";
    for (int s : d.unseen_devices) out += " " + std::to_string(s);
    out += "\nsamples " + std::to_string(d.samples.size()) + "\n";
    for (const auto& s : d.samples) {
        out += std::to_string(s.id);
        out += ' ';
        out += std::to_string(s.scene);
        out += ' ';
        out += std::to_string(s.device);
        for (double v : s.features) {
            out += ' ';
            append_double(out, v);
        }
        out += '\n';
    }
    out += "end\n";
    return out;
}

namespace {

std::vector<int> parse_int_list(LineReader& r, std::string_view key) {
    auto toks = r.expect_key(key);
    std::vector<int> v;
    for (auto t : toks) v.push_back(r.parse_int(t));
    return v;
}

std::int64_t parse_single(LineReader& r, std::string_view key) {
    auto toks = r.expect_key(key);
    if (toks.size() != 1) r.fail(std::string(key) + " expects exactly one value");
    return r.parse_int64(toks[0]);
}

}  // namespace

Dataset dataset_from_string(const std::string& text) {
    LineReader r(text);
    {
        auto toks = r.expect_key("ecl-dataset");
        if (toks.size() != 1 || toks[0] != "1") r.fail("unsupported dataset version");
    }
    Dataset d;
    {
        auto toks = r.expect_key("split");
        if (toks.size() != 1 || (toks[0] != "train" && toks[0] != "test")) {
            r.fail("split must be train or test");
        }
        d.split = toks[0] == "train" ? Split::Train : Split::Test;
    }
    d.num_scenes = static_cast<int>(parse_single(r, "scenes"));
    d.num_devices = static_cast<int>(parse_single(r, "devices"));
    const auto f = parse_single(r, "features");
    if (f <= 0) r.fail("features must be positive");
    d.feature_dim = static_cast<std::size_t>(f);
    d.seen_devices = parse_int_list(r, "seen");
    d.unseen_devices = parse_int_list(r, "unseen");
    const auto n = parse_single(r, "samples");
    if (n < 0) r.fail("negative sample count");

    d.samples.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        auto toks = r.next_record();
        if (toks.empty()) r.fail("truncated file: expected " + std::to_string(n) + " samples, got " +
                                 std::to_string(i));
        if (toks.size() != 3 + d.feature_dim) {
            r.fail("expected " + std::to_string(3 + d.feature_dim) + " fields, got " +
                   std::to_string(toks.size()));
        }
        Sample s;
        s.id = r.parse_int64(toks[0]);
        s.scene = r.parse_int(toks[1]);
        s.device = r.parse_int(toks[2]);
        s.features.reserve(d.feature_dim);
        for (std::size_t k = 0; k < d.feature_dim; ++k) s.features.push_back(r.parse_double(toks[3 + k]));
        d.samples.push_back(std::move(s));
    }
    {
        auto toks = r.next_record();
        if (toks.empty()) r.fail("truncated file: missing end line");
        if (toks.size() != 1 || toks[0] != "end") r.fail("expected end line after the last sample");
    }
    if (!r.next_record().empty()) r.fail("trailing data after end line");
    d.validate();
    return d;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
    d.validate();
    write_text_file(path, dataset_to_string(d));
}

Dataset load_dataset(const std::filesystem::path& path) {
    return dataset_from_string(read_text_file(path));
}

// ---------------------------------------------------------------------------

int fraction_to_percent(double fraction) {
    for (int p : kSubsetPercents) {
        if (std::abs(fraction * 100.0 - p) < 1e-9) return p;
    }
    throw ValidationError("unsupported subset fraction " + format_double(fraction) +
                          " (expected one of 0.05, 0.10, 0.25, 0.50, 1.00)");
}

Dataset subset(const Dataset& train, double fraction, std::uint64_t seed) {
    const int percent = fraction_to_percent(fraction);
    if (percent == 100) return train;

    std::map<std::pair<int, int>, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < train.samples.size(); ++i) {
        const auto& s = train.samples[i];
        strata[{s.scene, s.device}].push_back(i);
    }
    std::vector<std::size_t> keep;
    for (auto& [key, members] : strata) {
        const auto stratum_key = (static_cast<std::uint64_t>(key.first) << 32) |
                                 static_cast<std::uint32_t>(key.second);
        Rng rng(derive_seed(seed, SeedPurpose::Subset, stratum_key));
        rng.shuffle(members);
        const std::size_t take = (members.size() * static_cast<std::size_t>(percent) + 99) / 100;
        keep.insert(keep.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    }
    std::sort(keep.begin(), keep.end());
    return train.select(keep);
}

}  // namespace ecl
