#include "ecl/domain_probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

#include "ecl/error.hpp"
#include "ecl/rng.hpp"
#include "ecl/text_io.hpp"

namespace ecl {

std::string to_string(FeatureSource s) { return s == FeatureSource::WarmUp ? "warmup" : "random"; }

FeatureSource feature_source_from_string(const std::string& s) {
    if (s == "warmup") return FeatureSource::WarmUp;
    if (s == "random") return FeatureSource::Random;
    throw ValidationError("unknown feature_source '" + s + "' (expected warmup or random)");
}

double entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return std::max(h, 0.0);
}

EntropyScore entropy(const DevicePosterior& p) { return {p.id, entropy(p.probs)}; }

namespace {

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
    Matrix out(idx.size(), m.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto src = m.row(idx[r]);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

}  // namespace

DomainClassifier train_domain_classifier(const Matrix& features, std::span<const int> device_labels,
                                         const DomainProbeConfig& cfg, std::uint64_t seed) {
    if (features.rows() != device_labels.size()) {
        throw ShapeError("domain classifier: feature rows do not match label count");
    }
    if (cfg.batch_size == 0) throw ValidationError("domain classifier: batch_size must be >= 1");
    if (cfg.hidden_width == 0) throw ValidationError("domain classifier: hidden_width must be >= 1");
    std::set<int> distinct(device_labels.begin(), device_labels.end());
    if (distinct.size() < 2) {
        throw ValidationError("domain classifier needs at least two devices (found " +
                              std::to_string(distinct.size()) + ")");
    }

    DomainClassifier out;
    out.devices.assign(distinct.begin(), distinct.end());
    std::map<int, int> to_class;
    for (std::size_t k = 0; k < out.devices.size(); ++k) to_class[out.devices[k]] = static_cast<int>(k);
    std::vector<int> y(device_labels.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = to_class[device_labels[i]];

    Rng init_rng(derive_seed(seed, SeedPurpose::DomainInit));
    out.net = Network::mlp(features.cols(), {cfg.hidden_width}, out.devices.size(),
                           Activation::Identity, init_rng);
    OptimizerState opt(cfg.optimizer);
    Rng shuffle_rng(derive_seed(seed, SeedPurpose::DomainShuffle));
    PlateauDetector plateau(cfg.plateau);

    std::vector<std::size_t> order(features.rows());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            const std::span<const std::size_t> idx(order.data() + start, stop - start);
            std::vector<int> yb;
            yb.reserve(idx.size());
            for (std::size_t i : idx) yb.push_back(y[i]);
            const Matrix logits = out.net.forward(gather_rows(features, idx));
            const auto lg = softmax_cross_entropy(logits, yb);
            apply_update(out.net, out.net.backward(lg.grad_logits), opt);
            total += lg.mean_loss * static_cast<double>(idx.size());
        }
        ++out.epochs_run;
        const double epoch_loss = total / static_cast<double>(order.size());
        if (cfg.early_stop && plateau.step(epoch_loss) == PlateauDecision::Transition) break;
    }
    for (auto& l : out.net.layers()) l.clear_cache();

    const Matrix logits = out.net.predict(features);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        if (static_cast<int>(argmax(logits.row(r))) == y[r]) ++correct;
    }
    out.train_accuracy = static_cast<double>(correct) / static_cast<double>(features.rows());
    return out;
}

std::vector<DevicePosterior> device_posteriors(const Network& feature, const Network& domain,
                                               const Dataset& data) {
    if (data.feature_dim != feature.input_dim()) {
        throw ShapeError("feature extractor expects " + std::to_string(feature.input_dim()) +
                         " inputs, dataset has " + std::to_string(data.feature_dim));
    }
    if (feature.output_dim() != domain.input_dim()) {
        throw ShapeError("domain classifier input does not match feature extractor output");
    }
    std::vector<DevicePosterior> out;
    out.reserve(data.size());
    constexpr std::size_t kChunk = 512;
    for (std::size_t start = 0; start < data.size(); start += kChunk) {
        std::vector<std::size_t> idx;
        for (std::size_t i = start; i < std::min(data.size(), start + kChunk); ++i) idx.push_back(i);
        const Matrix probs = softmax_rows(domain.predict(feature.predict(data.feature_matrix(idx))));
        for (std::size_t r = 0; r < probs.rows(); ++r) {
            const auto row = probs.row(r);
            out.push_back({data.samples[idx[r]].id, {row.begin(), row.end()}});
        }
    }
    return out;
}

std::vector<EntropyScore> score_dataset(const Network& feature, const Network& domain,
                                        const Dataset& data) {
    std::vector<EntropyScore> scores;
    scores.reserve(data.size());
    for (const auto& p : device_posteriors(feature, domain, data)) scores.push_back(entropy(p));
    return scores;
}

CurriculumPartition build_partition(std::vector<EntropyScore> scores, std::size_t num_devices) {
    const std::size_t n = scores.size();
    if (n < 2) throw ValidationError("partition needs at least 2 scored samples");
    std::unordered_set<SampleId> ids;
    for (const auto& s : scores) {
        if (!ids.insert(s.id).second) {
            throw ValidationError("duplicate score for sample " + std::to_string(s.id));
        }
        if (!std::isfinite(s.entropy)) {
            throw ValidationError("non-finite entropy for sample " + std::to_string(s.id));
        }
    }
    std::sort(scores.begin(), scores.end(), [](const EntropyScore& a, const EntropyScore& b) {
        if (a.entropy != b.entropy) return a.entropy > b.entropy;
        return a.id < b.id;
    });
    CurriculumPartition p;
    p.threshold_rank = n / 2;
    p.num_devices = num_devices;
    for (std::size_t r = 0; r < n; ++r) {
        (r < p.threshold_rank ? p.inv_ids : p.spec_ids).push_back(scores[r].id);
    }
    p.scores = std::move(scores);
    return p;
}

std::string partition_to_string(const CurriculumPartition& p) {
    std::string out = "ecl-partition 1\n";
    out += "samples " + std::to_string(p.scores.size()) + "\n";
    out += "devices " + std::to_string(p.num_devices) + "\n";
    out += "threshold_rank " + std::to_string(p.threshold_rank) + "\n";
    for (std::size_t r = 0; r < p.scores.size(); ++r) {
        out += std::to_string(p.scores[r].id);
        out += ' ';
        append_double(out, p.scores[r].entropy);
        out += r < p.threshold_rank ? " inv\n" : " spec\n";
    }
    return out;
}

CurriculumPartition partition_from_string(const std::string& text) {
    LineReader r(text);
    auto single = [&r](std::string_view key) {
        auto toks = r.expect_key(key);
        if (toks.size() != 1) r.fail(std::string(key) + " expects one value");
        const auto v = r.parse_int64(toks[0]);
        if (v < 0) r.fail(std::string(key) + " must be non-negative");
        return static_cast<std::size_t>(v);
    };
    {
        auto toks = r.expect_key("ecl-partition");
        if (toks.size() != 1 || toks[0] != "1") r.fail("unsupported partition version");
    }
    const std::size_t n = single("samples");
    CurriculumPartition p;
    p.num_devices = single("devices");
    p.threshold_rank = single("threshold_rank");
    if (p.threshold_rank != n / 2) r.fail("threshold_rank must equal floor(N/2)");
    for (std::size_t i = 0; i < n; ++i) {
        auto toks = r.next_record();
        if (toks.empty()) r.fail("truncated partition file");
        if (toks.size() != 3) r.fail("expected: id entropy tag");
        EntropyScore s{r.parse_int64(toks[0]), r.parse_double(toks[1])};
        const bool inv = toks[2] == "inv";
        if (!inv && toks[2] != "spec") r.fail("subset tag must be inv or spec");
        if (inv != (i < p.threshold_rank)) r.fail("subset tag inconsistent with rank");
        (inv ? p.inv_ids : p.spec_ids).push_back(s.id);
        p.scores.push_back(s);
    }
    if (!r.next_record().empty()) r.fail("trailing data after last record");
    const auto rebuilt = build_partition(p.scores, p.num_devices);
    if (rebuilt.inv_ids != p.inv_ids || rebuilt.spec_ids != p.spec_ids) {
        throw ValidationError("partition file is not in entropy rank order");
    }
    return p;
}

void save_partition(const CurriculumPartition& p, const std::filesystem::path& path) {
    write_text_file(path, partition_to_string(p));
}

CurriculumPartition load_partition(const std::filesystem::path& path) {
    return partition_from_string(read_text_file(path));
}

}  // namespace ecl
