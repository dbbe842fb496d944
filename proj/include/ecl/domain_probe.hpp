#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ecl/dataset.hpp"
#include "ecl/nn.hpp"
#include "ecl/optimizer.hpp"
#include "ecl/plateau.hpp"

namespace ecl {

struct DevicePosterior {
    SampleId id = 0;
    std::vector<double> probs;
};

struct EntropyScore {
    SampleId id = 0;
    double entropy = 0.0;  // nats

    friend bool operator==(const EntropyScore&, const EntropyScore&) = default;
};

/// X_inv / X_spec split. Both id lists are in rank order (highest entropy
/// first); scores holds every sample's entropy in the same rank order.
struct CurriculumPartition {
    std::vector<SampleId> inv_ids;
    std::vector<SampleId> spec_ids;
    std::vector<EntropyScore> scores;
    std::size_t threshold_rank = 0;  // floor(N / 2) == |inv_ids|
    std::size_t num_devices = 0;     // D of the posteriors, 0 if unknown

    friend bool operator==(const CurriculumPartition&, const CurriculumPartition&) = default;
};

enum class FeatureSource { WarmUp, Random };

std::string to_string(FeatureSource s);
FeatureSource feature_source_from_string(const std::string& s);

struct DomainProbeConfig {
    std::size_t hidden_width = 64;
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    OptimizerConfig optimizer{OptimizerKind::Adam, 1e-4};
    /// Stop early when the epoch training loss plateaus.
    bool early_stop = true;
    PlateauSettings plateau{};
    /// Where the frozen extractor comes from before scoring.
    FeatureSource feature_source = FeatureSource::WarmUp;
    std::size_t warm_up_epochs = 5;

    friend bool operator==(const DomainProbeConfig&, const DomainProbeConfig&) = default;
};

struct DomainClassifier {
    Network net;
    /// Output unit k predicts device devices[k].
    std::vector<int> devices;
    double train_accuracy = 0.0;
    std::size_t epochs_run = 0;
};

/// Shannon entropy in nats, with 0 * log 0 treated as 0.
double entropy(std::span<const double> probs);
EntropyScore entropy(const DevicePosterior& p);

/// Trains the two-layer device classifier (ReLU hidden layer, softmax output)
/// on frozen features. device_labels are raw device indices; the distinct
/// values present define the output classes in ascending order.
/// Throws ValidationError when fewer than two devices are present.
DomainClassifier train_domain_classifier(const Matrix& features, std::span<const int> device_labels,
                                         const DomainProbeConfig& cfg, std::uint64_t seed);

/// softmax(f_dom(f_feat(x))) for every sample, in dataset order.
std::vector<DevicePosterior> device_posteriors(const Network& feature, const Network& domain,
                                               const Dataset& data);

/// entropy(softmax(f_dom(f_feat(x)))) per sample, in dataset order.
std::vector<EntropyScore> score_dataset(const Network& feature, const Network& domain,
                                        const Dataset& data);

/// Ranks by entropy descending (ties: ascending id) and puts the first
/// floor(N/2) ids into X_inv. Throws ValidationError on N < 2 or duplicate ids.
CurriculumPartition build_partition(std::vector<EntropyScore> scores, std::size_t num_devices = 0);

// Partition file, version 1:
//
//   ecl-partition 1
//   samples N
//   devices D
//   threshold_rank T
//   <id> <entropy> inv|spec        (N lines, rank order)
std::string partition_to_string(const CurriculumPartition& p);
CurriculumPartition partition_from_string(const std::string& text);
void save_partition(const CurriculumPartition& p, const std::filesystem::path& path);
CurriculumPartition load_partition(const std::filesystem::path& path);

}  // namespace ecl
