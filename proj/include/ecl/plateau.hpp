#pragma once

#include <cstddef>

namespace ecl {

struct PlateauSettings {
    std::size_t patience = 5;
    double min_relative_improvement = 1e-3;

    void validate() const;
    friend bool operator==(const PlateauSettings&, const PlateauSettings&) = default;
};

enum class PlateauDecision { Continue, Transition };

/// Watches a validation-loss stream. An epoch counts as an improvement when
/// (best - loss) / max(|best|, 1e-12) > min_relative_improvement; the detector
/// fires once `patience` consecutive epochs fail to improve. best_loss always
/// tracks the minimum seen, even for sub-threshold gains.
class PlateauDetector {
public:
    explicit PlateauDetector(PlateauSettings settings = {});

    PlateauDecision step(double val_loss);

    double best_loss() const noexcept { return best_; }
    std::size_t epochs_since_improvement() const noexcept { return since_; }
    bool started() const noexcept { return started_; }
    const PlateauSettings& settings() const noexcept { return settings_; }

private:
    PlateauSettings settings_;
    double best_ = 0.0;
    std::size_t since_ = 0;
    bool started_ = false;
};

}  // namespace ecl
