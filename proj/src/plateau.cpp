#include "ecl/plateau.hpp"

#include <algorithm>
#include <cmath>

#include "ecl/error.hpp"

namespace ecl {

void PlateauSettings::validate() const {
    if (patience == 0) throw ValidationError("plateau patience must be at least 1");
    if (!(min_relative_improvement > 0.0)) {
        throw ValidationError("plateau min_relative_improvement must be positive");
    }
}

PlateauDetector::PlateauDetector(PlateauSettings settings) : settings_(settings) {
    settings_.validate();
}

PlateauDecision PlateauDetector::step(double val_loss) {
    if (!std::isfinite(val_loss)) throw ValidationError("plateau_step: loss is not finite");
    if (!started_) {
        started_ = true;
        best_ = val_loss;
        since_ = 0;
        return PlateauDecision::Continue;
    }
    const double rel = (best_ - val_loss) / std::max(std::abs(best_), 1e-12);
    if (rel > settings_.min_relative_improvement) {
        since_ = 0;
    } else {
        ++since_;
    }
    best_ = std::min(best_, val_loss);
    return since_ >= settings_.patience ? PlateauDecision::Transition : PlateauDecision::Continue;
}

}  // namespace ecl
