#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ecl/error.hpp"
#include "ecl/plateau.hpp"
#include "ecl/rng.hpp"

using namespace ecl;

namespace {

// Independent restatement of the transition rule over a whole sequence.
std::vector<bool> oracle(const std::vector<double>& losses, std::size_t patience, double min_rel) {
    std::vector<bool> out;
    double best = 0.0;
    std::size_t bad = 0;
    for (std::size_t i = 0; i < losses.size(); ++i) {
        const double x = losses[i];
        if (i == 0) {
            best = x;
            bad = 0;
        } else {
            const double denom = std::abs(best) > 1e-12 ? std::abs(best) : 1e-12;
            if ((best - x) / denom > min_rel) {
                bad = 0;
            } else {
                bad = bad + 1;
            }
            if (x < best) best = x;
        }
        out.push_back(bad >= patience);
    }
    return out;
}

}  // namespace

TEST_CASE("worked example transitions on the fifth value") {
    PlateauDetector det({3, 1e-3});
    const std::vector<double> losses = {1.0, 0.5, 0.4999, 0.4998, 0.4997};
    for (std::size_t i = 0; i < losses.size(); ++i) {
        const auto d = det.step(losses[i]);
        CHECK((d == PlateauDecision::Transition) == (i == 4));
    }
    CHECK(det.best_loss() == 0.4997);
}

TEST_CASE("halving losses never transition") {
    PlateauDetector det({2, 1e-3});
    double loss = 1.0;
    // Stay above the 1e-12 floor of the relative-improvement denominator.
    for (int i = 0; i < 35; ++i, loss *= 0.5) CHECK(det.step(loss) == PlateauDecision::Continue);
}

TEST_CASE("first call continues") {
    PlateauDetector det({1, 0.5});
    CHECK(det.step(42.0) == PlateauDecision::Continue);
    CHECK(det.started());
    CHECK(det.best_loss() == 42.0);
}

TEST_CASE("non-finite loss is rejected") {
    PlateauDetector det;
    CHECK_THROWS_AS(det.step(std::numeric_limits<double>::infinity()), ValidationError);
    CHECK_THROWS_AS((PlateauSettings{0, 1e-3}.validate()), ValidationError);
}

TEST_CASE("detector agrees with the oracle on random sequences") {
    Rng rng(99);
    for (int t = 0; t < 2000; ++t) {
        const std::size_t patience = 1 + rng.below(6);
        const double min_rel = std::pow(10.0, -rng.uniform(1.0, 5.0));
        std::vector<double> losses(5 + rng.below(40));
        double level = rng.uniform(0.1, 3.0);
        for (auto& x : losses) {
            level *= 1.0 - rng.uniform(-0.01, 0.02);
            x = level;
        }
        const auto want = oracle(losses, patience, min_rel);
        PlateauDetector det({patience, min_rel});
        for (std::size_t i = 0; i < losses.size(); ++i) {
            CHECK((det.step(losses[i]) == PlateauDecision::Transition) == want[i]);
        }
    }
}
