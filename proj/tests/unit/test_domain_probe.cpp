#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecl/domain_probe.hpp"
#include "ecl/error.hpp"
#include "ecl/experiment.hpp"
#include "ecl/generator.hpp"
#include "ecl/rng.hpp"
#include "helpers.hpp"

using namespace ecl;

namespace {

std::vector<EntropyScore> scores_of(const std::vector<double>& h) {
    std::vector<EntropyScore> out;
    for (std::size_t i = 0; i < h.size(); ++i) out.push_back({static_cast<SampleId>(i), h[i]});
    return out;
}

double auc(const std::vector<double>& positives, const std::vector<double>& negatives) {
    double wins = 0.0;
    for (double p : positives) {
        for (double n : negatives) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
    }
    return wins / (static_cast<double>(positives.size()) * static_cast<double>(negatives.size()));
}

}  // namespace

TEST_CASE("entropy examples") {
    CHECK(entropy(std::vector<double>(6, 1.0 / 6)) == doctest::Approx(1.791759).epsilon(1e-6));
    CHECK(entropy(std::vector<double>{0, 1, 0}) == 0.0);
    CHECK(entropy(std::vector<double>{0.5, 0.5, 0, 0}) == doctest::Approx(0.693147).epsilon(1e-6));
}

TEST_CASE("entropy bounds and symmetry") {
    Rng rng(1);
    for (int t = 0; t < 500; ++t) {
        const std::size_t D = 2 + rng.below(8);
        std::vector<double> p(D);
        double s = 0.0;
        for (auto& v : p) s += v = rng.uniform() * (rng.uniform() < 0.2 ? 0.0 : 1.0) + 1e-300;
        for (auto& v : p) v /= s;
        const double h = entropy(p);
        CHECK(h >= 0.0);
        CHECK(h <= std::log(static_cast<double>(D)) + 1e-9);
        auto q = p;
        rng.shuffle(q);
        CHECK(entropy(q) == doctest::Approx(h).epsilon(1e-12));
    }
}

TEST_CASE("partition examples") {
    const auto p = build_partition(scores_of({0.1, 0.9, 0.5, 0.7}));
    CHECK(p.inv_ids == std::vector<SampleId>{1, 3});
    CHECK(p.spec_ids == std::vector<SampleId>{2, 0});
    CHECK(p.threshold_rank == 2);

    const auto five = build_partition(scores_of({0.1, 0.2, 0.3, 0.4, 0.5}));
    CHECK(five.inv_ids.size() == 2);
    CHECK(five.spec_ids.size() == 3);

    const auto ties = build_partition(scores_of(std::vector<double>(6, 0.3)));
    CHECK(ties.inv_ids == std::vector<SampleId>{0, 1, 2});

    CHECK_THROWS_AS(build_partition(scores_of({0.5})), ValidationError);
    CHECK_THROWS_AS(build_partition({{1, 0.2}, {1, 0.4}}), ValidationError);
}

TEST_CASE("partition is rank-only") {
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> h(2 + rng.below(60));
        for (auto& v : h) v = std::round(rng.uniform(0.0, 2.0) * 20) / 20;
        auto shuffled = scores_of(h);
        rng.shuffle(shuffled);
        const auto a = build_partition(scores_of(h));
        const auto b = build_partition(shuffled);
        CHECK(a.inv_ids == b.inv_ids);
        std::vector<double> g;
        for (double v : h) g.push_back(std::exp(3 * v) + 7);
        const auto c = build_partition(scores_of(g));
        CHECK(c.inv_ids == a.inv_ids);
        CHECK(c.spec_ids == a.spec_ids);
    }
}

TEST_CASE("partition file round trip and validation") {
    auto p = build_partition(scores_of({0.1, 0.9, 0.5, 0.7, 0.3}), 6);
    const auto text = partition_to_string(p);
    CHECK(partition_from_string(text) == p);
    testing::TempDir dir("part");
    save_partition(p, dir.path() / "p.tsv");
    CHECK(load_partition(dir.path() / "p.tsv") == p);
    CHECK_THROWS_AS(partition_from_string(text.substr(0, text.size() - 8)), ParseError);
    auto bad = text;
    bad.replace(bad.find(" inv"), 4, " spec");
    CHECK_THROWS_AS(partition_from_string(bad), Error);
}

TEST_CASE("zero-parameter device head gives ln D scores") {
    Rng rng(3);
    auto feature = Network::mlp(4, {5}, 3, Activation::Relu, rng);
    auto domain = Network::mlp(3, {6}, 4, Activation::Identity, rng);
    for (auto& l : domain.layers()) {
        l.weights().fill(0.0);
        std::fill(l.bias().begin(), l.bias().end(), 0.0);
    }
    auto data = testing::toy_dataset(2, 2, 5, 4, 4);
    for (const auto& s : score_dataset(feature, domain, data)) CHECK(s.entropy == doctest::Approx(std::log(4.0)).epsilon(1e-12));

    // Permuting the dataset permutes the id-keyed scores.
    auto domain2 = Network::mlp(3, {6}, 4, Activation::Identity, rng);
    const auto before = score_dataset(feature, domain2, data);
    std::reverse(data.samples.begin(), data.samples.end());
    auto after = score_dataset(feature, domain2, data);
    std::reverse(after.begin(), after.end());
    CHECK(after == before);

    auto wrong = testing::toy_dataset(2, 2, 2, 7, 5);
    CHECK_THROWS_AS(score_dataset(feature, domain2, wrong), ShapeError);
}

TEST_CASE("device classifier on a separable toy set") {
    Rng rng(5);
    const std::size_t N = 400;
    Matrix x(N, 3);
    std::vector<int> dev(N);
    for (std::size_t i = 0; i < N; ++i) {
        dev[i] = static_cast<int>(i % 2);
        x(i, 0) = (dev[i] ? 1.0 : -1.0) * rng.uniform(1.0, 3.0);
        x(i, 1) = rng.normal();
        x(i, 2) = rng.normal();
    }
    DomainProbeConfig cfg;
    cfg.epochs = 200;
    cfg.early_stop = false;
    const auto dom = train_domain_classifier(x, dev, cfg, 11);
    CHECK(dom.train_accuracy > 0.95);
    double mean_h = 0.0;
    const auto out = dom.net.predict(x);
    for (std::size_t i = 0; i < N; ++i) mean_h += entropy(softmax(out.row(i))) / N;
    CHECK(mean_h < 0.15);
}

TEST_CASE("device classifier on device-independent features") {
    Rng rng(6);
    const std::size_t N = 600, D = 3;
    Matrix x(N, 4);
    std::vector<int> dev(N);
    for (std::size_t i = 0; i < N; ++i) {
        dev[i] = static_cast<int>(i % D);
        for (std::size_t f = 0; f < 4; ++f) x(i, f) = rng.normal();
    }
    const auto dom = train_domain_classifier(x, dev, DomainProbeConfig{}, 12);
    const auto out = dom.net.predict(x);
    double mean_h = 0.0;
    for (std::size_t i = 0; i < N; ++i) mean_h += entropy(softmax(out.row(i))) / N;
    CHECK(std::abs(mean_h - std::log(3.0)) < 0.1 * std::log(3.0));
}

TEST_CASE("device classifier edge cases") {
    Matrix x(4, 2, 1.0);
    CHECK_THROWS_AS(train_domain_classifier(x, std::vector<int>{1, 1, 1, 1}, {}, 1), ValidationError);
    DomainProbeConfig cfg;
    cfg.epochs = 0;
    const auto dom = train_domain_classifier(x, std::vector<int>{0, 3, 0, 3}, cfg, 1);
    CHECK(dom.epochs_run == 0);
    CHECK(dom.devices == std::vector<int>{0, 3});
    CHECK(dom.net.output_dim() == 2);
    CHECK(dom.net.layers().size() == 2);
}

TEST_CASE("scores separate device-pure from device-ambiguous samples") {
    GeneratorSpec spec;
    spec.train_counts = {600, 600, 600, 600, 600, 600};
    spec.ambiguous_fraction = 0.5;
    spec.ambiguous_gain_max = 0.0;
    spec.visible_gain_min = 1.0;
    const auto data = generate(spec);
    RunConfig cfg;
    cfg.generator = spec;
    const auto seeds = run_seeds(cfg.seed, 0, 100);
    const auto part = score_subset(cfg, data.train, seeds);
    std::vector<double> amb, pure;
    for (const auto& s : part.scores) {
        (data.train_gain[static_cast<std::size_t>(s.id)] == 0.0 ? amb : pure).push_back(s.entropy);
    }
    REQUIRE(!amb.empty());
    REQUIRE(!pure.empty());
    CHECK(auc(amb, pure) > 0.9);
}
