#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "ecl/dataset.hpp"
#include "ecl/error.hpp"
#include "ecl/text_io.hpp"
#include "helpers.hpp"

using namespace ecl;

TEST_CASE("dataset text round trip") {
    auto d = testing::toy_dataset(3, 2, 4, 5, 1);
    d.samples[0].features[1] = 1.0 / 3.0;
    d.samples[1].features[2] = -1e-300;
    const auto back = dataset_from_string(dataset_to_string(d));
    CHECK(back == d);

    testing::TempDir dir("ds");
    save_dataset(d, dir.path() / "x" / "train.ecld");
    CHECK(load_dataset(dir.path() / "x" / "train.ecld") == d);
}

TEST_CASE("truncated file is a parse error") {
    const auto text = dataset_to_string(testing::toy_dataset(2, 2, 3, 4, 2));
    for (std::size_t cut : {text.size() / 2, text.size() - 4, text.size() - 7, std::size_t{20}}) {
        CHECK_THROWS_AS(dataset_from_string(text.substr(0, cut)), ParseError);
    }
    CHECK_THROWS_AS(dataset_from_string(""), ParseError);
}

TEST_CASE("parse error reports the line") {
    auto text = dataset_to_string(testing::toy_dataset(2, 2, 1, 2, 3));
    const auto pos = text.find("samples");
    const auto line_end = text.find('\n', pos);
    text.insert(text.find('\n', line_end + 1), " junk");
    try {
        dataset_from_string(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 9);
    }
}

TEST_CASE("device label out of range names the sample") {
    auto d = testing::toy_dataset(2, 2, 2, 3, 4);
    d.samples[5].device = 7;
    const auto text = [&] {
        // Serialize without validation by editing a valid file.
        auto ok = d;
        ok.samples[5].device = 1;
        auto t = dataset_to_string(ok);
        const std::string rec = "\n" + std::to_string(ok.samples[5].id) + " " +
                                std::to_string(ok.samples[5].scene) + " 1 ";
        const auto at = t.find(rec);
        REQUIRE(at != std::string::npos);
        t.replace(at, rec.size(), "\n" + std::to_string(ok.samples[5].id) + " " +
                                       std::to_string(ok.samples[5].scene) + " 7 ");
        return t;
    }();
    try {
        dataset_from_string(text);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("sample " + std::to_string(d.samples[5].id)) != std::string::npos);
    }
    CHECK_THROWS_AS(d.validate(), ValidationError);
}

TEST_CASE("validate catches broken invariants") {
    auto base = testing::toy_dataset(2, 2, 2, 3, 5);
    base.validate();
    auto dup = base;
    dup.samples[1].id = dup.samples[0].id;
    CHECK_THROWS_AS(dup.validate(), ValidationError);
    auto unseen_in_train = base;
    unseen_in_train.seen_devices = {0};
    unseen_in_train.unseen_devices = {1};
    CHECK_THROWS_AS(unseen_in_train.validate(), ValidationError);
    auto short_row = base;
    short_row.samples[2].features.pop_back();
    CHECK_THROWS_AS(short_row.validate(), ValidationError);
}

TEST_CASE("subset rules") {
    CHECK_THROWS_AS(fraction_to_percent(0.3), ValidationError);
    CHECK(fraction_to_percent(0.05) == 5);
    CHECK(fraction_to_percent(1.0) == 100);

    // One 200-sample stratum -> 10 samples at 5%.
    auto big = testing::toy_dataset(1, 1, 200, 2, 6);
    big.num_scenes = 1;
    CHECK(subset(big, 0.05, 1).size() == 10);

    auto d = testing::toy_dataset(4, 3, 37, 3, 7);
    CHECK(subset(d, 1.0, 3) == d);
    std::map<std::pair<int, int>, std::size_t> sizes;
    for (const auto& s : d.samples) ++sizes[{s.scene, s.device}];

    std::set<SampleId> prev_ids;
    bool first = true;
    for (int p : kSubsetPercents) {
        const auto sub = subset(d, p / 100.0, 3);
        std::map<std::pair<int, int>, std::size_t> got;
        for (const auto& s : sub.samples) ++got[{s.scene, s.device}];
        for (const auto& [key, n] : sizes) CHECK(got[key] == (static_cast<std::size_t>(p) * n + 99) / 100);
        std::set<SampleId> ids;
        for (const auto& s : sub.samples) ids.insert(s.id);
        if (!first) CHECK(std::includes(ids.begin(), ids.end(), prev_ids.begin(), prev_ids.end()));
        prev_ids = ids;
        first = false;
        // original order kept
        CHECK(std::is_sorted(sub.samples.begin(), sub.samples.end(),
                             [](const Sample& a, const Sample& b) { return a.id < b.id; }));
        CHECK(subset(d, p / 100.0, 3) == sub);
    }
    CHECK(subset(d, 0.05, 3) != subset(d, 0.05, 4));
}

TEST_CASE("format_double round trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456789.123456789}) {
        const std::string text = format_double(v);
        LineReader r(text);
        const auto rec = r.next_record();
        CHECK(r.parse_double(rec[0]) == v);
    }
}
