// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// Usage: ecl_acceptance [output-dir] [criterion numbers...]
// Artifacts of the experiment criteria are kept under output-dir
// (default ./acceptance-out) for inspection.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecl/config.hpp"
#include "ecl/curriculum.hpp"
#include "ecl/dataset.hpp"
#include "ecl/domain_probe.hpp"
#include "ecl/error.hpp"
#include "ecl/evalkit.hpp"
#include "ecl/experiment.hpp"
#include "ecl/generator.hpp"
#include "ecl/nn.hpp"
#include "ecl/plateau.hpp"
#include "ecl/rng.hpp"
#include "ecl/text_io.hpp"

namespace fs = std::filesystem;
using namespace ecl;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int number;
    std::string title;
    double time_limit_s;  // 0: no own limit
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

fs::path g_out = "acceptance-out";

// ---------------------------------------------------------------- 1

double loss_of(const Network& net, const Matrix& x, const std::vector<int>& y) {
    return softmax_cross_entropy(net.predict(x), y).mean_loss;
}

double max_rel_grad_error(Network& net, const Matrix& x, const std::vector<int>& y) {
    const auto lg = softmax_cross_entropy(net.forward(x), y);
    const auto grads = net.backward(lg.grad_logits);
    const double h = 1e-5;
    double worst = 0.0;
    const auto check = [&](double& p, double analytic) {
        const double saved = p;
        p = saved + h;
        const double up = loss_of(net, x, y);
        p = saved - h;
        const double down = loss_of(net, x, y);
        p = saved;
        const double numeric = (up - down) / (2 * h);
        worst = std::max(worst, std::abs(analytic - numeric) /
                                    std::max({std::abs(analytic), std::abs(numeric), 1e-8}));
    };
    auto layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto w = layers[l].weights().data();
        const auto gw = grads.layers[l].weights.data();
        for (std::size_t i = 0; i < w.size(); ++i) check(w[i], gw[i]);
        auto& b = layers[l].bias();
        for (std::size_t i = 0; i < b.size(); ++i) check(b[i], grads.layers[l].bias[i]);
    }
    return worst;
}

Outcome gradient_check() {
    struct Arch {
        std::size_t in;
        std::vector<std::size_t> hidden;
        std::size_t out;
        std::size_t batch;
    };
    const std::vector<Arch> archs = {
        {4, {}, 3, 5}, {5, {6}, 3, 8}, {6, {5, 4}, 3, 16}, {3, {7, 5}, 4, 1}, {10, {8, 6}, 5, 32}};
    double worst = 0.0;
    for (std::size_t k = 0; k < archs.size(); ++k) {
        Rng rng(derive_seed(101, SeedPurpose::Init, k));
        auto net = Network::mlp(archs[k].in, archs[k].hidden, archs[k].out, Activation::Identity, rng);
        Matrix x(archs[k].batch, archs[k].in);
        for (auto& v : x.data()) v = rng.normal();
        std::vector<int> y;
        for (std::size_t i = 0; i < archs[k].batch; ++i) y.push_back(static_cast<int>(rng.below(archs[k].out)));
        worst = std::max(worst, max_rel_grad_error(net, x, y));
    }
    return {worst < 1e-4, "5 configurations, max relative error " + fmt("%.3g", worst)};
}

// ---------------------------------------------------------------- 2

Outcome entropy_partition_suite() {
    Rng rng(202);
    std::size_t bad = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t D = 2 + rng.below(8);
        std::vector<double> p(D);
        double s = 0.0;
        for (auto& v : p) s += v = rng.uniform() < 0.15 ? 0.0 : -std::log(1.0 - rng.uniform());
        if (s == 0.0) p[0] = s = 1.0;
        for (auto& v : p) v /= s;
        const double h = entropy(p);
        bad += !(h >= 0.0 && h <= std::log(static_cast<double>(D)) + 1e-12);
        bad += std::abs(entropy(std::vector<double>(D, 1.0 / static_cast<double>(D))) -
                        std::log(static_cast<double>(D))) > 1e-9;
        std::vector<double> one(D, 0.0);
        one[rng.below(D)] = 1.0;
        bad += entropy(one) != 0.0;
    }
    std::size_t size_bad = 0, transform_bad = 0;
    for (std::size_t N = 2; N <= 503; ++N) {
        std::vector<EntropyScore> scores;
        for (std::size_t i = 0; i < N; ++i) {
            // Coarse values force ties.
            scores.push_back({static_cast<SampleId>(i * 3 + 1), std::floor(rng.uniform(0.0, 2.0) * 16) / 16});
        }
        const auto p = build_partition(scores);
        size_bad += p.inv_ids.size() != N / 2 || p.spec_ids.size() != N - N / 2;
        for (int kind = 0; kind < 3; ++kind) {
            auto g = scores;
            for (auto& s : g) {
                s.entropy = kind == 0 ? std::exp(s.entropy) : (kind == 1 ? 3.0 * s.entropy - 7.0 : std::pow(s.entropy + 0.1, 3));
            }
            const auto q = build_partition(g);
            transform_bad += q.inv_ids != p.inv_ids || q.spec_ids != p.spec_ids;
        }
    }
    return {bad + size_bad + transform_bad == 0,
            "entropy violations " + std::to_string(bad) + ", size violations " + std::to_string(size_bad) +
                ", transform violations " + std::to_string(transform_bad)};
}

// ---------------------------------------------------------------- 3, 4

struct AuditRun {
    CurriculumPartition partition;
    TrainState state;
};

AuditRun audited_run(std::size_t batch, double fraction, std::size_t seed_index) {
    RunConfig cfg;
    cfg.training.batch_size = batch;
    cfg.training.audit = true;
    const auto data = generate(cfg.generator);
    const int percent = fraction_to_percent(fraction);
    const auto seeds = run_seeds(cfg.seed, seed_index, percent);
    const auto sub = subset(data.train, fraction, seeds.subset);
    auto part = score_subset(cfg, sub, seeds);
    auto state = train_subset(cfg, sub, &part, TrainMode::Curriculum, seeds, 0, "audit");
    return {std::move(part), std::move(state)};
}

Outcome batch_composition() {
    std::ostringstream detail;
    bool pass = true;
    for (std::size_t B : {8UL, 10UL, 32UL}) {
        const auto run = audited_run(B, 0.05, 0);
        const std::set<SampleId> inv(run.partition.inv_ids.begin(), run.partition.inv_ids.end());
        const std::set<SampleId> spec(run.partition.spec_ids.begin(), run.partition.spec_ids.end());
        const std::size_t want_inv = (4 * B) / 5;
        std::size_t steps = 0, bad = 0;
        for (const auto& a : run.state.audit) {
            if (a.stage != Stage::Stage2) continue;
            ++steps;
            std::size_t n_inv = 0, n_spec = 0;
            for (auto id : a.ids) {
                n_inv += inv.count(id);
                n_spec += spec.count(id);
            }
            bad += n_inv != want_inv || n_spec != B - want_inv || a.ids.size() != B || a.n_inv != want_inv;
        }
        pass = pass && steps > 0 && bad == 0;
        detail << "B=" << B << ": " << steps << " stage-2 batches, " << bad << " off; ";
    }
    return {pass, detail.str()};
}

Outcome stage_ordering() {
    std::ostringstream detail;
    bool pass = true;
    for (std::size_t seed_index : {0UL, 1UL, 2UL}) {
        const auto run = audited_run(32, 0.10, seed_index);
        std::size_t transition = 0;
        std::size_t records = 0;
        for (const auto& r : run.state.log) {
            if (r.kind == MetricsRecord::Kind::Transition) {
                transition = r.steps;
                ++records;
            }
        }
        const std::set<SampleId> spec(run.partition.spec_ids.begin(), run.partition.spec_ids.end());
        std::size_t leaks = 0, before = 0;
        for (const auto& a : run.state.audit) {
            if (a.step >= transition) continue;
            ++before;
            for (auto id : a.ids) leaks += spec.count(id);
        }
        pass = pass && records == 1 && before > 0 && leaks == 0 && before == run.state.stage1_steps;
        detail << "seed " << seed_index << ": " << before << " pre-transition steps, " << leaks << " X_spec ids; ";
    }
    return {pass, detail.str()};
}

// ---------------------------------------------------------------- 5

std::vector<bool> plateau_oracle(const std::vector<double>& losses, std::size_t patience, double min_rel) {
    std::vector<bool> out;
    double best = 0.0;
    std::size_t bad = 0;
    for (std::size_t i = 0; i < losses.size(); ++i) {
        if (i == 0) {
            best = losses[i];
        } else {
            const double denom = std::abs(best) > 1e-12 ? std::abs(best) : 1e-12;
            bad = (best - losses[i]) / denom > min_rel ? 0 : bad + 1;
            if (losses[i] < best) best = losses[i];
        }
        out.push_back(bad >= patience);
    }
    return out;
}

Outcome plateau_equivalence() {
    Rng rng(505);
    std::size_t mismatches = 0, transitions = 0;
    for (int t = 0; t < 10000; ++t) {
        const std::size_t patience = 1 + rng.below(8);
        const double min_rel = std::pow(10.0, rng.uniform(-5.0, -0.5));
        const std::size_t len = 1 + rng.below(80);
        std::vector<double> losses;
        double cur = rng.uniform(0.01, 5.0);
        for (std::size_t i = 0; i < len; ++i) {
            const double u = rng.uniform();
            if (u < 0.3) cur *= 1.0 - rng.uniform(0.0, 2.0 * min_rel);  // near-threshold
            else if (u < 0.6) cur *= rng.uniform(0.5, 1.0);
            else if (u < 0.8) cur *= rng.uniform(1.0, 1.3);
            // else repeat the value exactly
            if (t % 50 == 0) cur *= 1e-7;  // occasionally exercise the 1e-12 floor
            losses.push_back(cur);
        }
        const auto expect = plateau_oracle(losses, patience, min_rel);
        PlateauDetector det({patience, min_rel});
        for (std::size_t i = 0; i < len; ++i) {
            const bool got = det.step(losses[i]) == PlateauDecision::Transition;
            mismatches += got != expect[i];
            transitions += got;
        }
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatches over 10000 sequences (" +
                                 std::to_string(transitions) + " transition decisions)"};
}

// ---------------------------------------------------------------- 6

Outcome metric_suite() {
    Rng rng(606);
    std::size_t bad = 0;
    for (int t = 0; t < 1000; ++t) {
        const int C = 2 + static_cast<int>(rng.below(10));
        const std::size_t per = 1 + rng.below(20);
        std::vector<int> labels, preds;
        std::size_t correct = 0;
        for (int c = 0; c < C; ++c) {
            for (std::size_t k = 0; k < per; ++k) labels.push_back(c);
        }
        rng.shuffle(labels);
        for (int y : labels) {
            const int p = static_cast<int>(rng.below(static_cast<std::uint64_t>(C)));
            preds.push_back(p);
            correct += p == y;
        }
        const double plain = static_cast<double>(correct) / static_cast<double>(labels.size());
        bad += std::abs(class_wise_accuracy(preds, labels, C).mean - plain) > 1e-12;
    }
    bool error_ok = false;
    try {
        class_wise_accuracy(std::vector<int>{0, 0}, std::vector<int>{0, 0}, 2);
    } catch (const ValidationError& e) {
        error_ok = std::string(e.what()).find("class 1") != std::string::npos;
    }
    const double ex1 = class_wise_accuracy(std::vector<int>{0, 1, 1, 1}, std::vector<int>{0, 0, 1, 1}, 2).mean;
    const std::vector<int> l3 = {0, 0, 0, 0, 1, 1, 2, 2, 2, 2};
    const std::vector<int> p3 = {0, 0, 0, 1, 1, 0, 1, 1, 0, 0};
    const double ex3 = class_wise_accuracy(p3, l3, 3).mean;
    const double ex2 = class_wise_accuracy(l3, l3, 3).mean;
    const bool examples = std::abs(ex1 - 0.75) < 1e-12 && ex2 == 1.0 && std::abs(ex3 - 0.416667) < 1e-6;
    return {bad == 0 && error_ok && examples,
            std::to_string(bad) + " balanced mismatches, N_c=0 error " + (error_ok ? "raised" : "missing") +
                ", examples " + fmt("%.6f", ex1) + " / " + fmt("%.6f", ex3)};
}

// ---------------------------------------------------------------- 7, 8, 9

struct GridSummary {
    bool ok = false;
    std::string error;
    double d_unseen_5 = 0, d_seen_5 = 0, d_overall_5 = 0, d_overall_100 = 0;
    int positive_unseen_5 = 0;
    int n5 = 0;
    double seconds = 0;
};

GridSummary g_grid;

RunConfig grid_config() {
    RunConfig cfg;
    cfg.fractions = {0.05, 1.00};
    cfg.n_seeds = 10;
    cfg.output_dir = (g_out / "grid").string();
    return cfg;
}

double eval_field(const fs::path& p, const std::string& key) {
    const auto j = nlohmann::json::parse(read_text_file(p));
    if (!j.contains(key) || !j[key].is_number()) throw Error("missing " + key + " in " + p.string());
    return j[key].get<double>();
}

void run_grid() {
    const auto cfg = grid_config();
    std::ostringstream log;
    CommandOptions opt;
    opt.force = true;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        cmd_compare(cfg, opt, log);
    } catch (const std::exception& e) {
        g_grid.error = e.what();
        return;
    }
    g_grid.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double s100 = 0;
    for (std::size_t k = 0; k < cfg.n_seeds; ++k) {
        for (int pc : {5, 100}) {
            const auto paths = run_paths(cfg, pc, k);
            const auto b = paths.eval(TrainMode::Baseline), c = paths.eval(TrainMode::Curriculum);
            const double d = 100 * (eval_field(c, "overall_classwise_acc") - eval_field(b, "overall_classwise_acc"));
            if (pc == 100) {
                s100 += d;
                continue;
            }
            const double du = 100 * (eval_field(c, "unseen_acc") - eval_field(b, "unseen_acc"));
            g_grid.d_unseen_5 += du;
            g_grid.d_seen_5 += 100 * (eval_field(c, "seen_acc") - eval_field(b, "seen_acc"));
            g_grid.d_overall_5 += d;
            g_grid.positive_unseen_5 += du > 0;
            ++g_grid.n5;
        }
    }
    const double n = static_cast<double>(cfg.n_seeds);
    g_grid.d_unseen_5 /= n;
    g_grid.d_seen_5 /= n;
    g_grid.d_overall_5 /= n;
    g_grid.d_overall_100 = s100 / n;
    write_text_file(g_out / "grid-log.txt", log.str());
    g_grid.ok = true;
}

Outcome directional() {
    run_grid();
    if (!g_grid.ok) return {false, "grid failed: " + g_grid.error};
    const bool mean_up = g_grid.d_unseen_5 > 0;
    const bool majority = g_grid.positive_unseen_5 >= 7;
    const bool larger = g_grid.d_unseen_5 >= g_grid.d_seen_5;
    return {mean_up && majority && larger,
            "5% unseen gain " + fmt("%+.2f", g_grid.d_unseen_5) + " pts (" + std::to_string(g_grid.positive_unseen_5) +
                "/10 positive), seen gain " + fmt("%+.2f", g_grid.d_seen_5) + " pts; grid took " +
                fmt("%.0f", g_grid.seconds) + " s"};
}

Outcome diminishing() {
    if (!g_grid.ok) return {false, "grid unavailable"};
    return {g_grid.d_overall_100 <= g_grid.d_overall_5,
            "overall gain at 100% " + fmt("%+.2f", g_grid.d_overall_100) + " pts vs " +
                fmt("%+.2f", g_grid.d_overall_5) + " pts at 5%"};
}

Outcome determinism() {
    std::size_t compared = 0, differing = 0;
    const auto same = [&](const fs::path& a, const fs::path& b) {
        ++compared;
        if (read_text_file(a) != read_text_file(b)) {
            ++differing;
            std::cerr << "differs: " << a << " vs " << b << "\n";
        }
    };
    std::ostringstream log;
    CommandOptions force;
    force.force = true;

    // gen-data twice.
    RunConfig a;
    a.output_dir = (g_out / "rerun-a").string();
    RunConfig b = a;
    b.output_dir = (g_out / "rerun-b").string();
    cmd_gen_data(a, force, log);
    cmd_gen_data(b, force, log);
    same(train_data_path(a), train_data_path(b));
    same(test_data_path(a), test_data_path(b));

    // score / train / evaluate on the smallest cell, twice.
    CommandOptions cell = force;
    cell.fraction = 0.05;
    for (const auto* cfg : {&a, &b}) {
        cmd_score(*cfg, cell, log);
        cmd_train(*cfg, cell, TrainMode::Curriculum, log);
        cmd_train(*cfg, cell, TrainMode::Baseline, log);
        cmd_evaluate(*cfg, cell, TrainMode::Curriculum, log);
        cmd_evaluate(*cfg, cell, TrainMode::Baseline, log);
    }
    const auto pa = run_paths(a, 5, 0), pb = run_paths(b, 5, 0);
    same(pa.partition, pb.partition);
    for (TrainMode m : {TrainMode::Curriculum, TrainMode::Baseline}) {
        same(pa.metrics(m), pb.metrics(m));
        same(pa.checkpoint(m), pb.checkpoint(m));
        same(pa.eval(m), pb.eval(m));
    }

    // The same cell from the full compare grid.
    if (g_grid.ok) {
        const auto pg = run_paths(grid_config(), 5, 0);
        same(train_data_path(grid_config()), train_data_path(a));
        for (TrainMode m : {TrainMode::Curriculum, TrainMode::Baseline}) same(pg.metrics(m), pa.metrics(m));
    }

    // Criterion 3's audited Stage 2 run.
    const auto r1 = audited_run(10, 0.05, 0), r2 = audited_run(10, 0.05, 0);
    ++compared;
    std::string l1, l2;
    for (const auto& r : r1.state.log) l1 += to_json_line(r);
    for (const auto& r : r2.state.log) l2 += to_json_line(r);
    differing += l1 != l2 || !(r1.state.model == r2.state.model);

    return {compared > 0 && differing == 0,
            std::to_string(compared) + " artifact pairs compared, " + std::to_string(differing) + " differ"};
}

// ---------------------------------------------------------------- 10

Outcome null_shift() {
    RunConfig cfg;
    cfg.generator.device_shift_strength = 0.0;
    const auto data = generate(cfg.generator);
    double diff = 0.0;
    for (std::size_t k = 0; k < 10; ++k) {
        const auto r = run_pair(cfg, data.train, data.test, 5, k);
        diff += 100 * (r.curriculum.overall_classwise_acc - r.baseline.overall_classwise_acc);
    }
    diff /= 10.0;
    return {std::abs(diff) < 2.0, "mean curriculum - baseline at 5%, no shift: " + fmt("%+.2f", diff) + " pts"};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (!arg.empty() && std::all_of(arg.begin(), arg.end(), ::isdigit)) {
            only.insert(std::stoi(arg));
        } else {
            g_out = arg;
        }
    }
    // 8 and part of 9 read the grid that 7 produces.
    if (!only.empty() && (only.count(8) || only.count(9))) only.insert(7);
    fs::create_directories(g_out);

    const std::vector<Criterion> criteria = {
        {1, "gradient correctness", 30, gradient_check},
        {2, "entropy and partition properties", 10, entropy_partition_suite},
        {3, "stage 2 batch composition", 60, batch_composition},
        {4, "stage ordering audit", 60, stage_ordering},
        {5, "plateau rule equivalence", 5, plateau_equivalence},
        {6, "class-wise accuracy suite", 5, metric_suite},
        {7, "unseen-device gain at 5%", 600, directional},
        {8, "diminishing returns", 0, diminishing},
        {9, "determinism", 0, determinism},
        {10, "null-shift control", 0, null_shift},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.number)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
            o.pass = false;
            o.detail += "; over the " + fmt("%.0f", c.time_limit_s) + " s limit";
        }
        failed += !o.pass;
        std::printf("criterion %2d %s  %s: %s [%.1f s]\n", c.number, o.pass ? "PASS" : "FAIL", c.title.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
