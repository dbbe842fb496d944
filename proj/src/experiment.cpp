#include "ecl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ecl/checkpoint.hpp"
#include "ecl/error.hpp"
#include "ecl/generator.hpp"
#include "ecl/rng.hpp"
#include "ecl/text_io.hpp"

namespace ecl {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string to_string(TrainMode m) { return m == TrainMode::Curriculum ? "curriculum" : "baseline"; }

TrainMode train_mode_from_string(const std::string& s) {
    if (s == "curriculum") return TrainMode::Curriculum;
    if (s == "baseline") return TrainMode::Baseline;
    throw ValidationError("unknown mode '" + s + "' (expected curriculum or baseline)");
}

RunSeeds run_seeds(std::uint64_t master, std::size_t seed_index, int percent) {
    RunSeeds s;
    s.run = derive_seed(master, SeedPurpose::Run, seed_index);
    s.subset = derive_seed(s.run, SeedPurpose::Subset);
    s.init = derive_seed(s.run, SeedPurpose::Init);
    const auto p = static_cast<std::uint64_t>(percent);
    s.probe = derive_seed(derive_seed(s.run, SeedPurpose::DomainInit), SeedPurpose::Run, p);
    s.train = derive_seed(derive_seed(s.run, SeedPurpose::Stage1Shuffle), SeedPurpose::Run, p);
    return s;
}

fs::path RunPaths::metrics(TrainMode m) const { return dir / (to_string(m) + ".metrics.jsonl"); }
fs::path RunPaths::checkpoint(TrainMode m) const { return dir / (to_string(m) + ".ckpt.json"); }
fs::path RunPaths::eval(TrainMode m) const { return dir / (to_string(m) + ".eval.json"); }
fs::path RunPaths::audit(TrainMode m) const { return dir / (to_string(m) + ".audit.jsonl"); }

fs::path train_data_path(const RunConfig& cfg) { return fs::path(cfg.output_dir) / "data" / "train.ecld"; }
fs::path test_data_path(const RunConfig& cfg) { return fs::path(cfg.output_dir) / "data" / "test.ecld"; }

RunPaths run_paths(const RunConfig& cfg, int percent, std::size_t seed_index) {
    char name[64];
    std::snprintf(name, sizeof(name), "p%03d/seed%02zu", percent, seed_index);
    RunPaths p;
    p.dir = fs::path(cfg.output_dir) / "runs" / name;
    p.partition = p.dir / "partition.tsv";
    return p;
}

std::string run_id(int percent, std::size_t seed_index, TrainMode mode) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "p%03d-s%02zu-%s", percent, seed_index, to_string(mode).c_str());
    return buf;
}

// ---------------------------------------------------------------------------

namespace {

SceneModel frozen_extractor_source(const RunConfig& cfg, const Dataset& subset, const RunSeeds& seeds) {
    SceneModel model = make_scene_model(cfg.model, subset.feature_dim, subset.num_scenes, seeds.init);
    if (cfg.domain_probe.feature_source == FeatureSource::Random) return model;
    SceneOptimizers opt(cfg.training.optimizer);
    Rng rng(derive_seed(seeds.probe, SeedPurpose::WarmUpShuffle));
    std::vector<std::size_t> order(subset.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t B = cfg.training.batch_size;
    for (std::size_t e = 0; e < cfg.domain_probe.warm_up_epochs; ++e) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += B) {
            const std::size_t stop = std::min(order.size(), start + B);
            train_step(model, opt, subset, std::span<const std::size_t>(order.data() + start, stop - start));
        }
    }
    return model;
}

}  // namespace

CurriculumPartition score_subset(const RunConfig& cfg, const Dataset& subset, const RunSeeds& seeds,
                                 ScoreSummary* summary) {
    const SceneModel source = frozen_extractor_source(cfg, subset, seeds);
    const Network& feature = source.feature;
    const Matrix cached = feature.predict(subset.feature_matrix());
    std::vector<int> devices;
    devices.reserve(subset.size());
    for (const auto& s : subset.samples) devices.push_back(s.device);
    const DomainClassifier dom = train_domain_classifier(cached, devices, cfg.domain_probe, seeds.probe);

    auto partition = build_partition(score_dataset(feature, dom.net, subset), dom.devices.size());
    if (summary) {
        std::vector<double> h;
        for (const auto& s : partition.scores) h.push_back(s.entropy);
        std::sort(h.begin(), h.end());
        summary->min_entropy = h.front();
        summary->max_entropy = h.back();
        const std::size_t n = h.size();
        summary->median_entropy = n % 2 ? h[n / 2] : 0.5 * (h[n / 2 - 1] + h[n / 2]);
        summary->n_inv = partition.inv_ids.size();
        summary->n_spec = partition.spec_ids.size();
        summary->domain_train_accuracy = dom.train_accuracy;
        summary->domain_epochs = dom.epochs_run;
    }
    return partition;
}

TrainState train_subset(const RunConfig& cfg, const Dataset& subset,
                        const CurriculumPartition* partition, TrainMode mode, const RunSeeds& seeds,
                        std::size_t baseline_steps, const std::string& id) {
    TrainState state(make_scene_model(cfg.model, subset.feature_dim, subset.num_scenes, seeds.init),
                     cfg.training.optimizer, seeds.train, id);
    if (mode == TrainMode::Curriculum) {
        if (!partition) throw ValidationError("curriculum training needs a partition");
        return run_curriculum(std::move(state), *partition, subset, cfg.training);
    }
    return run_baseline(std::move(state), subset, cfg.training, baseline_steps);
}

PairedResult run_pair(const RunConfig& cfg, const Dataset& train, const Dataset& test, int percent,
                      std::size_t seed_index) {
    const auto seeds = run_seeds(cfg.seed, seed_index, percent);
    const Dataset sub = subset(train, percent / 100.0, seeds.subset);
    const auto partition = score_subset(cfg, sub, seeds);
    const auto cur = train_subset(cfg, sub, &partition, TrainMode::Curriculum, seeds, 0,
                                  run_id(percent, seed_index, TrainMode::Curriculum));
    const auto base = train_subset(cfg, sub, &partition, TrainMode::Baseline, seeds, cur.total_steps,
                                   run_id(percent, seed_index, TrainMode::Baseline));
    PairedResult r;
    r.percent = percent;
    r.seed_index = seed_index;
    r.curriculum = evaluate(cur.model, test);
    r.baseline = evaluate(base.model, test);
    r.steps = cur.total_steps;
    r.stage1_steps = cur.stage1_steps;
    return r;
}

// ---------------------------------------------------------------------------

std::string dataset_summary(const Dataset& d) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(d.num_devices), 0);
    for (const auto& s : d.samples) ++counts[static_cast<std::size_t>(s.device)];
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-8s %-7s %10s %8s\n", "device", "type", "segments", "share");
    out += buf;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] == 0) continue;
        const double share = 100.0 * static_cast<double>(counts[k]) / static_cast<double>(d.size());
        std::snprintf(buf, sizeof(buf), "%-8zu %-7s %10zu %7.2f%%\n", k,
                      d.is_seen(static_cast<int>(k)) ? "seen" : "unseen", counts[k], share);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "%-8s %-7s %10zu\n", "total", to_string(d.split).c_str(), d.size());
    out += buf;
    return out;
}

namespace {

double pick_fraction(const RunConfig& cfg, const CommandOptions& opt) {
    return opt.fraction ? *opt.fraction : cfg.fractions.front();
}

Dataset load_subset(const RunConfig& cfg, double fraction, const RunSeeds& seeds) {
    const Dataset train = load_dataset(train_data_path(cfg));
    return subset(train, fraction, seeds.subset);
}

void write_audit(const std::vector<StepAudit>& audit, const fs::path& path) {
    std::string text;
    for (const auto& a : audit) {
        ojson j;
        j["step"] = a.step;
        j["stage"] = to_string(a.stage);
        j["n_inv"] = a.n_inv;
        j["n_spec"] = a.n_spec;
        j["ids"] = a.ids;
        text += j.dump() + "\n";
    }
    write_text_file(path, text);
}

void write_training_outputs(const TrainState& s, const RunPaths& paths, TrainMode mode, bool audit) {
    write_metrics_log(s.log, paths.metrics(mode));
    save_checkpoint(paths.checkpoint(mode), {{"feature", s.model.feature}, {"classifier", s.model.classifier}});
    if (audit) write_audit(s.audit, paths.audit(mode));
}

std::string file_hash(const fs::path& p) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(read_text_file(p))));
    return buf;
}

void print_score_summary(std::ostream& log, const ScoreSummary& s) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "entropy min %.6f  median %.6f  max %.6f  |X_inv| %zu  |X_spec| %zu  "
                  "(device classifier train acc %.3f after %zu epochs)\n",
                  s.min_entropy, s.median_entropy, s.max_entropy, s.n_inv, s.n_spec,
                  s.domain_train_accuracy, s.domain_epochs);
    log << buf;
}

std::size_t curriculum_steps_from_log(const RunPaths& paths) {
    const auto metrics = paths.metrics(TrainMode::Curriculum);
    if (!fs::exists(metrics)) {
        throw ValidationError("baseline needs the paired curriculum step budget; train the curriculum "
                              "mode first (missing " + metrics.string() + ")");
    }
    const auto log = read_metrics_log(metrics);
    if (log.empty()) throw ValidationError("empty curriculum metrics log " + metrics.string());
    return log.back().steps;
}

}  // namespace

void cmd_gen_data(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
    const auto train_path = train_data_path(cfg);
    const auto test_path = test_data_path(cfg);
    if (!opt.force && (fs::exists(train_path) || fs::exists(test_path))) {
        throw Error("dataset files already exist under " + train_path.parent_path().string() +
                    "; pass --force to overwrite");
    }
    const auto data = generate(cfg.generator);
    save_dataset(data.train, train_path);
    save_dataset(data.test, test_path);
    write_text_file(train_path.parent_path() / "generator.json", emit_generator_spec(cfg.generator));
    log << "train split:\n" << dataset_summary(data.train) << "test split:\n" << dataset_summary(data.test);
}

void cmd_score(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
    const double fraction = pick_fraction(cfg, opt);
    const int percent = fraction_to_percent(fraction);
    const auto seeds = run_seeds(cfg.seed, opt.seed_index, percent);
    const Dataset sub = load_subset(cfg, fraction, seeds);
    const auto paths = run_paths(cfg, percent, opt.seed_index);
    if (!opt.force && fs::exists(paths.partition)) {
        throw Error(paths.partition.string() + " exists; pass --force to overwrite");
    }
    ScoreSummary summary;
    const auto partition = score_subset(cfg, sub, seeds, &summary);
    save_partition(partition, paths.partition);
    log << "scored " << partition.scores.size() << " samples -> " << paths.partition.string() << "\n";
    print_score_summary(log, summary);
}

void cmd_train(const RunConfig& cfg, const CommandOptions& opt, TrainMode mode, std::ostream& log) {
    const double fraction = pick_fraction(cfg, opt);
    const int percent = fraction_to_percent(fraction);
    const auto seeds = run_seeds(cfg.seed, opt.seed_index, percent);
    const Dataset sub = load_subset(cfg, fraction, seeds);
    const auto paths = run_paths(cfg, percent, opt.seed_index);
    const auto id = run_id(percent, opt.seed_index, mode);

    const auto partition = load_partition(paths.partition);
    if (partition.scores.size() != sub.size()) {
        throw ValidationError("partition has " + std::to_string(partition.scores.size()) +
                              " ids but the training subset has " + std::to_string(sub.size()));
    }
    indices_of(sub, partition.inv_ids);
    indices_of(sub, partition.spec_ids);
    auto train = [&]() {
        if (mode == TrainMode::Baseline) {
            return train_subset(cfg, sub, &partition, mode, seeds, curriculum_steps_from_log(paths), id);
        }
        TrainState s(make_scene_model(cfg.model, sub.feature_dim, sub.num_scenes, seeds.init),
                     cfg.training.optimizer, seeds.train, id);
        s = run_stage1(std::move(s), partition, sub, cfg.training);
        save_checkpoint(paths.dir / "curriculum.stage1.ckpt.json",
                        {{"feature", s.model.feature}, {"classifier", s.model.classifier}});
        return run_stage2(std::move(s), partition, sub, cfg.training);
    };
    const TrainState state = train();
    write_training_outputs(state, paths, mode, cfg.training.audit);
    log << id << ": " << state.total_steps << " steps";
    if (state.transition_step) log << " (transition at step " << *state.transition_step << ")";
    log << " -> " << paths.metrics(mode).string() << "\n";
}

void cmd_evaluate(const RunConfig& cfg, const CommandOptions& opt, TrainMode mode, std::ostream& log) {
    const double fraction = pick_fraction(cfg, opt);
    const int percent = fraction_to_percent(fraction);
    const auto paths = run_paths(cfg, percent, opt.seed_index);
    auto nets = load_checkpoint(paths.checkpoint(mode));
    if (!nets.count("feature") || !nets.count("classifier")) {
        throw ValidationError("checkpoint lacks feature/classifier networks");
    }
    const SceneModel model{nets.at("feature"), nets.at("classifier")};
    const Dataset test = load_dataset(test_data_path(cfg));
    const auto report = evaluate(model, test);
    write_text_file(paths.eval(mode), report_to_json(report));
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s: class-wise acc %.2f%%  seen %.2f%%  unseen %.2f%%\n",
                  run_id(percent, opt.seed_index, mode).c_str(), 100 * report.overall_classwise_acc,
                  report.seen_acc ? 100 * *report.seen_acc : -1.0,
                  report.unseen_acc ? 100 * *report.unseen_acc : -1.0);
    log << buf;
}

ResultsTable cmd_compare(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
    const auto train_path = train_data_path(cfg);
    const auto test_path = test_data_path(cfg);
    if (opt.force || !fs::exists(train_path) || !fs::exists(test_path)) {
        CommandOptions gen = opt;
        gen.force = true;
        cmd_gen_data(cfg, gen, log);
    } else {
        const auto spec_path = train_path.parent_path() / "generator.json";
        if (!fs::exists(spec_path) || parse_generator_spec(read_text_file(spec_path)) != cfg.generator) {
            throw Error("existing data under " + train_path.parent_path().string() +
                        " was generated with other settings; pass --force to regenerate");
        }
    }
    const Dataset train = load_dataset(train_path);
    const Dataset test = load_dataset(test_path);

    struct Job {
        int percent;
        std::size_t seed_index;
    };
    std::vector<Job> jobs;
    for (double f : cfg.fractions) {
        for (std::size_t k = 0; k < cfg.n_seeds; ++k) jobs.push_back({fraction_to_percent(f), k});
    }
    std::vector<std::optional<PairedResult>> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::mutex log_mutex;
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const auto [percent, k] = jobs[j];
            try {
                const auto seeds = run_seeds(cfg.seed, k, percent);
                const auto paths = run_paths(cfg, percent, k);
                const Dataset sub = subset(train, percent / 100.0, seeds.subset);
                ScoreSummary summary;
                const auto partition = score_subset(cfg, sub, seeds, &summary);
                save_partition(partition, paths.partition);
                const auto cur = train_subset(cfg, sub, &partition, TrainMode::Curriculum, seeds, 0,
                                              run_id(percent, k, TrainMode::Curriculum));
                write_training_outputs(cur, paths, TrainMode::Curriculum, cfg.training.audit);
                const auto base = train_subset(cfg, sub, &partition, TrainMode::Baseline, seeds,
                                               cur.total_steps, run_id(percent, k, TrainMode::Baseline));
                write_training_outputs(base, paths, TrainMode::Baseline, cfg.training.audit);
                PairedResult r;
                r.percent = percent;
                r.seed_index = k;
                r.curriculum = evaluate(cur.model, test);
                r.baseline = evaluate(base.model, test);
                r.steps = cur.total_steps;
                r.stage1_steps = cur.stage1_steps;
                write_text_file(paths.eval(TrainMode::Curriculum), report_to_json(r.curriculum));
                write_text_file(paths.eval(TrainMode::Baseline), report_to_json(r.baseline));
                results[j] = r;
                std::lock_guard lock(log_mutex);
                char buf[200];
                std::snprintf(buf, sizeof(buf),
                              "[%3d%% seed %2zu] steps %zu (stage1 %zu)  baseline %.2f / unseen %.2f  "
                              "curriculum %.2f / unseen %.2f\n",
                              percent, k, r.steps, r.stage1_steps, 100 * r.baseline.overall_classwise_acc,
                              100 * r.baseline.unseen_acc.value_or(0), 100 * r.curriculum.overall_classwise_acc,
                              100 * r.curriculum.unseen_acc.value_or(0));
                log << buf << std::flush;
            } catch (const std::exception& e) {
                errors[j] = e.what();
            }
        }
    };
    const std::size_t n_workers = std::min(cfg.jobs, jobs.size());
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (!errors[j].empty()) {
            throw Error("sub-run " + run_id(jobs[j].percent, jobs[j].seed_index, TrainMode::Curriculum) +
                        " failed: " + errors[j]);
        }
    }

    ResultGrid grid;
    for (const auto& r : results) {
        grid[{System::Baseline, r->percent}].push_back(r->baseline);
        grid[{System::Curriculum, r->percent}].push_back(r->curriculum);
    }
    const fs::path out(cfg.output_dir);
    const auto files = emit_results_table(grid, out);

    const auto rel = [&out](const fs::path& p) { return fs::relative(p, out).generic_string(); };
    ojson manifest;
    manifest["format"] = "ecl-manifest";
    manifest["version"] = 1;
    manifest["hash"] = "fnv1a64";
    manifest["config"] = ojson::parse(emit_config(cfg));
    manifest["data"] = ojson::array();
    for (const auto& p : {train_path, test_path, train_path.parent_path() / "generator.json"}) {
        manifest["data"].push_back({{"path", rel(p)}, {"hash", file_hash(p)}});
    }
    manifest["runs"] = ojson::array();
    for (const auto& job : jobs) {
        const auto paths = run_paths(cfg, job.percent, job.seed_index);
        for (TrainMode mode : {TrainMode::Curriculum, TrainMode::Baseline}) {
            ojson r;
            r["id"] = run_id(job.percent, job.seed_index, mode);
            r["fraction"] = job.percent / 100.0;
            r["seed_index"] = job.seed_index;
            r["mode"] = to_string(mode);
            ojson artifacts = ojson::array();
            std::vector<fs::path> files_of_run = {paths.partition, paths.metrics(mode), paths.checkpoint(mode),
                                                  paths.eval(mode)};
            if (cfg.training.audit) files_of_run.push_back(paths.audit(mode));
            for (const auto& p : files_of_run) artifacts.push_back({{"path", rel(p)}, {"hash", file_hash(p)}});
            r["artifacts"] = artifacts;
            manifest["runs"].push_back(r);
        }
    }
    manifest["results"] = ojson::array();
    for (const auto& p : {files.csv, files.text, files.curve}) {
        manifest["results"].push_back({{"path", rel(p)}, {"hash", file_hash(p)}});
    }
    write_text_file(out / "manifest.json", manifest.dump(2) + "\n");

    const auto table = summarize(grid);
    log << results_text(table);
    return table;
}

}  // namespace ecl
