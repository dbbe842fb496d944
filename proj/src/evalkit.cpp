#include "ecl/evalkit.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "ecl/error.hpp"
#include "ecl/text_io.hpp"

namespace ecl {

ClassWiseAccuracy class_wise_accuracy(std::span<const int> predictions, std::span<const int> labels,
                                      int num_classes) {
    if (num_classes <= 0) throw ValidationError("class count must be positive");
    if (predictions.size() != labels.size()) {
        throw ShapeError("predictions (" + std::to_string(predictions.size()) + ") and labels (" +
                         std::to_string(labels.size()) + ") differ in length");
    }
    const auto C = static_cast<std::size_t>(num_classes);
    std::vector<std::size_t> total(C, 0), correct(C, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || y >= num_classes) throw IndexError("label " + std::to_string(y) + " out of range");
        if (predictions[i] < 0 || predictions[i] >= num_classes) {
            throw IndexError("prediction " + std::to_string(predictions[i]) + " out of range");
        }
        ++total[static_cast<std::size_t>(y)];
        if (predictions[i] == y) ++correct[static_cast<std::size_t>(y)];
    }
    ClassWiseAccuracy out;
    out.per_class.resize(C);
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        if (total[c] == 0) {
            throw ValidationError("class " + std::to_string(c) +
                                  " has no samples; class-wise accuracy is undefined");
        }
        out.per_class[c] = static_cast<double>(correct[c]) / static_cast<double>(total[c]);
        sum += out.per_class[c];
    }
    out.mean = sum / static_cast<double>(C);
    return out;
}

EvalReport evaluate_predictions(const Dataset& test, std::span<const int> predictions) {
    if (predictions.size() != test.size()) throw ShapeError("one prediction per test sample required");
    EvalReport r;
    r.num_scenes = test.num_scenes;
    r.num_devices = test.num_devices;
    r.n_evaluated = test.size();
    const auto labels = test.scene_labels();
    const auto cw = class_wise_accuracy(predictions, labels, test.num_scenes);
    r.overall_classwise_acc = cw.mean;
    r.per_class_acc = cw.per_class;

    const auto C = static_cast<std::size_t>(test.num_scenes);
    r.confusion.assign(C, std::vector<std::size_t>(C, 0));
    std::vector<std::size_t> dev_total(static_cast<std::size_t>(test.num_devices), 0);
    std::vector<std::size_t> dev_correct(dev_total.size(), 0);
    std::vector<int> seen_pred, seen_lab, unseen_pred, unseen_lab;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto& s = test.samples[i];
        ++r.confusion[static_cast<std::size_t>(s.scene)][static_cast<std::size_t>(predictions[i])];
        ++dev_total[static_cast<std::size_t>(s.device)];
        if (predictions[i] == s.scene) ++dev_correct[static_cast<std::size_t>(s.device)];
        if (test.is_seen(s.device)) {
            seen_pred.push_back(predictions[i]);
            seen_lab.push_back(s.scene);
        } else {
            unseen_pred.push_back(predictions[i]);
            unseen_lab.push_back(s.scene);
        }
    }
    r.per_device_acc.resize(dev_total.size());
    for (std::size_t d = 0; d < dev_total.size(); ++d) {
        if (dev_total[d] > 0) {
            r.per_device_acc[d] = static_cast<double>(dev_correct[d]) / static_cast<double>(dev_total[d]);
        }
    }
    if (!seen_lab.empty()) r.seen_acc = class_wise_accuracy(seen_pred, seen_lab, test.num_scenes).mean;
    if (!unseen_lab.empty()) {
        r.unseen_acc = class_wise_accuracy(unseen_pred, unseen_lab, test.num_scenes).mean;
    }
    return r;
}

EvalReport evaluate(const SceneModel& model, const Dataset& test) {
    const auto pred = predict_scenes(model, test);
    return evaluate_predictions(test, pred);
}

std::string report_to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["n_evaluated"] = r.n_evaluated;
    j["overall_classwise_acc"] = r.overall_classwise_acc;
    j["seen_acc"] = r.seen_acc ? nlohmann::ordered_json(*r.seen_acc) : nlohmann::ordered_json(nullptr);
    j["unseen_acc"] = r.unseen_acc ? nlohmann::ordered_json(*r.unseen_acc) : nlohmann::ordered_json(nullptr);
    j["per_class_acc"] = r.per_class_acc;
    auto dev = nlohmann::ordered_json::array();
    for (const auto& a : r.per_device_acc) dev.push_back(a ? nlohmann::ordered_json(*a) : nlohmann::ordered_json(nullptr));
    j["per_device_acc"] = dev;
    j["confusion"] = r.confusion;
    return j.dump(2) + "\n";
}

std::string to_string(System s) { return s == System::Baseline ? "baseline" : "curriculum"; }

System system_from_string(const std::string& s) {
    if (s == "baseline") return System::Baseline;
    if (s == "curriculum") return System::Curriculum;
    throw ValidationError("unknown system '" + s + "'");
}

CellStats cell_stats(std::span<const double> v) {
    CellStats c;
    c.n = v.size();
    if (v.empty()) return c;
    double sum = 0.0;
    for (double x : v) sum += x;
    c.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - c.mean) * (x - c.mean);
        c.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return c;
}

ResultsTable summarize(const ResultGrid& grid) {
    if (grid.empty()) throw ValidationError("results table needs at least one report");
    int C = -1, D = -1;
    for (const auto& [key, reports] : grid) {
        for (const auto& r : reports) {
            if (C < 0) {
                C = r.num_scenes;
                D = r.num_devices;
            } else if (r.num_scenes != C || r.num_devices != D) {
                throw ValidationError("reports disagree on scene or device count");
            }
        }
    }
    ResultsTable t;
    for (System sys : {System::Baseline, System::Curriculum}) {
        ResultsRow row;
        row.system = sys;
        bool any = false;
        for (const auto& [key, reports] : grid) {
            if (key.first != sys || reports.empty()) continue;
            any = true;
            std::vector<double> overall, seen, unseen;
            for (const auto& r : reports) {
                overall.push_back(100.0 * r.overall_classwise_acc);
                if (r.seen_acc) seen.push_back(100.0 * *r.seen_acc);
                if (r.unseen_acc) unseen.push_back(100.0 * *r.unseen_acc);
            }
            row.overall[key.second] = cell_stats(overall);
            if (key.second == 5) {
                if (!seen.empty()) row.seen_5 = cell_stats(seen);
                if (!unseen.empty()) row.unseen_5 = cell_stats(unseen);
            }
        }
        if (any) t.rows.push_back(std::move(row));
    }
    return t;
}

namespace {

void append_cell(std::string& out, const std::optional<CellStats>& c) {
    if (c) {
        out += ',';
        append_double(out, c->mean);
        out += ',';
        append_double(out, c->std);
        out += ',' + std::to_string(c->n);
    } else {
        out += ",,,";
    }
}

std::optional<CellStats> find_cell(const ResultsRow& row, int percent) {
    const auto it = row.overall.find(percent);
    if (it == row.overall.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string results_header() {
    std::string h = "system";
    for (int p : kSubsetPercents) {
        const auto s = "p" + std::to_string(p);
        h += "," + s + "_mean," + s + "_std," + s + "_n";
    }
    h += ",seen5_mean,seen5_std,seen5_n,unseen5_mean,unseen5_std,unseen5_n";
    return h;
}

std::string fmt_cell(const std::optional<CellStats>& c) {
    if (!c) return "-";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", c->mean, c->std);
    return buf;
}

}  // namespace

std::string results_csv(const ResultsTable& t) {
    std::string out = "# ecl-results 1\n" + results_header() + "\n";
    for (const auto& row : t.rows) {
        out += to_string(row.system);
        for (int p : kSubsetPercents) append_cell(out, find_cell(row, p));
        append_cell(out, row.seen_5);
        append_cell(out, row.unseen_5);
        out += '\n';
    }
    return out;
}

ResultsTable parse_results_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t ln = 0;
    auto next = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++ln;
        return true;
    };
    if (!next() || line != "# ecl-results 1") throw ParseError("missing results header", ln);
    if (!next() || line != results_header()) throw ParseError("unexpected column header", ln);
    ResultsTable t;
    constexpr std::size_t kCells = std::size(kSubsetPercents) + 2;
    while (next()) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 1 + 3 * kCells) throw ParseError("wrong number of columns", ln);
        ResultsRow row;
        try {
            row.system = system_from_string(f[0]);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), ln);
        }
        LineReader num("");
        auto read_cell = [&](std::size_t k) -> std::optional<CellStats> {
            const auto& m = f[1 + 3 * k];
            const auto& s = f[2 + 3 * k];
            const auto& n = f[3 + 3 * k];
            if (m.empty() && s.empty() && n.empty()) return std::nullopt;
            try {
                CellStats c;
                c.mean = num.parse_double(m);
                c.std = num.parse_double(s);
                c.n = static_cast<std::size_t>(num.parse_int64(n));
                return c;
            } catch (const ParseError& e) {
                throw ParseError(e.what(), ln);
            }
        };
        for (std::size_t k = 0; k < std::size(kSubsetPercents); ++k) {
            if (auto c = read_cell(k)) row.overall[kSubsetPercents[k]] = *c;
        }
        row.seen_5 = read_cell(std::size(kSubsetPercents));
        row.unseen_5 = read_cell(std::size(kSubsetPercents) + 1);
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string results_text(const ResultsTable& t) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-12s", "System");
    out += buf;
    for (int p : kSubsetPercents) {
        std::snprintf(buf, sizeof(buf), " %16s", (std::to_string(p) + "%").c_str());
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), " %16s %16s\n", "Seen (5%)", "Unseen (5%)");
    out += buf;
    for (const auto& row : t.rows) {
        std::snprintf(buf, sizeof(buf), "%-12s", to_string(row.system).c_str());
        out += buf;
        // "±" is two bytes in UTF-8; pad one extra byte to keep columns aligned.
        for (int p : kSubsetPercents) {
            std::snprintf(buf, sizeof(buf), " %17s", fmt_cell(find_cell(row, p)).c_str());
            out += buf;
        }
        std::snprintf(buf, sizeof(buf), " %17s %17s\n", fmt_cell(row.seen_5).c_str(),
                      fmt_cell(row.unseen_5).c_str());
        out += buf;
    }
    return out;
}

std::string curve_csv(const ResultsTable& t) {
    std::string out = "# ecl-curve 1\nfraction,system,mean,std\n";
    for (int p : kSubsetPercents) {
        for (const auto& row : t.rows) {
            const auto c = find_cell(row, p);
            if (!c) continue;
            append_double(out, p / 100.0);
            out += "," + to_string(row.system) + ",";
            append_double(out, c->mean);
            out += ',';
            append_double(out, c->std);
            out += '\n';
        }
    }
    return out;
}

ResultFiles emit_results_table(const ResultGrid& grid, const std::filesystem::path& dir) {
    const auto t = summarize(grid);
    ResultFiles f{dir / "results.csv", dir / "results.txt", dir / "curve.csv"};
    write_text_file(f.csv, results_csv(t));
    write_text_file(f.text, results_text(t));
    write_text_file(f.curve, curve_csv(t));
    return f;
}

}  // namespace ecl
