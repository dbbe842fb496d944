#include "ecl/config.hpp"

#include <set>

#include <json.hpp>

#include "ecl/error.hpp"
#include "ecl/text_io.hpp"

namespace ecl {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Reads optional keys from one JSON object and rejects anything it was not
// asked about.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError("config: " + path_ + " must be an object");
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        used_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw ValidationError("config: " + where(key) + " has the wrong type");
        }
    }

    const json* child(const std::string& key) {
        used_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string where(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) throw ValidationError("config: unknown key '" + where(key) + "'");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

ojson optimizer_to_json(const OptimizerConfig& o) {
    return {{"kind", to_string(o.kind)},
            {"learning_rate", o.learning_rate},
            {"beta1", o.beta1},
            {"beta2", o.beta2},
            {"epsilon", o.epsilon}};
}

OptimizerConfig optimizer_from_json(const json& j, const std::string& path, OptimizerConfig o) {
    ObjectReader r(j, path);
    std::string kind = to_string(o.kind);
    r.get("kind", kind);
    o.kind = optimizer_kind_from_string(kind);
    r.get("learning_rate", o.learning_rate);
    r.get("beta1", o.beta1);
    r.get("beta2", o.beta2);
    r.get("epsilon", o.epsilon);
    r.finish();
    return o;
}

ojson plateau_to_json(const PlateauSettings& p) {
    return {{"patience", p.patience}, {"min_relative_improvement", p.min_relative_improvement}};
}

PlateauSettings plateau_from_json(const json& j, const std::string& path, PlateauSettings p) {
    ObjectReader r(j, path);
    r.get("patience", p.patience);
    r.get("min_relative_improvement", p.min_relative_improvement);
    r.finish();
    return p;
}

ojson generator_to_json(const GeneratorSpec& g) {
    ojson j;
    j["seed"] = g.seed;
    j["num_scenes"] = g.num_scenes;
    j["feature_dim"] = g.feature_dim;
    j["train_counts"] = g.train_counts;
    j["num_unseen_devices"] = g.num_unseen_devices;
    j["test_count_per_device"] = g.test_count_per_device;
    j["noise_std"] = g.noise_std;
    j["device_shift_strength"] = g.device_shift_strength;
    j["min_bumps"] = g.min_bumps;
    j["max_bumps"] = g.max_bumps;
    j["bump_width_min"] = g.bump_width_min;
    j["bump_width_max"] = g.bump_width_max;
    j["bump_amplitude_min"] = g.bump_amplitude_min;
    j["bump_amplitude_max"] = g.bump_amplitude_max;
    j["curve_kind"] = to_string(g.curve_kind);
    j["curve_degree"] = g.curve_degree;
    j["curve_scale"] = g.curve_scale;
    j["resonance_count"] = g.resonance_count;
    j["resonance_width_min"] = g.resonance_width_min;
    j["resonance_width_max"] = g.resonance_width_max;
    j["contrast_loss"] = g.contrast_loss;
    j["ambiguous_fraction"] = g.ambiguous_fraction;
    j["ambiguous_gain_max"] = g.ambiguous_gain_max;
    j["visible_gain_min"] = g.visible_gain_min;
    j["scene_device_coupling"] = g.scene_device_coupling;
    j["test_follows_coupling"] = g.test_follows_coupling;
    return j;
}

GeneratorSpec generator_from_json(const json& j, const std::string& path) {
    GeneratorSpec g;
    ObjectReader r(j, path);
    r.get("seed", g.seed);
    r.get("num_scenes", g.num_scenes);
    r.get("feature_dim", g.feature_dim);
    r.get("train_counts", g.train_counts);
    r.get("num_unseen_devices", g.num_unseen_devices);
    r.get("test_count_per_device", g.test_count_per_device);
    r.get("noise_std", g.noise_std);
    r.get("device_shift_strength", g.device_shift_strength);
    r.get("min_bumps", g.min_bumps);
    r.get("max_bumps", g.max_bumps);
    r.get("bump_width_min", g.bump_width_min);
    r.get("bump_width_max", g.bump_width_max);
    r.get("bump_amplitude_min", g.bump_amplitude_min);
    r.get("bump_amplitude_max", g.bump_amplitude_max);
    std::string kind = to_string(g.curve_kind);
    r.get("curve_kind", kind);
    g.curve_kind = curve_kind_from_string(kind);
    r.get("curve_degree", g.curve_degree);
    r.get("curve_scale", g.curve_scale);
    r.get("resonance_count", g.resonance_count);
    r.get("resonance_width_min", g.resonance_width_min);
    r.get("resonance_width_max", g.resonance_width_max);
    r.get("contrast_loss", g.contrast_loss);
    r.get("ambiguous_fraction", g.ambiguous_fraction);
    r.get("ambiguous_gain_max", g.ambiguous_gain_max);
    r.get("visible_gain_min", g.visible_gain_min);
    r.get("scene_device_coupling", g.scene_device_coupling);
    r.get("test_follows_coupling", g.test_follows_coupling);
    r.finish();
    return g;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line number
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        std::size_t line = 1;
        for (std::size_t i = 0; i < upto; ++i) line += text[i] == '\n';
        throw ParseError(std::string("config: ") + e.what(), line);
    }
}

}  // namespace

void RunConfig::validate() const {
    generator.validate();
    if (fractions.empty()) throw ValidationError("config: fractions must not be empty");
    std::set<int> seen;
    for (double f : fractions) {
        if (!seen.insert(fraction_to_percent(f)).second) {
            throw ValidationError("config: duplicate fraction " + format_double(f));
        }
    }
    if (n_seeds == 0) throw ValidationError("config: n_seeds must be at least 1");
    if (model.feature_dim == 0) throw ValidationError("config: model.feature_dim must be positive");
    for (auto h : model.hidden) {
        if (h == 0) throw ValidationError("config: model.hidden widths must be positive");
    }
    if (domain_probe.hidden_width == 0 || domain_probe.batch_size == 0) {
        throw ValidationError("config: domain_probe hidden_width and batch_size must be positive");
    }
    domain_probe.optimizer.validate();
    domain_probe.plateau.validate();
    training.validate();
    if (training.inv_ratio != kInvRatio && !allow_inv_ratio_override) {
        throw ValidationError(
            "config: training.inv_ratio differs from 0.8; set allow_inv_ratio_override to run anyway");
    }
    if (output_dir.empty()) throw ValidationError("config: output_dir must not be empty");
    if (jobs == 0) throw ValidationError("config: jobs must be at least 1");
}

std::string emit_generator_spec(const GeneratorSpec& spec) { return generator_to_json(spec).dump(2) + "\n"; }

GeneratorSpec parse_generator_spec(const std::string& json_text) {
    auto g = generator_from_json(parse_json(json_text), "");
    g.validate();
    return g;
}

std::string emit_config(const RunConfig& c) {
    ojson j;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["jobs"] = c.jobs;
    j["fractions"] = c.fractions;
    j["n_seeds"] = c.n_seeds;
    j["generator"] = generator_to_json(c.generator);
    j["model"] = {{"hidden", c.model.hidden}, {"feature_dim", c.model.feature_dim}};
    const auto& d = c.domain_probe;
    j["domain_probe"] = {{"hidden_width", d.hidden_width},
                         {"epochs", d.epochs},
                         {"batch_size", d.batch_size},
                         {"optimizer", optimizer_to_json(d.optimizer)},
                         {"early_stop", d.early_stop},
                         {"plateau", plateau_to_json(d.plateau)},
                         {"feature_source", to_string(d.feature_source)},
                         {"warm_up_epochs", d.warm_up_epochs}};
    const auto& t = c.training;
    j["training"] = {{"batch_size", t.batch_size},
                     {"optimizer", optimizer_to_json(t.optimizer)},
                     {"inv_ratio", t.inv_ratio},
                     {"stage1_max_epochs", t.stage1_max_epochs},
                     {"stage2_epochs", t.stage2_epochs},
                     {"stage2_early_stop", t.stage2_early_stop},
                     {"plateau", plateau_to_json(t.plateau)},
                     {"validation_fraction", t.validation_fraction},
                     {"reset_optimizer_at_transition", t.reset_optimizer_at_transition},
                     {"audit", t.audit}};
    j["allow_inv_ratio_override"] = c.allow_inv_ratio_override;
    return j.dump(2) + "\n";
}

RunConfig parse_config(const std::string& json_text) {
    const json doc = parse_json(json_text);
    RunConfig c;
    ObjectReader r(doc, "");
    r.get("seed", c.seed);
    r.get("output_dir", c.output_dir);
    r.get("jobs", c.jobs);
    r.get("fractions", c.fractions);
    r.get("n_seeds", c.n_seeds);
    r.get("allow_inv_ratio_override", c.allow_inv_ratio_override);
    if (const auto* g = r.child("generator")) c.generator = generator_from_json(*g, "generator");
    if (const auto* m = r.child("model")) {
        ObjectReader mr(*m, "model");
        mr.get("hidden", c.model.hidden);
        mr.get("feature_dim", c.model.feature_dim);
        mr.finish();
    }
    if (const auto* dj = r.child("domain_probe")) {
        auto& d = c.domain_probe;
        ObjectReader dr(*dj, "domain_probe");
        dr.get("hidden_width", d.hidden_width);
        dr.get("epochs", d.epochs);
        dr.get("batch_size", d.batch_size);
        dr.get("early_stop", d.early_stop);
        dr.get("warm_up_epochs", d.warm_up_epochs);
        std::string source = to_string(d.feature_source);
        dr.get("feature_source", source);
        d.feature_source = feature_source_from_string(source);
        if (const auto* o = dr.child("optimizer")) {
            d.optimizer = optimizer_from_json(*o, "domain_probe.optimizer", d.optimizer);
        }
        if (const auto* p = dr.child("plateau")) d.plateau = plateau_from_json(*p, "domain_probe.plateau", d.plateau);
        dr.finish();
    }
    if (const auto* tj = r.child("training")) {
        auto& t = c.training;
        ObjectReader tr(*tj, "training");
        tr.get("batch_size", t.batch_size);
        tr.get("inv_ratio", t.inv_ratio);
        tr.get("stage1_max_epochs", t.stage1_max_epochs);
        tr.get("stage2_epochs", t.stage2_epochs);
        tr.get("stage2_early_stop", t.stage2_early_stop);
        tr.get("validation_fraction", t.validation_fraction);
        tr.get("reset_optimizer_at_transition", t.reset_optimizer_at_transition);
        tr.get("audit", t.audit);
        if (const auto* o = tr.child("optimizer")) {
            t.optimizer = optimizer_from_json(*o, "training.optimizer", t.optimizer);
        }
        if (const auto* p = tr.child("plateau")) t.plateau = plateau_from_json(*p, "training.plateau", t.plateau);
        tr.finish();
    }
    r.finish();
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

}  // namespace ecl
