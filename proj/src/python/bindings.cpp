#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ecl/config.hpp"
#include "ecl/curriculum.hpp"
#include "ecl/dataset.hpp"
#include "ecl/domain_probe.hpp"
#include "ecl/error.hpp"
#include "ecl/evalkit.hpp"
#include "ecl/experiment.hpp"
#include "ecl/generator.hpp"

namespace py = pybind11;
using namespace ecl;

namespace {

py::dict dataset_to_dict(const Dataset& d) {
    const std::size_t n = d.size(), f = d.feature_dim;
    py::array_t<double> x({n, f});
    py::array_t<std::int64_t> ids(n);
    py::array_t<int> scenes(n), devices(n);
    auto xm = x.mutable_unchecked<2>();
    auto im = ids.mutable_unchecked<1>();
    auto sm = scenes.mutable_unchecked<1>();
    auto dm = devices.mutable_unchecked<1>();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = d.samples[i];
        for (std::size_t k = 0; k < f; ++k) xm(i, k) = s.features[k];
        im(i) = s.id;
        sm(i) = s.scene;
        dm(i) = s.device;
    }
    py::dict out;
    out["features"] = x;
    out["ids"] = ids;
    out["scenes"] = scenes;
    out["devices"] = devices;
    out["num_scenes"] = d.num_scenes;
    out["num_devices"] = d.num_devices;
    out["seen_devices"] = d.seen_devices;
    out["unseen_devices"] = d.unseen_devices;
    return out;
}

py::dict report_to_dict(const EvalReport& r) {
    py::dict out;
    out["overall_classwise_acc"] = r.overall_classwise_acc;
    out["per_class_acc"] = r.per_class_acc;
    out["per_device_acc"] = r.per_device_acc;
    out["seen_acc"] = r.seen_acc;
    out["unseen_acc"] = r.unseen_acc;
    out["confusion"] = r.confusion;
    out["n_evaluated"] = r.n_evaluated;
    return out;
}

CommandOptions options(bool force, std::optional<double> fraction, std::size_t seed_index) {
    CommandOptions o;
    o.force = force;
    o.fraction = fraction;
    o.seed_index = seed_index;
    return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Entropy-guided curriculum learning on a synthetic multi-device scene benchmark.";

    // Translators run newest first, so the base class goes in first.
    const auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());

    m.def("default_config", [] { return emit_config(RunConfig{}); }, "Default run configuration as JSON text.");
    m.def("normalize_config", [](const std::string& text) { return emit_config(parse_config(text)); },
          py::arg("config_json"), "Parses, validates and re-emits a configuration with every key filled in.");

    m.def(
        "generate",
        [](const std::string& config_json) {
            const auto cfg = parse_config(config_json);
            const auto data = generate(cfg.generator);
            return py::make_tuple(dataset_to_dict(data.train), dataset_to_dict(data.test));
        },
        py::arg("config_json"), "Generates (train, test) for the config's generator settings.");
    m.def(
        "load_dataset", [](const std::string& path) { return dataset_to_dict(load_dataset(path)); },
        py::arg("path"));

    m.def("entropy", [](const std::vector<double>& p) { return entropy(p); }, py::arg("probs"),
          "Shannon entropy in nats.");
    m.def(
        "build_partition",
        [](const std::vector<std::int64_t>& ids, const std::vector<double>& scores) {
            if (ids.size() != scores.size()) throw ShapeError("ids and scores differ in length");
            std::vector<EntropyScore> s;
            for (std::size_t i = 0; i < ids.size(); ++i) s.push_back({ids[i], scores[i]});
            const auto p = build_partition(std::move(s));
            return py::make_tuple(p.inv_ids, p.spec_ids);
        },
        py::arg("ids"), py::arg("entropies"), "Returns (inv_ids, spec_ids), each in rank order.");
    m.def(
        "plan_batch",
        [](std::size_t b) {
            const auto p = plan_batch(b);
            return py::make_tuple(p.n_inv, p.n_spec);
        },
        py::arg("batch_size"));
    m.def(
        "class_wise_accuracy",
        [](const std::vector<int>& predictions, const std::vector<int>& labels, int num_classes) {
            const auto r = class_wise_accuracy(predictions, labels, num_classes);
            return py::make_tuple(r.mean, r.per_class);
        },
        py::arg("predictions"), py::arg("labels"), py::arg("num_classes"));

    m.def(
        "run_pair",
        [](const std::string& config_json, double fraction, std::size_t seed_index) {
            const auto cfg = parse_config(config_json);
            PairedResult r;
            {
                py::gil_scoped_release release;
                const auto data = generate(cfg.generator);
                r = run_pair(cfg, data.train, data.test, fraction_to_percent(fraction), seed_index);
            }
            py::dict out;
            out["baseline"] = report_to_dict(r.baseline);
            out["curriculum"] = report_to_dict(r.curriculum);
            out["steps"] = r.steps;
            out["stage1_steps"] = r.stage1_steps;
            return out;
        },
        py::arg("config_json"), py::arg("fraction") = 0.05, py::arg("seed_index") = 0,
        "Curriculum and step-matched baseline on one subset, evaluated on the test split. Writes no files.");

    m.def(
        "gen_data",
        [](const std::string& config_path, bool force) {
            std::ostringstream log;
            cmd_gen_data(load_config(config_path), options(force, std::nullopt, 0), log);
            return log.str();
        },
        py::arg("config_path"), py::arg("force") = false);
    m.def(
        "compare",
        [](const std::string& config_path, bool force) {
            std::ostringstream log;
            const auto cfg = load_config(config_path);
            {
                py::gil_scoped_release release;
                cmd_compare(cfg, options(force, std::nullopt, 0), log);
            }
            return log.str();
        },
        py::arg("config_path"), py::arg("force") = false,
        "Runs the full grid like `ecl compare` and returns the log text.");
}
