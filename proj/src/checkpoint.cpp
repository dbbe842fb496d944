#include "ecl/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ecl/error.hpp"

namespace ecl {

using nlohmann::json;

namespace {

json network_to_json(const Network& net) {
    json layers = json::array();
    for (const auto& l : net.layers()) {
        const auto w = l.weights().data();
        layers.push_back({{"in", l.in_dim()},
                          {"out", l.out_dim()},
                          {"activation", to_string(l.activation())},
                          {"weights", std::vector<double>(w.begin(), w.end())},
                          {"bias", l.bias()}});
    }
    return {{"layers", layers}};
}

Network network_from_json(const json& j) {
    std::vector<DenseLayer> layers;
    for (const auto& jl : j.at("layers")) {
        const auto in = jl.at("in").get<std::size_t>();
        const auto out = jl.at("out").get<std::size_t>();
        DenseLayer layer(in, out, activation_from_string(jl.at("activation").get<std::string>()));
        auto w = jl.at("weights").get<std::vector<double>>();
        auto b = jl.at("bias").get<std::vector<double>>();
        if (w.size() != in * out || b.size() != out) {
            throw ShapeError("checkpoint layer parameter arrays do not match declared dims");
        }
        layer.weights() = Matrix(out, in, std::move(w));
        layer.bias() = std::move(b);
        layers.push_back(std::move(layer));
    }
    return Network(std::move(layers));
}

}  // namespace

std::string checkpoint_to_string(const NamedNetworks& nets) {
    json doc{{"format", "ecl-checkpoint"}, {"version", 1}, {"networks", json::object()}};
    for (const auto& [name, net] : nets) doc["networks"][name] = network_to_json(net);
    return doc.dump() + "\n";
}

NamedNetworks checkpoint_from_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("checkpoint: ") + e.what(), 1);
    }
    try {
        if (doc.at("format") != "ecl-checkpoint") throw ValidationError("not an ecl checkpoint");
        if (doc.at("version") != 1) throw ValidationError("unsupported checkpoint version");
        NamedNetworks nets;
        for (const auto& [name, jn] : doc.at("networks").items()) {
            nets.emplace(name, network_from_json(jn));
        }
        return nets;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const NamedNetworks& nets) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << checkpoint_to_string(nets);
    if (!out) throw Error("write failed: " + path.string());
}

NamedNetworks load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_string(ss.str());
}

}  // namespace ecl
