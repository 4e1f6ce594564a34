#include <cmath>
#include <set>
#include <string>

#include "json.hpp"

#include "gnf/ioutil.hpp"
#include "gnf/net.hpp"

namespace gnf {

namespace {

using json = nlohmann::ordered_json;

void require_keys(const json& obj, const std::set<std::string>& keys,
                  const char* where) {
    for (const auto& [key, value] : obj.items())
        if (!keys.count(key))
            throw ConfigError(std::string("model: unknown key '") + key + "' in " + where);
    for (const auto& key : keys)
        if (!obj.contains(key))
            throw ConfigError(std::string("model: missing key '") + key + "' in " + where);
}

std::vector<double> finite_array(const json& arr, const char* what) {
    if (!arr.is_array()) throw ConfigError(std::string("model: ") + what + " must be an array");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number())
            throw ConfigError(std::string("model: ") + what + " holds a non-number");
        const double d = v.get<double>();
        if (!std::isfinite(d))
            throw ConfigError(std::string("model: ") + what + " holds a non-finite value");
        out.push_back(d);
    }
    return out;
}

}  // namespace

std::string network_to_json(const Network& net) {
    json doc;
    doc["format"] = "gnf-model";
    doc["version"] = 1;
    doc["layer_sizes"] = net.layer_sizes;
    json acts = json::array();
    for (const auto& layer : net.layers) acts.push_back(activation_name(layer.activation));
    doc["activations"] = std::move(acts);
    json weights = json::array(), biases = json::array();
    for (const auto& layer : net.layers) {
        weights.push_back(layer.weights);
        biases.push_back(layer.biases);
    }
    doc["weights"] = std::move(weights);
    doc["biases"] = std::move(biases);
    doc["input_normalization"] = {{"lo", net.input_norm.lo}, {"hi", net.input_norm.hi}};
    return doc.dump(2) + "\n";
}

Network network_from_json(std::string_view text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw ConfigError("model: not a JSON object");
    require_keys(doc, {"format", "version", "layer_sizes", "activations", "weights",
                       "biases", "input_normalization"},
                 "model document");
    if (doc["format"] != "gnf-model") throw ConfigError("model: format is not 'gnf-model'");
    if (doc["version"] != 1) throw ConfigError("model: unsupported version");

    if (!doc["layer_sizes"].is_array() || doc["layer_sizes"].size() < 2)
        throw ConfigError("model: layer_sizes must list at least two layers");
    std::vector<int> sizes;
    for (const auto& v : doc["layer_sizes"]) {
        if (!v.is_number_integer() || v.get<int>() < 1)
            throw ConfigError("model: layer_sizes must be positive integers");
        sizes.push_back(v.get<int>());
    }
    if (!doc["activations"].is_array() || doc["activations"].size() != sizes.size() - 1)
        throw ConfigError("model: expected one activation per non-input layer");
    std::vector<Activation> acts;
    for (const auto& v : doc["activations"])
        acts.push_back(activation_from_name(v.get<std::string>()));

    Network net = make_network(sizes, acts);
    if (!doc["weights"].is_array() || doc["weights"].size() != net.layers.size() ||
        !doc["biases"].is_array() || doc["biases"].size() != net.layers.size())
        throw ConfigError("model: weights/biases must hold one array per layer");
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto w = finite_array(doc["weights"][l], "weights");
        auto b = finite_array(doc["biases"][l], "biases");
        if (w.size() != net.layers[l].weights.size() ||
            b.size() != net.layers[l].biases.size())
            throw ConfigError("model: layer " + std::to_string(l) +
                              " weight/bias shape does not match layer_sizes");
        net.layers[l].weights = std::move(w);
        net.layers[l].biases = std::move(b);
    }

    const json& norm = doc["input_normalization"];
    if (!norm.is_object()) throw ConfigError("model: input_normalization must be an object");
    require_keys(norm, {"lo", "hi"}, "input_normalization");
    net.input_norm.lo = finite_array(norm["lo"], "input_normalization.lo");
    net.input_norm.hi = finite_array(norm["hi"], "input_normalization.hi");
    if (net.input_norm.lo.size() != net.input_norm.hi.size())
        throw ConfigError("model: input_normalization lo/hi lengths differ");
    if (!net.input_norm.identity()) {
        if (net.input_norm.lo.size() != static_cast<std::size_t>(net.input_dim()))
            throw ConfigError("model: input_normalization length does not match inputs");
        for (std::size_t i = 0; i < net.input_norm.lo.size(); ++i)
            if (!(net.input_norm.lo[i] < net.input_norm.hi[i]))
                throw ConfigError("model: input_normalization requires lo < hi");
    }
    return net;
}

void save_network(const Network& net, const std::filesystem::path& path) {
    write_file_atomic(path, network_to_json(net));
}

Network load_network(const std::filesystem::path& path) {
    return network_from_json(read_file(path));
}

}  // namespace gnf
