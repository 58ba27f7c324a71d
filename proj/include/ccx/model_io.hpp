#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccx/errors.hpp"
#include "ccx/scoring.hpp"

namespace ccx {

inline constexpr std::int32_t kModelFormatVersion = 1;

namespace detail {

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a64_hex(const std::string& data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

// Plain nlohmann::json keeps object keys sorted, so dump() is a canonical
// serialization: checksums computed over it agree between save and load.
using json = nlohmann::json;

inline json quantile_map_to_json(const QuantileMap& q) {
    json j;
    j["references"] = q.references;
    j["fit_size"] = q.fit_size;
    j["eps"] = q.eps;
    return j;
}

inline QuantileMap quantile_map_from_json(const json& j) {
    QuantileMap q;
    q.references = j.at("references").get<std::vector<double>>();
    q.fit_size = j.at("fit_size").get<std::int64_t>();
    q.eps = j.at("eps").get<double>();
    if (!q.fitted()) throw model_io_error("model file: quantile map has too few references");
    return q;
}

inline json vocabulary_to_json(const Vocabulary& v) {
    json j;
    j["tokens"] = v.tokens;
    j["doc_freq"] = v.doc_freq;
    j["num_docs"] = v.num_docs;
    j["cap"] = v.cap;
    return j;
}

inline Vocabulary vocabulary_from_json(const json& j) {
    Vocabulary v;
    v.tokens = j.at("tokens").get<std::vector<std::string>>();
    v.doc_freq = j.at("doc_freq").get<std::vector<std::int64_t>>();
    v.num_docs = j.at("num_docs").get<std::int64_t>();
    v.cap = j.at("cap").get<std::int64_t>();
    if (v.tokens.size() != v.doc_freq.size())
        throw model_io_error("model file: vocabulary token/df length mismatch");
    v.rebuild_index();
    return v;
}

inline json ensemble_to_json(const Ensemble& m) {
    json j;
    j["classes"] = m.num_classes;
    j["rounds"] = m.rounds;
    j["learning_rate"] = m.learning_rate;
    j["base_scores"] = m.base_scores;
    json trees = json::array();
    for (const Tree& t : m.trees) {
        json nodes = json::array();
        for (const TreeNode& nd : t.nodes)
            nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.value});
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j;
}

inline Ensemble ensemble_from_json(const json& j) {
    Ensemble m;
    m.num_classes = j.at("classes").get<std::int32_t>();
    m.rounds = j.at("rounds").get<std::int32_t>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.base_scores = j.at("base_scores").get<std::vector<double>>();
    for (const auto& jt : j.at("trees")) {
        Tree t;
        for (const auto& jn : jt) {
            if (!jn.is_array() || jn.size() != 5)
                throw model_io_error("model file: tree node must have 5 fields");
            TreeNode nd;
            nd.feature = jn[0].get<std::int32_t>();
            nd.threshold = jn[1].get<double>();
            nd.left = jn[2].get<std::int32_t>();
            nd.right = jn[3].get<std::int32_t>();
            nd.value = jn[4].get<double>();
            t.nodes.push_back(nd);
        }
        m.trees.push_back(std::move(t));
    }
    if (m.base_scores.size() != static_cast<std::size_t>(m.num_classes))
        throw model_io_error("model file: base score count mismatch");
    if (m.trees.size() !=
        static_cast<std::size_t>(m.rounds) * static_cast<std::size_t>(m.num_classes))
        throw model_io_error("model file: tree grid is not rounds x classes");
    return m;
}

inline json model_to_json(const ComplexityModel& model) {
    json j;
    j["vocabulary"] = vocabulary_to_json(model.vocabulary);
    j["ensemble"] = ensemble_to_json(model.expert);
    j["class_labels"] = model.class_labels;
    j["qmap_length"] = quantile_map_to_json(model.maps.length);
    j["qmap_entropy"] = quantile_map_to_json(model.maps.entropy);
    j["qmap_skillfulness"] = quantile_map_to_json(model.maps.skillfulness);
    j["qmap_absolute"] = quantile_map_to_json(model.maps.absolute);
    j["length_weight"] = model.config.length_weight;
    return j;
}

inline ComplexityModel model_from_json(const json& j) {
    ComplexityModel model;
    model.vocabulary = vocabulary_from_json(j.at("vocabulary"));
    model.expert = ensemble_from_json(j.at("ensemble"));
    model.class_labels = j.at("class_labels").get<std::vector<std::string>>();
    model.maps.length = quantile_map_from_json(j.at("qmap_length"));
    model.maps.entropy = quantile_map_from_json(j.at("qmap_entropy"));
    model.maps.skillfulness = quantile_map_from_json(j.at("qmap_skillfulness"));
    model.maps.absolute = quantile_map_from_json(j.at("qmap_absolute"));
    model.config.length_weight = j.at("length_weight").get<double>();
    if (model.class_labels.size() != static_cast<std::size_t>(model.expert.num_classes))
        throw model_io_error("model file: class label count mismatch");
    return model;
}

}  // namespace detail

// Writes the model as a single versioned JSON document. The checksum covers
// the canonical dump of the "model" subtree, so any corruption of model
// content is caught on load.
inline void save_model(const ComplexityModel& model, const std::string& path) {
    detail::json body = detail::model_to_json(model);
    detail::json file;
    file["format_version"] = kModelFormatVersion;
    file["checksum"] = detail::fnv1a64_hex(body.dump());
    file["model"] = std::move(body);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw model_io_error("cannot write model file " + path);
    out << file.dump(2) << '\n';
    if (!out) throw model_io_error("short write on model file " + path);
}

inline ComplexityModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw model_io_error("cannot open model file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    detail::json file = detail::json::parse(buf.str(), nullptr, false);
    if (file.is_discarded()) throw model_io_error("model file " + path + " is not valid JSON");
    if (!file.contains("format_version") || !file["format_version"].is_number_integer())
        throw model_io_error("model file " + path + " has no format version");
    auto version = file["format_version"].get<std::int32_t>();
    if (version != kModelFormatVersion)
        throw model_io_error("model file " + path + " has unsupported format version " +
                             std::to_string(version));
    if (!file.contains("checksum") || !file.contains("model"))
        throw model_io_error("model file " + path + " is missing checksum or model");
    std::string expected = file["checksum"].get<std::string>();
    std::string actual = detail::fnv1a64_hex(file["model"].dump());
    if (expected != actual)
        throw model_io_error("model file " + path + " failed its checksum (expected " + expected +
                             ", computed " + actual + ")");
    try {
        return detail::model_from_json(file["model"]);
    } catch (const detail::json::exception& e) {
        throw model_io_error("model file " + path + " is malformed: " + e.what());
    }
}

}  // namespace ccx
