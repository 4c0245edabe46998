#include "dealscope/manifest.hpp"

#include <fstream>
#include <utility>

#include "dealscope/models/artifact.hpp"
#include "dealscope/stats.hpp"

namespace dealscope {

namespace {

std::vector<std::string> split_path(const std::string& key) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : key) {
        if (c == '.') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    for (const auto& p : parts) {
        if (p.empty()) throw ConfigError("config key '" + key + "': empty path segment");
    }
    return parts;
}

[[noreturn]] void wrong_type(const std::string& key, const char* want,
                             const nlohmann::json& got) {
    throw ConfigError("config key '" + key + "': expected " + want + ", got " +
                      std::string(got.type_name()));
}

}  // namespace

ConfigTree::ConfigTree(nlohmann::json root) : root_(std::move(root)) {
    if (!root_.is_object()) throw ConfigError("config root: expected an object");
}

ConfigTree ConfigTree::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config file not readable: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    return ConfigTree(std::move(j));
}

const nlohmann::json* ConfigTree::find(const std::string& key) const {
    const nlohmann::json* node = &root_;
    for (const auto& part : split_path(key)) {
        if (!node->is_object()) return nullptr;
        auto it = node->find(part);
        if (it == node->end()) return nullptr;
        node = &*it;
    }
    return node;
}

bool ConfigTree::has(const std::string& key) const { return find(key) != nullptr; }

bool ConfigTree::get_bool(const std::string& key, bool fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) wrong_type(key, "boolean", *v);
    return v->get<bool>();
}

std::int64_t ConfigTree::get_int(const std::string& key, std::int64_t fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) wrong_type(key, "integer", *v);
    return v->get<std::int64_t>();
}

std::uint64_t ConfigTree::get_uint(const std::string& key, std::uint64_t fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() &&
                                    v->get<std::int64_t>() < 0)) {
        wrong_type(key, "non-negative integer", *v);
    }
    return v->get<std::uint64_t>();
}

double ConfigTree::get_double(const std::string& key, double fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) wrong_type(key, "number", *v);
    return v->get<double>();
}

std::string ConfigTree::get_string(const std::string& key, const std::string& fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) wrong_type(key, "string", *v);
    return v->get<std::string>();
}

nlohmann::json ConfigTree::subtree(const std::string& key) const {
    const auto* v = find(key);
    if (!v) return nlohmann::json::object();
    if (!v->is_object()) wrong_type(key, "object", *v);
    return *v;
}

void ConfigTree::set(const std::string& key, nlohmann::json value) {
    nlohmann::json* node = &root_;
    const auto parts = split_path(key);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        nlohmann::json& next = (*node)[parts[i]];
        if (next.is_null()) next = nlohmann::json::object();
        if (!next.is_object()) wrong_type(key, "object along the path", next);
        node = &next;
    }
    (*node)[parts.back()] = std::move(value);
}

void RunManifest::add_input(const std::string& path) {
    input_digests[path] = hex64(fnv1a64_file(path));
}

void RunManifest::add_output(const std::string& path) {
    if (!output_digests.count(path)) output_paths.push_back(path);
    output_digests[path] = hex64(fnv1a64_file(path));
}

nlohmann::json RunManifest::to_json() const {
    return nlohmann::json{{"schema_version", kSchemaVersion},
                          {"stage", stage},
                          {"versions", module_versions()},
                          {"config", config},
                          {"seed", seed},
                          {"threads", threads},
                          {"inputs", input_digests},
                          {"outputs", output_digests},
                          {"output_paths", output_paths},
                          {"elapsed_seconds", elapsed_seconds}};
}

void RunManifest::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << to_json().dump(2) << "\n";
}

nlohmann::json module_versions() {
    return nlohmann::json{{"dealscope", kLibraryVersion},
                          {"manifest_schema", RunManifest::kSchemaVersion},
                          {"model_artifact_schema", models::ModelArtifact::kSchemaVersion},
                          {"ground_truth_schema", 1}};
}

}  // namespace dealscope
