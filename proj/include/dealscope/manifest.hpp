#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace dealscope {

inline constexpr const char* kLibraryVersion = "0.1.0";

// Bad or missing configuration. The message always names the key.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One JSON document holding the whole run configuration as a key tree.
// Keys are dotted paths ("sampling.kind"). Typed getters fall back to a
// default when the key is absent and throw ConfigError, naming the key,
// when the stored value has the wrong type. Flag overrides are applied
// with set() so the snapshot a manifest records is fully resolved.
class ConfigTree {
  public:
    ConfigTree() : root_(nlohmann::json::object()) {}
    explicit ConfigTree(nlohmann::json root);
    static ConfigTree load_file(const std::string& path);

    bool has(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    // Object subtree for a stage section; {} when the key is absent.
    nlohmann::json subtree(const std::string& key) const;

    void set(const std::string& key, nlohmann::json value);

    const nlohmann::json& root() const { return root_; }

  private:
    const nlohmann::json* find(const std::string& key) const;

    nlohmann::json root_;
};

// Everything needed to reproduce a stage run byte-identically: the
// resolved config, the seed, what went in and what came out (by digest),
// and how long it took.
struct RunManifest {
    static constexpr int kSchemaVersion = 1;

    std::string stage;
    nlohmann::json config;
    std::uint64_t seed = 0;
    int threads = 0;
    std::map<std::string, std::string> input_digests;
    std::map<std::string, std::string> output_digests;
    std::vector<std::string> output_paths;
    double elapsed_seconds = 0.0;

    void add_input(const std::string& path);
    void add_output(const std::string& path);

    nlohmann::json to_json() const;
    void write(const std::string& path) const;
};

// Component versions stamped into every manifest.
nlohmann::json module_versions();

}  // namespace dealscope
