#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace comets::cli {

enum class ValueType { UInt, Float, Bool, String, UIntList, FloatList, StringList };

struct KeySpec {
    std::string_view key;
    ValueType type;
    std::string_view default_value;
    std::string_view help;
};

/// Every accepted configuration key. Anything else is rejected.
const std::vector<KeySpec>& schema();

/// Markdown table of the schema (what docs/config.md is generated from).
std::string schema_markdown();

/// Flat `key = value` document with dotted keys. Lists are comma separated,
/// `#` starts a comment. Values are type-checked when set.
class RunConfig {
public:
    static RunConfig parse(std::string_view text, const std::string& origin = "config");
    static RunConfig load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    bool is_set(const std::string& key) const { return values_.count(key) != 0; }

    std::uint64_t get_uint(const std::string& key) const;
    std::size_t get_size(const std::string& key) const { return static_cast<std::size_t>(get_uint(key)); }
    double get_float(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::vector<std::size_t> get_uints(const std::string& key) const;
    std::vector<double> get_floats(const std::string& key) const;
    std::vector<std::string> get_strings(const std::string& key) const;

    /// Every schema key with its effective value, for run manifests.
    nlohmann::json resolved() const;

private:
    std::string raw(const std::string& key, ValueType expected) const;

    std::map<std::string, std::string> values_;
};

}  // namespace comets::cli
