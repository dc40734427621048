#pragma once

#include <map>
#include <string>
#include <vector>

#include "mfjump/model.hpp"

namespace mfjump {

// Flat configuration bag parsed from INI-style text with sections
// [spec] [marks] [mc] [tolerances]; keys stored as "section.key".
class RunConfig {
public:
    static RunConfig parse(const std::string& ini_text);
    static RunConfig parse_file(const std::string& path);

    void set(const std::string& dotted_key, const std::string& value);
    bool has(const std::string& dotted_key) const;
    std::string get(const std::string& dotted_key, const std::string& fallback = "") const;
    double get_double(const std::string& dotted_key, double fallback) const;
    int get_int(const std::string& dotted_key, int fallback) const;
    bool get_bool(const std::string& dotted_key, bool fallback) const;
    // throws ConfigError when absent
    std::string require(const std::string& dotted_key) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

struct RunOutput {
    std::string json; // summary document
    std::vector<std::pair<std::string, std::string>> artifacts; // name -> CSV text
    std::string text; // human-readable summary for stdout
    int exit_code = 0; // 0 pass, 1 SMP verdict FAIL
};

// commands: simulate | solve-lq | verify-smp | compare | convergence
// Throws Error (ConfigError -> exit 2 territory, numerical codes -> exit 3);
// SMP FAIL verdicts are reported through exit_code = 1, not exceptions.
RunOutput run_command(const std::string& command, const RunConfig& cfg);

MarkSpace mark_space_from_config(const RunConfig& cfg);
LQSpec lqspec_from_config(const RunConfig& cfg);

} // namespace mfjump
