#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "odc/errors.hpp"
#include "odc/io.hpp"

namespace odc {

// JSON configuration document with dotted-path access; every failure names
// the offending key so the caller can fix the file
class Config {
  public:
    Config() : root_(nlohmann::json::object()) {}
    explicit Config(nlohmann::json j) : root_(std::move(j)) {
        if (!root_.is_object())
            throw parameter_error("config: top level must be a JSON object");
    }

    static Config from_string(const std::string& text) {
        try {
            return Config(nlohmann::json::parse(text));
        } catch (const nlohmann::json::parse_error& e) {
            throw parameter_error(std::string("config: malformed JSON: ") +
                                  e.what());
        }
    }

    static Config from_file(const std::filesystem::path& path) {
        return from_string(read_text_file(path));
    }

    bool has(const std::string& dotted) const { return find(dotted) != nullptr; }

    double number(const std::string& dotted) const {
        const nlohmann::json* j = require(dotted);
        if (!j->is_number())
            throw parameter_error("config: key '" + dotted + "' must be a number");
        return j->get<double>();
    }

    double number_or(const std::string& dotted, double fallback) const {
        return has(dotted) ? number(dotted) : fallback;
    }

    std::int64_t integer(const std::string& dotted) const {
        const nlohmann::json* j = require(dotted);
        if (!j->is_number_integer())
            throw parameter_error("config: key '" + dotted +
                                  "' must be an integer");
        return j->get<std::int64_t>();
    }

    std::int64_t integer_or(const std::string& dotted, std::int64_t fb) const {
        return has(dotted) ? integer(dotted) : fb;
    }

    bool boolean_or(const std::string& dotted, bool fb) const {
        if (!has(dotted)) return fb;
        const nlohmann::json* j = require(dotted);
        if (!j->is_boolean())
            throw parameter_error("config: key '" + dotted +
                                  "' must be a boolean");
        return j->get<bool>();
    }

    std::string text(const std::string& dotted) const {
        const nlohmann::json* j = require(dotted);
        if (!j->is_string())
            throw parameter_error("config: key '" + dotted + "' must be a string");
        return j->get<std::string>();
    }

    std::string text_or(const std::string& dotted, const std::string& fb) const {
        return has(dotted) ? text(dotted) : fb;
    }

    const nlohmann::json& json() const { return root_; }

  private:
    const nlohmann::json* find(const std::string& dotted) const {
        const nlohmann::json* cur = &root_;
        std::size_t pos = 0;
        while (pos <= dotted.size()) {
            const std::size_t dot = dotted.find('.', pos);
            const std::string part =
                dotted.substr(pos, dot == std::string::npos ? dot : dot - pos);
            if (!cur->is_object() || !cur->contains(part)) return nullptr;
            cur = &(*cur)[part];
            if (dot == std::string::npos) return cur;
            pos = dot + 1;
        }
        return nullptr;
    }

    const nlohmann::json* require(const std::string& dotted) const {
        const nlohmann::json* j = find(dotted);
        if (!j)
            throw parameter_error("config: missing required key '" + dotted + "'");
        return j;
    }

    nlohmann::json root_;
};

// seed precedence: explicit flag, then config key, then ODC_SEED, then 0
inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                                  const Config& cfg,
                                  const std::string& key = "mc.seed") {
    if (flag) return *flag;
    if (cfg.has(key)) {
        const std::int64_t v = cfg.integer(key);
        if (v < 0) throw parameter_error("config: key '" + key + "' must be >= 0");
        return static_cast<std::uint64_t>(v);
    }
    if (const char* env = std::getenv("ODC_SEED")) {
        const std::string s(env);
        try {
            std::size_t used = 0;
            if (s.empty() || s[0] == '-') throw std::invalid_argument(s);
            const std::uint64_t v = std::stoull(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw parameter_error("ODC_SEED must be a nonnegative integer");
        }
    }
    return 0;
}

}  // namespace odc
