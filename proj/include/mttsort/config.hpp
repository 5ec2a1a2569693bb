#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mttsort/errors.hpp"

namespace mttsort {

/// Tunable tracker hyperparameters. Defaults are the balanced baseline
/// (preset `config1`).
struct TrackerConfig {
    double min_confidence = 0.5;
    double max_dist = 0.2;          ///< appearance cosine-cost threshold
    double max_iou_distance = 0.7;
    double nms_max_overlap = 0.7;
    int max_age = 30;
    int n_init = 3;
    int nn_budget = 100;            ///< kept for compatibility; the feature buffer supersedes it
    int feature_buffer_size = 5;

    friend bool operator==(const TrackerConfig&, const TrackerConfig&) = default;
};

enum class FieldKind { Real, Integer };

/// Describes one TrackerConfig field: its name, type, and admissible range.
struct ConfigField {
    std::string_view name;
    FieldKind kind;
    double low;
    double high;
    bool low_open;  ///< true when `low` itself is not admissible
    std::variant<double TrackerConfig::*, int TrackerConfig::*> member;
};

inline constexpr double kUnbounded = 1e300;

inline const std::array<ConfigField, 8>& config_fields() {
    static const std::array<ConfigField, 8> fields{{
        {"min_confidence", FieldKind::Real, 0.0, 1.0, false, &TrackerConfig::min_confidence},
        {"max_dist", FieldKind::Real, 0.0, 1.0, true, &TrackerConfig::max_dist},
        {"max_iou_distance", FieldKind::Real, 0.0, 1.0, true, &TrackerConfig::max_iou_distance},
        {"nms_max_overlap", FieldKind::Real, 0.0, 1.0, true, &TrackerConfig::nms_max_overlap},
        {"max_age", FieldKind::Integer, 1, kUnbounded, false, &TrackerConfig::max_age},
        {"n_init", FieldKind::Integer, 1, kUnbounded, false, &TrackerConfig::n_init},
        {"nn_budget", FieldKind::Integer, 1, kUnbounded, false, &TrackerConfig::nn_budget},
        {"feature_buffer_size", FieldKind::Integer, 1, kUnbounded, false,
         &TrackerConfig::feature_buffer_size},
    }};
    return fields;
}

inline const ConfigField& config_field(std::string_view name) {
    for (const auto& f : config_fields()) {
        if (f.name == name) return f;
    }
    throw ConfigError("unknown config key '" + std::string(name) + "'");
}

inline double get_field(const TrackerConfig& cfg, const ConfigField& field) {
    return std::visit([&](auto ptr) { return static_cast<double>(cfg.*ptr); }, field.member);
}

/// Integer fields are rounded to nearest.
inline void set_field(TrackerConfig& cfg, const ConfigField& field, double value) {
    std::visit(
        [&](auto ptr) {
            using T = std::remove_reference_t<decltype(cfg.*ptr)>;
            if constexpr (std::is_same_v<T, int>) {
                cfg.*ptr = static_cast<int>(std::lround(value));
            } else {
                cfg.*ptr = value;
            }
        },
        field.member);
}

inline void validate_field(const ConfigField& field, double value) {
    const bool below = field.low_open ? !(value > field.low) : !(value >= field.low);
    if (below || !(value <= field.high) || !std::isfinite(value)) {
        std::ostringstream os;
        os << "config field '" << field.name << "' = " << value << " is outside "
           << (field.low_open ? "(" : "[") << field.low << ", ";
        if (field.high >= kUnbounded) {
            os << "inf)";
        } else {
            os << field.high << "]";
        }
        throw ConfigError(os.str());
    }
}

inline void validate(const TrackerConfig& cfg) {
    for (const auto& f : config_fields()) validate_field(f, get_field(cfg, f));
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace detail

/// One `key = value` entry of a key/value text file.
struct KeyValue {
    std::string key;
    std::string value;
    std::size_t line;
};

/// Splits `key = value` lines. `#` starts a comment; blank lines are skipped.
inline std::vector<KeyValue> parse_key_values(std::string_view text) {
    std::vector<KeyValue> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
        auto key = detail::trim(line.substr(0, eq));
        auto value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", line_no);
        out.push_back({std::string(key), std::string(value), line_no});
        if (end == text.size()) break;
    }
    return out;
}

/// Applies `key = value` text on top of `base`. Unknown keys, duplicate keys,
/// malformed numbers, and out-of-range values are rejected.
inline TrackerConfig parse_config(std::string_view text, TrackerConfig base = {}) {
    std::map<std::string, std::size_t> seen;
    for (const auto& kv : parse_key_values(text)) {
        const ConfigField* field = nullptr;
        for (const auto& f : config_fields()) {
            if (f.name == kv.key) field = &f;
        }
        if (field == nullptr) {
            throw ConfigError("line " + std::to_string(kv.line) + ": unknown config key '" + kv.key + "'");
        }
        if (!seen.emplace(kv.key, kv.line).second) {
            throw ConfigError("line " + std::to_string(kv.line) + ": duplicate config key '" + kv.key + "'");
        }
        double value = 0.0;
        if (field->kind == FieldKind::Integer) {
            auto v = detail::parse_int(kv.value);
            if (!v) throw ConfigError("config field '" + kv.key + "' expects an integer, got '" + kv.value + "'");
            value = static_cast<double>(*v);
        } else {
            auto v = detail::parse_double(kv.value);
            if (!v) throw ConfigError("config field '" + kv.key + "' expects a number, got '" + kv.value + "'");
            value = *v;
        }
        validate_field(*field, value);
        set_field(base, *field, value);
    }
    return base;
}

inline std::string format_config(const TrackerConfig& cfg) {
    std::string out;
    for (const auto& f : config_fields()) {
        out += std::string(f.name) + " = ";
        if (f.kind == FieldKind::Integer) {
            out += std::to_string(static_cast<long long>(get_field(cfg, f)));
        } else {
            out += detail::format_double(get_field(cfg, f));
        }
        out += '\n';
    }
    return out;
}

// Named presets. Only the stated overrides differ from the baseline.

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"config1", "config2", "config3", "config4",
                                                "config5", "config6", "config7"};
    return names;
}

/// `config7` is the slot for GA-optimized values; it carries the baseline until
/// an `optimize` run supplies a config file.
inline TrackerConfig load_preset(std::string_view name) {
    TrackerConfig c;
    if (name == "config1" || name == "config7") return c;
    if (name == "config2") {
        c.min_confidence = 0.7;
    } else if (name == "config3") {
        c.max_dist = 0.4;
        c.max_age = 80;
    } else if (name == "config4") {
        c.nms_max_overlap = 0.3;
        c.max_iou_distance = 0.3;
    } else if (name == "config5") {
        c.nms_max_overlap = 1.0;
        c.max_iou_distance = 0.9;
    } else if (name == "config6") {
        c.min_confidence = 0.3;
        c.max_dist = 0.6;
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "'");
    }
    return c;
}

}  // namespace mttsort
