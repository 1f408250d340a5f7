#include "nextpm/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace nextpm {

namespace {

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += "; ";
        out += p;
    }
    return out;
}

// Tracks violations while reading fields so all of them are reported at once.
class Reader {
public:
    explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

    const nlohmann::json* field(const nlohmann::json& obj, const std::string& key, const std::string& where,
                                bool required = true) {
        if (!obj.is_object()) {
            problems_.push_back(where + ": expected an object");
            return nullptr;
        }
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) problems_.push_back(where + "." + key + ": missing");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const nlohmann::json& obj, const std::string& key, const std::string& where,
                                 bool required = true) {
        const auto* v = field(obj, key, where, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            problems_.push_back(where + "." + key + ": expected a number");
            return std::nullopt;
        }
        return v->get<double>();
    }

    std::optional<long long> integer(const nlohmann::json& obj, const std::string& key, const std::string& where,
                                     bool required = true) {
        const auto* v = field(obj, key, where, required);
        if (!v) return std::nullopt;
        if (!v->is_number_integer()) {
            problems_.push_back(where + "." + key + ": expected an integer");
            return std::nullopt;
        }
        return v->get<long long>();
    }

    void fail(const std::string& msg) { problems_.push_back(msg); }

private:
    std::vector<std::string>& problems_;
};

std::optional<SetupCostCalendar> read_calendar(const nlohmann::json& j, int horizon, Reader& rd,
                                               const std::string& where) {
    if (!j.is_object()) {
        rd.fail(where + ": expected an object");
        return std::nullopt;
    }
    const bool has_const = j.contains("constant"), has_values = j.contains("values"),
               has_pattern = j.contains("pattern");
    if (has_const + has_values + has_pattern != 1) {
        rd.fail(where + ": give exactly one of constant, values, pattern");
        return std::nullopt;
    }
    auto check_values = [&](const nlohmann::json& arr, const std::string& name) -> std::optional<std::vector<double>> {
        if (!arr.is_array()) {
            rd.fail(where + "." + name + ": expected an array");
            return std::nullopt;
        }
        std::vector<double> out;
        bool ok = true;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            if (!arr[i].is_number() || !(arr[i].get<double>() >= 0.0)) {
                rd.fail(where + "." + name + "[" + std::to_string(i) + "]: expected a number >= 0");
                ok = false;
                continue;
            }
            out.push_back(arr[i].get<double>());
        }
        if (!ok) return std::nullopt;
        return out;
    };
    if (has_const) {
        const auto d = rd.number(j, "constant", where);
        if (!d) return std::nullopt;
        if (!(*d >= 0.0)) {
            rd.fail(where + ".constant: must be >= 0");
            return std::nullopt;
        }
        return SetupCostCalendar::constant(std::max(horizon, 0), *d);
    }
    if (has_values) {
        auto vals = check_values(j["values"], "values");
        if (!vals) return std::nullopt;
        if (static_cast<int>(vals->size()) != horizon) {
            rd.fail(where + ".values: length " + std::to_string(vals->size()) + " does not match horizon " +
                    std::to_string(horizon));
            return std::nullopt;
        }
        return SetupCostCalendar::from_values(std::move(*vals));
    }
    auto vals = check_values(j["pattern"], "pattern");
    if (!vals) return std::nullopt;
    if (vals->size() != 12) {
        rd.fail(where + ".pattern: expected 12 monthly values, got " + std::to_string(vals->size()));
        return std::nullopt;
    }
    const auto start = rd.integer(j, "start", where, false).value_or(0);
    if (start < 0 || start > 11) {
        rd.fail(where + ".start: must be in 0..11");
        return std::nullopt;
    }
    SetupCostCalendar::Pattern pat{};
    std::copy(vals->begin(), vals->end(), pat.begin());
    return SetupCostCalendar::from_pattern(pat, std::max(horizon, 0), static_cast<int>(start));
}

std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid config: " + join(problems)), problems_(std::move(problems)) {}

SystemConfig config_from_json(const nlohmann::json& j) {
    std::vector<std::string> problems;
    Reader rd(problems);
    SystemConfig cfg;

    if (!j.is_object()) throw ConfigError({"config: expected a JSON object"});
    const auto horizon = rd.integer(j, "horizon", "config");
    const auto lambda = rd.number(j, "lambda", "config");
    const auto window = rd.integer(j, "window", "config");
    if (horizon) {
        if (*horizon < 1) rd.fail("config.horizon: must be >= 1");
        cfg.horizon = static_cast<int>(*horizon);
    }
    if (lambda) {
        if (!(*lambda > 0.0)) rd.fail("config.lambda: must be > 0");
        cfg.lambda = *lambda;
    }
    if (window) {
        if (*window < 1) rd.fail("config.window: must be >= 1");
        cfg.window = static_cast<int>(*window);
    }

    if (const auto* comps = rd.field(j, "components", "config")) {
        if (!comps->is_array() || comps->empty()) {
            rd.fail("config.components: expected a non-empty array");
        } else {
            std::set<int> seen;
            for (std::size_t i = 0; i < comps->size(); ++i) {
                const auto& cj = (*comps)[i];
                const std::string where = "config.components[" + std::to_string(i) + "]";
                ComponentSpec spec;
                spec.id = static_cast<int>(rd.integer(cj, "id", where, false).value_or(static_cast<long long>(i + 1)));
                if (cj.is_object() && cj.contains("name") && cj["name"].is_string()) spec.name = cj["name"];
                const auto a = rd.number(cj, "alpha", where);
                const auto b = rd.number(cj, "beta", where);
                const auto cm = rd.number(cj, "cm_cost", where);
                const auto pm = rd.number(cj, "pm_cost", where);
                if (a && !(*a > 0.0)) rd.fail(where + ".alpha: must be > 0");
                if (b && !(*b > 0.0)) rd.fail(where + ".beta: must be > 0");
                if (cm && !(*cm >= 0.0)) rd.fail(where + ".cm_cost: must be >= 0");
                if (pm && !(*pm >= 0.0)) rd.fail(where + ".pm_cost: must be >= 0");
                if (!seen.insert(spec.id).second) rd.fail(where + ".id: duplicate id " + std::to_string(spec.id));
                spec.alpha = a.value_or(1.0);
                spec.beta = b.value_or(1.0);
                spec.cm_cost = cm.value_or(0.0);
                spec.pm_cost = pm.value_or(0.0);
                cfg.components.push_back(spec);
            }
        }
    }

    if (const auto* cal = rd.field(j, "calendar", "config")) {
        if (horizon && *horizon >= 1)
            if (auto c = read_calendar(*cal, cfg.horizon, rd, "config.calendar")) cfg.calendar = std::move(*c);
    }

    if (j.contains("mc")) {
        const auto& mc = j["mc"];
        if (const auto reps = rd.integer(mc, "replications", "config.mc", false)) {
            if (*reps < 1) rd.fail("config.mc.replications: must be >= 1");
            else cfg.mc.replications = static_cast<std::size_t>(*reps);
        }
        if (const auto* seed = rd.field(mc, "seed", "config.mc", false)) {
            if (!seed->is_number_integer()) rd.fail("config.mc.seed: expected an integer");
            else cfg.mc.seed = seed->get<std::uint64_t>();
        }
        if (const auto tgt = rd.number(mc, "max_stderr", "config.mc", false)) cfg.mc.max_stderr = *tgt;
    }

    if (!problems.empty()) throw ConfigError(std::move(problems));
    return cfg;
}

SystemConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({"parse error at " + line_column(text, e.byte) + ": " + e.what()});
    }
    return config_from_json(j);
}

SystemConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file " + path.string()});
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        std::vector<std::string> problems;
        for (const auto& p : e.problems()) problems.push_back(path.filename().string() + ": " + p);
        throw ConfigError(std::move(problems));
    }
}

SetupCostCalendar calendar_from_json(const nlohmann::json& j, int horizon) {
    std::vector<std::string> problems;
    Reader rd(problems);
    auto cal = read_calendar(j, horizon, rd, "calendar");
    if (!problems.empty() || !cal) throw ConfigError(problems.empty() ? std::vector<std::string>{"calendar: invalid"} : problems);
    return *cal;
}

nlohmann::json to_json(const SetupCostCalendar& calendar) {
    if (calendar.pattern()) {
        const auto& p = *calendar.pattern();
        bool flat = std::all_of(p.begin(), p.end(), [&](double v) { return v == p[0]; });
        if (flat) return {{"constant", p[0]}};
        return {{"pattern", std::vector<double>(p.begin(), p.end())}, {"start", calendar.pattern_start()}};
    }
    return {{"values", calendar.values()}};
}

nlohmann::json to_json(const SystemConfig& config) {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : config.components) {
        nlohmann::json cj{{"id", c.id}, {"alpha", c.alpha}, {"beta", c.beta}, {"cm_cost", c.cm_cost},
                          {"pm_cost", c.pm_cost}};
        if (!c.name.empty()) cj["name"] = c.name;
        comps.push_back(cj);
    }
    return {{"horizon", config.horizon},
            {"lambda", config.lambda},
            {"window", config.window},
            {"components", comps},
            {"calendar", to_json(config.calendar)},
            {"mc",
             {{"replications", config.mc.replications},
              {"seed", config.mc.seed},
              {"max_stderr", config.mc.max_stderr}}}};
}

std::string config_hash(const SystemConfig& config) {
    const std::string text = to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> config_warnings(const SystemConfig& config) {
    std::vector<std::string> out;
    for (const auto& c : config.components)
        if (!has_ordered_costs(c))
            out.push_back("component " + std::to_string(c.id) + ": cm_cost < pm_cost; planning assumes cm_cost >= pm_cost");
    return out;
}

}  // namespace nextpm
