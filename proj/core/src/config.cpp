#include "medzisc/config.hpp"

#include "medzisc/errors.hpp"

#include <fstream>
#include <limits>
#include <set>

namespace medzisc {

namespace {

using nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

/// Walks one JSON object, tracking which keys were consumed.
class ObjectReader {
public:
    ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
        if (!object_.is_object()) {
            throw InputError(path_.empty() ? "config" : path_, "expected an object");
        }
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = object_.find(key);
        if (it == object_.end() || it->is_null()) {
            return nullptr;
        }
        return &*it;
    }

    std::string field(const std::string& key) const { return join(path_, key); }

    void read(const std::string& key, double& out) {
        if (const json* v = get(key)) {
            out = number(*v, field(key));
        }
    }

    void read(const std::string& key, bool& out) {
        if (const json* v = get(key)) {
            if (!v->is_boolean()) {
                throw InputError(field(key), "expected true or false");
            }
            out = v->get<bool>();
        }
    }

    void read(const std::string& key, std::size_t& out) {
        if (const json* v = get(key)) {
            out = static_cast<std::size_t>(count(*v, field(key)));
        }
    }

    void read(const std::string& key, int& out) {
        if (const json* v = get(key)) {
            const auto value = count(*v, field(key));
            if (value > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
                throw InputError(field(key), "value too large");
            }
            out = static_cast<int>(value);
        }
    }

    void read_seed(const std::string& key, std::uint64_t& out) {
        if (const json* v = get(key)) {
            out = count(*v, field(key));
        }
    }

    void read(const std::string& key, Range& out) {
        if (const json* v = get(key)) {
            const auto values = numbers(*v, field(key));
            if (values.size() != 2) {
                throw InputError(field(key), "expected [low, high]");
            }
            out = {values[0], values[1]};
        }
    }

    void read(const std::string& key, std::vector<double>& out) {
        if (const json* v = get(key)) {
            out = numbers(*v, field(key));
        }
    }

    /// Reject keys that were never asked for.
    void finish() const {
        for (auto it = object_.begin(); it != object_.end(); ++it) {
            if (seen_.count(it.key()) == 0) {
                throw InputError(field(it.key()), "unknown key");
            }
        }
    }

    static double number(const json& v, const std::string& field) {
        if (!v.is_number()) {
            throw InputError(field, "expected a number");
        }
        return v.get<double>();
    }

    static std::uint64_t count(const json& v, const std::string& field) {
        if (v.is_number_unsigned()) {
            return v.get<std::uint64_t>();
        }
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
            return static_cast<std::uint64_t>(v.get<std::int64_t>());
        }
        throw InputError(field, "expected a nonnegative integer");
    }

    static std::vector<double> numbers(const json& v, const std::string& field) {
        if (!v.is_array()) {
            throw InputError(field, "expected an array of numbers");
        }
        std::vector<double> out;
        for (std::size_t k = 0; k < v.size(); ++k) {
            out.push_back(number(v[k], field + "[" + std::to_string(k) + "]"));
        }
        return out;
    }

private:
    const json& object_;
    std::string path_;
    std::set<std::string> seen_;
};

json range_json(const Range& r) { return json::array({r.low, r.high}); }

// Scenario keys other than n/c/g, shared by scenario and grid files.
void read_scenario_body(ObjectReader& in, ScenarioConfig& out) {
    in.read("n_true", out.n_true);
    if (const json* split = in.get("split")) {
        ObjectReader s(*split, in.field("split"));
        s.read("both", out.split.both);
        s.read("m_only", out.split.m_only);
        s.read("f_only", out.split.f_only);
        s.finish();
    }
    if (const json* ranges = in.get("ranges")) {
        ObjectReader r(*ranges, in.field("ranges"));
        if (const json* both = r.get("both")) {
            ObjectReader b(*both, r.field("both"));
            b.read("alpha_x", out.both_alpha_x);
            b.read("gamma_x", out.both_gamma_x);
            b.read("beta_m", out.both_beta_m);
            b.read("beta_f", out.both_beta_f);
            b.finish();
        }
        if (const json* m = r.get("m_only")) {
            ObjectReader b(*m, r.field("m_only"));
            b.read("exposure", out.m_only_exposure);
            b.read("beta_m", out.m_only_beta_m);
            b.finish();
        }
        if (const json* f = r.get("f_only")) {
            ObjectReader b(*f, r.field("f_only"));
            b.read("exposure", out.f_only_exposure);
            b.read("beta_f", out.f_only_beta_f);
            b.finish();
        }
        r.finish();
    }
    in.read("literal_assignment", out.literal_assignment);
    in.read("alpha_z", out.alpha_z);
    in.read("gamma_z", out.gamma_z);
    in.read("beta_x", out.beta_x);
    in.read("beta_z", out.beta_z);
    in.read("dispersion", out.dispersion);
    in.read("noise_sd", out.noise_sd);
    in.read("exposure_probability", out.exposure_probability);
    in.read_seed("seed", out.seed);
    in.read("replicates", out.replicates);
}

std::vector<std::size_t> sizes(ObjectReader& in, const std::string& key, std::size_t fallback) {
    const json* v = in.get(key);
    if (!v) {
        return {fallback};
    }
    if (!v->is_array()) {
        return {static_cast<std::size_t>(ObjectReader::count(*v, in.field(key)))};
    }
    if (v->empty()) {
        throw InputError(in.field(key), "list must not be empty");
    }
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < v->size(); ++k) {
        out.push_back(static_cast<std::size_t>(
            ObjectReader::count((*v)[k], in.field(key) + "[" + std::to_string(k) + "]")));
    }
    return out;
}

std::string optional_string(ObjectReader& in, const std::string& key) {
    const json* v = in.get(key);
    if (!v) {
        return {};
    }
    if (!v->is_string()) {
        throw InputError(in.field(key), "expected a string");
    }
    return v->get<std::string>();
}

}  // namespace

ScenarioConfig scenario_from_json(const json& object, ScenarioConfig base) {
    ObjectReader in(object, "");
    in.read("n", base.subjects);
    in.read("c", base.cells);
    in.read("g", base.genes);
    read_scenario_body(in, base);
    in.finish();
    base.validate();
    return base;
}

AnalysisConfig analysis_from_json(const json& object, AnalysisConfig base) {
    ObjectReader in(object, "analysis");
    if (auto rule = optional_string(in, "rule"); !rule.empty()) {
        base.rule = screening_rule_from_string(rule);
    }
    in.read("level", base.level);
    in.read("screening_level", base.screening_level);
    if (const json* contrast = in.get("contrast")) {
        const auto values = ObjectReader::numbers(*contrast, in.field("contrast"));
        if (values.size() != 2) {
            throw InputError(in.field("contrast"), "expected [x1, x2]");
        }
        base.x1 = values[0];
        base.x2 = values[1];
    }
    if (const json* profile = in.get("covariate_profile")) {
        base.covariate_profile = ObjectReader::numbers(*profile, in.field("covariate_profile"));
    }
    if (const json* lambda = in.get("lambda")) {
        base.lambda = ObjectReader::number(*lambda, in.field("lambda"));
    }
    in.read("folds", base.folds);
    in.read("intercept", base.intercept);
    if (auto naive = optional_string(in, "naive_outcome"); !naive.empty()) {
        base.naive_outcome = naive_outcome_from_string(naive);
    }
    in.read_seed("seed", base.seed);
    in.read("threads", base.threads);
    in.finish();
    base.validate();
    return base;
}

json to_json(const ScenarioConfig& c) {
    return json{
        {"n", c.subjects},
        {"c", c.cells},
        {"g", c.genes},
        {"n_true", c.n_true},
        {"split", {{"both", c.split.both}, {"m_only", c.split.m_only}, {"f_only", c.split.f_only}}},
        {"ranges",
         {{"both",
           {{"alpha_x", range_json(c.both_alpha_x)},
            {"gamma_x", range_json(c.both_gamma_x)},
            {"beta_m", range_json(c.both_beta_m)},
            {"beta_f", range_json(c.both_beta_f)}}},
          {"m_only", {{"exposure", range_json(c.m_only_exposure)}, {"beta_m", range_json(c.m_only_beta_m)}}},
          {"f_only", {{"exposure", range_json(c.f_only_exposure)}, {"beta_f", range_json(c.f_only_beta_f)}}}}},
        {"literal_assignment", c.literal_assignment},
        {"alpha_z", c.alpha_z},
        {"gamma_z", c.gamma_z},
        {"beta_x", c.beta_x},
        {"beta_z", c.beta_z},
        {"dispersion", range_json(c.dispersion)},
        {"noise_sd", c.noise_sd},
        {"exposure_probability", c.exposure_probability},
        {"seed", c.seed},
        {"replicates", c.replicates},
    };
}

json to_json(const AnalysisConfig& c) {
    json out{
        {"rule", to_string(c.rule)},
        {"level", c.level},
        {"screening_level", c.screening_level},
        {"contrast", {c.x1, c.x2}},
        {"covariate_profile", c.covariate_profile ? json(*c.covariate_profile) : json(nullptr)},
        {"lambda", c.lambda ? json(*c.lambda) : json(nullptr)},
        {"folds", c.folds},
        {"intercept", c.intercept},
        {"naive_outcome", to_string(c.naive_outcome)},
        {"seed", c.seed},
        {"threads", c.threads},
    };
    return out;
}

GridConfig grid_from_json(const json& object) {
    GridConfig grid;
    ObjectReader in(object, "");
    const ScenarioConfig defaults;
    const auto ns = sizes(in, "n", defaults.subjects);
    const auto cs = sizes(in, "c", defaults.cells);
    const auto gs = sizes(in, "g", defaults.genes);
    ScenarioConfig body;
    read_scenario_body(in, body);

    if (const json* methods = in.get("methods")) {
        if (!methods->is_array() || methods->empty()) {
            throw InputError("methods", "expected a non-empty array of method names");
        }
        grid.methods.clear();
        for (const auto& m : *methods) {
            if (!m.is_string()) {
                throw InputError("methods", "expected method names");
            }
            grid.methods.push_back(method_from_string(m.get<std::string>()));
        }
    }
    if (const json* analysis = in.get("analysis")) {
        grid.analysis = analysis_from_json(*analysis);
    }
    if (const json* thresholds = in.get("thresholds")) {
        if (!thresholds->is_array()) {
            throw InputError("thresholds", "expected an array");
        }
        for (std::size_t k = 0; k < thresholds->size(); ++k) {
            ObjectReader t((*thresholds)[k], "thresholds[" + std::to_string(k) + "]");
            Threshold threshold;
            const std::string method = optional_string(t, "method");
            threshold.method = method_from_string(method.empty() ? "medzisc" : method);
            threshold.metric = optional_string(t, "metric");
            if (threshold.metric.empty()) {
                throw InputError(t.field("metric"), "is required");
            }
            if (auto label = optional_string(t, "label"); !label.empty()) {
                threshold.label = label;
            }
            if (const json* v = t.get("min")) threshold.min = ObjectReader::number(*v, t.field("min"));
            if (const json* v = t.get("max")) threshold.max = ObjectReader::number(*v, t.field("max"));
            t.finish();
            BenchmarkRow probe;
            metric_value(probe, threshold.metric);  // rejects unknown metrics early
            grid.thresholds.push_back(std::move(threshold));
        }
    }
    in.finish();

    for (auto n : ns) {
        for (auto c : cs) {
            for (auto g : gs) {
                BenchmarkCell cell;
                cell.scenario = body;
                cell.scenario.subjects = n;
                cell.scenario.cells = c;
                cell.scenario.genes = g;
                cell.scenario.validate();
                cell.label = "n" + std::to_string(n) + "_c" + std::to_string(c) + "_g" + std::to_string(g);
                grid.cells.push_back(std::move(cell));
            }
        }
    }
    return grid;
}

json to_json(const GridConfig& grid) {
    json cells = json::array();
    for (const auto& cell : grid.cells) {
        cells.push_back({{"label", cell.label}, {"scenario", to_json(cell.scenario)}});
    }
    json methods = json::array();
    for (auto m : grid.methods) {
        methods.push_back(to_string(m));
    }
    json thresholds = json::array();
    for (const auto& t : grid.thresholds) {
        thresholds.push_back({{"method", to_string(t.method)},
                              {"metric", t.metric},
                              {"label", t.label ? json(*t.label) : json(nullptr)},
                              {"min", t.min ? json(*t.min) : json(nullptr)},
                              {"max", t.max ? json(*t.max) : json(nullptr)}});
    }
    return {{"cells", cells}, {"methods", methods}, {"analysis", to_json(grid.analysis)}, {"thresholds", thresholds}};
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError(path.string(), "cannot open file");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path.string(), std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace medzisc
