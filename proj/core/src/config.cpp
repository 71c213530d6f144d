#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cvbandit/errors.hpp"
#include "cvbandit/harness.hpp"

namespace cvbandit {

namespace {

using nlohmann::json;

std::string child(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string element(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) throw ConfigError(child(path, key), "unknown field");
    }
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
}

double number_at(const json& obj, std::string_view key, const std::string& path,
                 std::optional<double> fallback = std::nullopt) {
    const std::string key_s(key);
    if (!obj.contains(key_s)) {
        if (fallback) return *fallback;
        throw ConfigError(child(path, key), "required field is missing");
    }
    const json& v = obj.at(key_s);
    if (!v.is_number()) throw ConfigError(child(path, key), "expected a number");
    return v.get<double>();
}

std::uint64_t unsigned_at(const json& obj, std::string_view key, const std::string& path,
                          std::uint64_t fallback) {
    const std::string key_s(key);
    if (!obj.contains(key_s)) return fallback;
    const json& v = obj.at(key_s);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError(child(path, key), "expected a non-negative integer");
}

std::string string_at(const json& obj, std::string_view key, const std::string& path,
                      std::optional<std::string> fallback = std::nullopt) {
    const std::string key_s(key);
    if (!obj.contains(key_s)) {
        if (fallback) return *fallback;
        throw ConfigError(child(path, key), "required field is missing");
    }
    const json& v = obj.at(key_s);
    if (!v.is_string()) throw ConfigError(child(path, key), "expected a string");
    return v.get<std::string>();
}

bool bool_at(const json& obj, std::string_view key, const std::string& path, bool fallback) {
    const std::string key_s(key);
    if (!obj.contains(key_s)) return fallback;
    const json& v = obj.at(key_s);
    if (!v.is_boolean()) throw ConfigError(child(path, key), "expected true or false");
    return v.get<bool>();
}

Distribution parse_distribution(const json& j, const std::string& path) {
    if (j.is_number()) return Distribution::constant(j.get<double>());
    require_object(j, path);
    const std::string type = string_at(j, "type", path);
    Distribution d;
    if (type == "constant") {
        reject_unknown_keys(j, path, {"type", "value"});
        d = Distribution::constant(number_at(j, "value", path));
    } else if (type == "normal") {
        reject_unknown_keys(j, path, {"type", "mean", "std"});
        d = Distribution::normal(number_at(j, "mean", path), number_at(j, "std", path));
    } else if (type == "lognormal") {
        reject_unknown_keys(j, path, {"type", "mu", "sigma"});
        d = Distribution::lognormal(number_at(j, "mu", path), number_at(j, "sigma", path));
    } else if (type == "db_normal") {
        reject_unknown_keys(j, path, {"type", "mean_db", "std_db"});
        d = Distribution::db_normal(number_at(j, "mean_db", path), number_at(j, "std_db", path, 0.0));
    } else if (type == "shifted_beta") {
        reject_unknown_keys(j, path, {"type", "a", "b", "lo", "hi"});
        d = Distribution::shifted_beta(number_at(j, "a", path), number_at(j, "b", path),
                                       number_at(j, "lo", path, 0.0), number_at(j, "hi", path, 1.0));
    } else {
        throw ConfigError(child(path, "type"), "unknown distribution type '" + type + "'");
    }
    try {
        d.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(path, e.what());
    }
    return d;
}

ArmModel parse_arm(const json& j, const std::string& path) {
    require_object(j, path);
    const std::string type = string_at(j, "type", path);
    ArmModel arm;
    if (type == "gaussian") {
        reject_unknown_keys(j, path, {"type", "mu", "sigma", "omega", "sigma_w", "rho"});
        BivariateGaussianSpec spec;
        spec.mean_x = number_at(j, "mu", path);
        spec.std_x = number_at(j, "sigma", path, 1.0);
        spec.mean_w = number_at(j, "omega", path, 0.0);
        spec.std_w = number_at(j, "sigma_w", path, 1.0);
        spec.rho = number_at(j, "rho", path, 0.0);
        if (!(spec.rho >= -1.0 && spec.rho <= 1.0))
            throw ConfigError(child(path, "rho"), "rho must lie in [-1, 1]");
        if (spec.std_x < 0.0) throw ConfigError(child(path, "sigma"), "sigma must be >= 0");
        if (spec.std_w < 0.0) throw ConfigError(child(path, "sigma_w"), "sigma_w must be >= 0");
        arm = GaussianArm{spec};
    } else if (type == "sinr") {
        reject_unknown_keys(j, path,
                            {"type", "si_kind", "power", "gain", "noise", "hidden_interference",
                             "measured_interference", "scale_interference_by_gain", "si_mean"});
        SinrArm s;
        const std::string kind = string_at(j, "si_kind", path, std::string("tx_interference"));
        if (kind == "tx_interference") s.si_kind = SideInfoKind::tx_interference;
        else if (kind == "channel_gain") s.si_kind = SideInfoKind::channel_gain;
        else throw ConfigError(child(path, "si_kind"), "expected tx_interference or channel_gain");
        s.power = number_at(j, "power", path, 1.0);
        s.noise = number_at(j, "noise", path, 1.0);
        if (!j.contains("gain")) throw ConfigError(child(path, "gain"), "required field is missing");
        s.gain = parse_distribution(j.at("gain"), child(path, "gain"));
        if (j.contains("hidden_interference"))
            s.hidden_interference =
                parse_distribution(j.at("hidden_interference"), child(path, "hidden_interference"));
        if (j.contains("measured_interference"))
            s.measured_interference = parse_distribution(j.at("measured_interference"),
                                                         child(path, "measured_interference"));
        else if (s.si_kind == SideInfoKind::tx_interference)
            throw ConfigError(child(path, "measured_interference"), "required for tx_interference arms");
        s.scale_interference_by_gain = bool_at(j, "scale_interference_by_gain", path, true);
        if (j.contains("si_mean")) s.si_mean = number_at(j, "si_mean", path);
        arm = s;
    } else if (type == "general") {
        reject_unknown_keys(j, path, {"type", "reward", "side_info", "copula_rho"});
        GeneralArm g;
        if (!j.contains("reward")) throw ConfigError(child(path, "reward"), "required field is missing");
        if (!j.contains("side_info"))
            throw ConfigError(child(path, "side_info"), "required field is missing");
        g.reward = parse_distribution(j.at("reward"), child(path, "reward"));
        g.side_info = parse_distribution(j.at("side_info"), child(path, "side_info"));
        g.copula_rho = number_at(j, "copula_rho", path, 0.0);
        arm = g;
    } else {
        throw ConfigError(child(path, "type"), "unknown arm type '" + type + "' (gaussian, sinr, general)");
    }
    try {
        validate_arm(arm);
    } catch (const std::domain_error& e) {
        throw ConfigError(path, e.what());
    }
    return arm;
}

std::vector<ArmModel> parse_suite(const json& j, const std::string& path) {
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "gaussian") return suites::gaussian(0.8);
        if (name == "sinr") return suites::sinr();
        throw ConfigError(path, "unknown suite '" + name + "' (gaussian, sinr)");
    }
    require_object(j, path);
    reject_unknown_keys(j, path, {"name", "rho", "mean_scale"});
    const std::string name = string_at(j, "name", path);
    if (name == "gaussian") {
        const double rho = number_at(j, "rho", path, 0.8);
        if (!(rho >= -1.0 && rho <= 1.0)) throw ConfigError(child(path, "rho"), "rho must lie in [-1, 1]");
        return suites::gaussian(rho, number_at(j, "mean_scale", path, 0.1));
    }
    if (name == "sinr") return suites::sinr();
    throw ConfigError(child(path, "name"), "unknown suite '" + name + "' (gaussian, sinr)");
}

PolicySpec parse_policy(const json& j, const std::string& path) {
    if (j.is_string()) {
        auto kind = parse_policy_kind(j.get<std::string>());
        if (!kind) throw ConfigError(path, "unknown policy kind '" + j.get<std::string>() + "'");
        PolicySpec spec;
        spec.kind = *kind;
        return spec;
    }
    require_object(j, path);
    reject_unknown_keys(j, path,
                        {"kind", "alpha", "zeta", "c", "init_pulls", "label", "beta_centering",
                         "variance_formula", "use_side_info"});
    PolicySpec p;
    const std::string kind = string_at(j, "kind", path);
    auto parsed = parse_policy_kind(kind);
    if (!parsed)
        throw ConfigError(child(path, "kind"),
                          "unknown policy kind '" + kind + "' (UCBwSI, UCBwSI-Split, UCB1-Normal, UCB-V)");
    p.kind = *parsed;
    p.alpha = number_at(j, "alpha", path, 2.0);
    p.zeta = number_at(j, "zeta", path, 1.2);
    p.c = number_at(j, "c", path, 1.0);
    const double init = number_at(j, "init_pulls", path, 4.0);
    if (init != static_cast<int>(init) || init < 1)
        throw ConfigError(child(path, "init_pulls"), "init_pulls must be a positive integer");
    p.init_pulls = static_cast<int>(init);
    p.label = string_at(j, "label", path, std::string());

    const std::string centering = string_at(j, "beta_centering", path, std::string("sample_mean"));
    if (centering == "sample_mean") p.estimator.centering = BetaCentering::sample_mean;
    else if (centering == "known_mean") p.estimator.centering = BetaCentering::known_mean;
    else throw ConfigError(child(path, "beta_centering"), "expected sample_mean or known_mean");

    const std::string formula = string_at(j, "variance_formula", path, std::string("regression"));
    if (formula == "regression") p.estimator.variance = VarianceFormula::regression;
    else if (formula == "inverse_correction") p.estimator.variance = VarianceFormula::inverse_correction;
    else throw ConfigError(child(path, "variance_formula"), "expected regression or inverse_correction");

    p.estimator.use_side_info = bool_at(j, "use_side_info", path, true);
    return p;
}

OmegaMode parse_omega_mode(const json& j, const std::string& path) {
    OmegaMode mode;
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "exact") return mode;
        if (s == "calibrated") {
            mode.kind = OmegaMode::Kind::calibrated;
            return mode;
        }
        throw ConfigError(path, "expected \"exact\", \"calibrated\" or {\"calibrated\": n}");
    }
    require_object(j, path);
    reject_unknown_keys(j, path, {"calibrated"});
    mode.kind = OmegaMode::Kind::calibrated;
    mode.samples = unsigned_at(j, "calibrated", path, mode.samples);
    return mode;
}

} // namespace

void ExperimentConfig::validate() const {
    if (arms.size() < 2) throw ConfigError("arms", "K >= 2 required");
    if (runs < 1) throw ConfigError("runs", "runs must be >= 1");
    if (policies.empty()) throw ConfigError("policies", "at least one policy required");
    if (workers < 1) throw ConfigError("workers", "workers must be >= 1");
    if (!(bound_c > 0.0)) throw ConfigError("bound.C", "C must be positive");
    if (omega_mode.kind == OmegaMode::Kind::calibrated && omega_mode.samples < 1)
        throw ConfigError("omega_mode", "calibration needs at least one sample");
    const auto k = static_cast<std::int64_t>(arms.size());
    for (std::size_t i = 0; i < policies.size(); ++i) {
        const auto& p = policies[i];
        const std::string path = element("policies", i);
        if (!(p.alpha > 1.0)) throw ConfigError(child(path, "alpha"), "alpha must exceed 1");
        if (!(p.zeta > 0.0)) throw ConfigError(child(path, "zeta"), "zeta must be positive");
        if (!(p.c > 0.0)) throw ConfigError(child(path, "c"), "c must be positive");
        const int min_init =
            (p.kind == PolicyKind::ucbwsi || p.kind == PolicyKind::ucbwsi_split) ? 4 : 2;
        if (p.init_pulls < min_init)
            throw ConfigError(child(path, "init_pulls"),
                              "init_pulls must be >= " + std::to_string(min_init) + " for " +
                                  p.display_name());
        if (horizon < k * p.init_pulls + 1)
            throw ConfigError("horizon", "horizon must be at least K*init_pulls + 1 = " +
                                             std::to_string(k * p.init_pulls + 1));
        for (std::size_t j = 0; j < i; ++j)
            if (policies[j].display_name() == p.display_name())
                throw ConfigError(child(path, "label"),
                                  "duplicate policy name '" + p.display_name() + "'; set a label");
    }
    for (std::size_t i = 0; i < arms.size(); ++i) {
        try {
            validate_arm(arms[i]);
        } catch (const std::domain_error& e) {
            throw ConfigError(element("arms", i), e.what());
        }
    }
}

ExperimentConfig parse_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    require_object(root, "");
    reject_unknown_keys(root, "",
                        {"horizon", "runs", "base_seed", "policies", "arms", "suite", "omega_mode",
                         "output_dir", "workers", "truth_samples", "bound"});

    ExperimentConfig cfg;
    const double horizon = number_at(root, "horizon", "", 5000.0);
    if (horizon != static_cast<double>(static_cast<std::int64_t>(horizon)) || horizon < 1)
        throw ConfigError("horizon", "horizon must be a positive integer");
    cfg.horizon = static_cast<std::int64_t>(horizon);
    cfg.runs = unsigned_at(root, "runs", "", cfg.runs);
    cfg.base_seed = unsigned_at(root, "base_seed", "", cfg.base_seed);
    cfg.workers = unsigned_at(root, "workers", "", cfg.workers);
    cfg.truth_samples = unsigned_at(root, "truth_samples", "", cfg.truth_samples);
    if (root.contains("output_dir")) cfg.output_dir = string_at(root, "output_dir", "");

    if (root.contains("arms") && root.contains("suite"))
        throw ConfigError("suite", "give either arms or suite, not both");
    if (root.contains("arms")) {
        const json& arms = root.at("arms");
        if (!arms.is_array()) throw ConfigError("arms", "expected an array of arm specs");
        for (std::size_t i = 0; i < arms.size(); ++i)
            cfg.arms.push_back(parse_arm(arms[i], element("arms", i)));
    } else if (root.contains("suite")) {
        cfg.arms = parse_suite(root.at("suite"), "suite");
    } else {
        throw ConfigError("arms", "required field is missing");
    }

    if (root.contains("policies")) {
        const json& policies = root.at("policies");
        if (!policies.is_array()) throw ConfigError("policies", "expected an array of policy specs");
        for (std::size_t i = 0; i < policies.size(); ++i)
            cfg.policies.push_back(parse_policy(policies[i], element("policies", i)));
    } else {
        for (auto kind : {PolicyKind::ucbwsi, PolicyKind::ucbwsi_split, PolicyKind::ucb1_normal,
                          PolicyKind::ucbv}) {
            PolicySpec spec;
            spec.kind = kind;
            cfg.policies.push_back(spec);
        }
    }

    if (root.contains("omega_mode")) cfg.omega_mode = parse_omega_mode(root.at("omega_mode"), "omega_mode");
    if (root.contains("bound")) {
        const json& bound = root.at("bound");
        require_object(bound, "bound");
        reject_unknown_keys(bound, "bound", {"C"});
        cfg.bound_c = number_at(bound, "C", "bound", 1.5);
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config(buffer.str());
    } catch (const ConfigError& e) {
        throw ConfigError(e.path(), e.message() + " (in " + path.string() + ")");
    }
}

} // namespace cvbandit
