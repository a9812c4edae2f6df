#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "smapy/engine.hpp"

namespace smapy {

inline constexpr int kModelFormatVersion = 1;

struct Provenance {
    std::uint64_t seed = 0;
    std::string dataset_digest;
    std::uint64_t cycles = 0;
};

/// A deserialized model file: everything needed to run exploitation (and to
/// keep exploring, if desired).
struct LoadedModel {
    SystemState state;
    std::vector<std::string> feature_names;
    std::string label_name;
    std::vector<std::string> classes;
    Provenance provenance;
};

namespace detail {

inline nlohmann::json learner_to_json(const LearnerConfig& c) {
    nlohmann::json j;
    j["kind"] = to_string(c.kind);
    if (c.alpha_reg) j["alpha_reg"] = *c.alpha_reg;
    if (c.penalty) j["penalty"] = to_string(*c.penalty);
    if (c.l1_ratio) j["l1_ratio"] = *c.l1_ratio;
    if (c.eta0) j["eta0"] = *c.eta0;
    if (c.aggressiveness) j["C"] = *c.aggressiveness;
    return j;
}

inline LearnerConfig learner_from_json(const nlohmann::json& j) {
    LearnerConfig c;
    c.kind = learner_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("alpha_reg")) c.alpha_reg = j["alpha_reg"].get<double>();
    if (j.contains("penalty")) c.penalty = penalty_from_string(j["penalty"].get<std::string>());
    if (j.contains("l1_ratio")) c.l1_ratio = j["l1_ratio"].get<double>();
    if (j.contains("eta0")) c.eta0 = j["eta0"].get<double>();
    if (j.contains("C")) c.aggressiveness = j["C"].get<double>();
    c.validate();
    return c;
}

inline nlohmann::json params_to_json(const SystemParams& p) {
    nlohmann::json j;
    j["R"] = p.R;
    j["O"] = p.O ? nlohmann::json(*p.O) : nlohmann::json(nullptr);
    j["E"] = p.E;
    j["N_c"] = to_string(p.score_norm);
    j["alpha"] = p.alpha;
    j["F_plus"] = p.F_plus;
    j["F_minus"] = p.F_minus;
    return j;
}

inline SystemParams params_from_json(const nlohmann::json& j) {
    SystemParams p;
    p.R = j.at("R").get<double>();
    if (!j.at("O").is_null()) p.O = j["O"].get<double>();
    p.E = j.at("E").get<bool>();
    p.score_norm = score_norm_from_string(j.at("N_c").get<std::string>());
    p.alpha = j.at("alpha").get<double>();
    p.F_plus = j.at("F_plus").get<double>();
    p.F_minus = j.at("F_minus").get<double>();
    p.validate();
    return p;
}

}  // namespace detail

inline nlohmann::json model_to_json(const SystemState& s,
                                    const std::vector<std::string>& feature_names,
                                    const std::string& label_name, const Provenance& prov) {
    nlohmann::json j;
    j["format"] = "smapy-model";
    j["version"] = kModelFormatVersion;
    j["feature_names"] = feature_names;
    j["label_name"] = label_name;
    j["normalization"] = {{"min", s.percept.mins},
                          {"max", s.percept.maxs},
                          {"observations", s.percept.observations}};
    j["params"] = detail::params_to_json(s.params);
    j["learner"] = detail::learner_to_json(s.learner_template);

    std::vector<std::string> classes;
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& a : s.agents) {
        nlohmann::json ja;
        ja["id"] = a.id;
        ja["lower"] = a.zone.lower;
        ja["upper"] = a.zone.upper;
        ja["confidence"] = a.confidence;
        ja["correct"] = a.correct_count;
        ja["wrong"] = a.wrong_count;
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& cc : a.model.export_coefficients()) {
            rows.push_back({{"label", cc.label}, {"coef", cc.coef}});
            classes.push_back(cc.label);
        }
        ja["model"] = {{"classes", rows}, {"updates", a.model.update_count()}};
        agents.push_back(std::move(ja));
    }
    j["agents"] = std::move(agents);

    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    j["classes"] = classes;

    j["next_agent_id"] = s.next_agent_id;
    j["provenance"] = {{"seed", prov.seed},
                       {"dataset_digest", prov.dataset_digest},
                       {"cycles", prov.cycles}};
    return j;
}

inline LoadedModel model_from_json(const nlohmann::json& j) {
    if (!j.contains("format") || j["format"] != "smapy-model")
        throw std::runtime_error("model file: not a smapy-model document");
    if (!j.contains("version"))
        throw std::runtime_error("model file: missing version field");
    if (j["version"].get<int>() != kModelFormatVersion)
        throw std::runtime_error("model file: unsupported version " + j["version"].dump());

    LoadedModel out;
    out.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    out.label_name = j.at("label_name").get<std::string>();
    out.classes = j.at("classes").get<std::vector<std::string>>();

    SystemParams params = detail::params_from_json(j.at("params"));
    LearnerConfig learner = detail::learner_from_json(j.at("learner"));
    const std::size_t dim = out.feature_names.size();
    out.state = SystemState(params, learner, dim);

    const auto& norm = j.at("normalization");
    out.state.percept.mins = norm.at("min").get<std::vector<double>>();
    out.state.percept.maxs = norm.at("max").get<std::vector<double>>();
    out.state.percept.observations = norm.at("observations").get<std::uint64_t>();
    if (out.state.percept.mins.size() != dim || out.state.percept.maxs.size() != dim)
        throw std::runtime_error("model file: normalization arrays do not match feature count");

    for (const auto& ja : j.at("agents")) {
        ContextAgent a;
        a.id = ja.at("id").get<std::uint64_t>();
        a.zone = Hypercube(ja.at("lower").get<std::vector<double>>(),
                           ja.at("upper").get<std::vector<double>>());
        if (a.zone.dim() != dim)
            throw std::runtime_error("model file: agent zone dimension mismatch");
        a.confidence = ja.at("confidence").get<double>();
        a.correct_count = ja.at("correct").get<std::uint64_t>();
        a.wrong_count = ja.at("wrong").get<std::uint64_t>();
        a.model = OnlineLinearModel(learner, dim);
        std::vector<ClassCoefficients> coefs;
        for (const auto& row : ja.at("model").at("classes"))
            coefs.push_back({row.at("label").get<std::string>(),
                             row.at("coef").get<std::vector<double>>()});
        a.model.import_coefficients(coefs);
        a.model.set_update_count(ja.at("model").at("updates").get<std::uint64_t>());
        out.state.agents.push_back(std::move(a));
    }

    out.state.next_agent_id = j.at("next_agent_id").get<std::uint64_t>();
    const auto& prov = j.at("provenance");
    out.provenance.seed = prov.at("seed").get<std::uint64_t>();
    out.provenance.dataset_digest = prov.at("dataset_digest").get<std::string>();
    out.provenance.cycles = prov.at("cycles").get<std::uint64_t>();
    out.state.cycle = out.provenance.cycles;
    return out;
}

inline std::string model_to_text(const SystemState& s, const std::vector<std::string>& feature_names,
                                 const std::string& label_name, const Provenance& prov) {
    return model_to_json(s, feature_names, label_name, prov).dump(2) + "\n";
}

inline void save_model_file(const std::string& path, const SystemState& s,
                            const std::vector<std::string>& feature_names,
                            const std::string& label_name, const Provenance& prov) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << model_to_text(s, feature_names, label_name, prov);
}

inline LoadedModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("model file: invalid JSON in " + path + ": " + e.what());
    }
    return model_from_json(j);
}

/// Canonical serialization of a state, used for purity / determinism checks.
inline std::string state_fingerprint(const SystemState& s) {
    return model_to_json(s, std::vector<std::string>(s.dim(), "f"), "y", Provenance{}).dump();
}

}  // namespace smapy
