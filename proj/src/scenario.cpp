#include "sctree/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sctree {

std::int64_t value_key(double w, int decimals) {
    const double scale = std::pow(10.0, decimals);
    const double scaled = w * scale;
    if (!std::isfinite(scaled) || std::abs(scaled) > 9.0e18)
        throw std::runtime_error("disturbance value out of canonical key range");
    return std::llround(scaled);
}

std::vector<std::int64_t> prefix_key(const DisturbanceSequence& seq, int step, int decimals) {
    std::vector<std::int64_t> key(static_cast<std::size_t>(step) + 1);
    for (int i = 0; i <= step; ++i)
        key[static_cast<std::size_t>(i)] = value_key(seq.values[static_cast<std::size_t>(i)], decimals);
    return key;
}

void validate_scenarios(const ScenarioSet& set) {
    if (set.horizon <= 0) throw std::runtime_error("scenario set: horizon must be positive");
    if (set.sequences.empty()) throw std::runtime_error("scenario set: no sequences");
    double total = 0.0;
    for (std::size_t i = 0; i < set.sequences.size(); ++i) {
        const auto& s = set.sequences[i];
        if (static_cast<int>(s.values.size()) != set.horizon) {
            std::ostringstream msg;
            msg << "scenario set: sequence " << i << " has length " << s.values.size()
                << ", expected " << set.horizon;
            throw std::runtime_error(msg.str());
        }
        if (!(s.probability > 0.0)) {
            std::ostringstream msg;
            msg << "scenario set: sequence " << i << " has nonpositive probability";
            throw std::runtime_error(msg.str());
        }
        for (double w : s.values)
            if (!std::isfinite(w))
                throw std::runtime_error("scenario set: non-finite disturbance value");
        total += s.probability;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "scenario set: probabilities sum to " << total << ", expected 1";
        throw std::runtime_error(msg.str());
    }
}

ScenarioSet merge_duplicates(const ScenarioSet& set, int decimals) {
    ScenarioSet out;
    out.horizon = set.horizon;
    std::map<std::vector<std::int64_t>, std::size_t> seen;
    for (const auto& s : set.sequences) {
        std::vector<std::int64_t> key(s.values.size());
        for (std::size_t i = 0; i < s.values.size(); ++i) key[i] = value_key(s.values[i], decimals);
        auto it = seen.find(key);
        if (it == seen.end()) {
            seen.emplace(std::move(key), out.sequences.size());
            out.sequences.push_back(s);
        } else {
            out.sequences[it->second].probability += s.probability;
        }
    }
    return out;
}

namespace {

ScenarioSet from_json(const nlohmann::json& j, int decimals) {
    if (!j.is_object() || !j.contains("horizon") || !j.contains("sequences"))
        throw std::runtime_error("scenario file: expected object with 'horizon' and 'sequences'");
    ScenarioSet set;
    set.horizon = j.at("horizon").get<int>();
    const auto& seqs = j.at("sequences");
    if (!seqs.is_array() || seqs.empty())
        throw std::runtime_error("scenario file: 'sequences' must be a nonempty array");

    double total = 0.0;
    for (const auto& js : seqs) {
        DisturbanceSequence s;
        s.values = js.at("values").get<std::vector<double>>();
        s.probability = js.at("probability").get<double>();
        if (static_cast<int>(s.values.size()) != set.horizon)
            throw std::runtime_error("scenario file: sequence length does not match horizon");
        if (!(s.probability > 0.0))
            throw std::runtime_error("scenario file: sequence probability must be positive");
        total += s.probability;
        set.sequences.push_back(std::move(s));
    }
    if (std::abs(total - 1.0) > 0.01) {
        std::ostringstream msg;
        msg << "scenario file: probabilities sum to " << total
            << ", more than 1% away from 1";
        throw std::runtime_error(msg.str());
    }
    for (auto& s : set.sequences) s.probability /= total;

    set = merge_duplicates(set, decimals);
    validate_scenarios(set);
    return set;
}

}  // namespace

ScenarioSet parse_scenarios(const std::string& json_text, int decimals) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("scenario file: malformed JSON: ") + e.what());
    }
    return from_json(j, decimals);
}

ScenarioSet load_scenarios(const std::string& path, int decimals) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenarios(buf.str(), decimals);
}

std::string scenarios_to_json(const ScenarioSet& set) {
    nlohmann::json j;
    j["horizon"] = set.horizon;
    auto& arr = j["sequences"] = nlohmann::json::array();
    for (const auto& s : set.sequences) {
        nlohmann::json js;
        js["values"] = s.values;
        js["probability"] = s.probability;
        arr.push_back(std::move(js));
    }
    return j.dump(2);
}

void save_scenarios(const ScenarioSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file: " + path);
    out << scenarios_to_json(set) << '\n';
}

}  // namespace sctree
