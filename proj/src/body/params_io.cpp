#include <fstream>

#include "json.hpp"

#include "hsi/body/params_io.hpp"
#include "hsi/common/error.hpp"

namespace hsi {

using nlohmann::json;

namespace {

template <class V>
json to_array(const V& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

template <class V>
void from_array(const json& j, const char* key, V& out) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != static_cast<size_t>(out.size()))
        throw ValidationError(std::string("params file: '") + key + "' must be an array of " +
                              std::to_string(out.size()) + " numbers");
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (!j[key][i].is_number()) throw ValidationError(std::string("params file: non-numeric entry in ") + key);
        out[i] = j[key][i].get<double>();
    }
}

}  // namespace

void save_params(const ParamsDocument& doc, const std::string& path) {
    json j;
    j["format"] = "hsi.body_params";
    j["version"] = 1;
    j["rot6d"] = to_array(doc.params.rot6d);
    j["trans"] = to_array(doc.params.trans);
    j["theta"] = to_array(doc.params.theta);
    j["phi"] = to_array(doc.params.phi);
    if (!doc.view_weights.empty()) {
        j["view_ids"] = doc.view_ids;
        j["view_weights"] = doc.view_weights;
    }
    if (!doc.energy.empty()) j["energy"] = doc.energy;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write params file: " + path);
    out << j.dump(2) << "\n";
}

ParamsDocument load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open params file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("params file is not valid JSON: " + path + ": " + e.what());
    }
    if (j.value("format", "") != "hsi.body_params") throw ValidationError("not a body params file: " + path);
    if (j.value("version", 0) != 1) throw ValidationError("unsupported body params version: " + path);
    ParamsDocument doc;
    from_array(j, "rot6d", doc.params.rot6d);
    from_array(j, "trans", doc.params.trans);
    from_array(j, "theta", doc.params.theta);
    from_array(j, "phi", doc.params.phi);
    if (j.contains("view_weights")) {
        doc.view_weights = j["view_weights"].get<std::vector<double>>();
        doc.view_ids = j.value("view_ids", std::vector<int>{});
        if (doc.view_ids.size() != doc.view_weights.size())
            throw ValidationError("params file: view_ids and view_weights differ in length");
    }
    if (j.contains("energy")) doc.energy = j["energy"].get<std::map<std::string, double>>();
    return doc;
}

}  // namespace hsi
