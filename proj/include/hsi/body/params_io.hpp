#pragma once

#include <map>
#include <string>
#include <vector>

#include "hsi/body/body_model.hpp"

namespace hsi {

// Structured text document holding fitted parameters, optionally with the
// per-view weights and the energy breakdown of the final state.
struct ParamsDocument {
    BodyParams params;
    std::vector<int> view_ids;
    std::vector<double> view_weights;
    std::map<std::string, double> energy;
};

void save_params(const ParamsDocument& doc, const std::string& path);
ParamsDocument load_params(const std::string& path);

}  // namespace hsi
