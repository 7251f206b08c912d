#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsi/body/body_model.hpp"
#include "hsi/scene/sdf.hpp"

namespace hsi {

using VertexSet = std::vector<Vec3>;

// Mean over bodies of the fraction of vertices with SDF > 0.
double non_collision(const std::vector<VertexSet>& bodies, const SdfGrid& sdf);
// Fraction of bodies with at least one vertex at SDF <= 0.
double contact(const std::vector<VertexSet>& bodies, const SdfGrid& sdf);

struct Diversity {
    double entropy = 0.0;       // bits
    double cluster_size = 0.0;  // mean distance to the assigned center
    std::vector<int> labels;
};

// K-means over per-dimension standardized [theta; phi]. Centers start from a
// seeded random sample followed by greedy farthest-point picks; 100 Lloyd
// iterations. Throws ValidationError with fewer samples than clusters.
Diversity diversity(const std::vector<BodyParams>& params, int n_clusters = 20, std::uint64_t seed = 0,
                    int iterations = 100);

struct BodyRow {
    int index = 0;
    double non_collision = 0.0;
    bool contact = false;
    double min_sdf = 0.0;
};

struct EvalReport {
    double non_collision = 0.0;
    double contact = 0.0;
    std::optional<double> entropy;       // absent when there are fewer bodies than clusters
    std::optional<double> cluster_size;
    std::optional<double> clip_score;    // filled by the external adapter
    int n_clusters = 20;
    std::vector<BodyRow> bodies;
};

EvalReport evaluate(const BodyModel& model, const std::vector<BodyParams>& params, const SdfGrid& sdf,
                    int n_clusters = 20, std::uint64_t seed = 0);

// {"format": "hsi.eval_report", "version": 1, ...}
void save_report_json(const EvalReport& r, const std::string& path);
EvalReport load_report_json(const std::string& path);
// Per-body rows, then a "mean" row carrying the summary metrics.
void save_report_csv(const EvalReport& r, const std::string& path);

}  // namespace hsi
