#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hsi/common/log.hpp"
#include "hsi/lifting/energy.hpp"

namespace hsi {

struct OptimizerConfig {
    int steps = 1600;
    double lr_trans = 1e-2;
    double lr_rot = 1e-2;
    double lr_theta = 1e-2;
    double lr_phi = 1e-3;
    double lr_logits = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 0.0;        // decoupled, applied to theta and phi only
    double lr_final_fraction = 0.01;  // cosine decay to this fraction of each rate
    int trace_every = 100;
    double init_view_weight = 0.9;
    std::uint64_t seed = 0;           // recorded; the optimizer itself draws no random numbers

    void validate() const;
};

struct TraceEntry {
    int step = 0;
    EnergyTerms terms;
};

struct LiftResult {
    BodyParams params;
    ViewWeights view_weights;
    std::vector<TraceEntry> trace;  // every trace_every steps and at the end
    EnergyTerms final_terms;
    Warnings warnings;
};

// AdamW over (rot6d, trans, theta, phi, view logits) with per-group step
// sizes. Throws OptimizationError naming the term when the energy or its
// gradient stops being finite.
LiftResult optimize(const LiftProblem& problem, const BodyParams& init, const OptimizerConfig& cfg,
                    const ViewWeights* init_weights = nullptr);

// trans = p, identity rotation, zero pose and shape.
BodyParams default_init(const Vec3& p);

}  // namespace hsi
