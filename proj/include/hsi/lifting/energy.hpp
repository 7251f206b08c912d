#pragma once

#include <string>
#include <vector>

#include "hsi/body/body_model.hpp"
#include "hsi/hypotheses/hypothesis.hpp"
#include "hsi/scene/camera.hpp"
#include "hsi/scene/sdf.hpp"

namespace hsi {

struct EnergyWeights {
    double lambda_pf = 1.0;
    double lambda_vs = 0.5;
    double lambda_bp = 0.02;
    double lambda_bs = 0.01;
    double lambda_sc = 10.0;
    double lambda_sp = 1.0;
    double sigma_gm = 100.0;       // pixels at 512 px image width; scaled with each view's width
    double tau = 3.0;              // minimum view budget
    double eps = 1e-6;             // guard on the weight sum
    double sc_temperature = 0.01;  // smooth-min temperature for the contact gradient (m)

    void validate() const;
};

// Per-view consistency weights w = sigmoid(logit).
struct ViewWeights {
    std::vector<double> logits;

    static ViewWeights constant(size_t k, double w);
    std::vector<double> weights() const;
    double sum() const;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Cameras and body-mapped observations aligned by index (equal view ids).
struct LiftProblem {
    const BodyModel* model = nullptr;
    const SdfGrid* sdf = nullptr;  // optional; E_SC is 0 without a scene
    std::vector<Camera> cameras;
    std::vector<ViewObservation> views;
    EnergyWeights weights;

    void validate() const;
};

// Pairs hypotheses with cameras by view_id. Throws ValidationError when a
// hypothesis has no camera or no view carries a usable (confidence > 0) joint.
LiftProblem make_problem(const BodyModel& model, const SdfGrid* sdf, const std::vector<Camera>& cameras,
                         const std::vector<PoseHypothesis>& hyps, const EnergyWeights& weights);

template <class T>
T geman_mcclure_sq(const T& e2, double sigma) {
    const double s2 = sigma * sigma;
    return s2 * e2 / (s2 + e2);
}

inline double geman_mcclure(double e, double sigma) { return geman_mcclure_sq(e * e, sigma); }

double energy_pf(const LiftProblem& problem, const BodyParams& params, const ViewWeights& vw);
double energy_vs(const ViewWeights& vw, double tau);
double energy_bp(const BodyModel& model, const Eigen::Matrix<double, kLatentDim, 1>& theta);
double energy_bs(const Eigen::Matrix<double, kShapeDim, 1>& phi);

struct ContactEnergy {
    double value = 0.0;      // hard min (branch 1) or penetration sum (branch 2)
    int branch = 1;
    double min_sdf = 0.0;
};
ContactEnergy energy_sc(const std::vector<Vec3>& vertices, const SdfGrid& sdf);

// The smooth-min surrogate whose gradient drives branch 1.
double energy_sc_surrogate(const std::vector<Vec3>& vertices, const SdfGrid& sdf, double temperature);

struct EnergyTerms {
    double pf = 0, vs = 0, bp = 0, bs = 0, sc = 0, sp = 0;
    double total = 0;
    int sc_branch = 1;
    double sc_min = 0;
    size_t collisions = 0;
};

EnergyTerms total_energy(const LiftProblem& problem, const BodyParams& params, const ViewWeights& vw);

// Energy plus gradients with respect to the 51 body parameters and the view
// logits. Body gradients come from forward-mode dual numbers; logit gradients
// are closed-form. Branch 1 of E_SC contributes the smooth-min gradient.
struct Evaluation {
    EnergyTerms terms;
    Eigen::Matrix<double, kNumParams, 1> grad = Eigen::Matrix<double, kNumParams, 1>::Zero();
    std::vector<double> grad_logits;
    std::string nonfinite_term;  // first term whose value or gradient is not finite
};

Evaluation evaluate(const LiftProblem& problem, const BodyParams& params, const ViewWeights& vw);

}  // namespace hsi
