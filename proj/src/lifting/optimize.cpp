#include <cmath>

#include <spdlog/spdlog.h>

#include "hsi/common/error.hpp"
#include "hsi/lifting/optimize.hpp"

namespace hsi {

void OptimizerConfig::validate() const {
    if (steps < 0) throw ValidationError("optimizer: steps must be >= 0");
    for (double lr : {lr_trans, lr_rot, lr_theta, lr_phi, lr_logits})
        if (!(lr >= 0.0)) throw ValidationError("optimizer: learning rates must be >= 0");
    if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw ValidationError("optimizer: betas must be in [0, 1)");
    if (!(adam_eps > 0)) throw ValidationError("optimizer: adam_eps must be positive");
    if (!(weight_decay >= 0)) throw ValidationError("optimizer: weight_decay must be >= 0");
    if (!(lr_final_fraction >= 0 && lr_final_fraction <= 1)) throw ValidationError("optimizer: lr_final_fraction in [0, 1]");
    if (trace_every < 1) throw ValidationError("optimizer: trace_every must be >= 1");
    if (!(init_view_weight > 0 && init_view_weight < 1)) throw ValidationError("optimizer: init_view_weight in (0, 1)");
}

BodyParams default_init(const Vec3& p) {
    BodyParams b;
    b.trans = p;
    return b;
}

namespace {

struct Adam {
    Eigen::VectorXd m, v;
    explicit Adam(Eigen::Index n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

void check_finite(const Evaluation& ev, int step) {
    if (!ev.nonfinite_term.empty())
        throw OptimizationError("non-finite energy at step " + std::to_string(step) + " in term " + ev.nonfinite_term);
    for (double g : ev.grad_logits)
        if (!std::isfinite(g))
            throw OptimizationError("non-finite energy at step " + std::to_string(step) + " in term E_PF/E_VS (view weights)");
}

}  // namespace

LiftResult optimize(const LiftProblem& problem, const BodyParams& init, const OptimizerConfig& cfg,
                    const ViewWeights* init_weights) {
    problem.validate();
    cfg.validate();
    if (!all_finite(init)) throw ValidationError("optimizer: initial parameters are not finite");
    const size_t k = problem.views.size();

    LiftResult res;
    Eigen::Matrix<double, kNumParams, 1> x = to_vector(init);
    ViewWeights vw = init_weights ? *init_weights : ViewWeights::constant(k, cfg.init_view_weight);
    if (vw.logits.size() != k) throw ValidationError("optimizer: initial view weights do not match the view count");
    Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(vw.logits.data(), static_cast<Eigen::Index>(k));

    Eigen::Matrix<double, kNumParams, 1> lr;
    lr.segment<6>(kRotOffset).setConstant(cfg.lr_rot);
    lr.segment<3>(kTransOffset).setConstant(cfg.lr_trans);
    lr.segment<kLatentDim>(kThetaOffset).setConstant(cfg.lr_theta);
    lr.segment<kShapeDim>(kPhiOffset).setConstant(cfg.lr_phi);
    Eigen::Matrix<double, kNumParams, 1> decay = Eigen::Matrix<double, kNumParams, 1>::Zero();
    decay.segment<kLatentDim>(kThetaOffset).setConstant(cfg.weight_decay);
    decay.segment<kShapeDim>(kPhiOffset).setConstant(cfg.weight_decay);

    Adam ab(kNumParams), al(static_cast<Eigen::Index>(k));
    bool warned_rot = false;

    for (int step = 0;; ++step) {
        const BodyParams cur = from_vector(x);
        bool degenerate = false;
        rot6d_to_matrix<double>(cur.rot6d, &degenerate);
        if (degenerate && !warned_rot) {
            res.warnings.add("rot6d became degenerate at step " + std::to_string(step) + "; using a perturbed frame");
            warned_rot = true;
        }
        vw.logits.assign(z.data(), z.data() + k);
        const Evaluation ev = evaluate(problem, cur, vw);
        check_finite(ev, step);
        if (step % cfg.trace_every == 0 || step == cfg.steps) {
            res.trace.push_back({step, ev.terms});
            spdlog::debug("step {:5d}  E={:.6g}  pf={:.4g} vs={:.4g} bp={:.4g} bs={:.4g} sc={:.4g} sp={:.4g}", step,
                          ev.terms.total, ev.terms.pf, ev.terms.vs, ev.terms.bp, ev.terms.bs, ev.terms.sc, ev.terms.sp);
        }
        if (step == cfg.steps) {
            res.final_terms = ev.terms;
            break;
        }

        // Cosine decay from 1 to lr_final_fraction over the run.
        const double progress = cfg.steps > 1 ? static_cast<double>(step) / (cfg.steps - 1) : 1.0;
        const double scale = cfg.lr_final_fraction + (1.0 - cfg.lr_final_fraction) * 0.5 * (1.0 + std::cos(M_PI * progress));
        const double bc1 = 1.0 - std::pow(cfg.beta1, step + 1);
        const double bc2 = 1.0 - std::pow(cfg.beta2, step + 1);

        const Eigen::VectorXd g = ev.grad;
        ab.m = cfg.beta1 * ab.m + (1 - cfg.beta1) * g;
        ab.v = cfg.beta2 * ab.v + (1 - cfg.beta2) * g.cwiseProduct(g);
        for (int i = 0; i < kNumParams; ++i) {
            const double a = lr[i] * scale;
            x[i] -= a * decay[i] * x[i];
            x[i] -= a * (ab.m[i] / bc1) / (std::sqrt(ab.v[i] / bc2) + cfg.adam_eps);
        }
        const Eigen::VectorXd gl = Eigen::Map<const Eigen::VectorXd>(ev.grad_logits.data(), static_cast<Eigen::Index>(k));
        al.m = cfg.beta1 * al.m + (1 - cfg.beta1) * gl;
        al.v = cfg.beta2 * al.v + (1 - cfg.beta2) * gl.cwiseProduct(gl);
        for (size_t i = 0; i < k; ++i) {
            const double a = cfg.lr_logits * scale;
            z[i] -= a * (al.m[i] / bc1) / (std::sqrt(al.v[i] / bc2) + cfg.adam_eps);
        }
    }
    res.params = from_vector(x);
    res.view_weights = vw;
    return res;
}

}  // namespace hsi
