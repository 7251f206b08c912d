#include <cmath>
#include <limits>
#include <set>

#include "hsi/common/error.hpp"
#include "hsi/lifting/collisions.hpp"
#include "hsi/lifting/energy.hpp"

namespace hsi {

void EnergyWeights::validate() const {
    for (double l : {lambda_pf, lambda_vs, lambda_bp, lambda_bs, lambda_sc, lambda_sp})
        if (!(l >= 0.0)) throw ValidationError("energy weights must be non-negative");
    if (!(sigma_gm > 0.0)) throw ValidationError("sigma_gm must be positive");
    if (!(tau >= 0.0)) throw ValidationError("tau must be non-negative");
    if (!(eps > 0.0)) throw ValidationError("eps must be positive");
    if (!(sc_temperature > 0.0)) throw ValidationError("sc_temperature must be positive");
}

ViewWeights ViewWeights::constant(size_t k, double w) {
    return {std::vector<double>(k, std::log(w / (1.0 - w)))};
}

std::vector<double> ViewWeights::weights() const {
    std::vector<double> w;
    for (double l : logits) w.push_back(std::clamp(sigmoid(l), 0.0, 1.0));
    return w;
}

double ViewWeights::sum() const {
    double s = 0;
    for (double w : weights()) s += w;
    return s;
}

void LiftProblem::validate() const {
    if (!model) throw ValidationError("lift problem: no body model");
    if (cameras.empty()) throw ValidationError("lift problem: no views");
    if (cameras.size() != views.size()) throw ValidationError("lift problem: cameras and hypotheses differ in count");
    for (size_t i = 0; i < views.size(); ++i)
        if (cameras[i].view_id != views[i].view_id)
            throw ValidationError("lift problem: view " + std::to_string(i) + " is not aligned by view_id");
    weights.validate();
}

LiftProblem make_problem(const BodyModel& model, const SdfGrid* sdf, const std::vector<Camera>& cameras,
                         const std::vector<PoseHypothesis>& hyps, const EnergyWeights& weights) {
    LiftProblem p;
    p.model = &model;
    p.sdf = sdf;
    p.weights = weights;
    std::set<int> seen;
    bool usable = false;
    for (const PoseHypothesis& h : hyps) {
        validate(h);
        if (!seen.insert(h.view_id).second)
            throw ValidationError("duplicate hypothesis for view " + std::to_string(h.view_id));
        const Camera* cam = nullptr;
        for (const Camera& c : cameras)
            if (c.view_id == h.view_id) cam = &c;
        if (!cam) throw ValidationError("hypothesis for view " + std::to_string(h.view_id) + " has no camera");
        p.cameras.push_back(*cam);
        p.views.push_back(map_to_body(h));
        for (double c : p.views.back().confidence) usable |= c > 0;
    }
    if (!usable) throw ValidationError("no usable hypothesis: every joint has zero confidence");
    p.validate();
    return p;
}

namespace {

// Per-view confidence-weighted robust residual sums S_i.
template <class T>
std::vector<T> view_sums(const LiftProblem& pr, const std::array<Vec3T<T>, kNumJoints>& joints) {
    std::vector<T> S(pr.views.size(), T(0.0));
    for (size_t i = 0; i < pr.views.size(); ++i) {
        const Camera& cam = pr.cameras[i];
        const ViewObservation& ob = pr.views[i];
        const double sigma = pr.weights.sigma_gm * cam.width / 512.0;
        for (size_t k = 0; k < ob.body_joint.size(); ++k) {
            if (ob.confidence[k] == 0.0) continue;
            Eigen::Matrix<T, 2, 1> px;
            if (!cam.project<T>(joints[ob.body_joint[k]], &px)) continue;
            const T dx = px[0] - ob.pixel[k].x();
            const T dy = px[1] - ob.pixel[k].y();
            S[i] += ob.confidence[k] * geman_mcclure_sq<T>(dx * dx + dy * dy, sigma);
        }
    }
    return S;
}

template <class T>
T pf_from_sums(const std::vector<T>& S, const std::vector<double>& w, double eps) {
    T num(0.0);
    double den = eps;
    for (size_t i = 0; i < S.size(); ++i) {
        num += w[i] * S[i];
        den += w[i];
    }
    return num / den;
}

template <class T>
T bp_term(const BodyModel& model, const Eigen::Matrix<T, kLatentDim, 1>& theta) {
    return theta.squaredNorm() + joint_angle_prior<T>(model, decode_pose<T>(model, theta));
}

// Contact energy. Branch 1 reports the hard minimum but carries the
// derivative of a log-sum-exp smooth minimum.
template <class T>
T sc_term(const std::vector<Vec3T<T>>& verts, const SdfGrid& sdf, double temperature, int* branch, double* min_sdf) {
    using std::exp;
    using std::log;
    std::vector<T> psi(verts.size());
    double m = std::numeric_limits<double>::infinity();
    for (size_t v = 0; v < verts.size(); ++v) {
        psi[v] = sdf.sample<T>(verts[v]);
        m = std::min(m, value_of(psi[v]));
    }
    *min_sdf = m;
    if (m > 0.0) {
        *branch = 1;
        T acc(0.0);
        for (const T& p : psi) acc += exp(-(p - m) / temperature);
        T soft = T(m) - temperature * log(acc);
        set_value(soft, m);
        return soft;
    }
    *branch = 2;
    T e(0.0);
    for (const T& p : psi)
        if (value_of(p) < 0) e -= p;
    return e;
}

std::vector<Vec3> values_of(const std::vector<Vec3T<Jet51>>& v) {
    std::vector<Vec3> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = Vec3(v[i][0].a, v[i][1].a, v[i][2].a);
    return out;
}

}  // namespace

double energy_pf(const LiftProblem& problem, const BodyParams& params, const ViewWeights& vw) {
    const auto out = forward<double>(*problem.model, params);
    return pf_from_sums(view_sums<double>(problem, out.joints), vw.weights(), problem.weights.eps);
}

double energy_vs(const ViewWeights& vw, double tau) { return std::max(tau - vw.sum(), 0.0); }

double energy_bp(const BodyModel& model, const Eigen::Matrix<double, kLatentDim, 1>& theta) {
    return bp_term<double>(model, theta);
}

double energy_bs(const Eigen::Matrix<double, kShapeDim, 1>& phi) { return phi.squaredNorm(); }

ContactEnergy energy_sc(const std::vector<Vec3>& vertices, const SdfGrid& sdf) {
    ContactEnergy c;
    c.value = sc_term<double>(vertices, sdf, 0.01, &c.branch, &c.min_sdf);
    return c;
}

double energy_sc_surrogate(const std::vector<Vec3>& vertices, const SdfGrid& sdf, double temperature) {
    double m = std::numeric_limits<double>::infinity();
    std::vector<double> psi;
    for (const Vec3& v : vertices) {
        psi.push_back(sdf.sample(v));
        m = std::min(m, psi.back());
    }
    double acc = 0;
    for (double p : psi) acc += std::exp(-(p - m) / temperature);
    return m - temperature * std::log(acc);
}

EnergyTerms total_energy(const LiftProblem& problem, const BodyParams& params, const ViewWeights& vw) {
    const EnergyWeights& L = problem.weights;
    const auto out = forward<double>(*problem.model, params);
    EnergyTerms t;
    t.pf = pf_from_sums(view_sums<double>(problem, out.joints), vw.weights(), L.eps);
    t.vs = energy_vs(vw, L.tau);
    t.bp = energy_bp(*problem.model, params.theta);
    t.bs = energy_bs(params.phi);
    if (problem.sdf) t.sc = sc_term<double>(out.vertices, *problem.sdf, L.sc_temperature, &t.sc_branch, &t.sc_min);
    const auto pairs = bvh_collisions(out.vertices, problem.model->faces);
    t.collisions = pairs.size();
    t.sp = penetration_energy<double>(out.vertices, problem.model->faces, pairs);
    t.total = L.lambda_pf * t.pf + L.lambda_vs * t.vs + L.lambda_bp * t.bp + L.lambda_bs * t.bs +
              L.lambda_sc * t.sc + L.lambda_sp * t.sp;
    return t;
}

Evaluation evaluate(const LiftProblem& problem, const BodyParams& params, const ViewWeights& vw) {
    const EnergyWeights& L = problem.weights;
    const BodyModel& model = *problem.model;
    const auto jp = to_jets(params);
    const auto out = forward<Jet51>(model, jp);
    const std::vector<double> w = vw.weights();

    Evaluation ev;
    EnergyTerms& t = ev.terms;
    const auto S = view_sums<Jet51>(problem, out.joints);
    const Jet51 pf = pf_from_sums(S, w, L.eps);
    const Jet51 bp = bp_term<Jet51>(model, jp.theta);
    const Jet51 bs = jp.phi.squaredNorm();
    Jet51 sc(0.0);
    if (problem.sdf) sc = sc_term<Jet51>(out.vertices, *problem.sdf, L.sc_temperature, &t.sc_branch, &t.sc_min);
    const auto pairs = bvh_collisions(values_of(out.vertices), model.faces);
    t.collisions = pairs.size();
    const Jet51 sp = penetration_energy<Jet51>(out.vertices, model.faces, pairs);

    t.pf = pf.a;
    t.vs = energy_vs(vw, L.tau);
    t.bp = bp.a;
    t.bs = bs.a;
    t.sc = sc.a;
    t.sp = sp.a;
    t.total = L.lambda_pf * t.pf + L.lambda_vs * t.vs + L.lambda_bp * t.bp + L.lambda_bs * t.bs +
              L.lambda_sc * t.sc + L.lambda_sp * t.sp;
    ev.grad = L.lambda_pf * pf.v + L.lambda_bp * bp.v + L.lambda_bs * bs.v + L.lambda_sc * sc.v + L.lambda_sp * sp.v;

    // dE_PF/dw_i = (S_i - E_PF) / (sum w + eps); dE_VS/dw_i = -1 while sum w < tau.
    double wsum = 0;
    for (double x : w) wsum += x;
    ev.grad_logits.resize(w.size());
    for (size_t i = 0; i < w.size(); ++i) {
        double g = L.lambda_pf * (S[i].a - t.pf) / (wsum + L.eps);
        if (wsum < L.tau) g -= L.lambda_vs;
        ev.grad_logits[i] = g * w[i] * (1.0 - w[i]);
    }

    const std::pair<const char*, const Jet51*> named[] = {{"E_PF", &pf}, {"E_BP", &bp}, {"E_BS", &bs},
                                                          {"E_SC", &sc}, {"E_SP", &sp}};
    for (auto [name, j] : named)
        if (!std::isfinite(j->a) || !j->v.allFinite()) {
            ev.nonfinite_term = name;
            break;
        }
    if (ev.nonfinite_term.empty() && !std::isfinite(t.vs)) ev.nonfinite_term = "E_VS";
    return ev;
}

}  // namespace hsi
