#pragma once

// Central-difference gradient checks for the lifting energy.

#include <algorithm>
#include <cmath>

#include "hsi/lifting/collisions.hpp"
#include "hsi/lifting/energy.hpp"

namespace hsi::check {

// What has to stay fixed across a difference stencil for the energy to be
// smooth there: E_SC branch, penetrating vertex set size, collision pairs.
struct Regime {
    int branch = 1;
    size_t inside = 0;
    size_t collisions = 0;
    bool operator==(const Regime&) const = default;
};

// Total energy with branch 1 of E_SC replaced by its smooth-min surrogate,
// which is the function whose gradient the optimizer follows there.
inline double smooth_total(const LiftProblem& pr, const BodyParams& p, const ViewWeights& vw, Regime* regime = nullptr) {
    EnergyTerms t = total_energy(pr, p, vw);
    double total = t.total;
    Regime r{t.sc_branch, 0, t.collisions};
    if (pr.sdf) {
        const auto verts = forward<double>(*pr.model, p).vertices;
        if (t.sc_branch == 1)
            total += pr.weights.lambda_sc * (energy_sc_surrogate(verts, *pr.sdf, pr.weights.sc_temperature) - t.sc);
        for (const Vec3& v : verts) r.inside += pr.sdf->sample(v) < 0.0;
    }
    if (regime) *regime = r;
    return total;
}

struct GradReport {
    double max_rel = 0.0;
    int worst = -1;
    int checked = 0;
    int skipped = 0;  // components whose stencil crossed a regime change
};

// Relative error |fd - ad| / max(|fd|, |ad|, floor) over the 51 body
// parameters followed by the k logits. Central-difference roundoff grows
// with the energy itself, so the floor does too: max(floor, 1e-7 |E|).
inline GradReport gradient_check(const LiftProblem& pr, const BodyParams& p, const ViewWeights& vw, double h = 1e-4,
                                 double floor = 1e-3) {
    const Evaluation ev = evaluate(pr, p, vw);
    floor = std::max(floor, 1e-7 * std::abs(smooth_total(pr, p, vw)));
    GradReport r;
    Regime r0;
    smooth_total(pr, p, vw, &r0);
    const auto x = to_vector(p);
    const int n = kNumParams + static_cast<int>(vw.logits.size());
    for (int i = 0; i < n; ++i) {
        double fp, fm;
        Regime rp, rm;
        if (i < kNumParams) {
            auto xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            fp = smooth_total(pr, from_vector(xp), vw, &rp);
            fm = smooth_total(pr, from_vector(xm), vw, &rm);
        } else {
            ViewWeights wp = vw, wm = vw;
            wp.logits[i - kNumParams] += h;
            wm.logits[i - kNumParams] -= h;
            fp = smooth_total(pr, p, wp, &rp);
            fm = smooth_total(pr, p, wm, &rm);
        }
        if (!(rp == r0) || !(rm == r0)) {
            ++r.skipped;
            continue;
        }
        const double fd = (fp - fm) / (2 * h);
        const double ad = i < kNumParams ? ev.grad[i] : ev.grad_logits[i - kNumParams];
        const double rel = std::abs(fd - ad) / std::max({std::abs(fd), std::abs(ad), floor});
        ++r.checked;
        if (rel > r.max_rel) {
            r.max_rel = rel;
            r.worst = i;
        }
    }
    return r;
}

}  // namespace hsi::check
