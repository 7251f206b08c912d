#pragma once

#include <algorithm>
#include <limits>

#include "hsi/geometry/types.hpp"

namespace hsi {

struct Aabb {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

    bool valid() const { return (lo.array() <= hi.array()).all(); }

    void extend(const Vec3& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void extend(const Aabb& b) {
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
    }

    Vec3 center() const { return 0.5 * (lo + hi); }
    Vec3 extent() const { return hi - lo; }

    int longest_axis() const {
        Vec3 e = extent();
        int a = 0;
        if (e[1] > e[a]) a = 1;
        if (e[2] > e[a]) a = 2;
        return a;
    }

    // Closed-interval overlap: touching boxes count as overlapping.
    bool overlaps(const Aabb& o) const {
        return (lo.array() <= o.hi.array()).all() && (o.lo.array() <= hi.array()).all();
    }

    double squared_distance(const Vec3& p) const {
        Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
        return d.squaredNorm();
    }

    Vec3 clamp(const Vec3& p) const { return p.cwiseMax(lo).cwiseMin(hi); }
};

}  // namespace hsi
