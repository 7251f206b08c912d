#include "hsi/geometry/triangle.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace hsi {

ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return {a, TriFeature::VertexA};

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return {b, TriFeature::VertexB};

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return {a + v * ab, TriFeature::EdgeAB};
    }

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return {c, TriFeature::VertexC};

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return {a + w * ac, TriFeature::EdgeCA};
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return {b + w * (c - b), TriFeature::EdgeBC};
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return {a + ab * v + ac * w, TriFeature::Face};
}

namespace {

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect_2d(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    const double o1 = orient2d(p1, p2, q1);
    const double o2 = orient2d(p1, p2, q2);
    const double o3 = orient2d(q1, q2, p1);
    const double o4 = orient2d(q1, q2, p2);
    if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0)))
        return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

bool point_in_triangle_2d(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    const double d1 = orient2d(a, b, p);
    const double d2 = orient2d(b, c, p);
    const double d3 = orient2d(c, a, p);
    const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
    const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(has_neg && has_pos);
}

bool coplanar_intersect(const Vec3& n, const Vec3& v0, const Vec3& v1, const Vec3& v2,
                        const Vec3& u0, const Vec3& u1, const Vec3& u2) {
    // Project onto the axis plane where the triangles have the largest area.
    const Vec3 an = n.cwiseAbs();
    int drop = 0;
    if (an[1] > an[drop]) drop = 1;
    if (an[2] > an[drop]) drop = 2;
    const int i0 = drop == 0 ? 1 : 0;
    const int i1 = drop == 2 ? 1 : 2;
    auto proj = [&](const Vec3& v) { return Vec2(v[i0], v[i1]); };
    const Vec2 V[3] = {proj(v0), proj(v1), proj(v2)};
    const Vec2 U[3] = {proj(u0), proj(u1), proj(u2)};

    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (segments_intersect_2d(V[i], V[(i + 1) % 3], U[j], U[(j + 1) % 3])) return true;
    if (point_in_triangle_2d(V[0], U[0], U[1], U[2])) return true;
    if (point_in_triangle_2d(U[0], V[0], V[1], V[2])) return true;
    return false;
}

// Returns false when the triangles are coplanar; otherwise fills the interval.
bool compute_interval(double vv0, double vv1, double vv2, double d0, double d1, double d2,
                      double& lo, double& hi) {
    auto isect = [&](double a0, double a1, double a2, double e0, double e1, double e2) {
        lo = a0 + (a1 - a0) * e0 / (e0 - e1);
        hi = a0 + (a2 - a0) * e0 / (e0 - e2);
    };
    if (d0 * d1 > 0.0) {
        isect(vv2, vv0, vv1, d2, d0, d1);
    } else if (d0 * d2 > 0.0) {
        isect(vv1, vv0, vv2, d1, d0, d2);
    } else if (d1 * d2 > 0.0 || d0 != 0.0) {
        isect(vv0, vv1, vv2, d0, d1, d2);
    } else if (d1 != 0.0) {
        isect(vv1, vv0, vv2, d1, d0, d2);
    } else if (d2 != 0.0) {
        isect(vv2, vv0, vv1, d2, d0, d1);
    } else {
        return false;
    }
    if (lo > hi) std::swap(lo, hi);
    return true;
}

// Signed plane distances snapped to zero below a scale-relative epsilon.
void plane_distances(const Vec3& n, double d, const Vec3& a, const Vec3& b, const Vec3& c,
                     double scale, double out[3]) {
    const double eps = 1e-12 * scale;
    out[0] = n.dot(a) + d;
    out[1] = n.dot(b) + d;
    out[2] = n.dot(c) + d;
    for (int i = 0; i < 3; ++i)
        if (std::abs(out[i]) < eps) out[i] = 0.0;
}

}  // namespace

bool triangles_intersect(const Vec3& v0, const Vec3& v1, const Vec3& v2,
                         const Vec3& u0, const Vec3& u1, const Vec3& u2) {
    const Vec3 n1 = (v1 - v0).cross(v2 - v0);
    const double d1 = -n1.dot(v0);
    const double s1 = n1.norm() * std::max({u0.norm(), u1.norm(), u2.norm(), v0.norm(), 1.0});
    double du[3];
    plane_distances(n1, d1, u0, u1, u2, s1, du);
    if (du[0] * du[1] > 0.0 && du[0] * du[2] > 0.0) return false;

    const Vec3 n2 = (u1 - u0).cross(u2 - u0);
    const double d2 = -n2.dot(u0);
    const double s2 = n2.norm() * std::max({v0.norm(), v1.norm(), v2.norm(), u0.norm(), 1.0});
    double dv[3];
    plane_distances(n2, d2, v0, v1, v2, s2, dv);
    if (dv[0] * dv[1] > 0.0 && dv[0] * dv[2] > 0.0) return false;

    const Vec3 dir = n1.cross(n2);
    int axis = 0;
    const Vec3 ad = dir.cwiseAbs();
    if (ad[1] > ad[axis]) axis = 1;
    if (ad[2] > ad[axis]) axis = 2;

    double a_lo, a_hi, b_lo, b_hi;
    if (!compute_interval(v0[axis], v1[axis], v2[axis], dv[0], dv[1], dv[2], a_lo, a_hi))
        return coplanar_intersect(n1, v0, v1, v2, u0, u1, u2);
    if (!compute_interval(u0[axis], u1[axis], u2[axis], du[0], du[1], du[2], b_lo, b_hi))
        return coplanar_intersect(n1, v0, v1, v2, u0, u1, u2);
    return !(a_hi < b_lo || b_hi < a_lo);
}

}  // namespace hsi
