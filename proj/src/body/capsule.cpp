#include <cmath>
#include <map>

#include "hsi/body/body_model.hpp"

namespace hsi {

namespace {

enum Part { kTorso, kLeg, kFoot, kArm, kHand, kHead };

using Weights = std::vector<std::pair<int, double>>;

struct Ring {
    Vec3 center;
    Vec3 u, v;  // semi-axes
    Weights weights;
};

struct VertexInfo {
    Part part;
    double side;   // -1 left (-x), +1 right, 0 midline
    Vec3 center;   // ring centre at rest
    Vec3 radial;   // unit radial direction, zero for cap centres
};

constexpr int kRingVerts = 10;

struct Builder {
    BodyModel model;
    std::vector<VertexInfo> info;
    std::vector<Weights> skin;
    std::map<int, std::vector<std::pair<std::vector<int>, double>>> regress;  // joint -> (vertex ring, weight)

    int add_vertex(const Vec3& p, const Weights& w, const VertexInfo& vi) {
        model.template_vertices.push_back(p);
        skin.push_back(w);
        info.push_back(vi);
        return static_cast<int>(model.template_vertices.size()) - 1;
    }

    void add_face(int a, int b, int c, const Vec3& interior) {
        const auto& V = model.template_vertices;
        const Vec3 n = (V[b] - V[a]).cross(V[c] - V[a]);
        const Vec3 centroid = (V[a] + V[b] + V[c]) / 3.0;
        if (n.dot(centroid - interior) < 0) std::swap(b, c);
        model.faces.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                               static_cast<std::uint32_t>(c)});
    }

    // Closed tube through the rings. Caps are fans around start/end points
    // (ring centres for flat caps, poles for spheres). Returns vertex indices
    // per ring.
    std::vector<std::vector<int>> tube(Part part, double side, const std::vector<Ring>& rings,
                                       const Vec3& start_cap, const Vec3& end_cap) {
        std::vector<std::vector<int>> ids;
        for (const Ring& r : rings) {
            std::vector<int> ring;
            for (int i = 0; i < kRingVerts; ++i) {
                const double a = 2.0 * M_PI * i / kRingVerts;
                const Vec3 off = std::cos(a) * r.u + std::sin(a) * r.v;
                ring.push_back(add_vertex(r.center + off, r.weights, {part, side, r.center, off.normalized()}));
            }
            ids.push_back(ring);
        }
        for (size_t k = 0; k + 1 < rings.size(); ++k) {
            const Vec3 mid = 0.5 * (rings[k].center + rings[k + 1].center);
            for (int i = 0; i < kRingVerts; ++i) {
                const int i2 = (i + 1) % kRingVerts;
                add_face(ids[k][i], ids[k + 1][i], ids[k + 1][i2], mid);
                add_face(ids[k][i], ids[k + 1][i2], ids[k][i2], mid);
            }
        }
        auto cap = [&](const Vec3& p, size_t ring_idx, size_t inner_idx) {
            const Ring& r = rings[ring_idx];
            const int c = add_vertex(p, r.weights, {part, side, r.center, Vec3::Zero()});
            // Interior reference: a point inside the part, away from this cap.
            Vec3 interior = rings[inner_idx].center;
            if ((interior - p).norm() < 1e-9) interior = 0.5 * (rings.front().center + rings.back().center);
            for (int i = 0; i < kRingVerts; ++i)
                add_face(c, ids[ring_idx][i], ids[ring_idx][(i + 1) % kRingVerts], interior);
        };
        const size_t last = rings.size() - 1;
        cap(start_cap, 0, std::min<size_t>(1, last));
        cap(end_cap, last, last > 0 ? last - 1 : 0);
        return ids;
    }

    std::vector<std::vector<int>> sphere(Part part, double side, const Vec3& c, double radius, const Vec3& axis,
                                         const Vec3& e1, int lat, const Weights& w) {
        const Vec3 e2 = axis.cross(e1);
        std::vector<Ring> rings;
        for (int i = 1; i < lat; ++i) {
            const double phi = M_PI * i / lat;
            rings.push_back({c - std::cos(phi) * radius * axis, std::sin(phi) * radius * e1,
                             std::sin(phi) * radius * e2, w});
        }
        return tube(part, side, rings, c - radius * axis, c + radius * axis);
    }

    void regress_ring(int joint, const std::vector<int>& ring, double weight) {
        regress[joint].push_back({ring, weight});
    }
};

double q(double x) { return static_cast<double>(static_cast<float>(x)); }

}  // namespace

std::vector<int> default_lambda_joints() { return {10, 11, 15, 20, 21}; }

std::vector<DeltaEntry> default_delta_table() {
    // Axes: x = flexion/extension (z up, facing +y), y = frontal-plane, z = vertical.
    return {
        {1, 0, -1}, {2, 0, -1},   // hip hyperextension
        {4, 0, +1}, {5, 0, +1},   // knee hyperextension
        {7, 0, +1}, {8, 0, +1},   // ankle dorsiflexion
        {3, 0, +1}, {6, 0, +1}, {9, 0, +1},  // spine back-bend
        {12, 0, +1},              // neck back-bend
        {13, 1, -1}, {14, 1, +1}, // collar depression
        {16, 2, +1}, {17, 2, -1}, // arm swung behind the back
        {18, 2, +1}, {19, 2, -1}, // elbow hyperextension
    };
}

BodyModel capsule_person() {
    Builder b;
    const Vec3 X = Vec3::UnitX(), Y = Vec3::UnitY(), Z = Vec3::UnitZ();

    // Torso along z.
    const struct { double z, rx, ry; Weights w; } torso[] = {
        {-0.06, 0.14, 0.10, {{0, 1.0}}},
        {0.00, 0.16, 0.11, {{0, 1.0}}},
        {0.10, 0.15, 0.10, {{0, 0.5}, {3, 0.5}}},
        {0.25, 0.15, 0.10, {{3, 0.5}, {6, 0.5}}},
        {0.40, 0.17, 0.11, {{6, 0.5}, {9, 0.5}}},
        {0.50, 0.17, 0.11, {{9, 1.0}}},
        {0.60, 0.10, 0.08, {{9, 0.5}, {12, 0.5}}},
    };
    std::vector<Ring> rings;
    for (const auto& t : torso) rings.push_back({Vec3(0, 0, t.z), t.rx * X, t.ry * Y, t.w});
    const auto torso_ids = b.tube(kTorso, 0, rings, rings.front().center, rings.back().center);
    b.regress_ring(0, torso_ids[1], 1.0);
    b.regress_ring(3, torso_ids[2], 1.0);
    b.regress_ring(6, torso_ids[3], 1.0);
    b.regress_ring(9, torso_ids[4], 1.0);
    b.regress_ring(12, torso_ids[6], 1.0);

    // Head sphere, rigid to the head joint.
    const auto head_ids = b.sphere(kHead, 0, Vec3(0, 0, 0.78), 0.10, Z, X, 8, {{15, 1.0}});
    b.regress_ring(15, torso_ids[6], 1.0 / 3.0);
    b.regress_ring(15, head_ids[3], 2.0 / 3.0);  // equator

    for (int s : {-1, 1}) {
        const bool left = s < 0;
        const int hip = left ? 1 : 2, knee = left ? 4 : 5, ankle = left ? 7 : 8, foot = left ? 10 : 11;
        const int collar = left ? 13 : 14, shoulder = left ? 16 : 17, elbow = left ? 18 : 19, wrist = left ? 20 : 21;
        const double x = 0.1 * s;

        const struct { double z, r; Weights w; } leg[] = {
            {-0.16, 0.075, {{hip, 1.0}}},
            {-0.30, 0.070, {{hip, 1.0}}},
            {-0.44, 0.060, {{hip, 1.0}}},
            {-0.52, 0.055, {{hip, 0.5}, {knee, 0.5}}},
            {-0.60, 0.050, {{knee, 1.0}}},
            {-0.74, 0.045, {{knee, 1.0}}},
            {-0.86, 0.040, {{knee, 1.0}}},
            {-0.90, 0.040, {{knee, 0.5}, {ankle, 0.5}}},
        };
        rings.clear();
        for (const auto& l : leg) rings.push_back({Vec3(x, 0, l.z), l.r * X, l.r * Y, l.w});
        const auto leg_ids = b.tube(kLeg, s, rings, rings.front().center, rings.back().center);
        b.regress_ring(hip, leg_ids[0], 1.0);
        b.regress_ring(knee, leg_ids[3], 1.0);
        b.regress_ring(ankle, leg_ids[7], 1.0);

        const struct { double y; Weights w; } feet[] = {
            {-0.05, {{ankle, 1.0}}},
            {0.02, {{ankle, 1.0}}},
            {0.10, {{ankle, 0.5}, {foot, 0.5}}},
            {0.16, {{foot, 1.0}}},
        };
        rings.clear();
        for (const auto& f : feet) rings.push_back({Vec3(x, f.y, -0.955), 0.04 * X, 0.03 * Z, f.w});
        const auto foot_ids = b.tube(kFoot, s, rings, rings.front().center, rings.back().center);
        b.regress_ring(foot, foot_ids[2], 1.0);

        const struct { double x, r; Weights w; } arm[] = {
            {0.24, 0.050, {{shoulder, 1.0}}},
            {0.32, 0.048, {{shoulder, 1.0}}},
            {0.42, 0.045, {{shoulder, 1.0}}},
            {0.48, 0.042, {{shoulder, 0.5}, {elbow, 0.5}}},
            {0.54, 0.040, {{elbow, 1.0}}},
            {0.64, 0.037, {{elbow, 1.0}}},
            {0.72, 0.035, {{elbow, 0.5}, {wrist, 0.5}}},
        };
        rings.clear();
        for (const auto& a : arm) rings.push_back({Vec3(a.x * s, 0, 0.5), a.r * Y, a.r * Z, a.w});
        const auto arm_ids = b.tube(kArm, s, rings, rings.front().center, rings.back().center);
        b.regress_ring(shoulder, arm_ids[0], 1.0);
        b.regress_ring(elbow, arm_ids[3], 1.0);
        b.regress_ring(wrist, arm_ids[6], 1.0);
        b.regress_ring(collar, torso_ids[5], 0.6);
        b.regress_ring(collar, arm_ids[0], 0.4);

        b.sphere(kHand, s, Vec3(0.79 * s, 0, 0.5), 0.045, s * X, Y, 6, {{wrist, 1.0}});
    }

    BodyModel& m = b.model;
    const int n = static_cast<int>(m.template_vertices.size());
    for (auto& v : m.template_vertices)
        for (int a = 0; a < 3; ++a) v[a] = q(v[a]);

    m.parents = {-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19};

    m.skinning_weights = Eigen::MatrixXd::Zero(n, kNumJoints);
    for (int v = 0; v < n; ++v)
        for (auto [j, w] : b.skin[v]) m.skinning_weights(v, j) += w;

    m.joint_regressor = Eigen::MatrixXd::Zero(kNumJoints, n);
    for (const auto& [j, parts] : b.regress)
        for (const auto& [ring, w] : parts)
            for (int v : ring) m.joint_regressor(j, v) += q(w / static_cast<double>(ring.size()));

    // Shape basis, meters per unit coefficient.
    m.shape_blends = Eigen::MatrixXd::Zero(3 * n, kShapeDim);
    const Vec3 head_center(0, 0, 0.78);
    for (int v = 0; v < n; ++v) {
        const VertexInfo& in = b.info[v];
        const Vec3 p = m.template_vertices[v];
        Eigen::Matrix<double, 3, kShapeDim> B = Eigen::Matrix<double, 3, kShapeDim>::Zero();
        const double s = in.side;
        B.col(0) = 0.04 * p;  // stature
        if (in.part == kLeg) B(2, 1) = -0.05 * std::clamp((-0.16 - in.center.z()) / 0.74, 0.0, 1.0);
        if (in.part == kFoot) B(2, 1) = -0.05;
        if (in.part == kArm) B(0, 2) = 0.04 * s * std::clamp((std::abs(in.center.x()) - 0.24) / 0.48, 0.0, 1.0);
        if (in.part == kHand) B(0, 2) = 0.04 * s;
        if (in.part == kTorso) B(2, 3) = 0.04 * std::clamp(in.center.z() / 0.6, 0.0, 1.0);
        if (in.part == kArm || in.part == kHand) B(2, 3) = 0.04 * 0.5 / 0.6;
        if (in.part == kHead) B(2, 3) = 0.04;
        if (in.part == kTorso) B.col(4) = 0.02 * in.radial;
        if (in.part == kArm || in.part == kHand) B(0, 5) = 0.02 * s;
        if (in.part == kTorso && in.center.z() >= 0.4) B(0, 5) = 0.02 * in.radial.x();
        if (in.part == kLeg || in.part == kFoot) B(0, 6) = 0.015 * s;
        if (in.part == kTorso && in.center.z() <= 0.0) B(0, 6) = 0.015 * in.radial.x();
        if (in.part == kTorso && in.center.z() >= 0.0 && in.center.z() <= 0.25)
            B.col(7) = 0.025 * std::max(in.radial.y(), 0.0) * in.radial;
        if (in.part == kHead) B.col(8) = 0.1 * (p - head_center);
        if (in.part != kTorso && in.part != kHead) B.col(9) = 0.01 * in.radial;
        for (int a = 0; a < 3; ++a)
            for (int k = 0; k < kShapeDim; ++k) m.shape_blends(3 * v + a, k) = q(B(a, k));
    }

    // Linear stand-in for the latent pose decoder: each column drives one
    // (joint, axis) or a small synergy.
    m.pose_decoder.setZero();
    const struct { int col, joint, axis; double scale; } entries[] = {
        {0, 1, 0, 0.8},   {1, 2, 0, 0.8},   {2, 1, 1, 0.4},   {3, 2, 1, 0.4},
        {4, 4, 0, 0.8},   {5, 5, 0, 0.8},   {6, 7, 0, 0.4},   {7, 8, 0, 0.4},
        {8, 3, 0, 0.4},   {9, 3, 1, 0.4},   {10, 6, 0, 0.4},  {11, 6, 1, 0.4},
        {12, 9, 0, 0.4},  {13, 9, 1, 0.4},
        {14, 3, 2, 0.25}, {14, 6, 2, 0.25}, {14, 9, 2, 0.25},  // spine twist
        {15, 12, 0, 0.4}, {16, 12, 1, 0.4}, {17, 15, 0, 0.4}, {18, 15, 1, 0.4},
        {19, 13, 1, 0.4}, {20, 14, 1, 0.4}, {21, 13, 2, 0.4}, {22, 14, 2, 0.4},
        {23, 16, 1, 0.8}, {24, 17, 1, 0.8}, {25, 16, 2, 0.8}, {26, 17, 2, 0.8},
        {27, 18, 2, 0.8}, {28, 19, 2, 0.8}, {29, 18, 1, 0.4}, {30, 19, 1, 0.4},
        {31, 7, 1, 0.3},  {31, 8, 1, -0.3},  // mirrored ankle inversion
    };
    for (const auto& e : entries) m.pose_decoder(3 * (e.joint - 1) + e.axis, e.col) = q(e.scale);

    m.lambda_joints = default_lambda_joints();
    m.delta = default_delta_table();
    m.finalize();
    m.validate();
    return m;
}

}  // namespace hsi
