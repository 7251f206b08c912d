#include <cmath>

#include "hsi/body/body_model.hpp"
#include "hsi/common/error.hpp"

namespace hsi {

const std::array<const char*, kNumJoints> kJointNames = {
    "pelvis",     "left_hip",       "right_hip",      "spine1",     "left_knee",  "right_knee",
    "spine2",     "left_ankle",     "right_ankle",    "spine3",     "left_foot",  "right_foot",
    "neck",       "left_collar",    "right_collar",   "head",       "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",    "left_wrist",     "right_wrist"};

Eigen::Matrix<double, kNumParams, 1> to_vector(const BodyParams& p) {
    Eigen::Matrix<double, kNumParams, 1> x;
    x << p.rot6d, p.trans, p.theta, p.phi;
    return x;
}

BodyParams from_vector(const Eigen::Matrix<double, kNumParams, 1>& x) {
    BodyParams p;
    p.rot6d = x.segment<6>(kRotOffset);
    p.trans = x.segment<3>(kTransOffset);
    p.theta = x.segment<kLatentDim>(kThetaOffset);
    p.phi = x.segment<kShapeDim>(kPhiOffset);
    return p;
}

BodyParamsT<Jet51> to_jets(const BodyParams& p) {
    const auto x = to_vector(p);
    BodyParamsT<Jet51> j;
    auto seed = [&](int i) { return Jet51(x[i], i); };
    for (int i = 0; i < 6; ++i) j.rot6d[i] = seed(kRotOffset + i);
    for (int i = 0; i < 3; ++i) j.trans[i] = seed(kTransOffset + i);
    for (int i = 0; i < kLatentDim; ++i) j.theta[i] = seed(kThetaOffset + i);
    for (int i = 0; i < kShapeDim; ++i) j.phi[i] = seed(kPhiOffset + i);
    return j;
}

bool all_finite(const BodyParams& p) { return to_vector(p).allFinite(); }

void BodyModel::finalize() {
    const int n = static_cast<int>(num_vertices());
    sparse_.regressor.assign(kNumJoints, {});
    sparse_.skinning.assign(n, {});
    for (int j = 0; j < joint_regressor.rows(); ++j)
        for (int v = 0; v < joint_regressor.cols(); ++v)
            if (joint_regressor(j, v) != 0.0) sparse_.regressor[j].push_back({v, joint_regressor(j, v)});
    for (int v = 0; v < skinning_weights.rows(); ++v)
        for (int j = 0; j < skinning_weights.cols(); ++j)
            if (skinning_weights(v, j) != 0.0) sparse_.skinning[v].push_back({j, skinning_weights(v, j)});
}

void BodyModel::validate() const {
    const auto n = static_cast<Eigen::Index>(num_vertices());
    if (n == 0) throw ValidationError("body model: no vertices");
    if (joint_regressor.rows() != kNumJoints || joint_regressor.cols() != n)
        throw ValidationError("body model: joint regressor must be 22 x N");
    if (skinning_weights.rows() != n || skinning_weights.cols() != kNumJoints)
        throw ValidationError("body model: skinning weights must be N x 22");
    if (shape_blends.rows() != 3 * n || shape_blends.cols() != kShapeDim)
        throw ValidationError("body model: shape blends must be 3N x 10");
    for (const Face& f : faces)
        for (auto i : f)
            if (i >= num_vertices()) throw ValidationError("body model: face index out of range");
    for (int j = 0; j < kNumJoints; ++j)
        if (std::abs(joint_regressor.row(j).sum() - 1.0) > 1e-6)
            throw ValidationError("body model: joint regressor row " + std::to_string(j) + " does not sum to 1");
    for (Eigen::Index v = 0; v < n; ++v)
        if (std::abs(skinning_weights.row(v).sum() - 1.0) > 1e-6)
            throw ValidationError("body model: skinning row " + std::to_string(v) + " does not sum to 1");
    // Parents precede children, so the graph is a tree rooted at 0.
    if (parents[0] != -1) throw ValidationError("body model: joint 0 must be the root");
    for (int j = 1; j < kNumJoints; ++j)
        if (parents[j] < 0 || parents[j] >= j) throw ValidationError("body model: parents must precede children");
    std::array<int, kNumJoints> seen{};
    for (int j : lambda_joints) {
        if (j < 1 || j > kNumBodyJoints) throw ValidationError("body model: Lambda joint out of range");
        seen[j] |= 1;
    }
    for (const DeltaEntry& d : delta) {
        if (d.joint < 1 || d.joint > kNumBodyJoints || d.axis < 0 || d.axis > 2 || (d.sign != 1 && d.sign != -1))
            throw ValidationError("body model: malformed Delta entry");
        seen[d.joint] |= 2;
    }
    for (int j = 1; j < kNumJoints; ++j)
        if (seen[j] != 1 && seen[j] != 2)
            throw ValidationError(std::string("body model: Lambda and Delta must partition the joints (") +
                                  kJointNames[j] + ")");
}

template <class T>
BodyOutput<T> forward(const BodyModel& model, const BodyParamsT<T>& params) {
    const size_t n = model.num_vertices();
    const auto& sp = model.sparse();

    std::vector<Vec3T<T>> shaped(n);
    for (size_t v = 0; v < n; ++v) {
        Vec3T<T> p = model.template_vertices[v].template cast<T>();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < kShapeDim; ++b) {
                const double s = model.shape_blends(3 * v + a, b);
                if (s != 0.0) p[a] += s * params.phi[b];
            }
        shaped[v] = p;
    }

    std::array<Vec3T<T>, kNumJoints> rest;
    for (int j = 0; j < kNumJoints; ++j) {
        rest[j].setZero();
        for (auto [v, w] : sp.regressor[j]) rest[j] += w * shaped[v];
    }

    const auto theta_hat = decode_pose<T>(model, params.theta);
    // Skinning transform of joint j: x -> A_j (x - rest_j) + t_j.
    std::array<Mat3T<T>, kNumJoints> A;
    std::array<Vec3T<T>, kNumJoints> t;
    A[0].setIdentity();
    t[0] = rest[0];
    for (int j = 1; j < kNumJoints; ++j) {
        const int p = model.parents[j];
        const Vec3T<T> aa = theta_hat.row(j - 1).transpose();
        A[j] = A[p] * axis_angle_to_matrix<T>(aa);
        t[j] = A[p] * (rest[j] - rest[p]) + t[p];
    }

    const Mat3T<T> R = rot6d_to_matrix<T>(params.rot6d);
    std::vector<Vec3T<T>> posed(n);
    for (size_t v = 0; v < n; ++v) {
        posed[v].setZero();
        for (auto [j, w] : sp.skinning[v]) posed[v] += w * (A[j] * (shaped[v] - rest[j]) + t[j]);
    }
    // Regressing before the rigid transform is equivalent for row-stochastic
    // rows and keeps translation exact despite single-precision weights.
    BodyOutput<T> out;
    out.vertices.resize(n);
    for (size_t v = 0; v < n; ++v) out.vertices[v] = R * posed[v] + params.trans;
    for (int j = 0; j < kNumJoints; ++j) {
        Vec3T<T> acc = Vec3T<T>::Zero();
        for (auto [v, w] : sp.regressor[j]) acc += w * posed[v];
        out.joints[j] = R * acc + params.trans;
    }
    return out;
}

template BodyOutput<double> forward<double>(const BodyModel&, const BodyParamsT<double>&);
template BodyOutput<Jet51> forward<Jet51>(const BodyModel&, const BodyParamsT<Jet51>&);

}  // namespace hsi
