#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hsi/body/rotation.hpp"
#include "hsi/common/scalar.hpp"
#include "hsi/geometry/types.hpp"

namespace hsi {

inline constexpr int kNumJoints = 22;      // pelvis + 21 body joints
inline constexpr int kNumBodyJoints = 21;
inline constexpr int kLatentDim = 32;
inline constexpr int kShapeDim = 10;
inline constexpr int kNumParams = 6 + 3 + kLatentDim + kShapeDim;  // 51

// Offsets into the flat parameter vector.
inline constexpr int kRotOffset = 0;
inline constexpr int kTransOffset = 6;
inline constexpr int kThetaOffset = 9;
inline constexpr int kPhiOffset = 41;

using Jet51 = ceres::Jet<double, kNumParams>;

extern const std::array<const char*, kNumJoints> kJointNames;

template <class T>
struct BodyParamsT {
    Eigen::Matrix<T, 6, 1> rot6d;
    Eigen::Matrix<T, 3, 1> trans;
    Eigen::Matrix<T, kLatentDim, 1> theta;
    Eigen::Matrix<T, kShapeDim, 1> phi;

    BodyParamsT() {
        rot6d << T(1.0), T(0.0), T(0.0), T(0.0), T(1.0), T(0.0);
        trans.setZero();
        theta.setZero();
        phi.setZero();
    }
};

using BodyParams = BodyParamsT<double>;

Eigen::Matrix<double, kNumParams, 1> to_vector(const BodyParams& p);
BodyParams from_vector(const Eigen::Matrix<double, kNumParams, 1>& x);

// Seeds every parameter with its own derivative slot.
BodyParamsT<Jet51> to_jets(const BodyParams& p);

bool all_finite(const BodyParams& p);

// One entry of the hinge table: penalize s * theta_hat[joint][axis] > 0.
struct DeltaEntry {
    int joint = 1;  // 1..21
    int axis = 0;   // 0 = x, 1 = y, 2 = z
    int sign = 1;   // +1 or -1
    bool operator==(const DeltaEntry&) const = default;
};

struct BodyModel {
    std::vector<Vec3> template_vertices;
    std::vector<Face> faces;
    Eigen::MatrixXd joint_regressor;  // 22 x N, rows sum to 1
    std::array<int, kNumJoints> parents{};  // parents[0] = -1
    Eigen::MatrixXd skinning_weights;  // N x 22, rows sum to 1
    Eigen::MatrixXd shape_blends;      // 3N x 10, rows (3n + axis)
    Eigen::Matrix<double, 3 * kNumBodyJoints, kLatentDim> pose_decoder;
    std::vector<int> lambda_joints;    // subset of 1..21
    std::vector<DeltaEntry> delta;

    size_t num_vertices() const { return template_vertices.size(); }

    // Throws ValidationError when any structural invariant fails.
    void validate() const;

    // Sparse views of the dense matrices, built by finalize().
    struct Sparse {
        std::vector<std::vector<std::pair<int, double>>> regressor;  // per joint
        std::vector<std::vector<std::pair<int, double>>> skinning;   // per vertex
    };
    const Sparse& sparse() const { return sparse_; }
    void finalize();

private:
    Sparse sparse_;
};

template <class T>
struct BodyOutput {
    std::vector<Vec3T<T>> vertices;
    std::array<Vec3T<T>, kNumJoints> joints;
};

// theta_hat rows are the 21 non-root joints (row r is joint r + 1).
template <class T>
Eigen::Matrix<T, kNumBodyJoints, 3> decode_pose(const BodyModel& model, const Eigen::Matrix<T, kLatentDim, 1>& theta) {
    const Eigen::Matrix<T, 3 * kNumBodyJoints, 1> flat = model.pose_decoder.template cast<T>() * theta;
    Eigen::Matrix<T, kNumBodyJoints, 3> out;
    for (int j = 0; j < kNumBodyJoints; ++j)
        for (int a = 0; a < 3; ++a) out(j, a) = flat[3 * j + a];
    return out;
}

// Sum of |.| over Lambda joints plus hinges over the Delta table; the
// subgradient at 0 is 0.
template <class T>
T joint_angle_prior(const BodyModel& model, const Eigen::Matrix<T, kNumBodyJoints, 3>& theta_hat) {
    T e(0.0);
    for (int j : model.lambda_joints)
        for (int a = 0; a < 3; ++a) {
            const T& v = theta_hat(j - 1, a);
            if (value_of(v) > 0) e += v;
            else if (value_of(v) < 0) e -= v;
        }
    for (const DeltaEntry& d : model.delta) {
        const T v = T(static_cast<double>(d.sign)) * theta_hat(d.joint - 1, d.axis);
        if (value_of(v) > 0) e += v;
    }
    return e;
}

// Blend shapes, forward kinematics, linear blend skinning, then the global
// rotation about the origin and translation. Joints are regressed from the
// posed vertices (before the rigid part, which commutes). Instantiated for double and Jet51.
template <class T>
BodyOutput<T> forward(const BodyModel& model, const BodyParamsT<T>& params);

// Procedural capsule-person test body: ~650 vertices, z up, facing +y, pelvis
// at the origin, arms out to the sides. Its arrays are rounded to single
// precision so the asset file round-trips exactly.
BodyModel capsule_person();

// Asset container: binary arrays plus a text manifest with Lambda and Delta.
// The manifest sits next to the binary at path + ".manifest".
void save_body_model(const BodyModel& model, const std::string& path);
BodyModel load_body_model(const std::string& path);

// Default Lambda set (head, feet, wrists) and Delta sign table.
std::vector<int> default_lambda_joints();
std::vector<DeltaEntry> default_delta_table();

}  // namespace hsi
