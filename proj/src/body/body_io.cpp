#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hsi/body/body_model.hpp"
#include "hsi/common/error.hpp"

namespace hsi {

namespace {

constexpr char kMagic[4] = {'H', 'B', 'D', 'Y'};
constexpr std::uint32_t kVersion = 1;
const char* const kAxisNames = "xyz";

template <class T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::string& path) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("body asset truncated: " + path);
    return v;
}

int joint_by_name(const std::string& name) {
    for (int j = 0; j < kNumJoints; ++j)
        if (name == kJointNames[j]) return j;
    throw ValidationError("unknown joint name in manifest: " + name);
}

}  // namespace

void save_body_model(const BodyModel& model, const std::string& path) {
    model.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write body asset: " + path);
    const auto n = static_cast<std::uint32_t>(model.num_vertices());
    out.write(kMagic, 4);
    put(out, kVersion);
    for (std::uint32_t c : {n, static_cast<std::uint32_t>(model.faces.size()), std::uint32_t(kNumJoints),
                            std::uint32_t(kNumBodyJoints), std::uint32_t(kLatentDim), std::uint32_t(kShapeDim)})
        put(out, c);
    for (const Vec3& v : model.template_vertices)
        for (int a = 0; a < 3; ++a) put(out, static_cast<float>(v[a]));
    for (const Face& f : model.faces)
        for (auto i : f) put(out, i);
    for (int j = 0; j < kNumJoints; ++j)
        for (std::uint32_t v = 0; v < n; ++v) put(out, static_cast<float>(model.joint_regressor(j, v)));
    for (int p : model.parents) put(out, static_cast<std::int32_t>(p));
    for (std::uint32_t v = 0; v < n; ++v)
        for (int j = 0; j < kNumJoints; ++j) put(out, static_cast<float>(model.skinning_weights(v, j)));
    for (std::uint32_t r = 0; r < 3 * n; ++r)
        for (int k = 0; k < kShapeDim; ++k) put(out, static_cast<float>(model.shape_blends(r, k)));
    for (int r = 0; r < 3 * kNumBodyJoints; ++r)
        for (int c = 0; c < kLatentDim; ++c) put(out, static_cast<float>(model.pose_decoder(r, c)));
    if (!out) throw IoError("failed writing body asset: " + path);

    std::ofstream man(path + ".manifest");
    if (!man) throw IoError("cannot write body manifest: " + path + ".manifest");
    man << "# body asset manifest v1\n";
    man << "binary " << std::filesystem::path(path).filename().string() << "\n";
    man << "lambda";
    for (int j : model.lambda_joints) man << ' ' << kJointNames[j];
    man << "\n";
    for (const DeltaEntry& d : model.delta)
        man << "delta " << kJointNames[d.joint] << ' ' << kAxisNames[d.axis] << ' ' << (d.sign > 0 ? "+1" : "-1") << "\n";
}

BodyModel load_body_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open body asset: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw IoError("not a body asset: " + path);
    if (get<std::uint32_t>(in, path) != kVersion) throw IoError("unsupported body asset version: " + path);
    const auto n = get<std::uint32_t>(in, path);
    const auto nf = get<std::uint32_t>(in, path);
    if (get<std::uint32_t>(in, path) != kNumJoints || get<std::uint32_t>(in, path) != kNumBodyJoints ||
        get<std::uint32_t>(in, path) != kLatentDim || get<std::uint32_t>(in, path) != kShapeDim)
        throw ValidationError("body asset dimensions do not match 22 joints / 32 latent / 10 shape: " + path);
    if (n == 0 || n > (1u << 24) || nf > (1u << 26)) throw ValidationError("implausible body asset counts: " + path);

    BodyModel m;
    m.template_vertices.resize(n);
    for (auto& v : m.template_vertices)
        for (int a = 0; a < 3; ++a) v[a] = get<float>(in, path);
    m.faces.resize(nf);
    for (auto& f : m.faces)
        for (auto& i : f) i = get<std::uint32_t>(in, path);
    m.joint_regressor.resize(kNumJoints, n);
    for (int j = 0; j < kNumJoints; ++j)
        for (std::uint32_t v = 0; v < n; ++v) m.joint_regressor(j, v) = get<float>(in, path);
    for (int& p : m.parents) p = get<std::int32_t>(in, path);
    m.skinning_weights.resize(n, kNumJoints);
    for (std::uint32_t v = 0; v < n; ++v)
        for (int j = 0; j < kNumJoints; ++j) m.skinning_weights(v, j) = get<float>(in, path);
    m.shape_blends.resize(3 * n, kShapeDim);
    for (std::uint32_t r = 0; r < 3 * n; ++r)
        for (int k = 0; k < kShapeDim; ++k) m.shape_blends(r, k) = get<float>(in, path);
    for (int r = 0; r < 3 * kNumBodyJoints; ++r)
        for (int c = 0; c < kLatentDim; ++c) m.pose_decoder(r, c) = get<float>(in, path);
    if (in.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes in body asset: " + path);

    std::ifstream man(path + ".manifest");
    if (!man) throw IoError("missing body manifest: " + path + ".manifest");
    std::string line;
    while (std::getline(man, line)) {
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key) || key[0] == '#') continue;
        if (key == "binary") continue;
        if (key == "lambda") {
            std::string name;
            while (ls >> name) m.lambda_joints.push_back(joint_by_name(name));
        } else if (key == "delta") {
            std::string name, axis;
            int sign = 0;
            if (!(ls >> name >> axis >> sign) || axis.size() != 1 || !std::strchr(kAxisNames, axis[0]))
                throw ValidationError("malformed delta line in manifest: " + line);
            m.delta.push_back({joint_by_name(name), static_cast<int>(std::strchr(kAxisNames, axis[0]) - kAxisNames), sign});
        } else {
            throw ValidationError("unknown manifest key: " + key);
        }
    }
    m.finalize();
    m.validate();
    return m;
}

}  // namespace hsi
