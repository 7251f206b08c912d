#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hsi/common/error.hpp"
#include "hsi/scene/mesh.hpp"

namespace hsi {

namespace {

std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return {};
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

long parse_obj_index(const std::string& token, size_t nverts, const std::string& path, size_t line) {
    const auto slash = token.find('/');
    const std::string head = token.substr(0, slash);
    long idx = 0;
    try {
        idx = std::stol(head);
    } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(line) + ": bad face index '" + token + "'");
    }
    if (idx < 0) idx = static_cast<long>(nverts) + idx;
    else idx -= 1;
    if (idx < 0) throw IoError(path + ":" + std::to_string(line) + ": face index out of range");
    return idx;
}

enum class PlyType { I8, U8, I16, U16, I32, U32, F32, F64 };

PlyType ply_type(const std::string& s, const std::string& path) {
    if (s == "char" || s == "int8") return PlyType::I8;
    if (s == "uchar" || s == "uint8") return PlyType::U8;
    if (s == "short" || s == "int16") return PlyType::I16;
    if (s == "ushort" || s == "uint16") return PlyType::U16;
    if (s == "int" || s == "int32") return PlyType::I32;
    if (s == "uint" || s == "uint32") return PlyType::U32;
    if (s == "float" || s == "float32") return PlyType::F32;
    if (s == "double" || s == "float64") return PlyType::F64;
    throw IoError(path + ": unknown PLY type '" + s + "'");
}

size_t ply_size(PlyType t) {
    switch (t) {
        case PlyType::I8:
        case PlyType::U8: return 1;
        case PlyType::I16:
        case PlyType::U16: return 2;
        case PlyType::I32:
        case PlyType::U32:
        case PlyType::F32: return 4;
        case PlyType::F64: return 8;
    }
    return 0;
}

template <class T>
T read_raw(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

double read_ply_value(std::istream& in, PlyType t) {
    switch (t) {
        case PlyType::I8: return read_raw<std::int8_t>(in);
        case PlyType::U8: return read_raw<std::uint8_t>(in);
        case PlyType::I16: return read_raw<std::int16_t>(in);
        case PlyType::U16: return read_raw<std::uint16_t>(in);
        case PlyType::I32: return read_raw<std::int32_t>(in);
        case PlyType::U32: return read_raw<std::uint32_t>(in);
        case PlyType::F32: return read_raw<float>(in);
        case PlyType::F64: return read_raw<double>(in);
    }
    return 0;
}

struct PlyProperty {
    std::string name;
    bool is_list = false;
    PlyType count_type = PlyType::U8;
    PlyType type = PlyType::F32;
};

struct PlyElement {
    std::string name;
    size_t count = 0;
    std::vector<PlyProperty> props;
};

}  // namespace

TriMesh load_mesh(const std::string& path) {
    const auto ext = lower_ext(path);
    if (ext == "obj") return load_obj(path);
    if (ext == "ply") return load_ply(path);
    throw IoError(path + ": unsupported mesh extension (expected .obj or .ply)");
}

TriMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    TriMesh mesh;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z)) throw IoError(path + ":" + std::to_string(lineno) + ": malformed vertex");
            mesh.vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<long> idx;
            std::string tok;
            while (ss >> tok) idx.push_back(parse_obj_index(tok, mesh.vertices.size(), path, lineno));
            if (idx.size() < 3) throw IoError(path + ":" + std::to_string(lineno) + ": face with fewer than 3 vertices");
            for (size_t k = 1; k + 1 < idx.size(); ++k)
                mesh.faces.push_back({static_cast<std::uint32_t>(idx[0]), static_cast<std::uint32_t>(idx[k]),
                                      static_cast<std::uint32_t>(idx[k + 1])});
        }
    }
    clean_mesh(mesh);
    return mesh;
}

TriMesh load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    std::getline(in, line);
    if (line.rfind("ply", 0) != 0) throw IoError(path + ": missing 'ply' magic");

    std::vector<PlyElement> elements;
    bool binary_le = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::string kw;
        ss >> kw;
        if (kw == "format") {
            std::string fmt;
            ss >> fmt;
            binary_le = fmt == "binary_little_endian";
        } else if (kw == "element") {
            PlyElement e;
            ss >> e.name >> e.count;
            elements.push_back(e);
        } else if (kw == "property") {
            if (elements.empty()) throw IoError(path + ": property before element");
            PlyProperty p;
            std::string t;
            ss >> t;
            if (t == "list") {
                std::string ct, it;
                ss >> ct >> it >> p.name;
                p.is_list = true;
                p.count_type = ply_type(ct, path);
                p.type = ply_type(it, path);
            } else {
                p.type = ply_type(t, path);
                ss >> p.name;
            }
            elements.back().props.push_back(p);
        } else if (kw == "end_header") {
            break;
        }
    }
    if (!binary_le) throw IoError(path + ": only binary_little_endian PLY is supported");

    TriMesh mesh;
    for (const auto& e : elements) {
        if (e.name == "vertex") {
            int ix = -1, iy = -1, iz = -1;
            for (size_t k = 0; k < e.props.size(); ++k) {
                if (e.props[k].name == "x") ix = static_cast<int>(k);
                if (e.props[k].name == "y") iy = static_cast<int>(k);
                if (e.props[k].name == "z") iz = static_cast<int>(k);
            }
            if (ix < 0 || iy < 0 || iz < 0) throw IoError(path + ": vertex element lacks x/y/z");
            mesh.vertices.reserve(e.count);
            std::vector<double> vals(e.props.size());
            for (size_t i = 0; i < e.count; ++i) {
                for (size_t k = 0; k < e.props.size(); ++k) {
                    if (e.props[k].is_list) throw IoError(path + ": list property on vertex element");
                    vals[k] = read_ply_value(in, e.props[k].type);
                }
                mesh.vertices.emplace_back(vals[ix], vals[iy], vals[iz]);
            }
        } else if (e.name == "face") {
            for (size_t i = 0; i < e.count; ++i) {
                for (const auto& p : e.props) {
                    if (!p.is_list) {
                        read_ply_value(in, p.type);
                        continue;
                    }
                    const auto n = static_cast<size_t>(read_ply_value(in, p.count_type));
                    std::vector<std::uint32_t> idx(n);
                    for (auto& v : idx) v = static_cast<std::uint32_t>(read_ply_value(in, p.type));
                    if (p.name != "vertex_indices" && p.name != "vertex_index") continue;
                    if (n < 3) throw IoError(path + ": face with fewer than 3 vertices");
                    for (size_t k = 1; k + 1 < n; ++k) mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
                }
            }
        } else {
            for (const auto& p : e.props)
                if (p.is_list) throw IoError(path + ": cannot skip list property in element '" + e.name + "'");
            size_t stride = 0;
            for (const auto& p : e.props) stride += ply_size(p.type);
            in.seekg(static_cast<std::streamoff>(stride * e.count), std::ios::cur);
        }
        if (!in) throw IoError(path + ": truncated PLY body");
    }
    clean_mesh(mesh);
    return mesh;
}

void save_obj(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

void save_ply(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "ply\nformat binary_little_endian 1.0\n"
        << "element vertex " << mesh.vertices.size() << "\n"
        << "property double x\nproperty double y\nproperty double z\n"
        << "element face " << mesh.faces.size() << "\n"
        << "property list uchar uint vertex_indices\nend_header\n";
    for (const auto& v : mesh.vertices)
        for (int k = 0; k < 3; ++k) {
            const double d = v[k];
            out.write(reinterpret_cast<const char*>(&d), sizeof d);
        }
    for (const auto& f : mesh.faces) {
        const std::uint8_t n = 3;
        out.write(reinterpret_cast<const char*>(&n), 1);
        out.write(reinterpret_cast<const char*>(f.data()), 3 * sizeof(std::uint32_t));
    }
}

}  // namespace hsi
