#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"
#include "hsi/common/error.hpp"
#include "hsi/metrics/metrics.hpp"

namespace hsi {

namespace {

BodyRow scan(const VertexSet& v, const SdfGrid& sdf) {
    if (v.empty()) throw ValidationError("metrics: body without vertices");
    BodyRow r;
    size_t outside = 0;
    r.min_sdf = std::numeric_limits<double>::infinity();
    for (const Vec3& p : v) {
        const double d = sdf.sample(p);
        outside += d > 0.0;
        r.contact |= d <= 0.0;
        r.min_sdf = std::min(r.min_sdf, d);
    }
    r.non_collision = static_cast<double>(outside) / v.size();
    return r;
}

}  // namespace

double non_collision(const std::vector<VertexSet>& bodies, const SdfGrid& sdf) {
    if (bodies.empty()) throw ValidationError("non_collision: no bodies");
    double s = 0;
    for (const auto& b : bodies) s += scan(b, sdf).non_collision;
    return s / bodies.size();
}

double contact(const std::vector<VertexSet>& bodies, const SdfGrid& sdf) {
    if (bodies.empty()) throw ValidationError("contact: no bodies");
    size_t n = 0;
    for (const auto& b : bodies) n += scan(b, sdf).contact;
    return static_cast<double>(n) / bodies.size();
}

Diversity diversity(const std::vector<BodyParams>& params, int n_clusters, std::uint64_t seed, int iterations) {
    if (n_clusters < 1) throw ValidationError("diversity: need at least one cluster");
    if (static_cast<int>(params.size()) < n_clusters)
        throw ValidationError("diversity: " + std::to_string(params.size()) + " samples for " +
                              std::to_string(n_clusters) + " clusters");
    constexpr int D = kLatentDim + kShapeDim;
    const int n = static_cast<int>(params.size());
    Eigen::MatrixXd X(n, D);
    for (int i = 0; i < n; ++i) {
        X.row(i).head<kLatentDim>() = params[i].theta.transpose();
        X.row(i).tail<kShapeDim>() = params[i].phi.transpose();
    }
    for (int d = 0; d < D; ++d) {
        const double mu = X.col(d).mean();
        const double sd = std::sqrt((X.col(d).array() - mu).square().mean());
        X.col(d).array() -= mu;
        if (sd > 0) X.col(d) /= sd;
    }

    // Seeding: one random sample, then repeatedly the sample farthest from
    // every chosen center (lowest index on ties).
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd C(n_clusters, D);
    C.row(0) = X.row(static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng)));
    Eigen::VectorXd dmin = (X.rowwise() - C.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < n_clusters; ++c) {
        Eigen::Index far = 0;
        dmin.maxCoeff(&far);
        C.row(c) = X.row(far);
        dmin = dmin.cwiseMin((X.rowwise() - C.row(c)).rowwise().squaredNorm());
    }

    std::vector<int> label(n, 0);
    auto assign = [&] {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = (X.row(i) - C.row(0)).squaredNorm();
            for (int c = 1; c < n_clusters; ++c) {
                const double d = (X.row(i) - C.row(c)).squaredNorm();
                if (d < bd) bd = d, best = c;
            }
            changed |= label[i] != best;
            label[i] = best;
        }
        return changed;
    };
    assign();
    for (int it = 0; it < iterations; ++it) {
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n_clusters, D);
        std::vector<int> count(n_clusters, 0);
        for (int i = 0; i < n; ++i) {
            sum.row(label[i]) += X.row(i);
            ++count[label[i]];
        }
        for (int c = 0; c < n_clusters; ++c)
            if (count[c] > 0) C.row(c) = sum.row(c) / count[c];  // empty clusters keep their center
        if (!assign()) break;
    }

    Diversity out;
    out.labels = label;
    std::vector<int> hist(n_clusters, 0);
    double dist = 0;
    for (int i = 0; i < n; ++i) {
        ++hist[label[i]];
        dist += (X.row(i) - C.row(label[i])).norm();
    }
    for (int h : hist)
        if (h > 0) {
            const double p = static_cast<double>(h) / n;
            out.entropy -= p * std::log2(p);
        }
    out.entropy = std::max(0.0, out.entropy);
    out.cluster_size = dist / n;
    return out;
}

EvalReport evaluate(const BodyModel& model, const std::vector<BodyParams>& params, const SdfGrid& sdf, int n_clusters,
                    std::uint64_t seed) {
    if (params.empty()) throw ValidationError("evaluate: no bodies");
    EvalReport r;
    r.n_clusters = n_clusters;
    double nc = 0, ct = 0;
    for (size_t i = 0; i < params.size(); ++i) {
        BodyRow row = scan(forward<double>(model, params[i]).vertices, sdf);
        row.index = static_cast<int>(i);
        nc += row.non_collision;
        ct += row.contact;
        r.bodies.push_back(row);
    }
    r.non_collision = nc / params.size();
    r.contact = ct / params.size();
    if (static_cast<int>(params.size()) >= n_clusters) {
        const Diversity d = diversity(params, n_clusters, seed);
        r.entropy = d.entropy;
        r.cluster_size = d.cluster_size;
    }
    return r;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }
std::optional<double> opt(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

}  // namespace

void save_report_json(const EvalReport& r, const std::string& path) {
    nlohmann::json j = {{"format", "hsi.eval_report"},
                        {"version", 1},
                        {"non_collision", r.non_collision},
                        {"contact", r.contact},
                        {"entropy", opt(r.entropy)},
                        {"cluster_size", opt(r.cluster_size)},
                        {"clip_score", opt(r.clip_score)},
                        {"n_clusters", r.n_clusters}};
    j["bodies"] = nlohmann::json::array();
    for (const BodyRow& b : r.bodies)
        j["bodies"].push_back({{"index", b.index}, {"non_collision", b.non_collision}, {"contact", b.contact}, {"min_sdf", b.min_sdf}});
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << j.dump(2) << '\n';
}

EvalReport load_report_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    try {
        if (j.at("format") != "hsi.eval_report") throw ValidationError(path + ": not an evaluation report");
        if (j.at("version") != 1) throw ValidationError(path + ": unsupported report version");
        EvalReport r;
        r.non_collision = j.at("non_collision").get<double>();
        r.contact = j.at("contact").get<double>();
        r.entropy = opt(j.value("entropy", nlohmann::json()));
        r.cluster_size = opt(j.value("cluster_size", nlohmann::json()));
        r.clip_score = opt(j.value("clip_score", nlohmann::json()));
        r.n_clusters = j.value("n_clusters", 20);
        for (const auto& b : j.at("bodies"))
            r.bodies.push_back({b.at("index").get<int>(), b.at("non_collision").get<double>(), b.at("contact").get<bool>(),
                                b.at("min_sdf").get<double>()});
        for (double v : {r.non_collision, r.contact})
            if (!(v >= 0 && v <= 1)) throw ValidationError(path + ": ratio outside [0, 1]");
        if (r.clip_score && !(*r.clip_score >= -1 && *r.clip_score <= 1))
            throw ValidationError(path + ": clip_score outside [-1, 1]");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void save_report_csv(const EvalReport& r, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << std::setprecision(17);
    auto o = [](const std::optional<double>& v) {
        std::ostringstream s;
        s << std::setprecision(17);
        if (v) s << *v;
        return s.str();
    };
    f << "body,non_collision,contact,min_sdf,entropy,cluster_size,clip_score\n";
    for (const BodyRow& b : r.bodies) f << b.index << ',' << b.non_collision << ',' << (b.contact ? 1 : 0) << ',' << b.min_sdf << ",,,\n";
    f << "mean," << r.non_collision << ',' << r.contact << ",," << o(r.entropy) << ',' << o(r.cluster_size) << ','
      << o(r.clip_score) << '\n';
}

}  // namespace hsi
