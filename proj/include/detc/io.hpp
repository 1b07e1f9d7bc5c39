#pragma once

#include "detc/codesign.hpp"
#include "detc/dar.hpp"
#include "detc/sim.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

// File formats: DAR model files, persisted designs, trace/batch CSV and run
// manifests. All JSON matrices are written row-major with explicit
// dimensions so files stay language-neutral.

namespace detc {

inline constexpr const char *kToolVersion = "0.1.0";

namespace io {

using nlohmann::json;

// --- small helpers ---------------------------------------------------------

inline json matrix_rows(const Matrix &M) {
    json rows = json::array();
    for (int r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < M.cols(); ++c)
            row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

inline Matrix rows_to_matrix(const json &j, const std::string &field) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw ValidationError("field '" + field +
                              "' must be a 2-D array of numbers");
    const std::size_t cols = j.front().size();
    Matrix M(static_cast<Eigen::Index>(j.size()),
             static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != cols)
            throw ValidationError("field '" + field +
                                  "' has ragged rows");
        for (std::size_t c = 0; c < cols; ++c)
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                j[r][c].get<double>();
    }
    return M;
}

inline json matrix_flat(const Matrix &M) {
    json out;
    out["rows"] = M.rows();
    out["cols"] = M.cols();
    json data = json::array();
    for (int r = 0; r < M.rows(); ++r)
        for (int c = 0; c < M.cols(); ++c)
            data.push_back(M(r, c));
    out["data"] = data;
    return out;
}

inline Matrix flat_to_matrix(const json &j, const std::string &field) {
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    const auto &data = j.at("data");
    if (static_cast<int>(data.size()) != rows * cols)
        throw ValidationError("field '" + field +
                              "': data length does not match rows*cols");
    Matrix M(rows, cols);
    int t = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            M(r, c) = data[t++].get<double>();
    return M;
}

inline json vector_flat(const Vector &v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i)
        out.push_back(v(i));
    return out;
}

inline Vector flat_to_vector(const json &j, const std::string &field) {
    if (!j.is_array())
        throw ValidationError("field '" + field + "' must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

/// FNV-1a over the raw file bytes; good enough to pin a model to a run.
inline std::string fnv1a_hex(const std::string &bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(16) << h;
    return os.str();
}

inline std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write file: " + path);
    out << content;
}

inline std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

// --- model files -----------------------------------------------------------

inline AffineMatrix affine_from_json(const json &j, const std::string &name) {
    AffineMatrix M(rows_to_matrix(j.at("base"), name + ".base"));
    if (j.contains("terms"))
        for (const auto &t : j.at("terms"))
            M.add_term(t.at("j").get<int>(),
                       rows_to_matrix(t.at("coeff"), name + ".terms.coeff"));
    return M;
}

inline json affine_to_json(const AffineMatrix &M) {
    json j;
    j["base"] = matrix_rows(M.base());
    if (!M.terms().empty()) {
        json terms = json::array();
        for (const auto &[idx, coeff] : M.terms())
            terms.push_back({{"j", idx}, {"coeff", matrix_rows(coeff)}});
        j["terms"] = terms;
    }
    return j;
}

inline DarModel model_from_json(const json &j) {
    DarModel model;
    try {
        model.n = j.at("n").get<int>();
        model.m = j.at("m").get<int>();
        model.p = j.at("p").get<int>();
        for (const auto &s : j.at("scheduling")) {
            SchedulingVariable v;
            v.c = flat_to_vector(s.at("c"), "scheduling.c");
            v.d = s.value("d", 0.0);
            v.lower = s.at("lower").get<double>();
            v.upper = s.at("upper").get<double>();
            model.scheduling.push_back(std::move(v));
        }
        model.A1 = affine_from_json(j.at("A1"), "A1");
        model.A2 = affine_from_json(j.at("A2"), "A2");
        model.A3 = affine_from_json(j.at("A3"), "A3");
        model.Omega1 = affine_from_json(j.at("Omega1"), "Omega1");
        model.Omega2 = affine_from_json(j.at("Omega2"), "Omega2");
        model.Omega3 = affine_from_json(j.at("Omega3"), "Omega3");
        for (const auto &b : j.at("domain_b"))
            model.domain_b.push_back(flat_to_vector(b, "domain_b"));
    } catch (const json::exception &e) {
        throw ValidationError(std::string("model schema error: ") + e.what());
    }
    model.validate();
    return model;
}

inline json model_to_json(const DarModel &model) {
    json j;
    j["n"] = model.n;
    j["m"] = model.m;
    j["p"] = model.p;
    json sched = json::array();
    for (const auto &s : model.scheduling)
        sched.push_back({{"c", vector_flat(s.c)},
                         {"d", s.d},
                         {"lower", s.lower},
                         {"upper", s.upper}});
    j["scheduling"] = sched;
    j["A1"] = affine_to_json(model.A1);
    j["A2"] = affine_to_json(model.A2);
    j["A3"] = affine_to_json(model.A3);
    j["Omega1"] = affine_to_json(model.Omega1);
    j["Omega2"] = affine_to_json(model.Omega2);
    j["Omega3"] = affine_to_json(model.Omega3);
    json dom = json::array();
    for (const auto &b : model.domain_b)
        dom.push_back(vector_flat(b));
    j["domain_b"] = dom;
    return j;
}

inline DarModel load_model(const std::string &path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error &e) {
        throw ValidationError("parse error in " + path + ": " + e.what());
    }
    return model_from_json(j);
}

// --- designs ----------------------------------------------------------------

inline json design_to_json(const EtcDesign &d) {
    json j;
    j["format"] = "detc-design/1";
    j["mode"] = d.mode == DesignMode::op1 ? "op1" : "op2";
    j["n"] = d.n;
    j["m"] = d.m;
    j["p"] = d.p;
    j["r"] = d.r;
    json K = json::array(), L = json::array();
    for (const auto &k : d.K)
        K.push_back(matrix_flat(k));
    for (const auto &l : d.L)
        L.push_back(matrix_flat(l));
    j["K"] = K;
    j["L"] = L;
    j["Qx"] = matrix_flat(d.Qx);
    j["Qe"] = matrix_flat(d.Qe);
    if (d.mode == DesignMode::op1) {
        j["Qpi"] = matrix_flat(d.Qpi);
        j["Qdelta"] = matrix_flat(d.Qdelta);
    }
    j["P"] = matrix_flat(d.P);
    j["Z"] = matrix_flat(d.Z);
    j["X"] = matrix_flat(d.X);
    j["lambda"] = d.lambda;
    j["theta"] = d.theta;
    j["eta0"] = d.eta0;
    j["sigma"] = d.sigma;
    j["epsilon"] = d.epsilon;
    j["Lambda_metric"] = d.Lambda_metric;
    json tilde;
    for (const auto &[name, M] : d.tilde)
        tilde[name] = matrix_flat(M);
    j["tilde"] = tilde;
    return j;
}

inline EtcDesign design_from_json(const json &j) {
    if (j.value("format", "") != "detc-design/1")
        throw ValidationError("unrecognized design format");
    EtcDesign d;
    d.mode = j.at("mode").get<std::string>() == "op1" ? DesignMode::op1
                                                      : DesignMode::op2;
    d.n = j.at("n").get<int>();
    d.m = j.at("m").get<int>();
    d.p = j.at("p").get<int>();
    d.r = j.at("r").get<int>();
    for (const auto &k : j.at("K"))
        d.K.push_back(flat_to_matrix(k, "K"));
    for (const auto &l : j.at("L"))
        d.L.push_back(flat_to_matrix(l, "L"));
    d.Qx = flat_to_matrix(j.at("Qx"), "Qx");
    d.Qe = flat_to_matrix(j.at("Qe"), "Qe");
    if (d.mode == DesignMode::op1) {
        d.Qpi = flat_to_matrix(j.at("Qpi"), "Qpi");
        d.Qdelta = flat_to_matrix(j.at("Qdelta"), "Qdelta");
    } else {
        d.Qpi.resize(0, 0);
        d.Qdelta.resize(0, 0);
    }
    d.P = flat_to_matrix(j.at("P"), "P");
    d.Z = flat_to_matrix(j.at("Z"), "Z");
    d.X = flat_to_matrix(j.at("X"), "X");
    d.lambda = j.at("lambda").get<double>();
    d.theta = j.at("theta").get<double>();
    d.eta0 = j.at("eta0").get<double>();
    d.sigma = j.at("sigma").get<double>();
    d.epsilon = j.at("epsilon").get<double>();
    d.Lambda_metric = j.at("Lambda_metric").get<double>();
    if (j.contains("tilde"))
        for (const auto &[name, M] : j.at("tilde").items())
            d.tilde[name] = flat_to_matrix(M, "tilde." + name);
    d.validate();
    return d;
}

inline EtcDesign load_design(const std::string &path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error &e) {
        throw ValidationError("parse error in " + path + ": " + e.what());
    }
    return design_from_json(j);
}

// --- CSV --------------------------------------------------------------------

inline std::string trace_csv(const SimTrace &trace, int n, int m) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "k";
    for (int i = 1; i <= n; ++i)
        os << ",x" << i;
    for (int i = 1; i <= m; ++i)
        os << ",u" << i;
    os << ",eta,gamma,event,V,W\n";
    for (const auto &s : trace.steps) {
        os << s.k;
        for (int i = 0; i < n; ++i)
            os << "," << s.x(i);
        for (int i = 0; i < m; ++i)
            os << "," << s.u(i);
        os << "," << s.eta << "," << s.gamma << "," << (s.event ? 1 : 0)
           << "," << s.V << "," << s.W << "\n";
    }
    return os.str();
}

inline std::string batch_csv(const BatchResult &batch, int n) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "run";
    for (int i = 1; i <= n; ++i)
        os << ",x0_" << i;
    os << ",events\n";
    for (const auto &r : batch.runs) {
        os << r.run;
        for (int i = 0; i < n; ++i)
            os << "," << r.x0(i);
        os << "," << r.events << "\n";
    }
    return os.str();
}

inline std::string pareto_csv(const std::vector<ParetoPoint> &points) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "epsilon,sigma,status,Lambda\n";
    for (const auto &pt : points) {
        os << pt.epsilon << ",";
        if (is_usable(pt.status))
            os << pt.sigma;
        os << "," << to_string(pt.status) << ",";
        if (is_usable(pt.status))
            os << pt.Lambda_metric;
        os << "\n";
    }
    return os.str();
}

// --- run manifests -----------------------------------------------------------

struct RunManifest {
    std::string command;
    std::string model_path, model_hash;
    std::string design_path;
    json settings;
    std::vector<std::string> outputs;
};

inline json manifest_to_json(const RunManifest &m) {
    json j;
    j["tool"] = "detc";
    j["tool_version"] = kToolVersion;
    j["command"] = m.command;
    j["model"] = {{"path", m.model_path}, {"fnv1a64", m.model_hash}};
    if (!m.design_path.empty())
        j["design_path"] = m.design_path;
    j["settings"] = m.settings;
    j["outputs"] = m.outputs;
    j["timestamp_utc"] = timestamp_utc();
    return j;
}

/// Write `<output>.manifest.json` next to a produced file.
inline void write_manifest(const RunManifest &m, const std::string &output) {
    write_file(output + ".manifest.json", manifest_to_json(m).dump(2) + "\n");
}

} // namespace io
} // namespace detc
