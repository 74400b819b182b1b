#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "piclab/cone.hpp"
#include "piclab/curvature_tensor.hpp"
#include "piclab/errors.hpp"
#include "piclab/flow.hpp"
#include "piclab/frame.hpp"
#include "piclab/sampler.hpp"
#include "piclab/verify.hpp"

namespace piclab::io {

/// Decimal with 17 significant digits: enough to round-trip any double.
inline std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

// ------------------------------------------------------------
// Tensor JSON: {"n": int, "entries": [[i,j,k,l,value], ...]}
// Writer emits the canonical nonzero entries (i<j, k<l, (i,j) <= (k,l))
// sorted lexicographically; reader accepts any index representative.
// ------------------------------------------------------------

inline std::string tensor_to_json(const CurvatureTensor& r) {
    const int n = r.dim;
    std::ostringstream os;
    os << "{\"n\": " << n << ", \"entries\": [";
    bool first = true;
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            for (int k = i; k <= n; ++k)
                for (int l = k + 1; l <= n; ++l) {
                    if (k == i && l < j) continue;  // keep (i,j) <= (k,l)
                    const double v = r.m(pair_index(n, i, j), pair_index(n, k, l));
                    if (v == 0.0) continue;
                    if (!first) os << ", ";
                    first = false;
                    os << '[' << i << ", " << j << ", " << k << ", " << l << ", " << g17(v)
                       << ']';
                }
    os << "]}";
    return os.str();
}

inline CurvatureTensor tensor_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("tensor JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("n") || !j.contains("entries"))
        throw ParseError("tensor JSON needs object with \"n\" and \"entries\"");
    if (!j["n"].is_number_integer()) throw ParseError("tensor JSON: \"n\" must be an integer");
    const int n = j["n"].get<int>();
    if (!j["entries"].is_array()) throw ParseError("tensor JSON: \"entries\" must be an array");
    std::vector<TensorEntry> entries;
    for (const auto& e : j["entries"]) {
        if (!e.is_array() || e.size() != 5)
            throw ParseError("tensor JSON: each entry must be [i,j,k,l,value]");
        for (int c = 0; c < 4; ++c)
            if (!e[c].is_number_integer())
                throw ParseError("tensor JSON: entry indices must be integers");
        if (!e[4].is_number()) throw ParseError("tensor JSON: entry value must be a number");
        entries.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>(), e[3].get<int>(),
                           e[4].get<double>()});
    }
    return make_tensor(n, entries);
}

// ------------------------------------------------------------
// Certificates, campaign reports, constants
// ------------------------------------------------------------

inline std::string frame_to_json(const Frame& f) {
    std::ostringstream os;
    os << '[';
    for (int c = 0; c < 4; ++c) {
        if (c) os << ", ";
        os << '[';
        for (int i = 0; i < f.e.rows(); ++i) {
            if (i) os << ", ";
            os << g17(f.e(i, c));
        }
        os << ']';
    }
    os << ']';
    return os.str();
}

inline std::string certificate_to_json(const MarginCertificate& c) {
    std::ostringstream os;
    os << "{\"value\": " << g17(c.value) << ", \"frame\": " << frame_to_json(c.frame)
       << ", \"lambda\": " << g17(c.frame.lambda) << ", \"mu\": " << g17(c.frame.mu)
       << ", \"restarts\": " << c.restarts
       << ", \"converged_restarts\": " << c.converged_restarts
       << ", \"tolerance\": " << g17(c.tolerance) << ", \"seed\": " << c.seed << "}";
    return os.str();
}

inline std::string config_to_json(const CampaignConfig& cfg) {
    std::ostringstream os;
    os << "{\"campaign\": \"" << json_escape(cfg.campaign) << "\", \"n\": " << cfg.n
       << ", \"cone\": \"" << cone_name(cfg.cone.kind) << "\", \"delta\": "
       << g17(cfg.cone.delta) << ", \"trials\": " << cfg.trials << ", \"seed\": " << cfg.seed
       << ", \"theta\": " << g17(cfg.theta) << ", \"t_end\": " << g17(cfg.t_end)
       << ", \"restarts\": " << cfg.restarts << "}";
    return os.str();
}

inline std::string campaign_report_to_json(const CampaignReport& rep) {
    std::ostringstream os;
    os << "{\"config\": " << config_to_json(rep.config) << ", \"attempted\": " << rep.attempted
       << ", \"admitted\": " << rep.admitted << ", \"violated\": " << rep.violated
       << ", \"inconclusive\": " << (rep.inconclusive ? "true" : "false")
       << ", \"worst_value\": " << g17(rep.worst_value) << ", \"witness\": "
       << (rep.witness ? tensor_to_json(*rep.witness) : std::string("null"))
       << ", \"wall_seconds\": " << g17(rep.wall_seconds) << "}";
    return os.str();
}

inline std::string constants_report_to_json(const ConstantsReport& rep) {
    std::ostringstream os;
    os << "{\"cone\": \"" << cone_name(rep.kind) << "\", \"n\": " << rep.n
       << ", \"trials\": " << rep.trials << ", \"seed\": " << rep.seed
       << ", \"theta_hat\": " << g17(rep.theta_hat)
       << ", \"Theta_hat\": " << g17(rep.big_theta_hat)
       << ", \"member_samples\": " << rep.member_samples
       << ", \"boundary_samples\": " << rep.boundary_samples
       << ", \"active_frames\": " << rep.active_frames << "}";
    return os.str();
}

// ------------------------------------------------------------
// Trajectory CSV
// ------------------------------------------------------------

inline std::string trajectory_to_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "t,scal";
    for (int i = 1; i <= traj.dim; ++i) os << ",lambda" << i;
    os << ",pic_margin,pic1_margin,pic2_margin,pinching_ratio,accepted_dt\n";
    for (const FlowSample& s : traj.samples) {
        os << g17(s.t) << ',' << g17(s.diag.scal);
        for (int i = 0; i < traj.dim; ++i) os << ',' << g17(s.diag.ricci_eigs(i));
        os << ',' << g17(s.diag.pic_margin) << ',' << g17(s.diag.pic1_margin) << ','
           << g17(s.diag.pic2_margin) << ',' << g17(s.diag.pinching_ratio) << ','
           << g17(s.accepted_dt) << '\n';
    }
    return os.str();
}

inline std::string trajectory_to_json(const Trajectory& traj) {
    std::ostringstream os;
    os << "{\"dim\": " << traj.dim << ", \"normalized\": "
       << (traj.normalized ? "true" : "false") << ", \"scal0\": " << g17(traj.scal0)
       << ", \"accepted_steps\": " << traj.accepted_steps
       << ", \"rejected_steps\": " << traj.rejected_steps << ", \"samples\": [";
    bool first = true;
    for (const FlowSample& s : traj.samples) {
        if (!first) os << ", ";
        first = false;
        os << "{\"t\": " << g17(s.t) << ", \"scal\": " << g17(s.diag.scal)
           << ", \"ricci_eigs\": [";
        for (int i = 0; i < traj.dim; ++i) {
            if (i) os << ", ";
            os << g17(s.diag.ricci_eigs(i));
        }
        os << "], \"pic_margin\": " << g17(s.diag.pic_margin)
           << ", \"pic1_margin\": " << g17(s.diag.pic1_margin)
           << ", \"pic2_margin\": " << g17(s.diag.pic2_margin)
           << ", \"pinching_ratio\": " << g17(s.diag.pinching_ratio)
           << ", \"accepted_dt\": " << g17(s.accepted_dt) << '}';
    }
    os << "]}";
    return os.str();
}

// ------------------------------------------------------------
// Files
// ------------------------------------------------------------

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + path);
    f << content;
    if (!f) throw Error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for reading: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

inline void write_tensor_file(const std::string& path, const CurvatureTensor& r) {
    write_text_file(path, tensor_to_json(r) + "\n");
}

inline CurvatureTensor read_tensor_file(const std::string& path) {
    return tensor_from_json(read_text_file(path));
}

}  // namespace piclab::io
