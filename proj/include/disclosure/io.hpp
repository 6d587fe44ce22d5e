// ---------------------------------------------------------------------------
// io.hpp -- JSON schemas for instances and policies, a stable content hash,
// and the CSV writers shared by the command-line tool
// ---------------------------------------------------------------------------
#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "disclosure/frontier.hpp"
#include "disclosure/model.hpp"
#include "disclosure/oracle.hpp"
#include "disclosure/policy.hpp"

namespace disclosure::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// instances
// ---------------------------------------------------------------------------

inline model::DensitySpec density_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "uniform") return model::DensitySpec::uniform();
    if (kind == "truncated_normal")
        return model::DensitySpec::truncated_normal(j.at("mu").get<double>(),
                                                    j.at("sigma").get<double>());
    if (kind == "truncated_exponential")
        return model::DensitySpec::truncated_exponential(j.at("rate").get<double>());
    if (kind == "piecewise_linear") {
        const auto knots = j.at("knots").get<std::vector<double>>();
        const auto values = j.at("values").get<std::vector<double>>();
        if (knots.size() != values.size())
            throw std::invalid_argument("density_from_json: knots/values length mismatch");
        std::vector<std::pair<double, double>> table;
        table.reserve(knots.size());
        for (std::size_t i = 0; i < knots.size(); ++i) table.emplace_back(knots[i], values[i]);
        return model::DensitySpec::piecewise_linear(std::move(table));
    }
    throw std::invalid_argument("density_from_json: unknown kind '" + kind + "'");
}

inline json density_to_json(const model::DensitySpec& spec) {
    json j;
    switch (spec.kind) {
        case model::DensityKind::Uniform:
            j["kind"] = "uniform";
            break;
        case model::DensityKind::TruncatedNormal:
            j["kind"] = "truncated_normal";
            j["mu"] = spec.mu;
            j["sigma"] = spec.sigma;
            break;
        case model::DensityKind::TruncatedExponential:
            j["kind"] = "truncated_exponential";
            j["rate"] = spec.rate;
            break;
        case model::DensityKind::PiecewiseLinearTable: {
            j["kind"] = "piecewise_linear";
            std::vector<double> knots, values;
            knots.reserve(spec.table.size());
            values.reserve(spec.table.size());
            for (const auto& kv : spec.table) {
                knots.push_back(kv.first);
                values.push_back(kv.second);
            }
            j["knots"] = knots;
            j["values"] = values;
            break;
        }
    }
    return j;
}

inline model::ModelInstance instance_from_json(const json& j) {
    model::ModelInstance m;
    m.emission_cap = j.at("emission_cap").get<double>();
    m.pi0 = j.at("pi0").get<std::vector<double>>();
    m.slope_a = j.at("a").get<double>();
    m.intercept_b = j.value("b", 0.0);
    const json& t = j.at("types");
    m.type_lower = t.at("lower").get<double>();
    m.type_upper = t.at("upper").get<double>();
    m.density = density_from_json(t.at("density"));
    return m;
}

inline json instance_to_json(const model::ModelInstance& m) {
    json j;
    j["emission_cap"] = m.emission_cap;
    j["pi0"] = m.pi0;
    j["a"] = m.slope_a;
    j["b"] = m.intercept_b;
    j["types"] = {{"lower", m.type_lower},
                  {"upper", m.type_upper},
                  {"density", density_to_json(m.density)}};
    return j;
}

inline model::ModelInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_instance: cannot open '" + path + "'");
    json j;
    in >> j;
    return instance_from_json(j);
}

// ---------------------------------------------------------------------------
// policies
// ---------------------------------------------------------------------------

inline policy::DisclosurePolicy policy_from_json(const json& j) {
    policy::DisclosurePolicy p;
    for (const json& r : j.at("regions")) {
        const std::string mode = r.at("mode").get<std::string>();
        policy::RegionMode m;
        if (mode == "transparent")
            m = policy::RegionMode::Transparent;
        else if (mode == "pooled")
            m = policy::RegionMode::Pooled;
        else
            throw std::invalid_argument("policy_from_json: unknown mode '" + mode + "'");
        p.regions.push_back({r.at("lo").get<double>(), r.at("hi").get<double>(), m});
    }
    return p;
}

inline json policy_to_json(const policy::DisclosurePolicy& p) {
    json regions = json::array();
    for (const auto& r : p.regions)
        regions.push_back(
            {{"lo", r.lo},
             {"hi", r.hi},
             {"mode", r.mode == policy::RegionMode::Transparent ? "transparent" : "pooled"}});
    return json{{"regions", regions}};
}

inline policy::DisclosurePolicy load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_policy: cannot open '" + path + "'");
    json j;
    in >> j;
    return policy_from_json(j);
}

// ---------------------------------------------------------------------------
// content hash (FNV-1a over the canonical JSON dump)
// ---------------------------------------------------------------------------

inline std::string content_hash(const json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

inline std::string instance_hash(const model::ModelInstance& m) {
    return content_hash(instance_to_json(m));
}

// ---------------------------------------------------------------------------
// CSV writers (every file opens with the instance hash so downstream
// artifacts can be tied back to their inputs)
// ---------------------------------------------------------------------------

inline void write_scheme_csv(std::ostream& out, const model::CanonicalInstance& inst,
                             const policy::EmissionScheme& scheme, const std::string& hash,
                             int samples = 201) {
    out << "# instance-hash: " << hash << "\n";
    out << "theta,emission,profit\n";
    out << std::setprecision(12);
    const double lo = inst.type_lower, hi = inst.type_upper;
    const int n = inst.degenerate ? 1 : samples;
    for (int i = 0; i < n; ++i) {
        const double th = (n == 1) ? lo : lo + (hi - lo) * double(i) / double(n - 1);
        const double e = scheme.evaluate(inst, th);
        out << th << "," << e << "," << inst.profit(th, e) + inst.profit_offset << "\n";
    }
}

/// Per-type table of the unconstrained peak and the participation floor.
inline void write_emission_table_csv(std::ostream& out, const model::CanonicalInstance& inst,
                                     const std::string& hash, int samples = 201) {
    out << "# instance-hash: " << hash << "\n";
    out << "theta,e_hat,e_floor\n";
    out << std::setprecision(12);
    const double lo = inst.type_lower, hi = inst.type_upper;
    const int n = inst.degenerate ? 1 : samples;
    for (int i = 0; i < n; ++i) {
        const double th = (n == 1) ? lo : lo + (hi - lo) * double(i) / double(n - 1);
        out << th << "," << model::peak_emission(inst, th) << ","
            << model::participation_floor(inst, th) << "\n";
    }
}

inline void write_frontier_csv(std::ostream& out, const frontier::FrontierTrace& tr,
                               const std::string& hash) {
    out << "# instance-hash: " << hash << "\n";
    out << "alpha,e_star,gamma,pi,w,flags\n";
    out << std::setprecision(12);
    for (const auto& p : tr.points)
        out << p.alpha << "," << p.e_star << "," << p.gamma << "," << p.pi << "," << p.w << ","
            << p.flags << "\n";
}

inline void write_oracle_csv(std::ostream& out, const oracle::OracleComparison& cmp,
                             const std::string& hash) {
    out << "# instance-hash: " << hash << "\n";
    out << "mask,gamma,pi,matched_e_star,gap\n";
    out << std::setprecision(12);
    for (const auto& p : cmp.points)
        out << p.mask << "," << p.gamma_d << "," << p.pi_d << "," << p.matched_e_star << ","
            << p.gap << "\n";
}

}  // namespace disclosure::io
