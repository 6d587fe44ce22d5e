// ---------------------------------------------------------------------------
// disclosure_cli.cpp -- command-line front end: analyze a policy on an
// instance, trace the policy frontier, verify an optimality certificate, and
// run the discrete brute-force oracle
//
// exit codes: 0 success, 2 invalid input, 3 verification failure
// ---------------------------------------------------------------------------

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "disclosure/certify.hpp"
#include "disclosure/frontier.hpp"
#include "disclosure/io.hpp"
#include "disclosure/model.hpp"
#include "disclosure/oracle.hpp"
#include "disclosure/policy.hpp"
#include "disclosure/threshold.hpp"

namespace {

using nlohmann::json;
using namespace disclosure;

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
    static const LogLevel lvl = [] {
        const char* env = std::getenv("DISCLOSURE_LOG");
        if (!env) return LogLevel::Info;
        const std::string s(env);
        if (s == "quiet") return LogLevel::Quiet;
        if (s == "debug") return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return lvl;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) std::cerr << "[debug] " << msg << "\n";
}

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitVerificationFailed = 3;

struct Loaded {
    model::ModelInstance raw;
    model::CanonicalInstance canon;
    std::string hash;
};

/// Loads, validates, and canonicalizes an instance; prints validation
/// failures and throws on bad input.
Loaded load_and_canonicalize(const std::string& path) {
    Loaded l;
    l.raw = io::load_instance(path);
    l.hash = io::instance_hash(l.raw);
    log_info("loaded instance " + path + " (hash " + l.hash + ")");
    const model::ValidationReport rep = model::validate_assumptions(l.raw);
    if (!rep.pass) {
        for (const auto& it : rep.items)
            if (!it.pass) std::cerr << "[error] assumption failed: " << it.name << ": " << it.detail << "\n";
        throw std::invalid_argument("instance fails model assumptions (" + rep.first_failure() + ")");
    }
    l.canon = model::canonicalize(l.raw);
    log_debug("canonical types [" + std::to_string(l.canon.type_lower) + ", " +
              std::to_string(l.canon.type_upper) + "]" + (l.canon.degenerate ? " (single type)" : ""));
    return l;
}

std::optional<std::ofstream> open_out(const std::string& path) {
    if (path.empty()) return std::nullopt;
    std::ofstream f(path);
    if (!f) throw std::invalid_argument("cannot open output file '" + path + "'");
    return f;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

/// Default mode: validation report, canonicalization echo, full/no-disclosure
/// points, and (with --out) a per-type peak/floor table.  With --threshold or
/// --policy: equilibrium outcomes of that policy and a sampled scheme CSV.
int run_analyze(const std::string& config, double alpha, double threshold_opt,
                const std::string& policy_path, const std::string& out_path, int quad_nodes,
                int samples) {
    const model::ModelInstance raw = io::load_instance(config);
    const std::string hash = io::instance_hash(raw);
    log_info("loaded instance " + config + " (hash " + hash + ")");

    const model::ValidationReport rep = model::validate_assumptions(raw);
    json checks = json::array();
    for (const auto& it : rep.items)
        checks.push_back({{"name", it.name}, {"pass", it.pass}, {"detail", it.detail}});
    json out;
    out["instance_hash"] = hash;
    out["assumptions_pass"] = rep.pass;
    out["assumptions"] = checks;
    if (!rep.pass) {
        for (const auto& it : rep.items)
            if (!it.pass)
                std::cerr << "[error] assumption failed: " << it.name << ": " << it.detail << "\n";
        std::cout << out.dump(2) << "\n";
        return kExitInvalidInput;
    }
    const model::CanonicalInstance canon = model::canonicalize(raw);
    out["canonical"] = {{"type_lower", canon.type_lower},
                        {"type_upper", canon.type_upper},
                        {"degenerate", canon.degenerate},
                        {"profit_offset", canon.profit_offset}};

    if (threshold_opt >= 0.0 || !policy_path.empty()) {
        policy::EmissionScheme scheme;
        if (threshold_opt >= 0.0) {
            scheme = threshold::threshold_scheme(canon, threshold_opt);
            const auto b = threshold::boundaries(canon, threshold_opt);
            out["threshold"] = threshold_opt;
            out["theta_hat"] = b.theta_hat;
            out["theta_star"] = b.theta_star;
        } else {
            const policy::DisclosurePolicy p = io::load_policy(policy_path);
            p.validate(raw.emission_cap);
            scheme = policy::equilibrium_scheme(canon, p);
            out["policy"] = io::policy_to_json(p);
        }
        const policy::Outcomes o = policy::expected_outcomes(canon, scheme, quad_nodes);
        const auto impl = policy::check_implementable(canon, scheme);
        out["gamma"] = o.gamma;
        out["pi"] = o.pi;
        out["alpha"] = alpha;
        out["welfare"] = -alpha * o.gamma + (1.0 - alpha) * o.pi;
        out["implementable"] = impl.ok;
        if (!impl.ok) out["implementability_violation"] = impl.violation;
        std::cout << out.dump(2) << "\n";
        if (auto f = open_out(out_path)) {
            io::write_scheme_csv(*f, canon, scheme, hash, samples);
            log_info("wrote scheme samples to " + out_path);
        }
        return kExitOk;
    }

    const frontier::FrontierPoint fd = frontier::full_disclosure_point(canon);
    const frontier::FrontierPoint nd = frontier::no_disclosure_point(canon);
    out["full_disclosure"] = {{"gamma", fd.gamma}, {"pi", fd.pi}};
    out["no_disclosure"] = {{"gamma", nd.gamma}, {"pi", nd.pi}};
    std::cout << out.dump(2) << "\n";
    if (auto f = open_out(out_path)) {
        io::write_emission_table_csv(*f, canon, hash, samples);
        log_info("wrote per-type emission table to " + out_path);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// frontier
// ---------------------------------------------------------------------------

int run_frontier(const std::string& config, int alphas, const std::string& out_path,
                 int quad_nodes) {
    const Loaded l = load_and_canonicalize(config);
    const frontier::FrontierTrace tr = frontier::trace_frontier(l.canon, alphas, quad_nodes);
    json pts = json::array();
    for (const auto& p : tr.points)
        pts.push_back({{"alpha", p.alpha},
                       {"e_star", p.e_star},
                       {"gamma", p.gamma},
                       {"pi", p.pi},
                       {"w", p.w},
                       {"flags", p.flags}});
    json out;
    out["instance_hash"] = l.hash;
    out["count"] = tr.points.size();
    out["heuristic"] = tr.heuristic;
    out["warnings"] = tr.warnings;
    out["points"] = pts;
    std::cout << out.dump(2) << "\n";
    if (auto f = open_out(out_path)) {
        io::write_frontier_csv(*f, tr, l.hash);
        log_info("wrote frontier to " + out_path);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

/// Emits the certificate report as JSON: one {name, pass, max_violation,
/// location} entry per condition plus the peak checks and the verdict.
int run_verify(const std::string& config, double alpha, double threshold_opt, int grid,
               double tol) {
    const Loaded l = load_and_canonicalize(config);
    if (l.canon.degenerate) {
        std::cerr << "[error] certificates require a nondegenerate type distribution\n";
        return kExitInvalidInput;
    }
    double e_star = threshold_opt;
    if (e_star < 0.0) {
        const threshold::ScalarizedPoint opt = threshold::optimize_threshold(l.canon, alpha);
        e_star = opt.e_star;
        log_info("optimized threshold e*=" + std::to_string(e_star) + " (" +
                 std::string(threshold::to_string(opt.foc_case)) + ")");
    }

    json out;
    out["instance_hash"] = l.hash;
    out["alpha"] = alpha;
    out["e_star"] = e_star;

    certify::Certificate cert;
    try {
        cert = certify::build_certificate(l.canon, alpha, e_star, grid);
    } catch (const std::invalid_argument& e) {
        const threshold::FocResult f = threshold::foc_residual(l.canon, e_star, alpha);
        out["conditions"] = json::array({{{"name", "first_order_condition"},
                                          {"pass", false},
                                          {"max_violation", std::abs(f.residual)},
                                          {"location", e_star}}});
        out["verified"] = false;
        out["error"] = e.what();
        std::cout << out.dump(2) << "\n";
        return kExitVerificationFailed;
    }

    const certify::CertificateReport rep = certify::verify_certificate(cert, tol);
    json conds = json::array();
    conds.push_back({{"name", "first_order_condition"},
                     {"pass", true},
                     {"max_violation", 0.0},
                     {"location", e_star}});
    for (const auto& it : rep.items)
        conds.push_back({{"name", it.name},
                         {"pass", it.pass},
                         {"max_violation", it.max_violation},
                         {"location", it.location}});
    const certify::PeakChecksReport peaks = certify::peak_checks(l.canon, alpha, e_star, grid);
    conds.push_back({{"name", "score_peak_in_window"},
                     {"pass", peaks.range_pass},
                     {"max_violation", peaks.range_gap},
                     {"location", cert.theta_hat}});
    if (peaks.boundary_applicable)
        conds.push_back({{"name", "score_boundary_inequality"},
                         {"pass", peaks.boundary_pass},
                         {"max_violation", std::max(0.0, peaks.boundary_gap)},
                         {"location", cert.theta_star}});

    const bool ok = rep.pass && peaks.pass;
    out["conditions"] = conds;
    out["theta_hat"] = cert.theta_hat;
    out["theta_star"] = cert.theta_star;
    out["marginal_weight"] = cert.A;
    out["verified"] = ok;
    std::cout << out.dump(2) << "\n";
    return ok ? kExitOk : kExitVerificationFailed;
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

int run_oracle(const std::string& config, bool intro, int type_grid, int emission_grid,
               int sample, std::uint64_t seed, int threshold_grid, const std::string& out_path) {
    if (intro) {
        const oracle::DiscreteInstance d = oracle::intro_example();
        const auto menus = oracle::enumerate_menus(d.n_emissions());
        const auto front = oracle::discrete_pareto_frontier(d, menus);
        json pts = json::array();
        for (const auto& p : front)
            pts.push_back({{"mask", p.mask}, {"gamma", p.gamma}, {"pi", p.pi}});
        json out;
        out["menus"] = menus.size();
        out["frontier"] = pts;
        std::cout << out.dump(2) << "\n";
        return kExitOk;
    }

    const Loaded l = load_and_canonicalize(config);
    std::optional<std::vector<oracle::Menu>> menus;
    if (sample > 0) menus = oracle::sample_menus(emission_grid, sample, seed);
    log_info("running discrete oracle (" + std::to_string(type_grid) + " types, " +
             std::to_string(emission_grid) + " emissions)");
    const oracle::OracleComparison cmp = oracle::oracle_vs_threshold(
        l.canon, type_grid, emission_grid, menus ? &*menus : nullptr, threshold_grid);

    json out;
    out["instance_hash"] = l.hash;
    out["frontier_points"] = cmp.points.size();
    out["worst_gap"] = cmp.worst_gap;
    out["worst_gamma"] = cmp.worst_gamma;
    out["flag_threshold"] = cmp.flag_threshold;
    out["red_flag"] = cmp.red_flag;
    out["guarantee_applicable"] = cmp.guarantee_applicable;
    std::cout << out.dump(2) << "\n";
    if (auto f = open_out(out_path)) {
        io::write_oracle_csv(*f, cmp, l.hash);
        log_info("wrote oracle frontier to " + out_path);
    }
    return cmp.red_flag ? kExitVerificationFailed : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"threshold disclosure policies: analysis, frontier tracing, certificates, "
                 "and a discrete brute-force oracle"};
    app.require_subcommand(1);

    std::string config, policy_path, out_path;
    double alpha = 0.5;
    double threshold = -1.0;  // negative means "not supplied"
    int quad_nodes = 32;
    int samples = 201;
    int alphas = 101;
    int grid = 801;
    double tol = -1.0;
    bool intro = false;
    int type_grid = 101, emission_grid = 9, sample = 0, threshold_grid = 257;
    std::uint64_t seed = 12345;

    CLI::App* analyze = app.add_subcommand("analyze", "equilibrium outcomes of a policy");
    analyze->add_option("--config", config, "instance JSON file")->required();
    analyze->add_option("--alpha", alpha, "welfare weight on emissions (default 0.5)");
    analyze->add_option("--threshold", threshold, "threshold policy at this emission level");
    analyze->add_option("--policy", policy_path, "policy JSON file (regions)");
    analyze->add_option("--out", out_path, "write sampled emission scheme CSV here");
    analyze->add_option("--quad-nodes", quad_nodes, "quadrature nodes per segment");
    analyze->add_option("--samples", samples, "CSV sample count");

    CLI::App* front = app.add_subcommand("frontier", "trace the threshold-policy frontier");
    front->add_option("--config", config, "instance JSON file")->required();
    front->add_option("--alphas", alphas, "number of welfare weights (default 101)");
    front->add_option("--out", out_path, "write frontier CSV here");
    front->add_option("--quad-nodes", quad_nodes, "quadrature nodes per segment");

    CLI::App* verify = app.add_subcommand("verify", "build and check an optimality certificate");
    verify->add_option("--config", config, "instance JSON file")->required();
    verify->add_option("--alpha", alpha, "welfare weight on emissions")->required();
    verify->add_option("--threshold", threshold,
                       "candidate threshold (optimized when omitted)");
    verify->add_option("--grid", grid, "certificate grid size (default 801)");
    verify->add_option("--tol", tol, "override verification tolerance");

    CLI::App* orc = app.add_subcommand("oracle", "discrete menu enumeration vs thresholds");
    orc->add_option("--config", config, "instance JSON file");
    orc->add_flag("--intro", intro, "run the built-in three-emission example");
    orc->add_option("--type-grid", type_grid, "discrete type count (default 101, max 201)");
    orc->add_option("--emission-grid", emission_grid, "discrete emission count (default 9, max 16)");
    orc->add_option("--sample", sample, "sample this many menus instead of enumerating");
    orc->add_option("--seed", seed, "sampling seed (default 12345)");
    orc->add_option("--threshold-grid", threshold_grid, "continuum threshold grid (default 257)");
    orc->add_option("--out", out_path, "write discrete frontier CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalidInput;
    }

    try {
        if (app.got_subcommand(analyze))
            return run_analyze(config, alpha, threshold, policy_path, out_path, quad_nodes,
                               samples);
        if (app.got_subcommand(front)) return run_frontier(config, alphas, out_path, quad_nodes);
        if (app.got_subcommand(verify)) return run_verify(config, alpha, threshold, grid, tol);
        if (app.got_subcommand(orc)) {
            if (!intro && config.empty()) {
                std::cerr << "[error] oracle requires --config or --intro\n";
                return kExitInvalidInput;
            }
            return run_oracle(config, intro, type_grid, emission_grid, sample, seed,
                              threshold_grid, out_path);
        }
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "[error] bad input: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "[error] invalid input: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::domain_error& e) {
        std::cerr << "[error] invalid input: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "[error] " << e.what() << "\n";
        return kExitInvalidInput;
    }
    return kExitOk;
}
