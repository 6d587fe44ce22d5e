// ---------------------------------------------------------------------------
// model.hpp -- firm/regulator primitives: instances, densities, canonical
// form, per-type peak emission and participation floor
// ---------------------------------------------------------------------------
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "disclosure/quadrature.hpp"
#include "disclosure/rootfind.hpp"

namespace disclosure::model {

// ---------------------------------------------------------------------------
// polynomials (ascending coefficients)
// ---------------------------------------------------------------------------
namespace detail {

inline double poly_eval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
}

inline std::vector<double> poly_derivative(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * double(i));
    if (d.empty()) d.push_back(0.0);
    return d;
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

inline double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// type densities
// ---------------------------------------------------------------------------

enum class DensityKind { Uniform, TruncatedNormal, TruncatedExponential, PiecewiseLinearTable };

/// Declarative description of the type density; bounds live on the instance.
struct DensitySpec {
    DensityKind kind = DensityKind::Uniform;
    double mu = 0.0;     // truncated-normal location
    double sigma = 1.0;  // truncated-normal scale
    double rate = 0.0;   // truncated-exponential: f proportional to exp(rate * theta)
    std::vector<std::pair<double, double>> table;  // (theta, density) knots

    static DensitySpec uniform() { return DensitySpec{}; }
    static DensitySpec truncated_normal(double mu, double sigma) {
        DensitySpec s;
        s.kind = DensityKind::TruncatedNormal;
        s.mu = mu;
        s.sigma = sigma;
        return s;
    }
    static DensitySpec truncated_exponential(double rate) {
        DensitySpec s;
        s.kind = DensityKind::TruncatedExponential;
        s.rate = rate;
        return s;
    }
    static DensitySpec piecewise_linear(std::vector<std::pair<double, double>> pts) {
        DensitySpec s;
        s.kind = DensityKind::PiecewiseLinearTable;
        s.table = std::move(pts);
        return s;
    }
};

/// A density bound to a support [lower, upper], normalized to total mass one.
class Density {
  public:
    Density(const DensitySpec& spec, double lower, double upper)
        : spec_(spec), lo_(lower), hi_(upper) {
        if (!(lo_ < hi_)) throw std::invalid_argument("Density: requires lower < upper");
        switch (spec_.kind) {
            case DensityKind::Uniform:
                break;
            case DensityKind::TruncatedNormal: {
                if (!(spec_.sigma > 0.0))
                    throw std::invalid_argument("Density: sigma must be positive");
                const double zl = (lo_ - spec_.mu) / spec_.sigma;
                const double zh = (hi_ - spec_.mu) / spec_.sigma;
                norm_ = detail::std_normal_cdf(zh) - detail::std_normal_cdf(zl);
                if (!(norm_ > 0.0))
                    throw std::invalid_argument("Density: degenerate normal truncation");
                break;
            }
            case DensityKind::TruncatedExponential:
                break;  // handled pointwise in stable expm1 form
            case DensityKind::PiecewiseLinearTable:
                init_table();
                break;
        }
    }

    double lower() const { return lo_; }
    double upper() const { return hi_; }
    const DensitySpec& spec() const { return spec_; }

    double pdf(double x) const {
        switch (spec_.kind) {
            case DensityKind::Uniform:
                return 1.0 / (hi_ - lo_);
            case DensityKind::TruncatedNormal: {
                const double z = (x - spec_.mu) / spec_.sigma;
                return detail::std_normal_pdf(z) / (spec_.sigma * norm_);
            }
            case DensityKind::TruncatedExponential: {
                const double r = spec_.rate;
                if (std::abs(r * (hi_ - lo_)) < 1e-12) return 1.0 / (hi_ - lo_);
                return r * std::exp(r * (x - lo_)) / std::expm1(r * (hi_ - lo_));
            }
            case DensityKind::PiecewiseLinearTable:
                return table_pdf(x);
        }
        return 0.0;
    }

    double cdf(double x) const {
        if (x <= lo_) return 0.0;
        if (x >= hi_) return 1.0;
        switch (spec_.kind) {
            case DensityKind::Uniform:
                return (x - lo_) / (hi_ - lo_);
            case DensityKind::TruncatedNormal: {
                const double zl = (lo_ - spec_.mu) / spec_.sigma;
                const double z = (x - spec_.mu) / spec_.sigma;
                return (detail::std_normal_cdf(z) - detail::std_normal_cdf(zl)) / norm_;
            }
            case DensityKind::TruncatedExponential: {
                const double r = spec_.rate;
                if (std::abs(r * (hi_ - lo_)) < 1e-12) return (x - lo_) / (hi_ - lo_);
                return std::expm1(r * (x - lo_)) / std::expm1(r * (hi_ - lo_));
            }
            case DensityKind::PiecewiseLinearTable:
                return table_cdf(x);
        }
        return 0.0;
    }

    /// Derivative of the density (right-segment slope at table knots).
    double pdf_prime(double x) const {
        switch (spec_.kind) {
            case DensityKind::Uniform:
                return 0.0;
            case DensityKind::TruncatedNormal:
                return pdf(x) * (-(x - spec_.mu) / (spec_.sigma * spec_.sigma));
            case DensityKind::TruncatedExponential: {
                const double r = spec_.rate;
                if (std::abs(r * (hi_ - lo_)) < 1e-12) return 0.0;
                return r * pdf(x);
            }
            case DensityKind::PiecewiseLinearTable:
                return table_slope(x);
        }
        return 0.0;
    }

    /// (ln f)'' where an analytic form exists; tables use central differences.
    double log_pdf_second(double x, double step) const {
        switch (spec_.kind) {
            case DensityKind::Uniform:
                return 0.0;
            case DensityKind::TruncatedNormal:
                return -1.0 / (spec_.sigma * spec_.sigma);
            case DensityKind::TruncatedExponential:
                return 0.0;
            case DensityKind::PiecewiseLinearTable: {
                const double a = std::max(lo_, x - step);
                const double b = std::min(hi_, x + step);
                const double m = 0.5 * (a + b), h = 0.5 * (b - a);
                if (h <= 0.0) return 0.0;
                const double fl = table_pdf(m - h), fm = table_pdf(m), fr = table_pdf(m + h);
                if (fl <= 0.0 || fm <= 0.0 || fr <= 0.0) return std::numeric_limits<double>::infinity();
                return (std::log(fl) - 2.0 * std::log(fm) + std::log(fr)) / (h * h);
            }
        }
        return 0.0;
    }

    bool analytic_log_second() const {
        return spec_.kind != DensityKind::PiecewiseLinearTable;
    }

    /// Interior smoothness breakpoints (table knots); empty for closed-form kinds.
    const std::vector<double>& interior_knots() const { return knots_; }

  private:
    void init_table() {
        if (spec_.table.size() < 2)
            throw std::invalid_argument("Density: table needs at least two knots");
        auto pts = spec_.table;
        std::sort(pts.begin(), pts.end());
        const double span = hi_ - lo_;
        if (std::abs(pts.front().first - lo_) > 1e-9 * std::max(1.0, std::abs(span)) ||
            std::abs(pts.back().first - hi_) > 1e-9 * std::max(1.0, std::abs(span)))
            throw std::invalid_argument("Density: table must cover the type support exactly");
        pts.front().first = lo_;
        pts.back().first = hi_;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            if (!(pts[i + 1].first > pts[i].first))
                throw std::invalid_argument("Density: table knots must be strictly increasing");
        for (auto& p : pts)
            if (p.second < 0.0)
                throw std::invalid_argument("Density: table values must be nonnegative");
        // Normalize by the trapezoid total so the cdf hits one at the top.
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            total += 0.5 * (pts[i].second + pts[i + 1].second) * (pts[i + 1].first - pts[i].first);
        if (!(total > 0.0)) throw std::invalid_argument("Density: table has zero mass");
        tx_.clear();
        tf_.clear();
        tF_.clear();
        knots_.clear();
        double cum = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i > 0)
                cum += 0.5 * (pts[i - 1].second + pts[i].second) / total *
                       (pts[i].first - pts[i - 1].first);
            tx_.push_back(pts[i].first);
            tf_.push_back(pts[i].second / total);
            tF_.push_back(cum);
            if (i > 0 && i + 1 < pts.size()) knots_.push_back(pts[i].first);
        }
        tF_.back() = 1.0;
    }

    std::size_t table_segment(double x) const {
        auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
        std::size_t i = (it == tx_.begin()) ? 0 : std::size_t(it - tx_.begin()) - 1;
        return std::min(i, tx_.size() - 2);
    }

    double table_pdf(double x) const {
        x = std::clamp(x, lo_, hi_);
        const std::size_t i = table_segment(x);
        const double t = (x - tx_[i]) / (tx_[i + 1] - tx_[i]);
        return tf_[i] + t * (tf_[i + 1] - tf_[i]);
    }

    double table_cdf(double x) const {
        const std::size_t i = table_segment(x);
        const double dx = x - tx_[i];
        const double slope = (tf_[i + 1] - tf_[i]) / (tx_[i + 1] - tx_[i]);
        return tF_[i] + tf_[i] * dx + 0.5 * slope * dx * dx;
    }

    double table_slope(double x) const {
        const std::size_t i = table_segment(std::clamp(x, lo_, hi_));
        return (tf_[i + 1] - tf_[i]) / (tx_[i + 1] - tx_[i]);
    }

    DensitySpec spec_;
    double lo_, hi_;
    double norm_ = 1.0;                      // truncated-normal mass
    std::vector<double> tx_, tf_, tF_;       // normalized table
    std::vector<double> knots_;              // interior table knots
};

// ---------------------------------------------------------------------------
// instances
// ---------------------------------------------------------------------------

/// Raw parameterization: profit pi0(e) - theta * (a e + b) with type density
/// on [type_lower, type_upper].
struct ModelInstance {
    double emission_cap = 1.0;
    std::vector<double> pi0;  // ascending polynomial coefficients
    double slope_a = -1.0;
    double intercept_b = 0.0;
    double type_lower = 0.0;
    double type_upper = 1.0;
    DensitySpec density;
};

/// pi(theta, e) in the original parameterization; rejects out-of-domain input.
inline double profit(const ModelInstance& inst, double theta, double e) {
    const double etol = 1e-9 * std::max(1.0, inst.emission_cap);
    const double ttol = 1e-9 * std::max(1.0, std::abs(inst.type_upper - inst.type_lower));
    if (e < -etol || e > inst.emission_cap + etol)
        throw std::domain_error("profit: emission outside [0, emission_cap]");
    if (theta < inst.type_lower - ttol || theta > inst.type_upper + ttol)
        throw std::domain_error("profit: type outside the support");
    return detail::poly_eval(inst.pi0, e) - theta * (inst.slope_a * e + inst.intercept_b);
}

/// Canonical parameterization: pi(theta, e) = pi0(e) + theta * e, types
/// mapped through theta' = -a * theta; a zero slope collapses every type to
/// a single canonical type (degenerate instance).
class CanonicalInstance {
  public:
    double emission_cap = 1.0;
    std::vector<double> pi0;
    double type_lower = 0.0;
    double type_upper = 1.0;
    bool degenerate = false;        // single-type instance (zero original slope)
    double profit_offset = 0.0;     // policy-independent -b*E[theta] term
    double orig_slope_a = -1.0;
    double orig_intercept_b = 0.0;

    CanonicalInstance() = default;

    /// Direct constructor used by tests and the degenerate path.
    static CanonicalInstance make(double cap, std::vector<double> pi0_coeffs,
                                  double lo, double hi, DensitySpec density) {
        CanonicalInstance c;
        c.emission_cap = cap;
        c.pi0 = std::move(pi0_coeffs);
        c.type_lower = lo;
        c.type_upper = hi;
        c.degenerate = !(lo < hi);
        if (!c.degenerate) c.density_.emplace(density, lo, hi);
        c.finalize();
        return c;
    }

    static CanonicalInstance single_type(double cap, std::vector<double> pi0_coeffs,
                                         double theta0) {
        CanonicalInstance c;
        c.emission_cap = cap;
        c.pi0 = std::move(pi0_coeffs);
        c.type_lower = c.type_upper = theta0;
        c.degenerate = true;
        c.finalize();
        return c;
    }

    void finalize() {
        dpi0_ = detail::poly_derivative(pi0);
        ddpi0_ = detail::poly_derivative(dpi0_);
    }

    double profit(double theta, double e) const {
        return detail::poly_eval(pi0, e) + theta * e;
    }
    double profit_e(double theta, double e) const {
        return detail::poly_eval(dpi0_, e) + theta;
    }
    double profit_ee(double e) const { return detail::poly_eval(ddpi0_, e); }

    const Density& density() const {
        if (degenerate || !density_)
            throw std::logic_error("CanonicalInstance: degenerate instance has no density");
        return *density_;
    }
    double pdf(double theta) const { return density().pdf(theta); }
    double cdf(double theta) const { return density().cdf(theta); }
    const std::vector<double>& density_knots() const {
        static const std::vector<double> none;
        return (degenerate || !density_) ? none : density_->interior_knots();
    }

    void set_density(const DensitySpec& spec) {
        density_.emplace(spec, type_lower, type_upper);
        degenerate = false;
    }

  private:
    std::vector<double> dpi0_, ddpi0_;
    std::optional<Density> density_;
};

// ---------------------------------------------------------------------------
// assumption validation
// ---------------------------------------------------------------------------

struct ValidationItem {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationItem> items;
    bool pass = true;

    void add(std::string name, bool ok, std::string detail) {
        pass = pass && ok;
        items.push_back({std::move(name), ok, std::move(detail)});
    }
    const ValidationItem* find(const std::string& name) const {
        for (const auto& it : items)
            if (it.name == name) return &it;
        return nullptr;
    }
    std::string first_failure() const {
        for (const auto& it : items)
            if (!it.pass) return it.name;
        return {};
    }
};

namespace detail {

inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

}  // namespace detail

/// Grid-checks the maintained assumptions: strict concavity of pi0, the cap
/// preferred to zero emission for every type, and a positive normalized
/// density.  Also reports where the per-type peak sits at the support ends.
inline ValidationReport validate_assumptions(const ModelInstance& inst, int grid = 101);

/// argmax_e pi(theta, e) over [0, emission_cap] for a canonical instance.
inline double peak_emission(const CanonicalInstance& inst, double theta) {
    const double span = std::max(1.0, std::abs(inst.type_upper) + std::abs(inst.type_lower));
    if (theta < inst.type_lower - 1e-6 * span || theta > inst.type_upper + 1e-6 * span)
        throw std::domain_error("peak_emission: type outside the support");
    theta = std::clamp(theta, inst.type_lower, inst.type_upper);
    const double cap = inst.emission_cap;
    if (inst.profit_e(theta, 0.0) <= 0.0) return 0.0;
    if (inst.profit_e(theta, cap) >= 0.0) return cap;
    double e = num::bisect([&](double x) { return inst.profit_e(theta, x); }, 0.0, cap,
                           1e-13 * std::max(1.0, cap));
    // Newton polish against the strictly negative curvature.
    for (int it = 0; it < 3; ++it) {
        const double g = inst.profit_e(theta, e);
        const double h = inst.profit_ee(e);
        if (h >= 0.0) break;
        e = std::clamp(e - g / h, 0.0, cap);
    }
    return e;
}

/// Smallest emission a type weakly prefers over the cap:
/// min { e : pi(theta, e) >= pi(theta, cap) }.
inline double participation_floor(const CanonicalInstance& inst, double theta) {
    const double span = std::max(1.0, std::abs(inst.type_upper) + std::abs(inst.type_lower));
    if (theta < inst.type_lower - 1e-6 * span || theta > inst.type_upper + 1e-6 * span)
        throw std::domain_error("participation_floor: type outside the support");
    theta = std::clamp(theta, inst.type_lower, inst.type_upper);
    const double cap = inst.emission_cap;
    const double at_cap = inst.profit(theta, cap);
    auto gap = [&](double e) { return inst.profit(theta, e) - at_cap; };
    if (gap(0.0) >= 0.0) return 0.0;
    const double ehat = peak_emission(inst, theta);
    if (gap(ehat) <= 0.0) return ehat;  // tangency: floor meets the peak
    double e = num::bisect(gap, 0.0, ehat, 1e-13 * std::max(1.0, cap));
    for (int it = 0; it < 3; ++it) {
        const double g = gap(e);
        const double d = inst.profit_e(theta, e);
        if (d <= 0.0) break;
        e = std::clamp(e - g / d, 0.0, ehat);
    }
    return e;
}

/// Maps an instance to canonical coordinates (slope -1, intercept 0).
/// theta' = -a * theta; the dropped -b*theta term enters profit_offset.
inline CanonicalInstance canonicalize(const ModelInstance& inst) {
    ValidationReport report = validate_assumptions(inst);
    if (!report.pass)
        throw std::invalid_argument("canonicalize: assumption check failed: " +
                                    report.first_failure());
    const double a = inst.slope_a, b = inst.intercept_b;
    const Density orig(inst.density, inst.type_lower, inst.type_upper);
    const double mean_theta = quad::integrate_piecewise(
        [&](double t) { return t * orig.pdf(t); }, inst.type_lower, inst.type_upper,
        orig.interior_knots(), 64);

    CanonicalInstance c;
    c.emission_cap = inst.emission_cap;
    c.pi0 = inst.pi0;
    c.orig_slope_a = a;
    c.orig_intercept_b = b;
    c.profit_offset = -b * mean_theta;

    if (a == 0.0) {
        // Every type has the same e-dependent payoff: single canonical type 0.
        c.type_lower = c.type_upper = 0.0;
        c.degenerate = true;
        c.finalize();
        return c;
    }

    const double scale = -a;  // theta' = scale * theta
    const double t1 = scale * inst.type_lower, t2 = scale * inst.type_upper;
    c.type_lower = std::min(t1, t2);
    c.type_upper = std::max(t1, t2);

    DensitySpec spec = inst.density;
    switch (spec.kind) {
        case DensityKind::Uniform:
            break;
        case DensityKind::TruncatedNormal:
            spec.mu = scale * spec.mu;
            spec.sigma = std::abs(scale) * spec.sigma;
            break;
        case DensityKind::TruncatedExponential:
            spec.rate = spec.rate / scale;
            break;
        case DensityKind::PiecewiseLinearTable:
            for (auto& p : spec.table) {
                p.first *= scale;
                p.second /= std::abs(scale);
            }
            std::sort(spec.table.begin(), spec.table.end());
            break;
    }
    c.set_density(spec);
    c.finalize();
    return c;
}

inline ValidationReport validate_assumptions(const ModelInstance& inst, int grid) {
    ValidationReport r;
    r.add("emission_cap_positive", inst.emission_cap > 0.0,
          "emission_cap = " + detail::fmt(inst.emission_cap));
    r.add("type_interval_nonempty", inst.type_lower < inst.type_upper,
          "[" + detail::fmt(inst.type_lower) + ", " + detail::fmt(inst.type_upper) + "]");
    r.add("pi0_nonempty", !inst.pi0.empty(), "pi0 degree " +
          std::to_string(inst.pi0.empty() ? 0 : inst.pi0.size() - 1));
    if (!r.pass) return r;

    const auto dpi0 = detail::poly_derivative(inst.pi0);
    const auto ddpi0 = detail::poly_derivative(dpi0);
    const double cap = inst.emission_cap;

    double worst_curv = -std::numeric_limits<double>::infinity();
    double worst_curv_at = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double e = cap * double(i) / double(grid - 1);
        const double v = detail::poly_eval(ddpi0, e);
        if (v > worst_curv) {
            worst_curv = v;
            worst_curv_at = e;
        }
    }
    r.add("profit_strictly_concave", worst_curv < 0.0,
          "max pi0'' = " + detail::fmt(worst_curv) + " at e = " + detail::fmt(worst_curv_at));

    bool cap_pref = true;
    double cap_pref_witness = inst.type_lower;
    for (int i = 0; i < grid; ++i) {
        const double th =
            inst.type_lower + (inst.type_upper - inst.type_lower) * double(i) / double(grid - 1);
        const double at0 = detail::poly_eval(inst.pi0, 0.0) - th * inst.intercept_b;
        const double atcap =
            detail::poly_eval(inst.pi0, cap) - th * (inst.slope_a * cap + inst.intercept_b);
        if (!(at0 < atcap)) {
            cap_pref = false;
            cap_pref_witness = th;
            break;
        }
    }
    r.add("cap_preferred_to_zero", cap_pref,
          cap_pref ? "pi(theta,0) < pi(theta,cap) on the grid"
                   : "violated at theta = " + detail::fmt(cap_pref_witness));

    bool dens_ok = true;
    std::string dens_detail = "positive on the interior grid";
    double f0 = 0.0, f1 = 0.0;
    try {
        const Density d(inst.density, inst.type_lower, inst.type_upper);
        double prev = -std::numeric_limits<double>::infinity();
        bool monotone_cdf = true;
        for (int i = 1; i + 1 < grid; ++i) {
            const double th = inst.type_lower +
                              (inst.type_upper - inst.type_lower) * double(i) / double(grid - 1);
            if (!(d.pdf(th) > 0.0)) {
                dens_ok = false;
                dens_detail = "nonpositive density at theta = " + detail::fmt(th);
                break;
            }
            const double F = d.cdf(th);
            if (F < prev - 1e-12) monotone_cdf = false;
            prev = F;
        }
        r.add("density_positive", dens_ok, dens_detail);
        f0 = d.cdf(inst.type_lower);
        f1 = d.cdf(inst.type_upper);
        r.add("density_normalized", std::abs(f0) <= 1e-10 && std::abs(f1 - 1.0) <= 1e-10,
              "F(lo) = " + detail::fmt(f0) + ", F(hi) = " + detail::fmt(f1));
        r.add("cdf_nondecreasing", monotone_cdf, "grid check");
    } catch (const std::exception& ex) {
        r.add("density_positive", false, ex.what());
    }

    if (inst.slope_a == 0.0)
        r.add("degenerate_slope", true,
              "a = 0: all types share one payoff; canonical form is single-type");

    // Informational: where the peak and floor sit at the support endpoints.
    if (r.pass && inst.slope_a != 0.0) {
        try {
            CanonicalInstance c;
            c.emission_cap = inst.emission_cap;
            c.pi0 = inst.pi0;
            const double s = -inst.slope_a;
            c.type_lower = std::min(s * inst.type_lower, s * inst.type_upper);
            c.type_upper = std::max(s * inst.type_lower, s * inst.type_upper);
            c.finalize();
            const double el = peak_emission(c, c.type_lower);
            const double eh = peak_emission(c, c.type_upper);
            auto side = [&](double e) {
                if (e <= 0.0) return std::string("clamped at 0");
                if (e >= cap) return std::string("clamped at cap");
                return std::string("interior");
            };
            r.add("peak_at_support_ends", true,
                  "low type " + side(el) + " (" + detail::fmt(el) + "), high type " + side(eh) +
                      " (" + detail::fmt(eh) + ")");
        } catch (const std::exception&) {
            // informational only
        }
    }
    return r;
}

}  // namespace disclosure::model
