#pragma once

// Built-in closed-form metric families, deterministic domain sampling, and
// jet evaluation of metric components (optionally with an injected flow
// direction in the s slot). Families loaded from definition files get the
// same treatment as built-ins.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ril/expr.hpp"
#include "ril/jet.hpp"
#include "ril/tensor.hpp"

namespace ril {

struct Interval {
    double lo = -1.0, hi = 1.0;
};

enum class SolitonKind { Steady, Shrinking, Expanding };

inline const char* to_string(SolitonKind k) {
    switch (k) {
        case SolitonKind::Steady: return "steady";
        case SolitonKind::Shrinking: return "shrinking";
        case SolitonKind::Expanding: return "expanding";
    }
    return "?";
}

inline SolitonKind soliton_kind_for(double lambda) {
    if (lambda > 0.0) return SolitonKind::Shrinking;
    if (lambda < 0.0) return SolitonKind::Expanding;
    return SolitonKind::Steady;
}

struct SolitonData {
    Expr potential;  // f in the chart coordinates
    double lambda = 0.0;
    SolitonKind kind = SolitonKind::Steady;
};

/// One closed-form metric chart with its validity domain.
struct MetricFamily {
    std::string name;
    int dim = 3;
    std::vector<Expr> components;  // dim*dim, row-major, symmetric as expressions
    std::vector<Interval> domain;
    std::map<std::string, double> parameters;  // resolved values the family was built with
    std::optional<SolitonData> soliton;

    const Expr& comp(int i, int j) const { return components[static_cast<size_t>(i) * dim + j]; }
    Expr& comp(int i, int j) { return components[static_cast<size_t>(i) * dim + j]; }
};

struct SamplePlan {
    int count = 1;
    std::uint64_t seed = 1;
    double margin = 0.1;  // fraction of each interval excluded at both ends
};

// ---- deterministic cross-platform RNG (splitmix64) ----
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    double uniform_sym() { return 2.0 * uniform01() - 1.0; }

private:
    std::uint64_t state_;
};

/// Smallest eigenvalue of a small symmetric matrix (cyclic Jacobi).
inline double smallest_eigenvalue_sym(Nd a) {
    const int n = a.dim();
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                double theta = 0.5 * (a(q, q) - a(p, p)) / a(p, q);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    double m = a(0, 0);
    for (int i = 1; i < n; ++i) m = std::min(m, a(i, i));
    return m;
}

inline Nd evaluate_metric_at(const MetricFamily& fam, std::span<const double> p) {
    Nd g(fam.dim, 2);
    for (int i = 0; i < fam.dim; ++i)
        for (int j = 0; j < fam.dim; ++j) g(i, j) = fam.comp(i, j).eval_d(p);
    return g;
}

/// Deterministic, margin-respecting sample points on which g is verified
/// positive definite (smallest eigenvalue > 1e-8). Failed draws are retried
/// up to 100 times per point.
inline std::vector<std::vector<double>> sample_points(const MetricFamily& fam, const SamplePlan& plan) {
    if (plan.count < 1) throw std::invalid_argument("sample count must be >= 1");
    if (plan.margin < 0.0 || plan.margin >= 0.5) throw std::invalid_argument("margin must be in [0, 0.5)");
    SplitMix64 rng(plan.seed);
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<size_t>(plan.count));
    for (int k = 0; k < plan.count; ++k) {
        bool ok = false;
        std::vector<double> p(static_cast<size_t>(fam.dim));
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            for (int i = 0; i < fam.dim; ++i) {
                const Interval& iv = fam.domain[static_cast<size_t>(i)];
                double w = (iv.hi - iv.lo) * plan.margin;
                p[static_cast<size_t>(i)] = rng.uniform(iv.lo + w, iv.hi - w);
            }
            ok = smallest_eigenvalue_sym(evaluate_metric_at(fam, p)) > 1e-8;
        }
        if (!ok)
            throw std::runtime_error("family '" + fam.name + "': no positive-definite sample found in 100 retries");
        out.push_back(std::move(p));
    }
    return out;
}

/// Jets of g_ij at p; when a direction h is supplied the result carries
/// g_ij + s*h_ij in the dual slot.
inline JetTensor evaluate_metric_jet(const MetricFamily& fam, std::span<const double> p,
                                     const JetConfig& cfg, const JetTensor* direction = nullptr) {
    if (static_cast<int>(p.size()) != fam.dim || cfg.dim != fam.dim)
        throw std::invalid_argument("point/config dimension mismatch for family " + fam.name);
    for (int i = 0; i < fam.dim; ++i) {
        const Interval& iv = fam.domain[static_cast<size_t>(i)];
        if (!(p[static_cast<size_t>(i)] > iv.lo && p[static_cast<size_t>(i)] < iv.hi))
            throw std::domain_error("point outside domain of family " + fam.name);
    }
    const JetSpace& sp = JetSpace::get(cfg.dim, cfg.order);
    std::vector<JetScalar> vars;
    vars.reserve(static_cast<size_t>(fam.dim));
    for (int i = 0; i < fam.dim; ++i) vars.push_back(JetScalar::coordinate(sp, i, p));
    JetTensor g(sp, downs(2));
    for (int i = 0; i < fam.dim; ++i)
        for (int j = 0; j < fam.dim; ++j) g(i, j) = fam.comp(i, j).eval<JetScalar>(vars);
    if (direction != nullptr) {
        if (direction->dim() != fam.dim || &direction->space() != &sp)
            throw std::invalid_argument("direction jets do not match the metric jet space");
        int h_order = direction->min_order_re();
        if (h_order < cfg.order - 2)
            throw std::invalid_argument("direction jets need spatial order >= order - 2");
        std::vector<double> buf(static_cast<size_t>(sp.size()));
        for (int i = 0; i < fam.dim; ++i)
            for (int j = 0; j < fam.dim; ++j) {
                const JetScalar& h = (*direction)(i, j);
                for (int c = 0; c < sp.size(); ++c) buf[static_cast<size_t>(c)] = h.coeff(c).re;
                g(i, j).set_s_part(buf, h.order_re());
            }
    }
    return g;
}

// ---- built-in catalog ----

namespace detail {

inline Expr delta(int i, int j) { return Expr::constant(i == j ? 1.0 : 0.0); }

inline std::vector<Expr> identity_components(int dim) {
    std::vector<Expr> c(static_cast<size_t>(dim * dim));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) c[static_cast<size_t>(i) * dim + j] = delta(i, j);
    return c;
}

inline Expr sum_of_squares(int dim) {
    Expr s = Expr::constant(0.0);
    for (int i = 0; i < dim; ++i) s = s + Expr::var(i) * Expr::var(i);
    return s;
}

// Symmetric random quadratic+cubic perturbation; each component polynomial is
// scaled by 1/#monomials so eps bounds the perturbation uniformly on the box.
inline std::vector<Expr> perturb_components(int dim, std::uint64_t seed, double eps) {
    std::vector<MultiIndex> monos;
    const JetSpace& sp3 = JetSpace::get(dim, 3);
    for (int i = 0; i < sp3.size(); ++i) {
        int d = multi_degree(sp3.index_at(i), dim);
        if (d == 2 || d == 3) monos.push_back(sp3.index_at(i));
    }
    const double scale = eps / static_cast<double>(monos.size());
    SplitMix64 rng(seed);
    std::vector<Expr> c(static_cast<size_t>(dim * dim));
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            Expr q = delta(i, j);
            for (const auto& m : monos) {
                Expr t = Expr::constant(rng.uniform_sym() * scale);
                for (int v = 0; v < dim; ++v)
                    for (int k = 0; k < m[v]; ++k) t = t * Expr::var(v);
                q = q + t;
            }
            c[static_cast<size_t>(i) * dim + j] = q;
            c[static_cast<size_t>(j) * dim + i] = q;
        }
    return c;
}

inline double param_or(const std::map<std::string, double>& params, const std::string& key, double dflt) {
    auto it = params.find(key);
    return it == params.end() ? dflt : it->second;
}

inline void check_known_params(const MetricFamily& fam, const std::map<std::string, double>& requested) {
    for (const auto& [k, v] : requested)
        if (!fam.parameters.count(k))
            throw std::invalid_argument("family '" + fam.name + "' has no parameter '" + k + "'");
}

}  // namespace detail

inline std::vector<std::string> catalog_names() {
    return {"flat-3",
            "round-sphere-3",
            "hyperbolic-3",
            "warped-s2-interval",
            "cigar-r-steady",
            "gaussian-shrinker-3",
            "polynomial-perturb-3",
            "conformal-flat-3",
            "conformal-flat-4",
            "flat-4",
            "polynomial-perturb-4",
            "polynomial-perturb-5"};
}

inline MetricFamily catalog_get(const std::string& name, const std::map<std::string, double>& params = {}) {
    using detail::param_or;
    MetricFamily fam;
    fam.name = name;
    const double pi = 3.14159265358979323846;
    auto box = [](int dim) { return std::vector<Interval>(static_cast<size_t>(dim), Interval{-1.0, 1.0}); };

    if (name == "flat-3" || name == "flat-4") {
        fam.dim = (name == "flat-3") ? 3 : 4;
        fam.components = detail::identity_components(fam.dim);
        fam.domain = box(fam.dim);
    } else if (name == "round-sphere-3") {
        double r = param_or(params, "r", 1.0);
        if (!(r > 0.0)) throw std::invalid_argument("round-sphere-3: radius must be positive");
        fam.dim = 3;
        fam.parameters["r"] = r;
        Expr psi = Expr::var(0), theta = Expr::var(1);
        Expr r2 = Expr::constant(r * r);
        fam.components = detail::identity_components(3);
        fam.comp(0, 0) = r2;
        fam.comp(1, 1) = r2 * sin(psi) * sin(psi);
        fam.comp(2, 2) = r2 * sin(psi) * sin(psi) * sin(theta) * sin(theta);
        // chart excludes the polar singularities at 0 and pi
        fam.domain = {{0.0, pi}, {0.0, pi}, {0.0, 2.0 * pi}};
        fam.soliton = SolitonData{Expr::constant(0.0), 2.0 / (r * r), SolitonKind::Shrinking};
    } else if (name == "hyperbolic-3") {
        fam.dim = 3;
        Expr z = Expr::var(2);
        fam.components = detail::identity_components(3);
        for (int i = 0; i < 3; ++i) fam.comp(i, i) = 1.0 / (z * z);
        fam.domain = {{-1.0, 1.0}, {-1.0, 1.0}, {0.5, 1.5}};
    } else if (name == "warped-s2-interval") {
        fam.dim = 3;
        Expr r = Expr::var(0), theta = Expr::var(1);
        Expr w = 1.0 + r * r / 10.0;
        fam.components = detail::identity_components(3);
        fam.comp(1, 1) = w * w;
        fam.comp(2, 2) = w * w * sin(theta) * sin(theta);
        fam.domain = {{-1.0, 1.0}, {0.0, pi}, {0.0, 2.0 * pi}};
    } else if (name == "cigar-r-steady") {
        fam.dim = 3;
        Expr x = Expr::var(0), y = Expr::var(1);
        Expr q = 1.0 / (1.0 + x * x + y * y);
        fam.components = detail::identity_components(3);
        fam.comp(0, 0) = q;
        fam.comp(1, 1) = q;
        fam.domain = box(3);
        fam.soliton = SolitonData{-log(1.0 + x * x + y * y), 0.0, SolitonKind::Steady};
    } else if (name == "gaussian-shrinker-3") {
        double lambda = param_or(params, "lambda", 0.5);
        fam.dim = 3;
        fam.parameters["lambda"] = lambda;
        fam.components = detail::identity_components(3);
        fam.domain = box(3);
        fam.soliton = SolitonData{detail::sum_of_squares(3) * (lambda / 2.0), lambda, soliton_kind_for(lambda)};
    } else if (name == "conformal-flat-3" || name == "conformal-flat-4") {
        // radial factor: rotationally symmetric, so conformal flatness is
        // preserved by the flow (required by the constraint suites)
        double a = param_or(params, "a", 0.1);
        fam.dim = (name == "conformal-flat-3") ? 3 : 4;
        fam.parameters["a"] = a;
        Expr conf = exp(detail::sum_of_squares(fam.dim) * (2.0 * a));
        fam.components = detail::identity_components(fam.dim);
        for (int i = 0; i < fam.dim; ++i) fam.comp(i, i) = conf;
        fam.domain = box(fam.dim);
    } else if (name == "polynomial-perturb-3" || name == "polynomial-perturb-4" ||
               name == "polynomial-perturb-5") {
        fam.dim = name.back() - '0';
        double eps = param_or(params, "eps", 0.05);
        double seed = param_or(params, "seed", 1.0);
        if (eps < 0.0 || eps > 0.15)
            throw std::invalid_argument("polynomial-perturb: eps must be in [0, 0.15] to keep g positive definite");
        fam.parameters["eps"] = eps;
        fam.parameters["seed"] = seed;
        fam.components = detail::perturb_components(fam.dim, static_cast<std::uint64_t>(seed), eps);
        fam.domain = box(fam.dim);
    } else {
        std::string best;
        size_t best_score = 1000;
        for (const auto& cand : catalog_names()) {
            size_t mismatch = 0;
            for (size_t i = 0; i < std::max(cand.size(), name.size()); ++i)
                if (i >= cand.size() || i >= name.size() || cand[i] != name[i]) ++mismatch;
            if (mismatch < best_score) { best_score = mismatch; best = cand; }
        }
        throw std::invalid_argument("unknown metric family '" + name + "' (nearest: '" + best + "')");
    }
    detail::check_known_params(fam, params);
    return fam;
}

/// "name" or "name:key=val,key=val"
inline MetricFamily catalog_get_spec(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) return catalog_get(spec);
    std::map<std::string, double> params;
    std::string rest = spec.substr(colon + 1);
    std::istringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("bad parameter '" + item + "' in family spec '" + spec + "'");
        params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    }
    return catalog_get(spec.substr(0, colon), params);
}

}  // namespace ril
