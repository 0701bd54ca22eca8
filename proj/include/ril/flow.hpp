#pragma once

// Ricci-flow linearization: dt along the flow is realized as the Gateaux
// derivative in the direction h = -2 Ric(g), injected into the s slot of the
// metric jets. Every tensor extracted from the varied bundle then carries
// its fixed-coordinate time derivative at t = 0 in the s part.

#include <span>
#include <vector>

#include "ril/catalog.hpp"
#include "ril/curvature.hpp"

namespace ril {

/// h = scale * Ric(g) as a plain (real) jet field of spatial order cfg.order - 2.
inline JetTensor ricci_direction(const MetricFamily& fam, std::span<const double> p,
                                 const JetConfig& cfg, double scale = -2.0) {
    CurvatureBundle base = build_bundle(fam, p, cfg);
    JetTensor h = base.field(Field::Ricci);
    for (size_t i = 0; i < h.size(); ++i) h.flat(i) = h.flat(i) * scale;
    return h;
}

/// Varied bundle carrying g + s*h. The family, point and direction are kept
/// so evolution suites can rebuild the finite-difference cross-oracle.
struct FlowVariation {
    const MetricFamily* family = nullptr;
    std::vector<double> point;
    JetConfig cfg;
    JetTensor direction;       // h, real jets
    CurvatureBundle bundle;    // built from g + s*h

    CurvatureBundle& varied() { return bundle; }
};

/// direction_scale multiplies the default h = -2 Ric (1.0 for the flow).
inline FlowVariation make_flow_variation(const MetricFamily& fam, std::span<const double> p,
                                         const JetConfig& cfg, double direction_scale = 1.0) {
    JetTensor h = ricci_direction(fam, p, cfg, -2.0 * direction_scale);
    CurvatureBundle varied = build_bundle(fam, p, cfg, &h);
    return FlowVariation{&fam, std::vector<double>(p.begin(), p.end()), cfg, std::move(h),
                         std::move(varied)};
}

/// Bundle of the straight-line metric g + t*h with real coefficients only;
/// the centered-difference oracle for dt evaluates fields on two of these.
inline CurvatureBundle build_shifted_bundle(const FlowVariation& var, double t) {
    JetTensor g = evaluate_metric_jet(*var.family, var.point, var.cfg);
    for (int i = 0; i < g.dim(); ++i)
        for (int j = 0; j < g.dim(); ++j) g(i, j).axpy_real(t, var.direction(i, j));
    std::optional<JetScalar> f;
    if (var.family->soliton) {
        const JetSpace& sp = JetSpace::get(var.cfg.dim, var.cfg.order);
        std::vector<JetScalar> vars;
        for (int i = 0; i < g.dim(); ++i) vars.push_back(JetScalar::coordinate(sp, i, var.point));
        f = var.family->soliton->potential.eval<JetScalar>(vars);
    }
    return CurvatureBundle(std::move(g), std::move(f));
}

/// dt T at t = 0: the s part of the varied field's point value.
inline Nd time_derivative(FlowVariation& var, Field f) { return var.bundle.value(f).s_array(); }

/// (dt - Delta) T at t = 0.
inline Nd heat_operator(FlowVariation& var, Field f) {
    return var.bundle.value(f).s_array() - var.bundle.laplacian_value(f).re_array();
}

/// Centered finite-difference dt of a field along g + t*h (step tau),
/// the cross-oracle guarding the dual-direction path.
inline Nd fd_time_derivative(const FlowVariation& var, Field f, double tau = 1e-4) {
    CurvatureBundle plus = build_shifted_bundle(var, tau);
    CurvatureBundle minus = build_shifted_bundle(var, -tau);
    Nd a = plus.value(f).re_array();
    Nd b = minus.value(f).re_array();
    return (a - b) * (1.0 / (2.0 * tau));
}

}  // namespace ril
