#pragma once

// Pointwise curvature of a metric jet: Christoffel symbols, Riemann, Ricci,
// scalar curvature, Weyl, Schouten, Cotton and Bach tensors, plus memoized
// covariant-derivative chains of any of them. Sign conventions follow the
// round-sphere-positive Riemann operator
//   Riem(X,Y)Z = nabla_Y nabla_X Z - nabla_X nabla_Y Z + nabla_[X,Y] Z,
//   R^l_ijk d_l = Riem(d_i, d_j) d_k,   R_ijkl = g_lm R^m_ijk.
//
// A bundle is built per sample point and is not shared across threads;
// lazy construction is unsynchronized by design.

#include <map>
#include <optional>
#include <stdexcept>
#include <utility>

#include "ril/catalog.hpp"
#include "ril/jet.hpp"
#include "ril/tensor.hpp"

namespace ril {

enum class Field {
    Metric,
    InvMetric,
    Riemann,       // (4,0), all slots down
    Ricci,
    ScalarCurv,    // rank 0
    Weyl,
    Schouten,
    Cotton,
    Bach,
    RicciNormSq,   // |Ric|^2, rank 0
    CottonNormSq,  // |C|^2, rank 0
    BachNormSq,    // |B|^2, rank 0
    Potential,     // soliton f, rank 0
};

class CurvatureBundle {
public:
    explicit CurvatureBundle(JetTensor metric, std::optional<JetScalar> potential = {})
        : space_(&metric.space()), dim_(metric.dim()), g_(std::move(metric)) {
        if (potential) {
            JetTensor f(*space_, Valence{});
            f.flat(0) = std::move(*potential);
            fields_[Field::Potential] = std::move(f);
        }
    }

    int dim() const { return dim_; }
    const JetSpace& space() const { return *space_; }
    bool has_potential() const { return fields_.count(Field::Potential) > 0; }

    const JetTensor& metric() const { return g_; }

    const JetTensor& inverse_metric() { return field(Field::InvMetric); }

    /// Gamma^k_ij, stored as (k; i, j).
    const JetTensor& christoffel() {
        if (!gamma_) {
            const JetTensor& gi = inverse_metric();
            JetTensor dg(*space_, downs(3));  // dg(s,i,j) = d_s g_ij
            for (int s = 0; s < dim_; ++s)
                for (int i = 0; i < dim_; ++i)
                    for (int j = 0; j < dim_; ++j) dg(s, i, j) = g_(i, j).partial(s);
            JetTensor G(*space_, Valence{Slot::Up, Slot::Down, Slot::Down});
            for (int k = 0; k < dim_; ++k)
                for (int i = 0; i < dim_; ++i)
                    for (int j = i; j < dim_; ++j) {
                        JetScalar acc(*space_);
                        for (int s = 0; s < dim_; ++s)
                            acc = acc + gi(k, s) * (dg(i, j, s) + dg(j, i, s) - dg(s, i, j));
                        G(k, i, j) = acc * 0.5;
                        if (i != j) G(k, j, i) = G(k, i, j);
                    }
            gamma_ = std::move(G);
        }
        return *gamma_;
    }

    /// R^l_ijk, stored as (l; i, j, k).
    const JetTensor& riemann31() {
        if (!riem31_) {
            const JetTensor& G = christoffel();
            JetTensor R(*space_, Valence{Slot::Up, Slot::Down, Slot::Down, Slot::Down});
            for (int l = 0; l < dim_; ++l)
                for (int i = 0; i < dim_; ++i)
                    for (int j = 0; j < dim_; ++j) {
                        if (i == j) continue;  // antisymmetric in (i, j); zero-filled diagonal
                        if (j < i) {
                            for (int k = 0; k < dim_; ++k) R(l, i, j, k) = -R(l, j, i, k);
                            continue;
                        }
                        for (int k = 0; k < dim_; ++k) {
                            JetScalar acc = G(l, i, k).partial(j) - G(l, j, k).partial(i);
                            for (int m = 0; m < dim_; ++m)
                                acc = acc + G(m, i, k) * G(l, j, m) - G(m, j, k) * G(l, i, m);
                            R(l, i, j, k) = acc;
                        }
                    }
            riem31_ = std::move(R);
        }
        return *riem31_;
    }

    const JetScalar& scalar_curvature() { return field(Field::ScalarCurv).flat(0); }
    const JetScalar& potential() {
        if (!has_potential()) throw std::domain_error("family carries no soliton potential");
        return field(Field::Potential).flat(0);
    }

    const JetTensor& field(Field f) {
        auto it = fields_.find(f);
        if (it != fields_.end()) return it->second;
        JetTensor t = compute(f);
        return fields_.emplace(f, std::move(t)).first->second;
    }

    /// k-th covariant derivative of a named field, memoized.
    const JetTensor& covd(Field f, int k) {
        if (k == 0) return field(f);
        auto key = std::make_pair(f, k);
        auto it = derivs_.find(key);
        if (it != derivs_.end()) return it->second;
        JetTensor t = covariant_derivative(covd(f, k - 1));
        return derivs_.emplace(key, std::move(t)).first->second;
    }

    /// nabla T with the derivative slot prepended; valence-aware.
    JetTensor covariant_derivative(const JetTensor& t) {
        const JetTensor& G = christoffel();
        Valence val;
        val.push_back(Slot::Down);
        for (Slot s : t.valence()) val.push_back(s);
        JetTensor out(*space_, val);
        const int r = t.rank();
        std::vector<int> idx(static_cast<size_t>(std::max(r, 1)));
        std::vector<int> jdx(static_cast<size_t>(std::max(r, 1)));
        for (size_t f = 0; f < t.size(); ++f) {
            t.decode(f, idx);
            for (int s = 0; s < dim_; ++s) {
                JetScalar acc = t.flat(f).partial(s);
                for (int a = 0; a < r; ++a) {
                    jdx = idx;
                    if (t.valence()[static_cast<size_t>(a)] == Slot::Down) {
                        for (int m = 0; m < dim_; ++m) {
                            jdx[static_cast<size_t>(a)] = m;
                            acc = acc - G(m, s, idx[static_cast<size_t>(a)]) * t.flat(t.encode(jdx));
                        }
                    } else {
                        for (int m = 0; m < dim_; ++m) {
                            jdx[static_cast<size_t>(a)] = m;
                            acc = acc + G(idx[static_cast<size_t>(a)], s, m) * t.flat(t.encode(jdx));
                        }
                    }
                }
                std::vector<int> odx(static_cast<size_t>(r + 1));
                odx[0] = s;
                for (int a = 0; a < r; ++a) odx[static_cast<size_t>(a + 1)] = idx[static_cast<size_t>(a)];
                out.flat(out.encode(odx)) = std::move(acc);
            }
        }
        return out;
    }

    /// Full g-contraction |T|^2 of an all-down tensor, as a scalar jet.
    JetScalar norm_squared_jet(const JetTensor& t) {
        const JetTensor& gi = inverse_metric();
        JetTensor u = t;
        for (int slot = 0; slot < t.rank(); ++slot) u = raise_jet_slot(gi, u, slot);
        JetScalar acc(*space_);
        for (size_t f = 0; f < t.size(); ++f) acc = acc + u.flat(f) * t.flat(f);
        return acc;
    }

    TensorComponents value(Field f) { return field(f).value(); }
    TensorComponents covd_value(Field f, int k) { return covd(f, k).value(); }

    /// Rough Laplacian Delta T = g^{ab} nabla_a nabla_b T at the center.
    TensorComponents laplacian_value(Field f) { return trace_first_two(covd(f, 2).value()); }

    TensorComponents trace_first_two(const TensorComponents& t2) {
        TensorComponents giv = value(Field::InvMetric);
        Valence val(t2.valence().begin() + 2, t2.valence().end());
        TensorComponents out(dim_, val, t2.order_used(),
                             std::min(t2.s_order(), giv.s_order()));
        const size_t block = out.size();
        for (size_t f = 0; f < block; ++f) {
            Dual acc(0.0);
            for (int a = 0; a < dim_; ++a)
                for (int b = 0; b < dim_; ++b)
                    acc += giv.at(a, b) * t2.flat((static_cast<size_t>(a) * dim_ + b) * block + f);
            out.flat(f) = acc;
        }
        return out;
    }

    JetTensor raise_jet_slot(const JetTensor& gi, const JetTensor& t, int slot) {
        Valence val = t.valence();
        val[static_cast<size_t>(slot)] = Slot::Up;
        JetTensor out(*space_, val);
        const int r = t.rank();
        std::vector<int> idx(static_cast<size_t>(r));
        for (size_t f = 0; f < t.size(); ++f) {
            t.decode(f, idx);
            JetScalar acc(*space_);
            std::vector<int> jdx = idx;
            for (int m = 0; m < dim_; ++m) {
                jdx[static_cast<size_t>(slot)] = m;
                acc = acc + gi(idx[static_cast<size_t>(slot)], m) * t.flat(t.encode(jdx));
            }
            out.flat(f) = std::move(acc);
        }
        return out;
    }

private:
    JetTensor compute(Field f) {
        switch (f) {
            case Field::Metric: return g_;
            case Field::InvMetric: return invert_metric();
            case Field::Riemann: return compute_riemann40();
            case Field::Ricci: return compute_ricci();
            case Field::ScalarCurv: return compute_scalar();
            case Field::Weyl: return compute_weyl();
            case Field::Schouten: return compute_schouten();
            case Field::Cotton: return compute_cotton();
            case Field::Bach: return compute_bach();
            case Field::RicciNormSq: return scalar_field(norm_squared_jet(field(Field::Ricci)));
            case Field::CottonNormSq: return scalar_field(norm_squared_jet(field(Field::Cotton)));
            case Field::BachNormSq: return scalar_field(norm_squared_jet(field(Field::Bach)));
            case Field::Potential: throw std::domain_error("family carries no soliton potential");
        }
        throw std::logic_error("unknown field");
    }

    JetTensor scalar_field(JetScalar s) {
        JetTensor t(*space_, Valence{});
        t.flat(0) = std::move(s);
        return t;
    }

    JetTensor invert_metric() {
        const int n = dim_;
        // Gauss-Jordan on jets; pivots are nonzero because g is PD at the center
        std::vector<std::vector<JetScalar>> aug(
            static_cast<size_t>(n), std::vector<JetScalar>(static_cast<size_t>(2 * n), JetScalar(*space_)));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) aug[i][j] = g_(i, j);
            aug[i][static_cast<size_t>(n + i)] = JetScalar::constant(*space_, Dual(1.0));
        }
        for (int col = 0; col < n; ++col) {
            if (aug[col][col].value().re == 0.0) throw std::domain_error("metric not invertible at center");
            JetScalar inv = 1.0 / aug[col][col];
            for (int j = 0; j < 2 * n; ++j) aug[col][j] = aug[col][j] * inv;
            for (int r = 0; r < n; ++r) {
                if (r == col) continue;
                JetScalar fct = aug[r][col];
                if (fct.value().re == 0.0) {
                    bool all_zero = true;
                    for (const Dual& c : fct.coeffs())
                        if (c.re != 0.0 || c.du != 0.0) { all_zero = false; break; }
                    if (all_zero) continue;
                }
                for (int j = 0; j < 2 * n; ++j) aug[r][j] = aug[r][j] - fct * aug[col][j];
            }
        }
        JetTensor out(*space_, ups(2));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out(i, j) = aug[i][static_cast<size_t>(n + j)];
        return out;
    }

    JetTensor compute_riemann40() {
        const JetTensor& r31 = riemann31();
        JetTensor out(*space_, downs(4));
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
                for (int k = 0; k < dim_; ++k)
                    for (int l = 0; l < dim_; ++l) {
                        JetScalar acc(*space_);
                        for (int m = 0; m < dim_; ++m) acc = acc + g_(l, m) * r31(m, i, j, k);
                        out(i, j, k, l) = std::move(acc);
                    }
        return out;
    }

    JetTensor compute_ricci() {
        const JetTensor& r4 = field(Field::Riemann);
        const JetTensor& gi = inverse_metric();
        JetTensor out(*space_, downs(2));
        for (int i = 0; i < dim_; ++i)
            for (int k = i; k < dim_; ++k) {
                JetScalar acc(*space_);
                for (int j = 0; j < dim_; ++j)
                    for (int l = 0; l < dim_; ++l) acc = acc + gi(j, l) * r4(i, j, k, l);
                out(i, k) = acc;
                if (i != k) out(k, i) = out(i, k);
            }
        return out;
    }

    JetTensor compute_scalar() {
        const JetTensor& ric = field(Field::Ricci);
        const JetTensor& gi = inverse_metric();
        JetScalar acc(*space_);
        for (int i = 0; i < dim_; ++i)
            for (int k = 0; k < dim_; ++k) acc = acc + gi(i, k) * ric(i, k);
        return scalar_field(std::move(acc));
    }

    JetTensor compute_schouten() {
        const JetTensor& ric = field(Field::Ricci);
        const JetScalar& r = scalar_curvature();
        JetTensor out(*space_, downs(2));
        const double c = 1.0 / (2.0 * (dim_ - 1));
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) out(i, j) = ric(i, j) - c * (r * g_(i, j));
        return out;
    }

    JetTensor compute_weyl() {
        if (dim_ < 3) throw std::domain_error("Weyl tensor needs dimension >= 3");
        const JetTensor& r4 = field(Field::Riemann);
        const JetTensor& ric = field(Field::Ricci);
        const JetScalar& r = scalar_curvature();
        const double c1 = 1.0 / (dim_ - 2);
        const double c2 = 1.0 / ((dim_ - 1) * (dim_ - 2));
        JetTensor out(*space_, downs(4));
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
                for (int k = 0; k < dim_; ++k)
                    for (int l = 0; l < dim_; ++l)
                        out(i, j, k, l) =
                            r4(i, j, k, l)
                            - c1 * (ric(i, k) * g_(j, l) - ric(i, l) * g_(j, k) + ric(j, l) * g_(i, k) -
                                    ric(j, k) * g_(i, l))
                            + c2 * (r * (g_(i, k) * g_(j, l) - g_(i, l) * g_(j, k)));
        return out;
    }

    JetTensor compute_cotton() {
        const JetTensor& dric = covd(Field::Ricci, 1);     // (s; i, j) = nabla_s R_ij
        const JetTensor& dr = covd(Field::ScalarCurv, 1);  // (s) = nabla_s R
        const double c = 1.0 / (2.0 * (dim_ - 1));
        JetTensor out(*space_, downs(3));
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
                for (int k = 0; k < dim_; ++k)
                    out(i, j, k) = dric(k, i, j) - dric(j, i, k) -
                                   c * (dr(k) * g_(i, j) - dr(j) * g_(i, k));
        return out;
    }

    JetTensor compute_bach() {
        const JetTensor& dc = covd(Field::Cotton, 1);  // (s; i, j, k) = nabla_s C_ijk
        const JetTensor& gi = inverse_metric();
        JetTensor out(*space_, downs(2));
        for (int i = 0; i < dim_; ++i)
            for (int k = 0; k < dim_; ++k) {
                JetScalar acc(*space_);
                for (int s = 0; s < dim_; ++s)
                    for (int j = 0; j < dim_; ++j) acc = acc + gi(s, j) * dc(s, i, j, k);
                out(i, k) = std::move(acc);
            }
        if (dim_ > 3) {
            const JetTensor& w = field(Field::Weyl);
            const JetTensor& ric = field(Field::Ricci);
            JetTensor ricup(*space_, ups(2));  // R^{jl}
            for (int j = 0; j < dim_; ++j)
                for (int l = 0; l < dim_; ++l) {
                    JetScalar acc(*space_);
                    for (int a = 0; a < dim_; ++a)
                        for (int b = 0; b < dim_; ++b) acc = acc + gi(j, a) * gi(l, b) * ric(a, b);
                    ricup(j, l) = std::move(acc);
                }
            const double c = 1.0 / (dim_ - 2);
            for (int i = 0; i < dim_; ++i)
                for (int k = 0; k < dim_; ++k) {
                    JetScalar acc = out(i, k);
                    for (int j = 0; j < dim_; ++j)
                        for (int l = 0; l < dim_; ++l) acc = acc - ricup(j, l) * w(i, j, k, l);
                    out(i, k) = c * acc;
                }
        }
        return out;
    }

    const JetSpace* space_;
    int dim_;
    JetTensor g_;
    std::optional<JetTensor> gamma_, riem31_;
    std::map<Field, JetTensor> fields_;
    std::map<std::pair<Field, int>, JetTensor> derivs_;
};

/// Bundle for a catalog family at a sample point (optionally with a
/// direction injected into the s slot of the metric jets).
inline CurvatureBundle build_bundle(const MetricFamily& fam, std::span<const double> p,
                                    const JetConfig& cfg, const JetTensor* direction = nullptr) {
    JetTensor g = evaluate_metric_jet(fam, p, cfg, direction);
    std::optional<JetScalar> f;
    if (fam.soliton) {
        const JetSpace& sp = JetSpace::get(cfg.dim, cfg.order);
        std::vector<JetScalar> vars;
        for (int i = 0; i < fam.dim; ++i) vars.push_back(JetScalar::coordinate(sp, i, p));
        f = fam.soliton->potential.eval<JetScalar>(vars);
    }
    return CurvatureBundle(std::move(g), std::move(f));
}

}  // namespace ril
