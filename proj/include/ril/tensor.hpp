#pragma once

// Dense tensor containers: jet-valued fields for the curvature engine,
// dual-valued point components for identity evaluation, and plain double
// arrays for residual assembly. Dimensions are tiny (<= 5), storage is a
// flat dim^rank block in row-major index order.

#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ril/jet.hpp"

namespace ril {

enum class Slot : std::uint8_t { Down, Up };
using Valence = std::vector<Slot>;

inline Valence downs(int rank) { return Valence(static_cast<size_t>(rank), Slot::Down); }
inline Valence ups(int rank) { return Valence(static_cast<size_t>(rank), Slot::Up); }

namespace detail {
inline int pow_int(int b, int e) {
    int r = 1;
    while (e-- > 0) r *= b;
    return r;
}
}  // namespace detail

/// Plain dense double tensor, used for pointwise residual assembly.
class Nd {
public:
    Nd() : dim_(0), rank_(0) {}
    Nd(int dim, int rank) : dim_(dim), rank_(rank), v_(detail::pow_int(dim, rank), 0.0) {}

    int dim() const { return dim_; }
    int rank() const { return rank_; }
    size_t size() const { return v_.size(); }
    std::span<const double> flat() const { return v_; }
    double& flat(size_t i) { return v_[i]; }
    double flat(size_t i) const { return v_[i]; }

    template <class... I>
    double& operator()(I... idx) {
        return v_[offset(idx...)];
    }
    template <class... I>
    double operator()(I... idx) const {
        return v_[offset(idx...)];
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : v_) m = std::max(m, std::abs(x));
        return m;
    }

    Nd& operator+=(const Nd& o) {
        for (size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
        return *this;
    }
    Nd& operator-=(const Nd& o) {
        for (size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Nd& operator*=(double k) {
        for (auto& x : v_) x *= k;
        return *this;
    }
    friend Nd operator+(Nd a, const Nd& b) { return a += b; }
    friend Nd operator-(Nd a, const Nd& b) { return a -= b; }
    friend Nd operator*(Nd a, double k) { return a *= k; }
    friend Nd operator*(double k, Nd a) { return a *= k; }

private:
    template <class... I>
    size_t offset(I... idx) const {
        size_t off = 0;
        ((off = off * dim_ + static_cast<size_t>(idx)), ...);
        return off;
    }
    int dim_, rank_;
    std::vector<double> v_;
};

/// r = |L - R|_inf / (1 + max(|L|_inf, |R|_inf))
inline double normalized_residual(const Nd& lhs, const Nd& rhs) {
    double d = 0.0;
    for (size_t i = 0; i < lhs.size(); ++i) d = std::max(d, std::abs(lhs.flat(i) - rhs.flat(i)));
    return d / (1.0 + std::max(lhs.max_abs(), rhs.max_abs()));
}
inline double normalized_residual(double lhs, double rhs) {
    return std::abs(lhs - rhs) / (1.0 + std::max(std::abs(lhs), std::abs(rhs)));
}

/// Pointwise tensor record: one Dual per component, the s slot carrying the
/// flow variation. order_used tracks how many metric-jet derivative orders
/// the construction consumed.
class TensorComponents {
public:
    TensorComponents() : dim_(0) {}
    TensorComponents(int dim, Valence val, int order_used = 0, int s_order = kOrderExact)
        : dim_(dim), val_(std::move(val)),
          d_(detail::pow_int(dim, static_cast<int>(val_.size()))),
          order_used_(order_used), s_order_(s_order) {}

    int dim() const { return dim_; }
    int rank() const { return static_cast<int>(val_.size()); }
    const Valence& valence() const { return val_; }
    int order_used() const { return order_used_; }
    int s_order() const { return s_order_; }
    bool s_valid() const { return s_order_ >= 0; }
    size_t size() const { return d_.size(); }
    Dual& flat(size_t i) { return d_[i]; }
    const Dual& flat(size_t i) const { return d_[i]; }

    template <class... I>
    Dual& at(I... idx) {
        return d_[offset(idx...)];
    }
    template <class... I>
    const Dual& at(I... idx) const {
        return d_[offset(idx...)];
    }
    template <class... I>
    double re(I... idx) const {
        return d_[offset(idx...)].re;
    }
    template <class... I>
    double s(I... idx) const {
        if (!s_valid()) throw std::domain_error("s-part order budget exhausted for this tensor");
        return d_[offset(idx...)].du;
    }

    Nd re_array() const {
        Nd out(dim_, rank());
        for (size_t i = 0; i < d_.size(); ++i) out.flat(i) = d_[i].re;
        return out;
    }
    Nd s_array() const {
        if (!s_valid()) throw std::domain_error("s-part order budget exhausted for this tensor");
        Nd out(dim_, rank());
        for (size_t i = 0; i < d_.size(); ++i) out.flat(i) = d_[i].du;
        return out;
    }

private:
    template <class... I>
    size_t offset(I... idx) const {
        size_t off = 0;
        ((off = off * dim_ + static_cast<size_t>(idx)), ...);
        return off;
    }
    int dim_;
    Valence val_;
    std::vector<Dual> d_;
    int order_used_ = 0;
    int s_order_ = kOrderExact;
};

/// Jet-valued tensor field around the expansion center; the carrier of
/// covariant differentiation.
class JetTensor {
public:
    JetTensor() : space_(nullptr), dim_(0) {}
    JetTensor(const JetSpace& sp, Valence val)
        : space_(&sp), dim_(sp.dim()), val_(std::move(val)),
          d_(detail::pow_int(dim_, static_cast<int>(val_.size())), JetScalar(sp)) {}

    const JetSpace& space() const { return *space_; }
    int dim() const { return dim_; }
    int rank() const { return static_cast<int>(val_.size()); }
    const Valence& valence() const { return val_; }
    size_t size() const { return d_.size(); }
    JetScalar& flat(size_t i) { return d_[i]; }
    const JetScalar& flat(size_t i) const { return d_[i]; }

    template <class... I>
    JetScalar& operator()(I... idx) {
        return d_[offset(idx...)];
    }
    template <class... I>
    const JetScalar& operator()(I... idx) const {
        return d_[offset(idx...)];
    }

    void decode(size_t flat, std::span<int> idx) const {
        for (int a = rank() - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(flat % dim_);
            flat /= dim_;
        }
    }
    size_t encode(std::span<const int> idx) const {
        size_t off = 0;
        for (int a = 0; a < rank(); ++a) off = off * dim_ + static_cast<size_t>(idx[a]);
        return off;
    }

    int min_order_re() const {
        int m = kOrderExact;
        for (const auto& j : d_) m = std::min(m, j.order_re());
        return m;
    }
    int min_order_s() const {
        int m = kOrderExact;
        for (const auto& j : d_) m = std::min(m, j.order_s());
        return m;
    }

    /// Point values at the expansion center.
    TensorComponents value() const {
        TensorComponents out(dim_, val_, space_->order() - min_order_re(), min_order_s());
        for (size_t i = 0; i < d_.size(); ++i) out.flat(i) = d_[i].value();
        return out;
    }

private:
    template <class... I>
    size_t offset(I... idx) const {
        size_t off = 0;
        ((off = off * dim_ + static_cast<size_t>(idx)), ...);
        return off;
    }
    const JetSpace* space_;
    int dim_;
    Valence val_;
    std::vector<JetScalar> d_;
};

/// Contract two slots of a pointwise tensor. Up-down slot pairs contract
/// directly; like pairs consume the supplied metric (both down -> pass
/// g^{-1}, both up -> pass g).
inline TensorComponents contract(const TensorComponents& t, int s1, int s2,
                                 const TensorComponents* metric = nullptr) {
    const int n = t.dim();
    const int r = t.rank();
    if (s1 > s2) std::swap(s1, s2);
    if (s1 < 0 || s2 >= r || s1 == s2) throw std::invalid_argument("bad contraction slots");
    const bool like = t.valence()[s1] == t.valence()[s2];
    if (like && metric == nullptr)
        throw std::invalid_argument("like-valence contraction requires a metric");
    Valence val;
    for (int a = 0; a < r; ++a)
        if (a != s1 && a != s2) val.push_back(t.valence()[a]);
    TensorComponents out(n, val, t.order_used(), t.s_order());
    std::vector<int> idx(static_cast<size_t>(r));
    const size_t out_sz = out.size();
    for (size_t of = 0; of < out_sz; ++of) {
        // decode output indices
        size_t rest = of;
        std::vector<int> oidx(static_cast<size_t>(r - 2));
        for (int a = r - 3; a >= 0; --a) {
            oidx[a] = static_cast<int>(rest % n);
            rest /= n;
        }
        Dual acc(0.0);
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) {
                if (!like && p != q) continue;
                int o = 0;
                for (int a = 0; a < r; ++a) {
                    if (a == s1) idx[a] = p;
                    else if (a == s2) idx[a] = q;
                    else idx[a] = oidx[o++];
                }
                size_t off = 0;
                for (int a = 0; a < r; ++a) off = off * n + static_cast<size_t>(idx[a]);
                Dual v = t.flat(off);
                if (like) v = v * metric->at(p, q);
                acc += v;
            }
        out.flat(of) = acc;
    }
    return out;
}

/// Raise one slot of a double tensor with the inverse metric (or lower with g).
inline Nd raise_slot(const Nd& gi, const Nd& t, int slot) {
    const int n = t.dim();
    Nd out(n, t.rank());
    const size_t sz = t.size();
    size_t stride = 1;
    for (int a = t.rank() - 1; a > slot; --a) stride *= static_cast<size_t>(n);
    for (size_t f = 0; f < sz; ++f) {
        size_t a_idx = (f / stride) % static_cast<size_t>(n);
        double acc = 0.0;
        size_t base = f - a_idx * stride;
        for (int m = 0; m < n; ++m) acc += gi(static_cast<int>(a_idx), m) * t.flat(base + static_cast<size_t>(m) * stride);
        out.flat(f) = acc;
    }
    return out;
}

}  // namespace ril
