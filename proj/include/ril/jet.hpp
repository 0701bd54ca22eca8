#pragma once

// Truncated multivariate Taylor jets over dual coefficients.
//
// A JetScalar stores every spatial partial derivative of an analytic scalar
// up to a truncation degree, plus one nilpotent direction slot (s^2 = 0)
// used to carry the Ricci-flow variation. Arithmetic is exact to roundoff:
// products are truncated convolutions, division and the transcendental
// functions go through formal power-series composition.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "ril/dual.hpp"

namespace ril {

inline constexpr int kMaxDim = 5;
inline constexpr int kOrderExact = std::numeric_limits<int>::max();

using MultiIndex = std::array<std::uint8_t, kMaxDim>;

inline int multi_degree(const MultiIndex& m, int dim) {
    int d = 0;
    for (int i = 0; i < dim; ++i) d += m[i];
    return d;
}

/// Shared immutable tables for one (dim, order): the graded multi-index
/// basis, the truncated-convolution pairing and per-variable derivative maps.
class JetSpace {
public:
    struct Triple { std::uint32_t a, b, c; };
    struct DerivEntry { std::uint32_t src, dst; double factor; };

    static const JetSpace& get(int dim, int order);

    int dim() const { return dim_; }
    int order() const { return order_; }
    int size() const { return static_cast<int>(indices_.size()); }

    const MultiIndex& index_at(int i) const { return indices_[i]; }
    int position(const MultiIndex& m) const {
        auto it = pos_.find(key(m));
        if (it == pos_.end()) throw std::out_of_range("multi-index outside truncation order");
        return it->second;
    }

    const std::vector<Triple>& triples() const { return triples_; }
    // first triple index whose result degree exceeds d
    int triple_end_for_degree(int d) const {
        d = std::clamp(d, -1, order_);
        return triple_deg_end_[d + 1];
    }
    int coeff_end_for_degree(int d) const {
        d = std::clamp(d, -1, order_);
        return coeff_deg_end_[d + 1];
    }
    const std::vector<DerivEntry>& deriv_table(int var) const { return deriv_[var]; }

private:
    JetSpace(int dim, int order);

    static std::uint64_t key(const MultiIndex& m) {
        std::uint64_t k = 0;
        for (int i = 0; i < kMaxDim; ++i) k = (k << 8) | m[i];
        return k;
    }

    int dim_, order_;
    std::vector<MultiIndex> indices_;          // graded: sorted by (degree, lex)
    std::map<std::uint64_t, int> pos_;
    std::vector<Triple> triples_;              // sorted by degree of the result index
    std::vector<int> triple_deg_end_;          // size order+2, [-1..order] offsets
    std::vector<int> coeff_deg_end_;
    std::array<std::vector<DerivEntry>, kMaxDim> deriv_;
};

inline JetSpace::JetSpace(int dim, int order) : dim_(dim), order_(order) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("jet dimension must be in [1,5]");
    if (order < 0) throw std::invalid_argument("jet order must be nonnegative");
    std::vector<MultiIndex> cur;
    MultiIndex zero{};
    cur.push_back(zero);
    coeff_deg_end_.assign(order + 2, 0);
    for (int deg = 0; deg <= order; ++deg) {
        if (deg > 0) {
            std::vector<MultiIndex> next;
            // enumerate |m| = deg in lex order
            MultiIndex m{};
            // recursive fill without recursion: odometer over compositions
            std::vector<int> stack;
            auto emit = [&](MultiIndex mm) { next.push_back(mm); };
            // simple recursive lambda
            auto rec = [&](auto&& self, int var, int rem, MultiIndex mm) -> void {
                if (var == dim - 1) {
                    mm[var] = static_cast<std::uint8_t>(rem);
                    emit(mm);
                    return;
                }
                for (int v = 0; v <= rem; ++v) {
                    mm[var] = static_cast<std::uint8_t>(v);
                    self(self, var + 1, rem - v, mm);
                }
            };
            rec(rec, 0, deg, m);
            cur = std::move(next);
        }
        for (const auto& m : cur) indices_.push_back(m);
        coeff_deg_end_[deg + 1] = static_cast<int>(indices_.size());
    }
    for (int i = 0; i < static_cast<int>(indices_.size()); ++i) pos_[key(indices_[i])] = i;

    for (int i = 0; i < static_cast<int>(indices_.size()); ++i) {
        for (int j = 0; j < static_cast<int>(indices_.size()); ++j) {
            MultiIndex s{};
            int deg = 0;
            for (int v = 0; v < dim; ++v) {
                s[v] = static_cast<std::uint8_t>(indices_[i][v] + indices_[j][v]);
                deg += s[v];
            }
            if (deg > order) continue;
            triples_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                                static_cast<std::uint32_t>(pos_.at(key(s)))});
        }
    }
    std::sort(triples_.begin(), triples_.end(),
              [](const Triple& x, const Triple& y) { return x.c < y.c; });
    triple_deg_end_.assign(order + 2, 0);
    {
        int t = 0;
        for (int deg = 0; deg <= order; ++deg) {
            int cend = coeff_deg_end_[deg + 1];
            while (t < static_cast<int>(triples_.size()) && static_cast<int>(triples_[t].c) < cend) ++t;
            triple_deg_end_[deg + 1] = t;
        }
    }

    for (int v = 0; v < dim; ++v) {
        for (int i = 0; i < static_cast<int>(indices_.size()); ++i) {
            MultiIndex m = indices_[i];
            if (multi_degree(m, dim) == order) continue;
            m[v] = static_cast<std::uint8_t>(m[v] + 1);
            deriv_[v].push_back({static_cast<std::uint32_t>(pos_.at(key(m))),
                                 static_cast<std::uint32_t>(i), static_cast<double>(m[v])});
        }
    }
}

inline const JetSpace& JetSpace::get(int dim, int order) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<JetSpace>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{dim, order}];
    if (!slot) slot.reset(new JetSpace(dim, order));
    return *slot;
}

/// Evaluation setup for one expansion center.
struct JetConfig {
    int dim = 3;
    int order = 7;
    std::vector<double> point;
};

/// Truncated Taylor expansion with dual coefficients. Tracks, per part, up
/// to which total degree its coefficients are trustworthy: derivatives and
/// mixed-order products lower the validity without changing storage.
class JetScalar {
public:
    JetScalar() : space_(nullptr) {}
    explicit JetScalar(const JetSpace& sp)
        : space_(&sp), c_(sp.size()), ord_re_(sp.order()), ord_s_(kOrderExact) {}

    static JetScalar constant(const JetSpace& sp, Dual v) {
        JetScalar j(sp);
        j.c_[0] = v;
        j.ord_s_ = (v.du == 0.0) ? kOrderExact : sp.order();
        return j;
    }

    static JetScalar coordinate(const JetSpace& sp, int var, std::span<const double> center) {
        if (var < 0 || var >= sp.dim()) throw std::out_of_range("coordinate index out of range");
        JetScalar j(sp);
        j.c_[0] = Dual(center[var]);
        MultiIndex e{};
        e[var] = 1;
        j.c_[sp.position(e)] = Dual(1.0);
        return j;
    }

    const JetSpace& space() const { return *space_; }
    int order_re() const { return ord_re_; }
    int order_s() const { return ord_s_; }
    Dual& coeff(int i) { return c_[i]; }
    const Dual& coeff(int i) const { return c_[i]; }
    std::span<const Dual> coeffs() const { return c_; }

    /// Overwrite the s-part with given per-coefficient values (direction injection).
    void set_s_part(std::span<const double> s, int valid_order) {
        for (size_t i = 0; i < c_.size(); ++i) c_[i].du = s[i];
        ord_s_ = valid_order;
    }

    /// In-place real-part update this += a*x (s-part of x ignored).
    void axpy_real(double a, const JetScalar& x) {
        check_same(*this, x);
        for (size_t i = 0; i < c_.size(); ++i) c_[i].re += a * x.c_[i].re;
        ord_re_ = std::min(ord_re_, x.ord_re_);
    }

    Dual value() const { return c_[0]; }

    /// alpha! * c_alpha: the partial derivative and its flow variation at the center.
    Dual extract_partial(std::span<const int> alpha) const {
        MultiIndex m{};
        int deg = 0;
        double fact = 1.0;
        for (int v = 0; v < space_->dim(); ++v) {
            m[v] = static_cast<std::uint8_t>(alpha[v]);
            deg += alpha[v];
            for (int k = 2; k <= alpha[v]; ++k) fact *= k;
        }
        if (deg > space_->order()) throw std::out_of_range("partial order exceeds jet order");
        Dual c = c_[space_->position(m)];
        return {fact * c.re, fact * c.du};
    }

    JetScalar partial(int var) const {
        JetScalar out(*space_);
        for (const auto& e : space_->deriv_table(var)) out.c_[e.dst] = e.factor * c_[e.src];
        out.ord_re_ = ord_re_ - 1;
        out.ord_s_ = (ord_s_ == kOrderExact) ? kOrderExact : ord_s_ - 1;
        if (out.ord_re_ < 0) throw std::domain_error("jet order budget exhausted by derivative");
        return out;
    }

    JetScalar operator-() const {
        JetScalar out(*this);
        for (auto& c : out.c_) c = -c;
        return out;
    }

    friend JetScalar operator+(const JetScalar& a, const JetScalar& b) {
        check_same(a, b);
        JetScalar out(a);
        for (size_t i = 0; i < out.c_.size(); ++i) out.c_[i] += b.c_[i];
        out.ord_re_ = std::min(a.ord_re_, b.ord_re_);
        out.ord_s_ = std::min(a.ord_s_, b.ord_s_);
        return out;
    }
    friend JetScalar operator-(const JetScalar& a, const JetScalar& b) {
        check_same(a, b);
        JetScalar out(a);
        for (size_t i = 0; i < out.c_.size(); ++i) out.c_[i] -= b.c_[i];
        out.ord_re_ = std::min(a.ord_re_, b.ord_re_);
        out.ord_s_ = std::min(a.ord_s_, b.ord_s_);
        return out;
    }
    friend JetScalar operator*(const JetScalar& a, const JetScalar& b) {
        check_same(a, b);
        const JetSpace& sp = *a.space_;
        JetScalar out(sp);
        out.ord_re_ = std::min(a.ord_re_, b.ord_re_);
        out.ord_s_ = mul_s_order(a, b);
        const int tend = sp.triple_end_for_degree(std::min(out.ord_re_, sp.order()));
        const auto* tr = sp.triples().data();
        const Dual* pa = a.c_.data();
        const Dual* pb = b.c_.data();
        Dual* pc = out.c_.data();
        for (int t = 0; t < tend; ++t) {
            const auto& e = tr[t];
            const Dual& x = pa[e.a];
            const Dual& y = pb[e.b];
            pc[e.c].re += x.re * y.re;
            pc[e.c].du += x.re * y.du + x.du * y.re;
        }
        return out;
    }
    friend JetScalar operator*(const JetScalar& a, double k) {
        JetScalar out(a);
        for (auto& c : out.c_) c = c * k;
        return out;
    }
    friend JetScalar operator*(double k, const JetScalar& a) { return a * k; }
    friend JetScalar operator+(const JetScalar& a, double k) {
        JetScalar out(a);
        out.c_[0] += Dual(k);
        return out;
    }
    friend JetScalar operator+(double k, const JetScalar& a) { return a + k; }
    friend JetScalar operator-(const JetScalar& a, double k) { return a + (-k); }
    friend JetScalar operator-(double k, const JetScalar& a) { return (-a) + k; }
    friend JetScalar operator/(const JetScalar& a, const JetScalar& b);
    friend JetScalar operator/(const JetScalar& a, double k) { return a * (1.0 / k); }
    friend JetScalar operator/(double k, const JetScalar& b);

    /// Compose a univariate series with the nonconstant part of this jet.
    /// coeffs(a0, k) must return f^(k)(a0)/k!.
    template <class SeriesCoeffs>
    JetScalar compose(SeriesCoeffs&& coeffs) const {
        const JetSpace& sp = *space_;
        const int K = sp.order();
        const double a0 = c_[0].re;
        const double s0 = c_[0].du;
        JetScalar u(*this);
        u.c_[0] = Dual(0.0, 0.0);
        std::vector<double> d(K + 2);
        for (int k = 0; k <= K + 1; ++k) d[k] = coeffs(a0, k);
        auto cf = [&](int k) {
            return Dual(d[k], s0 * (k + 1) * d[k + 1]);
        };
        JetScalar res = constant(sp, cf(K));
        for (int k = K - 1; k >= 0; --k) res = res * u + constant(sp, cf(k));
        res.ord_re_ = ord_re_;
        res.ord_s_ = (ord_s_ == kOrderExact && s0 == 0.0) ? kOrderExact : std::min(ord_re_, ord_s_);
        return res;
    }

private:
    static void check_same(const JetScalar& a, const JetScalar& b) {
        if (a.space_ != b.space_) throw std::invalid_argument("jet (dim, order) mismatch");
    }
    static int mul_s_order(const JetScalar& a, const JetScalar& b) {
        int t1 = (b.ord_s_ == kOrderExact) ? kOrderExact : std::min(a.ord_re_, b.ord_s_);
        int t2 = (a.ord_s_ == kOrderExact) ? kOrderExact : std::min(a.ord_s_, b.ord_re_);
        return std::min(t1, t2);
    }

    const JetSpace* space_;
    std::vector<Dual> c_;
    int ord_re_ = 0;
    int ord_s_ = kOrderExact;
};

namespace detail {
inline double falling_product(double p, int k) {
    double c = 1.0;
    for (int i = 0; i < k; ++i) c *= (p - i) / (i + 1);
    return c;  // binomial(p, k)
}
}  // namespace detail

inline JetScalar exp(const JetScalar& x) {
    return x.compose([](double a0, int k) {
        double f = std::exp(a0);
        for (int i = 1; i <= k; ++i) f /= i;
        return f;
    });
}

inline JetScalar log(const JetScalar& x) {
    if (x.value().re <= 0.0) throw std::domain_error("log of jet with nonpositive constant term");
    return x.compose([](double a0, int k) {
        if (k == 0) return std::log(a0);
        double s = (k % 2 == 0) ? -1.0 : 1.0;
        return s / (k * std::pow(a0, k));
    });
}

inline JetScalar sin(const JetScalar& x) {
    return x.compose([](double a0, int k) {
        double f = std::sin(a0 + k * 1.5707963267948966);
        for (int i = 1; i <= k; ++i) f /= i;
        return f;
    });
}

inline JetScalar cos(const JetScalar& x) {
    return x.compose([](double a0, int k) {
        double f = std::cos(a0 + k * 1.5707963267948966);
        for (int i = 1; i <= k; ++i) f /= i;
        return f;
    });
}

inline JetScalar pow(const JetScalar& x, double p) {
    if (x.value().re <= 0.0) throw std::domain_error("pow of jet with nonpositive constant term");
    return x.compose([p](double a0, int k) {
        return detail::falling_product(p, k) * std::pow(a0, p - k);
    });
}

inline JetScalar sqrt(const JetScalar& x) { return pow(x, 0.5); }

inline JetScalar operator/(const JetScalar& a, const JetScalar& b) {
    if (b.value().re == 0.0) throw std::domain_error("division by jet with zero constant term");
    JetScalar inv = b.compose([](double a0, int k) {
        double f = 1.0 / a0;
        for (int i = 0; i < k; ++i) f *= -1.0 / a0;
        return f;
    });
    return a * inv;
}

inline JetScalar operator/(double k, const JetScalar& b) {
    return JetScalar::constant(b.space(), Dual(k)) / b;
}

inline JetScalar lift_coordinate(int var, const JetConfig& cfg) {
    const JetSpace& sp = JetSpace::get(cfg.dim, cfg.order);
    return JetScalar::coordinate(sp, var, cfg.point);
}

}  // namespace ril
