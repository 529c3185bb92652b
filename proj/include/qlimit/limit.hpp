#ifndef QLIMIT_LIMIT_HPP
#define QLIMIT_LIMIT_HPP

// Closed-form residuals of the Dirac and von Neumann conditions for field,
// Weyl, creation/annihilation and number quantities, and their matrix
// counterparts in the grid representation.

#include <qlimit/algebra.hpp>
#include <qlimit/error.hpp>
#include <qlimit/rep.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qlimit::limit {

using algebra::complex_structure;
using algebra::cplx;
using algebra::symplectic_space;
using algebra::vec;

enum class kind { weyl_gen, field, annihilator, creator, number };
enum class condition { dirac, von_neumann, quantize_number };

inline const char* kind_name(kind k) {
    switch (k) {
    case kind::weyl_gen: return "WeylGen";
    case kind::field: return "Field";
    case kind::annihilator: return "Annihilator";
    case kind::creator: return "Creator";
    case kind::number: return "Number";
    }
    return "?";
}

inline const char* condition_name(condition c) {
    switch (c) {
    case condition::dirac: return "Dirac";
    case condition::von_neumann: return "VonNeumann";
    case condition::quantize_number: return "QuantizeNumber";
    }
    return "?";
}

struct quantity {
    kind k = kind::field;
    vec F;
    std::optional<complex_structure> J0;

    static quantity weyl(vec F) { return {kind::weyl_gen, std::move(F), std::nullopt}; }
    static quantity field(vec F) { return {kind::field, std::move(F), std::nullopt}; }
    static quantity annihilator(vec F, complex_structure J0) {
        return {kind::annihilator, std::move(F), std::move(J0)};
    }
    static quantity creator(vec F, complex_structure J0) {
        return {kind::creator, std::move(F), std::move(J0)};
    }
    static quantity number(vec F, complex_structure J0) {
        return {kind::number, std::move(F), std::move(J0)};
    }

    bool needs_structure() const {
        return k == kind::annihilator || k == kind::creator || k == kind::number;
    }
    void validate() const {
        if (needs_structure() != J0.has_value())
            throw error(errc::invalid_config,
                        std::string(kind_name(k)) + (J0 ? " takes no J0" : " requires J0"));
    }
};

struct residual_record {
    quantity first;
    quantity second;
    condition cond = condition::dirac;
    double hbar = 0.0;
    double value = 0.0;
};

// ------------------------------------------------------------ commutator identities

struct commutator_form {
    cplx scalar;   // i n hbar sigma(F,G)
    int power = 0; // power of Phi(G) multiplying the scalar
};

// [Phi(F), Phi(G)^n] = i n hbar sigma(F,G) Phi(G)^{n-1}
inline commutator_form commutator_fields(const symplectic_space& s, double hbar, const vec& F,
                                         const vec& G, int power) {
    if (power < 1) throw error(errc::invalid_config, "power must be positive");
    algebra::require_hbar(hbar);
    return {cplx(0.0, power * hbar * algebra::sigma(s, F, G)), power - 1};
}

// Q(Phi_0(F)^2) - Phi(F)^2 = hbar/2 alpha_J(F,F)
inline double quantize_field_square_shift(const symplectic_space& s, const complex_structure& J,
                                          double hbar, const vec& F) {
    algebra::require_hbar(hbar);
    return hbar / 2.0 * algebra::alpha_inner(s, J, F, F).real();
}

inline double number_quantization_residual(const symplectic_space& s, const complex_structure& J,
                                           const complex_structure& J0, double hbar, const vec& F) {
    algebra::require_hbar(hbar);
    return hbar / 2.0 *
           (algebra::alpha_inner(s, J, F, F).real() + algebra::alpha_inner(s, J0, F, F).real());
}

// ------------------------------------------------------------ expansions

struct lin_term {
    cplx coeff;
    vec F;
};

// Field-linear quantities as sums of coeff * Phi(F).
inline std::vector<lin_term> linear_expansion(const quantity& q) {
    const double r = 1.0 / std::sqrt(2.0);
    switch (q.k) {
    case kind::field: return {{1.0, q.F}};
    case kind::annihilator: return {{r, q.F}, {cplx(0.0, r), (*q.J0)(q.F)}};
    case kind::creator: return {{r, q.F}, {cplx(0.0, -r), (*q.J0)(q.F)}};
    default: throw error(errc::unsupported_pair, "quantity is not linear in the fields");
    }
}

// N(F) = (1/2)(Phi(F)^2 + Phi(J0 F)^2) + const: the two fields entering quadratically.
inline std::vector<vec> number_fields(const quantity& q) { return {q.F, (*q.J0)(q.F)}; }

inline bool is_linear(kind k) {
    return k == kind::field || k == kind::annihilator || k == kind::creator;
}

// Supported table: a field-linear quantity against Weyl or field-linear
// quantities under either condition; a number quantity against anything
// except itself under von Neumann, i.e. Dirac only.
inline bool supported(kind a, kind b, condition c) {
    if (c == condition::quantize_number) return false;
    if (is_linear(a)) return b == kind::weyl_gen || is_linear(b);
    if (a == kind::number) return c == condition::dirac;
    return false;
}

// The Weyl operand enters as W(G) in a Dirac bracket with a field-linear
// partner, and as its quantization c_J(G) W(G) otherwise; with the bare
// generator the other differences carry an unbounded (1-c) Phi W term.
inline bool weyl_operand_quantized(kind first, condition c) {
    return !(c == condition::dirac && is_linear(first));
}

// A sum that cancels to within a few ulps of its term sizes is zero.
inline double settle(double value, double scale) {
    return std::abs(value) <= 16.0 * std::numeric_limits<double>::epsilon() * scale ? 0.0 : value;
}

// Exact norm of the residual operator; every supported difference is a
// scalar multiple of a unitary.
inline double residual_value(const symplectic_space& s, const quantity& A, const quantity& B,
                             condition cond, const complex_structure& J, double hbar) {
    A.validate();
    B.validate();
    algebra::require_hbar(hbar);
    if (!supported(A.k, B.k, cond))
        throw error(errc::unsupported_pair, std::string(kind_name(A.k)) + "-" + kind_name(B.k) +
                                                " under " + condition_name(cond));
    auto sig = [&](const vec& X, const vec& Y) { return algebra::sigma(s, X, Y); };
    auto alpha = [&](const vec& X, const vec& Y) { return algebra::alpha_inner(s, J, X, Y); };
    // sigma with every term taken in absolute value, the rounding scale of sig
    auto sig_abs = [&](const vec& X, const vec& Y) {
        const int n = s.dof();
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += s.weights[i] * (std::abs(X[i] * Y[n + i]) + std::abs(Y[i] * X[n + i]));
        return acc;
    };

    if (is_linear(A.k)) {
        const auto la = linear_expansion(A);
        if (B.k == kind::weyl_gen) {
            const vec& G = B.F;
            const double c = algebra::quantization_factor(s, J, hbar, G);
            cplx acc = 0.0;
            if (cond == condition::dirac) {
                for (const auto& t : la) acc += t.coeff * sig(G, t.F);
                return (1.0 - c) * std::abs(acc);
            }
            for (const auto& t : la) acc += t.coeff * std::conj(alpha(t.F, G));
            return c * hbar / 2.0 * std::abs(acc);
        }
        if (cond == condition::dirac) return 0.0;
        const auto lb = linear_expansion(B);
        cplx acc = 0.0;
        for (const auto& x : la)
            for (const auto& y : lb) acc += x.coeff * y.coeff * std::conj(alpha(x.F, y.F));
        return hbar / 2.0 * std::abs(acc);
    }

    // number, Dirac
    const auto fa = number_fields(A);
    if (B.k == kind::weyl_gen) {
        const vec& G = B.F;
        const vec JG = J(G);
        const double c = algebra::quantization_factor(s, J, hbar, G);
        double acc = 0.0, scale = 0.0;
        for (const auto& Fk : fa) {
            acc += sig(G, Fk) * sig(Fk, JG);
            scale += sig_abs(G, Fk) * sig_abs(Fk, JG);
        }
        return c * hbar / 2.0 * std::abs(settle(acc, scale));
    }
    if (B.k == kind::number) {
        double acc = 0.0, scale = 0.0;
        for (const auto& Fj : fa)
            for (const auto& Gk : number_fields(B)) {
                const vec JG = J(Gk);
                acc += sig(Fj, Gk) * sig(Fj, JG);
                scale += sig_abs(Fj, Gk) * sig_abs(Fj, JG);
            }
        return hbar / 2.0 * std::abs(settle(acc, scale));
    }
    return 0.0;
}

inline residual_record residual(const symplectic_space& s, const quantity& A, const quantity& B,
                                condition cond, const complex_structure& J, double hbar) {
    return {A, B, cond, hbar, residual_value(s, A, B, cond, J, hbar)};
}

// ------------------------------------------------------------ scans

struct pair_spec {
    quantity first;
    quantity second;
    condition cond;
};

struct slope_fit {
    std::size_t pair_index = 0;
    bool defined = false;      // false for identically vanishing residuals
    bool identically_zero = false;
    double slope = 0.0;
};

struct scan_table {
    std::vector<residual_record> rows;
    std::vector<slope_fit> slopes;
};

inline void require_descending(const std::vector<double>& hbars) {
    for (std::size_t i = 0; i < hbars.size(); ++i) {
        if (!(hbars[i] > 0.0 && hbars[i] <= 1.0))
            throw error(errc::hbar_out_of_range, "scan hbar values must lie in (0,1]");
        if (i > 0 && !(hbars[i] < hbars[i - 1]))
            throw error(errc::invalid_config, "scan hbar values must be strictly decreasing");
    }
}

// Least-squares slope of log(value) against log(hbar).
inline double loglog_slope(const std::vector<double>& h, const std::vector<double>& v) {
    const auto n = static_cast<double>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]), y = std::log(v[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline constexpr std::size_t min_slope_points = 5;

inline scan_table residual_scan(const symplectic_space& s, const std::vector<pair_spec>& pairs,
                                const std::vector<double>& hbars, const complex_structure& J) {
    require_descending(hbars);
    scan_table t;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        std::vector<double> vals;
        for (double h : hbars) {
            t.rows.push_back(residual(s, pairs[p].first, pairs[p].second, pairs[p].cond, J, h));
            vals.push_back(t.rows.back().value);
        }
        if (hbars.size() < min_slope_points) continue;
        slope_fit f;
        f.pair_index = p;
        bool all_zero = true, any_zero = false;
        for (double v : vals) {
            all_zero = all_zero && v == 0.0;
            any_zero = any_zero || v == 0.0;
        }
        f.identically_zero = all_zero;
        if (!any_zero) {
            f.defined = true;
            f.slope = loglog_slope(hbars, vals);
        }
        t.slopes.push_back(f);
    }
    return t;
}

// ------------------------------------------------------------ representation

// Matrix-free evaluation of the same residuals in the grid representation,
// restricted to the columns of V. Only the canonical space R^{2n} with the
// grid's n is supported; classical quantizations are taken from their
// defining limits with Richardson extrapolation in t.
struct represented {
    double value = 0.0;          // largest singular value of the residual on V
    double extrapolation = 0.0;  // Richardson change between the last two levels
};

inline std::vector<double> coords_head(const vec& F, int n) {
    return std::vector<double>(F.data(), F.data() + n);
}
inline std::vector<double> coords_tail(const vec& F, int n) {
    return std::vector<double>(F.data() + n, F.data() + 2 * n);
}

// Dense matrix of a quantum Weyl element in the grid representation.
inline rep::cmat represent_element(const rep::grid& g, const algebra::weyl_element& A) {
    if (A.dim != 2 * g.dims) throw error(errc::dimension_mismatch, "element does not match the grid");
    const long n = g.size();
    rep::cmat M = rep::cmat::Zero(n, n);
    for (const auto& [k, z] : A.terms) {
        const vec F = algebra::key_coords(k);
        M += z * rep::rep_weyl(g, A.hbar, coords_head(F, g.dims), coords_tail(F, g.dims)).matrix;
    }
    return M;
}

namespace detail {

using rep::cmat;

inline std::vector<double> head(const vec& F, int n) { return coords_head(F, n); }
inline std::vector<double> tail(const vec& F, int n) { return coords_tail(F, n); }

struct context {
    const symplectic_space& s;
    const complex_structure& J;
    const rep::grid& g;
    double hbar;
    int n;

    cmat weyl(const vec& F, const cmat& X) const {
        cmat Y(X.rows(), X.cols());
        for (long c = 0; c < X.cols(); ++c)
            Y.col(c) = rep::apply_weyl(g, hbar, head(F, n), tail(F, n), X.col(c));
        return Y;
    }
    // Q^J(W_0(F)) = c_J(F) W(F)
    cmat qweyl(const vec& F, const cmat& X) const {
        return algebra::quantization_factor(s, J, hbar, F) * weyl(F, X);
    }
    cmat field(const vec& F, const cmat& X) const {
        cmat Y(X.rows(), X.cols());
        for (long c = 0; c < X.cols(); ++c)
            Y.col(c) = rep::apply_field(g, hbar, head(F, n), tail(F, n), X.col(c));
        return Y;
    }
    cmat linear(const std::vector<lin_term>& terms, const cmat& X) const {
        cmat Y = cmat::Zero(X.rows(), X.cols());
        for (const auto& t : terms) Y += t.coeff * field(t.F, X);
        return Y;
    }
    // N = a* a applied literally
    cmat number(const quantity& q, const cmat& X) const {
        quantity ann = q, cre = q;
        ann.k = kind::annihilator;
        cre.k = kind::creator;
        return linear(linear_expansion(cre), linear(linear_expansion(ann), X));
    }

    // Q(Phi_0(F) W_0(G)) X = -i lim (Q(W_0(tF+G)) - Q(W_0(G))) X / t
    rep::extrapolated q_field_weyl(const vec& F, const vec& G, const cmat& X) const {
        std::vector<cmat> levels;
        const cmat base = qweyl(G, X);
        for (double t : rep::limit_steps)
            levels.push_back(cplx(0.0, -1.0) * (qweyl(t * F + G, X) - base) / t);
        return rep::richardson(std::move(levels));
    }
    // Q(Phi_0(F) Phi_0(G)) X = -lim (Q(W(tF+tG)) - Q(W(tF)) - Q(W(tG)) + I) X / t^2
    rep::extrapolated q_field_field(const vec& F, const vec& G, const cmat& X) const {
        std::vector<cmat> levels;
        for (double t : rep::limit_steps)
            levels.push_back(-(qweyl(t * F + t * G, X) - qweyl(t * F, X) - qweyl(t * G, X) + X) /
                             (t * t));
        return rep::richardson(std::move(levels));
    }
};

} // namespace detail

inline represented represented_residual(const symplectic_space& s, const rep::grid& g,
                                        const quantity& A, const quantity& B, condition cond,
                                        const complex_structure& J, double hbar,
                                        const rep::cmat& V) {
    using rep::cmat;
    A.validate();
    B.validate();
    if (s.dof() != g.dims)
        throw error(errc::dimension_mismatch, "representation needs the canonical space of the grid");
    if (!supported(A.k, B.k, cond))
        throw error(errc::unsupported_pair, std::string(kind_name(A.k)) + "-" + kind_name(B.k));
    detail::context ctx{s, J, g, hbar, g.dims};
    auto sig = [&](const vec& X, const vec& Y) { return algebra::sigma(s, X, Y); };

    auto apply_op = [&](const quantity& q, const cmat& X) -> cmat {
        switch (q.k) {
        case kind::weyl_gen:
            return weyl_operand_quantized(A.k, cond) ? ctx.qweyl(q.F, X) : ctx.weyl(q.F, X);
        case kind::number: return ctx.number(q, X);
        default: return ctx.linear(linear_expansion(q), X);
        }
    };

    cmat classical = cmat::Zero(V.rows(), V.cols());
    double extrap = 0.0;
    auto add = [&](cplx coeff, const rep::extrapolated& e) {
        classical += coeff * e.value;
        extrap = std::max(extrap, std::abs(coeff) * e.error_estimate);
    };

    // Classical side: Poisson brackets follow from {Phi_0(F),Phi_0(G)} = -sigma(F,G),
    // {Phi_0(F),W_0(G)} = i sigma(G,F) W_0(G) and the Leibniz rule.
    if (is_linear(A.k)) {
        const auto la = linear_expansion(A);
        if (B.k == kind::weyl_gen) {
            if (cond == condition::dirac) {
                cplx coeff = 0.0;
                for (const auto& t : la) coeff += t.coeff * cplx(0.0, sig(B.F, t.F));
                classical = coeff * ctx.qweyl(B.F, V);
            } else {
                for (const auto& t : la) add(t.coeff, ctx.q_field_weyl(t.F, B.F, V));
            }
        } else {
            const auto lb = linear_expansion(B);
            if (cond == condition::dirac) {
                cplx coeff = 0.0;
                for (const auto& x : la)
                    for (const auto& y : lb) coeff += x.coeff * y.coeff * (-sig(x.F, y.F));
                classical = coeff * V;
            } else {
                for (const auto& x : la)
                    for (const auto& y : lb) add(x.coeff * y.coeff, ctx.q_field_field(x.F, y.F, V));
            }
        }
    } else {
        const auto fa = number_fields(A);
        if (B.k == kind::weyl_gen) {
            for (const auto& Fk : fa) add(cplx(0.0, sig(B.F, Fk)), ctx.q_field_weyl(Fk, B.F, V));
        } else if (B.k == kind::number) {
            for (const auto& Fj : fa)
                for (const auto& Gk : number_fields(B))
                    add(-sig(Fj, Gk), ctx.q_field_field(Fj, Gk, V));
        } else {
            for (const auto& Fj : fa) {
                cplx coeff = 0.0;
                for (const auto& y : linear_expansion(B)) coeff += y.coeff * (-sig(Fj, y.F));
                classical += coeff * ctx.field(Fj, V);
            }
        }
    }

    cmat quantum;
    if (cond == condition::dirac) {
        const cmat AB = apply_op(A, apply_op(B, V));
        const cmat BA = apply_op(B, apply_op(A, V));
        quantum = cplx(0.0, 1.0 / hbar) * (AB - BA);
    } else {
        quantum = apply_op(A, apply_op(B, V));
    }
    const cmat R = quantum - classical;
    Eigen::JacobiSVD<cmat> svd(R);
    return {svd.singularValues()[0], extrap};
}

} // namespace qlimit::limit

#endif
