#ifndef QLIMIT_ALGEBRA_HPP
#define QLIMIT_ALGEBRA_HPP

// Symbolic Weyl algebra over a finite or grid-sampled symplectic space,
// with Weyl and complex-structure (positive) quantization maps.

#include <qlimit/error.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qlimit::algebra {

using cplx = std::complex<double>;
using vec = Eigen::VectorXd;

inline constexpr double key_quantum = 1e-12;

// Test functions are stored as F = (a, b) with a, b of length dof().
// In field mode a and b are grid samples and the weights carry the
// quadrature rule; in finite mode every weight is 1.
struct symplectic_space {
    vec weights;

    static symplectic_space standard(int n) {
        if (n <= 0) throw error(errc::dimension_mismatch, "need n >= 1");
        return {vec::Ones(n)};
    }
    static symplectic_space field(int points, double spacing) {
        if (points <= 0 || !(spacing > 0))
            throw error(errc::dimension_mismatch, "bad field grid");
        return {vec::Constant(points, spacing)};
    }

    int dof() const { return static_cast<int>(weights.size()); }
    int dim() const { return 2 * dof(); }

    void require(const vec& F) const {
        if (F.size() != dim())
            throw error(errc::dimension_mismatch,
                        "expected length " + std::to_string(dim()) + ", got " +
                            std::to_string(F.size()));
    }
};

inline double sigma(const symplectic_space& s, const vec& F, const vec& G) {
    s.require(F);
    s.require(G);
    const int n = s.dof();
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        acc += s.weights[i] * (F[i] * G[n + i] - G[i] * F[n + i]);
    return acc;
}

// Weighted L2 pairing of like components, used by field-mode bases.
inline double l2_pair(const symplectic_space& s, const vec& F, const vec& G) {
    s.require(F);
    s.require(G);
    const int n = s.dof();
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        acc += s.weights[i] * (F[i] * G[i] + F[n + i] * G[n + i]);
    return acc;
}

struct complex_structure {
    std::function<vec(const vec&)> apply;

    vec operator()(const vec& F) const { return apply(F); }
};

// J(a, b) = (-b, a)
inline complex_structure standard_structure() {
    return {[](const vec& F) {
        const auto n = F.size() / 2;
        vec out(F.size());
        out.head(n) = -F.tail(n);
        out.tail(n) = F.head(n);
        return out;
    }};
}

// J(a, b) = (-b / l, l a): compatible with sigma for every l > 0.
inline complex_structure squeezed_structure(double l) {
    if (!(l > 0)) throw error(errc::incompatible_structure, "squeeze factor must be positive");
    return {[l](const vec& F) {
        const auto n = F.size() / 2;
        vec out(F.size());
        out.head(n) = -F.tail(n) / l;
        out.tail(n) = l * F.head(n);
        return out;
    }};
}

struct structure_report {
    double sigma_invariance = 0.0; // max |sigma(JF,JG) - sigma(F,G)|
    double min_positivity = 0.0;   // min sigma(F,JF)
    double square_defect = 0.0;    // max |J(JF) + F|
    bool ok = false;
};

inline structure_report check_structure(const symplectic_space& s, const complex_structure& J,
                                        const std::vector<vec>& probes, double tol = 1e-10) {
    structure_report r;
    r.min_positivity = probes.empty() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const vec& F = probes[i];
        const vec JF = J(F);
        const double scale = std::max(1.0, F.squaredNorm());
        r.min_positivity = std::min(r.min_positivity, sigma(s, F, JF) / scale);
        r.square_defect =
            std::max(r.square_defect, (J(JF) + F).cwiseAbs().maxCoeff() / std::max(1.0, F.cwiseAbs().maxCoeff()));
        const vec& G = probes[(i + 1) % probes.size()];
        const vec JG = J(G);
        const double sc2 = std::max(1.0, std::sqrt(F.squaredNorm() * G.squaredNorm()));
        r.sigma_invariance =
            std::max(r.sigma_invariance, std::abs(sigma(s, JF, JG) - sigma(s, F, G)) / sc2);
    }
    r.ok = r.sigma_invariance <= tol && r.min_positivity >= -tol && r.square_defect <= tol;
    return r;
}

inline complex_structure checked_structure(const symplectic_space& s, complex_structure J,
                                           const std::vector<vec>& probes, double tol = 1e-10) {
    const auto r = check_structure(s, J, probes, tol);
    if (!r.ok)
        throw error(errc::incompatible_structure,
                    "sigma-invariance " + std::to_string(r.sigma_invariance) + ", positivity " +
                        std::to_string(r.min_positivity) + ", J^2+I " +
                        std::to_string(r.square_defect));
    return J;
}

// alpha_J(F,G) = sigma(F,JG) + i sigma(F,G)
inline cplx alpha_inner(const symplectic_space& s, const complex_structure& J, const vec& F,
                        const vec& G) {
    return {sigma(s, F, J(G)), sigma(s, F, G)};
}

inline void require_hbar(double hbar) {
    if (!(hbar >= 0.0 && hbar <= 1.0))
        throw error(errc::hbar_out_of_range, "hbar must lie in [0,1], got " + std::to_string(hbar));
}

inline double quantization_factor(const symplectic_space& s, const complex_structure& J,
                                  double hbar, const vec& F) {
    require_hbar(hbar);
    return std::exp(-hbar / 4.0 * alpha_inner(s, J, F, F).real());
}

// ---------------------------------------------------------------- elements

using key = std::vector<std::int64_t>;

inline key canonical_key(const vec& F, double quantum = key_quantum) {
    key k(static_cast<std::size_t>(F.size()));
    for (Eigen::Index i = 0; i < F.size(); ++i) {
        const double x = F[i] / quantum;
        if (!std::isfinite(x) || std::abs(x) > 9.0e18)
            throw error(errc::dimension_mismatch, "coordinate outside key range");
        k[static_cast<std::size_t>(i)] = std::llround(x);
    }
    return k;
}

inline vec key_coords(const key& k, double quantum = key_quantum) {
    vec F(static_cast<Eigen::Index>(k.size()));
    for (std::size_t i = 0; i < k.size(); ++i)
        F[static_cast<Eigen::Index>(i)] = static_cast<double>(k[i]) * quantum;
    return F;
}

inline key negate(const key& k) {
    key out(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) out[i] = -k[i];
    return out;
}

struct term {
    cplx coeff;
    vec F;
};

struct weyl_element {
    double hbar = 0.0;
    int dim = 0;
    std::map<key, cplx> terms;

    static weyl_element zero(double hbar, int dim) { return {hbar, dim, {}}; }
    static weyl_element generator(double hbar, const vec& F, cplx z = 1.0) {
        weyl_element e{hbar, static_cast<int>(F.size()), {}};
        if (z != cplx(0.0)) e.terms[canonical_key(F)] = z;
        return e;
    }
    static weyl_element identity(double hbar, int dim) {
        return generator(hbar, vec::Zero(dim));
    }
    static weyl_element from_terms(double hbar, int dim, const std::vector<term>& ts) {
        weyl_element e{hbar, dim, {}};
        for (const auto& t : ts) {
            if (t.F.size() != dim) throw error(errc::dimension_mismatch, "term length");
            e.terms[canonical_key(t.F)] += t.coeff;
        }
        e.normalize();
        return e;
    }

    void normalize() {
        for (auto it = terms.begin(); it != terms.end();)
            it = (it->second == cplx(0.0)) ? terms.erase(it) : std::next(it);
    }

    std::vector<term> expand() const {
        std::vector<term> out;
        out.reserve(terms.size());
        for (const auto& [k, z] : terms) out.push_back({z, key_coords(k)});
        return out;
    }
};

inline void require_same(const weyl_element& A, const weyl_element& B) {
    if (A.hbar != B.hbar) throw error(errc::hbar_mismatch, "operands at different hbar");
    if (A.dim != B.dim) throw error(errc::dimension_mismatch, "operands of different dimension");
}

inline weyl_element operator+(const weyl_element& A, const weyl_element& B) {
    require_same(A, B);
    weyl_element C = A;
    for (const auto& [k, z] : B.terms) C.terms[k] += z;
    C.normalize();
    return C;
}

inline weyl_element operator*(cplx z, const weyl_element& A) {
    weyl_element C = A;
    for (auto& kv : C.terms) kv.second *= z;
    C.normalize();
    return C;
}

inline weyl_element operator-(const weyl_element& A, const weyl_element& B) {
    return A + cplx(-1.0) * B;
}

// W(F)W(G) = exp(-i hbar/2 sigma(F,G)) W(F+G)
inline weyl_element weyl_mul(const symplectic_space& s, const weyl_element& A,
                             const weyl_element& B) {
    require_same(A, B);
    s.require(vec::Zero(A.dim));
    weyl_element C = weyl_element::zero(A.hbar, A.dim);
    for (const auto& [ka, za] : A.terms) {
        const vec F = key_coords(ka);
        for (const auto& [kb, zb] : B.terms) {
            const vec G = key_coords(kb);
            key sum(ka.size());
            for (std::size_t i = 0; i < ka.size(); ++i) sum[i] = ka[i] + kb[i];
            const double phase = -A.hbar / 2.0 * sigma(s, F, G);
            C.terms[sum] += za * zb * std::polar(1.0, phase);
        }
    }
    C.normalize();
    return C;
}

// W(F)* = W(-F), coefficients conjugated
inline weyl_element weyl_adjoint(const weyl_element& A) {
    weyl_element C = weyl_element::zero(A.hbar, A.dim);
    for (const auto& [k, z] : A.terms) C.terms[negate(k)] = std::conj(z);
    return C;
}

// Largest coefficient difference over the union of keys.
inline double max_coeff_diff(const weyl_element& A, const weyl_element& B) {
    double d = 0.0;
    for (const auto& [k, z] : A.terms) {
        auto it = B.terms.find(k);
        d = std::max(d, std::abs(z - (it == B.terms.end() ? cplx(0.0) : it->second)));
    }
    for (const auto& [k, z] : B.terms)
        if (!A.terms.count(k)) d = std::max(d, std::abs(z));
    return d;
}

// ------------------------------------------------------------ quantization

struct scheme {
    std::optional<complex_structure> J;

    static scheme weyl() { return {}; }
    static scheme positive(complex_structure J) { return {std::move(J)}; }
};

inline weyl_element quantize(const symplectic_space& s, const weyl_element& A, double hbar,
                             const scheme& sc) {
    if (A.hbar != 0.0) throw error(errc::not_classical, "quantize expects an element at hbar = 0");
    require_hbar(hbar);
    weyl_element C = weyl_element::zero(hbar, A.dim);
    for (const auto& [k, z] : A.terms) {
        const double c = sc.J ? quantization_factor(s, *sc.J, hbar, key_coords(k)) : 1.0;
        C.terms[k] = c * z;
    }
    C.normalize();
    return C;
}

// Exact C*-norm of z W(F). Multi-term elements have no closed form here.
inline double norm_single(const weyl_element& A) {
    if (A.terms.empty()) return 0.0;
    if (A.terms.size() > 1)
        throw error(errc::multi_term,
                    "norm is exact only for one generator; use a representation bound");
    return std::abs(A.terms.begin()->second);
}

struct psd_report {
    Eigen::MatrixXcd matrix;
    double min_eigenvalue = 0.0;
    double tolerance = 0.0;
    bool psd = false;
};

// Entrywise exponential of (hbar/2) alpha_J(F_j, F_k). Expanding Q^J(A*A)
// gives sum conj(z_j) z_k c(F_j) c(F_k) exp(hbar/2 alpha_J(F_j,F_k)) W(F_j)* W(F_k),
// so this kernel is the matrix whose positivity carries the argument.
inline psd_report positivity_certificate(const symplectic_space& s, const std::vector<vec>& Fs,
                                         double hbar, const complex_structure& J,
                                         double tol_per_dim = 1e-10) {
    require_hbar(hbar);
    std::map<key, int> seen;
    for (std::size_t i = 0; i < Fs.size(); ++i)
        if (!seen.emplace(canonical_key(Fs[i]), static_cast<int>(i)).second)
            throw error(errc::duplicate_key, "term " + std::to_string(i) + " repeats a key");
    const auto m = static_cast<Eigen::Index>(Fs.size());
    psd_report r;
    r.matrix.resize(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index k = 0; k < m; ++k)
            r.matrix(j, k) = std::exp(hbar / 2.0 * alpha_inner(s, J, Fs[j], Fs[k]));
    r.tolerance = tol_per_dim * static_cast<double>(std::max<Eigen::Index>(m, 1));
    if (m == 0) {
        r.psd = true;
        return r;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r.matrix, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    r.psd = r.min_eigenvalue >= -r.tolerance;
    return r;
}

inline psd_report positivity_certificate(const symplectic_space& s, const weyl_element& A,
                                         double hbar, const complex_structure& J,
                                         double tol_per_dim = 1e-10) {
    if (A.hbar != 0.0) throw error(errc::not_classical, "certificate expects an element at hbar = 0");
    std::vector<vec> Fs;
    for (const auto& [k, z] : A.terms) Fs.push_back(key_coords(k));
    return positivity_certificate(s, Fs, hbar, J, tol_per_dim);
}

} // namespace qlimit::algebra

#endif
