#ifndef QLIMIT_FIELD_HPP
#define QLIMIT_FIELD_HPP

// Discretized free fields: the Minkowski and Rindler Klein-Gordon one-particle
// structures and the transverse electromagnetic one, with the classical number
// functionals, total number and Hamiltonian basis sums, and their closed forms.

#include <qlimit/algebra.hpp>
#include <qlimit/error.hpp>
#include <qlimit/random.hpp>
#include <qlimit/spectral.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace qlimit::field {

using vec = Eigen::VectorXd;
using mat = Eigen::MatrixXd;
using cvec = Eigen::VectorXcd;
using cplx = std::complex<double>;

enum class geometry { torus, half_line };

inline const char* geometry_name(geometry g) {
    return g == geometry::torus ? "torus" : "half-line";
}

// Torus: [0, L)^d with nodes j*h, h = L/N.
// Half-line: interior nodes (j+1)*h of (0, L), h = L/(N+1), Dirichlet at both ends.
struct field_grid {
    geometry geo = geometry::torus;
    int dims = 1;
    int points = 0;
    double extent = 0.0;

    static field_grid torus(int dims, int points, double extent) {
        if (dims < 1 || dims > 3) throw error(errc::invalid_config, "torus dimension must be 1, 2 or 3");
        if (points < 2 || points % 2 != 0)
            throw error(errc::invalid_config, "torus needs an even point count");
        if (!(extent > 0) || !std::isfinite(extent))
            throw error(errc::invalid_config, "extent must be positive");
        return {geometry::torus, dims, points, extent};
    }

    static field_grid half_line(int points, double extent) {
        if (points < 2) throw error(errc::invalid_config, "half-line needs at least 2 points");
        if (!(extent > 0) || !std::isfinite(extent))
            throw error(errc::invalid_config, "extent must be positive");
        return {geometry::half_line, 1, points, extent};
    }

    double spacing() const {
        return geo == geometry::torus ? extent / points : extent / (points + 1);
    }
    long sites() const { return geo == geometry::torus ? spectral::ipow(points, dims) : points; }
    double weight() const { return std::pow(spacing(), dims); }

    double coord(long site, int axis) const {
        if (geo == geometry::half_line) return (site + 1) * spacing();
        const auto m = spectral::unflatten(site, points, dims);
        return m[static_cast<std::size_t>(axis)] * spacing();
    }

    bool operator==(const field_grid&) const = default;
};

inline void require_torus(const field_grid& g, const char* what) {
    if (g.geo != geometry::torus)
        throw error(errc::geometry_mismatch, std::string(what) + " needs a torus grid");
}

// Wavenumber vector of a flat Fourier index. With zero_nyquist the unpaired
// N/2 component is mapped to 0.
inline std::array<double, 3> mode_wavevector(const field_grid& g, long idx, bool zero_nyquist) {
    const auto k = spectral::wavenumbers(g.points, g.extent, zero_nyquist);
    const auto m = spectral::unflatten(idx, g.points, g.dims);
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int a = 0; a < g.dims; ++a)
        out[static_cast<std::size_t>(a)] = k[static_cast<std::size_t>(m[static_cast<std::size_t>(a)])];
    return out;
}

inline double mode_k2(const field_grid& g, long idx) {
    const auto k = mode_wavevector(g, idx, false);
    return k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
}

// Flat index of the mode -k.
inline long conjugate_mode(const field_grid& g, long idx) {
    const auto m = spectral::unflatten(idx, g.points, g.dims);
    long out = 0;
    for (int a = g.dims - 1; a >= 0; --a)
        out = out * g.points + (g.points - m[static_cast<std::size_t>(a)]) % g.points;
    return out;
}

inline bool has_nyquist(const field_grid& g, long idx) {
    const auto m = spectral::unflatten(idx, g.points, g.dims);
    return std::any_of(m.begin(), m.end(), [&](int v) { return v == g.points / 2; });
}

inline cvec to_complex(const vec& f) { return f.cast<cplx>(); }

inline vec fft_real_multiplier(const field_grid& g, const vec& f, const std::function<cplx(long)>& symbol) {
    return spectral::apply_multiplier(to_complex(f), g.points, g.dims, symbol).real();
}

enum class realization { fourier, dense };

// mu-type operator realized either as a Fourier multiplier (torus) or as a
// dense symmetric matrix with its eigendecomposition (half-line).
struct spectral_operator {
    std::string meaning;
    realization kind = realization::fourier;
    field_grid grid;
    vec symbol;
    bool skip_zero_mode = false;
    vec eigenvalues;
    mat eigenvectors;
    mat matrix;

    // Acts on a scalar field or on stacked components of one.
    vec apply(const vec& f) const {
        const long n = grid.sites();
        if (n == 0 || f.size() % n != 0)
            throw error(errc::grid_mismatch, "field length does not match the operator grid");
        vec out(f.size());
        for (long c = 0; c < f.size() / n; ++c) {
            const vec part = f.segment(c * n, n);
            if (kind == realization::dense)
                out.segment(c * n, n) = matrix * part;
            else
                out.segment(c * n, n) = fft_real_multiplier(
                    grid, part, [this](long i) { return cplx(symbol[i], 0.0); });
        }
        return out;
    }

    // Smallest symbol or eigenvalue, ignoring an excluded zero mode.
    double min_value() const {
        if (kind == realization::dense) return eigenvalues.minCoeff();
        double m = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < symbol.size(); ++i)
            if (!(skip_zero_mode && i == 0)) m = std::min(m, symbol[i]);
        return m;
    }

    // Functional calculus; an excluded zero mode stays at 0.
    spectral_operator power(double p, std::string name) const {
        spectral_operator out = *this;
        out.meaning = std::move(name);
        if (kind == realization::fourier) {
            for (Eigen::Index i = 0; i < symbol.size(); ++i)
                out.symbol[i] = (skip_zero_mode && i == 0) ? 0.0 : std::pow(symbol[i], p);
            return out;
        }
        out.eigenvalues = eigenvalues.array().pow(p).matrix();
        mat m = eigenvectors * out.eigenvalues.asDiagonal() * eigenvectors.transpose();
        out.matrix = 0.5 * (m + m.transpose());
        return out;
    }
};

template <class Fn>
spectral_operator fourier_operator(const field_grid& g, std::string meaning, Fn&& of_k2) {
    spectral_operator op;
    op.meaning = std::move(meaning);
    op.kind = realization::fourier;
    op.grid = g;
    op.symbol.resize(g.sites());
    for (long i = 0; i < g.sites(); ++i) op.symbol[i] = of_k2(mode_k2(g, i));
    return op;
}

inline spectral_operator build_mu_minkowski(const field_grid& g, double m) {
    require_torus(g, "Minkowski mu");
    if (!(m > 0) || !std::isfinite(m)) throw error(errc::bad_mass, "Minkowski mass must be positive");
    return fourier_operator(g, "mu_minkowski", [m](double k2) { return std::sqrt(m * m + k2); });
}

inline spectral_operator neg_laplacian(const field_grid& g) {
    require_torus(g, "Laplacian");
    return fourier_operator(g, "neg_laplacian", [](double k2) { return k2; });
}

// Massless mu on the 3-torus; constants are outside the test space.
inline spectral_operator build_mu_em(const field_grid& g) {
    require_torus(g, "electromagnetic mu");
    if (g.dims != 3) throw error(errc::geometry_mismatch, "electromagnetic mu needs d = 3");
    auto op = fourier_operator(g, "mu_em", [](double k2) { return std::sqrt(k2); });
    op.skip_zero_mode = true;
    return op;
}

// e^{2x}(m^2 + |k_perp|^2) on the diagonal plus the second-order Dirichlet
// finite difference of -d^2/dx^2.
inline mat rindler_generator(const field_grid& g, double m, std::array<double, 2> kperp) {
    if (g.geo != geometry::half_line) throw error(errc::geometry_mismatch, "Rindler mu needs a half-line grid");
    if (!std::isfinite(m)) throw error(errc::bad_mass, "Rindler mass must be finite");
    const int n = g.points;
    const double h = g.spacing();
    const double t = m * m + kperp[0] * kperp[0] + kperp[1] * kperp[1];
    mat M = mat::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        M(j, j) = std::exp(2.0 * g.coord(j, 0)) * t + 2.0 / (h * h);
        if (j + 1 < n) M(j, j + 1) = M(j + 1, j) = -1.0 / (h * h);
    }
    return M;
}

inline spectral_operator build_mu_rindler(const field_grid& g, double m, std::array<double, 2> kperp) {
    const mat M = rindler_generator(g, m, kperp);
    Eigen::SelfAdjointEigenSolver<mat> es(M);
    if (es.info() != Eigen::Success) throw error(errc::non_positive, "eigensolver failed");
    if (!(es.eigenvalues().minCoeff() > 0))
        throw error(errc::non_positive, "Rindler generator is not positive definite");
    spectral_operator op;
    op.meaning = "mu_rindler_squared";
    op.kind = realization::dense;
    op.grid = g;
    op.eigenvalues = es.eigenvalues();
    op.eigenvectors = es.eigenvectors();
    op.matrix = M;
    return op.power(0.5, "mu_rindler");
}

// Spectral derivative along one axis; the Nyquist mode is dropped so real
// input stays real.
inline vec derivative(const field_grid& g, const vec& f, int axis) {
    require_torus(g, "spectral derivative");
    return fft_real_multiplier(g, f, [&](long i) {
        return cplx(0.0, mode_wavevector(g, i, true)[static_cast<std::size_t>(axis)]);
    });
}

inline vec component(const field_grid& g, const vec& F, int c) { return F.segment(c * g.sites(), g.sites()); }

inline void require_vector_field(const field_grid& g, const vec& F) {
    require_torus(g, "vector calculus");
    if (g.dims != 3) throw error(errc::geometry_mismatch, "vector calculus needs d = 3");
    if (F.size() != 3 * g.sites()) throw error(errc::grid_mismatch, "expected a 3-component field");
}

inline vec divergence(const field_grid& g, const vec& F) {
    require_vector_field(g, F);
    vec d = vec::Zero(g.sites());
    for (int a = 0; a < 3; ++a) d += derivative(g, component(g, F, a), a);
    return d;
}

inline vec curl(const field_grid& g, const vec& A) {
    require_vector_field(g, A);
    const long n = g.sites();
    auto D = [&](int axis, int c) { return derivative(g, component(g, A, c), axis); };
    vec out(3 * n);
    out.segment(0, n) = D(1, 2) - D(2, 1);
    out.segment(n, n) = D(2, 0) - D(0, 2);
    out.segment(2 * n, n) = D(0, 1) - D(1, 0);
    return out;
}

// Removes the gradient part mode by mode with (I - k k^T / |k|^2), k taken
// without Nyquist components so the map stays real; modes with k = 0 pass
// through.
inline vec helmholtz_project(const field_grid& g, const vec& F) {
    require_vector_field(g, F);
    const long n = g.sites();
    std::array<cvec, 3> hat;
    for (int c = 0; c < 3; ++c) {
        hat[static_cast<std::size_t>(c)] = to_complex(component(g, F, c));
        spectral::fft_all(hat[static_cast<std::size_t>(c)], g.points, 3, false);
    }
    for (long i = 0; i < n; ++i) {
        const auto k = mode_wavevector(g, i, true);
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (k2 == 0.0) continue;
        cplx dot = 0.0;
        for (int c = 0; c < 3; ++c) dot += k[static_cast<std::size_t>(c)] * hat[static_cast<std::size_t>(c)][i];
        for (int c = 0; c < 3; ++c) hat[static_cast<std::size_t>(c)][i] -= k[static_cast<std::size_t>(c)] * dot / k2;
    }
    vec out(3 * n);
    for (int c = 0; c < 3; ++c) {
        spectral::fft_all(hat[static_cast<std::size_t>(c)], g.points, 3, true);
        out.segment(c * n, n) = hat[static_cast<std::size_t>(c)].real();
    }
    return out;
}

// Drops the constant and any Nyquist content, then projects. The result lies
// in the electromagnetic test space.
inline vec restrict_transverse(const field_grid& g, const vec& F) {
    require_vector_field(g, F);
    const vec P = helmholtz_project(g, F);
    vec out(P.size());
    for (int c = 0; c < 3; ++c)
        out.segment(c * g.sites(), g.sites()) = fft_real_multiplier(g, component(g, P, c), [&](long i) {
            return (i == 0 || has_nyquist(g, i)) ? cplx(0.0) : cplx(1.0);
        });
    return out;
}

enum class family { minkowski, rindler, maxwell };

inline const char* family_name(family f) {
    switch (f) {
    case family::minkowski: return "kg-minkowski";
    case family::rindler: return "kg-rindler";
    case family::maxwell: return "maxwell";
    }
    return "unknown";
}

// Test pairs F = (f, g) are stacked vectors of length 2 * length(); f pairs
// with the momentum (pi or E) and g with the configuration (phi or A).
struct field_model {
    family fam = family::minkowski;
    field_grid grid;
    double mass = 0.0;
    std::array<double, 2> kperp{0.0, 0.0};
    spectral_operator mu;
    spectral_operator mu_inv;
    mat generator;

    int components() const { return fam == family::maxwell ? 3 : 1; }
    long length() const { return grid.sites() * components(); }
    algebra::symplectic_space space() const {
        return algebra::symplectic_space::field(static_cast<int>(length()), grid.weight());
    }

    vec head(const vec& F) const { return F.head(length()); }
    vec tail(const vec& F) const { return F.tail(length()); }

    vec pair(const vec& f, const vec& g) const {
        vec F(2 * length());
        F << f, g;
        return F;
    }

    vec J(const vec& F) const {
        space().require(F);
        return pair(-mu_inv.apply(tail(F)), mu.apply(head(F)));
    }

    algebra::complex_structure structure() const {
        return {[model = *this](const vec& F) { return model.J(F); }};
    }

    double inner(const vec& a, const vec& b) const { return grid.weight() * a.dot(b); }
};

inline field_model minkowski(const field_grid& g, double m) {
    field_model fm;
    fm.fam = family::minkowski;
    fm.grid = g;
    fm.mass = m;
    fm.mu = build_mu_minkowski(g, m);
    fm.mu_inv = fm.mu.power(-1.0, "mu_minkowski_inverse");
    return fm;
}

inline field_model rindler(const field_grid& g, double m, std::array<double, 2> kperp = {0.0, 0.0}) {
    field_model fm;
    fm.fam = family::rindler;
    fm.grid = g;
    fm.mass = m;
    fm.kperp = kperp;
    fm.mu = build_mu_rindler(g, m, kperp);
    fm.mu_inv = fm.mu.power(-1.0, "mu_rindler_inverse");
    fm.generator = rindler_generator(g, m, kperp);
    return fm;
}

inline field_model maxwell(const field_grid& g) {
    field_model fm;
    fm.fam = family::maxwell;
    fm.grid = g;
    fm.mu = build_mu_em(g);
    fm.mu_inv = fm.mu.power(-1.0, "mu_em_inverse");
    return fm;
}

// Phase-space point: (pi, phi) or (E, A) for the electromagnetic family.
struct field_state {
    field_grid grid;
    int components = 1;
    vec pi;
    vec phi;
};

inline void require_state(const field_model& fm, const field_state& s) {
    if (!(s.grid == fm.grid) || s.components != fm.components() || s.pi.size() != fm.length() ||
        s.phi.size() != fm.length())
        throw error(errc::grid_mismatch, "state does not live on the model grid");
}

inline field_state zero_state(const field_model& fm) {
    return {fm.grid, fm.components(), vec::Zero(fm.length()), vec::Zero(fm.length())};
}

// Linear functional of a test pair dual to the state: (phi, -pi).
inline vec dual_pair(const field_model& fm, const field_state& s) {
    require_state(fm, s);
    return fm.pair(s.phi, -s.pi);
}

// Error-compensated running sum.
struct neumaier {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// Number functional with the images mu f and mu^{-1} g supplied.
inline double number_functional(const field_model& fm, const vec& F, const vec& mu_f, const vec& mu_inv_g,
                                 const field_state& s) {
    const double lin = fm.inner(s.pi, fm.head(F)) + fm.inner(s.phi, fm.tail(F));
    const double rot = fm.inner(s.phi, mu_f) - fm.inner(s.pi, mu_inv_g);
    return 0.5 * lin * lin + 0.5 * rot * rot;
}

inline double number_functional(const field_model& fm, const vec& F, const field_state& s) {
    require_state(fm, s);
    fm.space().require(F);
    return number_functional(fm, F, fm.mu.apply(fm.head(F)), fm.mu_inv.apply(fm.tail(F)), s);
}

// Real L2-orthonormal family of component fields. coefficients(x) returns
// the weighted inner products of x with every element.
struct l2_basis {
    std::string name;
    long size = 0;
    long length = 0;
    std::function<vec(long)> element;
    std::function<vec(const vec&)> coefficients;
    std::vector<long> modes;
    std::vector<double> mode_scale;
};

inline mat materialize(const l2_basis& b) {
    mat B(b.length, b.size);
    for (long k = 0; k < b.size; ++k) B.col(k) = b.element(k);
    return B;
}

inline l2_basis explicit_basis(std::string name, mat B, double weight) {
    l2_basis b;
    b.name = std::move(name);
    b.size = B.cols();
    b.length = B.rows();
    auto shared = std::make_shared<mat>(std::move(B));
    b.element = [shared](long k) { return vec(shared->col(k)); };
    b.coefficients = [shared, weight](const vec& x) { return vec(weight * (shared->transpose() * x)); };
    return b;
}

// Representative modes of the real Fourier family: each +-k pair once (cos
// and sin), self-conjugate modes once (cos). Electromagnetic families skip
// k = 0 and Nyquist content and carry two polarizations.
struct mode_entry {
    long idx;
    bool self_conjugate;
};

inline std::vector<mode_entry> real_modes(const field_grid& g, bool transverse) {
    std::vector<mode_entry> out;
    for (long i = 0; i < g.sites(); ++i) {
        const long c = conjugate_mode(g, i);
        if (c < i) continue;
        if (transverse && (i == 0 || has_nyquist(g, i))) continue;
        out.push_back({i, c == i});
    }
    return out;
}

inline std::array<std::array<double, 3>, 2> polarizations(const std::array<double, 3>& k) {
    const double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    const std::array<double, 3> u{k[0] / kn, k[1] / kn, k[2] / kn};
    int a = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(u[static_cast<std::size_t>(i)]) < std::abs(u[static_cast<std::size_t>(a)])) a = i;
    std::array<double, 3> e{0.0, 0.0, 0.0};
    e[static_cast<std::size_t>(a)] = 1.0;
    auto cross = [](const std::array<double, 3>& x, const std::array<double, 3>& y) {
        return std::array<double, 3>{x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2],
                                     x[0] * y[1] - x[1] * y[0]};
    };
    auto e1 = cross(u, e);
    const double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
    for (auto& v : e1) v /= n1;
    return {e1, cross(u, e1)};
}

// Fourier family on the torus: scalar real trig modes, or transverse
// polarized modes for the electromagnetic family. Elements and coefficients
// use exact integer phases.
inline l2_basis fourier_basis(const field_model& fm) {
    require_torus(fm.grid, "Fourier basis");
    const field_grid g = fm.grid;
    const bool transverse = fm.fam == family::maxwell;
    const int comps = fm.components();
    const auto modes = std::make_shared<std::vector<mode_entry>>(real_modes(g, transverse));
    struct item {
        long mode;
        bool sine;
        int pol;
    };
    auto items = std::make_shared<std::vector<item>>();
    for (const auto& m : *modes)
        for (int p = 0; p < (transverse ? 2 : 1); ++p) {
            items->push_back({m.idx, false, p});
            if (!m.self_conjugate) items->push_back({m.idx, true, p});
        }
    const long n = g.sites();
    const double w = g.weight();
    auto norm = [n, w](long idx, const field_grid& gg) {
        return conjugate_mode(gg, idx) == idx ? 1.0 / std::sqrt(w * n) : std::sqrt(2.0 / (w * n));
    };
    auto polarization = [g, transverse](long idx, int p) {
        if (!transverse) return std::array<double, 3>{1.0, 0.0, 0.0};
        return polarizations(mode_wavevector(g, idx, false))[static_cast<std::size_t>(p)];
    };

    l2_basis b;
    b.name = transverse ? "transverse-fourier" : "fourier";
    b.size = static_cast<long>(items->size());
    b.length = n * comps;
    for (const auto& it : *items) {
        b.modes.push_back(it.mode);
        b.mode_scale.push_back(1.0);
    }
    b.element = [g, items, comps, norm, polarization](long k) {
        const auto& it = (*items)[static_cast<std::size_t>(k)];
        const long n = g.sites();
        const auto m = spectral::unflatten(it.mode, g.points, g.dims);
        const auto eps = polarization(it.mode, it.pol);
        const double c = norm(it.mode, g);
        vec e = vec::Zero(n * comps);
        for (long s = 0; s < n; ++s) {
            const auto j = spectral::unflatten(s, g.points, g.dims);
            long phase = 0;
            for (int a = 0; a < g.dims; ++a)
                phase += static_cast<long>(m[static_cast<std::size_t>(a)]) * j[static_cast<std::size_t>(a)];
            const double theta = 2.0 * M_PI * static_cast<double>(phase % g.points) / g.points;
            const double v = c * (it.sine ? std::sin(theta) : std::cos(theta));
            for (int q = 0; q < comps; ++q) e[q * n + s] = eps[static_cast<std::size_t>(q)] * v;
        }
        return e;
    };
    b.coefficients = [g, items, comps, norm, polarization, w](const vec& x) {
        const long n = g.sites();
        if (x.size() != n * comps) throw error(errc::grid_mismatch, "field length does not match basis");
        std::vector<cvec> hat(static_cast<std::size_t>(comps));
        for (int q = 0; q < comps; ++q) {
            hat[static_cast<std::size_t>(q)] = to_complex(x.segment(q * n, n));
            spectral::fft_all(hat[static_cast<std::size_t>(q)], g.points, g.dims, false);
        }
        vec out(static_cast<Eigen::Index>(items->size()));
        for (std::size_t k = 0; k < items->size(); ++k) {
            const auto& it = (*items)[k];
            const auto eps = polarization(it.mode, it.pol);
            cplx proj = 0.0;
            for (int q = 0; q < comps; ++q)
                proj += eps[static_cast<std::size_t>(q)] * hat[static_cast<std::size_t>(q)][it.mode];
            // sum x e^{-ik.x} = sum x cos - i sum x sin
            out[static_cast<Eigen::Index>(k)] = w * norm(it.mode, g) * (it.sine ? -proj.imag() : proj.real());
        }
        return out;
    };
    return b;
}

// Dirichlet sine family on the half-line.
inline l2_basis sine_basis(const field_model& fm) {
    if (fm.grid.geo != geometry::half_line) throw error(errc::geometry_mismatch, "sine basis needs a half-line grid");
    const int n = fm.grid.points;
    mat B(n, n);
    const double c = std::sqrt(2.0 / (fm.grid.weight() * (n + 1)));
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            B(j, k) = c * std::sin(M_PI * static_cast<double>((static_cast<long>(k + 1) * (j + 1)) % (2 * (n + 1))) /
                                   (n + 1));
    return explicit_basis("sine", std::move(B), fm.grid.weight());
}

// Scaled point masses; scalar families only.
inline l2_basis point_basis(const field_model& fm) {
    if (fm.components() != 1) throw error(errc::geometry_mismatch, "point basis is scalar only");
    const long n = fm.length();
    return explicit_basis("point", mat::Identity(n, n) / std::sqrt(fm.grid.weight()), fm.grid.weight());
}

inline l2_basis seed_basis(const field_model& fm) {
    return fm.grid.geo == geometry::torus ? fourier_basis(fm) : sine_basis(fm);
}

// Largest deviation of the Gram matrix from the identity. Bases too large to
// materialize are checked on a deterministic sample of elements, together
// with the consistency of element() and coefficients().
inline double orthonormality_defect(const field_model& fm, const l2_basis& b, long max_entries = 40'000'000) {
    if (b.length != fm.length()) throw error(errc::grid_mismatch, "basis length does not match model");
    if (b.size * b.length <= max_entries) {
        const mat B = materialize(b);
        const mat G = fm.grid.weight() * (B.transpose() * B);
        return (G - mat::Identity(b.size, b.size)).cwiseAbs().maxCoeff();
    }
    std::vector<long> sample;
    const long count = std::min<long>(b.size, 48);
    for (long i = 0; i < count; ++i) sample.push_back((i * (b.size - 1)) / std::max<long>(count - 1, 1));
    double worst = 0.0;
    for (long i : sample) {
        const vec c = b.coefficients(b.element(i));
        for (long j = 0; j < b.size; ++j) worst = std::max(worst, std::abs(c[j] - (i == j ? 1.0 : 0.0)));
    }
    return worst;
}

inline constexpr double l2_tolerance = 1e-10;
inline constexpr double alpha_tolerance = 1e-8;

struct identity_value {
    double basis_sum = 0.0;
    double closed_form = 0.0;
    double basis_defect = 0.0;
    double rel_error() const {
        const double scale = std::abs(closed_form);
        return scale > 0 ? std::abs(basis_sum - closed_form) / scale : std::abs(basis_sum - closed_form);
    }
};

// Sum of N((e_k, 0)) over an L2-orthonormal family, using the symmetry of mu:
// the integral of phi (mu e_k) equals that of (mu phi) e_k.
inline double hamiltonian(const field_model& fm, const l2_basis& b, const field_state& s,
                          double* defect_out = nullptr) {
    require_state(fm, s);
    const double defect = orthonormality_defect(fm, b);
    if (defect_out) *defect_out = defect;
    if (defect > l2_tolerance)
        throw error(errc::non_orthonormal_basis, "L2 Gram defect " + std::to_string(defect));
    const vec cp = b.coefficients(s.pi);
    const vec cm = b.coefficients(fm.mu.apply(s.phi));
    neumaier acc;
    for (long k = 0; k < b.size; ++k) acc.add(0.5 * cp[k] * cp[k] + 0.5 * cm[k] * cm[k]);
    return acc.value();
}

inline double closed_form_hamiltonian(const field_model& fm, const field_state& s) {
    require_state(fm, s);
    const double w = fm.grid.weight();
    neumaier acc;
    acc.add(0.5 * w * s.pi.squaredNorm());
    switch (fm.fam) {
    case family::minkowski: {
        acc.add(0.5 * w * fm.mass * fm.mass * s.phi.squaredNorm());
        for (int a = 0; a < fm.grid.dims; ++a) acc.add(0.5 * w * derivative(fm.grid, s.phi, a).squaredNorm());
        break;
    }
    case family::rindler: acc.add(0.5 * w * s.phi.dot(fm.generator * s.phi)); break;
    case family::maxwell: acc.add(0.5 * w * curl(fm.grid, s.phi).squaredNorm()); break;
    }
    return acc.value();
}

inline double closed_form_total_number(const field_model& fm, const field_state& s) {
    require_state(fm, s);
    return 0.5 * fm.inner(s.pi, fm.mu_inv.apply(s.pi)) + 0.5 * fm.inner(s.phi, fm.mu.apply(s.phi));
}

// alpha_J-orthonormal family of test pairs with their J images.
struct alpha_basis {
    std::string name;
    mat F;
    mat JF;
    long size() const { return F.cols(); }
};

// Complex Gram-Schmidt in alpha_J(X, Y) = sigma(X, JY) + i sigma(X, Y), with
// J acting as multiplication by i. Two projection passes; seeds whose
// remainder falls below drop_tol of their own norm are skipped.
inline alpha_basis gram_schmidt(const field_model& fm, const mat& seeds, std::string name, long target,
                                double drop_tol = 1e-8) {
    const long L = fm.length();
    const double w = fm.grid.weight();
    if (seeds.rows() != 2 * L) throw error(errc::grid_mismatch, "seed length does not match model");
    mat F(2 * L, target), JF(2 * L, target);
    long m = 0;
    // sigma(B_j, v) for all columns j at once
    auto sig = [&](const mat& B, const vec& v) -> vec {
        return w * (B.topRows(L).leftCols(m).transpose() * v.tail(L) -
                    B.bottomRows(L).leftCols(m).transpose() * v.head(L));
    };
    for (Eigen::Index c = 0; c < seeds.cols() && m < target; ++c) {
        vec v = seeds.col(c);
        vec Jv = fm.J(v);
        const double start = w * (v.head(L).dot(Jv.tail(L)) - Jv.head(L).dot(v.tail(L)));
        if (!(start > 0)) continue;
        for (int pass = 0; pass < 2 && m > 0; ++pass) {
            const vec re = sig(F, Jv);
            const vec im = sig(F, v);
            v -= F.leftCols(m) * re + JF.leftCols(m) * im;
            Jv -= JF.leftCols(m) * re - F.leftCols(m) * im;
        }
        const double n2 = w * (v.head(L).dot(Jv.tail(L)) - Jv.head(L).dot(v.tail(L)));
        if (!(n2 > drop_tol * start)) continue;
        const double s = 1.0 / std::sqrt(n2);
        F.col(m) = s * v;
        JF.col(m) = s * Jv;
        ++m;
    }
    if (m < target)
        throw error(errc::non_orthonormal_basis,
                    "seeds span " + std::to_string(m) + " of " + std::to_string(target) + " complex dimensions");
    return {std::move(name), std::move(F), std::move(JF)};
}

// Complex dimension of the test space: the size of any L2-orthonormal family.
inline long complex_dimension(const field_model& fm) {
    return fm.fam == family::maxwell ? fourier_basis(fm).size : fm.length();
}

inline mat fourier_seeds(const field_model& fm) {
    const mat B = materialize(seed_basis(fm));
    mat S = mat::Zero(2 * fm.length(), B.cols());
    S.topRows(fm.length()) = B;
    return S;
}

// Point masses in the configuration slot, moved into the transverse space
// for the electromagnetic family.
inline mat point_seeds(const field_model& fm) {
    const long L = fm.length();
    mat S = mat::Zero(2 * L, L);
    for (long i = 0; i < L; ++i) {
        vec d = vec::Zero(L);
        d[i] = 1.0 / std::sqrt(fm.grid.weight());
        if (fm.fam == family::maxwell) d = restrict_transverse(fm.grid, d);
        S.bottomRows(L).col(i) = d;
    }
    return S;
}

inline alpha_basis fourier_alpha_basis(const field_model& fm) {
    return gram_schmidt(fm, fourier_seeds(fm), "fourier-gs", complex_dimension(fm));
}

inline alpha_basis point_alpha_basis(const field_model& fm) {
    return gram_schmidt(fm, point_seeds(fm), "point-gs", complex_dimension(fm));
}

inline double alpha_defect(const field_model& fm, const alpha_basis& b) {
    const long L = fm.length();
    const double w = fm.grid.weight();
    const mat re = w * (b.F.topRows(L).transpose() * b.JF.bottomRows(L) -
                        b.F.bottomRows(L).transpose() * b.JF.topRows(L));
    const mat im = w * (b.F.topRows(L).transpose() * b.F.bottomRows(L) -
                        b.F.bottomRows(L).transpose() * b.F.topRows(L));
    return std::max((re - mat::Identity(b.size(), b.size())).cwiseAbs().maxCoeff(), im.cwiseAbs().maxCoeff());
}

// Basis sum of number functionals; partial sums are returned when requested.
inline double total_number(const field_model& fm, const alpha_basis& b, const field_state& s,
                           double* defect_out = nullptr, std::vector<double>* partial = nullptr) {
    require_state(fm, s);
    if (b.F.rows() != 2 * fm.length()) throw error(errc::grid_mismatch, "basis length does not match model");
    const double defect = alpha_defect(fm, b);
    if (defect_out) *defect_out = defect;
    if (defect > alpha_tolerance)
        throw error(errc::non_orthonormal_basis, "alpha Gram defect " + std::to_string(defect));
    const long L = fm.length();
    neumaier acc;
    for (long k = 0; k < b.size(); ++k) {
        const vec F = b.F.col(k);
        // J(f, g) = (-mu^{-1} g, mu f)
        const vec mu_f = b.JF.col(k).tail(L);
        const vec mu_inv_g = -b.JF.col(k).head(L);
        acc.add(number_functional(fm, F, mu_f, mu_inv_g, s));
        if (partial) partial->push_back(acc.value());
    }
    return acc.value();
}

// Total number over the alpha_J-orthonormal family (lambda^{-1/2} e_k, 0)
// built from the Fourier family, where mu e_k = lambda e_k. Used where the
// explicit family is too large to store.
inline double total_number_spectral(const field_model& fm, const field_state& s) {
    require_state(fm, s);
    const l2_basis b = fourier_basis(fm);
    const double defect = orthonormality_defect(fm, b);
    if (defect > l2_tolerance)
        throw error(errc::non_orthonormal_basis, "L2 Gram defect " + std::to_string(defect));
    const vec cp = b.coefficients(s.pi);
    const vec cf = b.coefficients(s.phi);
    neumaier acc;
    for (long k = 0; k < b.size; ++k) {
        const double lam = fm.mu.symbol[b.modes[static_cast<std::size_t>(k)]];
        acc.add(0.5 * cp[k] * cp[k] / lam + 0.5 * lam * cf[k] * cf[k]);
    }
    return acc.value();
}

// Random smooth states. Torus: Fourier coefficients drawn for modes with
// every |m_a| <= cutoff (no Nyquist, zero mean for the electromagnetic
// family, which is also projected). Half-line: decaying sine series.
inline vec random_field(const field_model& fm, rng& r, int cutoff) {
    const field_grid& g = fm.grid;
    const long n = g.sites();
    vec out(fm.length());
    for (int c = 0; c < fm.components(); ++c) {
        if (g.geo == geometry::half_line) {
            vec f = vec::Zero(n);
            for (int k = 1; k <= cutoff; ++k) {
                const double a = r.normal() / k;
                for (long j = 0; j < n; ++j) f[j] += a * std::sin(M_PI * k * g.coord(j, 0) / g.extent);
            }
            out.segment(c * n, n) = f;
            continue;
        }
        cvec hat = cvec::Zero(n);
        for (long i = 0; i < n; ++i) {
            const auto m = spectral::unflatten(i, g.points, g.dims);
            bool keep = true;
            for (int a = 0; a < g.dims; ++a) {
                const int v = m[static_cast<std::size_t>(a)];
                const int signed_m = v <= g.points / 2 ? v : v - g.points;
                if (std::abs(signed_m) > cutoff || v == g.points / 2) keep = false;
            }
            if (fm.fam == family::maxwell && i == 0) keep = false;
            const double re = r.normal();
            const double im = r.normal();
            if (keep) hat[i] = cplx(re, im);
        }
        spectral::fft_all(hat, g.points, g.dims, true);
        out.segment(c * n, n) = hat.real() * std::sqrt(static_cast<double>(n));
    }
    if (fm.fam == family::maxwell) out = restrict_transverse(g, out);
    return out;
}

inline int default_cutoff(const field_grid& g) {
    return g.geo == geometry::torus ? std::max(1, g.points / 8) : std::max(1, g.points / 10);
}

inline field_state random_state(const field_model& fm, rng& r) {
    const int cutoff = default_cutoff(fm.grid);
    field_state s{fm.grid, fm.components(), random_field(fm, r, cutoff), vec()};
    s.phi = random_field(fm, r, cutoff);
    return s;
}

} // namespace qlimit::field

#endif
