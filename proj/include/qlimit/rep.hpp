#ifndef QLIMIT_REP_HPP
#define QLIMIT_REP_HPP

// Schrodinger representation on a uniform periodic grid: Weyl unitaries,
// coherent states, Berezin operators and field operators as dense matrices.

#include <qlimit/error.hpp>
#include <qlimit/spectral.hpp>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace qlimit::rep {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;

// N points per axis on [-L, L), cell-centred so the grid is symmetric about 0.
struct grid {
    int dims = 1;
    int points = 0;
    double extent = 0.0;

    static grid make(int points, double extent, int dims = 1) {
        if (points <= 0 || points % 2 != 0)
            throw error(errc::invalid_config, "grid size must be even and positive");
        if (!(extent > 0)) throw error(errc::invalid_config, "extent must be positive");
        if (dims < 1 || dims > 2)
            throw error(errc::invalid_config, "dense representation supports 1 or 2 dimensions");
        return {dims, points, extent};
    }

    double spacing() const { return 2.0 * extent / points; }
    long size() const { return spectral::ipow(points, dims); }
    double coord(int j) const { return -extent + (j + 0.5) * spacing(); }
    double cell() const { return std::pow(spacing(), dims); }
    double coord_axis(long flat, int axis) const {
        return coord(static_cast<int>((flat / spectral::ipow(points, axis)) % points));
    }
    std::vector<double> wavenumbers() const { return spectral::wavenumbers(points, 2.0 * extent); }
};

struct rep_operator {
    cmat matrix;
    double hbar = 0.0;
    grid g;
};

inline void require_positive_hbar(double hbar) {
    if (!(hbar > 0.0 && hbar <= 1.0))
        throw error(errc::hbar_out_of_range, "representation needs hbar in (0,1]");
}

inline void require_axes(const grid& g, const std::vector<double>& v, const char* what) {
    if (static_cast<int>(v.size()) != g.dims)
        throw error(errc::dimension_mismatch, std::string(what) + " has wrong length");
}

inline double inner_weight(const grid& g) { return g.cell(); }

inline cplx inner(const grid& g, const cvec& a, const cvec& b) {
    return a.dot(b) * inner_weight(g);
}

// ------------------------------------------------------------ coherent states

// (pi hbar)^{-n/4} exp(-i p.q/2hbar + i p.x/hbar - (x-q)^2/2hbar), no window check.
inline cvec coherent_samples(const grid& g, double hbar, const std::vector<double>& p,
                             const std::vector<double>& q) {
    cvec psi(g.size());
    const double norm = std::pow(M_PI * hbar, -0.25 * g.dims);
    double pq = 0.0;
    for (int a = 0; a < g.dims; ++a) pq += p[a] * q[a];
    for (long i = 0; i < g.size(); ++i) {
        double phase = -pq / (2.0 * hbar), decay = 0.0;
        for (int a = 0; a < g.dims; ++a) {
            const double x = g.coord_axis(i, a);
            phase += p[a] * x / hbar;
            decay += (x - q[a]) * (x - q[a]);
        }
        psi[i] = norm * std::exp(-decay / (2.0 * hbar)) * std::polar(1.0, phase);
    }
    return psi;
}

inline cvec coherent_state(const grid& g, double hbar, const std::vector<double>& p,
                           const std::vector<double>& q, double tail_budget = 1e-12) {
    require_positive_hbar(hbar);
    require_axes(g, p, "p");
    require_axes(g, q, "q");
    // |psi|^2 tail beyond distance d is about erfc(d/sqrt(hbar)).
    const double kmax = M_PI / g.spacing();
    for (int a = 0; a < g.dims; ++a) {
        const double d = g.extent - std::abs(q[a]);
        if (d <= 0 || std::erfc(d / std::sqrt(hbar)) > tail_budget)
            throw error(errc::boundary_too_close, "coherent state centre too close to the edge");
        const double room = kmax - std::abs(p[a]) / hbar;
        if (room <= 0 || std::erfc(room * std::sqrt(hbar)) > tail_budget)
            throw error(errc::boundary_too_close, "coherent state momentum beyond the grid band");
    }
    return coherent_samples(g, hbar, p, q);
}

// ------------------------------------------------------------ Weyl unitaries

enum class shift_mode { strict, spectral };

// psi(x) -> psi(x - s) with periodic wrap; integer cell shifts are exact rolls.
inline cvec shift_state(const grid& g, const cvec& psi, const std::vector<double>& s,
                        shift_mode mode) {
    std::vector<double> cells(g.dims);
    bool integral = true;
    for (int a = 0; a < g.dims; ++a) {
        cells[a] = s[a] / g.spacing();
        if (std::abs(cells[a] - std::round(cells[a])) > 1e-9) integral = false;
    }
    if (integral) {
        cvec out(psi.size());
        for (long i = 0; i < g.size(); ++i) {
            long src = 0, stride = 1;
            for (int a = 0; a < g.dims; ++a) {
                const long ia = (i / stride) % g.points;
                long j = (ia - std::lround(cells[a])) % g.points;
                if (j < 0) j += g.points;
                src += j * stride;
                stride *= g.points;
            }
            out[i] = psi[src];
        }
        return out;
    }
    if (mode == shift_mode::strict)
        throw error(errc::fractional_shift, "shift is not a whole number of grid cells");
    const auto k = g.wavenumbers();
    return spectral::apply_multiplier(psi, g.points, g.dims, [&](long m) {
        double ph = 0.0;
        const auto idx = spectral::unflatten(m, g.points, g.dims);
        for (int a = 0; a < g.dims; ++a) ph -= k[idx[a]] * s[a];
        return std::polar(1.0, ph);
    });
}

// (pi(W(a,b)) psi)(x) = exp(-i hbar a.b/2) exp(i b.x) psi(x - hbar a)
inline cvec apply_weyl(const grid& g, double hbar, const std::vector<double>& a,
                       const std::vector<double>& b, const cvec& psi,
                       shift_mode mode = shift_mode::spectral) {
    std::vector<double> s(g.dims);
    double ab = 0.0;
    for (int i = 0; i < g.dims; ++i) {
        s[i] = hbar * a[i];
        ab += a[i] * b[i];
    }
    cvec out = shift_state(g, psi, s, mode);
    for (long i = 0; i < g.size(); ++i) {
        double bx = 0.0;
        for (int ax = 0; ax < g.dims; ++ax) bx += b[ax] * g.coord_axis(i, ax);
        out[i] *= std::polar(1.0, bx - hbar * ab / 2.0);
    }
    return out;
}

template <class Apply>
cmat assemble(const grid& g, Apply&& apply) {
    const long n = g.size();
    cmat M(n, n);
    cvec e = cvec::Zero(n);
    for (long j = 0; j < n; ++j) {
        e.setZero();
        e[j] = 1.0;
        M.col(j) = apply(e);
    }
    return M;
}

inline rep_operator rep_weyl(const grid& g, double hbar, const std::vector<double>& a,
                             const std::vector<double>& b, shift_mode mode = shift_mode::spectral) {
    require_positive_hbar(hbar);
    require_axes(g, a, "a");
    require_axes(g, b, "b");
    // Shifts commute with translations, so column j is column 0 rolled by j.
    const long n = g.size();
    std::vector<double> s(g.dims);
    double ab = 0.0;
    for (int i = 0; i < g.dims; ++i) {
        s[i] = hbar * a[i];
        ab += a[i] * b[i];
    }
    cvec e0 = cvec::Zero(n);
    e0[0] = 1.0;
    const cvec c0 = shift_state(g, e0, s, mode);
    cvec phase(n);
    std::vector<std::vector<long>> idx(static_cast<std::size_t>(g.dims), std::vector<long>(n));
    for (long i = 0; i < n; ++i) {
        double bx = 0.0;
        long stride = 1;
        for (int ax = 0; ax < g.dims; ++ax) {
            bx += b[ax] * g.coord_axis(i, ax);
            idx[ax][i] = (i / stride) % g.points;
            stride *= g.points;
        }
        phase[i] = std::polar(1.0, bx - hbar * ab / 2.0);
    }
    cmat M(n, n);
    for (long j = 0; j < n; ++j)
        for (long i = 0; i < n; ++i) {
            long src = 0, stride = 1;
            for (int ax = 0; ax < g.dims; ++ax) {
                long d = idx[ax][i] - idx[ax][j];
                if (d < 0) d += g.points;
                src += d * stride;
                stride *= g.points;
            }
            M(i, j) = phase[i] * c0[src];
        }
    return {M, hbar, g};
}

// ------------------------------------------------------------ field operators

// i hbar a.grad + b.x with a spectral gradient
inline cvec apply_field(const grid& g, double hbar, const std::vector<double>& a,
                        const std::vector<double>& b, const cvec& psi) {
    const auto k = g.wavenumbers();
    cvec out = spectral::apply_multiplier(psi, g.points, g.dims, [&](long m) {
        const auto idx = spectral::unflatten(m, g.points, g.dims);
        double s = 0.0;
        for (int ax = 0; ax < g.dims; ++ax) s += a[ax] * k[idx[ax]];
        return cplx(-hbar * s, 0.0);
    });
    for (long i = 0; i < g.size(); ++i) {
        double bx = 0.0;
        for (int ax = 0; ax < g.dims; ++ax) bx += b[ax] * g.coord_axis(i, ax);
        out[i] += bx * psi[i];
    }
    return out;
}

enum class field_mode { direct, limit };

inline constexpr std::array<double, 3> limit_steps{1e-2, 5e-3, 2.5e-3};

struct extrapolated {
    cmat value;
    double error_estimate = 0.0; // max-entry change between the last two levels
};

// Romberg table on first-order quotients: each column applies the two-point
// rule 2^p D(t/2) - D(t) over 2^p - 1 for successive p.
inline extrapolated richardson(std::vector<cmat> level) {
    double est = 0.0;
    for (int p = 1; level.size() > 1; ++p) {
        const double f = std::pow(2.0, p);
        std::vector<cmat> next;
        for (std::size_t i = 0; i + 1 < level.size(); ++i)
            next.push_back((f * level[i + 1] - level[i]) / (f - 1.0));
        est = (next.back() - level.back()).cwiseAbs().maxCoeff();
        level = std::move(next);
    }
    return {level.front(), est};
}

inline extrapolated field_operator_limit(const grid& g, double hbar, const std::vector<double>& a,
                                         const std::vector<double>& b) {
    std::vector<cmat> quotients;
    const long n = g.size();
    for (double t : limit_steps) {
        std::vector<double> ta(a), tb(b);
        for (auto& v : ta) v *= t;
        for (auto& v : tb) v *= t;
        const cmat W = rep_weyl(g, hbar, ta, tb).matrix;
        quotients.push_back(cplx(0.0, -1.0) * (W - cmat::Identity(n, n)) / t);
    }
    return richardson(std::move(quotients));
}

inline rep_operator field_operator(const grid& g, double hbar, const std::vector<double>& a,
                                   const std::vector<double>& b,
                                   field_mode mode = field_mode::direct) {
    require_positive_hbar(hbar);
    require_axes(g, a, "a");
    require_axes(g, b, "b");
    if (mode == field_mode::limit) return {field_operator_limit(g, hbar, a, b).value, hbar, g};
    return {assemble(g, [&](const cvec& e) { return apply_field(g, hbar, a, b, e); }), hbar, g};
}

// ------------------------------------------------------------ test subspace

// First K Hermite-Gauss functions at width sqrt(hbar), orthonormalized on the
// grid (1-d) or as tensor products of total degree < K (2-d). These are
// band-limited and well inside the grid for moderate K.
inline cmat test_subspace(const grid& g, double hbar, int K) {
    require_positive_hbar(hbar);
    auto hermite_1d = [&](int order, double x) {
        const double u = x / std::sqrt(hbar);
        double h0 = 1.0, h1 = 2.0 * u;
        if (order == 0) return h0 * std::exp(-u * u / 2.0);
        for (int m = 1; m < order; ++m) {
            const double h2 = 2.0 * u * h1 - 2.0 * m * h0;
            h0 = h1;
            h1 = h2;
        }
        return h1 * std::exp(-u * u / 2.0);
    };
    std::vector<std::vector<int>> orders;
    if (g.dims == 1)
        for (int m = 0; m < K; ++m) orders.push_back({m});
    else
        for (int s = 0; static_cast<int>(orders.size()) < K; ++s)
            for (int m = 0; m <= s && static_cast<int>(orders.size()) < K; ++m)
                orders.push_back({m, s - m});
    cmat V(g.size(), static_cast<long>(orders.size()));
    for (std::size_t c = 0; c < orders.size(); ++c)
        for (long i = 0; i < g.size(); ++i) {
            double v = 1.0;
            for (int ax = 0; ax < g.dims; ++ax) v *= hermite_1d(orders[c][ax], g.coord_axis(i, ax));
            V(i, static_cast<long>(c)) = v;
        }
    // Scaled so columns are orthonormal in the plain Euclidean product, which
    // matches the weighted L2 norm up to the constant cell volume.
    Eigen::HouseholderQR<cmat> qr(V);
    cmat Q = qr.householderQ() * cmat::Identity(V.rows(), V.cols());
    // Fix column signs so the first sample of each column follows V.
    for (long c = 0; c < Q.cols(); ++c) {
        const cplx d = Q.col(c).dot(V.col(c));
        if (std::abs(d) > 0) Q.col(c) *= std::conj(d) / std::abs(d);
    }
    return Q;
}

// Largest singular value of M restricted to the columns of V.
inline double restricted_norm(const cmat& M, const cmat& V) {
    const cmat MV = M * V;
    Eigen::JacobiSVD<cmat> svd(MV);
    return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

inline double spectral_norm(const cmat& M) {
    Eigen::JacobiSVD<cmat> svd(M);
    return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

// Discretization error indicator on the test subspace: the represented CCR
// defect of the axis-0 pair plus the Fourier mass of the subspace in the top
// third of the band and its spatial mass in the outer tenth of the box.
inline double discretization_bound(const grid& g, double hbar, const cmat& V) {
    std::vector<double> e(g.dims, 0.0), a = e, b = e;
    a[0] = 1.0;
    b[0] = 1.0;
    cmat PV(V.rows(), V.cols()), XV(V.rows(), V.cols()), PXV(V.rows(), V.cols()),
        XPV(V.rows(), V.cols());
    for (long c = 0; c < V.cols(); ++c) {
        PV.col(c) = apply_field(g, hbar, a, e, V.col(c));
        XV.col(c) = apply_field(g, hbar, e, b, V.col(c));
        PXV.col(c) = apply_field(g, hbar, a, e, XV.col(c));
        XPV.col(c) = apply_field(g, hbar, e, b, PV.col(c));
    }
    const cmat defect = PXV - XPV - cplx(0.0, hbar) * V;
    Eigen::JacobiSVD<cmat> svd(defect);
    double ccr = svd.singularValues()[0];

    const auto k = g.wavenumbers();
    const double kcut = (2.0 / 3.0) * M_PI / g.spacing();
    double band = 0.0, edge = 0.0;
    for (long c = 0; c < V.cols(); ++c) {
        cvec f = V.col(c);
        spectral::fft_all(f, g.points, g.dims, false);
        double hi = 0.0, all = f.squaredNorm();
        for (long m = 0; m < f.size(); ++m) {
            const auto idx = spectral::unflatten(m, g.points, g.dims);
            for (int ax = 0; ax < g.dims; ++ax)
                if (std::abs(k[idx[ax]]) > kcut) {
                    hi += std::norm(f[m]);
                    break;
                }
        }
        band = std::max(band, std::sqrt(hi / all));
        double out = 0.0;
        for (long i = 0; i < g.size(); ++i)
            for (int ax = 0; ax < g.dims; ++ax)
                if (std::abs(g.coord_axis(i, ax)) > 0.9 * g.extent) {
                    out += std::norm(V(i, c));
                    break;
                }
        edge = std::max(edge, std::sqrt(out / V.col(c).squaredNorm()));
    }
    return ccr + band + edge;
}

// ------------------------------------------------------------ Berezin operator

struct quadrature {
    double p_window = 0.0; // nodes cover [-P, P]
    double q_window = 0.0; // nodes cover [-Q, Q]
    int p_nodes = 0;
    int q_nodes = 0;
};

using symbol_fn = std::function<cplx(double p, double q)>;

// (2 pi hbar)^{-1} sum_nodes w f(p,q) |psi_pq><psi_pq|, 1-d. The outer product
// of a coherent state depends on p only through exp(i p (x-y)/hbar), so the
// momentum sum is taken once per position node and per grid offset.
inline rep_operator berezin_operator(const grid& g, double hbar, const symbol_fn& f,
                                     const quadrature& quad) {
    require_positive_hbar(hbar);
    if (g.dims != 1)
        throw error(errc::dimension_mismatch, "Berezin assembly is implemented for one dimension");
    if (quad.p_nodes <= 0 || quad.q_nodes <= 0 || !(quad.p_window > 0) || !(quad.q_window > 0))
        throw error(errc::invalid_config, "empty quadrature");
    const int N = g.points;
    const double dx = g.spacing();
    const double hp = 2.0 * quad.p_window / quad.p_nodes;
    const double hq = 2.0 * quad.q_window / quad.q_nodes;
    const double gnorm = std::pow(M_PI * hbar, -0.25);

    std::vector<double> ps(quad.p_nodes);
    for (int j = 0; j < quad.p_nodes; ++j) ps[j] = -quad.p_window + (j + 0.5) * hp;
    // Phase table e^{i p d/hbar} for offsets d = m dx, m in [-(N-1), N-1].
    const int offsets = 2 * N - 1;
    cmat phase(offsets, quad.p_nodes);
    for (int m = 0; m < offsets; ++m)
        for (int j = 0; j < quad.p_nodes; ++j)
            phase(m, j) = std::polar(1.0, ps[j] * (m - (N - 1)) * dx / hbar);

    cmat K = cmat::Zero(N, N);
    cvec fq(quad.p_nodes);
    rvec gq(N);
    const double pref = hp * hq * dx / (2.0 * M_PI * hbar);
    for (int i = 0; i < quad.q_nodes; ++i) {
        const double q = -quad.q_window + (i + 0.5) * hq;
        for (int j = 0; j < quad.p_nodes; ++j) fq[j] = f(ps[j], q);
        const cvec Fq = phase * fq;
        for (int r = 0; r < N; ++r) {
            const double x = g.coord(r) - q;
            gq[r] = gnorm * std::exp(-x * x / (2.0 * hbar));
        }
        for (int c = 0; c < N; ++c) {
            if (gq[c] < 1e-300) continue;
            for (int r = 0; r < N; ++r) K(r, c) += pref * gq[r] * gq[c] * Fq[r - c + N - 1];
        }
    }
    return {K, hbar, g};
}

struct certified_quadrature {
    quadrature quad;
    double identity_residual = 0.0;
    int doublings = 0;
};

// Doubles node counts until the resolution of identity holds on V to tol.
inline certified_quadrature certify_quadrature(const grid& g, double hbar, const cmat& V,
                                               quadrature start, double tol = 1e-6,
                                               int max_doublings = 6) {
    const long n = g.size();
    for (int d = 0; d <= max_doublings; ++d) {
        const auto B = berezin_operator(g, hbar, [](double, double) { return cplx(1.0); }, start);
        const double res = restricted_norm(B.matrix - cmat::Identity(n, n), V);
        if (res < tol) return {start, res, d};
        start.p_nodes *= 2;
        start.q_nodes *= 2;
    }
    throw error(errc::quadrature_not_converged,
                "resolution of identity above tolerance after refinement");
}

// Default window: positions over the box plus a Gaussian margin (coherent
// states are sampled directly, not periodized), momenta a fixed multiple of
// sqrt(hbar) past the test subspace's band. Node counts are tied to N.
inline quadrature default_quadrature(const grid& g, double hbar, int K) {
    const double P = std::sqrt(hbar) * (std::sqrt(2.0 * K + 1.0) + 12.0);
    return {P, g.extent + 8.0 * std::sqrt(hbar), g.points / 4, g.points / 4};
}

struct diagram_report {
    double residual = 0.0;
    double identity_residual = 0.0;
    quadrature quad;
};

// Berezin symbol of the classical generator W_0(a,b) in the convention where
// pi(W(a,b)) shifts by -hbar a: f(p,q) = exp(i(b q - a p)).
inline diagram_report diagram_residual(const grid& g, double hbar, double a, double b, int K = 8,
                                       double tol = 1e-6, shift_mode mode = shift_mode::spectral) {
    const cmat W = rep_weyl(g, hbar, {a}, {b}, mode).matrix;
    const cmat V = test_subspace(g, hbar, K);
    const auto cq = certify_quadrature(g, hbar, V, default_quadrature(g, hbar, K), tol);
    const auto B = berezin_operator(
        g, hbar, [&](double p, double q) { return std::polar(1.0, b * q - a * p); }, cq.quad);
    const double c = std::exp(-hbar * (a * a + b * b) / 4.0);
    return {restricted_norm(B.matrix - c * W, V), cq.identity_residual, cq.quad};
}

} // namespace qlimit::rep

#endif
