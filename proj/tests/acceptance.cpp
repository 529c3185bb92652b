// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: acceptance <path-to-qlimit-cli> <scratch-dir>

#include "oracle.hpp"

#include <qlimit/algebra.hpp>
#include <qlimit/field.hpp>
#include <qlimit/harness.hpp>
#include <qlimit/limit.hpp>
#include <qlimit/random.hpp>
#include <qlimit/rep.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace qlimit;
using algebra::cplx;
using algebra::vec;
using clock_type = std::chrono::steady_clock;

struct outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<outcome()>& body) {
    const auto t0 = clock_type::now();
    outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(clock_type::now() - t0).count();
    const bool in_time = secs < budget_s;
    const bool ok = o.pass && in_time;
    if (!ok) ++failures;
    std::printf("%s criterion %d %s: %s; runtime %.2f s (budget %g s%s)\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                o.detail.c_str(), secs, budget_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// ------------------------------------------------------------------ 1

struct flat_term {
    cplx z;
    vec F;
};

// Product by explicit expansion over a flat term list.
std::vector<flat_term> brute_mul(const std::vector<flat_term>& A, const std::vector<flat_term>& B, double hbar) {
    std::vector<flat_term> out;
    for (const auto& x : A)
        for (const auto& y : B) {
            const long n = x.F.size() / 2;
            double s = 0.0;
            for (long i = 0; i < n; ++i) s += x.F[i] * y.F[n + i] - y.F[i] * x.F[n + i];
            const vec G = x.F + y.F;
            const cplx z = x.z * y.z * std::exp(cplx(0.0, -hbar / 2.0 * s));
            bool merged = false;
            for (auto& t : out)
                if (t.F == G) {
                    t.z += z;
                    merged = true;
                    break;
                }
            if (!merged) out.push_back({z, G});
        }
    return out;
}

double diff_flat(const std::vector<flat_term>& A, const algebra::weyl_element& B) {
    double d = 0.0;
    for (const auto& t : A) {
        const auto it = B.terms.find(algebra::canonical_key(t.F));
        d = std::max(d, std::abs(t.z - (it == B.terms.end() ? cplx(0.0) : it->second)));
    }
    // a nonzero term of B missing from A counts fully
    for (const auto& [k, z] : B.terms) {
        bool found = false;
        for (const auto& t : A) found = found || algebra::canonical_key(t.F) == k;
        if (!found) d = std::max(d, std::abs(z));
    }
    return d;
}

outcome ccr_algebra() {
    using namespace algebra;
    const int n = 2;
    const auto s = symplectic_space::standard(n);
    rng r(2024);
    auto flat = [&](int terms) {
        std::vector<flat_term> out;
        for (int k = 0; k < terms; ++k) {
            vec F(2 * n);
            for (int i = 0; i < 2 * n; ++i) F[i] = std::round(r.uniform(-2.0, 2.0) * 64.0) / 64.0;
            out.push_back({cplx(r.uniform(-1, 1), r.uniform(-1, 1)), F});
        }
        return out;
    };
    auto element = [&](const std::vector<flat_term>& ts, double h) {
        std::vector<term> t;
        for (const auto& x : ts) t.push_back({x.z, x.F});
        return weyl_element::from_terms(h, 2 * n, t);
    };
    double gen = 0, assoc = 0, brute = 0, invol = 0, anti = 0, antilin = 0;
    for (int i = 0; i < 200; ++i) {
        const double h = std::vector<double>{1.0, 0.5, 0.1}[static_cast<std::size_t>(i % 3)];
        const auto fa = flat(1), fb = flat(1);
        const auto WF = element(fa, h), WG = element(fb, h);
        gen = std::max(gen, diff_flat(brute_mul(fa, fb, h), weyl_mul(s, WF, WG)));
        const auto xa = flat(3), xb = flat(3), xc = flat(3);
        const auto A = element(xa, h), B = element(xb, h), C = element(xc, h);
        const auto AB = weyl_mul(s, A, B);
        brute = std::max(brute, diff_flat(brute_mul(xa, xb, h), AB));
        assoc = std::max(assoc, max_coeff_diff(weyl_mul(s, AB, C), weyl_mul(s, A, weyl_mul(s, B, C))));
        assoc = std::max(assoc, diff_flat(brute_mul(brute_mul(xa, xb, h), xc, h), weyl_mul(s, A, weyl_mul(s, B, C))));
        invol = std::max(invol, max_coeff_diff(weyl_adjoint(weyl_adjoint(A)), A));
        anti = std::max(anti, max_coeff_diff(weyl_adjoint(AB), weyl_mul(s, weyl_adjoint(B), weyl_adjoint(A))));
        const cplx z(r.uniform(-1, 1), r.uniform(-1, 1));
        antilin = std::max(antilin, max_coeff_diff(weyl_adjoint(z * A), std::conj(z) * weyl_adjoint(A)));
    }
    const double worst = std::max({gen, assoc, brute, invol, anti, antilin});
    return {worst <= 1e-14, "200 samples; generator " + num(gen) + ", product " + num(brute) + ", associativity " +
                                num(assoc) + ", involution " + num(invol) + ", antimultiplicative " + num(anti) +
                                ", antilinear " + num(antilin) + " (tol 1e-14)"};
}

// ------------------------------------------------------------------ 2

outcome positivity() {
    harness::run_config c;
    c.command = "algebra-check";
    const auto rep = harness::run(c);
    double cert = INFINITY, repd = INFINITY;
    int cert_rows = 0, rep_rows = 0;
    bool ok = true;
    for (const auto& row : rep.rows) {
        if (row["property"] == "positivity_certificate") {
            ++cert_rows;
            cert = std::min(cert, row["worst"].get<double>());
            ok = ok && row["pass"].get<bool>();
        }
        if (row["property"] == "positivity_represented") {
            ++rep_rows;
            repd = std::min(repd, row["worst"].get<double>());
            ok = ok && row["worst"].get<double>() >= -1e-6 && row["count"].get<int>() == 100;
        }
    }
    ok = ok && cert_rows == 3 && rep_rows == 3;
    return {ok, "100 elements per hbar in {1, 0.5, 0.1}; min certificate eigenvalue " + num(cert) +
                    " (tol -1e-10*dim), min represented eigenvalue " + num(repd) + " (tol -1e-6)"};
}

// ------------------------------------------------------------------ 3

outcome diagram() {
    std::vector<double> res;
    double worst_identity = 0.0;
    for (int N : {128, 256, 512}) {
        const auto d = rep::diagram_residual(rep::grid::make(N, 10.0), 1.0, 1.0, 0.0);
        res.push_back(d.residual);
        worst_identity = std::max(worst_identity, d.identity_residual);
    }
    const bool mono = harness::monotone_to_floor(res, harness::diagram_floor);
    const bool ok = mono && res.back() < 1e-4 && worst_identity < 1e-6;
    return {ok, "residuals N=128,256,512: " + num(res[0]) + ", " + num(res[1]) + ", " + num(res[2]) +
                    " (nonincreasing down to roundoff floor 1e-12, finest < 1e-4); quadrature identity residual " +
                    num(worst_identity) + " (< 1e-6)"};
}

// ------------------------------------------------------------------ 4

oracle::q to_oracle(limit::kind k) {
    switch (k) {
    case limit::kind::weyl_gen: return oracle::q::weyl;
    case limit::kind::field: return oracle::q::field;
    case limit::kind::annihilator: return oracle::q::annihilator;
    case limit::kind::creator: return oracle::q::creator;
    case limit::kind::number: return oracle::q::number;
    }
    return oracle::q::field;
}

outcome limit_rates() {
    const int n = 2;
    const auto s = algebra::symplectic_space::standard(n);
    const auto J = algebra::standard_structure();
    rng r(7);
    const vec F = r.normal_vector(2 * n), G = r.normal_vector(2 * n);
    const double l = r.uniform(0.5, 2.0);
    const auto J0 = algebra::squeezed_structure(l);
    const oracle::setting st{oracle::omega(n), oracle::squeeze_matrix(n, 1.0), oracle::squeeze_matrix(n, l)};
    std::vector<double> hb;
    for (int i = 0; i < 5; ++i) hb.push_back(std::pow(10.0, -1.0 - 0.5 * i));

    std::vector<limit::pair_spec> pairs;
    for (const auto& p : harness::all_supported_pairs()) {
        const auto a = static_cast<limit::kind>(p[0]), b = static_cast<limit::kind>(p[1]);
        pairs.push_back({harness::make_quantity(a, F, J0), harness::make_quantity(b, G, J0),
                         static_cast<limit::condition>(p[2])});
    }
    const auto t = limit::residual_scan(s, pairs, hb, J);
    double lo = INFINITY, hi = -INFINITY, worst_rel = 0.0;
    int fitted = 0, zero = 0;
    bool ok = t.slopes.size() == pairs.size();
    for (const auto& f : t.slopes) {
        if (f.identically_zero) {
            ++zero;
            continue;
        }
        ok = ok && f.defined;
        lo = std::min(lo, f.slope);
        hi = std::max(hi, f.slope);
        ++fitted;
    }
    ok = ok && lo >= 0.95 && hi <= 1.05;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto& row = t.rows[p * hb.size() + hb.size() - 1];
        const double want = oracle::residual(st, to_oracle(row.first.k), F, to_oracle(row.second.k), G,
                                             row.cond == limit::condition::dirac, row.hbar);
        if (want == 0.0) {
            ok = ok && row.value == 0.0;
            continue;
        }
        worst_rel = std::max(worst_rel, std::abs(row.value - want) / want);
    }
    ok = ok && worst_rel <= 1e-12;
    return {ok, std::to_string(pairs.size()) + " supported pairs on R^4; " + std::to_string(fitted) +
                    " fitted slopes in [" + num(lo) + ", " + num(hi) + "] (band [0.95, 1.05]), " + std::to_string(zero) +
                    " identically zero; worst relative gap to hand-derived value at hbar=1e-3 " + num(worst_rel) +
                    " (tol 1e-12)"};
}

// ------------------------------------------------------------------ 5

outcome representation_cross_check() {
    const auto g = rep::grid::make(256, 10.0);
    const double h = 0.5;
    const auto s = algebra::symplectic_space::standard(1);
    const auto J = algebra::standard_structure();
    rng r(11);
    const vec F = r.normal_vector(2), G = r.normal_vector(2);
    const auto V = rep::test_subspace(g, h, 8);
    const double bound = rep::discretization_bound(g, h, V);
    bool ok = true;
    double worst_gap = 0.0, worst_allow = INFINITY;
    std::string values;
    for (const auto& p : harness::parse_pairs("basic")) {
        const auto a = static_cast<limit::kind>(p[0]), b = static_cast<limit::kind>(p[1]);
        const auto c = static_cast<limit::condition>(p[2]);
        const auto A = harness::make_quantity(a, F, J), B = harness::make_quantity(b, G, J);
        const double sym = limit::residual_value(s, A, B, c, J, h);
        const auto rp = limit::represented_residual(s, g, A, B, c, J, h, V);
        const double gap = std::abs(rp.value - sym);
        const double allow = bound + rp.extrapolation + 1e-12;
        ok = ok && gap <= allow;
        worst_gap = std::max(worst_gap, gap);
        worst_allow = std::min(worst_allow, allow);
        values += (values.empty() ? "" : ", ") + num(sym) + "/" + num(rp.value);
    }
    return {ok, "symbolic/matrix residuals " + values + "; worst gap " + num(worst_gap) +
                    " within allowance >= " + num(worst_allow) + " (discretization bound " + num(bound) +
                    " + extrapolation + 1e-12)"};
}

// ------------------------------------------------------------------ 6-8

struct energy_summary {
    bool ok = true;
    double worst = 0.0;
    int rows = 0;
    std::vector<std::string> identities;
};

energy_summary summarize(const harness::report& rep) {
    energy_summary out;
    for (const auto& row : rep.rows) {
        ++out.rows;
        out.ok = out.ok && row["pass"].get<bool>() && row["rel_error"].get<double>() <= 1e-8;
        out.worst = std::max(out.worst, row["rel_error"].get<double>());
        const auto id = row["identity"].get<std::string>();
        if (std::find(out.identities.begin(), out.identities.end(), id) == out.identities.end())
            out.identities.push_back(id);
    }
    return out;
}

bool has(const energy_summary& e, const std::string& id) {
    return std::find(e.identities.begin(), e.identities.end(), id) != e.identities.end();
}

outcome klein_gordon() {
    harness::run_config c;
    c.command = "field-energy";
    c.family = "kg-minkowski";
    const auto e = summarize(harness::run(c));
    const bool ok = e.ok && e.rows == 20 * 5 && has(e, "total_number") && has(e, "hamiltonian") &&
                    has(e, "basis_independence");
    return {ok, "torus d=1 N=256 m=1, 20 states, " + std::to_string(e.rows) +
                    " checks (total number x2 bases, basis independence, Hamiltonian x2 bases); worst relative error " +
                    num(e.worst) + " (tol 1e-8)"};
}

outcome rindler() {
    const auto g = field::field_grid::half_line(200, 10.0);
    const auto mu = field::build_mu_rindler(g, 1.0, {0.0, 0.0});
    const double asym = (mu.matrix - mu.matrix.transpose()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<field::mat> es(mu.matrix, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    harness::run_config c;
    c.command = "field-energy";
    c.family = "kg-rindler";
    const auto e = summarize(harness::run(c));
    const bool ok = asym == 0.0 && lmin > 0.0 && e.ok && has(e, "total_number") && has(e, "hamiltonian");
    return {ok, "half-line N=200 L=10 m=1 kperp=0; mu symmetric (defect " + num(asym) + "), min eigenvalue " +
                    num(lmin) + "; " + std::to_string(e.rows) + " identity checks, worst relative error " +
                    num(e.worst) + " (tol 1e-8)"};
}

outcome maxwell() {
    const auto g = field::field_grid::torus(3, 32, 2.0 * M_PI);
    const auto fm = field::maxwell(g);
    const auto scalar = field::minkowski(g, 1.0);
    rng r(5);
    double idem = 0.0, div = 0.0, ibp = 0.0;
    for (int i = 0; i < 3; ++i) {
        vec B(3 * g.sites());
        for (int c = 0; c < 3; ++c) B.segment(c * g.sites(), g.sites()) = field::random_field(scalar, r, 6);
        const double scale = B.cwiseAbs().maxCoeff();
        const vec P = field::helmholtz_project(g, B);
        idem = std::max(idem, (field::helmholtz_project(g, P) - P).cwiseAbs().maxCoeff() / scale);
        div = std::max(div, field::divergence(g, P).cwiseAbs().maxCoeff() / scale);
    }
    const auto lap = field::neg_laplacian(g);
    for (int i = 0; i < 10; ++i) {
        const vec A = field::random_field(fm, r, 6);
        const double lhs = g.weight() * A.dot(lap.apply(A));
        const double rhs = g.weight() * field::curl(g, A).squaredNorm();
        ibp = std::max(ibp, std::abs(lhs - rhs) / rhs);
    }
    harness::run_config c;
    c.command = "field-energy";
    c.family = "maxwell";
    const auto e = summarize(harness::run(c));
    const bool ok = idem <= 1e-10 && div <= 1e-10 && ibp <= 1e-10 && e.ok && has(e, "hamiltonian");
    return {ok, "3-torus N=32; projector idempotence " + num(idem) + ", divergence " + num(div) +
                    " (tol 1e-10); -A.lap A vs |curl A|^2 over 10 fields " + num(ibp) + " (tol 1e-10); " +
                    std::to_string(e.rows) + " energy checks, worst relative error " + num(e.worst) + " (tol 1e-8)"};
}

// ------------------------------------------------------------------ 9

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

outcome determinism(const std::string& cli, const std::string& work) {
    std::filesystem::create_directories(work);
    const std::vector<std::pair<std::string, std::string>> runs{
        {"algebra-check", "algebra-check"},
        {"limit-scan", "limit-scan --pairs all --dim 2"},
        {"rep-verify", "rep-verify"},
        {"kg-minkowski", "field-energy kg-minkowski"},
        {"kg-rindler", "field-energy kg-rindler"},
        {"maxwell", "field-energy maxwell"},
        {"limit-scan-json", "limit-scan --format json --seed 9"},
    };
    bool ok = true;
    std::string failed;
    for (const auto& [name, args] : runs) {
        std::string first;
        for (int k = 0; k < 2; ++k) {
            const std::string out = work + "/" + name + "." + std::to_string(k);
            const std::string cmd = "\"" + cli + "\" " + args + " --out \"" + out + "\"";
            const int status = std::system(cmd.c_str());
            if (status != 0) {
                ok = false;
                failed += " " + name + "(exit)";
            }
            const std::string text = slurp(out);
            if (text.empty()) {
                ok = false;
                failed += " " + name + "(empty)";
            }
            if (k == 0)
                first = text;
            else if (text != first) {
                ok = false;
                failed += " " + name + "(differs)";
            }
        }
    }
    return {ok, std::to_string(runs.size()) + " commands run twice, outputs " +
                    (ok ? std::string("byte-identical and exit 0") : "mismatch:" + failed)};
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: acceptance <qlimit-cli> <scratch-dir>\n");
        return 2;
    }
    criterion(1, "ccr_algebra", 5.0, ccr_algebra);
    criterion(2, "positivity", 30.0, positivity);
    criterion(3, "diagram_refinement", 120.0, diagram);
    criterion(4, "classical_limit_rates", 1.0, limit_rates);
    criterion(5, "representation_cross_check", 60.0, representation_cross_check);
    criterion(6, "klein_gordon_identities", 60.0, klein_gordon);
    criterion(7, "rindler_identities", 60.0, rindler);
    criterion(8, "maxwell_identities", 180.0, maxwell);
    criterion(9, "determinism", 600.0, [&] { return determinism(argv[1], argv[2]); });
    std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
