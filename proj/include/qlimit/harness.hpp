#ifndef QLIMIT_HARNESS_HPP
#define QLIMIT_HARNESS_HPP

// Command logic behind the qlimit CLI: configuration checks, the four
// verification runs and CSV/JSON rendering of their tables.

#include <qlimit/algebra.hpp>
#include <qlimit/error.hpp>
#include <qlimit/field.hpp>
#include <qlimit/field_io.hpp>
#include <qlimit/limit.hpp>
#include <qlimit/random.hpp>
#include <qlimit/rep.hpp>

#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qlimit::harness {

using json = nlohmann::ordered_json;
using algebra::vec;

inline constexpr const char* version = "1.0.0";
inline constexpr int schema_version = 1;

struct run_config {
    std::string command;
    std::optional<int> points;
    std::optional<double> extent;
    std::optional<int> dims;
    double mass = 1.0;
    std::optional<std::vector<double>> hbars;
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "csv";
    // limit-scan
    std::string pairs = "basic";
    // rep-verify
    double a = 1.0;
    double b = 0.0;
    bool strict = false;
    // field-energy
    std::string family = "kg-minkowski";
    std::array<double, 2> kperp{0.0, 0.0};
    std::optional<int> states;
    std::string state_in;
    std::string state_out;
};

struct report {
    std::string command;
    std::vector<std::string> columns;
    std::vector<json> rows;
    std::vector<std::string> notes;
    bool passed = true;

    void add(json row) {
        if (row.contains("pass") && row["pass"].is_boolean() && !row["pass"].get<bool>()) passed = false;
        rows.push_back(std::move(row));
    }
};

inline std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::logic_error&) {
            throw error(errc::invalid_config, "cannot parse number '" + item + "'");
        }
        if (used != item.size()) throw error(errc::invalid_config, "cannot parse number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw error(errc::invalid_config, "empty list");
    return out;
}

// hbar lists lie in (0, 1] and strictly decrease.
inline void validate_hbars(const std::vector<double>& h) {
    if (h.empty()) throw error(errc::invalid_config, "hbar list is empty");
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0.0 && h[i] <= 1.0))
            throw error(errc::invalid_config, "hbar values must lie in (0,1]");
        if (i > 0 && !(h[i] < h[i - 1])) throw error(errc::invalid_config, "hbar values must strictly decrease");
    }
}

inline void validate(const run_config& c) {
    if (c.format != "csv" && c.format != "json") throw error(errc::invalid_config, "format must be csv or json");
    if (c.hbars) validate_hbars(*c.hbars);
    if (c.points && *c.points <= 0) throw error(errc::invalid_config, "--n must be positive");
    if (c.extent && !(*c.extent > 0)) throw error(errc::invalid_config, "--extent must be positive");
    if (c.dims && (*c.dims < 1 || *c.dims > 3)) throw error(errc::invalid_config, "--dim must be 1, 2 or 3");
    if (c.states && *c.states < 1) throw error(errc::invalid_config, "--states must be positive");
    if (!std::isfinite(c.mass)) throw error(errc::invalid_config, "--mass must be finite");
}

inline std::string fmt(double x) { return field::format_double(x); }

inline std::string coords(const vec& F) {
    std::string s;
    for (Eigen::Index i = 0; i < F.size(); ++i) s += (i ? ";" : "") + fmt(F[i]);
    return s;
}

inline json row_of(const std::vector<std::string>& cols, const std::vector<json>& values) {
    json r = json::object();
    for (std::size_t i = 0; i < cols.size(); ++i) r[cols[i]] = values[i];
    return r;
}

// --------------------------------------------------------------- algebra-check

inline report cmd_algebra_check(const run_config& cfg) {
    using namespace algebra;
    report rep{"algebra-check", {"property", "hbar", "count", "worst", "tolerance", "pass"}, {}, {}, true};
    const int n = cfg.dims.value_or(1);
    if (n > 2) throw error(errc::invalid_config, "algebra-check supports --dim 1 or 2");
    const std::vector<double> hbars = cfg.hbars.value_or(std::vector<double>{1.0, 0.5, 0.1});
    const auto s = symplectic_space::standard(n);
    const auto J = standard_structure();
    rng r(cfg.seed);

    // Dyadic coordinates keep sums of keys exact.
    auto coord = [&] { return std::round(r.uniform(-2.0, 2.0) * 64.0) / 64.0; };
    auto point = [&] {
        vec F(2 * n);
        for (int i = 0; i < 2 * n; ++i) F[i] = coord();
        return F;
    };
    auto coeff = [&] { return cplx(r.uniform(-1.0, 1.0), r.uniform(-1.0, 1.0)) / std::sqrt(2.0); };
    auto element = [&](double hbar, int max_terms) {
        const int m = 1 + r.index(max_terms);
        std::vector<term> ts;
        for (int i = 0; i < m; ++i) ts.push_back({coeff(), point()});
        return weyl_element::from_terms(hbar, 2 * n, ts);
    };
    auto add = [&](const std::string& prop, const std::string& h, long count, double worst, double tol,
                   bool lower_bound = false) {
        const bool ok = lower_bound ? worst >= -tol : worst <= tol;
        rep.add(row_of(rep.columns, {prop, h, count, worst, tol, ok}));
    };

    const long samples = 200;
    const double exact = 1e-14;
    double gen = 0, assoc = 0, invol = 0, anti = 0, antilin = 0, unit = 0, distrib = 0, inverse = 0;
    for (long i = 0; i < samples; ++i) {
        const double h = hbars[static_cast<std::size_t>(i) % hbars.size()];
        const vec F = point(), G = point();
        const auto WF = weyl_element::generator(h, F), WG = weyl_element::generator(h, G);
        const auto rel = std::polar(1.0, -h / 2.0 * sigma(s, F, G)) * weyl_element::generator(h, F + G);
        gen = std::max(gen, max_coeff_diff(weyl_mul(s, WF, WG), rel));
        inverse = std::max(inverse, max_coeff_diff(weyl_mul(s, WF, weyl_element::generator(h, vec(-F))),
                                                   weyl_element::identity(h, 2 * n)));
        const auto A = element(h, 3), B = element(h, 3), C = element(h, 3);
        assoc = std::max(assoc, max_coeff_diff(weyl_mul(s, weyl_mul(s, A, B), C), weyl_mul(s, A, weyl_mul(s, B, C))));
        invol = std::max(invol, max_coeff_diff(weyl_adjoint(weyl_adjoint(A)), A));
        anti = std::max(anti, max_coeff_diff(weyl_adjoint(weyl_mul(s, A, B)),
                                             weyl_mul(s, weyl_adjoint(B), weyl_adjoint(A))));
        const cplx z = coeff();
        antilin = std::max(antilin, max_coeff_diff(weyl_adjoint(z * A), std::conj(z) * weyl_adjoint(A)));
        const auto one = weyl_element::identity(h, 2 * n);
        unit = std::max({unit, max_coeff_diff(weyl_mul(s, A, one), A), max_coeff_diff(weyl_mul(s, one, A), A)});
        distrib = std::max(distrib, max_coeff_diff(weyl_mul(s, A, B + C), weyl_mul(s, A, B) + weyl_mul(s, A, C)));
    }
    add("generator_relation", "all", samples, gen, exact);
    add("inverse", "all", samples, inverse, exact);
    add("associativity", "all", samples, assoc, exact);
    add("adjoint_involution", "all", samples, invol, exact);
    add("adjoint_antimultiplicative", "all", samples, anti, exact);
    add("adjoint_antilinear", "all", samples, antilin, exact);
    add("unit", "all", samples, unit, exact);
    add("distributivity", "all", samples, distrib, exact);

    std::vector<vec> probes;
    for (int i = 0; i < 100; ++i) probes.push_back(r.normal_vector(2 * n));
    const auto sr = check_structure(s, J, probes);
    add("structure_sigma_invariance", "all", 100, sr.sigma_invariance, 1e-10);
    add("structure_positivity", "all", 100, sr.min_positivity, 1e-10, true);
    add("structure_square", "all", 100, sr.square_defect, 1e-10);

    // Positivity of Q^J(A*A): Gram certificate and the represented matrix.
    const auto g = rep::grid::make(cfg.points.value_or(n == 1 ? 256 : 32), cfg.extent.value_or(10.0), n);
    const int positivity_samples = 100;
    for (double h : hbars) {
        double worst_cert = INFINITY, worst_rep = INFINITY, worst_margin = INFINITY;
        for (int i = 0; i < positivity_samples; ++i) {
            weyl_element A = element(0.0, 5);
            const auto cert = positivity_certificate(s, A, h, J);
            worst_cert = std::min(worst_cert, cert.min_eigenvalue);
            worst_margin = std::min(worst_margin, cert.min_eigenvalue + cert.tolerance);
            const auto Q = quantize(s, weyl_mul(s, weyl_adjoint(A), A), h, scheme::positive(J));
            const rep::cmat M = limit::represent_element(g, Q);
            const rep::cmat H = 0.5 * (M + M.adjoint());
            Eigen::SelfAdjointEigenSolver<rep::cmat> es(H, Eigen::EigenvaluesOnly);
            worst_rep = std::min(worst_rep, es.eigenvalues().minCoeff());
        }
        const std::string hs = fmt(h);
        rep.add(row_of(rep.columns, {"positivity_certificate", hs, positivity_samples, worst_cert,
                                     "-1e-10*dim", worst_margin >= 0.0}));
        add("positivity_represented", hs, positivity_samples, worst_rep, 1e-6, true);
    }
    return rep;
}

// --------------------------------------------------------------- limit-scan

struct named_pair {
    std::string name;
    limit::pair_spec spec;
};

inline limit::kind parse_kind(const std::string& t) {
    if (t == "weyl") return limit::kind::weyl_gen;
    if (t == "field") return limit::kind::field;
    if (t == "annihilator") return limit::kind::annihilator;
    if (t == "creator") return limit::kind::creator;
    if (t == "number") return limit::kind::number;
    throw error(errc::invalid_config, "unknown quantity '" + t + "'");
}

inline std::string kind_token(limit::kind k) {
    switch (k) {
    case limit::kind::weyl_gen: return "weyl";
    case limit::kind::field: return "field";
    case limit::kind::annihilator: return "annihilator";
    case limit::kind::creator: return "creator";
    case limit::kind::number: return "number";
    }
    return "?";
}

inline limit::condition parse_condition(const std::string& t) {
    if (t == "dirac") return limit::condition::dirac;
    if (t == "vn") return limit::condition::von_neumann;
    throw error(errc::invalid_config, "unknown condition '" + t + "' (dirac or vn)");
}

inline std::string pair_name(limit::kind a, limit::kind b, limit::condition c) {
    return kind_token(a) + "-" + kind_token(b) + ":" + (c == limit::condition::dirac ? "dirac" : "vn");
}

inline limit::quantity make_quantity(limit::kind k, const vec& F, const algebra::complex_structure& J0) {
    switch (k) {
    case limit::kind::weyl_gen: return limit::quantity::weyl(F);
    case limit::kind::field: return limit::quantity::field(F);
    case limit::kind::annihilator: return limit::quantity::annihilator(F, J0);
    case limit::kind::creator: return limit::quantity::creator(F, J0);
    case limit::kind::number: return limit::quantity::number(F, J0);
    }
    throw error(errc::invalid_config, "unknown quantity");
}

inline std::vector<std::array<int, 3>> all_supported_pairs() {
    const std::array<limit::kind, 5> kinds{limit::kind::weyl_gen, limit::kind::field, limit::kind::annihilator,
                                          limit::kind::creator, limit::kind::number};
    std::vector<std::array<int, 3>> out;
    for (auto a : kinds)
        for (auto b : kinds)
            for (auto c : {limit::condition::dirac, limit::condition::von_neumann})
                if (limit::supported(a, b, c))
                    out.push_back({static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)});
    return out;
}

// Pair list grammar: "basic", "all", or comma-separated kind-kind:cond.
inline std::vector<std::array<int, 3>> parse_pairs(const std::string& text) {
    using limit::condition;
    using limit::kind;
    if (text == "all") return all_supported_pairs();
    if (text == "basic")
        return {{static_cast<int>(kind::field), static_cast<int>(kind::weyl_gen), static_cast<int>(condition::dirac)},
                {static_cast<int>(kind::field), static_cast<int>(kind::weyl_gen),
                 static_cast<int>(condition::von_neumann)},
                {static_cast<int>(kind::field), static_cast<int>(kind::field), static_cast<int>(condition::dirac)},
                {static_cast<int>(kind::field), static_cast<int>(kind::field),
                 static_cast<int>(condition::von_neumann)}};
    std::vector<std::array<int, 3>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dash = item.find('-');
        const auto colon = item.find(':');
        if (dash == std::string::npos || colon == std::string::npos || colon < dash)
            throw error(errc::invalid_config, "pair '" + item + "' is not kind-kind:cond");
        const auto a = parse_kind(item.substr(0, dash));
        const auto b = parse_kind(item.substr(dash + 1, colon - dash - 1));
        const auto c = parse_condition(item.substr(colon + 1));
        if (!limit::supported(a, b, c)) throw error(errc::unsupported_pair, "pair '" + item + "' is not supported");
        out.push_back({static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)});
    }
    if (out.empty()) throw error(errc::invalid_config, "no pairs given");
    return out;
}

inline report cmd_limit_scan(const run_config& cfg) {
    report rep{"limit-scan",
               {"record", "pair_kind_1", "F_1", "pair_kind_2", "F_2", "condition", "hbar", "value", "slope", "pass"},
               {},
               {},
               true};
    const int n = cfg.dims.value_or(1);
    const std::vector<double> hbars =
        cfg.hbars.value_or(std::vector<double>{1e-1, std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3});
    const auto s = algebra::symplectic_space::standard(n);
    const auto J = algebra::standard_structure();
    rng r(cfg.seed);
    const vec F = r.normal_vector(2 * n);
    const vec G = r.normal_vector(2 * n);
    const double squeeze = r.uniform(0.5, 2.0);
    const auto J0 = algebra::squeezed_structure(squeeze);
    rep.notes.push_back("J standard; J0 squeezed by " + fmt(squeeze));

    const auto specs = parse_pairs(cfg.pairs);
    std::vector<limit::pair_spec> pairs;
    for (const auto& p : specs) {
        const auto a = static_cast<limit::kind>(p[0]);
        const auto b = static_cast<limit::kind>(p[1]);
        pairs.push_back({make_quantity(a, F, J0), make_quantity(b, G, J0), static_cast<limit::condition>(p[2])});
    }
    const auto table = limit::residual_scan(s, pairs, hbars, J);
    for (const auto& row : table.rows)
        rep.add(row_of(rep.columns, {"residual", limit::kind_name(row.first.k), coords(row.first.F),
                                     limit::kind_name(row.second.k), coords(row.second.F),
                                     limit::condition_name(row.cond), row.hbar, row.value, nullptr,
                                     row.value >= 0.0}));
    for (const auto& f : table.slopes) {
        const auto& p = pairs[f.pair_index];
        json slope = f.defined ? json(f.slope) : json("identically_zero");
        bool ok = f.defined ? (f.slope >= 0.95 && f.slope <= 1.05) : f.identically_zero;
        if (!f.defined && !f.identically_zero) slope = "undefined";
        rep.add(row_of(rep.columns, {"slope", limit::kind_name(p.first.k), coords(p.first.F),
                                     limit::kind_name(p.second.k), coords(p.second.F),
                                     limit::condition_name(p.cond), nullptr, nullptr, slope, ok}));
    }
    return rep;
}

// --------------------------------------------------------------- rep-verify

// Nonincreasing sequence, with values below the roundoff floor treated as equal.
inline bool monotone_to_floor(const std::vector<double>& v, double floor) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > std::max(v[i - 1], floor)) return false;
    return true;
}

inline constexpr double diagram_floor = 1e-12;
inline constexpr double diagram_threshold = 1e-4;

inline report cmd_rep_verify(const run_config& cfg) {
    report rep{"rep-verify", {"points", "hbar", "a", "b", "residual", "identity_residual", "p_nodes", "q_nodes", "pass"},
               {}, {}, true};
    const int finest = cfg.points.value_or(512);
    const double L = cfg.extent.value_or(10.0);
    if (cfg.dims && *cfg.dims != 1) throw error(errc::invalid_config, "rep-verify is one-dimensional");
    if (finest % 8 != 0) throw error(errc::invalid_config, "--n must be a multiple of 8 (levels n/4, n/2, n)");
    const double hbar = cfg.hbars ? cfg.hbars->front() : 1.0;
    if (cfg.hbars && cfg.hbars->size() > 1) rep.notes.push_back("only the first hbar is used");
    const auto mode = cfg.strict ? rep::shift_mode::strict : rep::shift_mode::spectral;
    std::vector<double> res;
    for (int N : {finest / 4, finest / 2, finest}) {
        const auto g = rep::grid::make(N, L, 1);
        const auto d = rep::diagram_residual(g, hbar, cfg.a, cfg.b, 8, 1e-6, mode);
        res.push_back(d.residual);
        rep.rows.push_back(row_of(rep.columns, {N, hbar, cfg.a, cfg.b, d.residual, d.identity_residual,
                                                d.quad.p_nodes, d.quad.q_nodes, nullptr}));
    }
    const bool mono = monotone_to_floor(res, diagram_floor);
    const bool small = res.back() < diagram_threshold;
    for (auto& row : rep.rows) row["pass"] = mono && small;
    rep.passed = mono && small;
    rep.notes.push_back("pass iff residuals are nonincreasing down to " + fmt(diagram_floor) +
                        " and the finest is below " + fmt(diagram_threshold));
    return rep;
}

// --------------------------------------------------------------- field-energy

inline field::family parse_family(const std::string& f) {
    if (f == "kg-minkowski") return field::family::minkowski;
    if (f == "kg-rindler") return field::family::rindler;
    if (f == "maxwell") return field::family::maxwell;
    throw error(errc::invalid_config, "unknown family '" + f + "'");
}

inline constexpr double identity_tolerance = 1e-8;

inline field::field_model model_for(const run_config& cfg, field::family fam) {
    switch (fam) {
    case field::family::minkowski:
        return field::minkowski(
            field::field_grid::torus(cfg.dims.value_or(1), cfg.points.value_or(256), cfg.extent.value_or(20.0)),
            cfg.mass);
    case field::family::rindler:
        if (cfg.dims && *cfg.dims != 1) throw error(errc::geometry_mismatch, "kg-rindler is a half-line model");
        return field::rindler(field::field_grid::half_line(cfg.points.value_or(200), cfg.extent.value_or(10.0)),
                              cfg.mass, cfg.kperp);
    case field::family::maxwell:
        if (cfg.dims && *cfg.dims != 3) throw error(errc::geometry_mismatch, "maxwell needs --dim 3");
        return field::maxwell(
            field::field_grid::torus(3, cfg.points.value_or(32), cfg.extent.value_or(2.0 * M_PI)));
    }
    throw error(errc::invalid_config, "unknown family");
}

// Explicit alpha_J bases are built when the pair space is small enough.
inline bool explicit_alpha_feasible(const field::field_model& fm) { return fm.length() <= 2048; }

inline report cmd_field_energy(const run_config& cfg) {
    report rep{"field-energy",
               {"family", "state", "identity", "basis", "basis_sum", "closed_form", "rel_error", "tolerance", "pass"},
               {},
               {},
               true};
    const auto fam = parse_family(cfg.family);
    std::vector<field::field_state> states;
    field::field_model fm;
    if (!cfg.state_in.empty()) {
        const auto stored = field::load_state(cfg.state_in);
        const auto& sg = stored.state.grid;
        if (fam == field::family::rindler && sg.geo != field::geometry::half_line)
            throw error(errc::geometry_mismatch, "kg-rindler needs a half-line state");
        if (fam != field::family::rindler && sg.geo != field::geometry::torus)
            throw error(errc::geometry_mismatch, std::string(field::family_name(fam)) + " needs a torus state");
        switch (fam) {
        case field::family::minkowski: fm = field::minkowski(sg, stored.mass); break;
        case field::family::rindler: fm = field::rindler(sg, stored.mass, cfg.kperp); break;
        case field::family::maxwell: fm = field::maxwell(sg); break;
        }
        auto st = stored.state;
        field::require_state(fm, st);
        if (fam == field::family::maxwell) {
            const vec E = field::restrict_transverse(fm.grid, st.pi);
            const vec A = field::restrict_transverse(fm.grid, st.phi);
            const double change = std::max((E - st.pi).norm() / std::max(st.pi.norm(), 1e-300),
                                           (A - st.phi).norm() / std::max(st.phi.norm(), 1e-300));
            if (change > 1e-12)
                rep.notes.push_back("input state projected onto mean-zero divergence-free fields (relative change " +
                                    fmt(change) + ")");
            st.pi = E;
            st.phi = A;
        }
        states.push_back(st);
    } else {
        fm = model_for(cfg, fam);
        rng r(cfg.seed);
        const int count = cfg.states.value_or(fam == field::family::maxwell ? 2 : 20);
        for (int i = 0; i < count; ++i) states.push_back(field::random_state(fm, r));
    }
    if (!cfg.state_out.empty()) field::save_state(cfg.state_out, states.front(), fm.mass);

    const auto l2 = field::seed_basis(fm);
    std::optional<field::alpha_basis> a1, a2;
    if (explicit_alpha_feasible(fm)) {
        a1 = field::fourier_alpha_basis(fm);
        a2 = field::point_alpha_basis(fm);
    } else {
        rep.notes.push_back("pair space too large for explicit Gram-Schmidt; total number summed over the "
                            "spectral family (mu^{-1/2} e_k, 0)");
    }
    auto add = [&](int idx, const std::string& identity, const std::string& basis, double sum, double closed) {
        field::identity_value v{sum, closed, 0.0};
        rep.add(row_of(rep.columns, {field::family_name(fam), idx, identity, basis, sum, closed, v.rel_error(),
                                     identity_tolerance, v.rel_error() <= identity_tolerance}));
    };
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& st = states[i];
        const int idx = static_cast<int>(i);
        const double closed_n = field::closed_form_total_number(fm, st);
        if (a1) {
            const double n1 = field::total_number(fm, *a1, st);
            const double n2 = field::total_number(fm, *a2, st);
            add(idx, "total_number", a1->name, n1, closed_n);
            add(idx, "total_number", a2->name, n2, closed_n);
            add(idx, "basis_independence", a1->name + "/" + a2->name, n1, n2);
        } else {
            add(idx, "total_number", "spectral", field::total_number_spectral(fm, st), closed_n);
        }
        add(idx, "hamiltonian", l2.name, field::hamiltonian(fm, l2, st), field::closed_form_hamiltonian(fm, st));
        if (fm.components() == 1 && fm.length() <= 4096) {
            add(idx, "hamiltonian", "point", field::hamiltonian(fm, field::point_basis(fm), st),
                field::closed_form_hamiltonian(fm, st));
        }
    }
    return rep;
}

// --------------------------------------------------------------- rendering

inline std::string cell_text(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_float()) return fmt(v.get<double>());
    return v.dump();
}

inline json config_echo(const run_config& c) {
    json j = json::object();
    j["command"] = c.command;
    j["n"] = c.points ? json(*c.points) : json(nullptr);
    j["extent"] = c.extent ? json(*c.extent) : json(nullptr);
    j["dim"] = c.dims ? json(*c.dims) : json(nullptr);
    j["mass"] = c.mass;
    j["hbars"] = c.hbars ? json(*c.hbars) : json(nullptr);
    j["seed"] = c.seed;
    j["format"] = c.format;
    if (c.command == "limit-scan") j["pairs"] = c.pairs;
    if (c.command == "rep-verify") {
        j["a"] = c.a;
        j["b"] = c.b;
        j["strict"] = c.strict;
    }
    if (c.command == "field-energy") {
        j["family"] = c.family;
        j["kperp"] = {c.kperp[0], c.kperp[1]};
        j["states"] = c.states ? json(*c.states) : json(nullptr);
        j["state_in"] = c.state_in;
    }
    return j;
}

inline std::string render(const report& r, const run_config& cfg) {
    if (cfg.format == "json") {
        json doc = json::object();
        doc["meta"] = json::object();
        doc["meta"]["schema"] = "qlimit/" + r.command + "/v" + std::to_string(schema_version);
        doc["meta"]["version"] = version;
        doc["meta"]["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                               "." + std::to_string(EIGEN_MINOR_VERSION);
        doc["meta"]["config"] = config_echo(cfg);
        doc["meta"]["notes"] = r.notes;
        doc["meta"]["passed"] = r.passed;
        doc["rows"] = r.rows;
        return doc.dump(2) + "\n";
    }
    std::string out = "# qlimit " + r.command + " schema v" + std::to_string(schema_version) + "\n";
    for (const auto& n : r.notes) out += "# note: " + n + "\n";
    for (std::size_t i = 0; i < r.columns.size(); ++i) out += (i ? "," : "") + r.columns[i];
    out += "\n";
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < r.columns.size(); ++i)
            out += (i ? "," : "") + cell_text(row.contains(r.columns[i]) ? row[r.columns[i]] : json(nullptr));
        out += "\n";
    }
    out += std::string("# passed: ") + (r.passed ? "true" : "false") + "\n";
    return out;
}

inline report run(const run_config& cfg) {
    validate(cfg);
    if (cfg.command == "algebra-check") return cmd_algebra_check(cfg);
    if (cfg.command == "limit-scan") return cmd_limit_scan(cfg);
    if (cfg.command == "rep-verify") return cmd_rep_verify(cfg);
    if (cfg.command == "field-energy") return cmd_field_energy(cfg);
    throw error(errc::invalid_config, "unknown command '" + cfg.command + "'");
}

} // namespace qlimit::harness

#endif
