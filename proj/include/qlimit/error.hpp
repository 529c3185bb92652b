#ifndef QLIMIT_ERROR_HPP
#define QLIMIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qlimit {

enum class errc {
    dimension_mismatch,
    hbar_mismatch,
    hbar_out_of_range,
    not_classical,
    multi_term,
    duplicate_key,
    incompatible_structure,
    fractional_shift,
    boundary_too_close,
    quadrature_not_converged,
    unsupported_pair,
    grid_mismatch,
    geometry_mismatch,
    non_orthonormal_basis,
    non_positive,
    bad_mass,
    invalid_config,
    io
};

inline const char* errc_name(errc c) {
    switch (c) {
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::hbar_mismatch: return "hbar_mismatch";
    case errc::hbar_out_of_range: return "hbar_out_of_range";
    case errc::not_classical: return "not_classical";
    case errc::multi_term: return "multi_term";
    case errc::duplicate_key: return "duplicate_key";
    case errc::incompatible_structure: return "incompatible_structure";
    case errc::fractional_shift: return "fractional_shift";
    case errc::boundary_too_close: return "boundary_too_close";
    case errc::quadrature_not_converged: return "quadrature_not_converged";
    case errc::unsupported_pair: return "unsupported_pair";
    case errc::grid_mismatch: return "grid_mismatch";
    case errc::geometry_mismatch: return "geometry_mismatch";
    case errc::non_orthonormal_basis: return "non_orthonormal_basis";
    case errc::non_positive: return "non_positive";
    case errc::bad_mass: return "bad_mass";
    case errc::invalid_config: return "invalid_config";
    case errc::io: return "io";
    }
    return "unknown";
}

class error : public std::runtime_error {
public:
    error(errc c, const std::string& what)
        : std::runtime_error(std::string(errc_name(c)) + ": " + what), code_(c) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace qlimit

#endif
