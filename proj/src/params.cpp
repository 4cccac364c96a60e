#include "eroopt/params.hpp"

#include <cmath>
#include <stdexcept>

namespace eroopt {

DimensionlessNumbers derive_dimensionless(const SIParams& si) {
    if (si.d_t <= 0 || si.r_b <= 0 || si.rho_f <= 0 || si.mu_f <= 0 ||
        si.u_mean <= 0 || si.rho_p <= 0 || si.d_p <= 0)
        throw std::runtime_error("derive_dimensionless: all SI inputs must be positive");

    DimensionlessNumbers d;
    d.l_ref = si.d_t;
    // A fully developed parabolic (Hagen-Poiseuille) inflow peaks at twice
    // its mean, so u_ref := 0.5 * max |u_in| equals the mean speed.
    d.u_ref = si.u_mean;
    d.re_derived = si.rho_f * d.u_ref * d.l_ref / si.mu_f;
    d.re = d.re_derived;
    if (si.nominal_re) {
        const double rel = std::abs(*si.nominal_re - d.re_derived) / *si.nominal_re;
        if (rel > 0.05)
            throw std::runtime_error(
                "derive_dimensionless: nominal Re inconsistent with SI data (>5%)");
        d.re = *si.nominal_re;
    }
    // Radius-based Froude number (u_ref / sqrt(g * d_t / 2)); this is the
    // convention the data sheet values satisfy.
    d.fr = d.u_ref / std::sqrt(si.gravity * 0.5 * d.l_ref);
    d.tau_p = si.rho_p * si.d_p * si.d_p / (18.0 * si.mu_f);
    d.stk = d.tau_p * d.u_ref / (0.5 * d.l_ref);
    d.r0 = 2.0 * si.r_b / si.d_t;
    d.de = d.re / std::sqrt(d.r0);
    d.drag_c = si.rho_f * si.d_p * d.u_ref / si.mu_f;
    return d;
}

} // namespace eroopt
