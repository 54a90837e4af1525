#pragma once

#include <string>

#include "spiral/background.hpp"
#include "spiral/coeffs.hpp"

namespace spiral {

// Named closed-form perturbation. Tags:
//   zero
//   eps_sin_k, eps_cos_k        amplitude * sin(k x), amplitude * cos(k x)   (periodic theta)
//   eps_sin_pi_k, eps_cos_pi_k  amplitude * sin(k pi z), amplitude * cos(k pi z)   (slab z in [-1,1])
//   eps_poly3                   amplitude * (1 - z^2)^3
//   eps_bump_k                  amplitude * sin^2(pi s) * cos(k x), s the normalized radius
struct ClosedForm {
    std::string tag = "zero";
    double amplitude = 0;
    int k = 1;

    // x: theta or z; s in [0,1]: normalized radius (used by eps_bump_k only)
    double operator()(double x, double s = 0.5) const;
    // d^order / dx^order, order 0..2
    double derivative(double x, int order, double s = 0.5) const;
    bool depends_on_radius() const { return tag == "eps_bump_k"; }
};

bool known_tag(const std::string& tag);

// Perturbations of the annulus data; each is added to the background value.
struct AnnulusData {
    ClosedForm b, U1en, U2en, Een, Phiex, Ken, Sen;
};

AnnulusBoundary make_annulus_boundary(const BackgroundFlow& flow, int M, const AnnulusData& d);

// Size of the potential-flow data: C^2 of b - b0, C^3 of U1en - U1_0, C^4 of the rest.
double omega1(const BackgroundFlow& flow, const AnnulusBoundary& bd);
// C^4 size of (Ken - K0, Sen - S0).
double omega2(const BackgroundFlow& flow, const AnnulusBoundary& bd);

}  // namespace spiral
