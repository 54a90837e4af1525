#pragma once

#include <string>
#include <vector>

#include "spiral/background.hpp"
#include "spiral/coeffs.hpp"

namespace spiral {

struct MultiplierOptions {
    double Q_max = 1e8;
    int substeps = 4;  // classical steps per grid interval
    std::vector<double> lambda_factors{1, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    std::vector<double> qend_factors{0.25, 0.5, 1, 2, 4};
};

struct MultiplierCertificate {
    std::vector<double> r, Q;
    // pointwise left sides of the two energy conditions, minimized over theta
    std::vector<double> margin_psi_r, margin_psi_t;
    double lambda0 = 0, Q_end = 0;
    double frak_a0 = 0, frak_a2 = 0, frak_a1 = 0, frak_a1_tilde = 0, frak_a1_hat = 0;
    double theta_r1 = 0, mu0 = 0, delta = 0;
    bool certified = false;
    double r1_certified = 0;
    double min_margin_psi_r = 0, min_margin_psi_t = 0;
    double forward_mismatch = 0;  // |Q(r1) from forward re-integration - Q_end| / Q_end
    int candidates_tried = 0;
    std::string diagnostics;
};

// Integrates -Q' = a2 Q^2 - 2 a1hat Q + a0 + lambda0 backward from r.back() with Q = Q_end.
// Throws BlowUp when Q leaves (0, Q_max].
std::vector<double> riccati_solve(const std::vector<double>& r, double a0, double a1hat, double a2,
                                  double lambda0, double Q_end, const MultiplierOptions& opt = {});

// frozen == nullptr uses the barred coefficients (A = A-bar).
MultiplierCertificate certify(const BackgroundFlow& flow, const RadialCoeffs& rc,
                              const FrozenCoeffs* frozen, double delta,
                              const MultiplierOptions& opt = {});

struct SoundnessCheck {
    double min_margin_psi_r = 0, min_margin_psi_t = 0;
    bool ok = false;
};

// Re-evaluates both conditions on a `factor`-times finer radial grid (background coefficients).
SoundnessCheck soundness_recheck(const BackgroundFlow& flow, const MultiplierCertificate& cert,
                                 int factor = 4, const MultiplierOptions& opt = {});

// Largest candidate r1 (scanned in increasing order, stopping at the first failure) for which
// some Q_end certifies the given absolute lambda0; returns r0 if none does.
double certified_radius(const BackgroundParams& p, double lambda0,
                        const std::vector<double>& r1_candidates, int n_nodes, double delta = 0,
                        const MultiplierOptions& opt = {});

}  // namespace spiral
