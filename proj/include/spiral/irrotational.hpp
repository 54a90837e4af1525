#pragma once

#include <vector>

#include "spiral/background.hpp"
#include "spiral/coeffs.hpp"
#include "spiral/fields.hpp"
#include "spiral/linbvp.hpp"

namespace spiral {

struct IterationConfig {
    double delta = 100.0;  // radius of the iteration set, measured in H^4
    int max_iters = 50;
    double tol_fp = 1e-10;  // H^1 increment
    double relaxation = 1.0;
};

struct IterationRecord {
    double increment = 0;  // H^1 norm of the change in (psi, Psi)
    double h4_norm = 0;    // H^4 norm of the new iterate
    double mu0 = 0;        // ellipticity of the frozen coefficients
};

struct FlowResiduals {
    double continuity_max = 0, continuity_l2 = 0;
    double curl_max = 0, curl_l2 = 0;
    double poisson_max = 0, poisson_l2 = 0;
    double bernoulli_defect = 0;
};

struct IrrotationalSolution {
    AnnulusDisc disc;
    // perturbations, un-hatted: psi potential, Psi = Phi - Phi-bar
    AnnulusField psi, psi_r, Psi, Psi_r;
    double d0 = 0;
    // physical fields sampled on (radial node, theta sample)
    Eigen::MatrixXd V1, V2, U1, U2, Phi, rho;

    std::vector<IterationRecord> history;
    int iterations = 0;
    bool converged = false;
    double contraction_factor = 0;  // max ratio of successive increments
    double omega1 = 0;
    double c1_empirical = 0;        // H^4 norm of (psi, Psi) / omega1
    double norm_h1 = 0;             // H^1 norm of (V1, V2, Psi)
    double min_supersonic_margin = 0;  // min |u|^2 - c^2
    double min_U1 = 0;
    bool aliasing_risk = false;
    FlowResiduals residuals;
};

IrrotationalSolution solve_irrotational(const BackgroundFlow& flow, const AnnulusBoundary& bd,
                                        const AnnulusDisc& disc, const IterationConfig& cfg);

// Pointwise residuals of the continuity, curl and Poisson equations for the total fields,
// plus the Bernoulli defect against K0.
FlowResiduals flow_residuals(const BackgroundFlow& flow, const AnnulusBoundary& bd,
                             const Eigen::MatrixXd& U1, const Eigen::MatrixXd& U2,
                             const Eigen::MatrixXd& rho, const AnnulusField& Psi,
                             const AnnulusField& Psi_r, const Eigen::MatrixXd& K,
                             const Eigen::MatrixXd& S);

// H^1 norm of sampled fields via projection onto M modes
double sampled_h1(const Eigen::MatrixXd& v, int M, const RadialGrid& g);

}  // namespace spiral
