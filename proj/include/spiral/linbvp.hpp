#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "spiral/background.hpp"
#include "spiral/coeffs.hpp"
#include "spiral/fields.hpp"

namespace spiral {

// Coefficients of
//   L1 = psi_rr - A22 psi_tt + 2 A12 psi_rt + a1 psi_r + a2 psi_t + b1 Psi_r + b2 Psi_t + b3 Psi
//   L2 = Psi_rr + Psi_r / r + Psi_tt / r^2 + a3 psi_r + a4 psi_t - b4 Psi
// A12, A22, a2 are sampled fields (nodes x theta samples); the rest are radial.
struct LinearCoefficients {
    RadialGrid grid;
    Eigen::MatrixXd A12, A22, a2;
    Eigen::VectorXd a1, b1, b2, b3, a3, a4, b4;

    int ntheta() const { return static_cast<int>(A22.cols()); }
};

LinearCoefficients barred_coefficients(const BackgroundFlow& flow, const RadialCoeffs& rc,
                                       int ntheta);
LinearCoefficients frozen_coefficients(const BackgroundFlow& flow, const RadialCoeffs& rc,
                                       const FrozenCoeffs& fc);

// psi(r0) = psi0, psi_r(r0) = dpsi0, Psi_r(r0) = dPsi0, Psi(r1) = Psi1
struct LinearBC {
    ThetaSeries psi0, dpsi0, dPsi0, Psi1;
    static LinearBC homogeneous(int m);
};

struct ModeSystem {
    int m = 0;
    RadialGrid grid;
    // per radial node, each (2m+1) x (2m+1); entry (k, j) couples unknown mode j into equation k
    std::array<std::vector<Eigen::MatrixXd>, 7> S;
    Eigen::VectorXd b4;
    Eigen::MatrixXd F3k, F4k;  // nodes x modes
    Eigen::VectorXd psi0, dpsi0, dPsi0, Psi1;
    bool aliasing_risk = false;

    int n_modes() const { return 2 * m + 1; }
    int state_size() const { return 4 * n_modes(); }
};

// F3, F4: source samples (nodes x theta samples)
ModeSystem assemble(const LinearCoefficients& coef, const Eigen::MatrixXd& F3,
                    const Eigen::MatrixXd& F4, const LinearBC& bc, int m);

struct ResidualReport {
    double max_eq1 = 0, l2_eq1 = 0, max_eq2 = 0, l2_eq2 = 0;
};

struct LinearSolution {
    AnnulusField psi, psi_r, Psi, Psi_r;
    ResidualReport residual;
    std::array<double, 4> norm_psi{}, norm_Psi{};  // H1..H4
    double min_pivot_ratio = 0;
};

LinearSolution solve_modes(const ModeSystem& sys);

// Continuous-operator residuals of a solution (4th-order radial differences).
ResidualReport linear_residual(const LinearCoefficients& coef, const LinearSolution& sol,
                               const Eigen::MatrixXd& F3, const Eigen::MatrixXd& F4);

// assemble + solve + residual
LinearSolution solve_linear(const LinearCoefficients& coef, const Eigen::MatrixXd& F3,
                            const Eigen::MatrixXd& F4, const LinearBC& bc, int m,
                            bool with_report = true);

}  // namespace spiral
