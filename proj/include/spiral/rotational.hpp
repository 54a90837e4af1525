#pragma once

#include <vector>

#include "spiral/background.hpp"
#include "spiral/coeffs.hpp"
#include "spiral/fields.hpp"
#include "spiral/irrotational.hpp"

namespace spiral {

struct PoissonLift {
    AnnulusField phi;
    double residual_max = 0;  // of the discrete equations
};

// (d_rr + d_r / r + d_tt / r^2) phi = G, phi = 0 at r0 and r1; one tridiagonal solve per mode.
PoissonLift poisson_lift(const Eigen::MatrixXd& G_samples, int M, const RadialGrid& grid);

// Stream function L(r, t) = winding * t / (2 pi) + P(r, t), P periodic in t.
struct StreamFunction {
    RadialGrid grid;
    Eigen::MatrixXd periodic;  // P on (radial node, theta sample)
    double winding = 0;        // integral of r0 rho U1 over the entrance
    ThetaSeries entrance;      // P(r0, .)
    ThetaSeries flux;          // r0 rho U1 at the entrance, d/dt of L(r0, .)
    double min_entrance_flux = 0;

    double value(int i, int l, int ntheta) const;
    double at_entrance(double t) const;
    // monotone inverse of L(r0, .): bisection to 1e-13 then one Newton step
    double entrance_inverse(double value) const;
};

// rho, U1, U2 samples of the frozen total flow; M modes for the entrance series.
StreamFunction build_stream_function(const Eigen::MatrixXd& rho, const Eigen::MatrixXd& U1,
                                     const Eigen::MatrixXd& U2, int M, const RadialGrid& grid);

// N1 = Ken(L_r0^-1(L)) - K0, N2 likewise (samples)
void transport_boundary_data(const StreamFunction& L, const AnnulusBoundary& bd, double K0, double S0,
                             int ntheta, Eigen::MatrixXd& N1, Eigen::MatrixXd& N2);

struct VelocityState {
    AnnulusField W1, W2, W3, W3_r;
};

struct InnerResult {
    VelocityState W;
    int iterations = 0;
    bool converged = false;
    std::vector<double> increments;     // H^1 of (W1, W2, W3) changes
    double sigma_contraction = 0;       // max ratio of successive Sigma-norm increments
    double lift_residual = 0;
    double d0_tilde = 0;
};

struct RotationalConfig {
    IterationConfig inner;    // tol_fp is overwritten by 0.1 * outer_tol
    double outer_tol = 1e-9;  // H^1 of N increments
    int outer_max = 50;
    double delta_e = 100.0;  // H^4 radius for N
};

InnerResult inner_solve(const BackgroundFlow& flow, const RadialCoeffs& rc, const AnnulusBoundary& bd,
                        const AnnulusDisc& disc, const Eigen::MatrixXd& N1, const Eigen::MatrixXd& N2,
                        const VelocityState& guess, const IterationConfig& cfg);

struct RotationalResiduals {
    FlowResiduals flow;  // curl entry is the plain curl, reported only
    double vorticity_max = 0, vorticity_l2 = 0;
    double transport_K_max = 0, transport_S_max = 0;
};

struct DriftAudit {
    int seeds = 0;
    double max_drift_K = 0, max_drift_S = 0;
    double max_theta_mismatch = 0;  // periodicity of the transported fields (samples at 0 vs 2 pi)
};

struct RotationalState {
    AnnulusDisc disc;
    VelocityState W;
    Eigen::MatrixXd N1, N2;
    StreamFunction L;
    double delta_v = 0, delta_e = 0;  // measured H^3/H^4 and H^4 sizes
    double sigma_p = 0, omega1 = 0, omega2 = 0;

    int outer_iterations = 0;
    bool converged = false;
    std::vector<double> outer_increments;
    double outer_contraction = 0;
    double inner_contraction = 0;
    int inner_iterations_total = 0;

    Eigen::MatrixXd U1, U2, Phi, rho, K, S;
    double norm_W_h1 = 0, norm_N_h1 = 0;
    double min_supersonic_margin = 0, min_U1 = 0;
    RotationalResiduals residuals;
    DriftAudit drift;
};

RotationalState solve_rotational(const BackgroundFlow& flow, const AnnulusBoundary& bd,
                                 const AnnulusDisc& disc, const RotationalConfig& cfg,
                                 const Eigen::MatrixXd* N1_init = nullptr,
                                 const Eigen::MatrixXd* N2_init = nullptr);

// Integrates d theta / dr = U2 / (r U1) from `seeds` entrance points through the converged
// velocity and records the variation of K and S along each path.
DriftAudit streamline_drift(const BackgroundFlow& flow, const RotationalState& st,
                            const AnnulusBoundary& bd, int seeds = 16, int substeps = 8);

}  // namespace spiral
