#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "spiral/background.hpp"
#include "spiral/boundary.hpp"
#include "spiral/fields.hpp"

namespace spiral {

// A function of z in [-1, 1] with its first two derivatives.
struct SlabFunction {
    std::function<double(double)> f, df, d2f;

    static SlabFunction zero();
    static SlabFunction from(const ClosedForm& c);
};

// Perturbations of the slab data from (U2_0, 0, K0, S0, 0, U1-bar(r1), Phi-bar(r1)) and b0.
struct AxiBoundary {
    SlabFunction U2en, U3en, Ken, Sen, Phien, U1ex, Phiex;
    std::function<double(double, double)> b;  // b(r, z) - b0
};

struct AxiData {
    ClosedForm b, U2en, U3en, Ken, Sen, Phien, U1ex, Phiex;
};

// eps_bump_k in b uses cos(k pi z); every other tag is read as a function of z
AxiBoundary make_axi_boundary(const BackgroundFlow& flow, const AxiData& d);

struct AxiSizes {
    double omega3 = 0, omega4 = 0, omega5 = 0;
    double sigma_v() const { return omega3 + omega4 + omega5; }
};

// C^0 size of b - b0 on the grid; C^2 sizes of the slab data (Hoelder parts dropped)
AxiSizes axi_sizes(const BackgroundFlow& flow, const AxiBoundary& bd, const Eigen::VectorXd& z);

// max over walls of the one-sided quantities that the compatibility conditions require to vanish
double boundary_compatibility_defect(const AxiBoundary& bd);

Eigen::VectorXd slab_nodes(int nz);

// Right sides of the linearized elliptic system; rows radial nodes, columns z nodes.
struct EllipticSources {
    Eigen::MatrixXd Y1, Y2, Y3, Y4;
};

struct EllipticResult {
    Eigen::MatrixXd T1, T3, T6;
    Eigen::MatrixXd psi1, psi, Psi;
    int cg_iterations = 0;
    double cg_relative_residual = 0;
};

// T1, T3, T6 from given sources and boundary data (the potential reduction with the
// curl lift psi1, solved through the Schur complement of the Psi block by PCG).
EllipticResult elliptic_solve(const BackgroundFlow& flow, const AxiBoundary& bd, const Eigen::VectorXd& z,
                              const EllipticSources& src);

struct CoercivityReport {
    double lambda_min = 0;           // min over both blocks of the Rayleigh quotient against the H^1 Gram
    double lambda_psi = 0, lambda_Psi = 0;
    double cross_term_defect = 0;    // |x^T (A - sym A) x| / x^T sym A x for a fixed random x
};

CoercivityReport coercivity(const BackgroundFlow& flow, const Eigen::VectorXd& z);

struct TransportResult {
    Eigen::MatrixXd T2, T4, T5;
    Eigen::MatrixXd foot;  // lambda(r0; r, z)
};

// Backward characteristics of the frozen velocity (T1hat, T3hat); throws TrajectoryExit.
TransportResult transport(const BackgroundFlow& flow, const AxiBoundary& bd, const Eigen::VectorXd& z,
                          const Eigen::MatrixXd& T1hat, const Eigen::MatrixXd& T3hat, double ode_tol,
                          int threads);

struct AxiConfig {
    int nz = 33;
    double delta = 1.0;  // iteration radius in the discrete C^1 proxy
    int max_iters = 30;
    double tol = 1e-10;
    double ode_tol = 1e-12;
    int threads = 0;
};

// max over interior nodes (central differences)
struct AxiResiduals {
    double continuity = 0, curl = 0, poisson = 0;
    double transport_rU2 = 0, transport_K = 0, transport_S = 0;
    double divergence_identity = 0;
};

struct AxiAudit {
    double wall_exact = 0;     // T3, Y2, Y3, feet and data derivatives on the walls
    double wall_fd = 0;        // one-sided differences of the normal derivatives, O(h^2)
    double drift_rU2 = 0, drift_K = 0, drift_S = 0;
};

struct AxiState {
    Eigen::VectorXd r, z;
    Eigen::MatrixXd T1, T2, T3, T4, T5, T6;
    AxiSizes sizes;
    int iterations = 0;
    bool converged = false;
    std::vector<double> increments;  // C^1 proxy of successive changes
    double contraction = 0;          // max ratio of successive increments
    double norm_c1 = 0;              // sum over the six fields
    double min_supersonic_margin = 0, min_U1 = 0;
    CoercivityReport coercive;
    AxiResiduals residuals;
    AxiAudit audit;
};

// max |f| + max |d_r f| + max |d_z f| (second-order differences)
double c1_proxy(const Eigen::MatrixXd& f, double hr, double hz);

EllipticSources axi_sources(const BackgroundFlow& flow, const AxiBoundary& bd, const Eigen::VectorXd& z,
                            const Eigen::MatrixXd& T1hat, const Eigen::MatrixXd& T3hat,
                            const Eigen::MatrixXd& T6hat, const TransportResult& tr);

AxiState solve_axisym(const BackgroundFlow& flow, const AxiBoundary& bd, const AxiConfig& cfg);

}  // namespace spiral
