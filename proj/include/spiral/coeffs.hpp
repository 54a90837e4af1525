#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "spiral/background.hpp"
#include "spiral/fields.hpp"

namespace spiral {

// c^2 = (gamma-1)(K + Phi - |u|^2/2); throws CavitationError when the bracket is <= 0
double sound_speed_sq(double K, double U1, double U2, double Phi, double gamma);
double density_from_bernoulli(double K, double S, double U1, double U2, double Phi, double gamma);

// Barred (background) coefficients per radial node.
struct RadialCoeffs {
    std::vector<double> r;
    std::vector<double> a1, a2, a2t, a3, a4, b1, b2, b3, b4, A12, A22;
    // alternative (Mach-number) forms
    std::vector<double> a1_alt, a2_alt, a2t_alt;
    // numerators (c^2 - U1^2) * a1 and (c^2 - U1^2) * a2
    std::vector<double> num_a1, num_a2;
    double dual_form_discrepancy = 0;
    // max |a2t - (a2 - U1 U2)| : the relation as printed, reported only
    double printed_relation_residual = 0;
    // max |a2t - (a2 + A12 / r)|
    double corrected_relation_residual = 0;
    // min over nodes of b4 - 1/(2 r^2)
    double theta_r1 = 0;

    int n() const { return static_cast<int>(r.size()); }
};

RadialCoeffs linear_coeffs(const BackgroundFlow& flow);

// Local background data at a radial node, bundled for the pointwise kernels.
struct LocalBackground {
    double gamma, r, U1, U2, U1p, U2p, c2, E, Phi, rho, K0, S0, b0;
    double a1, a2, a3, a4, b1, b2, b3, b4, num_a1, num_a2;
};

LocalBackground local_background(const BackgroundFlow& flow, const RadialCoeffs& rc, int i);

// Frozen nonlinear coefficients sampled on (radial node, theta sample).
struct FrozenCoeffs {
    Eigen::MatrixXd A12, A22;
    double mu0 = 0;          // min(min A22, 1/max A22)
    double min_A22 = 0, max_A22 = 0;
    double dev_A12 = 0, dev_A22 = 0;  // max deviation from the barred values
};

// V1, V2, Psi: iterate samples; N1 optional Bernoulli-function perturbation samples
FrozenCoeffs frozen_coeffs(const BackgroundFlow& flow, const RadialCoeffs& rc,
                           const Eigen::MatrixXd& V1, const Eigen::MatrixXd& V2,
                           const Eigen::MatrixXd& Psi, const Eigen::MatrixXd* N1 = nullptr);

// Pointwise nonlinear sources.
double source_F1(const LocalBackground& q, double d0, double V1, double V2, double Psi,
                 double Psi_r, double Psi_t);
double source_F2(const LocalBackground& q, double d0, double V1, double V2, double Psi,
                 double b_minus_b0);
double source_G1(const LocalBackground& q, double N1, double W1, double W2, double W3,
                 double W3_r, double W3_t);
double source_G2(const LocalBackground& q, double N1, double N2, double N1_r, double N2_r,
                 double W1, double W2, double W3);
double source_G3(const LocalBackground& q, double N1, double N2, double W1, double W2, double W3,
                 double b_minus_b0);

// Full (non-perturbative) form of the first-order potential-flow equation, i.e.
// (c^2-U1^2) dr U1 + (c^2-U2^2) dth U2 / r + c^2 U1 / r - U1 U2 (dr U2 + dth U1 / r)
//   + U1 dr Phi + U2 dth Phi / r, evaluated from total fields and their derivatives.
struct FullState {
    double r, K, U1, U2, Phi, U1_r, U1_t, U2_r, U2_t, Phi_r, Phi_t;
};
double full_velocity_equation(const FullState& s, double gamma);

// Entrance/exit data for the annulus problems (full values, not perturbations).
struct AnnulusBoundary {
    ThetaSeries U1en, U2en, Een, Phiex, Ken, Sen;
    std::function<double(double, double)> b;  // b(r, theta)
};

AnnulusBoundary unperturbed_boundary(const BackgroundFlow& flow, int M);

// Discretization of the annulus: background grid x M modes x ntheta samples.
struct AnnulusDisc {
    int M = 16;
    int ntheta = 0;  // 0 -> 4M + 4
    int samples() const { return ntheta > 0 ? ntheta : 4 * M + 4; }
};

struct SourceBundle {
    Eigen::MatrixXd F1, F2, F3, F4;  // samples
    ThetaSeries F5;                  // d_r psi-hat at r0
    ThetaSeries g_prime, e, p;      // lift data: psi = psi-hat + g, Psi = Psi-hat + (r-r1) e + p
    double d0 = 0;
};

// Irrotational sources at the iterate (V1, V2, Psi, dr Psi, dth Psi samples).
SourceBundle irrotational_sources(const BackgroundFlow& flow, const RadialCoeffs& rc,
                                  const FrozenCoeffs& fc, const AnnulusBoundary& bd,
                                  const AnnulusDisc& disc, const Eigen::MatrixXd& V1,
                                  const Eigen::MatrixXd& V2, const Eigen::MatrixXd& Psi,
                                  const Eigen::MatrixXd& Psi_r, const Eigen::MatrixXd& Psi_t);

double d0_of(const BackgroundFlow& flow, const AnnulusBoundary& bd);

}  // namespace spiral
