#pragma once

#include <vector>

namespace spiral {

struct BackgroundParams {
    double gamma = 3.0;
    double r0 = 2.0;
    double b0 = 0.25;
    double rho0 = 0.5;
    double U1_0 = 0.5;
    double U2_0 = 1.5;
    double S0 = 0.0;
    double E0 = 0.5;

    double J1() const { return r0 * rho0 * U1_0; }
    double J2() const { return r0 * U2_0; }
    double c2_0() const;
    double K0() const;
    // throws InvalidParams
    void validate() const;
};

BackgroundParams reference_params();

// Pointwise background state at a radius (all quantities, plus first derivatives).
struct BackgroundPoint {
    double r, rho, E, Phi, U1, U2, c2, P;
    double rho_p, U1_p, U2_p;
};

struct BackgroundFlow {
    BackgroundParams params;
    double r0 = 0, r1 = 0, h = 0;
    std::vector<double> r;
    std::vector<double> rho, E, U1, U2, P, Phi, c2, M1sq, M2sq;
    std::vector<double> rho_p, U1_p, U2_p;
    double J1 = 0, J2 = 0, K0 = 0;
    // max nodal difference against the h/2 run, divided by 15
    double richardson_error = 0;

    int n() const { return static_cast<int>(r.size()); }
    BackgroundPoint node(int i) const;
    // off-grid evaluation by a single classical step from the nearest node below
    BackgroundPoint at(double radius) const;
};

BackgroundFlow integrate_background(const BackgroundParams& p, double r1, int n_nodes,
                                    bool richardson = true);

// max over nodes of |1/2|U|^2 + gamma e^S rho^(gamma-1)/(gamma-1) - Phi - K0|
double bernoulli_defect(const BackgroundFlow& f);

// observed order from rho(r1) at n, 2n-1, 4n-3 nodes
double richardson_order(const BackgroundParams& p, double r1, int n_nodes);

struct AdmissibleRadius {
    double R = 0;
    bool flagged = false;  // true when not even r0 + tol is admissible
};

AdmissibleRadius admissible_outer_radius(const BackgroundParams& p, double r_max, double tol,
                                         int n_nodes = 256);

struct MachProfiles {
    std::vector<double> M1sq, M2sq;
    // max |FD derivative - closed-form right side| over interior nodes
    double ode_residual_M1 = 0, ode_residual_M2 = 0;
};

MachProfiles mach_profiles(const BackgroundFlow& f);

}  // namespace spiral
