#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace spiral {

// Uniform radial grid r_i = r0 + i h, i = 0..n-1.
struct RadialGrid {
    double r0 = 0, r1 = 1;
    int n = 2;

    RadialGrid() = default;
    RadialGrid(double a, double b, int nodes) : r0(a), r1(b), n(nodes) {}
    double h() const { return (r1 - r0) / (n - 1); }
    double r(int i) const { return i == n - 1 ? r1 : r0 + i * h(); }
    Eigen::VectorXd nodes() const;
};

// Finite-difference weights for derivative `order` at x0 from stencil xs (Fornberg).
std::vector<double> fd_weights(double x0, const std::vector<double>& xs, int order);

// Column-wise 4th-order radial derivative of nodal data on a uniform grid:
// five-point centered in the interior, five/six-point one-sided near the ends.
Eigen::MatrixXd radial_derivative(const Eigen::MatrixXd& v, double h, int order = 1);

// Column-wise cumulative integral from the first row (4th-order, cubic interpolant).
Eigen::MatrixXd radial_cumulative_integral(const Eigen::MatrixXd& v, double h);

// Trapezoid weights for n uniform nodes with spacing h.
Eigen::VectorXd trapezoid_weights(int n, double h);

// Spectral theta-derivative of uniformly sampled periodic rows (all resolvable modes).
Eigen::MatrixXd theta_derivative_samples(const Eigen::MatrixXd& samples);

// Orthonormal trigonometric basis on [0, 2pi):
// beta_0 = 1/sqrt(2pi), beta_{2k-1} = sin(k t)/sqrt(pi), beta_{2k} = cos(k t)/sqrt(pi).
namespace basis {
inline int size(int M) { return 2 * M + 1; }
inline int wavenumber(int j) { return (j + 1) / 2; }
double value(int j, double t);
double derivative(int j, double t);
// rows j, columns theta samples
Eigen::MatrixXd matrix(int M, int ntheta);
Eigen::VectorXd thetas(int ntheta);
// coefficient map for d/dtheta applied `times` times: c' = c * P
Eigen::MatrixXd theta_derivative_matrix(int M, int times = 1);
}  // namespace basis

// A function of theta only, stored by its basis coefficients.
struct ThetaSeries {
    int M = 0;
    Eigen::VectorXd c;

    ThetaSeries() = default;
    explicit ThetaSeries(int modes) : M(modes), c(Eigen::VectorXd::Zero(basis::size(modes))) {}
    static ThetaSeries from_samples(const Eigen::VectorXd& samples, int M);

    double operator()(double t) const;
    double mean() const;  // (1/2pi) integral
    ThetaSeries derivative() const;
    // periodic antiderivative of the zero-mean part, zero at theta = 0
    ThetaSeries antiderivative() const;
    Eigen::VectorXd samples(int ntheta) const;
};

struct AnnulusField {
    int M = 0;
    RadialGrid grid;
    Eigen::MatrixXd c;  // rows: radial nodes, columns: basis index

    AnnulusField() = default;
    AnnulusField(int modes, const RadialGrid& g)
        : M(modes), grid(g), c(Eigen::MatrixXd::Zero(g.n, basis::size(modes))) {}

    int n_basis() const { return basis::size(M); }
    Eigen::MatrixXd synthesize(int ntheta) const;  // rows: radial nodes, columns: theta samples
    double value(int i, double t) const;

    AnnulusField dr() const;
    AnnulusField drr() const;
    AnnulusField dth() const;
    AnnulusField dthth() const;
    AnnulusField drth() const;

    AnnulusField& operator+=(const AnnulusField& o);
    AnnulusField& operator-=(const AnnulusField& o);
    AnnulusField& operator*=(double s);
};

// Off-grid value: spectral in theta, cubic Lagrange in r on the four nearest nodes.
double interpolate(const AnnulusField& f, double r, double theta);

AnnulusField operator+(AnnulusField a, const AnnulusField& b);
AnnulusField operator-(AnnulusField a, const AnnulusField& b);
AnnulusField operator*(double s, AnnulusField a);

struct Analysis {
    AnnulusField field;
    bool aliasing_risk = false;
    double top_mode_fraction = 0;
};

// samples: rows radial nodes, columns ntheta uniform theta samples
Analysis analyze(const Eigen::MatrixXd& samples, int M, const RadialGrid& g);

struct RectField {
    Eigen::VectorXd r, z;
    Eigen::MatrixXd v;  // rows r, columns z

    RectField() = default;
    RectField(const Eigen::VectorXd& rr, const Eigen::VectorXd& zz)
        : r(rr), z(zz), v(Eigen::MatrixXd::Zero(rr.size(), zz.size())) {}
};

double h_norm(const AnnulusField& f, int k);
double h_norm(const RectField& f, int k);

void write_csv(const std::string& path, const std::string& name, const std::string& run_id,
               const AnnulusField& f, int ntheta);
void write_csv(const std::string& path, const std::string& name, const std::string& run_id,
               const RectField& f);

}  // namespace spiral
