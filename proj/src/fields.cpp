#include "spiral/fields.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <stdexcept>

namespace spiral {

namespace {
constexpr double kPi = std::numbers::pi;

// apply a stencil (offsets relative to the first point) to rows of v
void add_stencil_row(Eigen::MatrixXd& out, const Eigen::MatrixXd& v, int row, int first,
                     const std::vector<double>& w, double scale) {
    out.row(row).setZero();
    for (std::size_t s = 0; s < w.size(); ++s) out.row(row) += (w[s] * scale) * v.row(first + s);
}

std::vector<double> offsets(int first, int count, int at) {
    std::vector<double> xs(count);
    for (int s = 0; s < count; ++s) xs[s] = first + s - at;
    return xs;
}
}  // namespace

Eigen::VectorXd RadialGrid::nodes() const {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = r(i);
    return x;
}

std::vector<double> fd_weights(double x0, const std::vector<double>& xs, int order) {
    const int n = static_cast<int>(xs.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
    double c1 = 1.0, c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][order];
    return w;
}

Eigen::MatrixXd radial_derivative(const Eigen::MatrixXd& v, double h, int order) {
    const int n = static_cast<int>(v.rows());
    if (order > 2) return radial_derivative(radial_derivative(v, h, 2), h, order - 2);
    if (n < 6) throw std::invalid_argument("radial_derivative needs at least 6 nodes");
    Eigen::MatrixXd out(v.rows(), v.cols());
    const double scale = std::pow(h, -order);
    const int width = order == 1 ? 5 : 6;
    for (int i = 0; i < n; ++i) {
        int first;
        int count = 5;
        if (i >= 2 && i <= n - 3) {
            first = i - 2;
        } else {
            count = width;
            first = i < 2 ? 0 : n - count;
        }
        add_stencil_row(out, v, i, first, fd_weights(0.0, offsets(first, count, i), order), scale);
    }
    return out;
}

Eigen::MatrixXd radial_cumulative_integral(const Eigen::MatrixXd& v, double h) {
    const int n = static_cast<int>(v.rows());
    if (n < 4) throw std::invalid_argument("cumulative integral needs at least 4 nodes");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(v.rows(), v.cols());
    for (int i = 0; i + 1 < n; ++i) {
        Eigen::RowVectorXd piece;
        if (i == 0)
            piece = (9 * v.row(0) + 19 * v.row(1) - 5 * v.row(2) + v.row(3)) * (h / 24);
        else if (i == n - 2)
            piece = (v.row(n - 4) - 5 * v.row(n - 3) + 19 * v.row(n - 2) + 9 * v.row(n - 1)) * (h / 24);
        else
            piece = (-v.row(i - 1) + 13 * v.row(i) + 13 * v.row(i + 1) - v.row(i + 2)) * (h / 24);
        out.row(i + 1) = out.row(i) + piece;
    }
    return out;
}

Eigen::VectorXd trapezoid_weights(int n, double h) {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, h);
    w[0] = w[n - 1] = h / 2;
    return w;
}

namespace basis {

double value(int j, double t) {
    if (j == 0) return 1.0 / std::sqrt(2 * kPi);
    const int k = wavenumber(j);
    return (j % 2 == 1 ? std::sin(k * t) : std::cos(k * t)) / std::sqrt(kPi);
}

double derivative(int j, double t) {
    if (j == 0) return 0.0;
    const int k = wavenumber(j);
    return (j % 2 == 1 ? k * std::cos(k * t) : -k * std::sin(k * t)) / std::sqrt(kPi);
}

Eigen::VectorXd thetas(int ntheta) {
    Eigen::VectorXd t(ntheta);
    for (int l = 0; l < ntheta; ++l) t[l] = 2 * kPi * l / ntheta;
    return t;
}

Eigen::MatrixXd matrix(int M, int ntheta) {
    const Eigen::VectorXd t = thetas(ntheta);
    Eigen::MatrixXd B(size(M), ntheta);
    for (int j = 0; j < size(M); ++j)
        for (int l = 0; l < ntheta; ++l) B(j, l) = value(j, t[l]);
    return B;
}

Eigen::MatrixXd theta_derivative_matrix(int M, int times) {
    const int nb = size(M);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(nb, nb);
    // (d/dt) sin k = k cos k ; (d/dt) cos k = -k sin k ; c'_out = c_in * P
    for (int k = 1; k <= M; ++k) {
        P(2 * k - 1, 2 * k) = k;
        P(2 * k, 2 * k - 1) = -k;
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Identity(nb, nb);
    for (int s = 0; s < times; ++s) out = out * P;
    return out;
}

}  // namespace basis

Eigen::MatrixXd theta_derivative_samples(const Eigen::MatrixXd& samples) {
    const int nt = static_cast<int>(samples.cols());
    // the Nyquist mode of an even sample count is dropped
    const int Mr = nt % 2 == 0 ? nt / 2 - 1 : (nt - 1) / 2;
    const Eigen::MatrixXd B = basis::matrix(Mr, nt);
    const Eigen::MatrixXd c = samples * B.transpose() * (2 * kPi / nt);
    return c * basis::theta_derivative_matrix(Mr, 1) * B;
}

ThetaSeries ThetaSeries::from_samples(const Eigen::VectorXd& samples, int M) {
    const int nt = static_cast<int>(samples.size());
    ThetaSeries s(M);
    s.c = basis::matrix(M, nt) * samples * (2 * kPi / nt);
    return s;
}

double ThetaSeries::operator()(double t) const {
    double v = 0;
    for (int j = 0; j < c.size(); ++j) v += c[j] * basis::value(j, t);
    return v;
}

double ThetaSeries::mean() const { return c[0] / std::sqrt(2 * kPi); }

ThetaSeries ThetaSeries::derivative() const {
    ThetaSeries d(M);
    d.c = (c.transpose() * basis::theta_derivative_matrix(M)).transpose();
    return d;
}

ThetaSeries ThetaSeries::antiderivative() const {
    ThetaSeries a(M);
    // sin k -> -cos k / k ; cos k -> sin k / k
    for (int k = 1; k <= M; ++k) {
        a.c[2 * k] = -c[2 * k - 1] / k;
        a.c[2 * k - 1] = c[2 * k] / k;
    }
    a.c[0] = -(a(0.0) - a.c[0] * basis::value(0, 0.0)) / basis::value(0, 0.0);
    return a;
}

Eigen::VectorXd ThetaSeries::samples(int ntheta) const {
    return (c.transpose() * basis::matrix(M, ntheta)).transpose();
}

Eigen::MatrixXd AnnulusField::synthesize(int ntheta) const { return c * basis::matrix(M, ntheta); }

double AnnulusField::value(int i, double t) const {
    double v = 0;
    for (int j = 0; j < c.cols(); ++j) v += c(i, j) * basis::value(j, t);
    return v;
}

AnnulusField AnnulusField::dr() const {
    AnnulusField o(M, grid);
    o.c = radial_derivative(c, grid.h(), 1);
    return o;
}

AnnulusField AnnulusField::drr() const {
    AnnulusField o(M, grid);
    o.c = radial_derivative(c, grid.h(), 2);
    return o;
}

AnnulusField AnnulusField::dth() const {
    AnnulusField o(M, grid);
    o.c = c * basis::theta_derivative_matrix(M, 1);
    return o;
}

AnnulusField AnnulusField::dthth() const {
    AnnulusField o(M, grid);
    o.c = c * basis::theta_derivative_matrix(M, 2);
    return o;
}

AnnulusField AnnulusField::drth() const { return dth().dr(); }

AnnulusField& AnnulusField::operator+=(const AnnulusField& o) {
    c += o.c;
    return *this;
}
AnnulusField& AnnulusField::operator-=(const AnnulusField& o) {
    c -= o.c;
    return *this;
}
AnnulusField& AnnulusField::operator*=(double s) {
    c *= s;
    return *this;
}
AnnulusField operator+(AnnulusField a, const AnnulusField& b) { return a += b; }
AnnulusField operator-(AnnulusField a, const AnnulusField& b) { return a -= b; }
AnnulusField operator*(double s, AnnulusField a) { return a *= s; }

Analysis analyze(const Eigen::MatrixXd& samples, int M, const RadialGrid& g) {
    const int nt = static_cast<int>(samples.cols());
    if (nt < 2 * basis::size(M))
        throw std::invalid_argument("analyze: need at least 2(2M+1) theta samples");
    Analysis a;
    a.field = AnnulusField(M, g);
    a.field.c = samples * basis::matrix(M, nt).transpose() * (2 * kPi / nt);
    if (M >= 1) {
        const double total = a.field.c.squaredNorm();
        const double top = a.field.c.col(2 * M - 1).squaredNorm() + a.field.c.col(2 * M).squaredNorm();
        a.top_mode_fraction = total > 0 ? top / total : 0.0;
        a.aliasing_risk = a.top_mode_fraction > 0.01;
    }
    return a;
}

double interpolate(const AnnulusField& f, double r, double theta) {
    const RadialGrid& g = f.grid;
    const double x = (r - g.r0) / g.h();
    const int i0 = std::clamp(static_cast<int>(std::floor(x)) - 1, 0, std::max(g.n - 4, 0));
    const int m = std::min(4, g.n);
    Eigen::VectorXd b(f.n_basis());
    for (int j = 0; j < f.n_basis(); ++j) b[j] = basis::value(j, theta);
    double v = 0;
    for (int a = 0; a < m; ++a) {
        double w = 1;
        for (int c = 0; c < m; ++c)
            if (c != a) w *= (x - (i0 + c)) / static_cast<double>(a - c);
        v += w * f.c.row(i0 + a).dot(b);
    }
    return v;
}

double h_norm(const AnnulusField& f, int k) {
    if (k < 0 || k > 4) throw std::invalid_argument("h_norm: order must be in 0..4");
    const Eigen::VectorXd w = trapezoid_weights(f.grid.n, f.grid.h());
    double sum = 0;
    Eigen::MatrixXd dr = f.c;
    for (int a = 0; a <= k; ++a) {
        if (a > 0) dr = radial_derivative(dr, f.grid.h(), 1);
        Eigen::MatrixXd d = dr;
        for (int b = 0; a + b <= k; ++b) {
            if (b > 0) d = d * basis::theta_derivative_matrix(f.M, 1);
            sum += w.dot(d.rowwise().squaredNorm());
        }
    }
    return std::sqrt(sum);
}

double h_norm(const RectField& f, int k) {
    if (k < 0 || k > 4) throw std::invalid_argument("h_norm: order must be in 0..4");
    const int nr = static_cast<int>(f.r.size()), nz = static_cast<int>(f.z.size());
    const double hr = (f.r[nr - 1] - f.r[0]) / (nr - 1), hz = (f.z[nz - 1] - f.z[0]) / (nz - 1);
    const Eigen::VectorXd wr = trapezoid_weights(nr, hr), wz = trapezoid_weights(nz, hz);
    double sum = 0;
    Eigen::MatrixXd dr = f.v;
    for (int a = 0; a <= k; ++a) {
        if (a > 0) dr = radial_derivative(dr, hr, 1);
        Eigen::MatrixXd d = dr;
        for (int b = 0; a + b <= k; ++b) {
            if (b > 0) d = radial_derivative(d.transpose(), hz, 1).transpose();
            sum += wr.dot(d.cwiseAbs2() * wz);
        }
    }
    return std::sqrt(sum);
}

void write_csv(const std::string& path, const std::string& name, const std::string& run_id,
               const AnnulusField& f, int ntheta) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << std::setprecision(17);
    os << "# field=" << name << " run=" << run_id << "\n";
    os << "r,theta,value\n";
    const Eigen::MatrixXd s = f.synthesize(ntheta);
    const Eigen::VectorXd t = basis::thetas(ntheta);
    for (int i = 0; i < f.grid.n; ++i)
        for (int l = 0; l < ntheta; ++l) os << f.grid.r(i) << ',' << t[l] << ',' << s(i, l) << '\n';
}

void write_csv(const std::string& path, const std::string& name, const std::string& run_id,
               const RectField& f) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << std::setprecision(17);
    os << "# field=" << name << " run=" << run_id << "\n";
    os << "r,z,value\n";
    for (int i = 0; i < f.r.size(); ++i)
        for (int j = 0; j < f.z.size(); ++j) os << f.r[i] << ',' << f.z[j] << ',' << f.v(i, j) << '\n';
}

}  // namespace spiral
