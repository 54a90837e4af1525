#include "spiral/axisym.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "spiral/coeffs.hpp"
#include "spiral/errors.hpp"
#include "spiral/parallel.hpp"

namespace spiral {

namespace {

constexpr double kPi = std::numbers::pi;
using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;
using Factor = Eigen::SimplicialLDLT<SpMat>;

// d/dr, second order: central inside, one-sided at the ends
Eigen::MatrixXd dr2(const Eigen::MatrixXd& f, double h) {
    const int n = static_cast<int>(f.rows());
    Eigen::MatrixXd d(f.rows(), f.cols());
    for (int i = 1; i < n - 1; ++i) d.row(i) = (f.row(i + 1) - f.row(i - 1)) / (2 * h);
    d.row(0) = (-3 * f.row(0) + 4 * f.row(1) - f.row(2)) / (2 * h);
    d.row(n - 1) = (3 * f.row(n - 1) - 4 * f.row(n - 2) + f.row(n - 3)) / (2 * h);
    return d;
}

Eigen::MatrixXd drr2(const Eigen::MatrixXd& f, double h) {
    const int n = static_cast<int>(f.rows());
    Eigen::MatrixXd d(f.rows(), f.cols());
    for (int i = 1; i < n - 1; ++i) d.row(i) = (f.row(i + 1) - 2 * f.row(i) + f.row(i - 1)) / (h * h);
    d.row(0) = (2 * f.row(0) - 5 * f.row(1) + 4 * f.row(2) - f.row(3)) / (h * h);
    d.row(n - 1) = (2 * f.row(n - 1) - 5 * f.row(n - 2) + 4 * f.row(n - 3) - f.row(n - 4)) / (h * h);
    return d;
}

Eigen::MatrixXd dz2(const Eigen::MatrixXd& f, double h) { return dr2(f.transpose(), h).transpose(); }
Eigen::MatrixXd dzz2(const Eigen::MatrixXd& f, double h) { return drr2(f.transpose(), h).transpose(); }

// d/dz of a field extended evenly (parity +1) or oddly (-1) across z = +-1
Eigen::MatrixXd dz_reflect(const Eigen::MatrixXd& f, double h, int parity) {
    const int n = static_cast<int>(f.cols());
    Eigen::MatrixXd d(f.rows(), f.cols());
    for (int j = 1; j < n - 1; ++j) d.col(j) = (f.col(j + 1) - f.col(j - 1)) / (2 * h);
    d.col(0) = (f.col(1) - parity * f.col(1)) / (2 * h);
    d.col(n - 1) = (parity * f.col(n - 2) - f.col(n - 2)) / (2 * h);
    return d;
}

struct Coeffs {
    Eigen::VectorXd r, d1, d2, d3, d4, rho_h;  // rho_h: density from Bernoulli at background args
};

Coeffs coeffs_of(const BackgroundFlow& flow) {
    const int n = flow.n();
    const double gm = flow.params.gamma;
    Coeffs c;
    c.r.resize(n);
    c.d1.resize(n);
    c.d2.resize(n);
    c.d3.resize(n);
    c.d4.resize(n);
    c.rho_h.resize(n);
    for (int i = 0; i < n; ++i) {
        const double rho = flow.rho[i], c2 = flow.c2[i], u1 = flow.U1[i];
        c.r[i] = flow.r[i];
        c.d1[i] = rho * (1 - u1 * u1 / c2);
        c.d2[i] = rho;
        c.d3[i] = rho * u1 / c2;
        c.d4[i] = rho / c2;
        c.rho_h[i] = density_from_bernoulli(flow.K0, flow.params.S0, u1, flow.U2[i], flow.Phi[i], gm);
    }
    return c;
}

double half_weight(int k, int n) { return (k == 0 || k == n - 1) ? 0.5 : 1.0; }

// Discrete weak form of the potential problem. Unknowns: psi at i >= 1, Psi at 1 <= i <= nr-2.
struct Blocks {
    int nr = 0, nz = 0;
    SpMat K1, K2, C;
    int id1(int i, int j) const { return (i - 1) * nz + j; }
    int id2(int i, int j) const { return (i - 1) * nz + j; }
};

Blocks assemble_blocks(const Coeffs& c, int nz, double hz) {
    Blocks b;
    const int nr = static_cast<int>(c.r.size());
    b.nr = nr;
    b.nz = nz;
    const double hr = (c.r[nr - 1] - c.r[0]) / (nr - 1);
    const int n1 = (nr - 1) * nz, n2 = (nr - 2) * nz;
    std::vector<Trip> t1, t2, tc;
    auto in1 = [&](int i) { return i >= 1; };
    auto in2 = [&](int i) { return i >= 1 && i <= nr - 2; };
    auto stiff = [&](std::vector<Trip>& t, bool ok_a, bool ok_b, int a, int bb, double w) {
        if (ok_a) t.emplace_back(a, a, w);
        if (ok_b) t.emplace_back(bb, bb, w);
        if (ok_a && ok_b) {
            t.emplace_back(a, bb, -w);
            t.emplace_back(bb, a, -w);
        }
    };
    for (int i = 0; i + 1 < nr; ++i) {
        const double rd1 = 0.5 * (c.r[i] * c.d1[i] + c.r[i + 1] * c.d1[i + 1]);
        const double rr = 0.5 * (c.r[i] + c.r[i + 1]);
        const double rd3 = 0.5 * (c.r[i] * c.d3[i] + c.r[i + 1] * c.d3[i + 1]);
        for (int j = 0; j < nz; ++j) {
            const double wz = hz * half_weight(j, nz);
            stiff(t1, in1(i), in1(i + 1), in1(i) ? b.id1(i, j) : 0, b.id1(i + 1, j), wz / hr * rd1);
            stiff(t2, in2(i), in2(i + 1), in2(i) ? b.id2(i, j) : 0, in2(i + 1) ? b.id2(i + 1, j) : 0,
                  wz / hr * rr);
            // (avg Psi) * (eta1_{i+1} - eta1_i) * rd3
            const double w = 0.5 * wz * rd3;
            for (int q : {i, i + 1}) {
                if (!in2(q)) continue;
                if (in1(i + 1)) tc.emplace_back(b.id1(i + 1, j), b.id2(q, j), w);
                if (in1(i)) tc.emplace_back(b.id1(i, j), b.id2(q, j), -w);
            }
        }
    }
    for (int i = 0; i < nr; ++i) {
        const double wr = hr * half_weight(i, nr);
        for (int j = 0; j + 1 < nz; ++j) {
            if (in1(i)) stiff(t1, true, true, b.id1(i, j), b.id1(i, j + 1), wr / hz * c.r[i] * c.d2[i]);
            if (in2(i)) stiff(t2, true, true, b.id2(i, j), b.id2(i, j + 1), wr / hz * c.r[i]);
        }
        if (in2(i))
            for (int j = 0; j < nz; ++j)
                t2.emplace_back(b.id2(i, j), b.id2(i, j), wr * hz * half_weight(j, nz) * c.r[i] * c.d4[i]);
    }
    b.K1.resize(n1, n1);
    b.K2.resize(n2, n2);
    b.C.resize(n1, n2);
    b.K1.setFromTriplets(t1.begin(), t1.end());
    b.K2.setFromTriplets(t2.begin(), t2.end());
    b.C.setFromTriplets(tc.begin(), tc.end());
    return b;
}

// unweighted H^1 Gram matrix on the same dofs
SpMat gram(int nr, int nz, double hr, double hz, bool dir_r1) {
    std::vector<Trip> t;
    auto idx = [&](int i, int j) { return (i - 1) * nz + j; };
    auto ok = [&](int i) { return i >= 1 && (!dir_r1 || i <= nr - 2); };
    const int last = dir_r1 ? nr - 2 : nr - 1;
    for (int i = 0; i + 1 < nr; ++i)
        for (int j = 0; j < nz; ++j) {
            const double w = hz * half_weight(j, nz) / hr;
            const bool a = ok(i), b = ok(i + 1);
            if (a) t.emplace_back(idx(i, j), idx(i, j), w);
            if (b) t.emplace_back(idx(i + 1, j), idx(i + 1, j), w);
            if (a && b) {
                t.emplace_back(idx(i, j), idx(i + 1, j), -w);
                t.emplace_back(idx(i + 1, j), idx(i, j), -w);
            }
        }
    for (int i = 1; i <= last; ++i) {
        const double wr = hr * half_weight(i, nr);
        for (int j = 0; j + 1 < nz; ++j) {
            const double w = wr / hz;
            t.emplace_back(idx(i, j), idx(i, j), w);
            t.emplace_back(idx(i, j + 1), idx(i, j + 1), w);
            t.emplace_back(idx(i, j), idx(i, j + 1), -w);
            t.emplace_back(idx(i, j + 1), idx(i, j), -w);
        }
        for (int j = 0; j < nz; ++j) t.emplace_back(idx(i, j), idx(i, j), wr * hz * half_weight(j, nz));
    }
    const int n = last * nz;
    SpMat G(n, n);
    G.setFromTriplets(t.begin(), t.end());
    return G;
}

// smallest eigenvalue of K v = lambda G v by inverse iteration
double min_rayleigh(const SpMat& K, const SpMat& G) {
    Factor f(K);
    if (f.info() != Eigen::Success) return 0.0;
    Eigen::VectorXd x = Eigen::VectorXd::Ones(K.rows());
    double lam = 0;
    for (int it = 0; it < 500; ++it) {
        Eigen::VectorXd y = f.solve(G * x);
        y /= std::sqrt(y.dot(G * y));
        const double next = y.dot(K * y);
        x = y;
        if (it > 0 && std::abs(next - lam) <= 1e-12 * std::abs(next)) {
            lam = next;
            break;
        }
        lam = next;
    }
    return lam;
}

void check_factor(const Factor& f, const char* what) {
    if (f.info() != Eigen::Success) fail(ErrorKind::CoercivityLost, std::string(what) + " is not positive definite");
    if (f.vectorD().minCoeff() <= 0) fail(ErrorKind::CoercivityLost, std::string(what) + " has a nonpositive pivot");
}

// Cubic Lagrange interpolation of nodal data with z-reflection parity.
struct RectInterp {
    const Eigen::MatrixXd* v = nullptr;
    double r0 = 0, hr = 1, hz = 1;
    int nr = 0, nz = 0, parity = 1;

    double at(int i, int j) const {
        if (j < 0) return parity * (*v)(i, -j);
        if (j > nz - 1) return parity * (*v)(i, 2 * (nz - 1) - j);
        return (*v)(i, j);
    }
    static void weights(double x, std::array<double, 4>& w) {
        // nodes at 0, 1, 2, 3
        for (int a = 0; a < 4; ++a) {
            double p = 1;
            for (int b = 0; b < 4; ++b)
                if (b != a) p *= (x - b) / static_cast<double>(a - b);
            w[a] = p;
        }
    }
    double operator()(double r, double z) const {
        const int i0 = std::clamp(static_cast<int>(std::floor((r - r0) / hr)) - 1, 0, nr - 4);
        const int j0 = static_cast<int>(std::floor((z + 1) / hz)) - 1;
        std::array<double, 4> wr, wz;
        weights((r - r0) / hr - i0, wr);
        weights((z + 1) / hz - j0, wz);
        double s = 0;
        for (int a = 0; a < 4; ++a) {
            double row = 0;
            for (int b = 0; b < 4; ++b) row += wz[b] * at(i0 + a, j0 + b);
            s += wr[a] * row;
        }
        return s;
    }
};

double sup(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double interior_sup(const Eigen::MatrixXd& m) { return sup(m.block(1, 1, m.rows() - 2, m.cols() - 2)); }

double c2_norm(const SlabFunction& f) {
    constexpr int n = 1025;
    double a = 0, b = 0, c = 0;
    for (int k = 0; k < n; ++k) {
        const double z = -1 + 2.0 * k / (n - 1);
        a = std::max(a, std::abs(f.f(z)));
        b = std::max(b, std::abs(f.df(z)));
        c = std::max(c, std::abs(f.d2f(z)));
    }
    return a + b + c;
}

}  // namespace

SlabFunction SlabFunction::zero() {
    auto z = [](double) { return 0.0; };
    return {z, z, z};
}

SlabFunction SlabFunction::from(const ClosedForm& c) {
    if (c.depends_on_radius()) fail(ErrorKind::InvalidParams, c.tag + " is only meaningful for b");
    if (!known_tag(c.tag)) fail(ErrorKind::InvalidParams, "unknown closed form '" + c.tag + "'");
    return {[c](double z) { return c(z); }, [c](double z) { return c.derivative(z, 1); },
            [c](double z) { return c.derivative(z, 2); }};
}

AxiBoundary make_axi_boundary(const BackgroundFlow& flow, const AxiData& d) {
    AxiBoundary bd;
    bd.U2en = SlabFunction::from(d.U2en);
    bd.U3en = SlabFunction::from(d.U3en);
    bd.Ken = SlabFunction::from(d.Ken);
    bd.Sen = SlabFunction::from(d.Sen);
    bd.Phien = SlabFunction::from(d.Phien);
    bd.U1ex = SlabFunction::from(d.U1ex);
    bd.Phiex = SlabFunction::from(d.Phiex);
    if (!known_tag(d.b.tag)) fail(ErrorKind::InvalidParams, "unknown closed form '" + d.b.tag + "'");
    const double r0 = flow.r0, L = flow.r1 - flow.r0;
    const ClosedForm b = d.b;
    if (b.depends_on_radius())
        bd.b = [b, r0, L](double r, double z) { return b(kPi * z, (r - r0) / L); };
    else
        bd.b = [b](double, double z) { return b(z); };
    return bd;
}

Eigen::VectorXd slab_nodes(int nz) { return Eigen::VectorXd::LinSpaced(nz, -1.0, 1.0); }

AxiSizes axi_sizes(const BackgroundFlow& flow, const AxiBoundary& bd, const Eigen::VectorXd& z) {
    AxiSizes s;
    for (int i = 0; i < flow.n(); ++i)
        for (int j = 0; j < z.size(); ++j) s.omega3 = std::max(s.omega3, std::abs(bd.b(flow.r[i], z[j])));
    s.omega4 = c2_norm(bd.U2en) + c2_norm(bd.Ken) + c2_norm(bd.Sen);
    s.omega5 = c2_norm(bd.U3en) + c2_norm(bd.Phien) + c2_norm(bd.U1ex) + c2_norm(bd.Phiex);
    return s;
}

double boundary_compatibility_defect(const AxiBoundary& bd) {
    double d = 0;
    for (double z : {-1.0, 1.0})
        for (double v : {bd.U2en.df(z), bd.U3en.f(z), bd.U3en.d2f(z), bd.Ken.df(z), bd.Sen.df(z),
                         bd.Phien.df(z), bd.U1ex.df(z), bd.Phiex.df(z)})
            d = std::max(d, std::abs(v));
    return d;
}

double c1_proxy(const Eigen::MatrixXd& f, double hr, double hz) {
    return sup(f) + sup(dr2(f, hr)) + sup(dz2(f, hz));
}

EllipticResult elliptic_solve(const BackgroundFlow& flow, const AxiBoundary& bd, const Eigen::VectorXd& z,
                              const EllipticSources& src) {
    const int nr = flow.n(), nz = static_cast<int>(z.size());
    if (nr < 8 || nz < 8) fail(ErrorKind::InvalidParams, "elliptic_solve: grid must be at least 8x8");
    const double hr = (flow.r1 - flow.r0) / (nr - 1), hz = 2.0 / (nz - 1), L = flow.r1 - flow.r0;
    const Coeffs c = coeffs_of(flow);
    EllipticResult out;

    // curl lift: (d_rr + d_zz) psi1 = Y3, d_r psi1(r0) = 0, psi1 = 0 at r1 and on the walls
    out.psi1 = Eigen::MatrixXd::Zero(nr, nz);
    {
        const int mi = nr - 1, mj = nz - 2;
        auto id = [&](int i, int j) { return i * mj + (j - 1); };
        std::vector<Trip> t;
        Eigen::VectorXd rhs(mi * mj);
        for (int i = 0; i < mi; ++i)
            for (int j = 1; j <= mj; ++j) {
                // negated operator, row 0 halved to keep the matrix symmetric
                const double s = i == 0 ? 0.5 : 1.0;
                const int k = id(i, j);
                t.emplace_back(k, k, s * (2 / (hr * hr) + 2 / (hz * hz)));
                if (i == 0) {
                    t.emplace_back(k, id(1, j), -s * 2 / (hr * hr));
                } else {
                    t.emplace_back(k, id(i - 1, j), -1 / (hr * hr));
                    if (i + 1 < mi) t.emplace_back(k, id(i + 1, j), -1 / (hr * hr));
                }
                if (j > 1) t.emplace_back(k, id(i, j - 1), -s / (hz * hz));
                if (j < mj) t.emplace_back(k, id(i, j + 1), -s / (hz * hz));
                rhs[k] = -s * src.Y3(i, j);
            }
        SpMat A(mi * mj, mi * mj);
        A.setFromTriplets(t.begin(), t.end());
        Factor f(A);
        check_factor(f, "curl-lift operator");
        const Eigen::VectorXd x = f.solve(rhs);
        for (int i = 0; i < mi; ++i)
            for (int j = 1; j <= mj; ++j) out.psi1(i, j) = x[id(i, j)];
    }
    Eigen::MatrixXd psi1_r = dr2(out.psi1, hr);
    psi1_r.row(0).setZero();
    const Eigen::MatrixXd psi1_z = dz_reflect(out.psi1, hz, -1);

    // lifted sources
    Eigen::MatrixXd Y5(nr, nz), Y6(nr, nz), Y7(nr, nz), phi(nr, nz);
    Eigen::VectorXd g(nz);
    for (int j = 0; j < nz; ++j) g[j] = bd.U1ex.f(z[j]);
    for (int i = 0; i < nr; ++i) {
        const double r = c.r[i], s = (r - flow.r0) / L;
        for (int j = 0; j < nz; ++j) {
            const double pen = bd.Phien.f(z[j]), pex = bd.Phiex.f(z[j]);
            const double ph = (1 - s) * pen + s * pex, ph_r = (pex - pen) / L;
            const double ph_zz = (1 - s) * bd.Phien.d2f(z[j]) + s * bd.Phiex.d2f(z[j]);
            phi(i, j) = ph;
            Y5(i, j) = src.Y1(i, j) + r * c.d1[i] * psi1_z(i, j) - r * c.d3[i] * ph;
            Y6(i, j) = src.Y2(i, j) - r * c.d2[i] * psi1_r(i, j) - r * c.d2[i] * bd.U3en.f(z[j]);
            Y7(i, j) = r * src.Y4(i, j) + r * c.d3[i] * psi1_z(i, j) + r * c.d4[i] * ph - ph_r - r * ph_zz;
        }
    }

    const Blocks B = assemble_blocks(c, nz, hz);
    Eigen::VectorXd f1 = Eigen::VectorXd::Zero(B.K1.rows()), f2 = Eigen::VectorXd::Zero(B.K2.rows());
    for (int i = 0; i + 1 < nr; ++i)
        for (int j = 0; j < nz; ++j) {
            const double w = hz * half_weight(j, nz) * 0.5 * (Y5(i, j) + Y5(i + 1, j));
            f1[B.id1(i + 1, j)] += w;
            if (i >= 1) f1[B.id1(i, j)] -= w;
        }
    for (int i = 1; i < nr; ++i) {
        const double wr = hr * half_weight(i, nr);
        for (int j = 0; j + 1 < nz; ++j) {
            const double w = wr * 0.5 * (Y6(i, j) + Y6(i, j + 1));
            f1[B.id1(i, j + 1)] += w;
            f1[B.id1(i, j)] -= w;
        }
    }
    for (int j = 0; j < nz; ++j)
        f1[B.id1(nr - 1, j)] +=
            hz * half_weight(j, nz) * (flow.r1 * c.d1[nr - 1] * g[j] - Y5(nr - 1, j));
    for (int i = 1; i <= nr - 2; ++i)
        for (int j = 0; j < nz; ++j)
            f2[B.id2(i, j)] = -hr * hz * half_weight(i, nr) * half_weight(j, nz) * Y7(i, j);

    Factor F1(B.K1), F2(B.K2);
    check_factor(F1, "psi block");
    check_factor(F2, "Psi block");
    const SpMat Ct = B.C.transpose();
    auto schur = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return B.K2 * x + Ct * F1.solve(B.C * x);
    };
    const Eigen::VectorXd bs = f2 + Ct * F1.solve(f1);
    Eigen::VectorXd Psi = Eigen::VectorXd::Zero(bs.size());
    const double bnorm = bs.norm();
    if (bnorm > 0) {
        Eigen::VectorXd res = bs, zv = F2.solve(res), p = zv;
        double rz = res.dot(zv);
        for (int it = 1; it <= 1000; ++it) {
            const Eigen::VectorXd Ap = schur(p);
            const double alpha = rz / p.dot(Ap);
            Psi += alpha * p;
            res -= alpha * Ap;
            out.cg_iterations = it;
            if (res.norm() <= 1e-12 * bnorm) break;
            zv = F2.solve(res);
            const double rz1 = res.dot(zv);
            p = zv + (rz1 / rz) * p;
            rz = rz1;
        }
        out.cg_relative_residual = res.norm() / bnorm;
    }
    const Eigen::VectorXd psi = F1.solve(f1 - B.C * Psi);

    out.psi = Eigen::MatrixXd::Zero(nr, nz);
    out.Psi = Eigen::MatrixXd::Zero(nr, nz);
    for (int i = 1; i < nr; ++i)
        for (int j = 0; j < nz; ++j) {
            out.psi(i, j) = psi[B.id1(i, j)];
            if (i <= nr - 2) out.Psi(i, j) = Psi[B.id2(i, j)];
        }

    // T1 = d_r psi - d_z psi1, T3 = d_z psi + U3en + d_r psi1, T6 = Psi + phi
    Eigen::MatrixXd Tt1 = dr2(out.psi, hr);
    Tt1.row(nr - 1) = g.transpose();
    Eigen::MatrixXd Tt3 = dz_reflect(out.psi, hz, 1);
    for (int j = 0; j < nz; ++j) Tt3.col(j).array() += bd.U3en.f(z[j]);
    out.T1 = Tt1 - psi1_z;
    out.T3 = Tt3 + psi1_r;
    out.T6 = out.Psi + phi;
    return out;
}

CoercivityReport coercivity(const BackgroundFlow& flow, const Eigen::VectorXd& z) {
    const int nr = flow.n(), nz = static_cast<int>(z.size());
    const double hr = (flow.r1 - flow.r0) / (nr - 1), hz = 2.0 / (nz - 1);
    const Blocks B = assemble_blocks(coeffs_of(flow), nz, hz);
    CoercivityReport rep;
    rep.lambda_psi = min_rayleigh(B.K1, gram(nr, nz, hr, hz, false));
    rep.lambda_Psi = min_rayleigh(B.K2, gram(nr, nz, hr, hz, true));
    rep.lambda_min = std::min(rep.lambda_psi, rep.lambda_Psi);

    std::mt19937 gen(7);
    std::uniform_real_distribution<double> U(-1, 1);
    Eigen::VectorXd x1(B.K1.rows()), x2(B.K2.rows());
    for (int k = 0; k < x1.size(); ++k) x1[k] = U(gen);
    for (int k = 0; k < x2.size(); ++k) x2[k] = U(gen);
    const double sym = x1.dot(B.K1 * x1) + x2.dot(B.K2 * x2);
    const double full = x1.dot(B.K1 * x1 + B.C * x2) + x2.dot(B.K2 * x2 - B.C.transpose() * x1);
    rep.cross_term_defect = std::abs(full - sym) / sym;
    return rep;
}

TransportResult transport(const BackgroundFlow& flow, const AxiBoundary& bd, const Eigen::VectorXd& z,
                          const Eigen::MatrixXd& T1hat, const Eigen::MatrixXd& T3hat, double ode_tol,
                          int threads) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 1>;
    const int nr = flow.n(), nz = static_cast<int>(z.size());
    const double hr = (flow.r1 - flow.r0) / (nr - 1), hz = 2.0 / (nz - 1);
    Eigen::MatrixXd v(nr, nz);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nz; ++j) {
            const double u1 = flow.U1[i] + T1hat(i, j);
            if (!(u1 > 0)) {
                std::ostringstream os;
                os << "radial velocity " << u1 << " at node (" << i << ", " << j << ")";
                fail(ErrorKind::TrajectoryExit, os.str());
            }
            v(i, j) = T3hat(i, j) / u1;
        }
    const RectInterp V{&v, flow.r0, hr, hz, nr, nz, -1};
    const bool moving = v.cwiseAbs().maxCoeff() > 0;

    TransportResult tr;
    tr.foot = Eigen::MatrixXd::Zero(nr, nz);
    tr.T2.resize(nr, nz);
    tr.T4.resize(nr, nz);
    tr.T5.resize(nr, nz);
    parallel_for(nr * nz, threads, [&](int k) {
        const int i = k / nz, j = k % nz;
        State x{z[j]};
        if (i > 0 && moving) {
            auto rhs = [&](const State& s, State& d, double r) { d[0] = V(r, s[0]); };
            auto stepper = odeint::make_controlled(ode_tol, ode_tol, odeint::runge_kutta_dopri5<State>());
            odeint::integrate_adaptive(stepper, rhs, x, flow.r[i], flow.r0, -hr);
        }
        if (std::abs(x[0]) > 1 + 1e-10) {
            std::ostringstream os;
            os << "trajectory from (" << flow.r[i] << ", " << z[j] << ") reaches z = " << x[0];
            fail(ErrorKind::TrajectoryExit, os.str());
        }
        const double f = std::clamp(x[0], -1.0, 1.0);
        tr.foot(i, j) = f;
        tr.T2(i, j) = flow.r0 * bd.U2en.f(f) / flow.r[i];
        tr.T4(i, j) = bd.Sen.f(f);
        tr.T5(i, j) = bd.Ken.f(f);
    });
    return tr;
}

EllipticSources axi_sources(const BackgroundFlow& flow, const AxiBoundary& bd, const Eigen::VectorXd& z,
                            const Eigen::MatrixXd& T1h, const Eigen::MatrixXd& T3h, const Eigen::MatrixXd& T6h,
                            const TransportResult& tr) {
    const int nr = flow.n(), nz = static_cast<int>(z.size());
    const double hz = 2.0 / (nz - 1), gm = flow.params.gamma, S0 = flow.params.S0;
    const Coeffs c = coeffs_of(flow);
    const Eigen::MatrixXd T2z = dz_reflect(tr.T2, hz, 1), T4z = dz_reflect(tr.T4, hz, 1),
                          T5z = dz_reflect(tr.T5, hz, 1);
    EllipticSources s;
    s.Y1.resize(nr, nz);
    s.Y2.resize(nr, nz);
    s.Y3.resize(nr, nz);
    s.Y4.resize(nr, nz);
    for (int i = 0; i < nr; ++i) {
        const double r = c.r[i], rb = flow.rho[i], c2 = flow.c2[i], u1b = flow.U1[i], u2b = flow.U2[i];
        const double rh = c.rho_h[i];
        for (int j = 0; j < nz; ++j) {
            const double t1 = T1h(i, j), t2 = tr.T2(i, j), t3 = T3h(i, j), t4 = tr.T4(i, j),
                         t5 = tr.T5(i, j), t6 = T6h(i, j);
            const double U1 = u1b + t1, U2 = u2b + t2, S = S0 + t4;
            // |u|^2 enters only through U2^2 + U3^2
            const double rho = density_from_bernoulli(flow.K0 + t5, S, U1, std::hypot(U2, t3),
                                                      flow.Phi[i] + t6, gm);
            const double known = rb / c2 * t5 - rb * u2b / c2 * t2 - rb / (gm - 1) * t4;
            const double lin = rb / c2 * (t6 - u1b * t1) + known;
            const double nl = rho - rh - lin;
            s.Y1(i, j) = -r * u1b * known - r * u1b * nl - r * (rho - rh) * t1;
            s.Y2(i, j) = -r * (rho - rh) * t3;
            s.Y3(i, j) = (U2 * T2z(i, j) + std::exp(S) * std::pow(rho, gm - 1) / (gm - 1) * T4z(i, j) - T5z(i, j)) / U1;
            s.Y4(i, j) = known + nl - bd.b(r, z[j]);
        }
    }
    return s;
}

AxiState solve_axisym(const BackgroundFlow& flow, const AxiBoundary& bd, const AxiConfig& cfg) {
    if (cfg.nz < 8 || flow.n() < 8) fail(ErrorKind::InvalidParams, "solve_axisym: grid must be at least 8x8");
    if (!(cfg.tol > 0) || cfg.max_iters < 1 || !(cfg.delta > 0) || !(cfg.ode_tol > 0))
        fail(ErrorKind::InvalidParams, "solve_axisym: bad iteration config");
    const int nr = flow.n(), nz = cfg.nz;
    const double hr = (flow.r1 - flow.r0) / (nr - 1), hz = 2.0 / (nz - 1), gm = flow.params.gamma;
    AxiState st;
    st.r = Eigen::Map<const Eigen::VectorXd>(flow.r.data(), nr);
    st.z = slab_nodes(nz);
    const Eigen::VectorXd& z = st.z;
    st.sizes = axi_sizes(flow, bd, z);
    st.T1 = st.T2 = st.T3 = st.T4 = st.T5 = st.T6 = Eigen::MatrixXd::Zero(nr, nz);

    auto sum_c1 = [&](const std::array<const Eigen::MatrixXd*, 6>& f) {
        double s = 0;
        for (auto* m : f) s += c1_proxy(*m, hr, hz);
        return s;
    };
    double prev = 0;
    int stalled = 0;
    for (int k = 1; k <= cfg.max_iters; ++k) {
        const TransportResult tr = transport(flow, bd, z, st.T1, st.T3, cfg.ode_tol, cfg.threads);
        const EllipticSources src = axi_sources(flow, bd, z, st.T1, st.T3, st.T6, tr);
        const EllipticResult el = elliptic_solve(flow, bd, z, src);
        const Eigen::MatrixXd d1 = el.T1 - st.T1, d2 = tr.T2 - st.T2, d3 = el.T3 - st.T3, d4 = tr.T4 - st.T4,
                              d5 = tr.T5 - st.T5, d6 = el.T6 - st.T6;
        const double inc = sum_c1({&d1, &d2, &d3, &d4, &d5, &d6});
        st.T1 = el.T1;
        st.T2 = tr.T2;
        st.T3 = el.T3;
        st.T4 = tr.T4;
        st.T5 = tr.T5;
        st.T6 = el.T6;
        st.increments.push_back(inc);
        st.iterations = k;
        if (k > 1 && prev > 0 && inc > 1e-14) st.contraction = std::max(st.contraction, inc / prev);
        st.norm_c1 = sum_c1({&st.T1, &st.T2, &st.T3, &st.T4, &st.T5, &st.T6});
        if (st.norm_c1 > cfg.delta) {
            std::ostringstream os;
            os << "iterate " << k << " has size " << st.norm_c1 << " > delta " << cfg.delta;
            fail(ErrorKind::LeftIterationSet, os.str());
        }
        if (inc < cfg.tol) {
            st.converged = true;
            break;
        }
        stalled = (k > 1 && inc >= prev) ? stalled + 1 : 0;
        if (stalled >= 5) fail(ErrorKind::NoContraction, "axisymmetric increments did not decrease for 5 steps");
        prev = inc;
    }

    st.coercive = coercivity(flow, z);

    // physical fields
    Eigen::MatrixXd U1(nr, nz), U2(nr, nz), U3 = st.T3, K(nr, nz), S(nr, nz), rho(nr, nz), rU2(nr, nz), bb(nr, nz);
    const Coeffs c = coeffs_of(flow);
    st.min_supersonic_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nz; ++j) {
            U1(i, j) = flow.U1[i] + st.T1(i, j);
            U2(i, j) = flow.U2[i] + st.T2(i, j);
            K(i, j) = flow.K0 + st.T5(i, j);
            S(i, j) = flow.params.S0 + st.T4(i, j);
            const double phi = flow.Phi[i] + st.T6(i, j), q = std::hypot(U2(i, j), U3(i, j));
            rho(i, j) = density_from_bernoulli(K(i, j), S(i, j), U1(i, j), q, phi, gm);
            rU2(i, j) = flow.r[i] * U2(i, j);
            bb(i, j) = bd.b(flow.r[i], z[j]);
            const double c2 = sound_speed_sq(K(i, j), U1(i, j), q, phi, gm);
            st.min_supersonic_margin = std::min(st.min_supersonic_margin, U1(i, j) * U1(i, j) + q * q - c2);
        }
    st.min_U1 = U1.minCoeff();

    auto& R = st.residuals;
    {
        Eigen::MatrixXd m1(nr, nz), m3(nr, nz), a(nr, nz);
        for (int i = 0; i < nr; ++i) {
            m1.row(i) = flow.r[i] * rho.row(i).cwiseProduct(U1.row(i));
            m3.row(i) = flow.r[i] * rho.row(i).cwiseProduct(U3.row(i));
        }
        R.continuity = interior_sup(dr2(m1, hr) + dz2(m3, hz));
        const Eigen::MatrixXd U2z = dz2(U2, hz), Sz = dz2(S, hz), Kz = dz2(K, hz);
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nz; ++j) a(i, j) = std::exp(S(i, j)) * std::pow(rho(i, j), gm - 1) / (gm - 1);
        R.curl = interior_sup(U1.cwiseProduct(dr2(U3, hr) - dz2(U1, hz)) -
                     (U2.cwiseProduct(U2z) + a.cwiseProduct(Sz) - Kz));
        R.transport_rU2 = interior_sup(U1.cwiseProduct(dr2(rU2, hr)) + U3.cwiseProduct(dz2(rU2, hz)));
        R.transport_K = interior_sup(U1.cwiseProduct(dr2(K, hr)) + U3.cwiseProduct(Kz));
        R.transport_S = interior_sup(U1.cwiseProduct(dr2(S, hr)) + U3.cwiseProduct(Sz));
        Eigen::MatrixXd lap = drr2(st.T6, hr) + dzz2(st.T6, hz);
        const Eigen::MatrixXd T6r = dr2(st.T6, hr);
        for (int i = 0; i < nr; ++i) lap.row(i) += T6r.row(i) / flow.r[i] - (rho.row(i).array() - c.rho_h[i]).matrix();
        R.poisson = interior_sup(lap + bb);
    }

    // divergence identity and exact wall quantities at the final state
    TransportResult fin;
    fin.T2 = st.T2;
    fin.T4 = st.T4;
    fin.T5 = st.T5;
    const EllipticSources ys = axi_sources(flow, bd, z, st.T1, st.T3, st.T6, fin);
    {
        Eigen::MatrixXd F(nr, nz), G(nr, nz);
        for (int i = 0; i < nr; ++i) {
            const double r = flow.r[i];
            F.row(i) = r * c.d1[i] * st.T1.row(i) + r * c.d3[i] * st.T6.row(i) - ys.Y1.row(i);
            G.row(i) = r * c.d2[i] * st.T3.row(i) - ys.Y2.row(i);
        }
        R.divergence_identity = interior_sup(dr2(F, hr) + dz2(G, hz));
    }
    auto& A = st.audit;
    // re-integrate every characteristic through the converged velocity
    const TransportResult re = transport(flow, bd, z, st.T1, st.T3, cfg.ode_tol, cfg.threads);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nz; ++j) {
            A.drift_rU2 = std::max(A.drift_rU2, flow.r[i] * std::abs(st.T2(i, j) - re.T2(i, j)));
            A.drift_S = std::max(A.drift_S, std::abs(st.T4(i, j) - re.T4(i, j)));
            A.drift_K = std::max(A.drift_K, std::abs(st.T5(i, j) - re.T5(i, j)));
        }
    A.wall_exact = boundary_compatibility_defect(bd);
    for (int j : {0, nz - 1}) {
        const double zw = z[j];
        for (int i = 0; i < nr; ++i)
            for (double v : {st.T3(i, j), ys.Y2(i, j), ys.Y3(i, j), re.foot(i, j) - zw})
                A.wall_exact = std::max(A.wall_exact, std::abs(v));
    }
    for (const Eigen::MatrixXd* f : {&st.T1, &st.T2, &st.T4, &st.T5, &st.T6}) {
        const Eigen::MatrixXd d = dz2(*f, hz);
        A.wall_fd = std::max({A.wall_fd, sup(d.col(0)), sup(d.col(nz - 1))});
    }
    {
        const Eigen::MatrixXd d = dzz2(st.T3, hz);
        A.wall_fd = std::max({A.wall_fd, sup(d.col(0)), sup(d.col(nz - 1))});
    }
    return st;
}

}  // namespace spiral
