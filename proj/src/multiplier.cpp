#include "spiral/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "spiral/errors.hpp"
#include "spiral/fields.hpp"

namespace spiral {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Constants {
    double a0, a2, a1, a1_tilde, a1_hat, theta, mu0;
};

// Coefficient fields as (nodes x samples) matrices; a single column for the barred case.
struct CoefFields {
    Eigen::MatrixXd A12, A22, A12_t, A22_r;
};

CoefFields coefficient_fields(const BackgroundFlow& flow, const RadialCoeffs& rc,
                              const FrozenCoeffs* frozen) {
    CoefFields f;
    if (frozen) {
        f.A12 = frozen->A12;
        f.A22 = frozen->A22;
        f.A12_t = theta_derivative_samples(f.A12);
    } else {
        const int n = rc.n();
        f.A12 = Eigen::Map<const Eigen::VectorXd>(rc.A12.data(), n);
        f.A22 = Eigen::Map<const Eigen::VectorXd>(rc.A22.data(), n);
        f.A12_t = Eigen::MatrixXd::Zero(n, 1);
    }
    f.A22_r = radial_derivative(f.A22, flow.h, 1);
    return f;
}

Constants constants(const RadialCoeffs& rc, const CoefFields& cf, double delta) {
    Constants k{};
    k.theta = rc.theta_r1;
    k.mu0 = std::min(cf.A22.minCoeff(), 1.0 / cf.A22.maxCoeff());
    k.a0 = -kInf;
    k.a2 = -kInf;
    double a11 = kInf, a12 = kInf, t11 = kInf, t12 = kInf;
    for (int i = 0; i < rc.n(); ++i) {
        const double r = rc.r[i];
        k.a0 = std::max(k.a0, rc.a2[i] * rc.a2[i] + 4 * rc.a3[i] * rc.a3[i] / k.theta +
                                  4 * rc.a4[i] * rc.a4[i] / (k.mu0 * k.theta));
        k.a2 = std::max(k.a2, 4 * rc.b1[i] * rc.b1[i] + 4 * r * r * rc.b2[i] * rc.b2[i] +
                                  4 * rc.b3[i] * rc.b3[i] / k.theta);
        a11 = std::min(a11, rc.a1[i]);
        for (int l = 0; l < cf.A22.cols(); ++l) {
            t11 = std::min(t11, rc.a1[i] - cf.A12_t(i, l));
            t12 = std::min(t12, -cf.A22_r(i, l) / (2 * cf.A22(i, l)));
        }
    }
    // barred version of the second minimum
    Eigen::VectorXd A22bar = Eigen::Map<const Eigen::VectorXd>(rc.A22.data(), rc.n());
    const Eigen::VectorXd A22bar_r = radial_derivative(A22bar, rc.r[1] - rc.r[0], 1);
    for (int i = 0; i < rc.n(); ++i) a12 = std::min(a12, -A22bar_r[i] / (2 * A22bar[i]));
    k.a2 += 1.0 / k.mu0;
    k.a1 = std::min(a11, a12);
    k.a1_tilde = std::min(t11, t12);
    k.a1_hat = std::min(k.a1, k.a1_tilde) - delta;
    return k;
}

double riccati_rhs(double Q, const Constants& k, double lambda0) {
    // Q' = -(a2 Q^2 - 2 a1hat Q + a0 + lambda0)
    return -(k.a2 * Q * Q - 2 * k.a1_hat * Q + k.a0 + lambda0);
}

struct Margins {
    std::vector<double> psi_r, psi_t;
    double min_r = kInf, min_t = kInf;
};

Margins margins(const RadialCoeffs& rc, const CoefFields& cf, const Constants& k, double lambda0,
                const std::vector<double>& Q) {
    Margins m;
    const int n = rc.n();
    m.psi_r.assign(n, kInf);
    m.psi_t.assign(n, kInf);
    for (int i = 0; i < n; ++i) {
        const double r = rc.r[i], q = Q[i];
        const double Qp = riccati_rhs(q, k, lambda0);
        const double h1x2 = rc.a2[i] * rc.a2[i] +
                            q * q * (4 * rc.b1[i] * rc.b1[i] + 4 * r * r * rc.b2[i] * rc.b2[i] +
                                     4 * rc.b3[i] * rc.b3[i] / k.theta) +
                            4 * rc.a3[i] * rc.a3[i] / k.theta;
        for (int l = 0; l < cf.A22.cols(); ++l) {
            const double A22 = cf.A22(i, l);
            const double m15 = -Qp - 2 * q * cf.A12_t(i, l) + 2 * rc.a1[i] * q - h1x2;
            const double m16 = -Qp - q * cf.A22_r(i, l) / A22 - q * q / A22 -
                               4 * rc.a4[i] * rc.a4[i] / (A22 * k.theta);
            m.psi_r[i] = std::min(m.psi_r[i], m15);
            m.psi_t[i] = std::min(m.psi_t[i], m16);
        }
        m.min_r = std::min(m.min_r, m.psi_r[i]);
        m.min_t = std::min(m.min_t, m.psi_t[i]);
    }
    return m;
}

std::vector<double> integrate_riccati(const std::vector<double>& r, const Constants& k,
                                      double lambda0, double Q_end, const MultiplierOptions& opt) {
    const int n = static_cast<int>(r.size());
    std::vector<double> Q(n);
    Q[n - 1] = Q_end;
    double q = Q_end;
    for (int i = n - 1; i > 0; --i) {
        const double h = (r[i - 1] - r[i]) / opt.substeps;
        for (int s = 0; s < opt.substeps; ++s) {
            const double k1 = riccati_rhs(q, k, lambda0);
            const double k2 = riccati_rhs(q + h / 2 * k1, k, lambda0);
            const double k3 = riccati_rhs(q + h / 2 * k2, k, lambda0);
            const double k4 = riccati_rhs(q + h * k3, k, lambda0);
            q += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
            if (!(q > 0) || !(q <= opt.Q_max)) {
                const double rs = r[i] + (s + 1) * h;
                std::ostringstream os;
                os << "Q left (0, " << opt.Q_max << "] at r=" << rs;
                throw BlowUp(rs, os.str());
            }
        }
        Q[i - 1] = q;
    }
    return Q;
}

double forward_check(const std::vector<double>& r, const Constants& k, double lambda0,
                     const std::vector<double>& Q, const MultiplierOptions& opt) {
    double q = Q[0];
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        const double h = (r[i + 1] - r[i]) / opt.substeps;
        for (int s = 0; s < opt.substeps; ++s) {
            const double k1 = riccati_rhs(q, k, lambda0);
            const double k2 = riccati_rhs(q + h / 2 * k1, k, lambda0);
            const double k3 = riccati_rhs(q + h / 2 * k2, k, lambda0);
            const double k4 = riccati_rhs(q + h * k3, k, lambda0);
            q += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
    }
    return std::abs(q - Q.back()) / Q.back();
}

MultiplierCertificate certify_impl(const BackgroundFlow& flow, const RadialCoeffs& rc,
                                   const FrozenCoeffs* frozen, double delta,
                                   const std::vector<double>* lambdas, const MultiplierOptions& opt) {
    const CoefFields cf = coefficient_fields(flow, rc, frozen);
    const Constants k = constants(rc, cf, delta);
    MultiplierCertificate c;
    c.r = flow.r;
    c.frak_a0 = k.a0;
    c.frak_a2 = k.a2;
    c.frak_a1 = k.a1;
    c.frak_a1_tilde = k.a1_tilde;
    c.frak_a1_hat = k.a1_hat;
    c.theta_r1 = k.theta;
    c.mu0 = k.mu0;
    c.delta = delta;
    c.r1_certified = flow.r0;

    std::ostringstream diag;
    if (!(k.theta > 0)) {
        diag << "theta_r1 = " << k.theta << " not positive; ";
        c.diagnostics = diag.str();
        return c;
    }
    std::vector<double> lam;
    if (lambdas) {
        lam = *lambdas;
    } else {
        for (double f : opt.lambda_factors) lam.push_back(f * k.a0);
    }
    double base = k.a1_hat / k.a2;
    if (!(base > 0)) base = std::abs(k.a1_hat) > 0 ? std::abs(k.a1_hat) / k.a2 : 1.0 / k.a2;

    double best_blowup = kInf;
    for (double lambda0 : lam) {
        for (double qf : opt.qend_factors) {
            ++c.candidates_tried;
            const double Q_end = qf * base;
            std::vector<double> Q;
            try {
                Q = integrate_riccati(flow.r, k, lambda0, Q_end, opt);
            } catch (const BlowUp& e) {
                best_blowup = std::min(best_blowup, flow.r1 - e.radius);
                continue;
            }
            const Margins m = margins(rc, cf, k, lambda0, Q);
            const double slack = 1e-12 * std::max(1.0, k.a0);
            if (m.min_r >= lambda0 - slack && m.min_t >= lambda0 - slack) {
                c.certified = true;
                c.lambda0 = lambda0;
                c.Q_end = Q_end;
                c.Q = Q;
                c.margin_psi_r = m.psi_r;
                c.margin_psi_t = m.psi_t;
                c.min_margin_psi_r = m.min_r;
                c.min_margin_psi_t = m.min_t;
                c.r1_certified = flow.r1;
                c.forward_mismatch = forward_check(flow.r, k, lambda0, Q, opt);
                return c;
            }
            diag << "lambda0=" << lambda0 << " Q_end=" << Q_end << ": margins " << m.min_r << ", "
                 << m.min_t << "; ";
        }
    }
    if (std::isfinite(best_blowup))
        diag << "all candidates blew up; longest backward reach " << best_blowup;
    c.diagnostics = diag.str();
    return c;
}

}  // namespace

std::vector<double> riccati_solve(const std::vector<double>& r, double a0, double a1hat, double a2,
                                  double lambda0, double Q_end, const MultiplierOptions& opt) {
    if (!(a2 > 0) || !(lambda0 > 0) || !(Q_end > 0))
        fail(ErrorKind::InvalidParams, "riccati_solve requires a2 > 0, lambda0 > 0, Q_end > 0");
    Constants k{a0, a2, a1hat, a1hat, a1hat, 1.0, 1.0};
    return integrate_riccati(r, k, lambda0, Q_end, opt);
}

MultiplierCertificate certify(const BackgroundFlow& flow, const RadialCoeffs& rc,
                              const FrozenCoeffs* frozen, double delta,
                              const MultiplierOptions& opt) {
    return certify_impl(flow, rc, frozen, delta, nullptr, opt);
}

SoundnessCheck soundness_recheck(const BackgroundFlow& flow, const MultiplierCertificate& cert,
                                 int factor, const MultiplierOptions& opt) {
    SoundnessCheck s;
    if (!cert.certified) return s;
    const BackgroundFlow fine =
        integrate_background(flow.params, flow.r1, factor * (flow.n() - 1) + 1, false);
    const RadialCoeffs rc = linear_coeffs(fine);
    const CoefFields cf = coefficient_fields(fine, rc, nullptr);
    const Constants k{cert.frak_a0,     cert.frak_a2, cert.frak_a1, cert.frak_a1_tilde,
                      cert.frak_a1_hat, cert.theta_r1, cert.mu0};
    std::vector<double> Q;
    try {
        Q = integrate_riccati(fine.r, k, cert.lambda0, cert.Q_end, opt);
    } catch (const BlowUp&) {
        return s;
    }
    const Margins m = margins(rc, cf, k, cert.lambda0, Q);
    s.min_margin_psi_r = m.min_r;
    s.min_margin_psi_t = m.min_t;
    s.ok = m.min_r >= cert.lambda0 / 2 && m.min_t >= cert.lambda0 / 2;
    return s;
}

double certified_radius(const BackgroundParams& p, double lambda0,
                        const std::vector<double>& r1_candidates, int n_nodes, double delta,
                        const MultiplierOptions& opt) {
    std::vector<double> cand = r1_candidates;
    std::sort(cand.begin(), cand.end());
    const std::vector<double> lam{lambda0};
    double best = p.r0;
    for (double r1 : cand) {
        try {
            const BackgroundFlow flow = integrate_background(p, r1, n_nodes, false);
            const RadialCoeffs rc = linear_coeffs(flow);
            if (!certify_impl(flow, rc, nullptr, delta, &lam, opt).certified) break;
            best = r1;
        } catch (const SolverError&) {
            break;
        }
    }
    return best;
}

}  // namespace spiral
