#include "spiral/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spiral/errors.hpp"

namespace spiral {

namespace {

constexpr double kPi = std::numbers::pi;

ThetaSeries series_of(const ClosedForm& f, double base, int M) {
    const int nt = 4 * M + 4;
    const Eigen::VectorXd th = basis::thetas(nt);
    Eigen::VectorXd v(nt);
    for (int l = 0; l < nt; ++l) v[l] = base + f(th[l]);
    return ThetaSeries::from_samples(v, M);
}

// sum over j <= k of max |d^j f| for the perturbation part (mean removed by caller if needed)
double ck_norm(const ThetaSeries& s, int k) {
    constexpr int nt = 512;
    double total = 0;
    ThetaSeries d = s;
    for (int j = 0; j <= k; ++j) {
        if (j > 0) d = d.derivative();
        total += d.samples(nt).cwiseAbs().maxCoeff();
    }
    return total;
}

ThetaSeries minus_const(ThetaSeries s, double v) {
    s.c[0] -= v * std::sqrt(2 * kPi);
    return s;
}

}  // namespace

double ClosedForm::operator()(double x, double s) const {
    const double a = amplitude;
    if (tag == "zero") return 0.0;
    if (tag == "eps_sin_k") return a * std::sin(k * x);
    if (tag == "eps_cos_k") return a * std::cos(k * x);
    if (tag == "eps_sin_pi_k") return a * std::sin(k * kPi * x);
    if (tag == "eps_cos_pi_k") return a * std::cos(k * kPi * x);
    if (tag == "eps_poly3") return a * std::pow(1 - x * x, 3);
    if (tag == "eps_bump_k") {
        const double b = std::sin(kPi * s);
        return a * b * b * std::cos(k * x);
    }
    fail(ErrorKind::InvalidParams, "unknown closed form '" + tag + "'");
}

double ClosedForm::derivative(double x, int order, double s) const {
    if (order == 0) return (*this)(x, s);
    if (order < 0 || order > 2) fail(ErrorKind::InvalidParams, "ClosedForm::derivative: order must be 0..2");
    const double a = amplitude;
    if (tag == "zero") return 0.0;
    if (tag == "eps_sin_k" || tag == "eps_cos_k" || tag == "eps_sin_pi_k" || tag == "eps_cos_pi_k") {
        const double w = (tag == "eps_sin_k" || tag == "eps_cos_k") ? k : k * kPi;
        const bool sine = tag == "eps_sin_k" || tag == "eps_sin_pi_k";
        if (order == 1) return sine ? a * w * std::cos(w * x) : -a * w * std::sin(w * x);
        return -w * w * (sine ? a * std::sin(w * x) : a * std::cos(w * x));
    }
    if (tag == "eps_poly3") {
        const double q = 1 - x * x;
        if (order == 1) return -6 * a * x * q * q;
        return a * (-6 * q * q + 24 * x * x * q);
    }
    if (tag == "eps_bump_k") {
        const double b = std::sin(kPi * s);
        return (order == 1 ? -a * k * std::sin(k * x) : -a * k * k * std::cos(k * x)) * b * b;
    }
    fail(ErrorKind::InvalidParams, "unknown closed form '" + tag + "'");
}

bool known_tag(const std::string& tag) {
    for (const char* t : {"zero", "eps_sin_k", "eps_cos_k", "eps_sin_pi_k", "eps_cos_pi_k",
                          "eps_poly3", "eps_bump_k"})
        if (tag == t) return true;
    return false;
}

AnnulusBoundary make_annulus_boundary(const BackgroundFlow& flow, int M, const AnnulusData& d) {
    for (const ClosedForm* f : {&d.b, &d.U1en, &d.U2en, &d.Een, &d.Phiex, &d.Ken, &d.Sen}) {
        if (!known_tag(f->tag)) fail(ErrorKind::InvalidParams, "unknown closed form '" + f->tag + "'");
        if (f != &d.b && f->depends_on_radius())
            fail(ErrorKind::InvalidParams, "eps_bump_k is only meaningful for b");
        if (f->k < 0 || f->k > M)
            fail(ErrorKind::InvalidParams, "closed-form wavenumber exceeds the mode truncation");
    }
    const auto& p = flow.params;
    AnnulusBoundary bd;
    bd.U1en = series_of(d.U1en, p.U1_0, M);
    bd.U2en = series_of(d.U2en, p.U2_0, M);
    bd.Een = series_of(d.Een, p.E0, M);
    bd.Phiex = series_of(d.Phiex, flow.Phi.back(), M);
    bd.Ken = series_of(d.Ken, flow.K0, M);
    bd.Sen = series_of(d.Sen, p.S0, M);
    const double b0 = p.b0, r0 = flow.r0, w = flow.r1 - flow.r0;
    const ClosedForm bf = d.b;
    bd.b = [bf, b0, r0, w](double r, double t) { return b0 + bf(t, (r - r0) / w); };
    return bd;
}

double omega1(const BackgroundFlow& flow, const AnnulusBoundary& bd) {
    const auto& p = flow.params;
    double w = ck_norm(minus_const(bd.U1en, p.U1_0), 3) + ck_norm(minus_const(bd.U2en, p.U2_0), 4) +
               ck_norm(minus_const(bd.Een, p.E0), 4) + ck_norm(minus_const(bd.Phiex, flow.Phi.back()), 4);

    // C^2 of b - b0 by centered differences on a fine grid
    constexpr int nr = 65, nt = 256;
    const double hr = (flow.r1 - flow.r0) / (nr - 1), ht = 2 * kPi / nt;
    Eigen::MatrixXd v(nr, nt);
    for (int i = 0; i < nr; ++i)
        for (int l = 0; l < nt; ++l) v(i, l) = bd.b(flow.r0 + i * hr, l * ht) - p.b0;
    double m[6] = {0, 0, 0, 0, 0, 0};
    for (int i = 0; i < nr; ++i) {
        const int im = std::max(i - 1, 0), ip = std::min(i + 1, nr - 1);
        const int ic = std::clamp(i, 1, nr - 2);
        for (int l = 0; l < nt; ++l) {
            const int lm = (l + nt - 1) % nt, lp = (l + 1) % nt;
            m[0] = std::max(m[0], std::abs(v(i, l)));
            m[1] = std::max(m[1], std::abs((v(ip, l) - v(im, l)) / ((ip - im) * hr)));
            m[2] = std::max(m[2], std::abs((v(i, lp) - v(i, lm)) / (2 * ht)));
            m[3] = std::max(m[3], std::abs((v(ic + 1, l) - 2 * v(ic, l) + v(ic - 1, l)) / (hr * hr)));
            m[4] = std::max(m[4], std::abs((v(i, lp) - 2 * v(i, l) + v(i, lm)) / (ht * ht)));
            m[5] = std::max(m[5], std::abs((v(ip, lp) - v(ip, lm) - v(im, lp) + v(im, lm)) /
                                           ((ip - im) * hr * 2 * ht)));
        }
    }
    for (double x : m) w += x;
    return w;
}

double omega2(const BackgroundFlow& flow, const AnnulusBoundary& bd) {
    return ck_norm(minus_const(bd.Ken, flow.K0), 4) + ck_norm(minus_const(bd.Sen, flow.params.S0), 4);
}

}  // namespace spiral
