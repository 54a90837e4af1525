#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <chrono>
#include <random>
#include <sstream>

#include "spiral/axisym.hpp"
#include "spiral/boundary.hpp"
#include "spiral/coeffs.hpp"
#include "spiral/errors.hpp"
#include "spiral/irrotational.hpp"
#include "spiral/linbvp.hpp"
#include "spiral/multiplier.hpp"
#include "spiral/rotational.hpp"

namespace spiralflow {

using namespace spiral;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

Check make(const std::string& name, const std::string& where, double value, const std::string& bound,
           double margin, bool pass) {
    return Check{name, where, value, bound, margin, pass};
}

// keep the worst instance of each named check
void merge_worst(std::vector<Check>& agg, const std::vector<Check>& more) {
    for (const Check& c : more) {
        auto it = std::find_if(agg.begin(), agg.end(), [&](const Check& a) { return a.name == c.name; });
        if (it == agg.end())
            agg.push_back(c);
        else if (c.margin < it->margin || (!c.pass && it->pass))
            *it = c;
    }
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

// halfway into the admissible window (search capped at r0 + 0.5)
double half_window_r1(const BackgroundParams& p) {
    const AdmissibleRadius R = admissible_outer_radius(p, p.r0 + 0.5, 1e-8, 256);
    return p.r0 + 0.5 * (R.R - p.r0);
}

// annulus width of the reference run (0.05) unless the window is narrower
double sample_r1(const BackgroundParams& p) { return std::min(p.r0 + 0.05, half_window_r1(p)); }

AnnulusData annulus_data(double w) {
    AnnulusData d;
    d.U1en = {"eps_sin_k", w, 1};
    d.U2en = {"eps_cos_k", w, 2};
    d.Een = {"eps_sin_k", w, 1};
    d.Phiex = {"eps_cos_k", w, 1};
    d.b = {"eps_bump_k", w, 1};
    return d;
}

AxiData slab_data(double eps) {
    AxiData d;
    d.U3en = {"eps_poly3", eps, 1};
    d.U2en = {"eps_cos_pi_k", eps, 1};
    d.Ken = {"eps_cos_pi_k", eps, 1};
    d.Sen = {"eps_cos_pi_k", eps, 2};
    d.Phien = {"eps_cos_pi_k", eps, 1};
    d.U1ex = {"eps_cos_pi_k", eps, 1};
    d.Phiex = {"eps_cos_pi_k", eps, 2};
    d.b = {"eps_bump_k", eps, 1};
    return d;
}

}  // namespace

Check check_less(const std::string& name, const std::string& where, double value, double limit) {
    return make(name, where, value, "< " + fmt(limit), limit - value, value < limit);
}

Check check_at_most(const std::string& name, const std::string& where, double value, double limit) {
    return make(name, where, value, "<= " + fmt(limit), limit - value, value <= limit);
}

Check check_greater(const std::string& name, const std::string& where, double value, double limit) {
    return make(name, where, value, "> " + fmt(limit), value - limit, value > limit);
}

Check check_at_least(const std::string& name, const std::string& where, double value, double limit) {
    return make(name, where, value, ">= " + fmt(limit), value - limit, value >= limit);
}

Check check_within(const std::string& name, const std::string& where, double value, double lo, double hi) {
    return make(name, where, value, "in [" + fmt(lo) + ", " + fmt(hi) + "]", std::min(value - lo, hi - value),
                value >= lo && value <= hi);
}

Check check_true(const std::string& name, const std::string& where, bool ok) {
    return make(name, where, ok ? 1.0 : 0.0, "true", ok ? 1.0 : -1.0, ok);
}

json to_json(const Check& c) {
    return json{{"name", c.name}, {"where", c.where}, {"value", c.value},
                {"bound", c.bound}, {"margin", c.margin}, {"pass", c.pass}};
}

bool CriterionResult::pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::vector<BackgroundParams> admissible_sample(int count, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<BackgroundParams> out;
    while (static_cast<int>(out.size()) < count) {
        BackgroundParams p;
        p.gamma = 3.0 + 2.0 * u(gen);
        p.r0 = 1.0 + 2.0 * u(gen);
        p.rho0 = 0.2 + 0.8 * u(gen);
        p.S0 = 0.3 * u(gen);
        p.b0 = p.rho0 * (0.1 + 0.8 * u(gen));
        p.E0 = 0.1 + 0.9 * u(gen);
        const double c2 = p.c2_0(), top = 2 * p.r0 * p.r0 * p.rho0;
        if (!(c2 < top)) continue;
        p.U1_0 = std::sqrt(c2) * (0.2 + 0.6 * u(gen));
        p.U2_0 = std::sqrt(c2 + (top - c2) * (0.1 + 0.8 * u(gen)));
        try {
            p.validate();
        } catch (const SolverError&) {
            continue;
        }
        out.push_back(p);
    }
    return out;
}

std::vector<Check> background_invariants(const BackgroundFlow& f, double bernoulli_tol, const std::string& where) {
    double j1 = 0, j2 = 0, m1 = 0, msum = 1e300, drho = 1e300, dm2 = -1e300, m1rise = -1e300, rE = 1e300;
    const double r0E0 = f.params.r0 * f.params.E0;
    for (int i = 0; i < f.n(); ++i) {
        j1 = std::max(j1, std::abs(f.r[i] * f.rho[i] * f.U1[i] - f.J1) / f.J1);
        j2 = std::max(j2, std::abs(f.r[i] * f.U2[i] - f.J2) / std::abs(f.J2));
        m1 = std::max(m1, f.M1sq[i]);
        msum = std::min(msum, f.M1sq[i] + f.M2sq[i]);
        m1rise = std::max(m1rise, f.M1sq[i] - f.M1sq[0]);
        if (i > 0) {
            rE = std::min(rE, f.r[i] * f.E[i] - r0E0);
            drho = std::min(drho, f.rho[i] - f.rho[i - 1]);
            dm2 = std::max(dm2, f.M2sq[i] - f.M2sq[i - 1]);
        }
    }
    return {
        check_less("J1 consistency", where, j1, 1e-12),
        check_less("J2 consistency", where, j2, 1e-12),
        check_less("M1^2 < 1", where, m1, 1.0),
        check_greater("M1^2 + M2^2 > 1", where, msum, 1.0),
        check_at_least("rho nondecreasing", where, drho, 0.0),
        check_less("M2^2 strictly decreasing", where, dm2, 0.0),
        check_at_most("M1^2 <= M1^2(r0)", where, m1rise, 1e-14),
        check_greater("r E > r0 E0", where, rE, 0.0),
        check_less("Bernoulli defect", where, bernoulli_defect(f), bernoulli_tol),
    };
}

CriterionResult verify_background() {
    CriterionResult out{1, "background suite"};
    const auto sample = admissible_sample(100, 20261015u);
    std::vector<Check> agg;
    double wide = 0;
    for (size_t s = 0; s < sample.size(); ++s) {
        const std::string where = "sample " + std::to_string(s);
        try {
            const BackgroundFlow f = integrate_background(sample[s], sample_r1(sample[s]), 1024);
            merge_worst(agg, background_invariants(f, 1e-10, where));
            wide = std::max(wide, bernoulli_defect(integrate_background(sample[s], half_window_r1(sample[s]), 1024, false)));
        } catch (const SolverError& e) {
            agg.push_back(check_true(std::string("integrates (") + e.what() + ")", where, false));
        }
    }
    out.checks = agg;
    const double ord = richardson_order(reference_params(), 2.05, 33);
    out.checks.push_back(check_within("Richardson order", "reference, r1=2.05", ord, 3.5, 4.5));
    out.details = {{"samples", sample.size()}, {"nodes", 1024}, {"richardson_order", ord},
                   {"bernoulli_defect_half_window", wide}};
    return out;
}

CriterionResult verify_certificate() {
    CriterionResult out{2, "multiplier certificate"};
    const BackgroundParams p = reference_params();
    const BackgroundFlow f = integrate_background(p, 2.01, 129);
    const RadialCoeffs rc = linear_coeffs(f);
    const MultiplierCertificate c = certify(f, rc, nullptr, 0.0);
    out.checks.push_back(check_true("certified", "r1=2.01", c.certified));
    if (c.certified) {
        const SoundnessCheck s = soundness_recheck(f, c, 4);
        const double m = std::min(s.min_margin_psi_r, s.min_margin_psi_t);
        out.checks.push_back(check_at_least("4x finer margins", "r1=2.01", m, 0.5 * c.lambda0));
    }
    std::vector<double> cand;
    for (int k = 1; k <= 20; ++k) cand.push_back(p.r0 + 0.001 * k);
    json radii = json::array();
    double prev = 1e300, worst_rise = -1e300;
    for (double lam : {0.5, 2.0, 4.0, 8.0, 16.0}) {
        const double R = certified_radius(p, lam, cand, 129);
        radii.push_back({{"lambda0", lam}, {"radius", R}});
        worst_rise = std::max(worst_rise, R - prev);
        prev = R;
    }
    out.checks.push_back(check_at_most("certified radius nonincreasing in lambda0", "lambda0 in {0.5..16}",
                                       worst_rise, 0.0));
    out.details = {{"lambda0", c.lambda0}, {"Q_end", c.Q_end}, {"a0", c.frak_a0}, {"a2", c.frak_a2},
                   {"a1_hat", c.frak_a1_hat}, {"mu0", c.mu0}, {"radii", radii}};
    return out;
}

CriterionResult verify_linear() {
    CriterionResult out{3, "linear solver"};
    const BackgroundParams p = reference_params();
    const int M = 4, nt = 4 * M + 4;
    std::vector<double> errs, stab;
    double homog = 0;
    for (int n : {33, 65, 129}) {
        const BackgroundFlow f = integrate_background(p, 2.05, n, false);
        const RadialCoeffs rc = linear_coeffs(f);
        LinearCoefficients coef = barred_coefficients(f, rc, nt);
        const Eigen::VectorXd th = basis::thetas(nt);
        for (int i = 0; i < n; ++i)
            for (int l = 0; l < nt; ++l) coef.A12(i, l) += 0.05 * std::cos(th[l]);
        Eigen::MatrixXd F3(n, nt), F4(n, nt), ex(n, nt), exP(n, nt);
        const double L = f.r1 - f.r0;
        for (int i = 0; i < n; ++i) {
            const double r = f.r[i], x = r - f.r0, E = std::exp(x);
            const double P = x * x, P1 = 2 * x, P2 = 2;
            const double q = x * x * x - L * x * x, q1 = 3 * x * x - 2 * L * x, q2 = 6 * x - 2 * L;
            const double F = P * E, Fr = (P + P1) * E, Frr = (P + 2 * P1 + P2) * E;
            const double G = q * E, Gr = (q + q1) * E, Grr = (q + 2 * q1 + q2) * E;
            for (int l = 0; l < nt; ++l) {
                const double s = std::sin(th[l]), c = std::cos(th[l]);
                F3(i, l) = Frr * s + coef.A22(i, l) * F * s + 2 * coef.A12(i, l) * Fr * c + coef.a1[i] * Fr * s +
                           coef.a2(i, l) * F * c + coef.b1[i] * Gr * c - coef.b2[i] * G * s + coef.b3[i] * G * c;
                F4(i, l) = Grr * c + Gr * c / r - G * c / (r * r) + coef.a3[i] * Fr * s + coef.a4[i] * F * c -
                           coef.b4[i] * G * c;
                ex(i, l) = F * s;
                exP(i, l) = G * c;
            }
        }
        const LinearSolution sol = solve_linear(coef, F3, F4, LinearBC::homogeneous(M), M, false);
        errs.push_back(std::max((sol.psi.synthesize(nt) - ex).cwiseAbs().maxCoeff(),
                                (sol.Psi.synthesize(nt) - exP).cwiseAbs().maxCoeff()));
        const double num = std::hypot(h_norm(sol.psi, 1), h_norm(sol.Psi, 1));
        const double den = std::hypot(h_norm(analyze(F3, M, coef.grid).field, 0),
                                      h_norm(analyze(F4, M, coef.grid).field, 0));
        stab.push_back(num / den);

        const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, nt);
        const LinearSolution z = solve_linear(coef, Z, Z, LinearBC::homogeneous(M), M, false);
        homog = std::max({homog, z.psi.c.cwiseAbs().maxCoeff(), z.Psi.c.cwiseAbs().maxCoeff()});
    }
    out.checks.push_back(check_within("max-error ratio h/h2", "n=33->65", errs[0] / errs[1], 3.3, 4.7));
    out.checks.push_back(check_within("max-error ratio h2/h4", "n=65->129", errs[1] / errs[2], 3.3, 4.7));
    out.checks.push_back(check_less("homogeneous solution", "n=33,65,129", homog, 1e-10));
    const auto [lo, hi] = std::minmax_element(stab.begin(), stab.end());
    out.checks.push_back(check_less("H1 stability constant spread", "n=33,65,129", (*hi - *lo) / *lo, 0.1));
    out.details = {{"errors", errs}, {"stability_constants", stab}};
    return out;
}

CriterionResult verify_irrotational() {
    CriterionResult out{4, "irrotational suite"};
    const BackgroundParams p = reference_params();
    AnnulusDisc disc;
    disc.M = 8;
    IterationConfig cfg;
    cfg.tol_fp = 1e-10;
    double bern = 0, sup = 1e300, u1 = 1e300;
    bool all_conv = true;
    auto run = [&](int n, double w) {
        const BackgroundFlow f = integrate_background(p, 2.01, n);
        const AnnulusBoundary bd = make_annulus_boundary(f, disc.M, annulus_data(w));
        IrrotationalSolution s = solve_irrotational(f, bd, disc, cfg);
        bern = std::max(bern, s.residuals.bernoulli_defect);
        sup = std::min(sup, s.min_supersonic_margin);
        u1 = std::min(u1, s.min_U1);
        all_conv = all_conv && s.converged;
        return s;
    };
    const IrrotationalSolution z = run(65, 0.0);
    out.checks.push_back(check_true("zero data converges in 1 iteration", "n=65", z.converged && z.iterations == 1));
    out.checks.push_back(check_less("zero data solution", "n=65", z.norm_h1, 1e-12));
    const IrrotationalSolution a = run(65, 1e-3), b = run(65, 5e-4);
    out.checks.push_back(check_within("H1 ratio omega vs omega/2", "n=65", a.norm_h1 / b.norm_h1, 1.8, 2.2));

    std::vector<FlowResiduals> res;
    for (int n : {33, 65, 129}) res.push_back(n == 65 ? a.residuals : run(n, 1e-3).residuals);
    double oc = 1e300, ocurl = 1e300, op = 1e300;
    for (int k = 0; k < 2; ++k) {
        oc = std::min(oc, order(res[k].continuity_max, res[k + 1].continuity_max));
        ocurl = std::min(ocurl, order(res[k].curl_max, res[k + 1].curl_max));
        op = std::min(op, order(res[k].poisson_max, res[k + 1].poisson_max));
    }
    out.checks.push_back(check_at_least("continuity residual order", "n=33,65,129", oc, 1.9));
    out.checks.push_back(check_at_least("curl residual order", "n=33,65,129", ocurl, 1.9));
    out.checks.push_back(check_at_least("Poisson residual order", "n=33,65,129", op, 1.9));
    out.checks.push_back(check_less("Bernoulli defect", "all runs", bern, 1e-12));
    out.checks.push_back(check_greater("supersonic margin", "all runs", sup, 0.0));
    out.checks.push_back(check_greater("min U1", "all runs", u1, 0.0));
    out.checks.push_back(check_true("converged", "all runs", all_conv));
    out.details = {{"h1", {a.norm_h1, b.norm_h1}},
                   {"contraction", a.contraction_factor},
                   {"c1_empirical", a.c1_empirical},
                   {"continuity_max", {res[0].continuity_max, res[1].continuity_max, res[2].continuity_max}},
                   {"curl_max", {res[0].curl_max, res[1].curl_max, res[2].curl_max}},
                   {"poisson_max", {res[0].poisson_max, res[1].poisson_max, res[2].poisson_max}}};
    return out;
}

CriterionResult verify_rotational() {
    CriterionResult out{5, "rotational suite"};
    const BackgroundParams p = reference_params();
    const BackgroundFlow f = integrate_background(p, 2.01, 65);
    AnnulusDisc disc;
    disc.M = 8;
    const RadialGrid grid(f.r0, f.r1, f.n());
    RotationalConfig rc;
    rc.outer_tol = 1e-10;

    const double w = 1e-3;
    const AnnulusBoundary bd = make_annulus_boundary(f, disc.M, annulus_data(w));
    IterationConfig ic;
    ic.tol_fp = 1e-11;
    const IrrotationalSolution irr = solve_irrotational(f, bd, disc, ic);
    const RotationalState same = solve_rotational(f, bd, disc, rc);
    const double diff = std::hypot(sampled_h1(same.U1 - irr.U1, disc.M, grid),
                                   sampled_h1(same.U2 - irr.U2, disc.M, grid));
    out.checks.push_back(check_less("matches irrotational (K, S constant)", "n=65, M=8", diff, 10 * rc.outer_tol));

    std::vector<RotationalState> runs;
    for (double eps : {1e-3, 5e-4}) {
        AnnulusData d = annulus_data(eps);
        d.Ken = {"eps_sin_k", eps, 1};
        runs.push_back(solve_rotational(f, make_annulus_boundary(f, disc.M, d), disc, rc));
    }
    const RotationalState& s = runs[0];
    out.checks.push_back(check_true("converged", "eps=1e-3", s.converged && runs[1].converged));
    out.checks.push_back(check_less("streamline drift of K, S", "eps=1e-3",
                                    std::max(s.drift.max_drift_K, s.drift.max_drift_S), 1e-6));
    out.checks.push_back(check_less("outer contraction", "eps=1e-3", s.outer_contraction, 1.0));
    out.checks.push_back(check_within("H1 ratio eps vs eps/2", "eps=1e-3", s.norm_W_h1 / runs[1].norm_W_h1, 1.8, 2.2));
    out.details = {{"equivalence_h1", diff},
                   {"outer_iterations", s.outer_iterations},
                   {"outer_contraction", s.outer_contraction},
                   {"norm_W_h1", {s.norm_W_h1, runs[1].norm_W_h1}},
                   {"drift_K", s.drift.max_drift_K},
                   {"vorticity_residual", s.residuals.vorticity_max}};
    return out;
}

CriterionResult verify_axisym(int threads) {
    CriterionResult out{6, "axisymmetric suite"};
    const BackgroundParams p = reference_params();
    const double a = 1e-3;

    std::vector<double> e1, e3, e6, lam;
    for (int nr : {17, 33, 65}) {
        const int nz = nr;
        const BackgroundFlow f = integrate_background(p, 2.05, nr);
        const Eigen::VectorXd z = slab_nodes(nz);
        const double L = f.r1 - f.r0;
        AxiData d;
        d.U3en = {"eps_sin_pi_k", a, 1};
        d.Phien = {"eps_cos_pi_k", a, 1};
        d.U1ex = {"eps_cos_pi_k", 2 * a, 1};
        d.Phiex = {"eps_cos_pi_k", 2 * a, 1};
        const AxiBoundary bd = make_axi_boundary(f, d);
        EllipticSources s;
        s.Y1.resize(nr, nz);
        s.Y2 = s.Y3 = s.Y4 = s.Y1;
        Eigen::MatrixXd T1(nr, nz), T3(nr, nz), T6(nr, nz);
        for (int i = 0; i < nr; ++i) {
            const double r = f.r[i], S = (r - f.r0) / L, rho = f.rho[i], c2 = f.c2[i], u = f.U1[i];
            const double d1 = rho * (1 - u * u / c2), d2 = rho, d3 = rho * u / c2, d4 = rho / c2;
            for (int j = 0; j < nz; ++j) {
                const double C = std::cos(M_PI * z[j]), Sn = std::sin(M_PI * z[j]);
                T1(i, j) = a * (1 + S) * C;
                T3(i, j) = a * Sn * (1 + S);
                T6(i, j) = a * C * (1 + S * S);
                s.Y1(i, j) = r * d1 * T1(i, j) + r * d3 * T6(i, j);
                s.Y2(i, j) = r * d2 * T3(i, j);
                s.Y3(i, j) = a * Sn / L + a * M_PI * (1 + S) * Sn;
                s.Y4(i, j) = a * C * (2 / (L * L) + 2 * S / L / r - M_PI * M_PI * (1 + S * S)) + d3 * T1(i, j) -
                             d4 * T6(i, j);
            }
        }
        const EllipticResult e = elliptic_solve(f, bd, z, s);
        e1.push_back((e.T1 - T1).cwiseAbs().maxCoeff());
        e3.push_back((e.T3 - T3).cwiseAbs().maxCoeff());
        e6.push_back((e.T6 - T6).cwiseAbs().maxCoeff());
        lam.push_back(coercivity(f, z).lambda_min);
    }
    for (int k = 0; k < 2; ++k) {
        const std::string where = k == 0 ? "n=17->33" : "n=33->65";
        out.checks.push_back(check_within("manufactured T1 error ratio", where, e1[k] / e1[k + 1], 3.3, 4.7));
        out.checks.push_back(check_within("manufactured T3 error ratio", where, e3[k] / e3[k + 1], 3.3, 4.7));
        out.checks.push_back(check_within("manufactured T6 error ratio", where, e6[k] / e6[k + 1], 3.3, 4.7));
    }
    const auto [lo, hi] = std::minmax_element(lam.begin(), lam.end());
    out.checks.push_back(check_greater("coercivity bound", "n=17,33,65", *lo, 0.0));
    out.checks.push_back(check_less("coercivity spread under refinement", "n=17,33,65", (*hi - *lo) / *lo, 0.1));

    const BackgroundFlow f = integrate_background(p, 2.05, 33);
    AxiConfig cfg;
    cfg.threads = threads;
    {
        const AxiState st = solve_axisym(f, make_axi_boundary(f, AxiData{}), cfg);
        double mx = 0;
        for (const auto* T : {&st.T1, &st.T2, &st.T3, &st.T4, &st.T5, &st.T6}) mx = std::max(mx, T->cwiseAbs().maxCoeff());
        out.checks.push_back(check_at_most("zero data gives T = 0", "n=33", mx, 1e-14));
    }
    const AxiState st = solve_axisym(f, make_axi_boundary(f, slab_data(a)), cfg);
    const AxiState half = solve_axisym(f, make_axi_boundary(f, slab_data(0.5 * a)), cfg);
    const auto& A = st.audit;
    out.checks.push_back(check_true("converged", "eps=1e-3", st.converged && half.converged));
    out.checks.push_back(check_less("trajectory conservation of rU2, K, S", "eps=1e-3",
                                    std::max({A.drift_rU2, A.drift_K, A.drift_S}), 1e-8));
    out.checks.push_back(check_less("wall compatibility", "eps=1e-3", A.wall_exact, 1e-13));
    out.checks.push_back(check_at_most("contraction factor", "eps=1e-3", st.contraction, 2.0 / 3.0));
    out.checks.push_back(check_greater("supersonic margin", "eps=1e-3", st.min_supersonic_margin, 0.0));
    out.checks.push_back(check_greater("min U1", "eps=1e-3", st.min_U1, 0.0));
    out.details = {{"errors_T1", e1}, {"errors_T3", e3}, {"errors_T6", e6}, {"coercivity", lam},
                   {"iterations", st.iterations}, {"contraction", st.contraction},
                   {"norm_c1", {st.norm_c1, half.norm_c1}}, {"sigma_v", st.sizes.sigma_v()},
                   {"wall_fd", A.wall_fd}};
    return out;
}

CriterionResult verify_dual_forms() {
    CriterionResult out{7, "dual-form coefficients"};
    const auto sample = admissible_sample(100, 20261015u);
    double dual = 0, corrected = 0, printed = 0;
    for (const auto& p : sample) {
        const RadialCoeffs rc = linear_coeffs(integrate_background(p, sample_r1(p), 256, false));
        dual = std::max(dual, rc.dual_form_discrepancy);
        corrected = std::max(corrected, rc.corrected_relation_residual);
        printed = std::max(printed, rc.printed_relation_residual);
    }
    out.checks.push_back(check_less("a1, a2, a2-tilde two forms", "100 admissible samples", dual, 1e-9));
    out.checks.push_back(check_less("a2-tilde = a2 + A12 / r", "100 admissible samples", corrected, 1e-9));
    out.details = {{"dual_form_discrepancy", dual}, {"relation_a2t_minus_a2_plus_U1U2", printed}};
    return out;
}

std::vector<CriterionResult> verify_all(int threads,
                                       const std::function<void(const CriterionResult&, double)>& on_done) {
    const std::vector<std::pair<const char*, std::function<CriterionResult()>>> suite{
        {"background suite", verify_background},
        {"multiplier certificate", verify_certificate},
        {"linear solver", verify_linear},
        {"irrotational suite", verify_irrotational},
        {"rotational suite", verify_rotational},
        {"axisymmetric suite", [threads] { return verify_axisym(threads); }},
        {"dual-form coefficients", verify_dual_forms},
    };
    std::vector<CriterionResult> out;
    for (size_t k = 0; k < suite.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = suite[k].second();
        } catch (const SolverError& e) {
            r = CriterionResult{static_cast<int>(k) + 1, suite[k].first};
            r.checks.push_back(check_true(std::string(to_string(e.kind())) + ": " + e.what(), "solver", false));
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (on_done) on_done(r, sec);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace spiralflow
