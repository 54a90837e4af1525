#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spiral/axisym.hpp"
#include "spiral/boundary.hpp"
#include "spiral/coeffs.hpp"
#include "spiral/errors.hpp"
#include "spiral/irrotational.hpp"
#include "spiral/multiplier.hpp"
#include "spiral/rotational.hpp"

namespace spiralflow {

using namespace spiral;
using nlohmann::json;

namespace {

json form_json(const ClosedForm& f) { return json{{"tag", f.tag}, {"amplitude", f.amplitude}, {"k", f.k}}; }

json residuals_json(const FlowResiduals& r) {
    return json{{"continuity_max", r.continuity_max}, {"continuity_l2", r.continuity_l2},
                {"curl_max", r.curl_max},             {"curl_l2", r.curl_l2},
                {"poisson_max", r.poisson_max},       {"poisson_l2", r.poisson_l2},
                {"bernoulli_defect", r.bernoulli_defect}};
}

// rows (r, coordinate, value) of a sampled field
std::string grid_csv(const std::string& field, const std::string& run_id, const std::string& coord,
                     const std::vector<double>& r, const Eigen::VectorXd& x, const Eigen::MatrixXd& v) {
    std::vector<std::vector<double>> rows;
    rows.reserve(v.size());
    for (int i = 0; i < v.rows(); ++i)
        for (int l = 0; l < v.cols(); ++l) rows.push_back({r[i], x[l], v(i, l)});
    return csv_text(field, run_id, {"r", coord, "value"}, rows);
}

json point_json(const BackgroundFlow& f, int i) {
    return json{{"r", f.r[i]},   {"rho", f.rho[i]}, {"E", f.E[i]},     {"U1", f.U1[i]},     {"U2", f.U2[i]},
                {"P", f.P[i]},   {"Phi", f.Phi[i]}, {"c2", f.c2[i]},   {"M1sq", f.M1sq[i]}, {"M2sq", f.M2sq[i]}};
}

void run_background(const RunConfig& cfg, RunOutcome& out) {
    const BackgroundFlow f = integrate_background(cfg.params, cfg.r1, cfg.refined_radial_nodes());
    auto& res = out.report["results"];
    res["background.integrate_background"] = {
        {"J1", f.J1}, {"J2", f.J2}, {"K0", f.K0}, {"nodes", f.n()}, {"at_r0", point_json(f, 0)},
        {"at_r1", point_json(f, f.n() - 1)}, {"bernoulli_defect", bernoulli_defect(f)},
        {"richardson_error", f.richardson_error}};
    res["background.richardson_order"] = richardson_order(cfg.params, cfg.r1, cfg.refined_radial_nodes());
    const AdmissibleRadius R = admissible_outer_radius(cfg.params, cfg.r_max, cfg.admissible_tol);
    res["background.admissible_outer_radius"] = {{"R", R.R}, {"flagged", R.flagged}, {"r_max", cfg.r_max},
                                                 {"tol", cfg.admissible_tol}};
    const MachProfiles mp = mach_profiles(f);
    res["background.mach_profiles"] = {{"ode_residual_M1", mp.ode_residual_M1}, {"ode_residual_M2", mp.ode_residual_M2}};

    for (const Check& c : background_invariants(f, cfg.tol.bernoulli, "r1=" + std::to_string(cfg.r1)))
        out.checks.push_back(c);
    out.checks.push_back(check_true("admissible window nonempty", "r_max", !R.flagged));

    std::vector<std::vector<double>> rows;
    for (int i = 0; i < f.n(); ++i)
        rows.push_back({f.r[i], f.rho[i], f.E[i], f.U1[i], f.U2[i], f.P[i], f.Phi[i], f.c2[i], f.M1sq[i], f.M2sq[i]});
    out.files.push_back({"background.csv", csv_text("background", cfg.run_id,
                                                    {"r", "rho", "E", "U1", "U2", "P", "Phi", "c2", "M1sq", "M2sq"},
                                                    rows)});
}

void run_certify(const RunConfig& cfg, RunOutcome& out) {
    const BackgroundFlow f = integrate_background(cfg.params, cfg.r1, cfg.refined_radial_nodes());
    const RadialCoeffs rc = linear_coeffs(f);
    auto& res = out.report["results"];
    res["coeffs.linear_coeffs"] = {{"dual_form_discrepancy", rc.dual_form_discrepancy},
                                   {"corrected_relation_residual", rc.corrected_relation_residual},
                                   {"printed_relation_residual", rc.printed_relation_residual},
                                   {"theta_r1", rc.theta_r1}};
    const MultiplierCertificate c = certify(f, rc, nullptr, cfg.certify_delta);
    res["multiplier.certify"] = {
        {"certified", c.certified},       {"r1", f.r1},
        {"lambda0", c.lambda0},           {"Q_end", c.Q_end},
        {"a0", c.frak_a0},                {"a1", c.frak_a1},
        {"a1_tilde", c.frak_a1_tilde},    {"a1_hat", c.frak_a1_hat},
        {"a2", c.frak_a2},                {"theta_r1", c.theta_r1},
        {"mu0", c.mu0},                   {"delta", c.delta},
        {"min_margin_psi_r", c.min_margin_psi_r}, {"min_margin_psi_t", c.min_margin_psi_t},
        {"forward_mismatch", c.forward_mismatch}, {"candidates_tried", c.candidates_tried},
        {"diagnostics", c.diagnostics}};
    out.checks.push_back(check_true("certified", "r1=" + std::to_string(f.r1), c.certified));
    out.checks.push_back(check_less("dual-form coefficients", "all nodes", rc.dual_form_discrepancy, 1e-9));
    if (c.certified) {
        const SoundnessCheck s = soundness_recheck(f, c, cfg.soundness_factor);
        res["multiplier.soundness_recheck"] = {{"factor", cfg.soundness_factor},
                                               {"min_margin_psi_r", s.min_margin_psi_r},
                                               {"min_margin_psi_t", s.min_margin_psi_t}};
        out.checks.push_back(check_at_least("finer-grid margins", std::to_string(cfg.soundness_factor) + "x grid",
                                            std::min(s.min_margin_psi_r, s.min_margin_psi_t), 0.5 * c.lambda0));
        std::vector<std::vector<double>> rows;
        for (size_t i = 0; i < c.r.size(); ++i) rows.push_back({c.r[i], c.Q[i], c.margin_psi_r[i], c.margin_psi_t[i]});
        out.files.push_back({"certificate.csv", csv_text("certificate", cfg.run_id,
                                                         {"r", "Q", "margin_psi_r", "margin_psi_t"}, rows)});
    }
}

AnnulusDisc disc_of(const RunConfig& cfg) {
    AnnulusDisc d;
    d.M = cfg.modes;
    d.ntheta = cfg.theta_samples;
    return d;
}

void flow_checks(RunOutcome& out, const std::string& where, double sup, double u1, double bern, double tol) {
    out.checks.push_back(check_greater("supersonic margin", where, sup, 0.0));
    out.checks.push_back(check_greater("min U1", where, u1, 0.0));
    out.checks.push_back(check_less("Bernoulli defect", where, bern, tol));
}

void run_irrotational(const RunConfig& cfg, RunOutcome& out) {
    const BackgroundFlow f = integrate_background(cfg.params, cfg.r1, cfg.refined_radial_nodes());
    const AnnulusDisc disc = disc_of(cfg);
    const AnnulusBoundary bd = make_annulus_boundary(f, disc.M, cfg.annulus);
    IterationConfig ic;
    ic.delta = cfg.tol.delta;
    ic.max_iters = cfg.tol.max_iters;
    ic.tol_fp = cfg.tol.fixed_point;
    const IrrotationalSolution s = solve_irrotational(f, bd, disc, ic);

    json hist = json::array();
    for (const auto& h : s.history) hist.push_back({{"increment", h.increment}, {"h4_norm", h.h4_norm}, {"mu0", h.mu0}});
    out.report["results"]["irrotational.solve"] = {
        {"iterations", s.iterations},     {"converged", s.converged},
        {"contraction_factor", s.contraction_factor}, {"omega1", s.omega1},
        {"c1_empirical", s.c1_empirical}, {"norm_h1", s.norm_h1},
        {"d0", s.d0},                     {"min_supersonic_margin", s.min_supersonic_margin},
        {"min_U1", s.min_U1},             {"aliasing_risk", s.aliasing_risk},
        {"history", hist},                {"residuals", residuals_json(s.residuals)}};
    out.checks.push_back(check_true("converged", "fixed point", s.converged));
    out.checks.push_back(check_less("contraction factor", "fixed point", s.contraction_factor, 1.0));
    flow_checks(out, "all samples", s.min_supersonic_margin, s.min_U1, s.residuals.bernoulli_defect,
                cfg.tol.bernoulli_flow);

    const Eigen::VectorXd th = basis::thetas(disc.samples());
    for (auto [name, m] : {std::pair{"U1", &s.U1}, {"U2", &s.U2}, {"Phi", &s.Phi}, {"rho", &s.rho}})
        out.files.push_back({std::string(name) + ".csv", grid_csv(name, cfg.run_id, "theta", f.r, th, *m)});
    out.files.push_back({"psi.csv", grid_csv("psi", cfg.run_id, "theta", f.r, th, s.psi.synthesize(disc.samples()))});
    out.files.push_back({"Psi.csv", grid_csv("Psi", cfg.run_id, "theta", f.r, th, s.Psi.synthesize(disc.samples()))});
}

void run_rotational(const RunConfig& cfg, RunOutcome& out) {
    const BackgroundFlow f = integrate_background(cfg.params, cfg.r1, cfg.refined_radial_nodes());
    const AnnulusDisc disc = disc_of(cfg);
    const AnnulusBoundary bd = make_annulus_boundary(f, disc.M, cfg.annulus);
    RotationalConfig rc;
    rc.inner.delta = cfg.tol.delta;
    rc.inner.max_iters = cfg.tol.max_iters;
    rc.outer_tol = cfg.tol.outer;
    rc.outer_max = cfg.tol.max_iters;
    rc.delta_e = cfg.tol.delta_e;
    const RotationalState s = solve_rotational(f, bd, disc, rc);

    const auto& R = s.residuals;
    out.report["results"]["rotational.solve"] = {
        {"outer_iterations", s.outer_iterations},
        {"converged", s.converged},
        {"outer_increments", s.outer_increments},
        {"outer_contraction", s.outer_contraction},
        {"inner_contraction", s.inner_contraction},
        {"inner_iterations_total", s.inner_iterations_total},
        {"delta_v", s.delta_v},
        {"delta_e", s.delta_e},
        {"sigma_p", s.sigma_p},
        {"omega1", s.omega1},
        {"omega2", s.omega2},
        {"norm_W_h1", s.norm_W_h1},
        {"norm_N_h1", s.norm_N_h1},
        {"min_supersonic_margin", s.min_supersonic_margin},
        {"min_U1", s.min_U1},
        {"residuals",
         {{"flow", residuals_json(R.flow)},
          {"vorticity_max", R.vorticity_max},
          {"vorticity_l2", R.vorticity_l2},
          {"transport_K_max", R.transport_K_max},
          {"transport_S_max", R.transport_S_max}}}};
    out.report["results"]["rotational.streamline_drift"] = {{"seeds", s.drift.seeds},
                                                            {"max_drift_K", s.drift.max_drift_K},
                                                            {"max_drift_S", s.drift.max_drift_S},
                                                            {"max_theta_mismatch", s.drift.max_theta_mismatch}};
    out.checks.push_back(check_true("converged", "outer loop", s.converged));
    out.checks.push_back(check_less("outer contraction", "outer loop", s.outer_contraction, 1.0));
    out.checks.push_back(check_less("streamline drift of K, S", "entrance seeds",
                                    std::max(s.drift.max_drift_K, s.drift.max_drift_S), cfg.tol.drift_rotational));
    flow_checks(out, "all samples", s.min_supersonic_margin, s.min_U1, R.flow.bernoulli_defect,
                cfg.tol.bernoulli_flow);

    const Eigen::VectorXd th = basis::thetas(disc.samples());
    for (auto [name, m] : {std::pair{"U1", &s.U1}, {"U2", &s.U2}, {"Phi", &s.Phi}, {"rho", &s.rho}, {"K", &s.K},
                           {"S", &s.S}})
        out.files.push_back({std::string(name) + ".csv", grid_csv(name, cfg.run_id, "theta", f.r, th, *m)});
}

void run_axisym(const RunConfig& cfg, RunOutcome& out) {
    const BackgroundFlow f = integrate_background(cfg.params, cfg.r1, cfg.refined_radial_nodes());
    const AxiBoundary bd = make_axi_boundary(f, cfg.slab);
    AxiConfig ac;
    ac.nz = cfg.refined_z_nodes();
    ac.delta = cfg.tol.delta_axi;
    ac.max_iters = cfg.tol.max_iters;
    ac.tol = cfg.tol.outer;
    ac.ode_tol = cfg.tol.ode;
    ac.threads = cfg.threads;
    const AxiState s = solve_axisym(f, bd, ac);

    const auto& R = s.residuals;
    const auto& A = s.audit;
    out.report["results"]["axisym.solve"] = {
        {"iterations", s.iterations},
        {"converged", s.converged},
        {"increments", s.increments},
        {"contraction", s.contraction},
        {"norm_c1", s.norm_c1},
        {"sizes", {{"omega3", s.sizes.omega3}, {"omega4", s.sizes.omega4}, {"omega5", s.sizes.omega5},
                   {"sigma_v", s.sizes.sigma_v()}}},
        {"min_supersonic_margin", s.min_supersonic_margin},
        {"min_U1", s.min_U1},
        {"residuals",
         {{"continuity", R.continuity}, {"curl", R.curl}, {"poisson", R.poisson},
          {"transport_rU2", R.transport_rU2}, {"transport_K", R.transport_K}, {"transport_S", R.transport_S},
          {"divergence_identity", R.divergence_identity}}}};
    out.report["results"]["axisym.coercivity"] = {{"lambda_min", s.coercive.lambda_min},
                                                  {"lambda_psi", s.coercive.lambda_psi},
                                                  {"lambda_Psi", s.coercive.lambda_Psi},
                                                  {"cross_term_defect", s.coercive.cross_term_defect}};
    out.report["results"]["axisym.audit"] = {{"wall_exact", A.wall_exact}, {"wall_fd", A.wall_fd},
                                             {"drift_rU2", A.drift_rU2}, {"drift_K", A.drift_K},
                                             {"drift_S", A.drift_S}};
    out.checks.push_back(check_true("converged", "outer loop", s.converged));
    out.checks.push_back(check_at_most("contraction factor", "outer loop", s.contraction, 2.0 / 3.0));
    out.checks.push_back(check_greater("coercivity bound", "weak form", s.coercive.lambda_min, 0.0));
    out.checks.push_back(check_less("trajectory conservation of rU2, K, S", "all nodes",
                                    std::max({A.drift_rU2, A.drift_K, A.drift_S}), cfg.tol.drift_axisym));
    out.checks.push_back(check_less("wall compatibility", "z = -1, 1", A.wall_exact, cfg.tol.wall));
    out.checks.push_back(check_greater("supersonic margin", "all nodes", s.min_supersonic_margin, 0.0));
    out.checks.push_back(check_greater("min U1", "all nodes", s.min_U1, 0.0));

    const Eigen::VectorXd& z = s.z;
    for (auto [name, m] : {std::pair{"T1", &s.T1}, {"T2", &s.T2}, {"T3", &s.T3}, {"T4", &s.T4}, {"T5", &s.T5},
                           {"T6", &s.T6}})
        out.files.push_back({std::string(name) + ".csv", grid_csv(name, cfg.run_id, "z", f.r, z, *m)});
}

void run_verify(const RunConfig& cfg, RunOutcome& out) {
    for (const CriterionResult& c : verify_all(cfg.threads)) {
        json checks = json::array();
        for (const Check& k : c.checks) {
            checks.push_back(to_json(k));
            Check tagged = k;
            tagged.where = "criterion " + std::to_string(c.id) + ": " + k.where;
            out.checks.push_back(tagged);
        }
        out.report["results"]["verify.criterion_" + std::to_string(c.id)] = {
            {"title", c.title}, {"pass", c.pass()}, {"details", c.details}, {"checks", checks}};
    }
}

}  // namespace

bool RunOutcome::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string csv_text(const std::string& field, const std::string& run_id, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "# field=" << field << " run=" << run_id << "\n";
    for (size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << columns[k];
    os << "\n";
    for (const auto& row : rows) {
        for (size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << row[k];
        os << "\n";
    }
    return os.str();
}

json echo(const RunConfig& cfg) {
    const auto& p = cfg.params;
    json j{{"command", to_string(cfg.command)},
           {"run_id", cfg.run_id},
           {"params", {{"gamma", p.gamma}, {"r0", p.r0}, {"b0", p.b0}, {"rho0", p.rho0}, {"U1_0", p.U1_0},
                       {"U2_0", p.U2_0}, {"S0", p.S0}, {"E0", p.E0}}},
           {"grid", {{"r1", cfg.r1}, {"radial_nodes", cfg.refined_radial_nodes()}, {"modes", cfg.modes},
                     {"theta_samples", cfg.theta_samples}, {"z_nodes", cfg.refined_z_nodes()}, {"refine", cfg.refine}}},
           {"tolerances", {{"fixed_point", cfg.tol.fixed_point}, {"outer", cfg.tol.outer}, {"delta", cfg.tol.delta},
                           {"delta_e", cfg.tol.delta_e}, {"delta_axi", cfg.tol.delta_axi},
                           {"max_iters", cfg.tol.max_iters}, {"ode", cfg.tol.ode}, {"bernoulli", cfg.tol.bernoulli},
                           {"bernoulli_flow", cfg.tol.bernoulli_flow}, {"drift_rotational", cfg.tol.drift_rotational},
                           {"drift_axisym", cfg.tol.drift_axisym}, {"wall", cfg.tol.wall}}},
           {"background", {{"r_max", cfg.r_max}, {"admissible_tol", cfg.admissible_tol}}},
           {"certify", {{"delta", cfg.certify_delta}, {"soundness_factor", cfg.soundness_factor}}}};
    if (cfg.command == Command::SolveAxisym) {
        const auto& d = cfg.slab;
        j["boundary"] = {{"b", form_json(d.b)},         {"U2en", form_json(d.U2en)},   {"U3en", form_json(d.U3en)},
                         {"Ken", form_json(d.Ken)},     {"Sen", form_json(d.Sen)},     {"Phien", form_json(d.Phien)},
                         {"U1ex", form_json(d.U1ex)},   {"Phiex", form_json(d.Phiex)}};
    } else {
        const auto& d = cfg.annulus;
        j["boundary"] = {{"b", form_json(d.b)},       {"U1en", form_json(d.U1en)}, {"U2en", form_json(d.U2en)},
                         {"Een", form_json(d.Een)},   {"Phiex", form_json(d.Phiex)}, {"Ken", form_json(d.Ken)},
                         {"Sen", form_json(d.Sen)}};
    }
    return j;
}

RunOutcome execute(const RunConfig& cfg) {
    RunOutcome out;
    out.report = {{"run_id", cfg.run_id}, {"command", to_string(cfg.command)}, {"input", echo(cfg)},
                  {"results", json::object()}};
    try {
        switch (cfg.command) {
            case Command::Background: run_background(cfg, out); break;
            case Command::Certify: run_certify(cfg, out); break;
            case Command::SolveIrrotational: run_irrotational(cfg, out); break;
            case Command::SolveRotational: run_rotational(cfg, out); break;
            case Command::SolveAxisym: run_axisym(cfg, out); break;
            case Command::VerifyAll: run_verify(cfg, out); break;
        }
    } catch (const SolverError& e) {
        out.checks.push_back(check_true(std::string("solver error ") + to_string(e.kind()), e.what(), false));
        out.files.clear();
    }
    json checks = json::array(), failures = json::array();
    for (const Check& c : out.checks) {
        checks.push_back(to_json(c));
        if (!c.pass) failures.push_back(to_json(c));
    }
    out.report["checks"] = checks;
    out.report["failures"] = failures;
    out.report["pass"] = out.ok();
    return out;
}

void write_outputs(const RunOutcome& out, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream os(fs::path(dir) / "report.json");
        if (!os) throw std::runtime_error("cannot write " + dir + "/report.json");
        os << out.report.dump(2) << "\n";
    }
    for (const Artifact& a : out.files) {
        std::ofstream os(fs::path(dir) / a.file);
        if (!os) throw std::runtime_error("cannot write " + dir + "/" + a.file);
        os << a.content;
    }
}

}  // namespace spiralflow
