#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "spiral/fields.hpp"

using namespace spiral;

namespace {

Eigen::MatrixXd sampled(const RadialGrid& g, int nt, double (*f)(double, double)) {
    const Eigen::VectorXd th = basis::thetas(nt);
    Eigen::MatrixXd s(g.n, nt);
    for (int i = 0; i < g.n; ++i)
        for (int l = 0; l < nt; ++l) s(i, l) = f(g.r(i), th[l]);
    return s;
}

}  // namespace

TEST_CASE("analysis of single modes") {
    const RadialGrid g(2.0, 2.05, 17);
    const int M = 4, nt = 4 * M + 4;
    const Analysis a = analyze(sampled(g, nt, [](double, double t) { return std::sin(t); }), M, g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < a.field.n_basis(); ++j)
            CHECK(a.field.c(i, j) == doctest::Approx(j == 1 ? std::sqrt(M_PI) : 0.0).epsilon(1e-13));
    const Analysis one = analyze(sampled(g, nt, [](double, double) { return 1.0; }), M, g);
    CHECK(one.field.c(3, 0) == doctest::Approx(std::sqrt(2 * M_PI)).epsilon(1e-13));
    CHECK_FALSE(one.aliasing_risk);
    CHECK_THROWS(analyze(Eigen::MatrixXd::Zero(g.n, 2 * M + 1), M, g));
}

TEST_CASE("top-mode energy flags aliasing risk") {
    const RadialGrid g(2.0, 2.05, 9);
    const int M = 3, nt = 24;
    const Eigen::VectorXd th = basis::thetas(nt);
    Eigen::MatrixXd s(g.n, nt);
    for (int i = 0; i < g.n; ++i)
        for (int l = 0; l < nt; ++l) s(i, l) = std::sin(M * th[l]) + std::sin((M + 1) * th[l]);
    CHECK(analyze(s, M, g).aliasing_risk);
}

TEST_CASE("synthesis inverts analysis on band-limited fields") {
    const RadialGrid g(2.0, 2.05, 33);
    const int M = 5, nt = 4 * M + 4;
    const Eigen::MatrixXd s = sampled(g, nt, [](double r, double t) { return r * std::cos(2 * t) + std::sin(5 * t) - 0.3; });
    const Analysis a = analyze(s, M, g);
    CHECK((a.field.synthesize(nt) - s).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("theta derivatives are exact per mode") {
    const RadialGrid g(2.0, 2.05, 9);
    const int M = 4, nt = 20;
    const AnnulusField s = analyze(sampled(g, nt, [](double, double t) { return std::sin(t); }), M, g).field;
    const Eigen::MatrixXd c = sampled(g, nt, [](double, double t) { return std::cos(t); });
    CHECK((s.dth().synthesize(nt) - c).cwiseAbs().maxCoeff() < 1e-13);
    const AnnulusField s3 = analyze(sampled(g, nt, [](double, double t) { return std::sin(3 * t); }), M, g).field;
    CHECK((s3.dthth().synthesize(nt) + 9 * s3.synthesize(nt)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("radial derivative is exact on low-degree polynomials") {
    const RadialGrid g(2.0, 2.05, 21);
    const int M = 2, nt = 12;
    const AnnulusField q = analyze(sampled(g, nt, [](double r, double) { return (r - 2.0) * (r - 2.0); }), M, g).field;
    const Eigen::MatrixXd d = sampled(g, nt, [](double r, double) { return 2 * (r - 2.0); });
    CHECK((q.dr().synthesize(nt) - d).cwiseAbs().maxCoeff() < 1e-10);
    const AnnulusField c = analyze(sampled(g, nt, [](double r, double t) { return std::pow(r - 2.0, 3) * std::cos(t); }), M, g).field;
    CHECK((c.drth().synthesize(nt) - c.dth().dr().synthesize(nt)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((c.dr().dth().c - c.dth().dr().c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("radial derivative converges at fourth order") {
    double prev = 0;
    for (int n : {17, 33, 65}) {
        const RadialGrid g(2.0, 2.5, n);
        Eigen::MatrixXd v(n, 1), ex(n, 1);
        for (int i = 0; i < n; ++i) {
            v(i, 0) = std::exp(g.r(i));
            ex(i, 0) = std::exp(g.r(i));
        }
        const double err = (radial_derivative(v, g.h()) - ex).cwiseAbs().maxCoeff();
        if (prev > 0) CHECK(prev / err > 12.0);
        prev = err;
    }
}

TEST_CASE("Sobolev norms") {
    const RadialGrid g(2.0, 2.05, 41);
    const int M = 4, nt = 20;
    const AnnulusField s = analyze(sampled(g, nt, [](double, double t) { return std::sin(t); }), M, g).field;
    CHECK(h_norm(s, 0) == doctest::Approx(std::sqrt(0.05 * M_PI)).epsilon(1e-12));
    CHECK(h_norm(s, 0) == doctest::Approx(0.3963).epsilon(1e-4));
    for (int k = 1; k <= 4; ++k) CHECK(h_norm(s, k) >= h_norm(s, k - 1));
    CHECK(h_norm(AnnulusField(M, g), 2) == 0.0);

    RectField f(g.nodes(), Eigen::VectorXd::LinSpaced(9, -1, 1));
    CHECK(h_norm(f, 1) == 0.0);
    f.v.setOnes();
    CHECK(h_norm(f, 0) == doctest::Approx(std::sqrt(0.05 * 2.0)).epsilon(1e-12));
    CHECK(h_norm(f, 1) >= h_norm(f, 0));
}

TEST_CASE("Parseval: coefficient norm equals quadrature norm") {
    const RadialGrid g(2.0, 2.05, 33);
    const int M = 3, nt = 16;
    const AnnulusField a = analyze(sampled(g, nt, [](double r, double t) { return r * std::sin(2 * t) + 0.5; }), M, g).field;
    const Eigen::VectorXd w = trapezoid_weights(g.n, g.h());
    const Eigen::MatrixXd s = a.synthesize(nt);
    double quad = 0, coef = 0;
    for (int i = 0; i < g.n; ++i) {
        quad += w[i] * s.row(i).squaredNorm() * 2 * M_PI / nt;
        coef += w[i] * a.c.row(i).squaredNorm();
    }
    CHECK(std::abs(quad - coef) < 1e-10);
    CHECK(std::sqrt(coef) == doctest::Approx(h_norm(a, 0)).epsilon(1e-12));
}

TEST_CASE("off-grid interpolation") {
    const RadialGrid g(2.0, 2.05, 33);
    const int M = 3, nt = 16;
    const AnnulusField a = analyze(sampled(g, nt, [](double r, double t) { return r * r * std::cos(t); }), M, g).field;
    CHECK(interpolate(a, 2.0217, 0.4) == doctest::Approx(2.0217 * 2.0217 * std::cos(0.4)).epsilon(1e-12));
}

TEST_CASE("CSV dump has a header and 17 digits") {
    const RadialGrid g(2.0, 2.05, 5);
    AnnulusField a(1, g);
    a.c(2, 1) = 1.0 / 3.0;
    const auto path = std::filesystem::temp_directory_path() / "spiral_fields_test.csv";
    write_csv(path.string(), "psi", "unit", a, 4);
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    CHECK(line == "# field=psi run=unit");
    std::getline(is, line);
    CHECK(line == "r,theta,value");
    int rows = 0;
    bool found = false;
    while (std::getline(is, line)) {
        ++rows;
        found = found || line.find(",0.1880631945159187") != std::string::npos;
    }
    CHECK(rows == 20);
    CHECK(found);  // (1/3) sin(pi/2) / sqrt(pi), last digit left free
    std::filesystem::remove(path);
}
