#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "spiral/axisym.hpp"
#include "spiral/background.hpp"
#include "spiral/boundary.hpp"

namespace spiralflow {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Command { Background, Certify, SolveIrrotational, SolveRotational, SolveAxisym, VerifyAll };

const char* to_string(Command c);

struct Tolerances {
    double fixed_point = 1e-10;  // H^1 increment (irrotational, rotational inner is 0.1 * outer)
    double outer = 1e-10;        // rotational outer loop and axisymmetric loop
    double delta = 100.0;        // iteration radius, H^4 (annulus)
    double delta_e = 100.0;      // rotational H^4 radius for (K, S)
    double delta_axi = 1.0;      // axisymmetric C^1 proxy radius
    int max_iters = 50;
    double ode = 1e-12;
    double bernoulli = 1e-10;    // background check
    double bernoulli_flow = 1e-12;
    double drift_rotational = 1e-6;
    double drift_axisym = 1e-8;
    double wall = 1e-13;
};

struct RunConfig {
    Command command = Command::Background;
    std::string run_id = "run";
    spiral::BackgroundParams params = spiral::reference_params();

    double r1 = 2.01;
    int radial_nodes = 65;
    int modes = 8;
    int theta_samples = 0;  // 0: 4M + 4
    int z_nodes = 33;

    spiral::AnnulusData annulus;
    spiral::AxiData slab;
    Tolerances tol;

    double r_max = 2.5;          // admissible window search
    double admissible_tol = 1e-8;
    double certify_delta = 0.0;
    int soundness_factor = 4;

    std::string output = "out";
    int threads = 0;
    int refine = 1;

    // grid sizes after --refine
    int refined_radial_nodes() const { return (radial_nodes - 1) * refine + 1; }
    int refined_z_nodes() const { return (z_nodes - 1) * refine + 1; }
};

// Throws ConfigError with a message naming the offending key.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

}  // namespace spiralflow
