#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"spiralflow: supersonic spiral flows of the steady Euler-Poisson system"};
    std::string config_path, out_dir;
    int threads = -1, refine = 0;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_option("--threads", threads, "worker threads, 0 for hardware concurrency")->check(CLI::NonNegativeNumber);
    app.add_option("--refine", refine, "grid-refinement multiplier")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    using spiralflow::ConfigError;
    spiralflow::RunConfig cfg;
    try {
        cfg = spiralflow::load_config(config_path);
    } catch (const ConfigError& e) {
        nlohmann::json err{{"pass", false},
                           {"failures", {{{"name", "config"}, {"where", config_path}, {"message", e.what()}}}}};
        std::cerr << err.dump(2) << "\n";
        return 1;
    }
    if (!out_dir.empty()) cfg.output = out_dir;
    if (threads >= 0) cfg.threads = threads;
    if (refine > 0) cfg.refine = refine;

    const spiralflow::RunOutcome out = spiralflow::execute(cfg);
    try {
        spiralflow::write_outputs(out, cfg.output);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    for (const auto& c : out.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " [" << c.where << "] value=" << c.value << " "
                  << c.bound << "\n";
    if (!out.ok()) {
        std::cerr << out.report["failures"].dump(2) << "\n";
        return 1;
    }
    return 0;
}
