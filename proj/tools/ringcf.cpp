// ringcf: constellations, rate sweeps and lattice demos from JSON configs.

#include "ringcf/app.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    using namespace ringcf;
    CLI::App cli{"Ring-based compute-and-forward toolkit"};
    cli.set_version_flag("--version", std::string(kVersion));
    cli.require_subcommand(1);

    app::Options o;
    std::string config, out;
    uint64_t seed = 0;
    int64_t samples = 0;

    auto common = [&](CLI::App* sub, bool needs_config, bool mc) {
        auto* c = sub->add_option("-c,--config", config, "JSON config file")->check(CLI::ExistingFile);
        if (needs_config) c->required();
        sub->add_option("-o,--out", out, "output path prefix (overrides config 'output')");
        sub->add_option("-t,--threads", o.threads, "worker threads (default: hardware)")->check(CLI::NonNegativeNumber);
        sub->add_flag("-q,--quiet", o.quiet, "less console output");
        if (mc) {
            sub->add_option("-s,--seed", seed, "master seed")->required();
            sub->add_option("-n,--samples", samples, "Monte-Carlo samples per cell (overrides config)")
                ->check(CLI::PositiveNumber);
        }
    };
    auto* c_con = cli.add_subcommand("constellation", "dump points and labels, check the homomorphism");
    common(c_con, true, false);
    auto* c_rates = cli.add_subcommand("rates", "Monte-Carlo rate sweep");
    common(c_rates, true, true);
    auto* c_lat = cli.add_subcommand("lattice-demo", "integer lattice example, closure and second moment");
    common(c_lat, false, true);
    auto* c_ver = cli.add_subcommand("verify", "run the built-in golden checks");
    common(c_ver, false, true);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = cli.exit(e);
        return rc == 0 ? 0 : app::config_error;
    }

    if (!config.empty()) o.config = config;
    if (!out.empty()) o.out = out;
    if (!cli.got_subcommand(c_con)) o.seed = seed;
    if (samples > 0) o.samples = samples;
    if (o.threads > 0) set_default_threads(o.threads);

    if (cli.got_subcommand(c_con)) return app::guarded([&] { return app::cmd_constellation(o); });
    if (cli.got_subcommand(c_rates)) return app::guarded([&] { return app::cmd_rates(o); });
    if (cli.got_subcommand(c_lat)) return app::guarded([&] { return app::cmd_lattice_demo(o); });
    return app::guarded([&] { return app::cmd_verify(o); });
}
