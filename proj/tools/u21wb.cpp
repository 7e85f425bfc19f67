// Command-line driver: runs the verification suite against the finite
// models of U(2,1) and emits the weight / det-twist tables.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>

#include "u21/checks.hpp"
#include "u21/tables.hpp"

using namespace u21;

namespace {

void print_report_text(const CheckReport& r) {
    std::printf("[%-12s] %-26s %7.0fms  %s\n", r.status.c_str(), r.id.c_str(), r.wall_ms,
                r.statement.c_str());
    if (!r.witness.empty()) std::printf("%s\n", r.witness.c_str());
}

void print_report_json(const CheckReport& r) {
    nlohmann::json j{{"id", r.id},         {"statement", r.statement}, {"params", r.params},
                     {"status", r.status}, {"witness", r.witness},     {"wall_ms", r.wall_ms}};
    std::printf("%s\n", j.dump().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-model workbench for the p-adic unitary group U(2,1)"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string filter = "*";
    std::string outdir = "tables";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--p", cfg.p, "odd prime residue characteristic");
        sub->add_option("--precision", cfg.precision, "working precision N (digits)");
        sub->add_option("--level", cfg.max_level, "deepest congruence level to build");
        sub->add_option("--seed", cfg.seed, "seed for all sampled checks");
        sub->add_option("--chi1-pi", cfg.chi1_pi, "distinguished character: chi1 at p");
        sub->add_option("--chi1-teich", cfg.chi1_teich, "distinguished character: unit exponent");
        sub->add_option("--chi2", cfg.chi2, "distinguished character: norm-one exponent");
    };

    CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
    add_common(verify);
    verify->add_option("--filter", filter, "glob over check ids (default *)");
    verify->add_flag("--json", cfg.json, "one JSON report per line");

    CLI::App* tables = app.add_subcommand("tables", "emit the weight and det-twist tables");
    add_common(tables);
    tables->add_option("--out", outdir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            auto reports = run_suite(cfg, filter);
            int failed = 0;
            for (const auto& r : reports) {
                if (cfg.json)
                    print_report_json(r);
                else
                    print_report_text(r);
                if (r.status == "fail") ++failed;
            }
            if (!cfg.json)
                std::printf("%zu checks, %d failed\n", reports.size(), failed);
            return failed ? 1 : 0;
        }
        if (tables->parsed()) {
            cfg.validate();
            Workbench WB(cfg);
            emit_tables(WB, outdir);
            std::printf("wrote %s/weights.{tsv,json} and %s/dettwists.{tsv,json}\n",
                        outdir.c_str(), outdir.c_str());
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
