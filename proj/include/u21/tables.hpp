#pragma once

// Table emission: the weight table (dimensions, lambda, reducibility of the
// finite series) over all torus characters for both maximal compacts, and
// the det-twist classification of all tame characters.  Output is TSV and
// JSON, byte-stable for a fixed (config, seed).

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "u21/checks.hpp"

namespace u21 {

struct WeightRow {
    std::string K;
    int64_t t1, t2;
    size_t fps_dim;
    bool fps_irreducible;
    size_t weight_dim;
    std::string lambda;
};

struct DetTwistRow {
    int64_t m1, t1, t2;
    bool is_twist;
    int64_t eta_exponent;
};

inline std::vector<WeightRow> weight_table(Workbench& WB) {
    const Fq2Field& F = WB.G().zp().residue_field();
    std::vector<WeightRow> rows;
    for (CompactLabel K : {CompactLabel::K0, CompactLabel::K1}) {
        const GammaCtx& Ga = WB.gamma(K);
        for (const TorusChar& chi : all_torus_chars(F)) {
            FiniteSeries PS(Ga, chi);
            bool irred;
            try {
                irred = is_irreducible(PS.as_module(),
                                       WB.check_seed("tables") ^ uint64_t(chi.e1 * 8 + chi.e2))
                            .status == IrredStatus::Irreducible;
            } catch (const Inconclusive&) {
                irred = false;
            }
            // the weight spun from the twisted series (as in the S-operator route)
            FiniteSeries PStw(Ga, torus_char_twist(F, chi));
            SpunWeight W = build_weight(PStw);
            std::vector<FqMatrix> rU, rUp;
            for (const auto& m : PStw.unipotent_actions(false))
                rU.push_back(restrict_action(F, W, m));
            for (const auto& m : PStw.unipotent_actions(true))
                rUp.push_back(restrict_action(F, W, m));
            FqMatrix beta = restrict_action(F, W, PStw.action(Ga.reduce(WB.G().beta_K(K))));
            std::string lam = fq2_str(F, lambda_beta(W.mod, rU, rUp, beta).lambda);
            rows.push_back({K == CompactLabel::K0 ? "K0" : "K1", chi.e1, chi.e2, PS.dim(), irred,
                            W.mod.dim, lam});
        }
    }
    return rows;
}

inline std::vector<DetTwistRow> dettwist_table(Workbench& WB) {
    const Fq2Field& F = WB.G().zp().residue_field();
    std::vector<DetTwistRow> rows;
    for (const BCharacter& eps : all_tame_characters(F)) {
        DetTwist dt = is_det_twist(F, eps);
        rows.push_back({eps.m1, eps.t1, eps.t2, dt.is_twist, dt.is_twist ? dt.eta_exponent : -1});
    }
    return rows;
}

inline void emit_tables(Workbench& WB, const std::string& outdir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(outdir, ec);
    if (ec) throw IOError("cannot create output directory " + outdir);

    auto wt = weight_table(WB);
    {
        std::ofstream tsv(outdir + "/weights.tsv");
        if (!tsv) throw IOError("cannot open weights.tsv");
        tsv << "K\tt1\tt2\tfps_dim\tfps_irreducible\tweight_dim\tlambda\n";
        for (const auto& r : wt)
            tsv << r.K << '\t' << r.t1 << '\t' << r.t2 << '\t' << r.fps_dim << '\t'
                << (r.fps_irreducible ? 1 : 0) << '\t' << r.weight_dim << '\t' << r.lambda
                << '\n';
    }
    {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : wt)
            j.push_back({{"K", r.K},
                         {"t1", r.t1},
                         {"t2", r.t2},
                         {"fps_dim", r.fps_dim},
                         {"fps_irreducible", r.fps_irreducible},
                         {"weight_dim", r.weight_dim},
                         {"lambda", r.lambda}});
        std::ofstream js(outdir + "/weights.json");
        js << j.dump(2) << '\n';
    }
    auto dt = dettwist_table(WB);
    {
        std::ofstream tsv(outdir + "/dettwists.tsv");
        if (!tsv) throw IOError("cannot open dettwists.tsv");
        tsv << "m1\tt1\tt2\tis_det_twist\teta_exponent\n";
        for (const auto& r : dt)
            tsv << r.m1 << '\t' << r.t1 << '\t' << r.t2 << '\t' << (r.is_twist ? 1 : 0) << '\t'
                << r.eta_exponent << '\n';
    }
    {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : dt)
            j.push_back({{"m1", r.m1},
                         {"t1", r.t1},
                         {"t2", r.t2},
                         {"is_det_twist", r.is_twist},
                         {"eta_exponent", r.eta_exponent}});
        std::ofstream js(outdir + "/dettwists.json");
        js << j.dump(2) << '\n';
    }
}

}  // namespace u21
