// CSV and manifest output. All floating-point values are written with 17
// significant digits so reruns with the same seed produce byte-identical
// files.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "enslab/chaos.hpp"
#include "enslab/config.hpp"
#include "enslab/errors.hpp"
#include "enslab/experiments.hpp"
#include "enslab/stats.hpp"

namespace enslab {

inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class CsvFile {
  public:
    CsvFile(const std::filesystem::path& path, const std::vector<std::string>& header)
        : path_(path.string()), out_(path) {
        if (!out_) throw WriteError("cannot open for writing: " + path_);
        row(header);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
        if (!out_) throw WriteError("write failure: " + path_);
    }
    void close() {
        out_.close();
        if (!out_) throw WriteError("write failure on close: " + path_);
    }

  private:
    std::string path_;
    std::ofstream out_;
};

inline std::string model_label(int m) { return model_name(all_models[m]); }

inline std::string write_simulation_csv(const std::filesystem::path& dir, const Trajectory& traj,
                                        const ObservationSeries& obs) {
    CsvFile csv(dir / "simulate.csv", {"t", "truth", "observation"});
    for (std::size_t t = 0; t < traj.states.size(); ++t)
        csv.row({std::to_string(t), fmt_g17(traj.states[t]), fmt_g17(obs.observations[t])});
    csv.close();
    return "simulate.csv";
}

struct LyapunovRow {
    std::string panel;
    double lambda = 0.0;
    double exponent = 0.0;
};

inline std::string write_lyapunov_csv(const std::filesystem::path& dir,
                                      const std::vector<LyapunovRow>& rows) {
    CsvFile csv(dir / "fig1_lyapunov.csv", {"panel", "lambda", "exponent"});
    for (const auto& r : rows) csv.row({r.panel, fmt_g17(r.lambda), fmt_g17(r.exponent)});
    csv.close();
    return "fig1_lyapunov.csv";
}

struct ModelErrorRow {
    int model = 0;
    std::size_t lead = 1;
    double initial = 0.0;
    double error = 0.0;
};

inline std::string write_model_errors_csv(const std::filesystem::path& dir,
                                          const std::vector<ModelErrorRow>& rows) {
    CsvFile csv(dir / "fig2to5_model_errors.csv", {"model", "lead", "initial", "error"});
    for (const auto& r : rows)
        csv.row({model_label(r.model), std::to_string(r.lead), fmt_g17(r.initial),
                 fmt_g17(r.error)});
    csv.close();
    return "fig2to5_model_errors.csv";
}

inline std::string write_kappa_csv(const std::filesystem::path& dir,
                                   const std::vector<KappaSweepRow>& rows,
                                   const std::vector<double>& climo_by_lead) {
    CsvFile csv(dir / "fig6_kappa.csv", {"model", "lead", "statistic", "value"});
    for (const auto& r : rows) {
        csv.row({model_label(r.model), std::to_string(r.lead), "best_kappa", fmt_g17(r.kappa)});
        csv.row({model_label(r.model), std::to_string(r.lead), "ignorance", fmt_g17(r.ignorance)});
    }
    for (std::size_t lead = 1; lead <= climo_by_lead.size(); ++lead)
        csv.row({"climatology", std::to_string(lead), "ignorance",
                 fmt_g17(climo_by_lead[lead - 1])});
    csv.close();
    return "fig6_kappa.csv";
}

inline std::string write_enssize_csv(const std::filesystem::path& dir,
                                     const std::vector<SizeSweepRow>& rows) {
    CsvFile csv(dir / "fig7_enssize.csv", {"model", "size", "lead", "statistic", "value"});
    for (const auto& r : rows)
        csv.row({model_label(r.model), std::to_string(r.size), std::to_string(r.lead),
                 "test_ignorance", fmt_g17(r.test_ignorance)});
    csv.close();
    return "fig7_enssize.csv";
}

namespace detail {

inline void quantile_rows(CsvFile& csv, const std::string& model, std::size_t lead,
                          const std::string& stat, const std::vector<double>& v) {
    if (v.empty()) return;
    static const std::pair<const char*, double> qs[] = {
        {"_q05", 0.05}, {"_q25", 0.25}, {"_q50", 0.50}, {"_q75", 0.75}, {"_q95", 0.95}};
    for (const auto& [suffix, q] : qs)
        csv.row({model, std::to_string(lead), stat + suffix, "", fmt_g17(quantile(v, q))});
}

}  // namespace detail

inline std::string write_lap_csv(const std::filesystem::path& dir, const ExperimentReport& rep) {
    CsvFile csv(dir / "fig8_lap.csv", {"model", "lead", "statistic", "archive_id", "value"});
    const std::size_t L = rep.climo_test_ign.size();
    for (std::size_t m = 0; m < 4; ++m) {
        for (std::size_t lead = 1; lead <= L; ++lead) {
            const CellDistribution& c = rep.cell(m, lead);
            for (std::size_t i = 0; i < c.sigma.size(); ++i) {
                std::string id = std::to_string(i);
                csv.row({model_label(m), std::to_string(lead), "sigma", id, fmt_g17(c.sigma[i])});
                csv.row({model_label(m), std::to_string(lead), "alpha", id, fmt_g17(c.alpha[i])});
                csv.row({model_label(m), std::to_string(lead), "train_ignorance", id,
                         fmt_g17(c.train_ign[i])});
                csv.row({model_label(m), std::to_string(lead), "test_ignorance", id,
                         fmt_g17(c.test_ign[i])});
            }
            detail::quantile_rows(csv, model_label(m), lead, "sigma", c.sigma);
            detail::quantile_rows(csv, model_label(m), lead, "alpha", c.alpha);
            detail::quantile_rows(csv, model_label(m), lead, "test_ignorance", c.test_ign);
        }
    }
    for (std::size_t lead = 1; lead <= L; ++lead) {
        const auto& ws = rep.weights_by_lead[lead - 1];
        for (std::size_t i = 0; i < ws.size(); ++i)
            for (std::size_t m = 0; m < 4; ++m)
                csv.row({model_label(m), std::to_string(lead), "weight", std::to_string(i),
                         fmt_g17(ws[i][m])});
        const auto& mm = rep.mm_test_by_lead[lead - 1];
        const auto& best = rep.best_test_by_lead[lead - 1];
        const auto& bm = rep.best_model_by_lead[lead - 1];
        for (std::size_t i = 0; i < mm.size(); ++i) {
            std::string id = std::to_string(i);
            csv.row({"multimodel", std::to_string(lead), "test_ignorance", id, fmt_g17(mm[i])});
            csv.row({"best_single", std::to_string(lead), "test_ignorance", id, fmt_g17(best[i])});
            csv.row({"best_single", std::to_string(lead), "best_model", id,
                     std::to_string(bm[i] + 1)});
        }
        csv.row({"climatology", std::to_string(lead), "test_ignorance", "",
                 fmt_g17(rep.climo_test_ign[lead - 1])});
    }
    csv.close();
    return "fig8_lap.csv";
}

namespace detail {

// SAP raw values for one statistic, with the LAP central 95th-percentile
// band for reference.
inline std::string write_sap_stat_csv(const std::filesystem::path& dir, const std::string& fname,
                                      const std::string& stat, const ExperimentReport& sap,
                                      const ExperimentReport& lap,
                                      const std::vector<double> CellDistribution::*field) {
    CsvFile csv(dir / fname, {"model", "lead", "statistic", "archive_id", "value"});
    const std::size_t L = sap.climo_test_ign.size();
    for (std::size_t m = 0; m < 4; ++m) {
        for (std::size_t lead = 1; lead <= L; ++lead) {
            const auto& v = sap.cell(m, lead).*field;
            for (std::size_t i = 0; i < v.size(); ++i)
                csv.row({model_label(m), std::to_string(lead), stat, std::to_string(i),
                         fmt_g17(v[i])});
            const auto& lv = lap.cell(m, lead).*field;
            if (lv.empty()) continue;
            csv.row({model_label(m), std::to_string(lead), "lap_" + stat + "_q025", "",
                     fmt_g17(quantile(lv, 0.025))});
            csv.row({model_label(m), std::to_string(lead), "lap_" + stat + "_q975", "",
                     fmt_g17(quantile(lv, 0.975))});
            if (stat == "test_ignorance")
                csv.row({model_label(m), std::to_string(lead), "lap_" + stat + "_mean", "",
                         fmt_g17(mean_of(lv))});
        }
    }
    if (stat == "test_ignorance")
        for (std::size_t lead = 1; lead <= L; ++lead)
            csv.row({"climatology", std::to_string(lead), "test_ignorance", "",
                     fmt_g17(sap.climo_test_ign[lead - 1])});
    csv.close();
    return fname;
}

}  // namespace detail

inline std::string write_sap_alpha_csv(const std::filesystem::path& dir,
                                       const ExperimentReport& sap, const ExperimentReport& lap) {
    return detail::write_sap_stat_csv(dir, "fig9_alpha_sap.csv", "alpha", sap, lap,
                                      &CellDistribution::alpha);
}

inline std::string write_sap_sigma_csv(const std::filesystem::path& dir,
                                       const ExperimentReport& sap, const ExperimentReport& lap) {
    return detail::write_sap_stat_csv(dir, "fig10_sigma_sap.csv", "sigma", sap, lap,
                                      &CellDistribution::sigma);
}

inline std::string write_sap_ignorance_csv(const std::filesystem::path& dir,
                                           const ExperimentReport& sap,
                                           const ExperimentReport& lap) {
    return detail::write_sap_stat_csv(dir, "fig11_ign_sap.csv", "test_ignorance", sap, lap,
                                      &CellDistribution::test_ign);
}

inline std::string write_compare_csv(const std::filesystem::path& dir,
                                     const ComparisonReport& cmp) {
    CsvFile csv(dir / "fig12_mm_vs_best.csv",
                {"pairing", "lead", "statistic", "archive_id", "value"});
    static const char* names[] = {"lap_vs_lap", "sap_vs_sap", "sap_mm_vs_lap_best"};
    for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t lead = 1; lead <= cmp.rel[p].size(); ++lead) {
            const auto& v = cmp.rel[p][lead - 1];
            for (std::size_t i = 0; i < v.size(); ++i)
                csv.row({names[p], std::to_string(lead), "relative_ignorance", std::to_string(i),
                         fmt_g17(v[i])});
            csv.row({names[p], std::to_string(lead), "frac_not_worse", "",
                     fmt_g17(cmp.frac_not_worse[p][lead - 1])});
        }
    }
    csv.close();
    return "fig12_mm_vs_best.csv";
}

inline std::string grid_to_string(const GridSpec& g) {
    return fmt_g17(g.lo) + ":" + fmt_g17(g.hi) + ":" + std::to_string(g.n) +
           (g.log_scale ? ":log" : ":linear");
}

inline std::string write_fitted_params(const std::filesystem::path& dir, const SystemSetup& s) {
    std::ofstream out(dir / "fitted_params.txt");
    if (!out) throw WriteError("cannot open for writing: " + (dir / "fitted_params.txt").string());
    out << "noise_sd=" << fmt_g17(s.sys.noise_sd) << '\n';
    out << "attractor_sd=" << fmt_g17(s.attractor_sd) << '\n';
    out << "sigma_grid=" << grid_to_string(s.fit.sigma_grid) << '\n';
    out << "alpha_grid=" << grid_to_string(s.fit.alpha_grid) << '\n';
    out << "kappa_grid=" << grid_to_string(s.fit.kappa_grid) << '\n';
    out << "refinement_rounds=" << s.fit.refinement_rounds << '\n';
    out << "refinement_points=" << s.fit.refinement_points << '\n';
    for (std::size_t m = 0; m < 4; ++m) {
        std::string name = model_label(static_cast<int>(m));
        out << "kappa." << name << '=' << fmt_g17(s.kappa[m]) << '\n';
        if (!s.kappa_diag[m].candidates.empty()) {
            out << "kappa." << name
                << ".validation_ignorance=" << fmt_g17(s.kappa_diag[m].validation_ignorance)
                << '\n';
            out << "kappa." << name << ".diverged_candidates=" << s.kappa_diag[m].diverged_candidates
                << '\n';
        }
    }
    out.close();
    if (!out) throw WriteError("write failure: fitted_params.txt");
    return "fitted_params.txt";
}

inline nlohmann::ordered_json config_to_json(const RunConfig& rc) {
    nlohmann::ordered_json j;
    j["lambda"] = rc.lambda;
    if (std::isnan(rc.noise_sd))
        j["noise_sd"] = nullptr;
    else
        j["noise_sd"] = rc.noise_sd;
    j["spinup"] = rc.spinup;
    j["kappa"] = rc.kappa;
    j["n_members"] = rc.n_members;
    j["max_lead"] = rc.max_lead;
    j["stride"] = rc.stride;
    j["scale"] = rc.scale;
    j["n_archives"] = rc.n_archives;
    j["lap_size"] = rc.lap_size;
    j["sap_size"] = rc.sap_size;
    j["test_size"] = rc.test_size;
    j["seed"] = rc.seed;
    j["jobs"] = rc.jobs;
    j["rounding"] = rc.rounding;
    j["ensemble_sizes"] = rc.ensemble_sizes;
    j["sim_length"] = rc.sim_length;
    j["lyap_count"] = rc.lyap_count;
    j["lyap_steps"] = rc.lyap_steps;
    j["modelerr_points"] = rc.modelerr_points;
    return j;
}

inline std::string write_manifest(const std::filesystem::path& dir, const std::string& command,
                                  const RunConfig& rc, const std::vector<std::string>& files,
                                  const std::map<std::string, std::size_t>& failure_counts,
                                  const SystemSetup* setup = nullptr) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config"] = config_to_json(rc);
    if (setup) {
        nlohmann::ordered_json r;
        r["noise_sd"] = setup->sys.noise_sd;
        r["attractor_sd"] = setup->attractor_sd;
        r["kappa"] = setup->kappa;
        j["resolved"] = r;
    }
    j["failure_counts"] = failure_counts;
    j["files"] = files;
    j["versions"] = {{"library", "0.1.0"}, {"format", 1}};
    std::ofstream out(dir / "manifest.json");
    if (!out) throw WriteError("cannot open for writing: " + (dir / "manifest.json").string());
    out << j.dump(2) << '\n';
    out.close();
    if (!out) throw WriteError("write failure: manifest.json");
    return "manifest.json";
}

}  // namespace enslab
