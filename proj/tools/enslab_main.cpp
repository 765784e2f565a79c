// enslab: ensemble forecasting laboratory for the Moran-Ricker testbed.
//
// Subcommands cover the full pipeline: truth simulation, Lyapunov sweep,
// model error samples, kappa and ensemble-size sweeps, LAP/SAP Monte Carlo
// experiments, and the multi-model comparison. Everything is a pure
// function of --seed; rerunning a subcommand reproduces its output files
// byte for byte.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "enslab/enslab.hpp"

namespace fs = std::filesystem;
using namespace enslab;

namespace {

// Collects CLI flag values as strings keyed by config name, so flags merge
// through the same path as config-file entries.
class FlagCollector {
  public:
    void add(CLI::App* app, const std::string& flag, const std::string& key,
             const std::string& desc, bool positive_int = false) {
        auto buf = std::make_shared<std::string>();
        CLI::Option* opt = app->add_option(flag, *buf, desc);
        if (positive_int) opt->check(CLI::PositiveNumber);
        entries_.push_back({key, buf, opt});
    }
    KeyValues collect() const {
        KeyValues kv;
        for (const auto& e : entries_)
            if (e.opt->count() > 0) kv.emplace_back(e.key, *e.buf);
        return kv;
    }

  private:
    struct Entry {
        std::string key;
        std::shared_ptr<std::string> buf;
        CLI::Option* opt;
    };
    std::vector<Entry> entries_;
};

struct SubState {
    CLI::App* app = nullptr;
    FlagCollector flags;
    std::string config_path;
};

void add_common_flags(SubState& st) {
    st.app->add_option("--config", st.config_path, "key=value config file");
    st.flags.add(st.app, "--seed", "seed", "master seed", true);
    st.flags.add(st.app, "--scale", "scale", "desk or full");
    st.flags.add(st.app, "--jobs", "jobs", "worker threads", true);
    st.flags.add(st.app, "--out", "out_dir", "output directory");
    st.flags.add(st.app, "--lambda", "lambda", "system growth parameter");
    st.flags.add(st.app, "--noise-sd", "noise_sd", "observation noise SD");
    st.flags.add(st.app, "--members", "n_members", "ensemble size", true);
    st.flags.add(st.app, "--max-lead", "max_lead", "longest lead time", true);
    st.flags.add(st.app, "--stride", "stride", "launch spacing (0 = max lead)");
    st.flags.add(st.app, "--archives", "n_archives", "number of training archives", true);
    st.flags.add(st.app, "--lap-size", "lap_size", "pairs per large archive", true);
    st.flags.add(st.app, "--sap-size", "sap_size", "pairs per small archive", true);
    st.flags.add(st.app, "--test-size", "test_size", "pairs in the shared test archive", true);
    st.flags.add(st.app, "--rounding", "rounding", "coefficient rounding: half_away or truncate");
    st.flags.add(st.app, "--kappa1", "kappa1", "fix model I perturbation SD");
    st.flags.add(st.app, "--kappa2", "kappa2", "fix model II perturbation SD");
    st.flags.add(st.app, "--kappa3", "kappa3", "fix model III perturbation SD");
    st.flags.add(st.app, "--kappa4", "kappa4", "fix model IV perturbation SD");
}

ExperimentConfig experiment_config(const RunConfig& rc) {
    ExperimentConfig ec;
    ec.n_archives = rc.n_archives;
    ec.lap_size = rc.lap_size;
    ec.sap_size = rc.sap_size;
    ec.test_size = rc.test_size;
    ec.n_members = rc.n_members;
    ec.max_lead = rc.max_lead;
    ec.stride = rc.stride;
    ec.master_seed = rc.seed;
    ec.jobs = rc.jobs;
    return ec;
}

SystemSetup make_setup(const RunConfig& rc) {
    return build_system_setup(rc.lambda, rc.noise_sd, rc.spinup, rounding_mode(rc), FitConfig{},
                              experiment_config(rc), rc.kappa);
}

double resolve_noise(const RunConfig& rc) {
    if (!std::isnan(rc.noise_sd)) return rc.noise_sd;
    return 0.05 * attractor_sd(rc.lambda, 100000, derive_seed(rc.seed, StreamTag::truth, 0));
}

std::string run_simulate(const RunConfig& rc, const fs::path& out,
                         std::vector<std::string>& files) {
    SystemParams p;
    p.lambda = rc.lambda;
    p.spinup_steps = rc.spinup;
    double noise = resolve_noise(rc);
    Trajectory traj =
        generate_trajectory(p, 0.3, rc.sim_length, derive_seed(rc.seed, StreamTag::truth, 1));
    ObservationSeries obs =
        observe(traj, noise, derive_seed(rc.seed, StreamTag::observation, 0));
    files.push_back(write_simulation_csv(out, traj, obs));
    char buf[128];
    std::snprintf(buf, sizeof buf, "simulate: %zu steps, noise_sd=%.6g", rc.sim_length, noise);
    return buf;
}

std::string run_lyapunov(const RunConfig& rc, bool single_lambda, const fs::path& out,
                         std::vector<std::string>& files) {
    std::vector<LyapunovRow> rows;
    if (single_lambda) {
        double le = lyapunov_exponent(rc.lambda, std::max<std::size_t>(rc.lyap_steps, 100000),
                                      derive_seed(rc.seed, StreamTag::sweep, 20));
        rows.push_back({"single", rc.lambda, le});
    } else {
        struct Panel {
            const char* name;
            double lo, hi;
        };
        const Panel panels[] = {{"a", 2.95, 3.05}, {"b", 2.999, 3.001}};
        for (std::size_t p = 0; p < 2; ++p) {
            auto eng = make_engine(derive_seed(rc.seed, StreamTag::sweep, 21 + p));
            std::uniform_real_distribution<double> dist(panels[p].lo, panels[p].hi);
            for (std::size_t i = 0; i < rc.lyap_count; ++i) {
                double lam = dist(eng);
                double le = lyapunov_exponent(lam, rc.lyap_steps,
                                              derive_seed(rc.seed, StreamTag::sweep, 23, i));
                rows.push_back({panels[p].name, lam, le});
            }
        }
    }
    files.push_back(write_lyapunov_csv(out, rows));
    char buf[128];
    std::snprintf(buf, sizeof buf, "lyapunov: %zu estimates, lambda=%.6g -> %.6g",
                  rows.size(), rows.back().lambda, rows.back().exponent);
    return buf;
}

std::string run_modelerr(const RunConfig& rc, const fs::path& out,
                         std::vector<std::string>& files) {
    ModelBank bank = build_model_bank(rc.lambda, rounding_mode(rc));
    SystemParams p;
    p.lambda = rc.lambda;
    p.spinup_steps = rc.spinup;
    std::vector<ModelErrorRow> rows;
    for (std::size_t m = 0; m < 4; ++m) {
        for (unsigned steps = 1; steps <= 2; ++steps) {
            std::vector<std::pair<double, double>> pairs =
                model_error_histogram(bank, all_models[m], p, rc.modelerr_points, steps,
                                      derive_seed(rc.seed, StreamTag::truth, 2));
            for (const auto& [x0, err] : pairs)
                rows.push_back({static_cast<int>(m), steps, x0, err});
        }
    }
    files.push_back(write_model_errors_csv(out, rows));
    return "modelerr: " + std::to_string(rows.size()) + " samples";
}

int dispatch(const std::string& cmd, const RunConfig& rc, bool single_lambda) {
    fs::path out(rc.out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw WriteError("cannot create output directory: " + rc.out_dir);

    std::vector<std::string> files;
    std::map<std::string, std::size_t> failures;
    std::vector<std::string> summary;
    const SystemSetup* setup_ptr = nullptr;
    SystemSetup setup;

    auto need_setup = [&]() {
        if (!setup_ptr) {
            setup = make_setup(rc);
            setup_ptr = &setup;
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "setup: noise_sd=%.6g kappa=[%.4g %.4g %.4g %.4g]",
                          setup.sys.noise_sd, setup.kappa[0], setup.kappa[1], setup.kappa[2],
                          setup.kappa[3]);
            summary.emplace_back(buf);
        }
    };

    TestSide test;
    bool have_test = false;
    auto need_test = [&]() {
        need_setup();
        if (!have_test) {
            test = build_test_side(setup);
            have_test = true;
        }
    };

    ExperimentReport lap_rep, sap_rep;
    bool have_lap = false, have_sap = false;
    auto need_lap = [&]() {
        need_test();
        if (!have_lap) {
            lap_rep = run_lap(setup, test);
            failures["lap"] = lap_rep.failed_archives;
            have_lap = true;
        }
    };
    auto need_sap = [&]() {
        need_test();
        if (!have_sap) {
            sap_rep = run_sap(setup, test);
            failures["sap"] = sap_rep.failed_archives;
            have_sap = true;
        }
    };

    auto do_kappa = [&]() {
        need_setup();
        std::vector<double> climo_by_lead;
        std::vector<KappaSweepRow> rows = run_kappa_sweep(setup, &climo_by_lead);
        files.push_back(write_kappa_csv(out, rows, climo_by_lead));
        files.push_back(write_fitted_params(out, setup));
        summary.push_back("kappa sweep: " + std::to_string(rows.size()) + " cells");
    };
    auto do_enssize = [&]() {
        need_setup();
        std::vector<SizeSweepRow> rows = run_ensemble_size_sweep(setup, rc.ensemble_sizes);
        files.push_back(write_enssize_csv(out, rows));
        summary.push_back("ensemble size sweep: " + std::to_string(rows.size()) + " cells");
    };
    auto do_lap = [&]() {
        need_lap();
        files.push_back(write_lap_csv(out, lap_rep));
        char buf[160];
        const auto& mm = lap_rep.mm_test_by_lead[0];
        std::snprintf(buf, sizeof buf, "lap: %zu archives (%zu failed), mm lead-1 mean %.4g bits",
                      rc.n_archives, lap_rep.failed_archives,
                      mm.empty() ? std::numeric_limits<double>::quiet_NaN() : mean_of(mm));
        summary.emplace_back(buf);
    };
    auto do_sap = [&]() {
        need_lap();
        need_sap();
        files.push_back(write_sap_alpha_csv(out, sap_rep, lap_rep));
        files.push_back(write_sap_sigma_csv(out, sap_rep, lap_rep));
        files.push_back(write_sap_ignorance_csv(out, sap_rep, lap_rep));
        char buf[160];
        std::snprintf(buf, sizeof buf, "sap: %zu archives (%zu failed)", rc.n_archives,
                      sap_rep.failed_archives);
        summary.emplace_back(buf);
    };
    auto do_compare = [&]() {
        need_lap();
        need_sap();
        ComparisonReport cmp = compare_multimodel(lap_rep, sap_rep);
        files.push_back(write_compare_csv(out, cmp));
        char buf[160];
        std::snprintf(buf, sizeof buf, "compare: lead-1 frac(mm <= best) lap %.3g sap-vs-lap %.3g",
                      cmp.frac_not_worse[0][0], cmp.frac_not_worse[2][0]);
        summary.emplace_back(buf);
    };

    if (cmd == "simulate") {
        summary.push_back(run_simulate(rc, out, files));
    } else if (cmd == "lyapunov") {
        summary.push_back(run_lyapunov(rc, single_lambda, out, files));
    } else if (cmd == "modelerr") {
        summary.push_back(run_modelerr(rc, out, files));
    } else if (cmd == "kappa") {
        do_kappa();
    } else if (cmd == "enssize") {
        do_enssize();
    } else if (cmd == "lap") {
        do_lap();
    } else if (cmd == "sap") {
        do_sap();
    } else if (cmd == "compare") {
        do_compare();
    } else if (cmd == "all") {
        summary.push_back(run_simulate(rc, out, files));
        summary.push_back(run_lyapunov(rc, false, out, files));
        summary.push_back(run_modelerr(rc, out, files));
        do_kappa();
        do_enssize();
        do_lap();
        do_sap();
        do_compare();
    }

    files.push_back(write_manifest(out, cmd, rc, files, failures, setup_ptr));
    for (const auto& s : summary) std::cout << s << '\n';
    std::cout << "wrote " << files.size() << " files to " << rc.out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ensemble forecasting laboratory for the Moran-Ricker testbed"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> subs = {
        {"simulate", "write a truth trajectory and noisy observations"},
        {"lyapunov", "Lyapunov exponent sweep over the growth parameter"},
        {"modelerr", "one- and two-step model error samples"},
        {"kappa", "per-lead perturbation size sweep"},
        {"enssize", "ensemble size sweep"},
        {"lap", "large-archive fitting experiment"},
        {"sap", "small-archive fitting experiment"},
        {"compare", "multi-model versus single-best comparison"},
        {"all", "full pipeline"},
    };
    std::map<std::string, SubState> state;
    for (const auto& [name, desc] : subs) {
        SubState& st = state[name];
        st.app = app.add_subcommand(name, desc);
        add_common_flags(st);
        if (name == "simulate" || name == "all")
            st.flags.add(st.app, "--length", "sim_length", "trajectory length", true);
        if (name == "lyapunov" || name == "all") {
            st.flags.add(st.app, "--count", "lyap_count", "estimates per panel", true);
            st.flags.add(st.app, "--steps", "lyap_steps", "iterations per estimate", true);
        }
        if (name == "modelerr" || name == "all")
            st.flags.add(st.app, "--points", "modelerr_points", "initial conditions", true);
        if (name == "enssize" || name == "all")
            st.flags.add(st.app, "--sizes", "ensemble_sizes", "comma-separated ensemble sizes");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        for (const auto& [name, desc] : subs) {
            (void)desc;
            const SubState& st = state.at(name);
            if (!st.app->parsed()) continue;
            KeyValues file_kv;
            if (!st.config_path.empty()) file_kv = parse_config_file(st.config_path);
            KeyValues flag_kv = st.flags.collect();
            RunConfig rc = resolve_run_config(file_kv, flag_kv);
            bool single_lambda = false;
            for (const auto& [k, v] : file_kv)
                if (k == "lambda") single_lambda = true;
            for (const auto& [k, v] : flag_kv)
                if (k == "lambda") single_lambda = true;
            return dispatch(name, rc, single_lambda);
        }
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 3;
    } catch (const WriteError& e) {
        std::cerr << "write error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 5;
    }
}
