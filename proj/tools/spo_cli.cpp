// Experiment driver for the relocation pipeline: data generation, single
// solves, gradient checks, and full training/baseline comparisons.

#include "spo/admm.hpp"
#include "spo/datagen.hpp"
#include "spo/gradcheck.hpp"
#include "spo/io.hpp"
#include "spo/metrics.hpp"
#include "spo/predictor.hpp"
#include "spo/relocation.hpp"
#include "spo/spo_train.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace spo;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitIo = 4;

struct RunConfig {
    int rows = 4;
    int cols = 4;
    int days = 14;
    int window = 12;
    double interval = 15.0;
    double gamma = 0.6;
    double budget = 200.0;
    double speed_kmh = 30.0;
    double unit_cost = 1.0;
    std::string target_kind = "uniform";

    double rho = 2.0;
    double xi = 0.05;
    int k_max = 2000;

    double w1 = 1.0;
    double w2 = 1.0;
    double learning_rate = 0.01;
    double weight_decay = 0.001;
    int batch_size = 64;
    int epochs = 10;
    int hidden = 8;

    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::string out_dir = "out";
};

// Plain "key = value" config file with an explicit schema version; CLI flags
// override file values.
std::map<std::string, std::string> parse_config_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        }
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    if (!kv.count("schema_version")) {
        throw std::runtime_error("config file missing schema_version");
    }
    if (kv["schema_version"] != "1") {
        throw std::runtime_error("unsupported schema_version " + kv["schema_version"]);
    }
    kv.erase("schema_version");
    return kv;
}

void apply_config_file(RunConfig& cfg, const fs::path& path) {
    auto kv = parse_config_file(path);
    auto get_d = [&](const char* k, double& v) {
        if (kv.count(k)) v = std::stod(kv[k]);
    };
    auto get_i = [&](const char* k, int& v) {
        if (kv.count(k)) v = std::stoi(kv[k]);
    };
    get_i("rows", cfg.rows);
    get_i("cols", cfg.cols);
    get_i("days", cfg.days);
    get_i("window", cfg.window);
    get_d("interval", cfg.interval);
    get_d("gamma", cfg.gamma);
    get_d("budget", cfg.budget);
    get_d("speed_kmh", cfg.speed_kmh);
    get_d("unit_cost", cfg.unit_cost);
    if (kv.count("target_kind")) cfg.target_kind = kv["target_kind"];
    get_d("rho", cfg.rho);
    get_d("xi", cfg.xi);
    get_i("k_max", cfg.k_max);
    get_d("w1", cfg.w1);
    get_d("w2", cfg.w2);
    get_d("learning_rate", cfg.learning_rate);
    get_d("weight_decay", cfg.weight_decay);
    get_i("batch_size", cfg.batch_size);
    get_i("epochs", cfg.epochs);
    get_i("hidden", cfg.hidden);
    if (kv.count("seeds")) {
        cfg.seeds.clear();
        std::istringstream ss(kv["seeds"]);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.seeds.push_back(std::stoull(tok));
    }
    if (kv.count("out_dir")) cfg.out_dir = kv["out_dir"];
}

TargetKind parse_target_kind(const std::string& s) {
    if (s == "uniform") return TargetKind::Uniform;
    if (s == "gaussian") return TargetKind::Gaussian;
    if (s == "mixture") return TargetKind::GaussianMixture;
    throw std::runtime_error("unknown target kind '" + s + "'");
}

std::string manifest_text(const RunConfig& cfg) {
    std::ostringstream os;
    os << "schema_version = 1\n";
    os << "tool_version = " << kVersion << "\n";
    os << "rows = " << cfg.rows << "\ncols = " << cfg.cols << "\ndays = " << cfg.days
       << "\nwindow = " << cfg.window << "\ninterval = " << io::format_double(cfg.interval)
       << "\ngamma = " << io::format_double(cfg.gamma)
       << "\nbudget = " << io::format_double(cfg.budget)
       << "\nspeed_kmh = " << io::format_double(cfg.speed_kmh)
       << "\nunit_cost = " << io::format_double(cfg.unit_cost)
       << "\ntarget_kind = " << cfg.target_kind << "\nrho = " << io::format_double(cfg.rho)
       << "\nxi = " << io::format_double(cfg.xi) << "\nk_max = " << cfg.k_max
       << "\nw1 = " << io::format_double(cfg.w1) << "\nw2 = " << io::format_double(cfg.w2)
       << "\nlearning_rate = " << io::format_double(cfg.learning_rate)
       << "\nweight_decay = " << io::format_double(cfg.weight_decay)
       << "\nbatch_size = " << cfg.batch_size << "\nepochs = " << cfg.epochs
       << "\nhidden = " << cfg.hidden << "\nseeds = ";
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        if (i) os << ',';
        os << cfg.seeds[i];
    }
    os << "\n";
    return os.str();
}

struct GeneratedData {
    HexGrid grid;
    DemandSeries series;
    Eigen::MatrixXd target_table;
    Scenario scenario;
    DatasetSplits splits;
};

GeneratedData generate(const RunConfig& cfg, std::uint64_t seed) {
    GeneratedData d;
    d.grid = make_hex_grid(cfg.rows, cfg.cols);
    DemandSeries all = synth_demand(d.grid, cfg.days, seed);
    d.series = split_fleet(all, cfg.gamma, seed + 1);
    TargetSpec tspec;
    tspec.kind = parse_target_kind(cfg.target_kind);
    tspec.seed = seed + 2;
    d.target_table = gen_target(tspec, base_week_mean(d.series), d.grid);
    d.scenario.adj = Adjacency::from_grid(d.grid);
    d.scenario.travel_time = travel_time_matrix(d.grid, cfg.speed_kmh);
    d.scenario.cost = incentive_cost_matrix(d.grid, cfg.unit_cost);
    d.scenario.budget = cfg.budget;
    d.scenario.interval = cfg.interval;
    d.splits = split_dataset(d.series, d.target_table, cfg.window);
    return d;
}

int cmd_gen_data(const RunConfig& cfg) {
    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    GeneratedData d = generate(cfg, cfg.seeds.empty() ? 1 : cfg.seeds.front());
    io::save_demand_csv(d.series, out / "demand.csv");
    io::save_grid(d.grid, out / "grid.json");
    std::ofstream mf(out / "manifest.txt", std::ios::binary);
    mf << manifest_text(cfg);
    std::cout << "wrote " << (out / "demand.csv").string() << " ("
              << d.series.n_intervals() * d.series.n_grids() << " rows), "
              << (out / "grid.json").string() << "\n";
    return kExitOk;
}

int cmd_solve_once(const RunConfig& cfg, const std::string& instance_path) {
    RelocationInstance inst = io::load_instance(instance_path);
    // The instance's target doubles as the required DV distribution source
    // when no forecast is involved: required = target (all free vehicles
    // assumed already counted in the target).
    const Eigen::VectorXd required = inst.target;
    StandardQP qp = to_standard_qp(inst, required);
    AdmmConfig acfg{cfg.rho, cfg.xi, cfg.k_max};
    AdmmResult res = solve(qp, acfg);

    std::cout << "iterations: " << res.iterations << "\n";
    std::cout << "converged: " << (res.converged ? "yes" : "no") << "\n";
    std::cout << "objective_Z1: " << io::format_double(res.objective) << "\n";
    std::cout << "objective_Z0: " << io::format_double(res.objective + qp.objective_offset)
              << "\n";
    std::cout << "kkt_stationarity: " << io::format_double(res.kkt.stationarity) << "\n";
    std::cout << "kkt_primal_infeasibility: " << io::format_double(res.kkt.primal_infeasibility)
              << "\n";
    std::cout << "kkt_complementarity: " << io::format_double(res.kkt.complementarity) << "\n";
    const char* names[4] = {"supply", "time", "budget", "nonneg"};
    for (int b = 0; b < 4; ++b) {
        const Eigen::VectorXd slack = qp.h[b] - qp.G[b] * res.y;
        std::cout << "feasibility_slack_" << names[b] << ": "
                  << io::format_double(slack.minCoeff()) << "\n";
    }
    return res.converged ? kExitOk : kExitNonConvergence;
}

int cmd_gradcheck(const RunConfig& cfg, int n_grids, int samples) {
    AdmmConfig acfg{cfg.rho, 1e-10, 200000, 1e-8};
    double worst_admm = 0.0;
    int checked = 0;
    std::uint64_t seed = cfg.seeds.empty() ? 1 : cfg.seeds.front();
    while (checked < samples) {
        RelocationInstance inst = random_instance(n_grids, seed);
        Eigen::VectorXd pred = random_prediction(inst, seed + 1000);
        seed += 1;
        GradCheckResult r = check_admm_jacobian(inst, pred, acfg);
        if (r.degenerate) continue;  // Jacobian undefined at a kink
        worst_admm = std::max(worst_admm, r.max_rel_error);
        ++checked;
    }
    const double pred_err =
        check_predictor_vjp(n_grids, cfg.window, cfg.hidden, cfg.seeds.empty() ? 1 : cfg.seeds.front());

    const bool ok = worst_admm <= 1e-3 && pred_err <= 1e-3;
    std::cout << "admm_jacobian_max_rel_error: " << io::format_double(worst_admm) << " ("
              << checked << " instances, N=" << n_grids << ")\n";
    std::cout << "predictor_vjp_max_rel_error: " << io::format_double(pred_err) << "\n";
    std::cout << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? kExitOk : 1;
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::SPO: return "SPO-A";
        case Regime::PTO: return "PTO";
        case Regime::NOP: return "NOP";
        case Regime::DON: return "DON";
    }
    return "?";
}

int cmd_experiment(const RunConfig& cfg) {
    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    {
        std::ofstream mf(out / "manifest.txt", std::ios::binary);
        mf << manifest_text(cfg);
    }

    AdmmConfig acfg{cfg.rho, cfg.xi, cfg.k_max};
    SpoConfig scfg;
    scfg.w1 = cfg.w1;
    scfg.w2 = cfg.w2;
    scfg.learning_rate = cfg.learning_rate;
    scfg.weight_decay = cfg.weight_decay;
    scfg.batch_size = cfg.batch_size;
    scfg.epochs = cfg.epochs;
    scfg.hidden = cfg.hidden;

    std::map<Regime, std::vector<double>> rmse_by, smape_by;
    const std::vector<Regime> regimes = {Regime::SPO, Regime::PTO, Regime::NOP, Regime::DON};

    for (std::uint64_t seed : cfg.seeds) {
        GeneratedData d = generate(cfg, seed);
        scfg.seed = seed;

        auto [w_spo, rec_spo] = train_spo(d.splits, d.scenario, scfg, acfg);
        auto [w_pto, rec_pto] = train_pto(d.splits, d.scenario, scfg);

        const std::string tag = "seed" + std::to_string(seed);
        io::save_train_record_csv(rec_spo, out / ("train_spo_" + tag + ".csv"));
        io::save_train_record_csv(rec_pto, out / ("train_pto_" + tag + ".csv"));
        io::save_weights(w_spo, out / ("weights_spo_" + tag + ".json"));
        io::save_weights(w_pto, out / ("weights_pto_" + tag + ".json"));

        // Evaluation couples the stop to the KKT residual so every reported
        // plan is feasible to well under a vehicle; training keeps the cheap
        // objective-change rule.
        AdmmConfig eval_cfg = acfg;
        eval_cfg.kkt_tol = 1e-4;
        eval_cfg.k_max = std::max(acfg.k_max, 50000);
        for (Regime r : regimes) {
            const PredictorWeights* w = nullptr;
            if (r == Regime::SPO) w = &w_spo;
            if (r == Regime::PTO) w = &w_pto;
            EvalResult ev = evaluate_policy(w, d.splits.test, d.scenario, r, eval_cfg);
            rmse_by[r].push_back(ev.metrics.rmse);
            smape_by[r].push_back(ev.metrics.smape);
            io::save_divergence_csv(ev.matched_table, ev.target_table,
                                    out / ("divergence_" + std::string(regime_name(r)) + "_" +
                                           tag + ".csv"));
        }
    }

    std::ostringstream table;
    table << "regime,mean_rmse,mean_smape\n";
    for (Regime r : regimes) {
        double mr = 0, ms = 0;
        for (double v : rmse_by[r]) mr += v;
        for (double v : smape_by[r]) ms += v;
        mr /= rmse_by[r].size();
        ms /= smape_by[r].size();
        table << regime_name(r) << ',' << io::format_double(mr) << ','
              << io::format_double(ms) << '\n';
    }
    std::ofstream cf(out / "comparison.csv", std::ios::binary);
    cf << table.str();
    std::cout << table.str();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Smart predict-then-optimize vehicle relocation pipeline"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    std::string instance_path;
    int gc_n = 3, gc_samples = 5;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value config file (schema_version 1)");
        sub->add_option("--rows", cfg.rows);
        sub->add_option("--cols", cfg.cols);
        sub->add_option("--days", cfg.days);
        sub->add_option("--window", cfg.window);
        sub->add_option("--gamma", cfg.gamma);
        sub->add_option("--budget", cfg.budget);
        sub->add_option("--target-kind", cfg.target_kind, "uniform|gaussian|mixture");
        sub->add_option("--rho", cfg.rho);
        sub->add_option("--xi", cfg.xi);
        sub->add_option("--k-max", cfg.k_max);
        sub->add_option("--w1", cfg.w1);
        sub->add_option("--w2", cfg.w2);
        sub->add_option("--learning-rate", cfg.learning_rate);
        sub->add_option("--weight-decay", cfg.weight_decay);
        sub->add_option("--batch-size", cfg.batch_size);
        sub->add_option("--epochs", cfg.epochs);
        sub->add_option("--hidden", cfg.hidden);
        sub->add_option("--seeds", cfg.seeds, "comma-separated run seeds")->delimiter(',');
        sub->add_option("--out", cfg.out_dir, "output directory");
    };

    CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic demand dataset");
    add_common(gen);
    CLI::App* solve_cmd = app.add_subcommand("solve-once", "solve one relocation instance");
    add_common(solve_cmd);
    solve_cmd->add_option("instance", instance_path, "RelocationInstance JSON file")->required();
    CLI::App* gc = app.add_subcommand("gradcheck", "finite-difference gradient checks");
    add_common(gc);
    gc->add_option("--n", gc_n, "grid count for random instances");
    gc->add_option("--samples", gc_samples, "number of random instances");
    CLI::App* exp = app.add_subcommand("experiment", "train and compare SPO-A/PTO/NOP/DON");
    add_common(exp);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) {
            RunConfig file_cfg;
            apply_config_file(file_cfg, config_path);
            // Flags override file values: re-parse flags on top of the file
            // config by swapping defaults.
            RunConfig merged = file_cfg;
            // CLI11 already wrote parsed flags into cfg; copy only options the
            // user actually passed.
            auto passed = [&](const std::string& name) {
                for (CLI::App* sub : {gen, solve_cmd, gc, exp}) {
                    if (sub->parsed() && sub->count(name) > 0) return true;
                }
                return false;
            };
            if (passed("--rows")) merged.rows = cfg.rows;
            if (passed("--cols")) merged.cols = cfg.cols;
            if (passed("--days")) merged.days = cfg.days;
            if (passed("--window")) merged.window = cfg.window;
            if (passed("--gamma")) merged.gamma = cfg.gamma;
            if (passed("--budget")) merged.budget = cfg.budget;
            if (passed("--target-kind")) merged.target_kind = cfg.target_kind;
            if (passed("--rho")) merged.rho = cfg.rho;
            if (passed("--xi")) merged.xi = cfg.xi;
            if (passed("--k-max")) merged.k_max = cfg.k_max;
            if (passed("--w1")) merged.w1 = cfg.w1;
            if (passed("--w2")) merged.w2 = cfg.w2;
            if (passed("--learning-rate")) merged.learning_rate = cfg.learning_rate;
            if (passed("--weight-decay")) merged.weight_decay = cfg.weight_decay;
            if (passed("--batch-size")) merged.batch_size = cfg.batch_size;
            if (passed("--epochs")) merged.epochs = cfg.epochs;
            if (passed("--hidden")) merged.hidden = cfg.hidden;
            if (passed("--seeds")) merged.seeds = cfg.seeds;
            if (passed("--out")) merged.out_dir = cfg.out_dir;
            cfg = merged;
        }

        if (gen->parsed()) return cmd_gen_data(cfg);
        if (solve_cmd->parsed()) return cmd_solve_once(cfg, instance_path);
        if (gc->parsed()) return cmd_gradcheck(cfg, gc_n, gc_samples);
        if (exp->parsed()) return cmd_experiment(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        const std::string msg = e.what();
        if (msg.find("cannot open") != std::string::npos ||
            msg.find("cannot write") != std::string::npos) {
            return kExitIo;
        }
        if (msg.find("malformed") != std::string::npos ||
            msg.find("missing field") != std::string::npos) {
            return kExitValidation;
        }
        return 1;
    }
    return kExitOk;
}
