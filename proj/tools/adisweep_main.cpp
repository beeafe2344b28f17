#include <cstdint>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adisweep/errors.hpp"
#include "adisweep/experiments.hpp"
#include "adisweep/idf.hpp"
#include "adisweep/io.hpp"
#include "adisweep/model.hpp"
#include "adisweep/work_pool.hpp"

namespace {

using nlohmann::ordered_json;
using namespace adisweep;

// A config document may be a bare flag map or a previously emitted summary;
// summaries carry their flag map under "config".
ordered_json load_config(const std::string& path) {
    ordered_json j = ordered_json::parse(io::read_text(path));
    if (j.is_object() && j.contains("config")) return j.at("config");
    return j;
}

void reject_unknown_keys(const ordered_json& j, const std::vector<std::string>& allowed) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const std::string& k : allowed)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw validation_error("unknown config key: '" + item.key() + "'");
    }
}

template <class T>
void take(const ordered_json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

InitialMode parse_mode(const std::string& s) {
    if (s == "OnFixedPoint") return InitialMode::OnFixedPoint;
    if (s == "IdfShifted") return InitialMode::IdfShifted;
    throw validation_error("initial mode must be OnFixedPoint or IdfShifted");
}

void write_summary(const std::string& path, const ordered_json& j) {
    io::atomic_write_text(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------- fixed-points

struct FixedPointsOpts {
    double c = 0.2, delta = 0.1;
    double r_min = -0.25, r_max = 0.25;
    int grid_n = 501;
    std::string out = "fixed_points.csv";
    std::string config;
};

void run_fixed_points(FixedPointsOpts o) {
    if (!o.config.empty()) {
        ordered_json j = load_config(o.config);
        reject_unknown_keys(j, {"c", "delta", "r_min", "r_max", "grid_n", "out"});
        take(j, "c", o.c);
        take(j, "delta", o.delta);
        take(j, "r_min", o.r_min);
        take(j, "r_max", o.r_max);
        take(j, "grid_n", o.grid_n);
        take(j, "out", o.out);
    }
    ModelParams m{o.c, o.delta};
    io::Csv table = io::fixed_point_table(m, o.r_min, o.r_max, o.grid_n);
    io::write_csv(o.out, table);
    std::cout << "fixed-points: " << table.cells.size() << " rows over R in [" << o.r_min
              << ", " << o.r_max << "] -> " << o.out << "\n";
}

// ----------------------------------------------------------------------- sweep

struct SweepOpts {
    double c = 0.2, delta = 0.1, dt = 0.05;
    std::uint64_t stride = 0;
    double r_from = -0.25, r_to = 0.25, speed = 1e-5;
    std::string initial_mode = "OnFixedPoint";
    std::string out = "sweep.csv";
    std::string summary = "sweep_summary.json";
    std::string config;
    std::string resume;
    bool r_to_given = false;
};

ordered_json sweep_config_echo(const SweepOpts& o, std::uint64_t resolved_stride) {
    return ordered_json{{"c", o.c},
                        {"delta", o.delta},
                        {"dt", o.dt},
                        {"stride", resolved_stride},
                        {"r_from", o.r_from},
                        {"r_to", o.r_to},
                        {"speed", o.speed},
                        {"initial_mode", o.initial_mode},
                        {"out", o.out},
                        {"summary", o.summary}};
}

ordered_json sweep_results_json(const SweepResult& res, const ModelParams& m, double r_from,
                                double speed) {
    ordered_json idf = nullptr;
    if (fixed_points(r_from, m).size() == 1) {
        IdfPrediction pred = idf_prediction(r_from, speed, m);
        idf = ordered_json{{"mean_dq", pred.mean_dq}, {"mean_dp", pred.mean_dp}};
    }
    const Trajectory& tr = res.trajectory;
    return ordered_json{
        {"branch", to_string(res.branch)},
        {"q_at_r0", res.q_at_r0},
        {"energy_balance_residual", res.energy_balance_residual},
        {"idf_prediction_at_start", idf},
        {"sample_count", tr.samples.size()},
        {"final",
         ordered_json{{"t", tr.final_t},
                      {"q", tr.final_q},
                      {"p", tr.final_p},
                      {"r", tr.samples.back().r},
                      {"step_count", tr.step_count}}}};
}

void run_sweep_cmd(SweepOpts o) {
    if (!o.config.empty() && !o.resume.empty())
        throw validation_error("--config and --resume cannot be combined");
    if (!o.config.empty()) {
        ordered_json j = load_config(o.config);
        reject_unknown_keys(j, {"c", "delta", "dt", "stride", "r_from", "r_to", "speed",
                                "initial_mode", "out", "summary"});
        take(j, "c", o.c);
        take(j, "delta", o.delta);
        take(j, "dt", o.dt);
        take(j, "stride", o.stride);
        take(j, "r_from", o.r_from);
        take(j, "r_to", o.r_to);
        take(j, "speed", o.speed);
        take(j, "initial_mode", o.initial_mode);
        take(j, "out", o.out);
        take(j, "summary", o.summary);
    }

    SweepResult res;
    ModelParams m{o.c, o.delta};
    if (!o.resume.empty()) {
        ordered_json full = ordered_json::parse(io::read_text(o.resume));
        if (!full.contains("config") || !full.contains("results") ||
            !full.at("results").contains("final"))
            throw validation_error("resume file is not a sweep summary");
        // Everything but the output paths and an optional new target comes
        // from the stored run; mixing in other flags would break the splice.
        const ordered_json& cfg = full.at("config");
        SweepOpts stored;
        stored.out = o.out;
        stored.summary = o.summary;
        stored.resume = o.resume;
        take(cfg, "c", stored.c);
        take(cfg, "delta", stored.delta);
        take(cfg, "dt", stored.dt);
        take(cfg, "stride", stored.stride);
        take(cfg, "r_from", stored.r_from);
        take(cfg, "r_to", stored.r_to);
        take(cfg, "speed", stored.speed);
        take(cfg, "initial_mode", stored.initial_mode);
        if (o.r_to_given) stored.r_to = o.r_to;
        o = stored;

        const ordered_json& fin = full.at("results").at("final");
        auto start_step = fin.at("step_count").get<std::uint64_t>();
        double final_t = fin.at("t").get<double>();
        if (final_t != static_cast<double>(start_step) * o.dt)
            throw validation_error("cannot resume a run that ended on a partial step");
        PhaseState state{fin.at("q").get<double>(), fin.at("p").get<double>()};

        m = ModelParams{o.c, o.delta};
        res = resume_sweep(m, o.r_from, o.r_to, o.speed, o.dt, state, start_step, o.stride);
    } else {
        res = run_sweep(m, o.r_from, o.r_to, o.speed, o.dt, parse_mode(o.initial_mode), o.stride);
    }

    io::write_csv(o.out, io::trajectory_table(res.trajectory, &res.deviation_series));
    ordered_json summary{{"command", "sweep"},
                         {"config", sweep_config_echo(o, res.trajectory.sample_stride)},
                         {"results", sweep_results_json(res, m, o.r_from, o.speed)}};
    write_summary(o.summary, summary);
    std::cout << "sweep: branch=" << to_string(res.branch) << " q_at_r0=" << res.q_at_r0
              << " -> " << o.out << ", " << o.summary << "\n";
}

// ------------------------------------------------------------------ hysteresis

struct HysteresisOpts {
    double c = 0.2, delta = 0.1, dt = 0.05;
    std::uint64_t stride = 0;
    double r_min = -0.25, r_max = 0.25, speed = 1e-5;
    std::string out = "hysteresis_loop.csv";
    std::string summary = "hysteresis_summary.json";
    std::string config;
};

void run_hysteresis_cmd(HysteresisOpts o) {
    if (!o.config.empty()) {
        ordered_json j = load_config(o.config);
        reject_unknown_keys(j, {"c", "delta", "dt", "stride", "r_min", "r_max", "speed",
                                "out", "summary"});
        take(j, "c", o.c);
        take(j, "delta", o.delta);
        take(j, "dt", o.dt);
        take(j, "stride", o.stride);
        take(j, "r_min", o.r_min);
        take(j, "r_max", o.r_max);
        take(j, "speed", o.speed);
        take(j, "out", o.out);
        take(j, "summary", o.summary);
    }
    ModelParams m{o.c, o.delta};
    HysteresisResult h = run_hysteresis(m, o.r_min, o.r_max, o.speed, o.dt, o.stride);
    io::write_csv(o.out, io::loop_table(h.forward.trajectory, h.backward.trajectory));

    ordered_json summary{
        {"command", "hysteresis"},
        {"config",
         ordered_json{{"c", o.c},
                      {"delta", o.delta},
                      {"dt", o.dt},
                      {"stride", h.forward.trajectory.sample_stride},
                      {"r_min", o.r_min},
                      {"r_max", o.r_max},
                      {"speed", o.speed},
                      {"out", o.out},
                      {"summary", o.summary}}},
        {"results",
         ordered_json{{"forward_branch", to_string(h.forward.branch)},
                      {"backward_branch", to_string(h.backward.branch)},
                      {"forward_q_at_r0", h.forward.q_at_r0},
                      {"backward_q_at_r0", h.backward.q_at_r0},
                      {"loop_area", h.loop_area},
                      {"loop_closure_gap", h.loop_closure_gap},
                      {"mirror_mismatch",
                       mirror_mismatch(h.forward.trajectory, h.backward.trajectory, m)}}}};
    write_summary(o.summary, summary);
    std::cout << "hysteresis: " << to_string(h.forward.branch) << "/"
              << to_string(h.backward.branch) << " area=" << h.loop_area
              << " closure_gap=" << h.loop_closure_gap << " -> " << o.out << ", " << o.summary
              << "\n";
}

// ----------------------------------------------------------------------- berry

struct BerryOpts {
    double delta = 0.1, dt = 0.05, speed = 1e-5;
    double margin = berry_margin_default;
    double sample_interval = berry_sample_interval_default;
    std::vector<double> c_values = {0.15, 0.2, 0.25, 0.3};
    std::string summary = "berry_summary.json";
    std::string config;
};

void run_berry_cmd(BerryOpts o) {
    if (!o.config.empty()) {
        ordered_json j = load_config(o.config);
        reject_unknown_keys(j, {"delta", "dt", "speed", "margin", "sample_interval",
                                "c_values", "summary"});
        take(j, "delta", o.delta);
        take(j, "dt", o.dt);
        take(j, "speed", o.speed);
        take(j, "margin", o.margin);
        take(j, "sample_interval", o.sample_interval);
        take(j, "c_values", o.c_values);
        take(j, "summary", o.summary);
    }
    if (o.c_values.empty()) throw validation_error("berry scan needs at least one c value");

    std::vector<BerryPhaseReport> reports =
        parallel_map(o.c_values.size(), [&](std::size_t i) {
            ModelParams mi{o.c_values[i], o.delta};
            return berry_experiment(mi, o.speed, o.dt, o.margin, o.sample_interval);
        });

    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const BerryPhaseReport& r = reports[i];
        rows.push_back(ordered_json{{"c", o.c_values[i]},
                                    {"analytic", r.analytic},
                                    {"numeric", r.numeric},
                                    {"relative_error", std::abs(r.numeric - r.analytic) /
                                                           std::abs(r.analytic)},
                                    {"loop_closure_gap", r.loop_closure_gap}});
    }
    ordered_json summary{{"command", "berry"},
                         {"config",
                          ordered_json{{"delta", o.delta},
                                       {"dt", o.dt},
                                       {"speed", o.speed},
                                       {"margin", o.margin},
                                       {"sample_interval", o.sample_interval},
                                       {"c_values", o.c_values},
                                       {"summary", o.summary}}},
                         {"results", rows}};
    write_summary(o.summary, summary);
    std::cout << "berry: " << reports.size() << " parameter points -> " << o.summary << "\n";
    for (const auto& row : rows)
        std::cout << "  c=" << row.at("c").get<double>()
                  << " analytic=" << row.at("analytic").get<double>()
                  << " numeric=" << row.at("numeric").get<double>() << "\n";
}

// ------------------------------------------------------------------- idf-check

struct IdfCheckOpts {
    double c = 0.2, delta = 0.1, dt = 0.05;
    std::uint64_t stride = 0;
    double r_from = -0.25, r_stop = -0.19, speed = 1e-6;
    std::string initial_mode = "IdfShifted";
    std::string out = "idf_check.csv";
    std::string summary = "idf_check_summary.json";
    std::string config;
};

void run_idf_check_cmd(IdfCheckOpts o) {
    if (!o.config.empty()) {
        ordered_json j = load_config(o.config);
        reject_unknown_keys(j, {"c", "delta", "dt", "stride", "r_from", "r_stop", "speed",
                                "initial_mode", "out", "summary"});
        take(j, "c", o.c);
        take(j, "delta", o.delta);
        take(j, "dt", o.dt);
        take(j, "stride", o.stride);
        take(j, "r_from", o.r_from);
        take(j, "r_stop", o.r_stop);
        take(j, "speed", o.speed);
        take(j, "initial_mode", o.initial_mode);
        take(j, "out", o.out);
        take(j, "summary", o.summary);
    }
    ModelParams m{o.c, o.delta};
    std::vector<TrackingSample> series = idf_tracking_experiment(
        m, o.r_from, o.r_stop, o.speed, o.dt, parse_mode(o.initial_mode), o.stride);
    io::write_csv(o.out, io::tracking_table(series));

    double max_abs = 0.0, max_rel = 0.0;
    for (const TrackingSample& s : series) {
        max_abs = std::max(max_abs, std::abs(s.dq_actual - s.mean_dq_theory));
        if (s.mean_dq_theory != 0.0)
            max_rel = std::max(max_rel, std::abs(s.dq_actual - s.mean_dq_theory) /
                                            std::abs(s.mean_dq_theory));
    }
    ordered_json summary{{"command", "idf-check"},
                         {"config",
                          ordered_json{{"c", o.c},
                                       {"delta", o.delta},
                                       {"dt", o.dt},
                                       {"stride", o.stride},
                                       {"r_from", o.r_from},
                                       {"r_stop", o.r_stop},
                                       {"speed", o.speed},
                                       {"initial_mode", o.initial_mode},
                                       {"out", o.out},
                                       {"summary", o.summary}}},
                         {"results",
                          ordered_json{{"sample_count", series.size()},
                                       {"max_abs_deviation_from_theory", max_abs},
                                       {"max_rel_deviation_from_theory", max_rel}}}};
    write_summary(o.summary, summary);
    std::cout << "idf-check: " << series.size() << " samples, max relative deviation "
              << max_rel << " -> " << o.out << ", " << o.summary << "\n";
}

// -------------------------------------------------------------------- ensemble

struct EnsembleOpts {
    double c = 0.2, delta = 0.1, dt = 0.05;
    double r = -0.25, speed = 1e-6, radius = 1e-4;
    int samples = 64, periods = 4;
    std::uint64_t seed = 0;
    std::string summary = "ensemble_summary.json";
    std::string config;
};

void run_ensemble_cmd(EnsembleOpts o) {
    if (!o.config.empty()) {
        ordered_json j = load_config(o.config);
        reject_unknown_keys(j, {"c", "delta", "dt", "r", "speed", "radius", "samples",
                                "periods", "seed", "summary"});
        take(j, "c", o.c);
        take(j, "delta", o.delta);
        take(j, "dt", o.dt);
        take(j, "r", o.r);
        take(j, "speed", o.speed);
        take(j, "radius", o.radius);
        take(j, "samples", o.samples);
        take(j, "periods", o.periods);
        take(j, "seed", o.seed);
        take(j, "summary", o.summary);
    }
    ModelParams m{o.c, o.delta};
    // The ring average is rotation invariant; the seed only shifts the ring's
    // starting angle so repeated runs can probe that invariance.
    std::mt19937_64 gen(o.seed);
    double theta0 = std::uniform_real_distribution<double>(0.0, 2.0 * pi)(gen);
    EnsembleResult res =
        ensemble_average_oracle(m, o.r, o.speed, o.samples, o.radius, o.dt, o.periods, theta0);
    IdfPrediction pred = idf_prediction(o.r, o.speed, m);

    ordered_json summary{
        {"command", "ensemble"},
        {"config",
         ordered_json{{"c", o.c},
                      {"delta", o.delta},
                      {"dt", o.dt},
                      {"r", o.r},
                      {"speed", o.speed},
                      {"radius", o.radius},
                      {"samples", o.samples},
                      {"periods", o.periods},
                      {"seed", o.seed},
                      {"summary", o.summary}}},
        {"results",
         ordered_json{{"theta0", theta0},
                      {"measured", ordered_json{{"mean_dq", res.mean_dq},
                                                {"mean_dp", res.mean_dp}}},
                      {"predicted", ordered_json{{"mean_dq", pred.mean_dq},
                                                 {"mean_dp", pred.mean_dp}}},
                      {"rel_error_mean_dq",
                       std::abs(res.mean_dq - pred.mean_dq) / std::abs(pred.mean_dq)},
                      {"abs_error_mean_dp", std::abs(res.mean_dp - pred.mean_dp)}}}};
    write_summary(o.summary, summary);
    std::cout << "ensemble: mean_dq=" << res.mean_dq << " (predicted " << pred.mean_dq
              << ") -> " << o.summary << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Slowly driven two-mode mean-field model: fixed points, branch-selecting "
                 "sweeps, hysteresis loops, and geometric phase"};
    app.require_subcommand(1);

    FixedPointsOpts fp;
    auto* sub_fp = app.add_subcommand("fixed-points", "Tabulate fixed points over an R grid");
    sub_fp->add_option("--c", fp.c, "self-trapping strength")->capture_default_str();
    sub_fp->add_option("--delta", fp.delta, "symmetry-restoring coupling")->capture_default_str();
    sub_fp->add_option("--r-min", fp.r_min, "grid start")->capture_default_str();
    sub_fp->add_option("--r-max", fp.r_max, "grid end")->capture_default_str();
    sub_fp->add_option("--grid-n", fp.grid_n, "grid node count")->capture_default_str();
    sub_fp->add_option("--out", fp.out, "output CSV path")->capture_default_str();
    sub_fp->add_option("--config", fp.config, "JSON config overriding flags");
    sub_fp->callback([&] { run_fixed_points(fp); });

    SweepOpts sw;
    auto* sub_sw = app.add_subcommand("sweep", "Single constant-rate sweep across the fork");
    sub_sw->add_option("--c", sw.c, "self-trapping strength")->capture_default_str();
    sub_sw->add_option("--delta", sw.delta, "symmetry-restoring coupling")->capture_default_str();
    sub_sw->add_option("--dt", sw.dt, "integrator step")->capture_default_str();
    sub_sw->add_option("--stride", sw.stride, "sample stride (0 = auto)")->capture_default_str();
    sub_sw->add_option("--r-from", sw.r_from, "sweep start")->capture_default_str();
    auto* rto_opt =
        sub_sw->add_option("--r-to", sw.r_to, "sweep end")->capture_default_str();
    sub_sw->add_option("--speed", sw.speed, "dR/dt, sign sets direction")->capture_default_str();
    sub_sw->add_option("--initial-mode", sw.initial_mode, "OnFixedPoint or IdfShifted")
        ->check(CLI::IsMember({"OnFixedPoint", "IdfShifted"}))
        ->capture_default_str();
    sub_sw->add_option("--out", sw.out, "trajectory CSV path")->capture_default_str();
    sub_sw->add_option("--summary", sw.summary, "summary JSON path")->capture_default_str();
    sub_sw->add_option("--config", sw.config, "JSON config overriding flags");
    sub_sw->add_option("--resume", sw.resume,
                       "summary JSON of an earlier sweep to continue from");
    sub_sw->callback([&] {
        sw.r_to_given = rto_opt->count() > 0;
        run_sweep_cmd(sw);
    });

    HysteresisOpts hy;
    auto* sub_hy = app.add_subcommand("hysteresis", "Up sweep then continued down sweep");
    sub_hy->add_option("--c", hy.c, "self-trapping strength")->capture_default_str();
    sub_hy->add_option("--delta", hy.delta, "symmetry-restoring coupling")->capture_default_str();
    sub_hy->add_option("--dt", hy.dt, "integrator step")->capture_default_str();
    sub_hy->add_option("--stride", hy.stride, "sample stride (0 = auto)")->capture_default_str();
    sub_hy->add_option("--r-min", hy.r_min, "lower turning point")->capture_default_str();
    sub_hy->add_option("--r-max", hy.r_max, "upper turning point")->capture_default_str();
    sub_hy->add_option("--speed", hy.speed, "|dR/dt| of both legs")->capture_default_str();
    sub_hy->add_option("--out", hy.out, "loop CSV path")->capture_default_str();
    sub_hy->add_option("--summary", hy.summary, "summary JSON path")->capture_default_str();
    sub_hy->add_option("--config", hy.config, "JSON config overriding flags");
    sub_hy->callback([&] { run_hysteresis_cmd(hy); });

    BerryOpts be;
    auto* sub_be = app.add_subcommand("berry", "Geometric phase of the closed navigation cycle");
    sub_be->add_option("--c-values", be.c_values, "c values to scan")
        ->delimiter(',')
        ->capture_default_str();
    sub_be->add_option("--delta", be.delta, "symmetry-restoring coupling")->capture_default_str();
    sub_be->add_option("--dt", be.dt, "integrator step")->capture_default_str();
    sub_be->add_option("--speed", be.speed, "|dR/dt| of both legs")->capture_default_str();
    sub_be->add_option("--margin", be.margin, "overshoot beyond the fork ends")
        ->capture_default_str();
    sub_be->add_option("--sample-interval", be.sample_interval,
                       "time between loop vertices; keep it a large fraction of the "
                       "oscillation period")
        ->capture_default_str();
    sub_be->add_option("--summary", be.summary, "summary JSON path")->capture_default_str();
    sub_be->add_option("--config", be.config, "JSON config overriding flags");
    sub_be->callback([&] { run_berry_cmd(be); });

    IdfCheckOpts ic;
    auto* sub_ic = app.add_subcommand(
        "idf-check", "Deviation from the followed fixed point vs the rate-linear theory");
    sub_ic->add_option("--c", ic.c, "self-trapping strength")->capture_default_str();
    sub_ic->add_option("--delta", ic.delta, "symmetry-restoring coupling")->capture_default_str();
    sub_ic->add_option("--dt", ic.dt, "integrator step")->capture_default_str();
    sub_ic->add_option("--stride", ic.stride, "sample stride (0 = auto)")->capture_default_str();
    sub_ic->add_option("--r-from", ic.r_from, "window start")->capture_default_str();
    sub_ic->add_option("--r-stop", ic.r_stop, "window end, left of the split")
        ->capture_default_str();
    sub_ic->add_option("--speed", ic.speed, "dR/dt")->capture_default_str();
    sub_ic->add_option("--initial-mode", ic.initial_mode, "OnFixedPoint or IdfShifted")
        ->check(CLI::IsMember({"OnFixedPoint", "IdfShifted"}))
        ->capture_default_str();
    sub_ic->add_option("--out", ic.out, "series CSV path")->capture_default_str();
    sub_ic->add_option("--summary", ic.summary, "summary JSON path")->capture_default_str();
    sub_ic->add_option("--config", ic.config, "JSON config overriding flags");
    sub_ic->callback([&] { run_idf_check_cmd(ic); });

    EnsembleOpts en;
    auto* sub_en = app.add_subcommand(
        "ensemble", "Ring-of-initial-deviations average against the mean-deviation formula");
    sub_en->add_option("--c", en.c, "self-trapping strength")->capture_default_str();
    sub_en->add_option("--delta", en.delta, "symmetry-restoring coupling")->capture_default_str();
    sub_en->add_option("--dt", en.dt, "integrator step")->capture_default_str();
    sub_en->add_option("--r", en.r, "coupling at which to probe")->capture_default_str();
    sub_en->add_option("--speed", en.speed, "dR/dt during the probe")->capture_default_str();
    sub_en->add_option("--radius", en.radius, "ring radius in deviation space")
        ->capture_default_str();
    sub_en->add_option("--samples", en.samples, "ring size")->capture_default_str();
    sub_en->add_option("--periods", en.periods, "oscillation periods per time average")
        ->capture_default_str();
    sub_en->add_option("--seed", en.seed, "rotates the ring's starting angle")
        ->capture_default_str();
    sub_en->add_option("--summary", en.summary, "summary JSON path")->capture_default_str();
    sub_en->add_option("--config", en.config, "JSON config overriding flags");
    sub_en->callback([&] { run_ensemble_cmd(en); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const undecided_branch_error& e) {
        std::cerr << "undecided branch: " << e.what() << "\n";
        return 4;
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const numerical_domain_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
