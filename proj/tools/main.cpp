// airgam: semiparametric quasi-Poisson time-series regression with
// distributed lags for daily environmental-health panels.
//
// Subcommands: ingest, describe, decompose, select-df, fit, report,
// simulate, demo. Exit codes: 0 success, 1 user error, 2 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "airgam/csv.hpp"
#include "airgam/dates.hpp"
#include "airgam/decompose.hpp"
#include "airgam/dlm.hpp"
#include "airgam/gam.hpp"
#include "airgam/manifest.hpp"
#include "airgam/panel.hpp"
#include "airgam/risk.hpp"
#include "airgam/selection.hpp"
#include "airgam/simulate.hpp"
#include "airgam/spline.hpp"
#include "airgam/threads.hpp"

namespace {

using namespace airgam;

constexpr int kExitOk = 0;
constexpr int kExitUserError = 1;
constexpr int kExitNumericalError = 2;

struct CommonArgs {
    std::string in_path;
    std::string out_path;
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;  // 0 = hardware default
};

int effective_threads(const CommonArgs& args) {
    return args.threads > 0 ? args.threads : default_thread_count();
}

RunManifest make_manifest(const std::string& command,
                          const std::map<std::string, std::string>& parameters,
                          const std::vector<std::string>& inputs,
                          const std::string& seed = "") {
    RunManifest manifest;
    manifest.command = command;
    manifest.parameters = parameters;
    for (const auto& path : inputs) manifest.input_digests[path] = file_digest(path);
    manifest.timestamp = utc_timestamp_now();
    manifest.seed = seed;
    return manifest;
}

void write_output(const std::string& path, const std::string& content,
                  const RunManifest& manifest) {
    write_file_atomic(path, content);
    manifest.write_beside(path);
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const int lo = std::stoi(text.substr(0, colon));
        const int hi = std::stoi(text.substr(colon + 1));
        if (lo < 1 || hi < lo) throw std::invalid_argument("bad grid range: " + text);
        for (int k = lo; k <= hi; ++k) grid.push_back(static_cast<double>(k));
        return grid;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) grid.push_back(std::stod(item));
    }
    if (grid.empty()) throw std::invalid_argument("empty grid: " + text);
    return grid;
}

// Stratum selectors look like "all:all", "male:<65", "female:65-75".
std::string resolve_stratum(DailyPanel& panel, const std::string& selector) {
    const auto colon = selector.find(':');
    if (colon == std::string::npos) {
        if (panel.outcomes.count(selector) != 0) return selector;  // raw key
        throw std::invalid_argument("bad stratum selector '" + selector +
                                    "' (use sex:age, e.g. all:all or male:<65)");
    }
    const std::string sex = selector.substr(0, colon);
    const std::string age = selector.substr(colon + 1);
    if (sex == "all" && age == "all") {
        if (panel.outcomes.count("total") == 0) {
            throw std::invalid_argument("panel has no total outcome series");
        }
        return "total";
    }
    const std::string key = "stratum " + selector;
    panel.outcomes[key] = stratify(panel, sex, age);
    return key;
}

std::vector<bool> outlier_exclusion(const DailyPanel& panel, const std::string& stratum,
                                    double outlier_k, bool enabled) {
    std::vector<bool> exclude(panel.size(), false);
    if (!enabled) return exclude;
    const OutlierMask mask = detect_outliers(panel.outcomes.at(stratum), outlier_k);
    for (std::size_t i = 0; i < mask.flags.size(); ++i) exclude[i] = mask.flags[i];
    return exclude;
}

PanelSchema load_schema(const std::string& path) {
    if (path.empty()) return PanelSchema{};
    return PanelSchema::from_json_file(path);
}

std::string stats_table(const DailyPanel& panel) {
    std::ostringstream out;
    out << "series,n,mean,sd,skewness,kurtosis,variance,coefficient_of_variation,"
           "min,q1,median,q3,max\n";
    auto emit = [&](const std::string& name, const Series& series) {
        SeriesStats s;
        try {
            s = descriptive_stats(series);
        } catch (const std::invalid_argument&) {
            return;  // all-missing series are skipped
        }
        out << name << ',' << s.n_used << ',' << format_number(s.mean) << ','
            << format_number(s.sd) << ',' << format_number(s.skewness) << ','
            << format_number(s.kurtosis) << ',' << format_number(s.variance) << ','
            << format_number(s.coefficient_of_variation) << ',' << format_number(s.min) << ','
            << format_number(s.q1) << ',' << format_number(s.median) << ','
            << format_number(s.q3) << ',' << format_number(s.max) << '\n';
    };
    std::vector<std::string> outcome_order = {"total"};
    outcome_order.insert(outcome_order.end(), kStratumKeys.begin(), kStratumKeys.end());
    for (const auto& key : outcome_order) {
        if (auto it = panel.outcomes.find(key); it != panel.outcomes.end()) {
            emit(key, it->second);
        }
    }
    for (const auto& key : kPollutantKeys) {
        if (auto it = panel.pollutants.find(key); it != panel.pollutants.end()) {
            emit(key, it->second);
        }
    }
    for (const auto& key : kMeteoKeys) {
        if (auto it = panel.meteo.find(key); it != panel.meteo.end()) emit(key, it->second);
    }
    out << "# moments use population denominators (n); kurtosis is plain m4/m2^2; "
           "quartiles are type 7\n";
    return out.str();
}

std::string selection_table(const SelectionResult& result, const std::string& criterion_name) {
    std::ostringstream out;
    out << "df_per_year,total_df," << criterion_name << "\n";
    for (std::size_t i = 0; i < result.candidate_dfs_per_year.size(); ++i) {
        out << format_number(result.candidate_dfs_per_year[i]) << ','
            << result.candidate_total_dfs[i] << ',' << format_number(result.scores[i]) << '\n';
    }
    out << "# chosen: df_per_year=" << format_number(result.chosen_df_per_year)
        << " total_df=" << result.chosen_total_df << '\n';
    if (result.strategy == SelectionStrategy::outcome && !result.pacf_values.empty()) {
        out << "# residual diagnostics at chosen df: ljung_box_q="
            << format_number(result.ljung_box_statistic)
            << " white_noise_p=" << format_number(result.white_noise_p_value) << '\n';
        out << "# pacf:";
        for (double v : result.pacf_values) out << ' ' << format_number(v);
        out << '\n';
    }
    return out.str();
}

std::string coefficient_table(const DlmFit& fit, double delta_x) {
    std::ostringstream out;
    const Eigen::VectorXd se = fit.base.standard_errors();
    const Eigen::VectorXd t = fit.base.t_values();
    const Eigen::VectorXd p = fit.base.p_values();
    out << "term,estimate,std_error,t_value,p_value,signif\n";
    for (std::size_t i = 0; i < fit.base.term_names.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        out << fit.base.term_names[i] << ',' << format_number(fit.base.coefficients(idx)) << ','
            << format_number(se(idx)) << ',' << format_number(t(idx)) << ','
            << format_number(p(idx)) << ',' << significance_stars(p(idx)) << '\n';
    }
    const CumulativeEffect cum = cumulative_effect(fit);
    const RiskEstimate risk =
        make_risk_estimate(cum.beta_sum, cum.se_sum, delta_x, 0.95, "cumulative");
    out << "# cumulative: beta_sum=" << format_number(cum.beta_sum)
        << " se_sum=" << format_number(cum.se_sum) << " delta_x=" << format_number(delta_x)
        << " rr=" << format_number(risk.rr) << " percent=" << format_number(risk.percent)
        << " ci=[" << format_number(risk.ci_low) << ',' << format_number(risk.ci_high) << "]\n";
    out << "# dispersion=" << format_number(fit.base.dispersion)
        << " edf=" << format_number(fit.base.edf) << " gcv=" << format_number(fit.base.gcv)
        << " qaic=" << format_number(fit.base.qaic) << " n_used=" << fit.base.n_used
        << " converged=" << (fit.base.converged ? "true" : "false") << '\n';
    return out.str();
}

struct ReportRow {
    std::string pollutant;
    std::string model;  // "exposure" or "hospitalization"
    double estimate_pct = 0.0;
    double se_log_per_unit = 0.0;
    double se_pct = 0.0;
    double df_per_year = 0.0;
    double rr = 1.0, ci_low = 1.0, ci_high = 1.0;
    double white_noise_p = 1.0;
    bool converged = false;
};

std::string report_table(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    out << "pollutant,model,estimate_pct,se_log_per_unit,se_pct,df_per_year,rr,ci_low,"
           "ci_high,white_noise_p,converged\n";
    for (const auto& r : rows) {
        out << r.pollutant << ',' << r.model << ',' << format_number(r.estimate_pct) << ','
            << format_number(r.se_log_per_unit) << ',' << format_number(r.se_pct) << ','
            << format_number(r.df_per_year) << ',' << format_number(r.rr) << ','
            << format_number(r.ci_low) << ',' << format_number(r.ci_high) << ','
            << format_number(r.white_noise_p) << ',' << (r.converged ? "true" : "false")
            << '\n';
    }
    return out.str();
}

// Selections plus fits for one pollutant, both smoothing strategies.
struct PollutantComparison {
    SelectionResult exposure_sel;
    SelectionResult outcome_sel;
    DlmFit exposure_fit;
    DlmFit outcome_fit;
    ReportRow exposure_row;
    ReportRow outcome_row;
};

PollutantComparison compare_strategies(DailyPanel& panel, const std::string& pollutant,
                                       const std::string& stratum,
                                       const std::vector<double>& grid, int max_lag, int temp_df,
                                       double delta_x, const std::vector<bool>* exclude,
                                       int threads) {
    PollutantComparison out;
    out.exposure_sel = select_df_exposure(panel, pollutant, grid, {}, threads);
    OutcomeSelectionOptions opts;
    opts.max_lag = max_lag;
    opts.temperature_df = temp_df;
    opts.exclude = exclude;
    out.outcome_sel = select_df_outcome(panel, stratum, pollutant, grid, opts, threads);

    auto run = [&](const SelectionResult& sel, const std::string& model) {
        const DlmFit fit = fit_dlm(panel, pollutant, max_lag, sel.chosen_total_df, temp_df,
                                   stratum, exclude);
        const CumulativeEffect cum = cumulative_effect(fit);
        const RiskEstimate risk =
            make_risk_estimate(cum.beta_sum, cum.se_sum, delta_x, 0.95, "cumulative");
        ReportRow row;
        row.pollutant = pollutant;
        row.model = model;
        row.estimate_pct = risk.percent;
        row.se_log_per_unit = cum.se_sum;
        row.se_pct = percent_se_delta_method(cum.beta_sum, cum.se_sum, delta_x);
        row.df_per_year = sel.chosen_df_per_year;
        row.rr = risk.rr;
        row.ci_low = risk.ci_low;
        row.ci_high = risk.ci_high;
        row.white_noise_p = sel.white_noise_p_value;
        row.converged = fit.base.converged;
        return std::make_pair(fit, row);
    };
    std::tie(out.exposure_fit, out.exposure_row) = run(out.exposure_sel, "exposure");
    std::tie(out.outcome_fit, out.outcome_row) = run(out.outcome_sel, "hospitalization");
    return out;
}

// ---- subcommand bodies ----

int cmd_ingest(const CommonArgs& args, const std::string& delim) {
    PanelSchema schema = load_schema(args.config_path);
    if (!delim.empty()) schema.delimiter = delim[0];
    std::ifstream in(args.in_path);
    if (!in) throw std::invalid_argument("cannot open input: " + args.in_path);
    const DailyPanel panel = load_panel(in, schema);
    std::map<std::string, std::string> params = {{"in", args.in_path},
                                                 {"delimiter", std::string(1, schema.delimiter)}};
    if (!args.config_path.empty()) params["config"] = args.config_path;
    std::vector<std::string> inputs = {args.in_path};
    if (!args.config_path.empty()) inputs.push_back(args.config_path);
    write_output(args.out_path, panel_to_csv(panel), make_manifest("ingest", params, inputs));
    std::cout << "ingested " << panel.size() << " days, "
              << panel.outcomes.size() + panel.pollutants.size() + panel.meteo.size()
              << " series -> " << args.out_path << "\n";
    return kExitOk;
}

int cmd_describe(const CommonArgs& args) {
    const DailyPanel panel = load_panel_file(args.in_path, load_schema(args.config_path));
    const std::string table = stats_table(panel);
    if (args.out_path.empty()) {
        std::cout << table;
    } else {
        write_output(args.out_path, table,
                     make_manifest("describe", {{"in", args.in_path}}, {args.in_path}));
    }
    return kExitOk;
}

int cmd_decompose(const CommonArgs& args, const std::string& series_name, int impute_gap) {
    const DailyPanel panel = load_panel_file(args.in_path, load_schema(args.config_path));
    const Series* series = panel.find_series(series_name);
    if (series == nullptr) {
        throw std::invalid_argument("no such series in panel: " + series_name);
    }
    const Series completed = impute_missing(*series, impute_gap);
    std::size_t still_missing = 0;
    for (double v : completed) still_missing += is_missing(v) ? 1 : 0;
    if (still_missing > 0) {
        throw std::invalid_argument("series '" + series_name + "' still has " +
                                    std::to_string(still_missing) +
                                    " missing values after imputation; fill longer gaps first");
    }
    const DecompositionResult bands = three_scale_decomposition(completed);
    std::ostringstream out;
    out << "date," << series_name << ",long_term,seasonal,short_term\n";
    for (std::size_t i = 0; i < panel.size(); ++i) {
        out << format_iso_date(panel.dates[i]) << ',' << format_number(completed[i]) << ','
            << format_number(bands.long_term[i]) << ',' << format_number(bands.seasonal[i])
            << ',' << format_number(bands.short_term[i]) << '\n';
    }
    const TrendFit trend = linear_trend(completed);
    out << "# linear trend: slope_per_day=" << format_number(trend.slope)
        << " intercept=" << format_number(trend.intercept)
        << " slope_se=" << format_number(trend.slope_se)
        << " p=" << format_number(trend.p_value) << '\n';
    out << "# bands by whole-record cycle count: long<=1, seasonal 2-14, short>=15\n";
    write_output(args.out_path, out.str(),
                 make_manifest("decompose",
                               {{"in", args.in_path},
                                {"series", series_name},
                                {"impute_max_gap", std::to_string(impute_gap)}},
                               {args.in_path}));
    std::cout << "decomposed " << series_name << " over " << panel.size() << " days -> "
              << args.out_path << "\n";
    return kExitOk;
}

int cmd_select_df(const CommonArgs& args, const std::string& strategy,
                  const std::string& grid_text, const std::string& pollutant,
                  const std::string& stratum_sel, int max_lag, const std::string& criterion,
                  const std::string& selection_model, int temp_df, double outlier_k,
                  bool no_outlier_removal) {
    DailyPanel panel = load_panel_file(args.in_path, load_schema(args.config_path));
    const std::vector<double> grid = parse_grid(grid_text);
    const int threads = effective_threads(args);

    SelectionResult result;
    std::string criterion_name;
    if (strategy == "exposure") {
        result = select_df_exposure(panel, pollutant, grid, {}, threads);
        criterion_name = "gcv";
    } else if (strategy == "outcome") {
        const std::string stratum = resolve_stratum(panel, stratum_sel);
        const std::vector<bool> exclude =
            outlier_exclusion(panel, stratum, outlier_k, !no_outlier_removal);
        OutcomeSelectionOptions opts;
        opts.criterion = criterion == "bic" ? OutcomeCriterion::bic : OutcomeCriterion::qaic;
        opts.model = selection_model == "with-pollutant" ? OutcomeSelectionModel::with_pollutant
                                                         : OutcomeSelectionModel::trend_only;
        opts.max_lag = max_lag;
        opts.temperature_df = temp_df;
        opts.exclude = &exclude;
        result = select_df_outcome(panel, stratum, pollutant, grid, opts, threads);
        criterion_name = criterion;
    } else {
        throw std::invalid_argument("strategy must be exposure or outcome, got " + strategy);
    }

    const std::string table = selection_table(result, criterion_name);
    if (args.out_path.empty()) {
        std::cout << table;
    } else {
        write_output(args.out_path, table,
                     make_manifest("select-df",
                                   {{"in", args.in_path},
                                    {"strategy", strategy},
                                    {"grid", grid_text},
                                    {"pollutant", pollutant},
                                    {"stratum", stratum_sel},
                                    {"criterion", criterion},
                                    {"selection_model", selection_model},
                                    {"max_lag", std::to_string(max_lag)},
                                    {"temp_df", std::to_string(temp_df)}},
                                   {args.in_path}));
    }
    std::cout << "# " << strategy << " strategy chose df/year="
              << format_number(result.chosen_df_per_year)
              << " (total_df=" << result.chosen_total_df << ")\n";
    return kExitOk;
}

// Everything the fit subcommand needs; may come from a model config file,
// with explicitly passed flags taking precedence.
struct FitParams {
    std::string pollutant;
    std::string stratum = "all:all";
    int max_lag = 4;
    int time_df = 0;
    double time_df_per_year = 0.0;
    int temp_df = 6;
    double delta_x = 10.0;
    double outlier_k = 3.0;
    bool no_outlier_removal = false;
    PanelSchema schema;
};

FitParams fit_params_from_config(const std::string& path) {
    FitParams params;
    if (path.empty()) return params;
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model config: " + path);
    nlohmann::json j;
    in >> j;
    if (j.contains("pollutant")) j.at("pollutant").get_to(params.pollutant);
    if (j.contains("stratum")) j.at("stratum").get_to(params.stratum);
    if (j.contains("response")) j.at("response").get_to(params.stratum);
    if (j.contains("max_lag")) j.at("max_lag").get_to(params.max_lag);
    if (j.contains("time_df")) j.at("time_df").get_to(params.time_df);
    if (j.contains("time_df_per_year")) j.at("time_df_per_year").get_to(params.time_df_per_year);
    if (j.contains("temp_df")) j.at("temp_df").get_to(params.temp_df);
    if (j.contains("delta_x")) j.at("delta_x").get_to(params.delta_x);
    if (j.contains("outlier_k")) j.at("outlier_k").get_to(params.outlier_k);
    if (j.contains("schema")) {
        const auto& schema = j.at("schema");
        if (schema.contains("delimiter")) {
            const std::string d = schema.at("delimiter").get<std::string>();
            if (d.size() == 1) params.schema.delimiter = d[0];
        }
        if (schema.contains("columns")) {
            for (auto& [key, value] : schema.at("columns").items()) {
                params.schema.columns[key] = value.get<std::string>();
            }
        }
    }
    return params;
}

int cmd_fit(const CommonArgs& args, const FitParams& params) {
    if (params.pollutant.empty()) {
        throw std::invalid_argument("fit needs a pollutant (flag or model config)");
    }
    DailyPanel panel = load_panel_file(args.in_path, params.schema);
    const std::string stratum = resolve_stratum(panel, params.stratum);
    const std::vector<bool> exclude =
        outlier_exclusion(panel, stratum, params.outlier_k, !params.no_outlier_removal);

    int total_df = params.time_df;
    if (total_df <= 0) {
        if (!(params.time_df_per_year > 0.0)) {
            throw std::invalid_argument("provide --time-df or --time-df-per-year");
        }
        total_df =
            df_per_year_to_total(params.time_df_per_year, static_cast<long>(panel.size()));
    }

    const DlmFit fit = fit_dlm(panel, params.pollutant, params.max_lag, total_df,
                               params.temp_df, stratum, &exclude);
    const std::string table = coefficient_table(fit, params.delta_x);
    if (args.out_path.empty()) {
        std::cout << table;
    } else {
        write_output(args.out_path, table,
                     make_manifest("fit",
                                   {{"in", args.in_path},
                                    {"pollutant", params.pollutant},
                                    {"max_lag", std::to_string(params.max_lag)},
                                    {"time_df", std::to_string(total_df)},
                                    {"temp_df", std::to_string(params.temp_df)},
                                    {"stratum", params.stratum},
                                    {"delta_x", format_number(params.delta_x)}},
                                   {args.in_path}));
    }
    if (!fit.base.converged) {
        std::cerr << "fit did not converge; partial diagnostics written\n";
        return kExitNumericalError;
    }
    return kExitOk;
}

int cmd_report(const CommonArgs& args, const std::string& pollutants_text,
               const std::string& grid_text, int max_lag, int temp_df,
               const std::string& stratum_sel, double delta_x, double outlier_k,
               bool no_outlier_removal) {
    DailyPanel panel = load_panel_file(args.in_path, load_schema(args.config_path));
    const std::vector<double> grid = parse_grid(grid_text);
    const std::string stratum = resolve_stratum(panel, stratum_sel);
    const std::vector<bool> exclude =
        outlier_exclusion(panel, stratum, outlier_k, !no_outlier_removal);
    const int threads = effective_threads(args);

    std::vector<std::string> pollutants;
    if (pollutants_text == "all") {
        for (const auto& [key, series] : panel.pollutants) pollutants.push_back(key);
    } else {
        std::stringstream ss(pollutants_text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) pollutants.push_back(item);
        }
    }
    if (pollutants.empty()) throw std::invalid_argument("no pollutants requested");

    std::vector<ReportRow> rows;
    bool all_converged = true;
    for (const auto& pollutant : pollutants) {
        const PollutantComparison cmp = compare_strategies(
            panel, pollutant, stratum, grid, max_lag, temp_df, delta_x, &exclude, threads);
        rows.push_back(cmp.exposure_row);
        rows.push_back(cmp.outcome_row);
        all_converged &= cmp.exposure_row.converged && cmp.outcome_row.converged;
    }
    const std::string table = report_table(rows);
    if (args.out_path.empty()) {
        std::cout << table;
    } else {
        write_output(args.out_path, table,
                     make_manifest("report",
                                   {{"in", args.in_path},
                                    {"pollutants", pollutants_text},
                                    {"grid", grid_text},
                                    {"max_lag", std::to_string(max_lag)},
                                    {"temp_df", std::to_string(temp_df)},
                                    {"stratum", stratum_sel},
                                    {"delta_x", format_number(delta_x)}},
                                   {args.in_path}));
    }
    return all_converged ? kExitOk : kExitNumericalError;
}

int cmd_simulate(const CommonArgs& args, const std::string& scenario, int reps) {
    SimulationConfig config;
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw std::invalid_argument("cannot open config: " + args.config_path);
        nlohmann::json j;
        in >> j;
        config = j.get<SimulationConfig>();
    } else if (!scenario.empty()) {
        if (scenario.size() != 1) {
            throw std::invalid_argument("scenario must be A, B or C (or use --config)");
        }
        config = scenario_config(scenario[0]);
    } else {
        throw std::invalid_argument("simulate needs --scenario A|B|C or --config file.json");
    }
    if (!args.seed_set) throw std::invalid_argument("simulate requires an explicit --seed");
    config.seed = args.seed;

    const SimulationReport report = bias_experiment(config, reps, effective_threads(args));
    nlohmann::json j;
    to_json(j, report);
    std::map<std::string, std::string> params = {{"scenario", scenario},
                                                 {"reps", std::to_string(reps)}};
    std::vector<std::string> inputs;
    if (!args.config_path.empty()) {
        params["config"] = args.config_path;
        inputs.push_back(args.config_path);
    }
    write_output(args.out_path, j.dump(2) + "\n",
                 make_manifest("simulate", params, inputs, std::to_string(config.seed)));
    std::cout << "simulate: " << report.n_used << "/" << report.n_replicates
              << " replicates used\n"
              << "  exposure strategy: mean_bias=" << format_number(report.exposure.mean_bias)
              << " rmse=" << format_number(report.exposure.rmse)
              << " coverage=" << format_number(report.exposure.coverage)
              << " mean_df/yr=" << format_number(report.exposure.mean_chosen_df_per_year) << "\n"
              << "  outcome strategy:  mean_bias=" << format_number(report.outcome.mean_bias)
              << " rmse=" << format_number(report.outcome.rmse)
              << " coverage=" << format_number(report.outcome.coverage)
              << " mean_df/yr=" << format_number(report.outcome.mean_chosen_df_per_year) << "\n";
    return report.n_excluded == 0 ? kExitOk : kExitNumericalError;
}

int cmd_demo(const CommonArgs& args) {
    namespace fs = std::filesystem;
    const std::string out_dir = args.out_path.empty() ? "demo_out" : args.out_path;
    fs::create_directories(out_dir);
    const std::uint64_t seed = args.seed_set ? args.seed : 42;
    const int threads = effective_threads(args);

    // A compact strong-confounding scenario: big enough to show the
    // strategy split, small enough to finish in seconds.
    SimulationConfig config = scenario_config('C');
    config.n_days = 1461;
    config.seed = seed;

    GeneratedPanel gen = generate_panel(config, seed);
    write_file_atomic(out_dir + "/panel.csv", panel_to_csv(gen.panel));
    write_file_atomic(out_dir + "/stats.csv", stats_table(gen.panel));

    const std::vector<bool> exclude(gen.panel.size(), false);
    const PollutantComparison cmp =
        compare_strategies(gen.panel, config.pollutant_name, "total", config.candidate_grid, 4,
                           config.temp_df, 10.0, &exclude, threads);

    write_file_atomic(out_dir + "/select_exposure.csv",
                      selection_table(cmp.exposure_sel, "gcv"));
    write_file_atomic(out_dir + "/select_outcome.csv", selection_table(cmp.outcome_sel, "qaic"));
    write_file_atomic(out_dir + "/fit_exposure.csv", coefficient_table(cmp.exposure_fit, 10.0));
    write_file_atomic(out_dir + "/fit_outcome.csv", coefficient_table(cmp.outcome_fit, 10.0));
    write_file_atomic(out_dir + "/comparison.csv",
                      report_table({cmp.exposure_row, cmp.outcome_row}));

    const double truth_pct = percent_variation(gen.truth.beta_sum, 10.0);
    nlohmann::json summary = {
        {"seed", seed},
        {"n_days", config.n_days},
        {"beta_true_sum", gen.truth.beta_sum},
        {"true_percent_per_10_units", truth_pct},
        {"exposure",
         {{"df_per_year", cmp.exposure_row.df_per_year},
          {"estimate_pct", cmp.exposure_row.estimate_pct},
          {"error_pct", cmp.exposure_row.estimate_pct - truth_pct}}},
        {"outcome",
         {{"df_per_year", cmp.outcome_row.df_per_year},
          {"estimate_pct", cmp.outcome_row.estimate_pct},
          {"error_pct", cmp.outcome_row.estimate_pct - truth_pct}}},
        {"config", config}};
    write_file_atomic(out_dir + "/demo.json", summary.dump(2) + "\n");

    const RunManifest manifest = make_manifest(
        "demo", {{"out", out_dir}, {"threads", std::to_string(threads)}}, {},
        std::to_string(seed));
    write_file_atomic(out_dir + "/manifest.json", manifest.to_json().dump(2) + "\n");

    std::cout << "demo (seed " << seed << "): true %RR per 10 ug/m3 = "
              << format_number(truth_pct) << "\n"
              << "  exposure-based smoothing: df/yr="
              << format_number(cmp.exposure_row.df_per_year)
              << " estimate=" << format_number(cmp.exposure_row.estimate_pct) << "%\n"
              << "  outcome-based smoothing:  df/yr="
              << format_number(cmp.outcome_row.df_per_year)
              << " estimate=" << format_number(cmp.outcome_row.estimate_pct) << "%\n"
              << "outputs in " << out_dir << "/\n";
    return kExitOk;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_in, bool needs_out) {
    if (needs_in) cmd->add_option("--in", args.in_path, "input panel CSV")->required();
    auto* out = cmd->add_option("--out", args.out_path, "output path");
    if (needs_out) out->required();
    cmd->add_option("--config", args.config_path, "config file (JSON)");
    cmd->add_option("--seed", args.seed, "random seed")->each([&args](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--threads", args.threads, "worker threads (default: hardware)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semiparametric quasi-Poisson distributed-lag regression for daily "
                 "environmental-health panels"};
    app.require_subcommand(1);

    CommonArgs ingest_args;
    std::string ingest_delim;
    auto* ingest = app.add_subcommand("ingest", "load, validate and normalize a daily panel");
    add_common(ingest, ingest_args, true, true);
    ingest->add_option("--delim", ingest_delim, "field delimiter (default ,)");

    CommonArgs describe_args;
    auto* describe = app.add_subcommand("describe", "descriptive statistics per series");
    add_common(describe, describe_args, true, false);

    CommonArgs decomp_args;
    std::string series_name;
    int impute_gap = 3;
    auto* decomp = app.add_subcommand("decompose", "three-timescale Fourier band split");
    add_common(decomp, decomp_args, true, true);
    decomp->add_option("--series", series_name, "series to decompose")->required();
    decomp->add_option("--impute-max-gap", impute_gap, "imputation gap limit (days)");

    CommonArgs select_args;
    std::string strategy, grid_text = "1:16", sel_pollutant, sel_stratum = "all:all";
    std::string criterion = "qaic", selection_model = "trend-only";
    int sel_max_lag = 4, sel_temp_df = 6;
    double sel_outlier_k = 3.0;
    bool sel_no_outliers = false;
    auto* select = app.add_subcommand("select-df", "choose the time-smooth df per strategy");
    add_common(select, select_args, true, false);
    select->add_option("--strategy", strategy, "exposure | outcome")->required();
    select->add_option("--grid", grid_text, "df/year grid, e.g. 1:16 or 2,4,8");
    select->add_option("--pollutant", sel_pollutant, "pollutant name")->required();
    select->add_option("--stratum", sel_stratum, "sex:age selector (outcome strategy)");
    select->add_option("--max-lag", sel_max_lag, "max lag K (with-pollutant model)");
    select->add_option("--criterion", criterion, "qaic | bic (outcome strategy)");
    select->add_option("--selection-model", selection_model, "trend-only | with-pollutant");
    select->add_option("--temp-df", sel_temp_df, "temperature smooth df (0 = none)");
    select->add_option("--outlier-k", sel_outlier_k, "Tukey fence multiplier");
    select->add_flag("--no-outlier-removal", sel_no_outliers, "keep flagged outcome days");

    CommonArgs fit_args;
    std::string fit_pollutant, fit_stratum = "all:all";
    int fit_max_lag = 4, fit_time_df = 0, fit_temp_df = 6;
    double fit_df_per_year = 0.0, fit_delta_x = 10.0, fit_outlier_k = 3.0;
    bool fit_no_outliers = false;
    auto* fit_cmd = app.add_subcommand("fit", "distributed-lag quasi-Poisson fit");
    add_common(fit_cmd, fit_args, true, false);
    fit_cmd->add_option("--pollutant", fit_pollutant, "pollutant name");
    fit_cmd->add_option("--max-lag", fit_max_lag, "max lag K (0..40)")
        ->check(CLI::Range(0, 40));
    fit_cmd->add_option("--time-df", fit_time_df, "total df of the time smooth");
    fit_cmd->add_option("--time-df-per-year", fit_df_per_year, "df/year of the time smooth");
    fit_cmd->add_option("--temp-df", fit_temp_df, "temperature smooth df (0 = none)");
    fit_cmd->add_option("--stratum", fit_stratum, "sex:age selector");
    fit_cmd->add_option("--delta-x", fit_delta_x, "exposure increment (ug/m3)");
    fit_cmd->add_option("--outlier-k", fit_outlier_k, "Tukey fence multiplier");
    fit_cmd->add_flag("--no-outlier-removal", fit_no_outliers, "keep flagged outcome days");

    CommonArgs report_args;
    std::string rep_pollutants = "all", rep_grid = "1:16", rep_stratum = "all:all";
    int rep_max_lag = 4, rep_temp_df = 6;
    double rep_delta_x = 10.0, rep_outlier_k = 3.0;
    bool rep_no_outliers = false;
    auto* report = app.add_subcommand("report",
                                      "strategy comparison table (both smoothing choices)");
    add_common(report, report_args, true, false);
    report->add_option("--pollutants", rep_pollutants, "comma list or 'all'");
    report->add_option("--grid", rep_grid, "df/year grid");
    report->add_option("--max-lag", rep_max_lag, "max lag K");
    report->add_option("--temp-df", rep_temp_df, "temperature smooth df (0 = none)");
    report->add_option("--stratum", rep_stratum, "sex:age selector");
    report->add_option("--delta-x", rep_delta_x, "exposure increment (ug/m3)");
    report->add_option("--outlier-k", rep_outlier_k, "Tukey fence multiplier");
    report->add_flag("--no-outlier-removal", rep_no_outliers, "keep flagged outcome days");

    CommonArgs sim_args;
    std::string scenario;
    int reps = 200;
    auto* simulate = app.add_subcommand("simulate", "bias experiment over synthetic panels");
    add_common(simulate, sim_args, false, true);
    simulate->add_option("--scenario", scenario, "A | B | C");
    simulate->add_option("--reps", reps, "number of replicates (>= 50)");

    CommonArgs demo_args;
    auto* demo = app.add_subcommand("demo", "end-to-end run on a bundled synthetic panel");
    add_common(demo, demo_args, false, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUserError;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(ingest_args, ingest_delim);
        if (describe->parsed()) return cmd_describe(describe_args);
        if (decomp->parsed()) return cmd_decompose(decomp_args, series_name, impute_gap);
        if (select->parsed()) {
            return cmd_select_df(select_args, strategy, grid_text, sel_pollutant, sel_stratum,
                                 sel_max_lag, criterion, selection_model, sel_temp_df,
                                 sel_outlier_k, sel_no_outliers);
        }
        if (fit_cmd->parsed()) {
            FitParams params = fit_params_from_config(fit_args.config_path);
            if (fit_cmd->count("--pollutant") > 0) params.pollutant = fit_pollutant;
            if (fit_cmd->count("--stratum") > 0) params.stratum = fit_stratum;
            if (fit_cmd->count("--max-lag") > 0) params.max_lag = fit_max_lag;
            if (fit_cmd->count("--time-df") > 0) params.time_df = fit_time_df;
            if (fit_cmd->count("--time-df-per-year") > 0) {
                params.time_df_per_year = fit_df_per_year;
            }
            if (fit_cmd->count("--temp-df") > 0) params.temp_df = fit_temp_df;
            if (fit_cmd->count("--delta-x") > 0) params.delta_x = fit_delta_x;
            if (fit_cmd->count("--outlier-k") > 0) params.outlier_k = fit_outlier_k;
            if (fit_no_outliers) params.no_outlier_removal = true;
            return cmd_fit(fit_args, params);
        }
        if (report->parsed()) {
            return cmd_report(report_args, rep_pollutants, rep_grid, rep_max_lag, rep_temp_df,
                              rep_stratum, rep_delta_x, rep_outlier_k, rep_no_outliers);
        }
        if (simulate->parsed()) return cmd_simulate(sim_args, scenario, reps);
        if (demo->parsed()) return cmd_demo(demo_args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUserError;
    } catch (const std::runtime_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericalError;
    }
    return kExitUserError;
}
