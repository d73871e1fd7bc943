#include "airgam/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "airgam/csv.hpp"
#include "airgam/dates.hpp"
#include "airgam/spline.hpp"

namespace airgam {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

bool is_missing(double v) { return std::isnan(v); }

const std::vector<std::string> kStratumKeys = {"male_lt65",   "male_65_75",   "male_gt75",
                                               "female_lt65", "female_65_75", "female_gt75"};
const std::vector<std::string> kPollutantKeys = {"PM10", "NO2", "SO2"};
const std::vector<std::string> kMeteoKeys = {"temp_mean", "temp_min",  "temp_max",
                                             "humidity",  "radiation", "precipitation"};

const Series* DailyPanel::find_series(const std::string& name) const {
    if (auto it = outcomes.find(name); it != outcomes.end()) return &it->second;
    if (auto it = pollutants.find(name); it != pollutants.end()) return &it->second;
    if (auto it = meteo.find(name); it != meteo.end()) return &it->second;
    return nullptr;
}

std::vector<bool> DailyPanel::missing_mask(const std::string& name) const {
    const Series* s = find_series(name);
    if (s == nullptr) throw std::invalid_argument("no such series: " + name);
    std::vector<bool> mask(s->size());
    for (std::size_t i = 0; i < s->size(); ++i) mask[i] = is_missing((*s)[i]);
    return mask;
}

std::string PanelSchema::column_for(const std::string& canonical) const {
    auto it = columns.find(canonical);
    return it == columns.end() ? canonical : it->second;
}

PanelSchema PanelSchema::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open schema file: " + path);
    nlohmann::json j;
    in >> j;
    PanelSchema schema;
    if (j.contains("delimiter")) {
        const std::string d = j.at("delimiter").get<std::string>();
        if (d.size() != 1) throw std::invalid_argument("schema delimiter must be one character");
        schema.delimiter = d[0];
    }
    if (j.contains("columns")) {
        for (auto& [key, value] : j.at("columns").items()) {
            schema.columns[key] = value.get<std::string>();
        }
    }
    return schema;
}

namespace {

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    if (is_missing_cell(cell)) return kNaN;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0' || !std::isfinite(v)) {
        throw std::invalid_argument("unparseable numeric cell '" + cell + "' at data row " +
                                    std::to_string(row + 1) + ", column '" + column + "'");
    }
    return v;
}

void validate_count(double v, std::size_t row, const std::string& column) {
    if (is_missing(v)) return;
    if (v < 0.0 || v != std::floor(v)) {
        throw std::invalid_argument("outcome column '" + column + "' at data row " +
                                    std::to_string(row + 1) +
                                    " must be a non-negative integer, got " + format_number(v));
    }
}

void validate_concentration(double v, std::size_t row, const std::string& column) {
    if (is_missing(v)) return;
    if (v < 0.0) {
        throw std::invalid_argument("pollutant column '" + column + "' at data row " +
                                    std::to_string(row + 1) + " must be >= 0, got " +
                                    format_number(v));
    }
}

}  // namespace

DailyPanel load_panel(std::istream& in, const PanelSchema& schema) {
    const DelimitedTable table = read_delimited(in, schema.delimiter);

    const std::string date_col = schema.column_for("date");
    const int date_idx = table.column(date_col);
    if (date_idx < 0) {
        throw std::invalid_argument("no date column: expected column '" + date_col + "'");
    }

    struct Bound {
        std::string canonical;
        int index;
        enum class Kind { outcome, pollutant, meteo } kind;
    };
    std::vector<Bound> bound;
    auto bind = [&](const std::vector<std::string>& keys, Bound::Kind kind) {
        for (const auto& key : keys) {
            const int idx = table.column(schema.column_for(key));
            if (idx >= 0) bound.push_back({key, idx, kind});
        }
    };
    std::vector<std::string> outcome_keys = kStratumKeys;
    outcome_keys.insert(outcome_keys.begin(), "total");
    bind(outcome_keys, Bound::Kind::outcome);
    bind(kPollutantKeys, Bound::Kind::pollutant);
    bind(kMeteoKeys, Bound::Kind::meteo);

    bool any_outcome = false;
    for (const auto& b : bound) any_outcome |= (b.kind == Bound::Kind::outcome);
    if (!any_outcome) {
        throw std::invalid_argument("no outcome column found (need 'total' or a stratum column)");
    }

    // Parse rows keyed by date, rejecting duplicates.
    std::map<std::int64_t, std::vector<double>> by_date;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        if (static_cast<int>(cells.size()) <= date_idx) {
            throw std::invalid_argument("short row at data row " + std::to_string(r + 1));
        }
        const std::int64_t day = parse_iso_date(cells[date_idx]);
        if (by_date.count(day) != 0) {
            throw std::invalid_argument("duplicate date " + format_iso_date(day));
        }
        std::vector<double> values(bound.size(), kNaN);
        for (std::size_t c = 0; c < bound.size(); ++c) {
            const auto& b = bound[c];
            if (static_cast<std::size_t>(b.index) >= cells.size()) continue;
            const double v = parse_cell(cells[b.index], r, table.header[b.index]);
            if (b.kind == Bound::Kind::outcome) validate_count(v, r, table.header[b.index]);
            if (b.kind == Bound::Kind::pollutant) {
                validate_concentration(v, r, table.header[b.index]);
            }
            values[c] = v;
        }
        by_date.emplace(day, std::move(values));
    }
    if (by_date.empty()) throw std::invalid_argument("panel has no data rows");

    // Contiguous daily axis; calendar gaps become all-missing rows.
    const std::int64_t first = by_date.begin()->first;
    const std::int64_t last = by_date.rbegin()->first;
    DailyPanel panel;
    for (std::int64_t d = first; d <= last; ++d) panel.dates.push_back(d);
    const std::size_t n = panel.dates.size();

    for (std::size_t c = 0; c < bound.size(); ++c) {
        Series series(n, kNaN);
        for (const auto& [day, values] : by_date) {
            series[static_cast<std::size_t>(day - first)] = values[c];
        }
        switch (bound[c].kind) {
            case Bound::Kind::outcome: panel.outcomes[bound[c].canonical] = std::move(series); break;
            case Bound::Kind::pollutant:
                panel.pollutants[bound[c].canonical] = std::move(series);
                break;
            case Bound::Kind::meteo: panel.meteo[bound[c].canonical] = std::move(series); break;
        }
    }

    // Cross-check or synthesize the total series from the six strata.
    bool have_all_strata = true;
    for (const auto& key : kStratumKeys) have_all_strata &= panel.outcomes.count(key) != 0;
    if (have_all_strata) {
        if (panel.outcomes.count("total") != 0) {
            const Series& total = panel.outcomes.at("total");
            for (std::size_t i = 0; i < n; ++i) {
                double sum = 0.0;
                bool complete = !is_missing(total[i]);
                for (const auto& key : kStratumKeys) {
                    const double v = panel.outcomes.at(key)[i];
                    if (is_missing(v)) {
                        complete = false;
                        break;
                    }
                    sum += v;
                }
                if (complete && sum != total[i]) {
                    throw std::invalid_argument("strata do not sum to total on " +
                                                format_iso_date(panel.dates[i]));
                }
            }
        } else {
            Series total(n, kNaN);
            for (std::size_t i = 0; i < n; ++i) {
                double sum = 0.0;
                bool complete = true;
                for (const auto& key : kStratumKeys) {
                    const double v = panel.outcomes.at(key)[i];
                    if (is_missing(v)) {
                        complete = false;
                        break;
                    }
                    sum += v;
                }
                if (complete) total[i] = sum;
            }
            panel.outcomes["total"] = std::move(total);
        }
    }
    return panel;
}

DailyPanel load_panel_file(const std::string& path, const PanelSchema& schema) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open panel file: " + path);
    return load_panel(in, schema);
}

std::string panel_to_csv(const DailyPanel& panel) {
    std::ostringstream out;
    std::vector<std::pair<std::string, const Series*>> cols;
    auto add = [&](const std::map<std::string, Series>& group, const std::vector<std::string>& order) {
        for (const auto& key : order) {
            if (auto it = group.find(key); it != group.end()) cols.emplace_back(key, &it->second);
        }
    };
    std::vector<std::string> outcome_order = {"total"};
    outcome_order.insert(outcome_order.end(), kStratumKeys.begin(), kStratumKeys.end());
    add(panel.outcomes, outcome_order);
    add(panel.pollutants, kPollutantKeys);
    add(panel.meteo, kMeteoKeys);

    out << "date";
    for (const auto& [name, series] : cols) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < panel.size(); ++i) {
        out << format_iso_date(panel.dates[i]);
        for (const auto& [name, series] : cols) out << ',' << format_number((*series)[i]);
        out << '\n';
    }
    return out.str();
}

SeriesStats descriptive_stats(const Series& series) {
    std::vector<double> values;
    values.reserve(series.size());
    for (double v : series) {
        if (!is_missing(v)) values.push_back(v);
    }
    if (values.size() < 2) {
        throw std::invalid_argument("descriptive_stats: insufficient data (need >= 2 non-missing)");
    }

    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;

    SeriesStats s;
    s.n_used = values.size();
    s.mean = mean;
    s.variance = m2;
    s.sd = std::sqrt(m2);
    s.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : kNaN;
    s.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : kNaN;
    if (mean != 0.0) {
        s.coefficient_of_variation = s.sd / mean;
    } else {
        s.coefficient_of_variation = kNaN;  // undefined, not +-inf
    }

    std::sort(values.begin(), values.end());
    s.min = values.front();
    s.max = values.back();
    s.q1 = quantile_type7(values, 0.25);
    s.median = quantile_type7(values, 0.50);
    s.q3 = quantile_type7(values, 0.75);
    return s;
}

std::size_t OutlierMask::count() const {
    std::size_t c = 0;
    for (bool f : flags) c += f ? 1 : 0;
    return c;
}

OutlierMask detect_outliers(const Series& series, double k) {
    std::vector<double> values;
    for (double v : series) {
        if (!is_missing(v)) values.push_back(v);
    }
    if (values.size() < 8) {
        throw std::invalid_argument("detect_outliers: need >= 8 non-missing values");
    }
    std::sort(values.begin(), values.end());
    const double q1 = quantile_type7(values, 0.25);
    const double q3 = quantile_type7(values, 0.75);
    const double iqr = q3 - q1;

    OutlierMask mask;
    mask.flags.assign(series.size(), false);
    std::ostringstream rule;
    rule << "tukey-fence k=" << format_number(k) << " q1=" << format_number(q1)
         << " q3=" << format_number(q3);
    mask.rule = rule.str();

    if (iqr == 0.0) {
        mask.warnings.push_back("IQR is zero: no outliers flagged");
        return mask;
    }
    const double lo = q1 - k * iqr;
    const double hi = q3 + k * iqr;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!is_missing(series[i]) && (series[i] < lo || series[i] > hi)) mask.flags[i] = true;
    }
    return mask;
}

Series impute_missing(const Series& series, int max_gap) {
    Series out = series;
    const std::size_t n = series.size();
    std::size_t i = 0;
    while (i < n) {
        if (!is_missing(series[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && is_missing(series[j])) ++j;
        // Gap is [i, j). Interior only: needs observed neighbors on both sides.
        const bool interior = i > 0 && j < n;
        const auto gap_len = static_cast<int>(j - i);
        if (interior && gap_len <= max_gap) {
            const double left = series[i - 1];
            const double right = series[j];
            for (std::size_t t = i; t < j; ++t) {
                const double frac =
                    static_cast<double>(t - i + 1) / static_cast<double>(gap_len + 1);
                out[t] = left + frac * (right - left);
            }
        }
        i = j;
    }
    return out;
}

Series stratify(const DailyPanel& panel, const std::string& sex, const std::string& age_band) {
    auto list_available = [&]() {
        std::string names;
        for (const auto& [key, series] : panel.outcomes) {
            if (!names.empty()) names += ", ";
            names += key;
        }
        return names;
    };

    std::string age_key;
    if (age_band == "<65") {
        age_key = "lt65";
    } else if (age_band == "65-75" || age_band == "65–75") {
        age_key = "65_75";
    } else if (age_band == ">75") {
        age_key = "gt75";
    } else if (age_band == "all") {
        age_key = "all";
    } else {
        throw std::invalid_argument("unknown age band '" + age_band +
                                    "' (use <65, 65-75, >75 or all)");
    }
    if (sex != "male" && sex != "female" && sex != "all") {
        throw std::invalid_argument("unknown sex '" + sex + "' (use male, female or all)");
    }

    auto lookup = [&](const std::string& key) -> const Series& {
        auto it = panel.outcomes.find(key);
        if (it == panel.outcomes.end()) {
            throw std::invalid_argument("stratum '" + key +
                                        "' not present; available: " + list_available());
        }
        return it->second;
    };

    if (sex == "all" && age_key == "all") return lookup("total");
    if (sex != "all" && age_key != "all") return lookup(sex + "_" + age_key);

    // Marginal: sum over the free dimension, missing if any part is missing.
    std::vector<std::string> keys;
    if (sex == "all") {
        keys = {"male_" + age_key, "female_" + age_key};
    } else {
        keys = {sex + "_lt65", sex + "_65_75", sex + "_gt75"};
    }
    Series sum(panel.size(), 0.0);
    for (const auto& key : keys) {
        const Series& s = lookup(key);
        for (std::size_t i = 0; i < sum.size(); ++i) {
            sum[i] = (is_missing(sum[i]) || is_missing(s[i])) ? kNaN : sum[i] + s[i];
        }
    }
    return sum;
}

CleanedSeries clean_series(const Series& series, double k, int max_gap) {
    CleanedSeries out;
    out.outliers = detect_outliers(series, k);
    Series removed = series;
    for (std::size_t i = 0; i < removed.size(); ++i) {
        if (out.outliers.flags[i]) removed[i] = kNaN;
    }
    out.values = impute_missing(removed, max_gap);
    return out;
}

}  // namespace airgam
