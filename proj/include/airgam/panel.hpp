#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace airgam {

/// A daily series aligned to the panel's date axis. Missing values are NaN.
using Series = std::vector<double>;

bool is_missing(double v);

/// Date-indexed daily observations: stratified hospitalization counts,
/// pollutant concentrations and meteorology. After load the date axis is
/// contiguous (one row per calendar day, gaps filled with missing rows).
struct DailyPanel {
    std::vector<std::int64_t> dates;  // serial day numbers, strictly increasing by 1
    std::map<std::string, Series> outcomes;    // counts; canonical keys below
    std::map<std::string, Series> pollutants;  // PM10 / NO2 / SO2, ug/m3
    std::map<std::string, Series> meteo;       // temp_mean, humidity, ...

    std::size_t size() const { return dates.size(); }
    const Series* find_series(const std::string& name) const;
    std::vector<bool> missing_mask(const std::string& name) const;
};

/// Canonical outcome stratum keys, sex x age band.
extern const std::vector<std::string> kStratumKeys;  // male_lt65 ... female_gt75
extern const std::vector<std::string> kPollutantKeys;
extern const std::vector<std::string> kMeteoKeys;

/// Column-name mapping for load_panel. Keys are canonical series names
/// ("date", "total", "male_lt65", "PM10", "temp_mean", ...); values are the
/// column names in the input file. Unmapped canonical names fall back to
/// their own spelling.
struct PanelSchema {
    std::map<std::string, std::string> columns;
    char delimiter = ',';

    std::string column_for(const std::string& canonical) const;
    static PanelSchema from_json_file(const std::string& path);
};

/// Loads and validates a delimiter-separated daily panel. Calendar gaps are
/// inserted as all-missing rows; duplicate dates, unparseable cells,
/// negative counts/concentrations and non-integer counts are rejected.
DailyPanel load_panel(std::istream& in, const PanelSchema& schema = {});
DailyPanel load_panel_file(const std::string& path, const PanelSchema& schema = {});

/// Writes a panel in the canonical column layout (ISO dates, "NA" missing).
std::string panel_to_csv(const DailyPanel& panel);

/// Descriptive statistics over the non-missing values of a series.
/// Moments use population denominators; kurtosis is plain m4/m2^2
/// (non-excess); quartiles are type 7. Undefined quantities (CV at zero
/// mean, shape moments at zero variance) are NaN.
struct SeriesStats {
    std::size_t n_used = 0;
    double mean, sd, skewness, kurtosis, variance, coefficient_of_variation;
    double min, q1, median, q3, max;
};

SeriesStats descriptive_stats(const Series& series);

/// Tukey-fence outlier flags: value outside [q1 - k*IQR, q3 + k*IQR].
struct OutlierMask {
    std::vector<bool> flags;
    std::string rule;  // rule record, includes k
    std::vector<std::string> warnings;

    std::size_t count() const;
};

OutlierMask detect_outliers(const Series& series, double k = 3.0);

/// Fills interior gaps of length <= max_gap by linear interpolation.
/// Longer gaps and edge gaps stay missing; observed values are untouched.
Series impute_missing(const Series& series, int max_gap = 3);

/// Outcome counts for a stratum. sex in {male, female, all}; age_band in
/// {"<65", "65-75", ">75", "all"}. (all, all) is the total series.
Series stratify(const DailyPanel& panel, const std::string& sex, const std::string& age_band);

/// detect -> remove (set missing) -> impute, in that order. The returned
/// mask is computed on the raw series, never on imputed values.
struct CleanedSeries {
    Series values;
    OutlierMask outliers;
};

CleanedSeries clean_series(const Series& series, double k = 3.0, int max_gap = 3);

}  // namespace airgam
