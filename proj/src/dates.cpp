#include "airgam/dates.hpp"

#include <cstdio>
#include <stdexcept>

namespace airgam {

std::int64_t days_from_civil(int y, unsigned m, unsigned d) noexcept {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) noexcept {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), m, d};
}

std::int64_t parse_iso_date(const std::string& text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char extra = '\0';
    if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &extra) != 3) {
        throw std::invalid_argument("invalid date '" + text + "': expected YYYY-MM-DD");
    }
    if (m < 1 || m > 12 || d < 1 || d > 31) {
        throw std::invalid_argument("invalid date '" + text + "': out-of-range component");
    }
    const std::int64_t serial = days_from_civil(y, m, d);
    const CivilDate back = civil_from_days(serial);
    if (back.year != y || back.month != m || back.day != d) {
        throw std::invalid_argument("invalid date '" + text + "': no such calendar day");
    }
    return serial;
}

std::string format_iso_date(std::int64_t day_number) {
    const CivilDate c = civil_from_days(day_number);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
    return std::string(buf);
}

}  // namespace airgam
