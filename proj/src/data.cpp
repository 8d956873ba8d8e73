#include "tsbench/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tsbench {

namespace {

// Howard Hinnant's civil-date algorithms (proleptic Gregorian).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
    std::int64_t year;
    unsigned month;
    unsigned day;
};

Civil civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {y + (m <= 2), m, d};
}

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Monday = 0 ... Sunday = 6.
int weekday_from_days(std::int64_t days) {
    // 1970-01-01 was a Thursday.
    return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

int iso_week(std::int64_t days) {
    const int dow = weekday_from_days(days);
    const std::int64_t thursday = days - dow + 3;
    const Civil c = civil_from_days(thursday);
    const std::int64_t jan1 = days_from_civil(c.year, 1, 1);
    return static_cast<int>((thursday - jan1) / 7) + 1;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}

    bool done() const { return i_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[i_]; }
    bool accept(char c) {
        if (peek() != c) return false;
        ++i_;
        return true;
    }
    // Reads between min_digits and max_digits decimal digits.
    std::optional<int> digits(int min_digits, int max_digits) {
        int value = 0;
        int n = 0;
        while (n < max_digits && std::isdigit(static_cast<unsigned char>(peek()))) {
            value = value * 10 + (s_[i_] - '0');
            ++i_;
            ++n;
        }
        if (n < min_digits) return std::nullopt;
        return value;
    }

private:
    std::string_view s_;
    std::size_t i_ = 0;
};

[[noreturn]] void bad_timestamp(std::string_view text) {
    throw Error(ErrorCode::ParseError, "cannot parse timestamp '" + std::string(text) + "'");
}

}  // namespace

Frequency Frequency::parse(std::string_view text) {
    const std::string s = lower(trim(text));
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    int step = 1;
    if (i > 0) step = std::stoi(s.substr(0, i));
    const std::string unit = s.substr(i);
    Frequency f;
    f.step = step;
    if (unit == "m" || unit == "min" || unit == "t" || unit == "minute" || unit == "minutes") {
        f.unit = FreqUnit::Minute;
    } else if (unit == "h" || unit == "hour" || unit == "hourly") {
        f.unit = FreqUnit::Hourly;
    } else if (unit == "d" || unit == "day" || unit == "daily") {
        f.unit = FreqUnit::Daily;
    } else if (unit == "b" || unit == "bday" || unit == "business-daily") {
        f.unit = FreqUnit::BusinessDaily;
    } else if (unit == "w" || unit == "week" || unit == "weekly") {
        f.unit = FreqUnit::Weekly;
    } else {
        throw Error(ErrorCode::ParseError, "unknown frequency '" + std::string(text) + "'");
    }
    if (step < 1) throw Error(ErrorCode::ParseError, "frequency step must be >= 1");
    return f;
}

std::string Frequency::to_string() const {
    const char* unit = "h";
    switch (this->unit) {
        case FreqUnit::Minute: unit = "min"; break;
        case FreqUnit::Hourly: unit = "h"; break;
        case FreqUnit::Daily: unit = "D"; break;
        case FreqUnit::BusinessDaily: unit = "B"; break;
        case FreqUnit::Weekly: unit = "W"; break;
    }
    return std::to_string(step) + unit;
}

Timestamp advance(Timestamp t, const Frequency& freq) {
    switch (freq.unit) {
        case FreqUnit::Minute: return t + 60LL * freq.step;
        case FreqUnit::Hourly: return t + 3600LL * freq.step;
        case FreqUnit::Daily: return t + kSecondsPerDay * freq.step;
        case FreqUnit::Weekly: return t + 7 * kSecondsPerDay * freq.step;
        case FreqUnit::BusinessDaily: {
            for (int i = 0; i < freq.step; ++i) {
                do {
                    t += kSecondsPerDay;
                } while (weekday_from_days(floor_div(t, kSecondsPerDay)) >= 5);
            }
            return t;
        }
    }
    return t;
}

Timestamp parse_timestamp(std::string_view text) {
    Cursor c(trim(text));
    const auto year = c.digits(4, 4);
    if (!year) bad_timestamp(text);
    char sep = c.peek();
    if (sep != '-' && sep != '/') bad_timestamp(text);
    c.accept(sep);
    const auto month = c.digits(1, 2);
    if (!month || !c.accept(sep)) bad_timestamp(text);
    const auto day = c.digits(1, 2);
    if (!day || *month < 1 || *month > 12 || *day < 1 || *day > 31) bad_timestamp(text);

    int hour = 0, minute = 0, second = 0;
    if (c.accept('T') || c.accept('t') || c.accept(' ')) {
        const auto h = c.digits(1, 2);
        if (!h || !c.accept(':')) bad_timestamp(text);
        const auto mi = c.digits(2, 2);
        if (!mi) bad_timestamp(text);
        hour = *h;
        minute = *mi;
        if (c.accept(':')) {
            const auto sec = c.digits(2, 2);
            if (!sec) bad_timestamp(text);
            second = *sec;
            if (c.accept('.')) {
                if (!c.digits(1, 9)) bad_timestamp(text);
            }
        }
    }
    std::int64_t offset = 0;
    if (c.accept('Z') || c.accept('z')) {
    } else if (c.peek() == '+' || c.peek() == '-') {
        const int sign = c.peek() == '+' ? 1 : -1;
        c.accept(c.peek());
        const auto oh = c.digits(2, 2);
        if (!oh || !c.accept(':')) bad_timestamp(text);
        const auto om = c.digits(2, 2);
        if (!om) bad_timestamp(text);
        offset = sign * (*oh * 3600LL + *om * 60LL);
    }
    if (!c.done() || hour > 23 || minute > 59 || second > 60) bad_timestamp(text);

    const std::int64_t days = days_from_civil(*year, static_cast<unsigned>(*month),
                                              static_cast<unsigned>(*day));
    return days * kSecondsPerDay + hour * 3600LL + minute * 60LL + second - offset;
}

std::string format_timestamp(Timestamp t) {
    const std::int64_t days = floor_div(t, kSecondsPerDay);
    const std::int64_t secs = t - days * kSecondsPerDay;
    const Civil c = civil_from_days(days);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u %02lld:%02lld:%02lld",
                  static_cast<long long>(c.year), c.month, c.day,
                  static_cast<long long>(secs / 3600), static_cast<long long>((secs / 60) % 60),
                  static_cast<long long>(secs % 60));
    return buf;
}

Dataset Dataset::slice(Eigen::Index begin, Eigen::Index len) const {
    Dataset out;
    out.name = name;
    out.freq = freq;
    out.values = values.middleCols(begin, len);
    out.timestamps.assign(timestamps.begin() + begin, timestamps.begin() + begin + len);
    out.covariates = covariates.rows() > 0 ? Matrix(covariates.middleCols(begin, len))
                                           : Matrix(0, len);
    return out;
}

void Dataset::validate() const {
    if (values.rows() < 1 || values.cols() < 1)
        throw Error(ErrorCode::ShapeMismatch, "dataset needs K >= 1 and N >= 1");
    if (static_cast<Eigen::Index>(timestamps.size()) != values.cols())
        throw Error(ErrorCode::ShapeMismatch, "timestamp count differs from N");
    if (!values.allFinite()) throw Error(ErrorCode::MissingValue, "dataset has non-finite values");
    if (covariates.rows() > 0 && covariates.cols() != values.cols())
        throw Error(ErrorCode::ShapeMismatch, "covariates must have N columns");
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        if (timestamps[i] <= timestamps[i - 1])
            throw Error(ErrorCode::NonMonotoneTimestamps,
                        "timestamps not strictly increasing at step " + std::to_string(i));
        if (timestamps[i] != advance(timestamps[i - 1], freq))
            throw Error(ErrorCode::IrregularSpacing,
                        "spacing differs from " + freq.to_string() + " at step " + std::to_string(i));
    }
}

Dataset load_wide_csv(const std::filesystem::path& path, const Frequency& freq) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path.string() + ": empty file");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_commas(line);
    if (header.size() < 2) throw Error(ErrorCode::ParseError, path.string() + ": need >= 2 columns");
    const std::string first = lower(header[0]);
    if (first != "timestamp" && first != "date")
        throw Error(ErrorCode::ParseError, path.string() + ": first column must be 'timestamp'");
    const std::size_t n_cols = header.size();
    const std::size_t n_var = n_cols - 1;

    std::vector<Timestamp> stamps;
    std::vector<real> flat;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split_commas(line);
        if (cells.size() != n_cols) {
            Error e(ErrorCode::ParseError, path.string() + ": row " + std::to_string(row) + " has " +
                                               std::to_string(cells.size()) + " columns, expected " +
                                               std::to_string(n_cols));
            e.row = row;
            throw e;
        }
        Timestamp ts = 0;
        try {
            ts = parse_timestamp(cells[0]);
        } catch (Error& e) {
            e.row = row;
            e.col = 1;
            throw;
        }
        stamps.push_back(ts);
        for (std::size_t j = 1; j < n_cols; ++j) {
            const std::string_view cell = cells[j];
            const std::string lc = lower(cell);
            if (cell.empty() || lc == "nan" || lc == "na" || lc == "null") {
                Error e(ErrorCode::MissingValue, path.string() + ": missing value at row " +
                                                     std::to_string(row) + ", column " +
                                                     std::to_string(j + 1));
                e.row = row;
                e.col = j + 1;
                throw e;
            }
            real v = 0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size()) {
                Error e(ErrorCode::ParseError, path.string() + ": bad number '" + std::string(cell) +
                                                   "' at row " + std::to_string(row) + ", column " +
                                                   std::to_string(j + 1));
                e.row = row;
                e.col = j + 1;
                throw e;
            }
            if (!std::isfinite(v)) {
                Error e(ErrorCode::MissingValue, path.string() + ": non-finite value at row " +
                                                     std::to_string(row));
                e.row = row;
                e.col = j + 1;
                throw e;
            }
            flat.push_back(v);
        }
    }
    if (row == 0) throw Error(ErrorCode::ParseError, path.string() + ": no data rows");

    Dataset ds;
    ds.name = path.stem().string();
    ds.freq = freq;
    ds.timestamps = std::move(stamps);
    ds.values = Eigen::Map<const Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>>(
        flat.data(), static_cast<Eigen::Index>(n_var), static_cast<Eigen::Index>(row));
    ds.covariates = Matrix(0, ds.values.cols());
    ds.validate();
    return ds;
}

void write_wide_csv(const Dataset& ds, const std::filesystem::path& path,
                    const std::vector<std::string>& column_names) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out << "timestamp";
    for (Eigen::Index k = 0; k < ds.n_variates(); ++k) {
        const auto idx = static_cast<std::size_t>(k);
        out << ',' << (idx < column_names.size() ? column_names[idx] : "v" + std::to_string(k + 1));
    }
    out << '\n';
    char buf[40];
    for (Eigen::Index t = 0; t < ds.n_steps(); ++t) {
        out << format_timestamp(ds.timestamps[static_cast<std::size_t>(t)]);
        for (Eigen::Index k = 0; k < ds.n_variates(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.values(k, t));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

Split split_dataset(const Dataset& ds, const SplitSpec& spec) {
    const Eigen::Index n = ds.n_steps();
    if (spec.test_len < 1 || spec.val_len < 0)
        throw Error(ErrorCode::SplitTooLarge, "test_len must be >= 1 and val_len >= 0");
    if (spec.val_len + spec.test_len >= n)
        throw Error(ErrorCode::SplitTooLarge,
                    "val_len + test_len = " + std::to_string(spec.val_len + spec.test_len) +
                        " leaves no training steps (N = " + std::to_string(n) + ")");
    const Eigen::Index train_len = n - spec.val_len - spec.test_len;
    return {ds.slice(0, train_len), ds.slice(train_len, spec.val_len),
            ds.slice(train_len + spec.val_len, spec.test_len)};
}

Scaler fit_scaler(const Dataset& train, real std_floor) {
    if (train.n_steps() < 2)
        throw Error(ErrorCode::TooFewSamples, "scaler needs at least 2 training steps");
    Scaler s;
    s.std_floor = std_floor;
    const Eigen::Index k = train.n_variates();
    s.means.resize(k);
    s.stds.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto row = train.values.row(i);
        s.means(i) = row.mean();
        s.stds(i) = std::max(std::sqrt(population_variance(row)), std_floor);
    }
    return s;
}

Matrix apply_scaler(const Matrix& values, const Scaler& s, ScaleDirection direction) {
    if (values.rows() != s.means.size())
        throw Error(ErrorCode::DimensionMismatch,
                    "scaler fitted for K = " + std::to_string(s.means.size()) + ", got K = " +
                        std::to_string(values.rows()));
    if (direction == ScaleDirection::Forward)
        return ((values.colwise() - s.means).array().colwise() / s.stds.array()).matrix();
    return ((values.array().colwise() * s.stds.array()).matrix().colwise() + s.means);
}

Dataset apply_scaler(const Dataset& ds, const Scaler& s, ScaleDirection direction) {
    Dataset out = ds;
    out.values = apply_scaler(ds.values, s, direction);
    return out;
}

std::vector<ForecastInstance> make_windows_from(const Dataset& ds, Eigen::Index context_len,
                                                Eigen::Index horizon, Eigen::Index stride,
                                                Eigen::Index first_origin) {
    if (context_len < 1 || horizon < 1 || stride < 1)
        throw Error(ErrorCode::SeriesTooShort, "L, T and stride must all be >= 1");
    const Eigen::Index n = ds.n_steps();
    if (n < context_len + horizon || first_origin < context_len - 1 ||
        first_origin + horizon > n - 1)
        throw Error(ErrorCode::SeriesTooShort,
                    "N = " + std::to_string(n) + " cannot hold L + T = " +
                        std::to_string(context_len + horizon));
    const bool has_cov = ds.covariate_dim() > 0;
    std::vector<ForecastInstance> out;
    for (Eigen::Index t = first_origin; t + horizon <= n - 1; t += stride) {
        ForecastInstance w;
        w.origin_index = t;
        w.context = ds.values.middleCols(t - context_len + 1, context_len);
        w.target = ds.values.middleCols(t + 1, horizon);
        if (has_cov) {
            w.context_covariates = ds.covariates.middleCols(t - context_len + 1, context_len);
            w.target_covariates = ds.covariates.middleCols(t + 1, horizon);
        } else {
            w.context_covariates = Matrix(0, context_len);
            w.target_covariates = Matrix(0, horizon);
        }
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<ForecastInstance> make_windows(const Dataset& ds, Eigen::Index context_len,
                                           Eigen::Index horizon, Eigen::Index stride) {
    return make_windows_from(ds, context_len, horizon, stride, context_len - 1);
}

Dataset calendar_covariates(const Dataset& ds) {
    const Eigen::Index n = ds.n_steps();
    int dim = 0;
    switch (ds.freq.unit) {
        case FreqUnit::Minute: dim = 3; break;
        case FreqUnit::Hourly: dim = 2; break;
        case FreqUnit::Daily:
        case FreqUnit::BusinessDaily: dim = 2; break;
        case FreqUnit::Weekly: dim = 1; break;
    }
    Dataset out = ds;
    out.covariates = Matrix(dim, n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const Timestamp ts = ds.timestamps[static_cast<std::size_t>(t)];
        const std::int64_t days = floor_div(ts, kSecondsPerDay);
        const std::int64_t secs = ts - days * kSecondsPerDay;
        const real minute = static_cast<real>((secs / 60) % 60) / 59.0 - 0.5;
        const real hour = static_cast<real>(secs / 3600) / 23.0 - 0.5;
        const real dow = weekday_from_days(days) / 6.0 - 0.5;
        const real dom = static_cast<real>(civil_from_days(days).day - 1) / 30.0 - 0.5;
        const real woy = static_cast<real>(iso_week(days) - 1) / 52.0 - 0.5;
        switch (ds.freq.unit) {
            case FreqUnit::Minute: out.covariates.col(t) << minute, hour, dow; break;
            case FreqUnit::Hourly: out.covariates.col(t) << hour, dow; break;
            case FreqUnit::Daily:
            case FreqUnit::BusinessDaily: out.covariates.col(t) << dow, dom; break;
            case FreqUnit::Weekly: out.covariates(0, t) = woy; break;
        }
    }
    return out;
}

}  // namespace tsbench
