#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace roughscale::dataio {

/// Daily measures of the realized-volatility library.
enum class Measure { close_price, open_to_close, rv10, rv5, rsv, bv };

const char* to_string(Measure m);
Measure measure_from_string(const std::string& s);
bool is_variance_measure(Measure m);
inline constexpr Measure kAllMeasures[] = {Measure::close_price, Measure::open_to_close, Measure::rv10,
                                           Measure::rv5,         Measure::rsv,           Measure::bv};
inline constexpr Measure kVolatilityMeasures[] = {Measure::rv10, Measure::rv5, Measure::rsv, Measure::bv};

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;
  std::string iso() const;
  /// Days since 1970-01-01 (proleptic Gregorian).
  long serial() const;
  static Date from_serial(long days);
};

/// Accepts "YYYY-MM-DD" (optionally followed by a time part) and "DD/MM/YYYY".
std::optional<Date> parse_date(const std::string& text);

struct MarketSeries {
  std::string symbol;
  std::vector<Date> dates;
  std::map<Measure, std::vector<double>> measures;
  std::vector<double> open_price;  ///< empty when the file has no open prices

  bool has(Measure m) const { return measures.count(m) > 0; }
  std::size_t size() const { return dates.size(); }
};

struct RepairRecord {
  std::string symbol;
  std::string column;
  std::size_t row = 0;  ///< position within the symbol's series
  Date date;
  double value = 0.0;
  std::string method;  ///< "linear" or "nearest"
};

struct LoadResult {
  std::map<std::string, MarketSeries> series;
  std::vector<RepairRecord> repairs;
};

/// Strips leading punctuation (".AEX" -> "AEX").
std::string normalize_symbol(const std::string& raw);

/// Reads a library CSV: one row per (symbol, date) with a symbol column, a
/// date column ("date", "Date", "Unnamed: 0", or an unnamed first column)
/// and any of the measure columns plus optionally open_price. Missing cells
/// (empty, NA, NaN, null) are filled by linear interpolation in row position
/// between the nearest valid neighbours, or the nearest valid value at the
/// ends; every filled cell is listed in `repairs`. Throws Error(io / format /
/// schema). Measures listed in `required` must be present as columns.
LoadResult load_library_csv(const std::filesystem::path& path, const std::vector<Measure>& required = {});

/// The requested column; open_to_close falls back to log(close / open)
/// when the column is absent but open prices exist.
std::vector<double> select_measure(const MarketSeries& series, Measure measure);

/// Writes all series in the load format with 17 significant digits.
void write_library_csv(const std::map<std::string, MarketSeries>& series, const std::filesystem::path& path);

}  // namespace roughscale::dataio
