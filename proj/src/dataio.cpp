#include "roughscale/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "roughscale/errors.hpp"

namespace roughscale::dataio {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null" || cell == "NULL";
}

std::optional<double> parse_number(const std::string& cell) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

bool valid_ymd(int y, int m, int d) {
  if (m < 1 || m > 12 || d < 1 || y < 1) return false;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  const int limit = kDays[m - 1] + (m == 2 && leap ? 1 : 0);
  return d <= limit;
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

// Rows of one symbol before repair.
struct RawSeries {
  std::vector<Date> dates;
  std::vector<std::size_t> file_rows;
  std::map<std::string, std::vector<std::optional<double>>> columns;
};

std::vector<double> repair_column(const std::string& symbol, const std::string& column,
                                  const std::vector<Date>& dates, const std::vector<std::optional<double>>& raw,
                                  std::vector<RepairRecord>& repairs) {
  const std::size_t n = raw.size();
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < n; ++i)
    if (raw[i]) valid.push_back(i);
  std::vector<double> out(n);
  if (valid.empty()) return {};
  std::size_t next_valid = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i]) {
      out[i] = *raw[i];
      ++next_valid;
      continue;
    }
    std::string method;
    if (next_valid == 0) {
      out[i] = *raw[valid.front()];
      method = "nearest";
    } else if (next_valid == valid.size()) {
      out[i] = *raw[valid.back()];
      method = "nearest";
    } else {
      const std::size_t lo = valid[next_valid - 1];
      const std::size_t hi = valid[next_valid];
      const double w = static_cast<double>(i - lo) / static_cast<double>(hi - lo);
      out[i] = (1.0 - w) * *raw[lo] + w * *raw[hi];
      method = "linear";
    }
    repairs.push_back({symbol, column, i, dates[i], out[i], method});
  }
  return out;
}

}  // namespace

const char* to_string(Measure m) {
  switch (m) {
    case Measure::close_price: return "close_price";
    case Measure::open_to_close: return "open_to_close";
    case Measure::rv10: return "rv10";
    case Measure::rv5: return "rv5";
    case Measure::rsv: return "rsv";
    case Measure::bv: return "bv";
  }
  return "close_price";
}

Measure measure_from_string(const std::string& s) {
  for (Measure m : kAllMeasures)
    if (s == to_string(m)) return m;
  throw Error(ErrorKind::argument, "unknown measure '" + s + "'");
}

bool is_variance_measure(Measure m) {
  return m == Measure::rv10 || m == Measure::rv5 || m == Measure::rsv || m == Measure::bv;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

long Date::serial() const {
  // Howard Hinnant's days_from_civil.
  const int y = year - (month <= 2 ? 1 : 0);
  const long era = (y >= 0 ? y : y - 399) / 400;
  const long yoe = y - era * 400;
  const long mp = (month + 9) % 12;
  const long doy = (153 * mp + 2) / 5 + day - 1;
  const long doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

Date Date::from_serial(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const long doe = z - era * 146097;
  const long yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const long mp = (5 * doy + 2) / 153;
  const int d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  const int m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  const int y = static_cast<int>(yoe + era * 400 + (m <= 2 ? 1 : 0));
  return {y, m, d};
}

std::optional<Date> parse_date(const std::string& raw) {
  const std::string text = trim(raw);
  if (text.size() >= 10 && text[4] == '-' && text[7] == '-') {
    if (text.size() > 10 && text[10] != ' ' && text[10] != 'T') return std::nullopt;
    const std::string y = text.substr(0, 4), m = text.substr(5, 2), d = text.substr(8, 2);
    if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
    Date date{std::stoi(y), std::stoi(m), std::stoi(d)};
    if (!valid_ymd(date.year, date.month, date.day)) return std::nullopt;
    return date;
  }
  if (text.size() == 10 && text[2] == '/' && text[5] == '/') {
    const std::string d = text.substr(0, 2), m = text.substr(3, 2), y = text.substr(6, 4);
    if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
    Date date{std::stoi(y), std::stoi(m), std::stoi(d)};
    if (!valid_ymd(date.year, date.month, date.day)) return std::nullopt;
    return date;
  }
  return std::nullopt;
}

std::string normalize_symbol(const std::string& raw) {
  std::string s = trim(raw);
  std::size_t i = 0;
  while (i < s.size() && std::ispunct(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

LoadResult load_library_csv(const std::filesystem::path& path, const std::vector<Measure>& required) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::format, path.string() + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);

  int symbol_col = -1;
  int date_col = -1;
  std::map<std::string, int> value_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    const int ci = static_cast<int>(c);
    if (name == "Symbol" || name == "symbol") {
      symbol_col = ci;
    } else if (name == "date" || name == "Date" || name == "Unnamed: 0" || (name.empty() && c == 0)) {
      date_col = ci;
    } else if (name == "open_price") {
      value_cols[name] = ci;
    } else {
      for (Measure m : kAllMeasures)
        if (name == to_string(m)) value_cols[name] = ci;
    }
  }
  if (symbol_col < 0) throw Error(ErrorKind::schema, path.string() + ": missing column 'Symbol'");
  if (date_col < 0) throw Error(ErrorKind::schema, path.string() + ": missing date column");
  bool any_measure = false;
  for (Measure m : kAllMeasures) any_measure = any_measure || value_cols.count(to_string(m)) > 0;
  if (!any_measure) throw Error(ErrorKind::schema, path.string() + ": no measure column found");
  for (Measure m : required)
    if (!value_cols.count(to_string(m)))
      throw Error(ErrorKind::schema, path.string() + ": missing column '" + std::string(to_string(m)) + "'");

  std::map<std::string, RawSeries> raw;
  std::size_t row_number = 1;
  while (std::getline(is, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw Error(ErrorKind::format, path.string() + ": row " + std::to_string(row_number) + " has " +
                                         std::to_string(fields.size()) + " fields, header has " +
                                         std::to_string(header.size()));
    const std::string symbol = normalize_symbol(fields[static_cast<std::size_t>(symbol_col)]);
    const auto date = parse_date(fields[static_cast<std::size_t>(date_col)]);
    if (!date)
      throw Error(ErrorKind::format, path.string() + ": row " + std::to_string(row_number) +
                                         ": unparseable date '" + fields[static_cast<std::size_t>(date_col)] + "'");
    RawSeries& series = raw[symbol];
    if (!series.dates.empty() && !(*date > series.dates.back()))
      throw Error(ErrorKind::format, path.string() + ": row " + std::to_string(row_number) + ": date " +
                                         date->iso() + " for " + symbol +
                                         (*date == series.dates.back() ? " is duplicated" : " is out of order"));
    series.dates.push_back(*date);
    series.file_rows.push_back(row_number);
    for (const auto& [name, col] : value_cols) {
      const std::string cell = trim(fields[static_cast<std::size_t>(col)]);
      std::optional<double> value;
      if (!is_missing(cell)) {
        value = parse_number(cell);
        if (!value)
          throw Error(ErrorKind::format, path.string() + ": row " + std::to_string(row_number) + ": column '" +
                                             name + "' holds non-numeric '" + cell + "'");
        const bool variance = name != "close_price" && name != "open_to_close" && name != "open_price";
        if (variance && *value < 0.0)
          throw Error(ErrorKind::format, path.string() + ": row " + std::to_string(row_number) + ": negative " + name);
        if ((name == "close_price" || name == "open_price") && !(*value > 0.0))
          throw Error(ErrorKind::format, path.string() + ": row " + std::to_string(row_number) + ": nonpositive " + name);
      }
      series.columns[name].push_back(value);
    }
  }

  LoadResult result;
  for (auto& [symbol, rs] : raw) {
    MarketSeries ms;
    ms.symbol = symbol;
    ms.dates = rs.dates;
    for (const auto& [name, values] : rs.columns) {
      std::vector<double> repaired = repair_column(symbol, name, rs.dates, values, result.repairs);
      if (repaired.empty()) continue;  // column entirely missing for this symbol
      if (name == "open_price")
        ms.open_price = std::move(repaired);
      else
        ms.measures[measure_from_string(name)] = std::move(repaired);
    }
    result.series.emplace(symbol, std::move(ms));
  }
  return result;
}

std::vector<double> select_measure(const MarketSeries& series, Measure measure) {
  if (auto it = series.measures.find(measure); it != series.measures.end()) return it->second;
  if (measure == Measure::open_to_close && !series.open_price.empty() && series.has(Measure::close_price)) {
    const auto& close = series.measures.at(Measure::close_price);
    std::vector<double> out(close.size());
    for (std::size_t i = 0; i < close.size(); ++i) out[i] = std::log(close[i] / series.open_price[i]);
    return out;
  }
  throw Error(ErrorKind::schema, series.symbol + ": measure '" + std::string(to_string(measure)) +
                                     "' is absent and cannot be derived");
}

void write_library_csv(const std::map<std::string, MarketSeries>& series, const std::filesystem::path& path) {
  std::vector<Measure> present;
  bool with_open = false;
  for (Measure m : kAllMeasures)
    for (const auto& [_, s] : series)
      if (s.has(m) && std::find(present.begin(), present.end(), m) == present.end()) present.push_back(m);
  for (const auto& [_, s] : series) with_open = with_open || !s.open_price.empty();
  std::sort(present.begin(), present.end());

  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  os << "date,Symbol";
  for (Measure m : present) os << ',' << to_string(m);
  if (with_open) os << ",open_price";
  os << '\n';
  char buf[40];
  auto put = [&](double v) {
    if (std::isnan(v)) {
      os << ',';
      return;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << ',' << buf;
  };
  for (const auto& [symbol, s] : series) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      os << s.dates[i].iso() << ',' << symbol;
      for (Measure m : present) {
        if (s.has(m))
          put(s.measures.at(m)[i]);
        else
          os << ',';
      }
      if (with_open) {
        if (s.open_price.empty())
          os << ',';
        else
          put(s.open_price[i]);
      }
      os << '\n';
    }
  }
  if (!os) throw Error(ErrorKind::io, "write failed for " + path.string());
}

}  // namespace roughscale::dataio
