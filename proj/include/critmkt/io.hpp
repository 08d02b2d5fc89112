#pragma once

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace critmkt {

inline constexpr std::string_view version = "0.1.0";

/// Malformed input file; the message names the file and line.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// One market's observations in date order.
struct PriceSeries {
    std::string market;
    std::vector<std::int64_t> days;  ///< day number (days since 1970-01-01, or the raw integer index)
    std::vector<std::string> dates;  ///< as written in the file
    std::vector<double> prices;
    std::size_t gaps = 0;            ///< steps longer than one business day

    [[nodiscard]] std::size_t size() const noexcept { return prices.size(); }
};

enum class CsvSchema {
    detect,  ///< long if the header is market,date,price; otherwise wide
    long_format,
    wide,
};

/// Markets keep their own (possibly ragged) histories; alignment across
/// markets is by day number.
struct PriceTable {
    std::vector<PriceSeries> markets;
};

/**
 * Load daily prices.
 *   long:  header `market,date,price`, one observation per row
 *   wide:  header `date,<market>,...`, empty cells where a market has no price
 * Dates are ISO-8601 (YYYY-MM-DD) or non-negative integers. Dates must be
 * strictly increasing within a market and prices positive. Throws InputError
 * with the offending line number.
 */
[[nodiscard]] PriceTable load_price_csv(const std::filesystem::path& path, CsvSchema schema = CsvSchema::detect);
[[nodiscard]] PriceTable parse_price_csv(std::string_view text, CsvSchema schema = CsvSchema::detect,
                                         std::string_view source = "<input>");

/// Days since 1970-01-01 for YYYY-MM-DD, or the value of a plain integer.
[[nodiscard]] std::int64_t parse_day(std::string_view date);

/// Shortest decimal string that reads back to the same double; "nan",
/// "inf", "-inf" for non-finite values and "0" for both zeros.
[[nodiscard]] std::string format_double(double v);

[[nodiscard]] std::string sha256_hex(std::string_view bytes);
[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

/// Recorded in every output file.
struct Provenance {
    std::string command;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> input_hashes;  ///< name -> sha256
    std::string config_hash;                          ///< sha256 of the effective config JSON
    std::vector<std::pair<std::string, std::string>> notes;  ///< extra "# key: value" lines

    [[nodiscard]] nlohmann::json to_json() const;
    /// "# key: value" lines.
    [[nodiscard]] std::string csv_header() const;
};

/// Numeric CSV writer: provenance header, column names, rows.
void write_csv(const std::filesystem::path& path, const Provenance& prov, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);
/// Same with preformatted cells.
void write_csv_cells(const std::filesystem::path& path, const Provenance& prov, const std::vector<std::string>& columns,
                     const std::vector<std::vector<std::string>>& rows);

/// Pretty-printed JSON with a "provenance" member added.
void write_json(const std::filesystem::path& path, const Provenance& prov, nlohmann::json body);

/// Reads `k,var[,se]` rows (header required, '#' lines skipped).
struct VarianceRow {
    double k = 0.0;
    double var = 0.0;
    double se = 0.0;
};
[[nodiscard]] std::vector<VarianceRow> load_variance_csv(const std::filesystem::path& path);

}  // namespace critmkt
