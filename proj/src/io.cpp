#include "critmkt/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace critmkt {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what) {
    throw InputError(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

double parse_price(std::string_view cell, std::string_view source, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty())
        fail(source, line, "malformed price '" + std::string(cell) + "'");
    if (!(v > 0.0) || !std::isfinite(v)) fail(source, line, "non-positive price " + std::string(cell));
    return v;
}

bool is_weekday(std::int64_t day) {
    const auto wd = ((day + 4) % 7 + 7) % 7;  // 1970-01-01 was a Thursday; 0 = Sunday
    return wd != 0 && wd != 6;
}

struct Builder {
    PriceSeries series;
    bool iso = false;

    void add(std::string_view date, std::int64_t day, double price, std::string_view source, std::size_t line) {
        if (!series.days.empty()) {
            const auto prev = series.days.back();
            if (day == prev) fail(source, line, "duplicate date " + std::string(date) + " for market " + series.market);
            if (day < prev) fail(source, line, "date " + std::string(date) + " is earlier than the previous date for market " + series.market);
            if (iso) {
                for (auto d = prev + 1; d < day; ++d)
                    if (is_weekday(d)) {
                        ++series.gaps;
                        break;
                    }
            } else if (day - prev > 1) {
                ++series.gaps;
            }
        }
        series.days.push_back(day);
        series.dates.emplace_back(date);
        series.prices.push_back(price);
    }
};

}  // namespace

std::int64_t parse_day(std::string_view date) {
    date = trim(date);
    if (date.empty()) throw InputError("empty date");
    if (std::all_of(date.begin(), date.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        std::int64_t v = 0;
        const auto [ptr, ec] = std::from_chars(date.data(), date.data() + date.size(), v);
        if (ec != std::errc()) throw InputError("date index out of range: " + std::string(date));
        return v;
    }
    int y = 0;
    unsigned m = 0, d = 0;
    if (date.size() != 10 || date[4] != '-' || date[7] != '-') throw InputError("malformed date '" + std::string(date) + "'");
    auto num = [&](std::size_t pos, std::size_t len, auto& out) {
        const auto [ptr, ec] = std::from_chars(date.data() + pos, date.data() + pos + len, out);
        if (ec != std::errc() || ptr != date.data() + pos + len) throw InputError("malformed date '" + std::string(date) + "'");
    };
    num(0, 4, y);
    num(5, 2, m);
    num(8, 2, d);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw InputError("invalid calendar date '" + std::string(date) + "'");
    return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

PriceTable parse_price_csv(std::string_view text, CsvSchema schema, std::string_view source) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    std::vector<std::pair<std::size_t, std::string_view>> lines;
    std::size_t lineno = 0, pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++lineno;
        if (!trim(line).empty() && trim(line).front() != '#') lines.emplace_back(lineno, line);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    if (lines.empty()) throw InputError(std::string(source) + ": empty file");

    const auto header = split(lines.front().second);
    std::vector<std::string> names;
    for (const auto h : header) names.push_back(lower(h));
    const bool looks_long = names.size() == 3 && names[0] == "market" && names[1] == "date" && names[2] == "price";
    if (schema == CsvSchema::detect) schema = looks_long ? CsvSchema::long_format : CsvSchema::wide;
    if (lines.size() < 2) throw InputError(std::string(source) + ": no data rows");

    PriceTable table;
    if (schema == CsvSchema::long_format) {
        if (!looks_long) fail(source, lines.front().first, "long format needs the header market,date,price");
        std::map<std::string, std::size_t, std::less<>> index;
        std::vector<Builder> builders;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto [ln, line] = lines[i];
            const auto cells = split(line);
            if (cells.size() != 3) fail(source, ln, "expected 3 fields, found " + std::to_string(cells.size()));
            if (cells[0].empty()) fail(source, ln, "empty market name");
            std::int64_t day = 0;
            try {
                day = parse_day(cells[1]);
            } catch (const InputError& e) {
                fail(source, ln, e.what());
            }
            const double price = parse_price(cells[2], source, ln);
            auto it = index.find(cells[0]);
            if (it == index.end()) {
                it = index.emplace(std::string(cells[0]), builders.size()).first;
                builders.push_back({});
                builders.back().series.market = std::string(cells[0]);
                builders.back().iso = cells[1].find('-') != std::string_view::npos;
            }
            builders[it->second].add(cells[1], day, price, source, ln);
        }
        for (auto& b : builders) table.markets.push_back(std::move(b.series));
    } else {
        if (header.size() < 2 || names[0] != "date") fail(source, lines.front().first, "wide format needs the header date,<market>,...");
        std::vector<Builder> builders(header.size() - 1);
        for (std::size_t j = 1; j < header.size(); ++j) {
            if (header[j].empty()) fail(source, lines.front().first, "empty market name in column " + std::to_string(j + 1));
            builders[j - 1].series.market = std::string(header[j]);
        }
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto [ln, line] = lines[i];
            const auto cells = split(line);
            if (cells.size() != header.size())
                fail(source, ln, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
            std::int64_t day = 0;
            try {
                day = parse_day(cells[0]);
            } catch (const InputError& e) {
                fail(source, ln, e.what());
            }
            for (std::size_t j = 1; j < cells.size(); ++j) {
                if (cells[j].empty()) continue;
                auto& b = builders[j - 1];
                if (b.series.days.empty()) b.iso = cells[0].find('-') != std::string_view::npos;
                b.add(cells[0], day, parse_price(cells[j], source, ln), source, ln);
            }
        }
        for (auto& b : builders) table.markets.push_back(std::move(b.series));
    }
    return table;
}

PriceTable load_price_csv(const std::filesystem::path& path, CsvSchema schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_price_csv(ss.str(), schema, path.string());
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return out.str();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

nlohmann::json Provenance::to_json() const {
    return {{"tool", "critmkt"},
            {"version", std::string(version)},
            {"command", command},
            {"seed", seed},
            {"config_sha256", config_hash},
            {"inputs", input_hashes}};
}

std::string Provenance::csv_header() const {
    std::string out = "# critmkt " + std::string(version) + "\n# command: " + command + "\n# seed: " + std::to_string(seed) +
                      "\n# config_sha256: " + config_hash + "\n";
    for (const auto& [name, hash] : input_hashes) out += "# input " + name + " sha256: " + hash + "\n";
    for (const auto& [key, value] : notes) out += "# " + key + ": " + value + "\n";
    return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_header(std::ofstream& out, const Provenance& prov, const std::vector<std::string>& columns) {
    out << prov.csv_header();
    for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j];
    out << '\n';
}

}  // namespace

void write_csv(const std::filesystem::path& path, const Provenance& prov, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    auto out = open_out(path);
    write_header(out, prov, columns);
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_double(row[j]);
        out << '\n';
    }
}

void write_csv_cells(const std::filesystem::path& path, const Provenance& prov, const std::vector<std::string>& columns,
                     const std::vector<std::vector<std::string>>& rows) {
    auto out = open_out(path);
    write_header(out, prov, columns);
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
        out << '\n';
    }
}

void write_json(const std::filesystem::path& path, const Provenance& prov, nlohmann::json body) {
    body["provenance"] = prov.to_json();
    auto out = open_out(path);
    out << body.dump(2) << '\n';
}

std::vector<VarianceRow> load_variance_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<VarianceRow> rows;
    std::string line;
    std::size_t ln = 0;
    bool header = false;
    std::size_t width = 0;
    // Column positions of k, var, se; se is optional.
    std::ptrdiff_t col[3] = {-1, -1, -1};
    while (std::getline(in, line)) {
        ++ln;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto cells = split(t);
        if (!header) {
            for (std::size_t j = 0; j < cells.size(); ++j) {
                const auto name = lower(cells[j]);
                const auto at = static_cast<std::ptrdiff_t>(j);
                if (name == "k" && col[0] < 0) col[0] = at;
                else if ((name == "var" || name == "var_tilde") && col[1] < 0) col[1] = at;
                else if ((name == "se" || name == "var_tilde_se") && col[2] < 0) col[2] = at;
            }
            if (col[0] < 0 || col[1] < 0) fail(path.string(), ln, "expected header k,var[,se]");
            width = cells.size();
            header = true;
            continue;
        }
        if (cells.size() != width) fail(path.string(), ln, "expected " + std::to_string(width) + " fields");
        VarianceRow r;
        double* dst[3] = {&r.k, &r.var, &r.se};
        for (std::size_t j = 0; j < 3; ++j) {
            if (col[j] < 0) continue;
            const auto cell = cells[static_cast<std::size_t>(col[j])];
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), *dst[j]);
            if (ec != std::errc() || ptr != cell.data() + cell.size())
                fail(path.string(), ln, "malformed number '" + std::string(cell) + "'");
        }
        rows.push_back(r);
    }
    if (!header) throw InputError(path.string() + ": empty file");
    return rows;
}

}  // namespace critmkt
