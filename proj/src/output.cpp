#include "rfseries/output.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rfs {

bool operator==(const OutputRecord& a, const OutputRecord& b) {
    return a.schema_version == b.schema_version && a.command == b.command &&
           a.columns == b.columns && a.rows == b.rows && a.metadata == b.metadata;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, ptr);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
    return s;
}

namespace {

bool looks_like_i64(const std::string& s) {
    if (s.empty()) return false;
    size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

bool looks_like_double(const std::string& s) {
    if (s == "nan" || s == "inf" || s == "-inf") return true;
    if (s.empty()) return false;
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() &&
           (s.find('.') != std::string::npos || s.find('e') != std::string::npos);
}

std::string encode_cell(const OutputRecord::Cell& c) {
    if (std::holds_alternative<std::int64_t>(c)) return std::to_string(std::get<std::int64_t>(c));
    if (std::holds_alternative<double>(c)) return format_double(std::get<double>(c));
    const std::string& s = std::get<std::string>(c);
    bool quote = s.empty() || s.find_first_of(",\"\n") != std::string::npos ||
                 looks_like_i64(s) || looks_like_double(s);
    if (!quote) return s;
    std::string out = "\"";
    for (char ch : s) {
        out += ch;
        if (ch == '"') out += '"';
    }
    out += '"';
    return out;
}

OutputRecord::Cell decode_cell(const std::string& raw, bool was_quoted) {
    if (was_quoted) return raw;
    if (looks_like_i64(raw)) {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
        if (ec == std::errc() && ptr == raw.data() + raw.size()) return v;
    }
    if (raw == "nan") return std::nan("");
    if (raw == "inf") return HUGE_VAL;
    if (raw == "-inf") return -HUGE_VAL;
    if (looks_like_double(raw)) return std::strtod(raw.c_str(), nullptr);
    return raw;
}

// Split one CSV line honoring quotes; returns (value, was_quoted) pairs.
std::vector<std::pair<std::string, bool>> split_csv_line(const std::string& line) {
    std::vector<std::pair<std::string, bool>> out;
    std::string cur;
    bool quoted = false, in_quotes = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"' && cur.empty()) {
            in_quotes = true;
            quoted = true;
        } else if (ch == ',') {
            out.emplace_back(cur, quoted);
            cur.clear();
            quoted = false;
        } else {
            cur += ch;
        }
    }
    out.emplace_back(cur, quoted);
    return out;
}

}  // namespace

std::string to_csv(const OutputRecord& rec) {
    std::ostringstream os;
    os << "# schema_version=" << rec.schema_version << "\n";
    os << "# command=" << rec.command << "\n";
    for (const auto& [k, v] : rec.metadata) os << "# " << k << "=" << v << "\n";
    for (size_t i = 0; i < rec.columns.size(); ++i) {
        if (i) os << ',';
        os << rec.columns[i];
    }
    os << "\n";
    for (const auto& row : rec.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << encode_cell(row[i]);
        }
        os << "\n";
    }
    return os.str();
}

std::string to_json(const OutputRecord& rec) {
    nlohmann::ordered_json j;
    j["schema_version"] = rec.schema_version;
    j["command"] = rec.command;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
    for (const auto& [k, v] : rec.metadata) meta[k] = v;
    j["metadata"] = meta;
    j["columns"] = rec.columns;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : rec.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (size_t i = 0; i < row.size(); ++i) {
            const auto& cell = row[i];
            if (std::holds_alternative<std::int64_t>(cell))
                obj[rec.columns[i]] = std::get<std::int64_t>(cell);
            else if (std::holds_alternative<double>(cell))
                obj[rec.columns[i]] = std::get<double>(cell);
            else
                obj[rec.columns[i]] = std::get<std::string>(cell);
        }
        rows.push_back(obj);
    }
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

OutputRecord parse_csv(const std::string& text) {
    OutputRecord rec;
    std::istringstream is(text);
    std::string line;
    bool header_done = false;
    bool schema_done = false, command_done = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0 || line.rfind("#", 0) == 0) {
            std::string body = line.substr(line.rfind("# ", 0) == 0 ? 2 : 1);
            size_t eq = body.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("parse_csv: malformed metadata line: " + line);
            std::string key = body.substr(0, eq);
            std::string value = body.substr(eq + 1);
            if (!schema_done && key == "schema_version") {
                rec.schema_version = std::atoi(value.c_str());
                schema_done = true;
            } else if (!command_done && key == "command") {
                rec.command = value;
                command_done = true;
            } else {
                rec.add_meta(key, value);
            }
            continue;
        }
        if (!header_done) {
            for (auto& [v, q] : split_csv_line(line)) rec.columns.push_back(v);
            header_done = true;
            continue;
        }
        std::vector<OutputRecord::Cell> row;
        for (auto& [v, q] : split_csv_line(line)) row.push_back(decode_cell(v, q));
        if (row.size() != rec.columns.size())
            throw std::invalid_argument("parse_csv: row width does not match header");
        rec.rows.push_back(std::move(row));
    }
    if (!header_done) throw std::invalid_argument("parse_csv: missing header row");
    return rec;
}

}  // namespace rfs
