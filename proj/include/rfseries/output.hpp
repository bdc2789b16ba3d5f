#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace rfs {

// One tabular result: fixed column schema per subcommand, typed cells,
// ordered metadata. CSV and JSON encodings carry identical values and
// the CSV round-trips through parse_csv exactly.
struct OutputRecord {
    using Cell = std::variant<std::int64_t, double, std::string>;

    int schema_version = 1;
    std::string command;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    void add_meta(std::string key, std::string value) {
        metadata.emplace_back(std::move(key), std::move(value));
    }
};

bool operator==(const OutputRecord& a, const OutputRecord& b);

// Shortest decimal form that parses back to the same double; integral
// values keep a trailing ".0" so the cell type survives the round trip.
std::string format_double(double v);

std::string to_csv(const OutputRecord& rec);
std::string to_json(const OutputRecord& rec);

// Inverse of to_csv. Throws std::invalid_argument on malformed input.
OutputRecord parse_csv(const std::string& text);

}  // namespace rfs
