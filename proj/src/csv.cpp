#include "nbsim/csv.hpp"

#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>
#include <vector>

#include "nbsim/errors.hpp"

namespace nbsim {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::vector<std::string>> split_records(std::string_view text, const std::string& origin) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        if (!(record.size() == 1 && record.front().empty())) records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started && !trim(field).empty()) {
                    throw TableLoadError(origin, "stray quote in unquoted field");
                }
                field.clear();
                quoted = true;
                field_started = true;
                break;
            case ',': end_field(); break;
            case '\r': break;
            case '\n': end_record(); break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (quoted) throw TableLoadError(origin, "unterminated quoted field");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

std::string quote_if_needed(const std::string& value) {
    if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

TableData parse_delimited(std::string_view text, std::string name, const std::string& origin) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    const auto records = split_records(text, origin);
    TableData table{std::move(name), {}};
    if (records.empty()) return table;

    std::unordered_set<std::string> seen;
    for (const auto& raw : records.front()) {
        auto col_name = trim(raw);
        if (!seen.insert(col_name).second) {
            throw TableLoadError(origin, "duplicate column name '" + col_name + "'");
        }
        table.columns.push_back(Column{std::move(col_name), {}});
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& row = records[r];
        if (row.size() > table.columns.size()) {
            throw TableLoadError(origin, "row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                                             " fields, header has " + std::to_string(table.columns.size()));
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            auto value = trim(row[c]);
            if (!value.empty()) table.columns[c].values.insert(std::move(value));
        }
    }
    return table;
}

TableData load_delimited(const std::filesystem::path& path, std::string name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TableLoadError(path.string(), "file not readable");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_delimited(text, std::move(name), path.string());
}

std::string serialize_delimited(const TableData& table) {
    std::ostringstream out;
    std::size_t rows = 0;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out << ',';
        out << quote_if_needed(table.columns[c].name);
        rows = std::max(rows, table.columns[c].values.size());
    }
    out << '\n';

    std::vector<std::set<std::string>::const_iterator> cursors;
    for (const auto& col : table.columns) cursors.push_back(col.values.begin());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) out << ',';
            if (cursors[c] != table.columns[c].values.end()) {
                out << quote_if_needed(*cursors[c]);
                ++cursors[c];
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace nbsim
