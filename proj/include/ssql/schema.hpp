#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ssql/error.hpp"

#include <nlohmann/json.hpp>

namespace ssql {

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

enum class ColumnType { Text, Number, Time, Boolean, Others };

inline ColumnType column_type_from_string(std::string_view s) {
    if (iequals(s, "text")) return ColumnType::Text;
    if (iequals(s, "number")) return ColumnType::Number;
    if (iequals(s, "time")) return ColumnType::Time;
    if (iequals(s, "boolean")) return ColumnType::Boolean;
    return ColumnType::Others;
}

/// One column; `table` is the index of the owning table and `index_in_table`
/// the position among that table's columns. Columns carry a flat id: their
/// index in Schema::columns.
struct Column {
    std::string name;
    int table = -1;
    int index_in_table = -1;
    ColumnType type = ColumnType::Others;
};

struct Table {
    std::string name;
    std::vector<int> columns; // flat column ids, in schema order
};

/// Database metadata: tables, columns, primary and foreign keys.
/// Foreign keys and primary keys reference flat column ids.
struct Schema {
    std::string db_id;
    std::vector<Table> tables;
    std::vector<Column> columns;
    std::vector<std::pair<int, int>> foreign_keys;
    std::vector<int> primary_keys;

    std::optional<int> find_table(std::string_view name) const {
        for (std::size_t i = 0; i < tables.size(); ++i)
            if (iequals(tables[i].name, name)) return static_cast<int>(i);
        return std::nullopt;
    }

    /// Case-insensitive lookup of a column within one table.
    std::optional<int> find_column(int table, std::string_view name) const {
        for (int cid : tables.at(static_cast<std::size_t>(table)).columns)
            if (iequals(columns[static_cast<std::size_t>(cid)].name, name)) return cid;
        return std::nullopt;
    }

    const std::string& table_name(int t) const { return tables.at(static_cast<std::size_t>(t)).name; }
    const std::string& column_name(int c) const { return columns.at(static_cast<std::size_t>(c)).name; }
    int column_table(int c) const { return columns.at(static_cast<std::size_t>(c)).table; }

    /// "table.column" with original schema casing.
    std::string qualified_column(int c) const {
        return table_name(column_table(c)) + "." + column_name(c);
    }
};

namespace detail {

inline void validate_schema(const Schema& s) {
    std::unordered_set<std::string> table_names;
    for (const auto& t : s.tables) {
        if (t.name.empty())
            throw Error(ErrorCode::MalformedSchemaFile, "empty table name in db '" + s.db_id + "'");
        if (t.columns.empty())
            throw Error(ErrorCode::MalformedSchemaFile,
                        "table '" + t.name + "' has no columns in db '" + s.db_id + "'");
        if (!table_names.insert(to_lower(t.name)).second)
            throw Error(ErrorCode::MalformedSchemaFile,
                        "duplicate table name '" + t.name + "' in db '" + s.db_id + "'");
        std::unordered_set<std::string> col_names;
        for (int cid : t.columns) {
            const auto& c = s.columns[static_cast<std::size_t>(cid)];
            if (c.name.empty())
                throw Error(ErrorCode::MalformedSchemaFile,
                            "empty column name in table '" + t.name + "'");
            if (!col_names.insert(to_lower(c.name)).second)
                throw Error(ErrorCode::MalformedSchemaFile,
                            "duplicate column '" + c.name + "' in table '" + t.name + "'");
        }
    }
    const int ncols = static_cast<int>(s.columns.size());
    for (const auto& [a, b] : s.foreign_keys) {
        if (a < 0 || a >= ncols || b < 0 || b >= ncols)
            throw Error(ErrorCode::MalformedSchemaFile,
                        "foreign key endpoint out of range in db '" + s.db_id + "'");
        if (a == b)
            throw Error(ErrorCode::MalformedSchemaFile,
                        "foreign key links column to itself in db '" + s.db_id + "'");
    }
    for (int p : s.primary_keys)
        if (p < 0 || p >= ncols)
            throw Error(ErrorCode::MalformedSchemaFile,
                        "primary key index out of range in db '" + s.db_id + "'");
}

/// Builds a Schema from one entry of a Spider tables array. Raw column
/// indices (which count the synthetic "*" at slot 0) are remapped to flat
/// column ids.
inline Schema schema_from_entry(const nlohmann::json& entry) {
    Schema s;
    try {
        s.db_id = entry.at("db_id").get<std::string>();
        const auto& table_names = entry.at("table_names_original");
        const auto& col_entries = entry.at("column_names_original");
        const auto& col_types = entry.at("column_types");

        for (const auto& name : table_names)
            s.tables.push_back(Table{name.get<std::string>(), {}});

        std::vector<int> raw_to_flat(col_entries.size(), -1);
        for (std::size_t raw = 0; raw < col_entries.size(); ++raw) {
            const auto& ce = col_entries[raw];
            int t = ce.at(0).get<int>();
            std::string name = ce.at(1).get<std::string>();
            if (t < 0) continue; // synthetic "*", not a schema column
            if (t >= static_cast<int>(s.tables.size()))
                throw Error(ErrorCode::MalformedSchemaFile,
                            "column '" + name + "' references missing table in db '" + s.db_id + "'");
            Column c;
            c.name = std::move(name);
            c.table = t;
            c.index_in_table = static_cast<int>(s.tables[static_cast<std::size_t>(t)].columns.size());
            if (raw < col_types.size())
                c.type = column_type_from_string(col_types[raw].get<std::string>());
            raw_to_flat[raw] = static_cast<int>(s.columns.size());
            s.tables[static_cast<std::size_t>(t)].columns.push_back(raw_to_flat[raw]);
            s.columns.push_back(std::move(c));
        }

        auto remap = [&](int raw, const char* what) {
            if (raw < 0 || raw >= static_cast<int>(raw_to_flat.size()) || raw_to_flat[static_cast<std::size_t>(raw)] < 0)
                throw Error(ErrorCode::MalformedSchemaFile,
                            std::string(what) + " references column index " + std::to_string(raw) +
                                " which does not resolve in db '" + s.db_id + "'");
            return raw_to_flat[static_cast<std::size_t>(raw)];
        };
        for (const auto& fk : entry.at("foreign_keys"))
            s.foreign_keys.emplace_back(remap(fk.at(0).get<int>(), "foreign key"),
                                        remap(fk.at(1).get<int>(), "foreign key"));
        for (const auto& pk : entry.at("primary_keys"))
            s.primary_keys.push_back(remap(pk.get<int>(), "primary key"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedSchemaFile,
                    "missing or ill-typed field: " + std::string(e.what()));
    }
    validate_schema(s);
    return s;
}

inline nlohmann::json parse_tables_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::FileNotFound, "cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedSchemaFile, "invalid JSON in '" + path + "': " + e.what());
    }
    if (!doc.is_array())
        throw Error(ErrorCode::MalformedSchemaFile, "'" + path + "' is not a tables array");
    return doc;
}

} // namespace detail

/// Loads one database from a Spider-format tables file.
inline Schema load_schema(const std::string& path, const std::string& db_id) {
    nlohmann::json doc = detail::parse_tables_file(path);
    for (const auto& entry : doc) {
        if (entry.contains("db_id") && entry["db_id"].is_string() &&
            iequals(entry["db_id"].get<std::string>(), db_id))
            return detail::schema_from_entry(entry);
    }
    throw Error(ErrorCode::UnknownDbId, "db_id '" + db_id + "' not present in '" + path + "'");
}

/// Loads every database in a Spider-format tables file, in file order.
inline std::vector<Schema> load_all_schemas(const std::string& path) {
    nlohmann::json doc = detail::parse_tables_file(path);
    std::vector<Schema> out;
    out.reserve(doc.size());
    for (const auto& entry : doc)
        out.push_back(detail::schema_from_entry(entry));
    return out;
}

} // namespace ssql
