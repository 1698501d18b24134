#pragma once

#include <array>
#include <cstdlib>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ssql/schema.hpp"

namespace fixtures {

struct TableSpec {
    std::string name;
    std::vector<std::string> columns;
};

/// Builds a Schema in memory. Foreign keys are given as
/// (table, column, table, column) name tuples.
inline ssql::Schema make_schema(
    std::string db_id, const std::vector<TableSpec>& tables,
    const std::vector<std::array<std::string, 4>>& fks = {},
    const std::vector<std::pair<std::string, std::string>>& pks = {}) {
    ssql::Schema s;
    s.db_id = std::move(db_id);
    for (const auto& ts : tables) {
        ssql::Table t;
        t.name = ts.name;
        int ti = static_cast<int>(s.tables.size());
        for (const auto& cn : ts.columns) {
            ssql::Column c;
            c.name = cn;
            c.table = ti;
            c.index_in_table = static_cast<int>(t.columns.size());
            c.type = ssql::ColumnType::Text;
            t.columns.push_back(static_cast<int>(s.columns.size()));
            s.columns.push_back(c);
        }
        s.tables.push_back(std::move(t));
    }
    auto col_id = [&](const std::string& tn, const std::string& cn) {
        auto t = s.find_table(tn);
        auto c = s.find_column(*t, cn);
        return *c;
    };
    for (const auto& fk : fks)
        s.foreign_keys.emplace_back(col_id(fk[0], fk[1]), col_id(fk[2], fk[3]));
    for (const auto& [tn, cn] : pks)
        s.primary_keys.push_back(col_id(tn, cn));
    return s;
}

/// Replica of the Spider concert_singer database layout.
inline ssql::Schema concert_singer() {
    return make_schema(
        "concert_singer",
        {{"stadium", {"stadium_id", "location", "name", "capacity", "highest", "lowest", "average"}},
         {"singer", {"singer_id", "name", "country", "song_name", "song_release_year", "age", "is_male"}},
         {"concert", {"concert_id", "concert_name", "theme", "stadium_id", "year"}},
         {"singer_in_concert", {"concert_id", "singer_id"}}},
        {{"concert", "stadium_id", "stadium", "stadium_id"},
         {"singer_in_concert", "concert_id", "concert", "concert_id"},
         {"singer_in_concert", "singer_id", "singer", "singer_id"}},
        {{"stadium", "stadium_id"}, {"singer", "singer_id"}, {"concert", "concert_id"},
         {"singer_in_concert", "concert_id"}});
}

/// Five-table schema with a junction table (enrollment) and a shared hub
/// (department).
inline ssql::Schema university() {
    return make_schema(
        "university",
        {{"department", {"dept_id", "dept_name", "budget"}},
         {"student", {"stu_id", "name", "age", "major_dept_id"}},
         {"course", {"course_id", "title", "credits", "dept_id"}},
         {"enrollment", {"stu_id", "course_id", "grade"}},
         {"instructor", {"inst_id", "name", "salary", "dept_id"}}},
        {{"course", "dept_id", "department", "dept_id"},
         {"enrollment", "stu_id", "student", "stu_id"},
         {"enrollment", "course_id", "course", "course_id"},
         {"instructor", "dept_id", "department", "dept_id"}},
        {{"department", "dept_id"}, {"student", "stu_id"}, {"course", "course_id"},
         {"instructor", "inst_id"}});
}

/// Two FK-disconnected components: {a, b} and {c}.
inline ssql::Schema split_schema() {
    return make_schema("split",
                       {{"a", {"id", "x"}}, {"b", {"id", "a_id"}}, {"c", {"id", "y"}}},
                       {{"b", "a_id", "a", "id"}});
}

/// Random connected-ish schema for property tests. Node count stays small
/// enough for exhaustive subgraph enumeration.
inline ssql::Schema random_schema(std::mt19937& rng, int max_tables = 8, int max_nodes = 18) {
    std::uniform_int_distribution<int> table_count_dist(2, max_tables);
    int nt = table_count_dist(rng);
    std::vector<TableSpec> tables;
    int nodes = nt; // table nodes
    for (int t = 0; t < nt; ++t) {
        int ncols = 1;
        if (nodes + nt - t < max_nodes - 1 && std::uniform_int_distribution<int>(0, 2)(rng) == 0)
            ncols = 2;
        if (nodes + ncols > max_nodes) ncols = 1;
        std::vector<std::string> cols;
        for (int c = 0; c < ncols; ++c) cols.push_back("c" + std::to_string(c));
        tables.push_back({"t" + std::to_string(t), cols});
        nodes += ncols;
    }
    ssql::Schema s = make_schema("rand", tables);
    // Random foreign keys between distinct tables, no duplicate pairs.
    int want = std::uniform_int_distribution<int>(nt - 2, nt + 2)(rng);
    std::uniform_int_distribution<int> tdist(0, nt - 1);
    for (int i = 0; i < want; ++i) {
        int ta = tdist(rng), tb = tdist(rng);
        if (ta == tb) continue;
        const auto& ca = s.tables[static_cast<std::size_t>(ta)].columns;
        const auto& cb = s.tables[static_cast<std::size_t>(tb)].columns;
        int a = ca[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, static_cast<int>(ca.size()) - 1)(rng))];
        int b = cb[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, static_cast<int>(cb.size()) - 1)(rng))];
        bool dup = false;
        for (auto& [x, y] : s.foreign_keys)
            if ((x == a && y == b) || (x == b && y == a)) dup = true;
        if (!dup) s.foreign_keys.emplace_back(a, b);
    }
    return s;
}

inline std::string data_dir() {
    const char* env = std::getenv("SSQL_DATA_DIR");
    return env ? env : "data";
}

inline std::string cli_path() {
    const char* env = std::getenv("SSQL_CLI");
    return env ? env : "./build/tools/ssql";
}

} // namespace fixtures
