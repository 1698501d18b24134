#include "catch2/catch_amalgamated.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "ssql/schema.hpp"
#include "ssql/schema_graph.hpp"
#include "support/fixtures.hpp"

using namespace ssql;

TEST_CASE("load_schema resolves concert_singer from the bundled tables file") {
    Schema s = load_schema(fixtures::data_dir() + "/tables.json", "concert_singer");
    REQUIRE(s.db_id == "concert_singer");
    REQUIRE(s.tables.size() == 4);
    // Counts cross-checked by hand against the raw file entries.
    CHECK(s.columns.size() == 21);
    CHECK(s.tables[0].columns.size() == 7);  // stadium
    CHECK(s.tables[1].columns.size() == 7);  // singer
    CHECK(s.tables[2].columns.size() == 5);  // concert
    CHECK(s.tables[3].columns.size() == 2);  // singer_in_concert
    CHECK(s.foreign_keys.size() == 3);
    CHECK(s.primary_keys.size() == 4);
    // FK endpoints resolve and never self-link.
    for (auto [a, b] : s.foreign_keys) {
        CHECK(a != b);
        CHECK(a < static_cast<int>(s.columns.size()));
        CHECK(b < static_cast<int>(s.columns.size()));
    }
    // Case-insensitive lookups.
    CHECK(s.find_table("SINGER").value() == 1);
    CHECK(s.find_column(1, "Name").has_value());
}

TEST_CASE("load_schema rejects unknown db ids") {
    auto path = fixtures::data_dir() + "/tables.json";
    try {
        load_schema(path, "nonexistent");
        FAIL("expected UnknownDbId");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownDbId);
    }
}

TEST_CASE("load_schema rejects missing files") {
    try {
        load_schema("no_such_file.json", "x");
        FAIL("expected FileNotFound");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::FileNotFound);
    }
}

TEST_CASE("load_schema flags dangling foreign key indices") {
    std::string path = "malformed_tables_test.json";
    {
        std::ofstream out(path);
        out << R"([{"db_id": "bad", "table_names_original": ["t"],
                    "column_names_original": [[-1, "*"], [0, "a"], [0, "b"]],
                    "column_types": ["text", "text", "number"],
                    "foreign_keys": [[1, 999]], "primary_keys": [1]}])";
    }
    try {
        load_schema(path, "bad");
        FAIL("expected MalformedSchemaFile");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedSchemaFile);
    }
    std::remove(path.c_str());
}

TEST_CASE("load_schema flags missing fields") {
    std::string path = "missing_field_test.json";
    {
        std::ofstream out(path);
        out << R"([{"db_id": "bad", "table_names_original": ["t"]}])";
    }
    try {
        load_schema(path, "bad");
        FAIL("expected MalformedSchemaFile");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedSchemaFile);
    }
    std::remove(path.c_str());
}

TEST_CASE("build_graph node and edge counts") {
    SECTION("one table, three columns, no FKs") {
        auto s = fixtures::make_schema("d", {{"t", {"a", "b", "c"}}});
        auto g = build_graph(s);
        CHECK(g.node_count() == 4);
        CHECK(g.edges.size() == 3);
        for (const auto& e : g.edges) CHECK(e.kind == SchemaGraph::EdgeKind::Membership);
    }
    SECTION("two tables with one FK") {
        auto s = fixtures::make_schema("d", {{"a", {"x", "k"}}, {"b", {"y", "k"}}},
                                       {{"a", "x", "b", "y"}});
        auto g = build_graph(s);
        CHECK(g.node_count() == 6);
        int membership = 0, fk = 0;
        for (const auto& e : g.edges)
            (e.kind == SchemaGraph::EdgeKind::Membership ? membership : fk)++;
        CHECK(membership == 4);
        CHECK(fk == 1);
    }
    SECTION("concert_singer counts match the schema fields") {
        auto s = fixtures::concert_singer();
        auto g = build_graph(s);
        CHECK(g.node_count() == static_cast<int>(s.tables.size() + s.columns.size()));
        std::size_t membership = 0, fk = 0;
        for (const auto& e : g.edges)
            (e.kind == SchemaGraph::EdgeKind::Membership ? membership : fk)++;
        CHECK(membership == s.columns.size());
        CHECK(fk == s.foreign_keys.size());
    }
    SECTION("no duplicate edges") {
        auto s = fixtures::university();
        auto g = build_graph(s);
        std::set<std::pair<int, int>> seen;
        for (const auto& e : g.edges) {
            auto key = std::minmax(e.u, e.v);
            CHECK(seen.insert({key.first, key.second}).second);
        }
    }
}

TEST_CASE("schema validation rejects duplicate names and self-linked keys") {
    {
        std::ofstream out("dup_table_test.json");
        out << R"([{"db_id": "dup", "table_names_original": ["T", "t"],
                    "column_names_original": [[-1, "*"], [0, "a"], [1, "b"]],
                    "column_types": ["text", "text", "text"],
                    "foreign_keys": [], "primary_keys": []}])";
    }
    try {
        load_schema("dup_table_test.json", "dup");
        FAIL("expected MalformedSchemaFile");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedSchemaFile);
    }
    std::remove("dup_table_test.json");

    {
        std::ofstream out("self_fk_test.json");
        out << R"([{"db_id": "selffk", "table_names_original": ["t"],
                    "column_names_original": [[-1, "*"], [0, "a"], [0, "b"]],
                    "column_types": ["text", "text", "text"],
                    "foreign_keys": [[1, 1]], "primary_keys": []}])";
    }
    try {
        load_schema("self_fk_test.json", "selffk");
        FAIL("expected MalformedSchemaFile");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedSchemaFile);
    }
    std::remove("self_fk_test.json");

    {
        std::ofstream out("dup_col_test.json");
        out << R"([{"db_id": "dupcol", "table_names_original": ["t"],
                    "column_names_original": [[-1, "*"], [0, "a"], [0, "A"]],
                    "column_types": ["text", "text", "text"],
                    "foreign_keys": [], "primary_keys": []}])";
    }
    try {
        load_schema("dup_col_test.json", "dupcol");
        FAIL("expected MalformedSchemaFile");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedSchemaFile);
    }
    std::remove("dup_col_test.json");
}
