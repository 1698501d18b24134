// Round-trips one joined query through the SSQL intermediate form.
// Usage: lower_lift_demo [tables.json]

#include <iostream>

#include "ssql/ssql.hpp"

int main(int argc, char** argv) {
    std::string tables = argc > 1 ? argv[1] : "data/tables.json";
    auto schema = ssql::load_schema(tables, "concert_singer");

    std::string sql =
        "select T1.name from singer as T1 "
        "join singer_in_concert as T2 on T1.singer_id = T2.singer_id "
        "join concert as T3 on T2.concert_id = T3.concert_id "
        "where T3.year = 2014";

    auto parsed = ssql::parse_sql(sql, schema);
    auto lowered = ssql::lower_to_ssql(*parsed, schema);
    auto lifted = ssql::lift_to_sql(lowered, schema);

    std::cout << "sql:    " << ssql::print_sql(*parsed) << "\n";
    std::cout << "ssql:   " << ssql::print_ssql(lowered) << "\n";
    std::cout << "lifted: " << ssql::print_sql(*lifted) << "\n";
    std::cout << "match:  " << (ssql::exact_set_match(*lifted, *parsed) ? "yes" : "no") << "\n";
    return 0;
}
