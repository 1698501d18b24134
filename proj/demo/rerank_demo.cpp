// Reranks a small beam set with the baseline scorer and shows how the
// combined score reorders the candidates.
// Usage: rerank_demo [tables.json]

#include <iostream>

#include "ssql/ssql.hpp"

int main(int argc, char** argv) {
    std::string tables = argc > 1 ? argv[1] : "data/tables.json";
    auto schema = ssql::load_schema(tables, "concert_singer");

    ssql::BeamSet set;
    set.question = "How many singers do we have?";
    set.db_id = "concert_singer";
    set.candidates = {
        {"select count(*) from concert", 0.72, {}, {}, {}},
        {"select count(*) from singer", 0.25, {}, {}, {}},
        {"select count(name) from stadium", 0.03, {}, {}, {}},
    };

    ssql::RerankConfig cfg; // alpha 0.7
    ssql::Scorer scorer = [&cfg](const std::string& q, const std::string& sql,
                                 const std::string& schema_text) {
        return ssql::baseline_scorer(q, sql, schema_text, cfg.d_floor);
    };
    auto ranked = ssql::rerank_beams(set, scorer, cfg, &schema);

    std::cout << "question: " << set.question << "\n";
    for (const auto& c : ranked.candidates)
        std::cout << "  S=" << *c.s_combined << "  g=" << c.g << "  d=" << *c.d << "  "
                  << c.sql_text << "\n";
    return 0;
}
