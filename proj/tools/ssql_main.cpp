// Command-line front end: SQL <-> SSQL translation, join-plan inspection,
// round-trip and rerank reports, soft-logit labeling.
//
// Exit codes: 0 success (batch failures are reported data, not errors),
// 1 data/domain error, 2 usage error.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ssql/ssql.hpp"

#include <CLI11.hpp>

namespace {

struct CliConfig {
    std::string schema_path;
    std::string db_id;
    std::string corpus_path;
    std::string beams_path;
    std::string out_path;
    std::string json_path;
    double alpha = 0.7;
    double delta = 0.7;
    double d_floor = 1e-6;
    bool ignore_values = false;
    std::string scorer = "baseline";
    std::string terminals;
    std::string inline_text;
};

std::string read_stdin() {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
}

std::string trimmed(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Inline text argument, or stdin when absent. Empty input is a usage error.
std::string single_query_text(const CliConfig& cfg) {
    std::string text = cfg.inline_text.empty() ? read_stdin() : cfg.inline_text;
    text = trimmed(text);
    if (text.empty()) {
        std::cerr << "error: no query text given (pass it inline or on stdin)\n";
        std::exit(2);
    }
    return text;
}

std::ostream& open_output(const CliConfig& cfg, std::ofstream& file) {
    if (cfg.out_path.empty()) return std::cout;
    file.open(cfg.out_path);
    if (!file) {
        std::cerr << "error: cannot write '" << cfg.out_path << "'\n";
        std::exit(1);
    }
    return file;
}

void write_json(const CliConfig& cfg, const nlohmann::json& j) {
    if (cfg.json_path.empty()) return;
    std::ofstream out(cfg.json_path);
    if (!out) throw ssql::Error(ssql::ErrorCode::FileNotFound, "cannot write '" + cfg.json_path + "'");
    out << j.dump(2) << "\n";
}

/// Scorer selection: the deterministic baseline, the label oracle, or an
/// external line-protocol process ("cmd:<shell command>").
ssql::Scorer make_scorer(const CliConfig& cfg, const std::vector<ssql::BeamSet>& beams,
                         std::shared_ptr<ssql::ExternalScorer>& external) {
    if (cfg.scorer == "baseline") {
        double floor = cfg.d_floor;
        return [floor](const std::string& q, const std::string& sql, const std::string& schema) {
            return ssql::baseline_scorer(q, sql, schema, floor);
        };
    }
    if (cfg.scorer == "oracle") {
        auto truth = std::make_shared<std::unordered_map<std::string, bool>>();
        for (const auto& set : beams)
            for (const auto& c : set.candidates) {
                if (!c.correct)
                    throw ssql::Error(ssql::ErrorCode::MissingLabel,
                                      "oracle scorer needs correct labels on every beam");
                (*truth)[set.question + "\x1f" + c.sql_text] = *c.correct;
            }
        double floor = cfg.d_floor;
        return [truth, floor](const std::string& q, const std::string& sql, const std::string&) {
            auto it = truth->find(q + "\x1f" + sql);
            return it != truth->end() && it->second ? 1.0 : floor;
        };
    }
    if (cfg.scorer.rfind("cmd:", 0) == 0) {
        external = std::make_shared<ssql::ExternalScorer>(cfg.scorer.substr(4));
        return [external](const std::string& q, const std::string& sql, const std::string& schema) {
            return (*external)(q, sql, schema);
        };
    }
    std::cerr << "error: unknown scorer '" << cfg.scorer << "' (baseline | oracle | cmd:...)\n";
    std::exit(2);
}

int cmd_config(const CliConfig& cfg) {
    std::cout << "alpha " << cfg.alpha << "\n";
    std::cout << "delta " << cfg.delta << "\n";
    std::cout << "d_floor " << cfg.d_floor << "\n";
    std::cout << "ignore_values " << (cfg.ignore_values ? "true" : "false") << "\n";
    std::cout << "scorer " << cfg.scorer << "\n";
    return 0;
}

int cmd_lower(const CliConfig& cfg) {
    if (!cfg.corpus_path.empty()) {
        ssql::SchemaSet schemas(cfg.schema_path);
        auto corpus = ssql::load_corpus(cfg.corpus_path);
        for (const auto& entry : corpus) {
            try {
                const auto& schema = schemas.get(entry.db_id);
                auto ssql_form = ssql::lower_to_ssql(*ssql::parse_sql(entry.sql, schema), schema);
                std::cout << ssql::print_ssql(ssql_form) << "\n";
            } catch (const ssql::Error& e) {
                std::cout << "error: " << e.what() << "\n";
            }
        }
        return 0;
    }
    auto schema = ssql::load_schema(cfg.schema_path, cfg.db_id);
    auto text = single_query_text(cfg);
    auto lowered = ssql::lower_to_ssql(*ssql::parse_sql(text, schema), schema);
    std::cout << ssql::print_ssql(lowered) << "\n";
    return 0;
}

int cmd_lift(const CliConfig& cfg) {
    if (!cfg.corpus_path.empty()) {
        ssql::SchemaSet schemas(cfg.schema_path);
        auto corpus = ssql::load_corpus(cfg.corpus_path);
        for (const auto& entry : corpus) {
            try {
                if (!entry.ssql)
                    throw ssql::Error(ssql::ErrorCode::MalformedBeamFile,
                                      "corpus entry has no ssql field");
                const auto& schema = schemas.get(entry.db_id);
                auto lifted = ssql::lift_to_sql(ssql::parse_ssql(*entry.ssql, schema), schema);
                std::cout << ssql::print_sql(*lifted) << "\n";
            } catch (const ssql::Error& e) {
                std::cout << "error: " << e.what() << "\n";
            }
        }
        return 0;
    }
    auto schema = ssql::load_schema(cfg.schema_path, cfg.db_id);
    auto text = single_query_text(cfg);
    auto lifted = ssql::lift_to_sql(ssql::parse_ssql(text, schema), schema);
    std::cout << ssql::print_sql(*lifted) << "\n";
    return 0;
}

int cmd_roundtrip(const CliConfig& cfg) {
    ssql::SchemaSet schemas(cfg.schema_path);
    auto corpus = ssql::load_corpus(cfg.corpus_path);
    if (corpus.empty()) {
        std::cerr << "error: corpus '" << cfg.corpus_path << "' is empty\n";
        return 2;
    }
    auto report = ssql::roundtrip_report(corpus, schemas, cfg.ignore_values);
    ssql::print_report(report, std::cout);
    write_json(cfg, ssql::report_json(report));
    return 0;
}

int cmd_rerank(const CliConfig& cfg) {
    ssql::SchemaSet schemas(cfg.schema_path);
    auto beams = ssql::load_beam_file(cfg.beams_path);
    std::shared_ptr<ssql::ExternalScorer> external;
    auto scorer = make_scorer(cfg, beams, external);
    ssql::RerankConfig rc{cfg.alpha, cfg.d_floor};

    bool labelled = true;
    for (const auto& set : beams)
        for (const auto& c : set.candidates)
            if (!c.correct) labelled = false;

    for (const auto& set : beams) {
        const ssql::Schema* schema = nullptr;
        try {
            schema = &schemas.get(set.db_id);
        } catch (const ssql::Error&) {
        }
        auto ranked = ssql::rerank_beams(set, scorer, rc, schema);
        std::cout << ranked.candidates.front().sql_text << "\n";
    }
    if (labelled) {
        auto report = ssql::rerank_report(beams, schemas, scorer, rc);
        std::cout << "# total " << report.total << "\n";
        std::cout << "# top1_by_g " << report.top1_by_g << "\n";
        std::cout << "# top1_by_combined " << report.top1_by_combined << "\n";
        std::cout << "# top1_by_standalone " << report.top1_by_standalone << "\n";
        write_json(cfg, ssql::report_json(report));
    }
    return 0;
}

int cmd_label(const CliConfig& cfg) {
    auto beams = ssql::load_beam_file(cfg.beams_path);
    std::optional<ssql::SchemaSet> schemas;
    if (!cfg.schema_path.empty()) schemas.emplace(cfg.schema_path);
    ssql::LabelConfig lc{cfg.delta};
    std::ofstream file;
    std::ostream& out = open_output(cfg, file);
    for (const auto& set : beams) {
        const ssql::Schema* schema = nullptr;
        if (schemas) {
            try {
                schema = &schemas->get(set.db_id);
            } catch (const ssql::Error&) {
            }
        }
        auto targets = ssql::assign_soft_logits(set, lc, schema);
        ssql::write_training_targets(out, targets);
    }
    return 0;
}

int cmd_steiner(const CliConfig& cfg) {
    auto schema = ssql::load_schema(cfg.schema_path, cfg.db_id);
    auto graph = ssql::build_graph(schema);

    std::vector<int> terminals;
    int root = -1;
    std::stringstream ss(cfg.terminals);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trimmed(item);
        if (item.empty()) continue;
        auto dot = item.find('.');
        if (dot == std::string::npos) {
            auto t = schema.find_table(item);
            if (!t)
                throw ssql::Error(ssql::ErrorCode::UnknownTable,
                                  "table '" + item + "' not in schema");
            terminals.push_back(graph.table_node(*t));
            if (root < 0 || *t < root) root = *t;
        } else {
            auto t = schema.find_table(item.substr(0, dot));
            if (!t)
                throw ssql::Error(ssql::ErrorCode::UnknownTable,
                                  "table '" + item.substr(0, dot) + "' not in schema");
            auto c = schema.find_column(*t, item.substr(dot + 1));
            if (!c)
                throw ssql::Error(ssql::ErrorCode::UnknownColumn,
                                  "column '" + item + "' not in schema");
            terminals.push_back(graph.column_node(*c));
            if (root < 0 || *t < root) root = *t;
        }
    }
    if (terminals.empty()) {
        std::cerr << "error: --terminals is empty\n";
        return 2;
    }
    auto tree = ssql::steiner_tree(graph, terminals);
    auto plan = ssql::join_plan_from_tree(tree, graph, root);
    if (plan.tables.empty() && root >= 0) plan.tables.push_back(root);

    std::cout << "tables:";
    for (std::size_t i = 0; i < plan.tables.size(); ++i)
        std::cout << (i ? " , " : " ") << schema.table_name(plan.tables[i]);
    std::cout << "\n";
    for (const auto& [l, r] : plan.steps)
        std::cout << "step: " << schema.qualified_column(l) << " = " << schema.qualified_column(r)
                  << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SQL <-> SSQL transpiler and beam reranking toolkit"};
    app.require_subcommand(1);
    CliConfig cfg;

    auto open_unit = [](const std::string& what) {
        return [what](const std::string& v) -> std::string {
            double x = std::stod(v);
            if (x <= 0.0 || x >= 1.0) return what + " must be strictly between 0 and 1";
            return "";
        };
    };
    auto delta_check = [](const std::string& v) -> std::string {
        double x = std::stod(v);
        if (x <= 0.5 || x >= 1.0) return std::string("delta must be strictly between 0.5 and 1");
        return "";
    };

    auto add_common = [&](CLI::App* sub, bool schema_required) {
        auto* s = sub->add_option("--schema", cfg.schema_path, "Spider-format tables file");
        if (schema_required) s->required();
        sub->add_option("--alpha", cfg.alpha, "generator/re-estimator trade-off")
            ->check(CLI::Range(0.0, 1.0));
        sub->add_option("--delta", cfg.delta, "soft-logit adjustment")->check(delta_check);
        sub->add_option("--d-floor", cfg.d_floor, "clamp for re-estimated scores")
            ->check(open_unit("d-floor"));
        sub->add_flag("--ignore-values", cfg.ignore_values, "value-free structural match");
        sub->add_option("--scorer", cfg.scorer, "baseline | oracle | cmd:<command>");
    };

    auto* config = app.add_subcommand("config", "print the effective configuration");
    add_common(config, false);

    auto* lower = app.add_subcommand("lower", "translate SQL to SSQL");
    add_common(lower, true);
    lower->add_option("--db-id", cfg.db_id, "database id for single-query mode");
    lower->add_option("--corpus", cfg.corpus_path, "JSONL corpus for batch mode");
    lower->add_option("query", cfg.inline_text, "inline SQL (stdin when omitted)");

    auto* lift = app.add_subcommand("lift", "translate SSQL to SQL");
    add_common(lift, true);
    lift->add_option("--db-id", cfg.db_id, "database id for single-query mode");
    lift->add_option("--corpus", cfg.corpus_path, "JSONL corpus with ssql fields");
    lift->add_option("query", cfg.inline_text, "inline SSQL (stdin when omitted)");

    auto* roundtrip = app.add_subcommand("roundtrip", "lower->lift recovery report over a corpus");
    add_common(roundtrip, true);
    roundtrip->add_option("--corpus", cfg.corpus_path, "JSONL corpus")->required();
    roundtrip->add_option("--json", cfg.json_path, "write the report as JSON");

    auto* rerank = app.add_subcommand("rerank", "rerank beams by combined score");
    add_common(rerank, true);
    rerank->add_option("--beams", cfg.beams_path, "JSONL beam dump")->required();
    rerank->add_option("--json", cfg.json_path, "write the report as JSON");

    auto* label = app.add_subcommand("label", "emit soft-logit training targets");
    add_common(label, false);
    label->add_option("--beams", cfg.beams_path, "JSONL beam dump with correct labels")
        ->required();
    label->add_option("--out", cfg.out_path, "output file (stdout when omitted)");

    auto* steiner = app.add_subcommand("steiner", "recover the join plan for terminals");
    add_common(steiner, true);
    steiner->add_option("--db-id", cfg.db_id, "database id")->required();
    steiner->add_option("--terminals", cfg.terminals, "comma-separated tables or table.column")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (config->parsed()) return cmd_config(cfg);
        if (lower->parsed()) {
            if (cfg.corpus_path.empty() && cfg.db_id.empty()) {
                std::cerr << "error: --db-id is required in single-query mode\n";
                return 2;
            }
            return cmd_lower(cfg);
        }
        if (lift->parsed()) {
            if (cfg.corpus_path.empty() && cfg.db_id.empty()) {
                std::cerr << "error: --db-id is required in single-query mode\n";
                return 2;
            }
            return cmd_lift(cfg);
        }
        if (roundtrip->parsed()) return cmd_roundtrip(cfg);
        if (rerank->parsed()) return cmd_rerank(cfg);
        if (label->parsed()) return cmd_label(cfg);
        if (steiner->parsed()) return cmd_steiner(cfg);
    } catch (const ssql::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
