#pragma once

#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ssql/error.hpp"
#include "ssql/io.hpp"
#include "ssql/rerank.hpp"
#include "ssql/schema_graph.hpp"
#include "ssql/sql_parse.hpp"
#include "ssql/sql_print.hpp"
#include "ssql/transpile.hpp"

#include <nlohmann/json.hpp>

namespace ssql {

inline std::size_t token_count(const std::string& text) {
    std::size_t n = 0;
    bool in_tok = false;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n') {
            in_tok = false;
        } else if (!in_tok) {
            in_tok = true;
            ++n;
        }
    }
    return n;
}

/// QM-style structural equality: set semantics for SELECT items, FROM,
/// conjunct children and GROUP BY; order-sensitive for ORDER BY and LIMIT.
/// With ignore_values, condition literals collapse to a placeholder
/// (Spider-convention match); the default compares values too.
inline bool exact_set_match(const SqlQuery& predicted, const SqlQuery& gold,
                            bool ignore_values = false) {
    return render_set_key(*normalize_sql(predicted), ignore_values) ==
           render_set_key(*normalize_sql(gold), ignore_values);
}

enum class FailureReason { SelfJoin, NonMinimalJoin, Disconnected, Mismatch };

inline const char* failure_reason_name(FailureReason r) {
    switch (r) {
        case FailureReason::SelfJoin: return "self_join";
        case FailureReason::NonMinimalJoin: return "non_minimal_join";
        case FailureReason::Disconnected: return "disconnected";
        case FailureReason::Mismatch: return "mismatch";
    }
    return "";
}

struct RecoveryFailure {
    std::string id;
    FailureReason reason = FailureReason::Mismatch;
    std::string detail;
};

struct RecoveryReport {
    std::size_t total = 0;
    std::size_t recovered = 0;
    double recovery_rate = 0.0;
    std::vector<RecoveryFailure> failures;
    double avg_sql_tokens = 0.0;
    double avg_ssql_tokens = 0.0;
};

namespace detail {

/// Multiset of table ids over every block, for telling an extra or missing
/// joined table (non-minimal gold join) apart from other mismatches.
inline void collect_tables(const SqlQuery& q, std::vector<int>& out) {
    for (const auto& src : q.sources) {
        if (src.kind == TableSource::Kind::Table)
            out.push_back(src.table);
        else
            collect_tables(*src.sub, out);
    }
    std::function<void(const ExprPtr&)> walk_expr = [&](const ExprPtr& e) {
        if (!e) return;
        if (e->kind == Expr::Kind::Subquery) collect_tables(*e->sub, out);
        walk_expr(e->arg);
        walk_expr(e->lhs);
        walk_expr(e->rhs);
    };
    std::function<void(const CondPtr&)> walk_cond = [&](const CondPtr& c) {
        if (!c) return;
        walk_expr(c->lhs);
        walk_expr(c->rhs);
        walk_expr(c->rhs2);
        for (const auto& e : c->in_list) walk_expr(e);
        for (const auto& ch : c->children) walk_cond(ch);
    };
    for (const auto& e : q.select_items) walk_expr(e);
    walk_cond(q.where);
    walk_cond(q.having);
    for (const auto& it : q.order_by) walk_expr(it.expr);
    if (q.set_rhs) collect_tables(*q.set_rhs, out);
}

inline bool same_table_multiset(const SqlQuery& a, const SqlQuery& b) {
    std::vector<int> ta, tb;
    collect_tables(a, ta);
    collect_tables(b, tb);
    std::sort(ta.begin(), ta.end());
    std::sort(tb.begin(), tb.end());
    return ta == tb;
}

} // namespace detail

/// Lower -> lift -> exact match per corpus entry. Per-query errors become
/// categorized failures; the batch always completes. Token averages cover
/// the entries whose lowering succeeded. Matching compares values unless
/// ignore_values asks for Spider-parity comparison.
inline RecoveryReport roundtrip_report(const std::vector<CorpusEntry>& corpus,
                                       const SchemaSet& schemas, bool ignore_values = false) {
    RecoveryReport report;
    report.total = corpus.size();
    double sql_tokens = 0, ssql_tokens = 0;
    std::size_t measured = 0;
    std::unordered_map<std::string, SchemaGraph> graphs;

    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& entry = corpus[i];
        std::string id = std::to_string(i + 1);
        const Schema& schema = schemas.get(entry.db_id);
        auto fail = [&](FailureReason r, const std::string& detail) {
            report.failures.push_back({id, r, detail});
        };
        QueryPtr gold;
        try {
            gold = parse_sql(entry.sql, schema);
        } catch (const Error& e) {
            fail(FailureReason::Mismatch, e.what());
            continue;
        }
        SsqlQuery lowered;
        try {
            lowered = lower_to_ssql(*gold, schema);
        } catch (const Error& e) {
            fail(e.code() == ErrorCode::UnsupportedSelfJoin ? FailureReason::SelfJoin
                                                            : FailureReason::Mismatch,
                 e.what());
            continue;
        }
        sql_tokens += static_cast<double>(token_count(print_sql(*gold)));
        ssql_tokens += static_cast<double>(token_count(print_ssql(lowered)));
        ++measured;

        auto git = graphs.find(schema.db_id);
        if (git == graphs.end()) git = graphs.emplace(schema.db_id, build_graph(schema)).first;
        QueryPtr lifted;
        try {
            lifted = lift_to_sql(lowered, schema, git->second);
        } catch (const Error& e) {
            fail(e.code() == ErrorCode::DisconnectedTerminals ? FailureReason::Disconnected
                                                              : FailureReason::Mismatch,
                 e.what());
            continue;
        }
        if (exact_set_match(*lifted, *gold, ignore_values)) {
            ++report.recovered;
        } else if (!detail::same_table_multiset(*lifted, *gold)) {
            fail(FailureReason::NonMinimalJoin, "recovered join plan uses a different table set");
        } else {
            fail(FailureReason::Mismatch, "lifted query differs from the original");
        }
    }
    if (report.total > 0)
        report.recovery_rate =
            static_cast<double>(report.recovered) / static_cast<double>(report.total);
    if (measured > 0) {
        report.avg_sql_tokens = sql_tokens / static_cast<double>(measured);
        report.avg_ssql_tokens = ssql_tokens / static_cast<double>(measured);
    }
    return report;
}

struct RerankReport {
    std::size_t total = 0;
    std::size_t top1_by_g = 0;
    std::size_t top1_by_combined = 0;
    std::size_t top1_by_standalone = 0;
};

/// Correct-at-rank-1 counts for the three rankings over the same beams.
/// Every candidate needs its correct label.
inline RerankReport rerank_report(const std::vector<BeamSet>& beam_sets, const SchemaSet& schemas,
                                  const Scorer& scorer, const RerankConfig& cfg = {}) {
    RerankReport report;
    report.total = beam_sets.size();
    for (const auto& set : beam_sets) {
        for (const auto& c : set.candidates)
            if (!c.correct)
                throw Error(ErrorCode::MalformedBeamFile,
                            "candidate without a correct label in beam set '" + set.question +
                                "'");
        const Schema* schema = nullptr;
        try {
            schema = &schemas.get(set.db_id);
        } catch (const Error&) {
            schema = nullptr; // scorer falls back to the empty schema text
        }
        if (*set.candidates.front().correct) ++report.top1_by_g;
        BeamSet combined = rerank_beams(set, scorer, cfg, schema);
        if (*combined.candidates.front().correct) ++report.top1_by_combined;
        BeamSet standalone = standalone_rank(set, scorer, cfg, schema);
        if (*standalone.candidates.front().correct) ++report.top1_by_standalone;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report emission: line-oriented text plus a JSON mirror of the fields.

inline void print_report(const RecoveryReport& r, std::ostream& out) {
    out << "total " << r.total << "\n";
    out << "recovered " << r.recovered << "\n";
    out << "recovery_rate " << r.recovery_rate << "\n";
    out << "avg_sql_tokens " << r.avg_sql_tokens << "\n";
    out << "avg_ssql_tokens " << r.avg_ssql_tokens << "\n";
    for (const auto& f : r.failures)
        out << "failure " << f.id << " " << failure_reason_name(f.reason) << " " << f.detail
            << "\n";
}

inline nlohmann::json report_json(const RecoveryReport& r) {
    nlohmann::json j;
    j["total"] = r.total;
    j["recovered"] = r.recovered;
    j["recovery_rate"] = r.recovery_rate;
    j["avg_sql_tokens"] = r.avg_sql_tokens;
    j["avg_ssql_tokens"] = r.avg_ssql_tokens;
    j["failures"] = nlohmann::json::array();
    for (const auto& f : r.failures)
        j["failures"].push_back({{"id", f.id},
                                 {"reason", failure_reason_name(f.reason)},
                                 {"detail", f.detail}});
    return j;
}

inline void print_report(const RerankReport& r, std::ostream& out) {
    out << "total " << r.total << "\n";
    out << "top1_by_g " << r.top1_by_g << "\n";
    out << "top1_by_combined " << r.top1_by_combined << "\n";
    out << "top1_by_standalone " << r.top1_by_standalone << "\n";
}

inline nlohmann::json report_json(const RerankReport& r) {
    return nlohmann::json{{"total", r.total},
                          {"top1_by_g", r.top1_by_g},
                          {"top1_by_combined", r.top1_by_combined},
                          {"top1_by_standalone", r.top1_by_standalone}};
}

} // namespace ssql
