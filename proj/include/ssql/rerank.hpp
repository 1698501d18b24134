#pragma once

#include <algorithm>
#include <cmath>
#include <cctype>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "ssql/error.hpp"
#include "ssql/schema.hpp"
#include "ssql/sql_parse.hpp"

#include <cstdio>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace ssql {

/// Mixing weight between generator score and re-estimated score, plus the
/// clamp that keeps the log domain finite.
struct RerankConfig {
    double alpha = 0.7;
    double d_floor = 1e-6;
};

struct LabelConfig {
    double delta = 0.7; // must stay in (0.5, 1) so correct beats wrong
};

struct BeamCandidate {
    std::string sql_text;
    double g = 1.0;                  // generator probability, in (0, 1]
    std::optional<double> d;         // re-estimated score, clamped
    std::optional<double> s_combined;
    std::optional<bool> correct;
};

/// Candidates arrive ordered by descending generator score; rank 1 first.
struct BeamSet {
    std::string question;
    std::string db_id;
    std::vector<BeamCandidate> candidates;
};

struct TrainingTarget {
    std::string question;
    std::string sql_text;
    std::string filtered_schema_text;
    double target = 0;
};

using Scorer = std::function<double(const std::string& question, const std::string& sql_text,
                                    const std::string& filtered_schema_text)>;

namespace detail {

inline void validate_rerank_config(const RerankConfig& cfg) {
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0))
        throw Error(ErrorCode::InvalidScore, "alpha must be in [0, 1]");
    if (!(cfg.d_floor > 0.0 && cfg.d_floor < 1.0))
        throw Error(ErrorCode::InvalidScore, "d_floor must be in (0, 1)");
}

inline void validate_label_config(const LabelConfig& cfg) {
    if (!(cfg.delta > 0.5 && cfg.delta < 1.0))
        throw Error(ErrorCode::InvalidScore, "delta must be in (0.5, 1)");
}

} // namespace detail

/// S = alpha * ln g + (1 - alpha) * ln d, with d clamped to [d_floor, 1].
/// Natural log; alpha = 1 returns ln g exactly.
inline double combine_score(double g, double d, const RerankConfig& cfg = {}) {
    detail::validate_rerank_config(cfg);
    if (!(g > 0.0 && g <= 1.0))
        throw Error(ErrorCode::InvalidScore, "generator score must be in (0, 1]");
    d = std::min(std::max(d, cfg.d_floor), 1.0);
    return cfg.alpha * std::log(g) + (1.0 - cfg.alpha) * std::log(d);
}

/// Serialized scorer input text for tables and columns actually used by the
/// query: "table1 : colA , colB | table2 : colC", in schema order.
inline std::string filter_schema(const SqlQuery& sql, const Schema& schema) {
    std::vector<char> table_used(schema.tables.size(), 0);
    std::vector<char> column_used(schema.columns.size(), 0);

    std::function<void(const SqlQuery&)> walk_query;
    std::function<void(const ExprPtr&)> walk_expr;
    std::function<void(const CondPtr&)> walk_cond;

    auto mark_ref = [&](const ColumnRef& r) {
        if (r.table < 0 || r.column < 0)
            throw Error(ErrorCode::UnresolvedReference, "unresolved column reference");
        table_used[static_cast<std::size_t>(r.table)] = 1;
        column_used[static_cast<std::size_t>(r.column)] = 1;
    };
    walk_expr = [&](const ExprPtr& e) {
        if (!e) return;
        switch (e->kind) {
            case Expr::Kind::Column: mark_ref(e->col); break;
            case Expr::Kind::Agg: walk_expr(e->arg); break;
            case Expr::Kind::Arith:
                walk_expr(e->lhs);
                walk_expr(e->rhs);
                break;
            case Expr::Kind::Subquery: walk_query(*e->sub); break;
            default: break;
        }
    };
    walk_cond = [&](const CondPtr& c) {
        if (!c) return;
        if (c->kind == Condition::Kind::Cmp) {
            walk_expr(c->lhs);
            walk_expr(c->rhs);
            walk_expr(c->rhs2);
            for (const auto& e : c->in_list) walk_expr(e);
            return;
        }
        for (const auto& ch : c->children) walk_cond(ch);
    };
    walk_query = [&](const SqlQuery& q) {
        for (const auto& src : q.sources) {
            if (src.kind == TableSource::Kind::Table)
                table_used[static_cast<std::size_t>(src.table)] = 1;
            else
                walk_query(*src.sub);
        }
        for (const auto& e : q.select_items) walk_expr(e);
        for (const auto& jc : q.join_conds) walk_cond(jc);
        walk_cond(q.where);
        for (const auto& r : q.group_by) mark_ref(r);
        walk_cond(q.having);
        for (const auto& it : q.order_by) walk_expr(it.expr);
        if (q.set_rhs) walk_query(*q.set_rhs);
    };
    walk_query(sql);

    std::string out;
    for (std::size_t t = 0; t < schema.tables.size(); ++t) {
        if (!table_used[t]) continue;
        if (!out.empty()) out += " | ";
        out += schema.tables[t].name + " :";
        bool first = true;
        for (int cid : schema.tables[t].columns) {
            if (!column_used[static_cast<std::size_t>(cid)]) continue;
            out += first ? " " : " , ";
            out += schema.columns[static_cast<std::size_t>(cid)].name;
            first = false;
        }
    }
    return out;
}

namespace detail {

inline std::string strip_plural(const std::string& w) {
    if (w.size() > 3 && w.ends_with("es")) return w.substr(0, w.size() - 2);
    if (w.size() > 3 && w.ends_with("s")) return w.substr(0, w.size() - 1);
    return w;
}

inline std::unordered_set<std::string> question_words(const std::string& question) {
    std::unordered_set<std::string> words;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        words.insert(cur);
        words.insert(strip_plural(cur));
        cur.clear();
    };
    for (char c : question) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else
            flush();
    }
    flush();
    return words;
}

} // namespace detail

/// Deterministic stand-in for a trained discriminator: the fraction of
/// schema terms (tables and columns from the filtered schema text) whose
/// underscore-separated parts all appear in the question, case-insensitive
/// and with plural stemming. An empty schema text marks an unparseable
/// candidate and floors the score.
inline double baseline_scorer(const std::string& question, const std::string& /*sql_text*/,
                              const std::string& filtered_schema_text, double floor = 1e-6) {
    if (filtered_schema_text.empty() || question.empty()) return floor;
    auto words = detail::question_words(question);

    int terms = 0, matched = 0;
    std::string term;
    auto eval_term = [&] {
        if (term.empty()) return;
        ++terms;
        bool all = true;
        std::string part;
        auto check = [&] {
            if (part.empty()) return;
            std::string p = to_lower(part);
            if (!words.count(p) && !words.count(detail::strip_plural(p))) all = false;
            part.clear();
        };
        for (char c : term) {
            if (c == '_') check();
            else part.push_back(c);
        }
        check();
        if (all) ++matched;
        term.clear();
    };
    // Terms are the names between the ':'/','/'|' punctuation.
    for (char c : filtered_schema_text) {
        if (c == ':' || c == ',' || c == '|' || c == ' ') eval_term();
        else term.push_back(c);
    }
    eval_term();
    if (terms == 0) return 1.0;
    double score = static_cast<double>(matched) / static_cast<double>(terms);
    return score <= floor ? floor : score;
}

namespace detail {

inline double run_scorer(const Scorer& scorer, const std::string& question,
                         const std::string& sql, const std::string& schema_text,
                         const RerankConfig& cfg) {
    double raw;
    try {
        raw = scorer(question, sql, schema_text);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ScorerFailure, e.what());
    }
    if (!(raw > 0.0 && raw <= 1.0))
        throw Error(ErrorCode::ScorerFailure,
                    "scorer returned " + std::to_string(raw) + ", outside (0, 1]");
    return std::min(std::max(raw, cfg.d_floor), 1.0);
}

inline std::string candidate_schema_text(const std::string& sql_text, const Schema* schema) {
    if (!schema) return "";
    try {
        return filter_schema(*parse_sql(sql_text, *schema), *schema);
    } catch (const Error&) {
        return ""; // unparseable candidate: scorer sees the empty sentinel
    }
}

inline void score_candidates(BeamSet& out, const Scorer& scorer, const RerankConfig& cfg,
                             const Schema* schema) {
    validate_rerank_config(cfg);
    if (out.candidates.empty())
        throw Error(ErrorCode::MalformedBeamFile, "beam set has no candidates");
    for (auto& c : out.candidates) {
        if (!(c.g > 0.0 && c.g <= 1.0))
            throw Error(ErrorCode::InvalidScore, "generator score must be in (0, 1]");
        std::string schema_text = candidate_schema_text(c.sql_text, schema);
        c.d = run_scorer(scorer, out.question, c.sql_text, schema_text, cfg);
        c.s_combined = combine_score(c.g, *c.d, cfg);
    }
}

} // namespace detail

/// Scores every candidate and reorders by descending combined score.
/// Ties keep the original generator rank (stable sort).
inline BeamSet rerank_beams(const BeamSet& beams, const Scorer& scorer,
                            const RerankConfig& cfg = {}, const Schema* schema = nullptr) {
    BeamSet out = beams;
    detail::score_candidates(out, scorer, cfg, schema);
    std::stable_sort(out.candidates.begin(), out.candidates.end(),
                     [](const BeamCandidate& a, const BeamCandidate& b) {
                         return *a.s_combined > *b.s_combined;
                     });
    return out;
}

/// Ablation comparator: ranking by the re-estimated score alone.
inline BeamSet standalone_rank(const BeamSet& beams, const Scorer& scorer,
                               const RerankConfig& cfg = {}, const Schema* schema = nullptr) {
    BeamSet out = beams;
    detail::score_candidates(out, scorer, cfg, schema);
    std::stable_sort(out.candidates.begin(), out.candidates.end(),
                     [](const BeamCandidate& a, const BeamCandidate& b) { return *a.d > *b.d; });
    return out;
}

/// Supervision targets for re-estimator training. The generator's top beam
/// gets delta when correct and 1 - delta when wrong; lower-ranked beams get
/// 1 when correct and 1 - delta when wrong.
inline std::vector<TrainingTarget> assign_soft_logits(const BeamSet& beams,
                                                      const LabelConfig& cfg = {},
                                                      const Schema* schema = nullptr) {
    detail::validate_label_config(cfg);
    std::vector<TrainingTarget> out;
    out.reserve(beams.candidates.size());
    for (std::size_t rank = 0; rank < beams.candidates.size(); ++rank) {
        const auto& c = beams.candidates[rank];
        if (!c.correct)
            throw Error(ErrorCode::MissingLabel,
                        "candidate '" + c.sql_text + "' has no correct label");
        double target;
        if (rank == 0)
            target = *c.correct ? cfg.delta : 1.0 - cfg.delta;
        else
            target = *c.correct ? 1.0 : 1.0 - cfg.delta;
        out.push_back({beams.question, c.sql_text,
                       detail::candidate_schema_text(c.sql_text, schema), target});
    }
    return out;
}

/// Line-delimited subprocess scorer: one serialized request per line on the
/// child's stdin, one decimal score in (0, 1] per line on its stdout.
/// Calls are serialized; declare-serial is the protocol's concurrency mode.
class ExternalScorer {
public:
    explicit ExternalScorer(const std::string& command) {
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw Error(ErrorCode::ScorerFailure, "cannot create scorer pipes");
        pid_ = fork();
        if (pid_ < 0) throw Error(ErrorCode::ScorerFailure, "cannot fork scorer process");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        in_ = fdopen(to_child[1], "w");
        out_ = fdopen(from_child[0], "r");
        if (!in_ || !out_) throw Error(ErrorCode::ScorerFailure, "cannot open scorer streams");
    }

    ExternalScorer(const ExternalScorer&) = delete;
    ExternalScorer& operator=(const ExternalScorer&) = delete;

    ~ExternalScorer() {
        if (in_) fclose(in_);
        if (out_) fclose(out_);
        if (pid_ > 0) waitpid(pid_, nullptr, 0);
    }

    double operator()(const std::string& question, const std::string& sql,
                      const std::string& schema_text) {
        std::lock_guard<std::mutex> lock(mu_);
        std::string line = sanitize(question) + " ||| " + sanitize(sql) + " ||| " +
                           sanitize(schema_text) + "\n";
        if (fputs(line.c_str(), in_) == EOF || fflush(in_) != 0)
            throw Error(ErrorCode::ScorerFailure, "scorer process closed its input");
        char buf[256];
        if (!fgets(buf, sizeof buf, out_))
            throw Error(ErrorCode::ScorerFailure, "scorer process produced no response");
        char* end = nullptr;
        double value = std::strtod(buf, &end);
        if (end == buf)
            throw Error(ErrorCode::ScorerFailure,
                        "scorer response '" + std::string(buf) + "' is not a number");
        return value;
    }

private:
    static std::string sanitize(const std::string& s) {
        std::string out = s;
        for (char& c : out)
            if (c == '\n' || c == '\r') c = ' ';
        return out;
    }

    pid_t pid_ = -1;
    FILE* in_ = nullptr;
    FILE* out_ = nullptr;
    std::mutex mu_;
};

} // namespace ssql
