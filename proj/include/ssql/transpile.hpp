#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "ssql/error.hpp"
#include "ssql/schema.hpp"
#include "ssql/schema_graph.hpp"
#include "ssql/sql_ast.hpp"
#include "ssql/sql_parse.hpp"
#include "ssql/sql_print.hpp"

namespace ssql {

/// SQL with the schema glue removed: FROM is a plain table list in schema
/// order, every column reference is a fused table.column token, and there
/// are no joins, ON conditions or aliases anywhere.
struct SsqlQuery {
    QueryPtr node;
};

namespace detail {

/// Walks every column reference whose binding frame is the block the walk
/// started from. `rel` tracks resolution distance: a reference with
/// depth == rel binds to the start block. `in_on` marks references living
/// inside the start block's own ON conditions.
class RefWalk {
public:
    using Fn = std::function<void(ColumnRef&, bool in_on)>;

    static void run(SqlQuery& block, const Fn& fn) { RefWalk(fn).block_refs(block, 0); }

private:
    explicit RefWalk(const Fn& fn) : fn_(fn) {}
    const Fn& fn_;

    void block_refs(SqlQuery& q, int rel) {
        for (auto& e : q.select_items) expr(e, rel, false);
        for (auto& jc : q.join_conds) cond(jc, rel, rel == 0);
        cond(q.where, rel, false);
        for (auto& r : q.group_by) ref(r, rel, false);
        cond(q.having, rel, false);
        for (auto& it : q.order_by) expr(it.expr, rel, false);
        // Derived tables and set-op branches resolve against the enclosing
        // scope, not this block; they can only reach the start block when
        // nested deeper.
        if (rel > 0) {
            for (auto& src : q.sources)
                if (src.sub) block_refs(*src.sub, rel);
            if (q.set_rhs) block_refs(*q.set_rhs, rel);
        }
    }

    void ref(ColumnRef& r, int rel, bool in_on) {
        if (r.depth == rel) fn_(r, in_on);
    }

    void expr(ExprPtr& e, int rel, bool in_on) {
        if (!e) return;
        switch (e->kind) {
            case Expr::Kind::Column: ref(e->col, rel, in_on); break;
            case Expr::Kind::Agg: expr(e->arg, rel, in_on); break;
            case Expr::Kind::Arith:
                expr(e->lhs, rel, in_on);
                expr(e->rhs, rel, in_on);
                break;
            case Expr::Kind::Subquery: block_refs(*e->sub, rel + 1); break;
            default: break;
        }
    }

    void cond(CondPtr& c, int rel, bool in_on) {
        if (!c) return;
        if (c->kind == Condition::Kind::Cmp) {
            expr(c->lhs, rel, in_on);
            expr(c->rhs, rel, in_on);
            expr(c->rhs2, rel, in_on);
            for (auto& e : c->in_list) expr(e, rel, in_on);
            return;
        }
        for (auto& ch : c->children) cond(ch, rel, in_on);
    }
};

inline void lower_block(SqlQuery& q, const Schema& schema);

inline void lower_children(SqlQuery& q, const Schema& schema) {
    std::function<void(ExprPtr&)> expr_sub = [&](ExprPtr& e) {
        if (!e) return;
        if (e->kind == Expr::Kind::Subquery) lower_block(*e->sub, schema);
        expr_sub(e->arg);
        expr_sub(e->lhs);
        expr_sub(e->rhs);
    };
    std::function<void(CondPtr&)> cond_sub = [&](CondPtr& c) {
        if (!c) return;
        expr_sub(c->lhs);
        expr_sub(c->rhs);
        expr_sub(c->rhs2);
        for (auto& e : c->in_list) expr_sub(e);
        for (auto& ch : c->children) cond_sub(ch);
    };
    for (auto& e : q.select_items) expr_sub(e);
    cond_sub(q.where);
    cond_sub(q.having);
    for (auto& it : q.order_by) expr_sub(it.expr);
    if (q.set_rhs) lower_block(*q.set_rhs, schema);
}

/// Rewrites one block in place: drops join steps and ON conditions, fuses
/// references, reduces FROM to the mentioned tables in schema order.
inline void lower_block(SqlQuery& q, const Schema& schema) {
    for (const auto& src : q.sources)
        if (src.kind == TableSource::Kind::Subquery)
            throw Error(ErrorCode::UnresolvedReference,
                        "FROM subqueries have no fused-table form");
    for (std::size_t i = 0; i < q.sources.size(); ++i)
        for (std::size_t j = i + 1; j < q.sources.size(); ++j)
            if (q.sources[i].table == q.sources[j].table)
                throw Error(ErrorCode::UnsupportedSelfJoin,
                            "table '" + q.sources[i].table_name +
                                "' appears under two aliases");

    // Mention rule: a table stays when some reference outside the ON
    // conditions uses it, or when nothing references it at all (a bare
    // "from t"); connector-only tables vanish.
    std::vector<int> outside(q.sources.size(), 0), inside(q.sources.size(), 0);
    RefWalk::run(q, [&](ColumnRef& r, bool in_on) {
        if (r.source < 0 || r.source >= static_cast<int>(q.sources.size())) return;
        (in_on ? inside : outside)[static_cast<std::size_t>(r.source)]++;
    });
    std::vector<int> kept; // old slots
    for (std::size_t k = 0; k < q.sources.size(); ++k)
        if (outside[k] > 0 || inside[k] == 0) kept.push_back(static_cast<int>(k));
    if (kept.empty()) kept.push_back(0); // every table was connector-only
    std::sort(kept.begin(), kept.end(), [&](int a, int b) {
        return q.sources[static_cast<std::size_t>(a)].table <
               q.sources[static_cast<std::size_t>(b)].table;
    });
    std::vector<int> slot_map(q.sources.size(), -1);
    for (std::size_t n = 0; n < kept.size(); ++n)
        slot_map[static_cast<std::size_t>(kept[n])] = static_cast<int>(n);

    RefWalk::run(q, [&](ColumnRef& r, bool in_on) {
        if (in_on) return; // dropped with the join steps
        r.source = slot_map[static_cast<std::size_t>(r.source)];
        r.raw_qualifier = schema.table_name(r.table);
        r.raw_name = schema.column_name(r.column);
    });

    std::vector<TableSource> sources;
    sources.reserve(kept.size());
    for (int k : kept) {
        TableSource src = q.sources[static_cast<std::size_t>(k)];
        src.alias.clear();
        sources.push_back(std::move(src));
    }
    q.sources = std::move(sources);
    q.join_conds.clear();

    lower_children(q, schema);
}

} // namespace detail

/// Lowers standard SQL to SSQL: schema-information elimination. Fails on
/// self-joins (the fused form cannot tell the two roles apart).
inline SsqlQuery lower_to_ssql(const SqlQuery& sql, const Schema& schema) {
    QueryPtr node = clone_query(sql);
    detail::lower_block(*node, schema);
    return SsqlQuery{std::move(node)};
}

namespace detail {

inline void lift_block(SqlQuery& q, const Schema& schema, const SchemaGraph& graph);

inline void lift_children(SqlQuery& q, const Schema& schema, const SchemaGraph& graph) {
    std::function<void(ExprPtr&)> expr_sub = [&](ExprPtr& e) {
        if (!e) return;
        if (e->kind == Expr::Kind::Subquery) lift_block(*e->sub, schema, graph);
        expr_sub(e->arg);
        expr_sub(e->lhs);
        expr_sub(e->rhs);
    };
    std::function<void(CondPtr&)> cond_sub = [&](CondPtr& c) {
        if (!c) return;
        expr_sub(c->lhs);
        expr_sub(c->rhs);
        expr_sub(c->rhs2);
        for (auto& e : c->in_list) expr_sub(e);
        for (auto& ch : c->children) cond_sub(ch);
    };
    for (auto& e : q.select_items) expr_sub(e);
    cond_sub(q.where);
    cond_sub(q.having);
    for (auto& it : q.order_by) expr_sub(it.expr);
    if (q.set_rhs) lift_block(*q.set_rhs, schema, graph);
}

inline ColumnRef make_ref(const Schema& schema, int source, int column) {
    ColumnRef r;
    r.source = source;
    r.table = schema.column_table(column);
    r.column = column;
    r.raw_qualifier = schema.table_name(r.table);
    r.raw_name = schema.column_name(column);
    return r;
}

/// Reconstructs one block's FROM clause: terminals are the listed tables
/// plus every fused column of the block; the Steiner tree over the schema
/// graph becomes JOIN steps with canonical aliases.
inline void lift_block(SqlQuery& q, const Schema& schema, const SchemaGraph& graph) {
    std::vector<int> terminals;
    for (const auto& src : q.sources) terminals.push_back(graph.table_node(src.table));
    RefWalk::run(q, [&](ColumnRef& r, bool) { terminals.push_back(graph.column_node(r.column)); });
    int root = q.sources.empty() ? -1 : q.sources.front().table;

    auto tree = steiner_tree(graph, terminals);
    JoinPlan plan = join_plan_from_tree(tree, graph, root);
    if (plan.tables.empty() && root >= 0) plan.tables.push_back(root);

    std::vector<int> table_slot(schema.tables.size(), -1);
    for (std::size_t n = 0; n < plan.tables.size(); ++n)
        table_slot[static_cast<std::size_t>(plan.tables[n])] = static_cast<int>(n);

    RefWalk::run(q, [&](ColumnRef& r, bool) {
        int slot = table_slot[static_cast<std::size_t>(r.table)];
        if (slot < 0)
            throw Error(ErrorCode::UnresolvedReference,
                        "reference to '" + schema.qualified_column(r.column) +
                            "' outside the recovered join plan");
        r.source = slot;
        r.raw_name = schema.column_name(r.column);
        r.raw_qualifier = schema.table_name(r.table);
    });

    std::vector<TableSource> sources;
    for (int t : plan.tables) {
        TableSource src;
        src.kind = TableSource::Kind::Table;
        src.table = t;
        src.table_name = schema.table_name(t);
        sources.push_back(std::move(src));
    }
    q.sources = std::move(sources);

    q.join_conds.clear();
    std::vector<CondPtr> extras;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const auto& [left, right] = plan.steps[i];
        auto cond = ast::compare(
            CmpOp::Eq,
            ast::column(make_ref(schema, table_slot[static_cast<std::size_t>(schema.column_table(left))], left)),
            ast::column(make_ref(schema, table_slot[static_cast<std::size_t>(schema.column_table(right))], right)));
        if (i + 1 < q.sources.size())
            q.join_conds.push_back(std::move(cond));
        else
            extras.push_back(std::move(cond)); // same-table or redundant pair
    }
    if (!extras.empty()) {
        if (q.where) extras.push_back(q.where);
        q.where = extras.size() == 1 ? extras[0]
                                     : ast::junction(Condition::Kind::And, std::move(extras));
    }

    lift_children(q, schema, graph);
}

} // namespace detail

/// Lifts SSQL back to standard SQL by solving the join-recovery problem per
/// query block.
inline QueryPtr lift_to_sql(const SsqlQuery& ssql, const Schema& schema,
                            const SchemaGraph& graph) {
    QueryPtr node = clone_query(*ssql.node);
    detail::lift_block(*node, schema, graph);
    return node;
}

inline QueryPtr lift_to_sql(const SsqlQuery& ssql, const Schema& schema) {
    SchemaGraph graph = build_graph(schema);
    return lift_to_sql(ssql, schema, graph);
}

/// Parses SSQL text. Grammar is the SQL grammar with JOIN/ON and alias
/// productions removed; unknown tables or fused pairs raise
/// UnknownFusedToken.
inline SsqlQuery parse_ssql(const std::string& text, const Schema& schema) {
    try {
        detail::SqlParser parser(text, schema, detail::Dialect::Ssql);
        QueryPtr q = parser.parse();
        detail::Resolver resolver(schema);
        resolver.resolve(*q);
        return SsqlQuery{std::move(q)};
    } catch (const Error& e) {
        if (e.code() == ErrorCode::UnknownTable || e.code() == ErrorCode::UnknownColumn)
            throw Error(ErrorCode::UnknownFusedToken, e.what(), e.position());
        throw;
    }
}

/// Canonical SSQL text: lowercase, FROM tables in schema order, fused
/// column tokens.
inline std::string print_ssql(const SsqlQuery& ssql) {
    detail::SqlPrinter p(detail::PrintStyle::Ssql);
    return p.print(*ssql.node);
}

} // namespace ssql
