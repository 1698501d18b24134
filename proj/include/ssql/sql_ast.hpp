#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ssql/schema.hpp"

namespace ssql {

enum class AggFn { Count, Sum, Avg, Min, Max };
enum class ArithOp { Add, Sub, Mul, Div };
enum class CmpOp { Eq, Ne, Lt, Gt, Le, Ge, Between, Like, NotLike, In, NotIn };
enum class SetOp { None, Intersect, Union, Except };

inline const char* agg_fn_name(AggFn f) {
    switch (f) {
        case AggFn::Count: return "count";
        case AggFn::Sum: return "sum";
        case AggFn::Avg: return "avg";
        case AggFn::Min: return "min";
        case AggFn::Max: return "max";
    }
    return "";
}

inline char arith_op_char(ArithOp o) {
    switch (o) {
        case ArithOp::Add: return '+';
        case ArithOp::Sub: return '-';
        case ArithOp::Mul: return '*';
        case ArithOp::Div: return '/';
    }
    return '?';
}

inline const char* cmp_op_text(CmpOp o) {
    switch (o) {
        case CmpOp::Eq: return "=";
        case CmpOp::Ne: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Gt: return ">";
        case CmpOp::Le: return "<=";
        case CmpOp::Ge: return ">=";
        case CmpOp::Between: return "between";
        case CmpOp::Like: return "like";
        case CmpOp::NotLike: return "not like";
        case CmpOp::In: return "in";
        case CmpOp::NotIn: return "not in";
    }
    return "";
}

struct SqlQuery;
using QueryPtr = std::shared_ptr<SqlQuery>;

/// A resolved column reference. `source` indexes the FROM sources of the
/// owning query block; `depth` counts enclosing blocks outward for
/// correlated references (0 = own block). `table`/`column` are schema ids.
struct ColumnRef {
    int depth = 0;
    int source = -1;
    int table = -1;
    int column = -1;
    // As written, kept for error reporting.
    std::string raw_qualifier;
    std::string raw_name;
};

struct Literal {
    enum class Kind { Number, String } kind = Kind::Number;
    std::string text; // verbatim; for strings, without the quotes
};

struct Expr {
    enum class Kind { Star, Column, Lit, Agg, Arith, Subquery };
    Kind kind = Kind::Star;

    ColumnRef col;             // Column
    Literal lit;               // Lit
    AggFn fn = AggFn::Count;   // Agg
    bool agg_distinct = false;
    std::shared_ptr<Expr> arg; // Agg argument
    ArithOp op = ArithOp::Add; // Arith
    std::shared_ptr<Expr> lhs, rhs;
    QueryPtr sub;              // Subquery
};
using ExprPtr = std::shared_ptr<Expr>;

/// Leaf comparison or an n-ary and/or node. `rhs2` is the upper bound of
/// BETWEEN; `in_list` holds literal lists of IN when no subquery is used.
struct Condition {
    enum class Kind { Cmp, And, Or };
    Kind kind = Kind::Cmp;

    CmpOp op = CmpOp::Eq;
    ExprPtr lhs, rhs, rhs2;
    std::vector<ExprPtr> in_list;
    std::vector<std::shared_ptr<Condition>> children;
};
using CondPtr = std::shared_ptr<Condition>;

struct TableSource {
    enum class Kind { Table, Subquery } kind = Kind::Table;
    int table = -1;
    std::string table_name; // schema casing
    QueryPtr sub;
    std::string alias; // as written; canonical printing reassigns
};

struct OrderItem {
    ExprPtr expr;
    bool asc = true;
};

/// One SELECT block plus an optional set operation tail. JOIN steps are
/// implicit: join_conds[i] is the ON condition attaching sources[i + 1].
/// An SSQL block is the same node with an empty join_conds list.
struct SqlQuery {
    bool distinct = false;
    std::vector<ExprPtr> select_items;
    std::vector<TableSource> sources;
    std::vector<CondPtr> join_conds;
    CondPtr where;
    std::vector<ColumnRef> group_by;
    CondPtr having;
    std::vector<OrderItem> order_by;
    std::optional<long long> limit;
    SetOp set_op = SetOp::None;
    QueryPtr set_rhs;
};

namespace ast {

inline ExprPtr star() {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Star;
    return e;
}

inline ExprPtr column(ColumnRef ref) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Column;
    e->col = std::move(ref);
    return e;
}

inline ExprPtr literal(Literal::Kind kind, std::string text) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Lit;
    e->lit = {kind, std::move(text)};
    return e;
}

inline ExprPtr aggregate(AggFn fn, ExprPtr arg, bool distinct = false) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Agg;
    e->fn = fn;
    e->agg_distinct = distinct;
    e->arg = std::move(arg);
    return e;
}

inline ExprPtr arith(ArithOp op, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Arith;
    e->op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
}

inline ExprPtr subquery(QueryPtr q) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Subquery;
    e->sub = std::move(q);
    return e;
}

inline CondPtr compare(CmpOp op, ExprPtr lhs, ExprPtr rhs, ExprPtr rhs2 = nullptr) {
    auto c = std::make_shared<Condition>();
    c->kind = Condition::Kind::Cmp;
    c->op = op;
    c->lhs = std::move(lhs);
    c->rhs = std::move(rhs);
    c->rhs2 = std::move(rhs2);
    return c;
}

inline CondPtr junction(Condition::Kind kind, std::vector<CondPtr> children) {
    auto c = std::make_shared<Condition>();
    c->kind = kind;
    c->children = std::move(children);
    return c;
}

} // namespace ast
} // namespace ssql
