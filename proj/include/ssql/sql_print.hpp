#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "ssql/sql_ast.hpp"

namespace ssql {

QueryPtr clone_query(const SqlQuery& q);

namespace detail {

inline ExprPtr clone_expr(const ExprPtr& e) {
    if (!e) return nullptr;
    auto out = std::make_shared<Expr>(*e);
    out->arg = clone_expr(e->arg);
    out->lhs = clone_expr(e->lhs);
    out->rhs = clone_expr(e->rhs);
    if (e->sub) out->sub = clone_query(*e->sub);
    return out;
}

inline CondPtr clone_cond(const CondPtr& c) {
    if (!c) return nullptr;
    auto out = std::make_shared<Condition>(*c);
    out->lhs = clone_expr(c->lhs);
    out->rhs = clone_expr(c->rhs);
    out->rhs2 = clone_expr(c->rhs2);
    out->in_list.clear();
    for (const auto& e : c->in_list) out->in_list.push_back(clone_expr(e));
    out->children.clear();
    for (const auto& ch : c->children) out->children.push_back(clone_cond(ch));
    return out;
}

// ---------------------------------------------------------------------------
// Rendering: compact alias-free keys used for structural comparison, set
// comparison (QM) and normalization sort order. Column references render by
// schema id, so keys line up only for ASTs resolved against the same schema.

struct RenderOpts {
    bool sets_sorted = false;  // sort commutative components
    bool ignore_values = false;
    bool with_source = false;  // include FROM source slots (structural only)
};

std::string render_query(const SqlQuery& q, const RenderOpts& o);

inline std::string render_ref(const ColumnRef& r, const RenderOpts& o) {
    std::string s;
    if (o.with_source) s += "s" + std::to_string(r.source) + ".";
    if (r.depth > 0) s += "d" + std::to_string(r.depth) + ".";
    s += "c" + std::to_string(r.column);
    return s;
}

inline std::string render_expr(const ExprPtr& e, const RenderOpts& o) {
    if (!e) return "";
    switch (e->kind) {
        case Expr::Kind::Star: return "*";
        case Expr::Kind::Column: return render_ref(e->col, o);
        case Expr::Kind::Lit:
            if (o.ignore_values) return "val";
            return (e->lit.kind == Literal::Kind::Number ? "n:" : "s:") + e->lit.text;
        case Expr::Kind::Agg:
            return std::string(agg_fn_name(e->fn)) + (e->agg_distinct ? "!d" : "") + "(" +
                   render_expr(e->arg, o) + ")";
        case Expr::Kind::Arith:
            return "(" + render_expr(e->lhs, o) + arith_op_char(e->op) + render_expr(e->rhs, o) + ")";
        case Expr::Kind::Subquery: return "q(" + render_query(*e->sub, o) + ")";
    }
    return "";
}

inline std::string render_cond(const CondPtr& c, const RenderOpts& o) {
    if (!c) return "";
    if (c->kind == Condition::Kind::Cmp) {
        std::string l = render_expr(c->lhs, o), r = render_expr(c->rhs, o);
        if (o.sets_sorted && (c->op == CmpOp::Eq || c->op == CmpOp::Ne) && r < l) std::swap(l, r);
        std::string s = std::string(cmp_op_text(c->op)) + "[" + l + "," + r;
        if (c->rhs2) s += "," + render_expr(c->rhs2, o);
        for (const auto& e : c->in_list) s += ";" + render_expr(e, o);
        return s + "]";
    }
    std::vector<std::string> parts;
    parts.reserve(c->children.size());
    for (const auto& ch : c->children) parts.push_back(render_cond(ch, o));
    if (o.sets_sorted) std::sort(parts.begin(), parts.end());
    std::string s = c->kind == Condition::Kind::And ? "and{" : "or{";
    for (const auto& p : parts) s += p + "|";
    return s + "}";
}

/// Flattens a condition into its top-level conjuncts.
inline void collect_conjuncts(const CondPtr& c, std::vector<CondPtr>& out) {
    if (!c) return;
    if (c->kind == Condition::Kind::And)
        for (const auto& ch : c->children) collect_conjuncts(ch, out);
    else
        out.push_back(c);
}

/// Clause-level condition key. In sorted mode the top-level conjunct chain
/// is flattened so nested AND groupings compare by their conjunct set.
inline std::string render_cond_root(const CondPtr& c, const RenderOpts& o) {
    if (!c || !o.sets_sorted) return render_cond(c, o);
    std::vector<CondPtr> conjuncts;
    collect_conjuncts(c, conjuncts);
    if (conjuncts.size() <= 1) return render_cond(c, o);
    std::vector<std::string> keys;
    keys.reserve(conjuncts.size());
    for (const auto& cc : conjuncts) keys.push_back(render_cond(cc, o));
    std::sort(keys.begin(), keys.end());
    std::string s = "and{";
    for (const auto& k : keys) s += k + "|";
    return s + "}";
}

inline std::string render_query(const SqlQuery& q, const RenderOpts& o) {
    std::ostringstream s;
    s << "sel" << (q.distinct ? "!d" : "") << "[";
    {
        std::vector<std::string> items;
        items.reserve(q.select_items.size());
        for (const auto& e : q.select_items) items.push_back(render_expr(e, o));
        if (o.sets_sorted) std::sort(items.begin(), items.end());
        for (const auto& i : items) s << i << "|";
    }
    s << "]frm[";
    {
        std::vector<std::string> srcs;
        for (const auto& src : q.sources)
            srcs.push_back(src.kind == TableSource::Kind::Table
                               ? "t" + std::to_string(src.table)
                               : "q(" + render_query(*src.sub, o) + ")");
        if (o.sets_sorted) std::sort(srcs.begin(), srcs.end());
        for (const auto& x : srcs) s << x << "|";
        s << ";on:";
        if (o.sets_sorted) {
            std::vector<CondPtr> conjuncts;
            for (const auto& jc : q.join_conds) collect_conjuncts(jc, conjuncts);
            std::vector<std::string> keys;
            keys.reserve(conjuncts.size());
            for (const auto& c : conjuncts) keys.push_back(render_cond(c, o));
            std::sort(keys.begin(), keys.end());
            for (const auto& k : keys) s << k << "|";
        } else {
            for (const auto& jc : q.join_conds) s << render_cond(jc, o) << "|";
        }
    }
    s << "]whr{" << render_cond_root(q.where, o) << "}grp[";
    {
        std::vector<std::string> refs;
        refs.reserve(q.group_by.size());
        for (const auto& r : q.group_by) refs.push_back(render_ref(r, o));
        if (o.sets_sorted) std::sort(refs.begin(), refs.end());
        for (const auto& r : refs) s << r << "|";
    }
    s << "]hav{" << render_cond_root(q.having, o) << "}ord[";
    for (const auto& it : q.order_by) s << render_expr(it.expr, o) << (it.asc ? "/a" : "/d") << "|";
    s << "]lim:";
    if (q.limit) s << *q.limit;
    if (q.set_op != SetOp::None) {
        s << ";" << (q.set_op == SetOp::Intersect ? "intersect"
                     : q.set_op == SetOp::Union   ? "union"
                                                  : "except");
        s << "{" << render_query(*q.set_rhs, o) << "}";
    }
    return s.str();
}

} // namespace detail

inline QueryPtr clone_query(const SqlQuery& q) {
    auto out = std::make_shared<SqlQuery>(q);
    out->select_items.clear();
    for (const auto& e : q.select_items) out->select_items.push_back(detail::clone_expr(e));
    out->sources.clear();
    for (const auto& src : q.sources) {
        TableSource ts = src;
        if (src.sub) ts.sub = clone_query(*src.sub);
        out->sources.push_back(std::move(ts));
    }
    out->join_conds.clear();
    for (const auto& c : q.join_conds) out->join_conds.push_back(detail::clone_cond(c));
    out->where = detail::clone_cond(q.where);
    out->having = detail::clone_cond(q.having);
    out->order_by.clear();
    for (const auto& it : q.order_by) out->order_by.push_back({detail::clone_expr(it.expr), it.asc});
    if (q.set_rhs) out->set_rhs = clone_query(*q.set_rhs);
    return out;
}

/// Order-sensitive, alias-free key: two ASTs are structurally equal iff
/// their keys match.
inline std::string render_structural(const SqlQuery& q) {
    return detail::render_query(q, {false, false, true});
}

inline bool struct_equal(const SqlQuery& a, const SqlQuery& b) {
    return render_structural(a) == render_structural(b);
}

// ---------------------------------------------------------------------------
// Canonical text printing.

namespace detail {

struct PrintFrame {
    const SqlQuery* block;
};

enum class PrintStyle { Sql, Ssql };

class SqlPrinter {
public:
    explicit SqlPrinter(PrintStyle style = PrintStyle::Sql) : style_(style) {}

    std::string print(const SqlQuery& q) {
        std::ostringstream out;
        print_query(q, out);
        return out.str();
    }

private:
    PrintStyle style_;
    std::vector<PrintFrame> frames_;

    static std::string source_name(const TableSource& s) {
        return s.kind == TableSource::Kind::Table ? to_lower(s.table_name) : std::string("subquery");
    }

    bool aliased(const SqlQuery& q) const {
        return style_ == PrintStyle::Sql && q.sources.size() > 1;
    }

    void print_ref(const ColumnRef& r, std::ostringstream& out) {
        const SqlQuery* block = nullptr;
        if (r.depth < static_cast<int>(frames_.size()))
            block = frames_[frames_.size() - 1 - static_cast<std::size_t>(r.depth)].block;
        std::string name = to_lower(r.raw_name);
        if (style_ == PrintStyle::Ssql) {
            // Fused table.column token, one whitespace token.
            if (block && r.source >= 0 && r.source < static_cast<int>(block->sources.size()))
                out << source_name(block->sources[static_cast<std::size_t>(r.source)]) << "." << name;
            else
                out << name;
            return;
        }
        if (r.depth > 0) {
            // Correlated: qualify by table name so re-parsing searches outward.
            if (block && r.source >= 0 && r.source < static_cast<int>(block->sources.size()))
                out << source_name(block->sources[static_cast<std::size_t>(r.source)]) << "." << name;
            else
                out << name;
            return;
        }
        if (block && aliased(*block))
            out << "t" << (r.source + 1) << "." << name;
        else
            out << name;
    }

    void print_expr(const ExprPtr& e, std::ostringstream& out) {
        switch (e->kind) {
            case Expr::Kind::Star: out << "*"; break;
            case Expr::Kind::Column: print_ref(e->col, out); break;
            case Expr::Kind::Lit:
                if (e->lit.kind == Literal::Kind::String)
                    out << "'" << e->lit.text << "'";
                else
                    out << e->lit.text;
                break;
            case Expr::Kind::Agg: {
                out << agg_fn_name(e->fn) << "(";
                if (e->agg_distinct) out << "distinct ";
                print_expr(e->arg, out);
                out << ")";
                break;
            }
            case Expr::Kind::Arith:
                print_expr(e->lhs, out);
                out << " " << arith_op_char(e->op) << " ";
                print_expr(e->rhs, out);
                break;
            case Expr::Kind::Subquery:
                out << "( ";
                print_query(*e->sub, out);
                out << " )";
                break;
        }
    }

    void print_cond(const CondPtr& c, std::ostringstream& out, Condition::Kind parent) {
        if (c->kind == Condition::Kind::Cmp) {
            print_expr(c->lhs, out);
            out << " " << cmp_op_text(c->op) << " ";
            if (c->op == CmpOp::Between) {
                print_expr(c->rhs, out);
                out << " and ";
                print_expr(c->rhs2, out);
            } else if ((c->op == CmpOp::In || c->op == CmpOp::NotIn) && !c->in_list.empty()) {
                out << "( ";
                for (std::size_t i = 0; i < c->in_list.size(); ++i) {
                    if (i) out << " , ";
                    print_expr(c->in_list[i], out);
                }
                out << " )";
            } else {
                print_expr(c->rhs, out);
            }
            return;
        }
        // Parenthesize nested junctions except the harmless and-inside-or,
        // so re-parsing preserves the tree.
        bool parens = parent == Condition::Kind::And ||
                      (parent == Condition::Kind::Or && c->kind == Condition::Kind::Or);
        if (parens) out << "( ";
        const char* sep = c->kind == Condition::Kind::And ? " and " : " or ";
        for (std::size_t i = 0; i < c->children.size(); ++i) {
            if (i) out << sep;
            print_cond(c->children[i], out, c->kind);
        }
        if (parens) out << " )";
    }

    /// Top-level conditions print bare; Kind::Cmp marks "no parent".
    void print_cond_top(const CondPtr& c, std::ostringstream& out) {
        print_cond(c, out, Condition::Kind::Cmp);
    }

    void print_source(const TableSource& s, std::ostringstream& out) {
        if (s.kind == TableSource::Kind::Table) {
            out << to_lower(s.table_name);
        } else {
            // A derived table cannot see this block's sources; print it in
            // the enclosing scope.
            PrintFrame saved = frames_.back();
            frames_.pop_back();
            out << "( ";
            print_query(*s.sub, out);
            out << " )";
            frames_.push_back(saved);
        }
    }

    void print_query(const SqlQuery& q, std::ostringstream& out) {
        frames_.push_back({&q});
        out << "select ";
        if (q.distinct) out << "distinct ";
        for (std::size_t i = 0; i < q.select_items.size(); ++i) {
            if (i) out << " , ";
            print_expr(q.select_items[i], out);
        }
        out << " from ";
        for (std::size_t i = 0; i < q.sources.size(); ++i) {
            if (i) out << (style_ == PrintStyle::Ssql ? " , " : " join ");
            print_source(q.sources[i], out);
            if (aliased(q)) out << " as t" << (i + 1);
            if (style_ == PrintStyle::Sql && i > 0 && i - 1 < q.join_conds.size()) {
                out << " on ";
                print_cond_top(q.join_conds[i - 1], out);
            }
        }
        if (q.where) {
            out << " where ";
            print_cond_top(q.where, out);
        }
        if (!q.group_by.empty()) {
            out << " group by ";
            for (std::size_t i = 0; i < q.group_by.size(); ++i) {
                if (i) out << " , ";
                print_ref(q.group_by[i], out);
            }
        }
        if (q.having) {
            out << " having ";
            print_cond_top(q.having, out);
        }
        if (!q.order_by.empty()) {
            out << " order by ";
            for (std::size_t i = 0; i < q.order_by.size(); ++i) {
                if (i) out << " , ";
                print_expr(q.order_by[i].expr, out);
                if (!q.order_by[i].asc) out << " desc";
            }
        }
        if (q.limit) out << " limit " << *q.limit;
        frames_.pop_back();
        if (q.set_op != SetOp::None) {
            out << (q.set_op == SetOp::Intersect ? " intersect "
                    : q.set_op == SetOp::Union   ? " union "
                                                 : " except ");
            print_query(*q.set_rhs, out);
        }
    }
};

} // namespace detail

/// Canonical text: lowercase, single-spaced, aliases t1..tn assigned in
/// FROM order, explicit `join ... on`.
inline std::string print_sql(const SqlQuery& q) {
    detail::SqlPrinter p;
    return p.print(q);
}

// ---------------------------------------------------------------------------
// Normalization: sorted commutative condition children, sorted =/!= operand
// pairs. Idempotent; select/group/order lists keep their order.

namespace detail {

inline void normalize_cond(CondPtr& c);
inline void normalize_query(SqlQuery& q);

inline void normalize_expr(ExprPtr& e) {
    if (!e) return;
    normalize_expr(e->arg);
    normalize_expr(e->lhs);
    normalize_expr(e->rhs);
    if (e->sub) normalize_query(*e->sub);
}

inline void normalize_cond(CondPtr& c) {
    if (!c) return;
    if (c->kind == Condition::Kind::Cmp) {
        normalize_expr(c->lhs);
        normalize_expr(c->rhs);
        normalize_expr(c->rhs2);
        for (auto& e : c->in_list) normalize_expr(e);
        if (c->op == CmpOp::Eq || c->op == CmpOp::Ne) {
            RenderOpts o{false, false, true};
            if (render_expr(c->rhs, o) < render_expr(c->lhs, o)) std::swap(c->lhs, c->rhs);
        }
        return;
    }
    for (auto& ch : c->children) normalize_cond(ch);
    RenderOpts o{false, false, true};
    std::stable_sort(c->children.begin(), c->children.end(),
                     [&](const CondPtr& a, const CondPtr& b) {
                         return render_cond(a, o) < render_cond(b, o);
                     });
}

inline void normalize_query(SqlQuery& q) {
    for (auto& e : q.select_items) normalize_expr(e);
    for (auto& src : q.sources)
        if (src.sub) normalize_query(*src.sub);
    for (auto& jc : q.join_conds) normalize_cond(jc);
    normalize_cond(q.where);
    normalize_cond(q.having);
    for (auto& it : q.order_by) normalize_expr(it.expr);
    if (q.set_rhs) normalize_query(*q.set_rhs);
}

} // namespace detail

inline QueryPtr normalize_sql(const SqlQuery& q) {
    QueryPtr out = clone_query(q);
    detail::normalize_query(*out);
    return out;
}

/// Alias-free key with set semantics for SELECT items, conjuncts, GROUP BY
/// and FROM; ORDER BY and LIMIT stay order-sensitive. With `ignore_values`
/// every literal collapses to a placeholder.
inline std::string render_set_key(const SqlQuery& q, bool ignore_values = false) {
    return detail::render_query(q, {true, ignore_values, false});
}

} // namespace ssql
