#pragma once

#include <algorithm>
#include <cctype>
#include <memory>
#include <string>
#include <vector>

#include "ssql/error.hpp"
#include "ssql/schema.hpp"
#include "ssql/sql_ast.hpp"

namespace ssql {
namespace detail {

enum class Tok {
    End, Ident, Number, String, DQString,
    LParen, RParen, Comma, Dot, Star, Plus, Minus, Slash,
    Eq, Ne, Lt, Le, Gt, Ge,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t pos = 0;
};

inline std::vector<Token> lex_sql(const std::string& text) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto push = [&](Tok k, std::string t, std::size_t p) { out.push_back({k, std::move(t), p}); };
    while (i < n) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string id;
            while (i < n && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
                id.push_back(text[i++]);
            push(Tok::Ident, id, start);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            while (i < n && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.'))
                num.push_back(text[i++]);
            push(Tok::Number, num, start);
            continue;
        }
        if (c == '\'' || c == '"') {
            char quote = c;
            ++i;
            std::string body;
            while (i < n && text[i] != quote) body.push_back(text[i++]);
            if (i >= n)
                throw Error(ErrorCode::SyntaxError, "unterminated string literal", start);
            ++i;
            push(quote == '\'' ? Tok::String : Tok::DQString, body, start);
            continue;
        }
        switch (c) {
            case '(': push(Tok::LParen, "(", start); ++i; break;
            case ')': push(Tok::RParen, ")", start); ++i; break;
            case ',': push(Tok::Comma, ",", start); ++i; break;
            case '.': push(Tok::Dot, ".", start); ++i; break;
            case '*': push(Tok::Star, "*", start); ++i; break;
            case '+': push(Tok::Plus, "+", start); ++i; break;
            case '-': push(Tok::Minus, "-", start); ++i; break;
            case '/': push(Tok::Slash, "/", start); ++i; break;
            case '=': push(Tok::Eq, "=", start); ++i; break;
            case '!':
                if (i + 1 < n && text[i + 1] == '=') {
                    push(Tok::Ne, "!=", start);
                    i += 2;
                } else {
                    throw Error(ErrorCode::SyntaxError, "stray '!'", start);
                }
                break;
            case '<':
                if (i + 1 < n && text[i + 1] == '=') {
                    push(Tok::Le, "<=", start);
                    i += 2;
                } else if (i + 1 < n && text[i + 1] == '>') {
                    push(Tok::Ne, "<>", start);
                    i += 2;
                } else {
                    push(Tok::Lt, "<", start);
                    ++i;
                }
                break;
            case '>':
                if (i + 1 < n && text[i + 1] == '=') {
                    push(Tok::Ge, ">=", start);
                    i += 2;
                } else {
                    push(Tok::Gt, ">", start);
                    ++i;
                }
                break;
            default:
                throw Error(ErrorCode::SyntaxError,
                            std::string("unexpected character '") + c + "'", start);
        }
    }
    out.push_back({Tok::End, "", n});
    return out;
}

inline bool is_reserved(const std::string& word) {
    static const char* kw[] = {"select", "distinct", "from", "as",     "join",      "inner",
                               "on",     "where",    "and",  "or",     "not",       "in",
                               "like",   "between",  "group", "by",    "having",    "order",
                               "asc",    "desc",     "limit", "intersect", "union", "except"};
    for (const char* k : kw)
        if (iequals(word, k)) return true;
    return false;
}

inline bool agg_fn_from_name(const std::string& name, AggFn& out) {
    if (iequals(name, "count")) out = AggFn::Count;
    else if (iequals(name, "sum")) out = AggFn::Sum;
    else if (iequals(name, "avg")) out = AggFn::Avg;
    else if (iequals(name, "min")) out = AggFn::Min;
    else if (iequals(name, "max")) out = AggFn::Max;
    else return false;
    return true;
}

enum class Dialect { Sql, Ssql };

/// Recursive-descent parser for the Spider SQL dialect and its SSQL
/// restriction (comma FROM list, fused table.column tokens, no aliases).
/// Table names resolve during parsing; column references are bound by the
/// Resolver afterwards.
class SqlParser {
public:
    SqlParser(const std::string& text, const Schema& schema, Dialect dialect = Dialect::Sql)
        : toks_(lex_sql(text)), schema_(schema), dialect_(dialect) {}

    QueryPtr parse() {
        if (peek().kind == Tok::End)
            throw Error(ErrorCode::SyntaxError, "empty query", 0);
        QueryPtr q = parse_query();
        if (peek().kind != Tok::End) fail("end of input");
        return q;
    }

private:
    std::vector<Token> toks_;
    std::size_t i_ = 0;
    const Schema& schema_;
    Dialect dialect_ = Dialect::Sql;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t k = i_ + ahead;
        return k < toks_.size() ? toks_[k] : toks_.back();
    }
    const Token& advance() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

    bool at_kw(const char* kw, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == Tok::Ident && iequals(t.text, kw);
    }
    bool eat_kw(const char* kw) {
        if (!at_kw(kw)) return false;
        advance();
        return true;
    }
    void expect_kw(const char* kw) {
        if (!eat_kw(kw)) fail(std::string("'") + kw + "'");
    }
    bool eat(Tok k) {
        if (peek().kind != k) return false;
        advance();
        return true;
    }
    void expect(Tok k, const char* what) {
        if (!eat(k)) fail(what);
    }

    [[noreturn]] void fail(const std::string& expected) const {
        const Token& t = peek();
        std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw Error(ErrorCode::SyntaxError,
                    "expected " + expected + ", found " + found + " at offset " +
                        std::to_string(t.pos),
                    t.pos);
    }

    // query := select_core (set_op query)?
    QueryPtr parse_query() {
        QueryPtr q = parse_select_core();
        if (at_kw("intersect") || at_kw("union") || at_kw("except")) {
            std::string op = to_lower(advance().text);
            q->set_op = op == "intersect" ? SetOp::Intersect
                        : op == "union"   ? SetOp::Union
                                          : SetOp::Except;
            q->set_rhs = parse_query();
        }
        return q;
    }

    QueryPtr parse_select_core() {
        auto q = std::make_shared<SqlQuery>();
        expect_kw("select");
        q->distinct = eat_kw("distinct");
        q->select_items.push_back(parse_select_item());
        while (eat(Tok::Comma)) q->select_items.push_back(parse_select_item());
        expect_kw("from");
        parse_from(*q);
        if (eat_kw("where")) q->where = parse_condition();
        if (at_kw("group")) {
            advance();
            expect_kw("by");
            q->group_by.push_back(parse_bare_ref());
            while (eat(Tok::Comma)) q->group_by.push_back(parse_bare_ref());
        }
        if (eat_kw("having")) q->having = parse_condition();
        if (at_kw("order")) {
            advance();
            expect_kw("by");
            do {
                OrderItem item;
                std::size_t at = peek().pos;
                item.expr = parse_expr();
                if (contains_subquery(item.expr))
                    throw Error(ErrorCode::SyntaxError,
                                "subqueries are not allowed in order by", at);
                if (eat_kw("desc")) item.asc = false;
                else eat_kw("asc");
                q->order_by.push_back(std::move(item));
            } while (eat(Tok::Comma));
        }
        if (eat_kw("limit")) {
            if (peek().kind != Tok::Number) fail("a limit count");
            const std::string& txt = peek().text;
            if (txt.find('.') != std::string::npos) fail("an integer limit");
            q->limit = std::stoll(txt);
            advance();
        }
        return q;
    }

    void parse_from(SqlQuery& q) {
        if (dialect_ == Dialect::Ssql) {
            parse_ssql_from(q);
            return;
        }
        q.sources.push_back(parse_source(q));
        while (at_kw("join") || at_kw("inner")) {
            eat_kw("inner");
            expect_kw("join");
            q.sources.push_back(parse_source(q));
            expect_kw("on");
            q.join_conds.push_back(parse_condition());
        }
    }

    // SSQL FROM: comma-separated table names, no aliases, no joins. The
    // list is stored in schema order.
    void parse_ssql_from(SqlQuery& q) {
        do {
            if (peek().kind != Tok::Ident || is_reserved(peek().text)) fail("a table name");
            const Token& t = advance();
            auto ti = schema_.find_table(t.text);
            if (!ti)
                throw Error(ErrorCode::UnknownFusedToken,
                            "table '" + t.text + "' not in schema '" + schema_.db_id + "'", t.pos);
            if (at_kw("as"))
                throw Error(ErrorCode::SyntaxError, "aliases are not allowed here", peek().pos);
            TableSource src;
            src.kind = TableSource::Kind::Table;
            src.table = *ti;
            src.table_name = schema_.table_name(*ti);
            for (const auto& other : q.sources)
                if (other.table == src.table)
                    throw Error(ErrorCode::SyntaxError,
                                "table '" + t.text + "' listed twice in from", t.pos);
            q.sources.push_back(std::move(src));
        } while (eat(Tok::Comma));
        std::sort(q.sources.begin(), q.sources.end(),
                  [](const TableSource& a, const TableSource& b) { return a.table < b.table; });
    }

    TableSource parse_source(const SqlQuery& q) {
        TableSource src;
        if (eat(Tok::LParen)) {
            src.kind = TableSource::Kind::Subquery;
            src.sub = parse_query();
            expect(Tok::RParen, "')'");
        } else {
            if (peek().kind != Tok::Ident && peek().kind != Tok::DQString) fail("a table name");
            if (peek().kind == Tok::Ident && is_reserved(peek().text)) fail("a table name");
            const Token& t = advance();
            auto ti = schema_.find_table(t.text);
            if (!ti)
                throw Error(ErrorCode::UnknownTable,
                            "table '" + t.text + "' not in schema '" + schema_.db_id + "'", t.pos);
            src.kind = TableSource::Kind::Table;
            src.table = *ti;
            src.table_name = schema_.table_name(*ti);
        }
        if (eat_kw("as")) {
            if (peek().kind != Tok::Ident) fail("an alias after 'as'");
            src.alias = advance().text;
        } else if (peek().kind == Tok::Ident && !is_reserved(peek().text)) {
            src.alias = advance().text;
        }
        for (const auto& other : q.sources)
            if (!src.alias.empty() && iequals(other.alias, src.alias))
                throw Error(ErrorCode::SyntaxError, "duplicate alias '" + src.alias + "'",
                            peek().pos);
        return src;
    }

    ExprPtr parse_select_item() {
        if (peek().kind == Tok::Star) {
            advance();
            return ast::star();
        }
        if (peek().kind == Tok::Ident && is_reserved(peek().text)) fail("a select expression");
        std::size_t at = peek().pos;
        ExprPtr e = parse_expr();
        // Subqueries live in FROM, condition operands and set-op branches.
        if (contains_subquery(e))
            throw Error(ErrorCode::SyntaxError, "subqueries are not allowed in select items", at);
        return e;
    }

    ColumnRef parse_bare_ref() {
        ColumnRef ref;
        if (peek().kind != Tok::Ident && peek().kind != Tok::DQString) fail("a column reference");
        ref.raw_name = advance().text;
        if (eat(Tok::Dot)) {
            ref.raw_qualifier = std::move(ref.raw_name);
            if (peek().kind != Tok::Ident && peek().kind != Tok::DQString)
                fail("a column name after '.'");
            ref.raw_name = advance().text;
        } else if (dialect_ == Dialect::Ssql) {
            fail("a fused table.column token");
        }
        return ref;
    }

    // expr := term ((+|-) term)*
    ExprPtr parse_expr() {
        ExprPtr e = parse_term();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            ArithOp op = advance().kind == Tok::Plus ? ArithOp::Add : ArithOp::Sub;
            e = ast::arith(op, e, parse_term());
        }
        return e;
    }

    // term := factor ((*|/) factor)*
    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            // '*' only multiplies when an operand can follow.
            if (peek().kind == Tok::Star) {
                Tok next = peek(1).kind;
                bool operand_follows =
                    next == Tok::Number || next == Tok::String || next == Tok::LParen ||
                    (next == Tok::Ident && !is_reserved(peek(1).text));
                if (!operand_follows) break;
            }
            ArithOp op = advance().kind == Tok::Star ? ArithOp::Mul : ArithOp::Div;
            e = ast::arith(op, e, parse_factor());
        }
        return e;
    }

    ExprPtr parse_factor() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Number: return ast::literal(Literal::Kind::Number, advance().text);
            case Tok::String:
            case Tok::DQString: return ast::literal(Literal::Kind::String, advance().text);
            case Tok::Minus: {
                advance();
                if (peek().kind != Tok::Number) fail("a number after unary '-'");
                return ast::literal(Literal::Kind::Number, "-" + advance().text);
            }
            case Tok::LParen: {
                advance();
                if (!at_kw("select")) fail("a subquery");
                QueryPtr sub = parse_query();
                expect(Tok::RParen, "')'");
                return ast::subquery(std::move(sub));
            }
            case Tok::Ident: {
                AggFn fn;
                if (peek(1).kind == Tok::LParen && agg_fn_from_name(t.text, fn)) {
                    advance();
                    advance();
                    bool dist = eat_kw("distinct");
                    ExprPtr arg;
                    if (peek().kind == Tok::Star) {
                        advance();
                        arg = ast::star();
                    } else {
                        arg = parse_expr();
                        if (contains_agg(arg)) fail("a non-aggregate argument");
                    }
                    expect(Tok::RParen, "')'");
                    return ast::aggregate(fn, std::move(arg), dist);
                }
                if (is_reserved(t.text)) fail("an expression");
                return ast::column(parse_bare_ref());
            }
            default: fail("an expression");
        }
    }

    static bool contains_agg(const ExprPtr& e) {
        if (!e) return false;
        if (e->kind == Expr::Kind::Agg) return true;
        return contains_agg(e->lhs) || contains_agg(e->rhs) || contains_agg(e->arg);
    }

    static bool contains_subquery(const ExprPtr& e) {
        if (!e) return false;
        if (e->kind == Expr::Kind::Subquery) return true;
        return contains_subquery(e->lhs) || contains_subquery(e->rhs) ||
               contains_subquery(e->arg);
    }

    // cond := and_group (OR and_group)*
    CondPtr parse_condition() {
        std::vector<CondPtr> ors{parse_and_group()};
        while (eat_kw("or")) ors.push_back(parse_and_group());
        if (ors.size() == 1) return ors[0];
        return ast::junction(Condition::Kind::Or, std::move(ors));
    }

    CondPtr parse_and_group() {
        std::vector<CondPtr> ands{parse_primary_cond()};
        while (eat_kw("and")) ands.push_back(parse_primary_cond());
        if (ands.size() == 1) return ands[0];
        return ast::junction(Condition::Kind::And, std::move(ands));
    }

    CondPtr parse_primary_cond() {
        // '(' introduces a nested condition unless a subquery follows.
        if (peek().kind == Tok::LParen && !at_kw("select", 1)) {
            advance();
            CondPtr c = parse_condition();
            expect(Tok::RParen, "')'");
            return c;
        }
        return parse_predicate();
    }

    CondPtr parse_predicate() {
        ExprPtr lhs = parse_expr();
        bool negate = eat_kw("not");
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Eq:
            case Tok::Ne:
            case Tok::Lt:
            case Tok::Le:
            case Tok::Gt:
            case Tok::Ge: {
                if (negate) fail("'in' or 'like' after 'not'");
                CmpOp op = t.kind == Tok::Eq   ? CmpOp::Eq
                           : t.kind == Tok::Ne ? CmpOp::Ne
                           : t.kind == Tok::Lt ? CmpOp::Lt
                           : t.kind == Tok::Le ? CmpOp::Le
                           : t.kind == Tok::Gt ? CmpOp::Gt
                                               : CmpOp::Ge;
                advance();
                return ast::compare(op, std::move(lhs), parse_expr());
            }
            case Tok::Ident:
                if (iequals(t.text, "between")) {
                    if (negate) fail("'in' or 'like' after 'not'");
                    advance();
                    ExprPtr lo = parse_expr();
                    expect_kw("and");
                    return ast::compare(CmpOp::Between, std::move(lhs), std::move(lo), parse_expr());
                }
                if (iequals(t.text, "like")) {
                    advance();
                    return ast::compare(negate ? CmpOp::NotLike : CmpOp::Like, std::move(lhs),
                                        parse_expr());
                }
                if (iequals(t.text, "in")) {
                    advance();
                    expect(Tok::LParen, "'('");
                    auto c = std::make_shared<Condition>();
                    c->kind = Condition::Kind::Cmp;
                    c->op = negate ? CmpOp::NotIn : CmpOp::In;
                    c->lhs = std::move(lhs);
                    if (at_kw("select")) {
                        c->rhs = ast::subquery(parse_query());
                    } else {
                        c->in_list.push_back(parse_expr());
                        while (eat(Tok::Comma)) c->in_list.push_back(parse_expr());
                    }
                    expect(Tok::RParen, "')'");
                    return c;
                }
                fail("a comparison operator");
            default: fail("a comparison operator");
        }
    }
};

/// Binds column references against FROM sources, innermost block first,
/// then outward for correlated references.
class Resolver {
public:
    explicit Resolver(const Schema& schema) : schema_(schema) {}

    void resolve(SqlQuery& q) {
        // Derived tables cannot see this block's other sources.
        for (auto& src : q.sources)
            if (src.kind == TableSource::Kind::Subquery) resolve(*src.sub);
        stack_.push_back(&q);
        for (auto& e : q.select_items) resolve_expr(e);
        for (auto& jc : q.join_conds) resolve_cond(jc);
        resolve_cond(q.where);
        for (auto& r : q.group_by) bind(r);
        resolve_cond(q.having);
        for (auto& it : q.order_by) resolve_expr(it.expr);
        stack_.pop_back();
        if (q.set_rhs) resolve(*q.set_rhs);
    }

private:
    const Schema& schema_;
    std::vector<SqlQuery*> stack_;

    struct Exposed {
        std::string name;
        int table;
        int column;
    };

    void expose_source(const TableSource& src, std::vector<Exposed>& out) const {
        if (src.kind == TableSource::Kind::Table) {
            for (int cid : schema_.tables[static_cast<std::size_t>(src.table)].columns)
                out.push_back({schema_.column_name(cid), src.table, cid});
        } else {
            for (const auto& item : src.sub->select_items) {
                if (item->kind == Expr::Kind::Column) {
                    out.push_back({schema_.column_name(item->col.column), item->col.table,
                                   item->col.column});
                } else if (item->kind == Expr::Kind::Star) {
                    for (const auto& inner : src.sub->sources) expose_source(inner, out);
                }
            }
        }
    }

    void resolve_expr(ExprPtr& e) {
        if (!e) return;
        switch (e->kind) {
            case Expr::Kind::Column: bind(e->col); break;
            case Expr::Kind::Agg: resolve_expr(e->arg); break;
            case Expr::Kind::Arith:
                resolve_expr(e->lhs);
                resolve_expr(e->rhs);
                break;
            case Expr::Kind::Subquery: resolve(*e->sub); break;
            default: break;
        }
    }

    void resolve_cond(CondPtr& c) {
        if (!c) return;
        if (c->kind == Condition::Kind::Cmp) {
            resolve_expr(c->lhs);
            resolve_expr(c->rhs);
            resolve_expr(c->rhs2);
            for (auto& e : c->in_list) resolve_expr(e);
            return;
        }
        for (auto& ch : c->children) resolve_cond(ch);
    }

    void bind(ColumnRef& ref) {
        for (int depth = 0; depth < static_cast<int>(stack_.size()); ++depth) {
            SqlQuery& block = *stack_[stack_.size() - 1 - static_cast<std::size_t>(depth)];
            if (try_bind_in_block(ref, block, depth)) return;
        }
        if (!ref.raw_qualifier.empty()) {
            // Distinguish a bad qualifier from a bad column.
            for (int depth = 0; depth < static_cast<int>(stack_.size()); ++depth) {
                SqlQuery& block = *stack_[stack_.size() - 1 - static_cast<std::size_t>(depth)];
                for (const auto& src : block.sources)
                    if (source_matches(src, ref.raw_qualifier))
                        throw Error(ErrorCode::UnknownColumn,
                                    "column '" + ref.raw_qualifier + "." + ref.raw_name +
                                        "' not found");
            }
            throw Error(ErrorCode::UnknownTable,
                        "'" + ref.raw_qualifier + "' is not a table or alias in scope");
        }
        throw Error(ErrorCode::UnknownColumn, "column '" + ref.raw_name + "' not found");
    }

    static bool source_matches(const TableSource& src, const std::string& qualifier) {
        if (!src.alias.empty() && iequals(src.alias, qualifier)) return true;
        return src.kind == TableSource::Kind::Table && iequals(src.table_name, qualifier);
    }

    struct Hit {
        int source;
        int table;
        int column;
    };

    bool try_bind_in_block(ColumnRef& ref, SqlQuery& block, int depth) {
        std::vector<Hit> hits;
        for (int k = 0; k < static_cast<int>(block.sources.size()); ++k) {
            const auto& src = block.sources[static_cast<std::size_t>(k)];
            if (!ref.raw_qualifier.empty()) {
                // Alias matches take priority over table-name matches.
                bool alias_hit = !src.alias.empty() && iequals(src.alias, ref.raw_qualifier);
                bool name_hit = src.kind == TableSource::Kind::Table &&
                                iequals(src.table_name, ref.raw_qualifier);
                if (!alias_hit && !name_hit) continue;
                if (alias_hit) {
                    hits.clear();
                    if (!lookup_in_source(src, ref.raw_name, k, hits))
                        throw Error(ErrorCode::UnknownColumn,
                                    "column '" + ref.raw_qualifier + "." + ref.raw_name +
                                        "' not found");
                    ref.depth = depth;
                    ref.source = hits[0].source;
                    ref.table = hits[0].table;
                    ref.column = hits[0].column;
                    return true;
                }
                lookup_in_source(src, ref.raw_name, k, hits);
            } else {
                lookup_in_source(src, ref.raw_name, k, hits);
            }
        }
        if (hits.empty()) return false;
        if (hits.size() > 1)
            throw Error(ErrorCode::AmbiguousColumn,
                        "column '" + ref.raw_name + "' matches more than one FROM source");
        ref.depth = depth;
        ref.source = hits[0].source;
        ref.table = hits[0].table;
        ref.column = hits[0].column;
        return true;
    }

    bool lookup_in_source(const TableSource& src, const std::string& name, int slot,
                          std::vector<Hit>& hits) const {
        std::vector<Exposed> cols;
        expose_source(src, cols);
        for (const auto& c : cols)
            if (iequals(c.name, name)) {
                hits.push_back({slot, c.table, c.column});
                return true;
            }
        return false;
    }
};

} // namespace detail

/// Parses Spider-dialect SQL and resolves every reference against `schema`.
inline QueryPtr parse_sql(const std::string& text, const Schema& schema) {
    detail::SqlParser parser(text, schema);
    QueryPtr q = parser.parse();
    detail::Resolver resolver(schema);
    resolver.resolve(*q);
    return q;
}

} // namespace ssql
