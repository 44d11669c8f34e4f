// Recursive-descent parser for the Solidity subset. Anything outside the
// subset degrades to an opaque statement (or opaque contract member) that
// keeps the exact source span; the parser itself never rejects lexable input.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lisa/ast.hpp"
#include "lisa/token.hpp"

namespace lisa {

namespace parser_detail {

class Parser {
  public:
    Parser(const SourceFile& file, std::vector<Token> tokens)
        : file_(file), toks_(std::move(tokens)) {}

    ContractUnit parse_unit() {
        ContractUnit unit;
        unit.file = std::make_shared<SourceFile>(file_);
        while (!at_end()) {
            if (peek().is_ident("pragma")) {
                parse_pragma(unit);
            } else if (peek().is_ident("contract") || peek().is_ident("interface") ||
                       peek().is_ident("library") ||
                       (peek().is_ident("abstract") && peek(1).is_ident("contract"))) {
                if (auto c = parse_contract())
                    unit.contracts.push_back(std::move(*c));
            } else {
                // Unknown top-level construct (import, using, free function...):
                // skip one balanced construct.
                skip_balanced_construct();
            }
        }
        return unit;
    }

  private:
    const SourceFile& file_;
    std::vector<Token> toks_;
    size_t pos_ = 0;

    const Token& peek(size_t ahead = 0) const {
        size_t p = pos_ + ahead;
        return p < toks_.size() ? toks_[p] : toks_.back();
    }
    const Token& advance() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size())
            ++pos_;
        return t;
    }
    bool at_end() const { return peek().is(TokenKind::End); }
    bool accept_punct(std::string_view p) {
        if (peek().is_punct(p)) {
            advance();
            return true;
        }
        return false;
    }
    bool accept_ident(std::string_view name) {
        if (peek().is_ident(name)) {
            advance();
            return true;
        }
        return false;
    }
    size_t mark() const { return pos_; }
    void rewind(size_t m) { pos_ = m; }

    Span span_from(const SourcePos& start) const {
        Span s;
        s.begin = start;
        s.end = pos_ > 0 ? toks_[pos_ - 1].span.end : start;
        return s;
    }

    // ---- recovery ----

    // Skips one construct: either to the ';' that closes it or over one
    // balanced {...} (whichever comes first at nesting depth zero).
    void skip_balanced_construct() {
        int depth = 0;
        while (!at_end()) {
            const Token& t = advance();
            if (t.is_punct("{") || t.is_punct("(") || t.is_punct("["))
                ++depth;
            else if (t.is_punct(")") || t.is_punct("]"))
                --depth;
            else if (t.is_punct("}")) {
                --depth;
                if (depth <= 0)
                    return;
            } else if (t.is_punct(";") && depth == 0) {
                return;
            }
        }
    }

    // Same, but never consumes the '}' that closes the enclosing block.
    void skip_statement_tokens() {
        int depth = 0;
        while (!at_end()) {
            const Token& t = peek();
            if (depth == 0 && t.is_punct("}"))
                return;
            advance();
            if (t.is_punct("{") || t.is_punct("(") || t.is_punct("["))
                ++depth;
            else if (t.is_punct(")") || t.is_punct("]"))
                --depth;
            else if (t.is_punct("}")) {
                --depth;
                if (depth <= 0)
                    return;
            } else if (t.is_punct(";") && depth == 0) {
                return;
            }
        }
    }

    StmtPtr opaque_stmt_from(size_t start_tok) {
        rewind(start_tok);
        SourcePos start = peek().span.begin;
        skip_statement_tokens();
        auto s = std::make_unique<Stmt>();
        s->kind = StmtKind::Opaque;
        s->span = span_from(start);
        s->text = file_.slice(s->span);
        return s;
    }

    // ---- top level ----

    void parse_pragma(ContractUnit& unit) {
        advance();  // pragma
        bool is_solidity = accept_ident("solidity");
        std::string text;
        SourcePos start = peek().span.begin;
        SourcePos end = start;
        while (!at_end() && !peek().is_punct(";")) {
            const Token& t = advance();
            end = t.span.end;
        }
        accept_punct(";");
        Span body{start, end};
        text = trim(file_.slice(body));
        if (is_solidity) {
            unit.pragma_text = text;
            unit.pragma_version = VersionRange::parse(text);
        }
    }

    std::optional<ContractDecl> parse_contract() {
        ContractDecl c;
        SourcePos start = peek().span.begin;
        accept_ident("abstract");
        const Token& kw = advance();
        c.kind = kw.text == "interface"  ? ContractKind::Interface
                 : kw.text == "library" ? ContractKind::Library
                                        : ContractKind::Contract;
        if (!peek().is(TokenKind::Identifier)) {
            skip_balanced_construct();
            return std::nullopt;
        }
        c.name = advance().text;
        if (accept_ident("is")) {
            while (peek().is(TokenKind::Identifier)) {
                c.bases.push_back(advance().text);
                // Base constructor arguments are not modeled.
                if (peek().is_punct("("))
                    skip_parenthesized();
                if (!accept_punct(","))
                    break;
            }
        }
        if (!accept_punct("{")) {
            skip_balanced_construct();
            return std::nullopt;
        }
        while (!at_end() && !peek().is_punct("}"))
            parse_contract_member(c);
        accept_punct("}");
        c.span = span_from(start);
        return c;
    }

    void skip_parenthesized() {
        if (!accept_punct("("))
            return;
        int depth = 1;
        while (!at_end() && depth > 0) {
            const Token& t = advance();
            if (t.is_punct("("))
                ++depth;
            else if (t.is_punct(")"))
                --depth;
        }
    }

    void parse_contract_member(ContractDecl& c) {
        const Token& t = peek();
        if (t.is_ident("function") || t.is_ident("constructor") || t.is_ident("receive") ||
            t.is_ident("fallback")) {
            parse_function(c);
        } else if (t.is_ident("modifier")) {
            parse_modifier(c);
        } else if (t.is_ident("event")) {
            parse_event(c);
        } else if (t.is(TokenKind::Identifier) &&
                   (is_elementary_type(t.text) || t.is_ident("mapping") ||
                    looks_like_user_type_var())) {
            parse_state_var(c);
        } else {
            // struct / enum / using / unknown member
            skip_balanced_construct();
        }
    }

    // Heuristic: `Name [visibility] ident ... ;` at member level is a state
    // variable of a user-declared type.
    bool looks_like_user_type_var() {
        size_t m = mark();
        bool ok = false;
        if (try_parse_type_text()) {
            while (peek().is_ident("public") || peek().is_ident("private") ||
                   peek().is_ident("internal") || peek().is_ident("constant") ||
                   peek().is_ident("immutable"))
                advance();
            if (peek().is(TokenKind::Identifier) && !is_keyword(peek().text) &&
                (peek(1).is_punct(";") || peek(1).is_punct("=")))
                ok = true;
        }
        rewind(m);
        return ok;
    }

    void parse_state_var(ContractDecl& c) {
        size_t start_tok = mark();
        SourcePos start = peek().span.begin;
        auto type = try_parse_type_text();
        if (!type) {
            rewind(start_tok);
            skip_balanced_construct();
            return;
        }
        StateVarDecl v;
        v.type_text = *type;
        while (true) {
            if (peek().is_ident("public") || peek().is_ident("private") ||
                peek().is_ident("internal")) {
                v.visibility = advance().text;
            } else if (peek().is_ident("constant") || peek().is_ident("immutable")) {
                v.is_constant = true;
                advance();
            } else {
                break;
            }
        }
        if (!peek().is(TokenKind::Identifier) || is_keyword(peek().text)) {
            rewind(start_tok);
            skip_balanced_construct();
            return;
        }
        v.name = advance().text;
        if (accept_punct("=")) {
            v.init = parse_expression();
            if (!v.init) {
                rewind(start_tok);
                skip_balanced_construct();
                return;
            }
        }
        if (!accept_punct(";")) {
            rewind(start_tok);
            skip_balanced_construct();
            return;
        }
        v.span = span_from(start);
        c.state_vars.push_back(std::move(v));
    }

    // Parses a type and renders it back to canonical text ("uint256",
    // "mapping(address => uint256)", "address[]", "IPair").
    std::optional<std::string> try_parse_type_text() {
        const Token& t = peek();
        std::string text;
        if (t.is_ident("mapping")) {
            advance();
            if (!accept_punct("("))
                return std::nullopt;
            auto key = try_parse_type_text();
            if (!key || !accept_punct("=>"))
                return std::nullopt;
            auto value = try_parse_type_text();
            if (!value || !accept_punct(")"))
                return std::nullopt;
            text = "mapping(" + *key + " => " + *value + ")";
        } else if (t.is(TokenKind::Identifier) &&
                   (is_elementary_type(t.text) || !is_keyword(t.text))) {
            text = advance().text;
            if (text == "address" && peek().is_ident("payable")) {
                advance();
                text += " payable";
            }
        } else {
            return std::nullopt;
        }
        // Array suffixes: [] or [<number>] only; an expression subscript means
        // this was not a type after all.
        while (peek().is_punct("[")) {
            if (peek(1).is_punct("]")) {
                advance();
                advance();
                text += "[]";
            } else if (peek(1).is(TokenKind::Number) && peek(2).is_punct("]")) {
                std::string n = peek(1).text;
                advance();
                advance();
                advance();
                text += "[" + n + "]";
            } else {
                return std::nullopt;
            }
        }
        return text;
    }

    std::vector<Param> parse_param_list() {
        std::vector<Param> params;
        if (!accept_punct("("))
            return params;
        while (!at_end() && !peek().is_punct(")")) {
            Param p;
            SourcePos start = peek().span.begin;
            auto type = try_parse_type_text();
            if (!type) {
                // Unparseable parameter: skip to ',' or ')'.
                int depth = 0;
                while (!at_end()) {
                    if (depth == 0 && (peek().is_punct(",") || peek().is_punct(")")))
                        break;
                    const Token& tok = advance();
                    if (tok.is_punct("(") || tok.is_punct("["))
                        ++depth;
                    else if (tok.is_punct(")") || tok.is_punct("]"))
                        --depth;
                }
                accept_punct(",");
                continue;
            }
            p.type_text = *type;
            while (peek().is_ident("memory") || peek().is_ident("calldata") ||
                   peek().is_ident("storage") || peek().is_ident("payable") ||
                   peek().is_ident("indexed"))
                p.location = advance().text;
            if (peek().is(TokenKind::Identifier) && !is_keyword(peek().text))
                p.name = advance().text;
            p.span = span_from(start);
            params.push_back(std::move(p));
            if (!accept_punct(","))
                break;
        }
        accept_punct(")");
        return params;
    }

    void parse_event(ContractDecl& c) {
        SourcePos start = peek().span.begin;
        advance();  // event
        EventDecl e;
        if (!peek().is(TokenKind::Identifier)) {
            skip_balanced_construct();
            return;
        }
        e.name = advance().text;
        e.params = parse_param_list();
        accept_ident("anonymous");
        accept_punct(";");
        e.span = span_from(start);
        c.events.push_back(std::move(e));
    }

    void parse_modifier(ContractDecl& c) {
        SourcePos start = peek().span.begin;
        advance();  // modifier
        ModifierDecl m;
        if (!peek().is(TokenKind::Identifier)) {
            skip_balanced_construct();
            return;
        }
        m.name = advance().text;
        if (peek().is_punct("("))
            m.params = parse_param_list();
        if (peek().is_punct("{")) {
            m.body = parse_block_statements();
        } else {
            skip_balanced_construct();
        }
        m.span = span_from(start);
        c.modifiers.push_back(std::move(m));
    }

    void parse_function(ContractDecl& c) {
        SourcePos start = peek().span.begin;
        FunctionDecl f;
        const Token& kw = advance();  // function / constructor / receive / fallback
        if (kw.text == "constructor") {
            f.name = "constructor";
            f.is_constructor = true;
        } else if (kw.text == "receive" || kw.text == "fallback") {
            f.name = kw.text;
            f.visibility = Visibility::External;
        } else {
            if (!peek().is(TokenKind::Identifier)) {
                skip_balanced_construct();
                return;
            }
            f.name = advance().text;
        }
        f.params = parse_param_list();
        // Header attributes in any order.
        while (true) {
            const Token& t = peek();
            if (t.is_ident("public"))
                f.visibility = Visibility::Public;
            else if (t.is_ident("external"))
                f.visibility = Visibility::External;
            else if (t.is_ident("internal"))
                f.visibility = Visibility::Internal;
            else if (t.is_ident("private"))
                f.visibility = Visibility::Private;
            else if (t.is_ident("payable"))
                f.mutability = Mutability::Payable;
            else if (t.is_ident("view"))
                f.mutability = Mutability::View;
            else if (t.is_ident("pure"))
                f.mutability = Mutability::Pure;
            else if (t.is_ident("virtual") || t.is_ident("override")) {
                advance();
                if (peek().is_punct("("))
                    skip_parenthesized();
                continue;
            } else if (t.is_ident("returns")) {
                advance();
                f.returns = parse_param_list();
                continue;
            } else if (t.is(TokenKind::Identifier) && !is_keyword(t.text)) {
                ModifierInvocation mi;
                mi.name = t.text;
                mi.span = t.span;
                advance();
                if (peek().is_punct("("))
                    skip_parenthesized();
                f.modifiers.push_back(std::move(mi));
                continue;
            } else {
                break;
            }
            advance();
        }
        if (peek().is_punct("{")) {
            SourcePos body_start = peek().span.begin;
            f.body = parse_block_statements();
            f.has_body = true;
            f.body_span = span_from(body_start);
        } else {
            accept_punct(";");
        }
        f.span = span_from(start);
        c.functions.push_back(std::move(f));
    }

    // ---- statements ----

    std::vector<StmtPtr> parse_block_statements() {
        std::vector<StmtPtr> out;
        accept_punct("{");
        while (!at_end() && !peek().is_punct("}"))
            out.push_back(parse_statement());
        accept_punct("}");
        return out;
    }

    StmtPtr parse_statement() {
        size_t start_tok = mark();
        SourcePos start = peek().span.begin;
        const Token& t = peek();

        auto make = [&](StmtKind k) {
            auto s = std::make_unique<Stmt>();
            s->kind = k;
            return s;
        };

        if (t.is_punct("{")) {
            auto s = make(StmtKind::Block);
            s->sub = parse_block_statements();
            s->span = span_from(start);
            return s;
        }
        if (t.is_punct(";")) {
            advance();
            auto s = make(StmtKind::Empty);
            s->span = span_from(start);
            return s;
        }
        if (t.is_ident("if")) {
            advance();
            auto s = make(StmtKind::If);
            if (!accept_punct("("))
                return opaque_stmt_from(start_tok);
            auto cond = parse_expression();
            if (!cond || !accept_punct(")"))
                return opaque_stmt_from(start_tok);
            s->exprs.push_back(std::move(cond));
            s->sub.push_back(parse_statement());
            if (accept_ident("else"))
                s->sub.push_back(parse_statement());
            s->span = span_from(start);
            return s;
        }
        if (t.is_ident("while")) {
            advance();
            auto s = make(StmtKind::While);
            if (!accept_punct("("))
                return opaque_stmt_from(start_tok);
            auto cond = parse_expression();
            if (!cond || !accept_punct(")"))
                return opaque_stmt_from(start_tok);
            s->exprs.push_back(std::move(cond));
            s->sub.push_back(parse_statement());
            s->span = span_from(start);
            return s;
        }
        if (t.is_ident("for")) {
            advance();
            auto s = make(StmtKind::For);
            if (!accept_punct("("))
                return opaque_stmt_from(start_tok);
            // init
            if (peek().is_punct(";")) {
                auto e = make(StmtKind::Empty);
                e->span = span_from(start);
                s->sub.push_back(std::move(e));
            } else {
                auto init = parse_simple_statement();
                if (!init)
                    return opaque_stmt_from(start_tok);
                s->sub.push_back(std::move(*init));
            }
            if (!accept_punct(";"))
                return opaque_stmt_from(start_tok);
            // condition
            if (!peek().is_punct(";")) {
                auto cond = parse_expression();
                if (!cond)
                    return opaque_stmt_from(start_tok);
                s->exprs.push_back(std::move(cond));
            }
            if (!accept_punct(";"))
                return opaque_stmt_from(start_tok);
            // post
            if (!peek().is_punct(")")) {
                auto post = parse_expression();
                if (!post)
                    return opaque_stmt_from(start_tok);
                s->exprs.push_back(std::move(post));
            }
            if (!accept_punct(")"))
                return opaque_stmt_from(start_tok);
            s->sub.push_back(parse_statement());
            s->span = span_from(start);
            return s;
        }
        if (t.is_ident("return")) {
            advance();
            auto s = make(StmtKind::Return);
            if (!peek().is_punct(";")) {
                auto e = parse_expression();
                if (!e)
                    return opaque_stmt_from(start_tok);
                s->exprs.push_back(std::move(e));
            }
            if (!accept_punct(";"))
                return opaque_stmt_from(start_tok);
            s->span = span_from(start);
            return s;
        }
        if (t.is_ident("require") || t.is_ident("assert")) {
            bool is_require = t.text == "require";
            advance();
            if (!peek().is_punct("(")) {
                return opaque_stmt_from(start_tok);
            }
            advance();
            auto s = make(is_require ? StmtKind::Require : StmtKind::Assert);
            auto cond = parse_expression();
            if (!cond)
                return opaque_stmt_from(start_tok);
            s->exprs.push_back(std::move(cond));
            if (is_require && accept_punct(",")) {
                auto msg = parse_expression();
                if (!msg)
                    return opaque_stmt_from(start_tok);
                s->exprs.push_back(std::move(msg));
            }
            if (!accept_punct(")") || !accept_punct(";"))
                return opaque_stmt_from(start_tok);
            s->span = span_from(start);
            return s;
        }
        if (t.is_ident("emit")) {
            advance();
            auto s = make(StmtKind::Emit);
            auto e = parse_expression();
            if (!e || !accept_punct(";"))
                return opaque_stmt_from(start_tok);
            s->exprs.push_back(std::move(e));
            s->span = span_from(start);
            return s;
        }
        if (t.is_ident("break") || t.is_ident("continue")) {
            bool is_break = t.text == "break";
            advance();
            if (!accept_punct(";"))
                return opaque_stmt_from(start_tok);
            auto s = make(is_break ? StmtKind::Break : StmtKind::Continue);
            s->span = span_from(start);
            return s;
        }
        if (t.is_ident("_") && peek(1).is_punct(";")) {
            advance();
            advance();
            auto s = make(StmtKind::Placeholder);
            s->span = span_from(start);
            return s;
        }

        auto simple = parse_simple_statement();
        if (simple && accept_punct(";")) {
            (*simple)->span = span_from(start);
            return std::move(*simple);
        }
        return opaque_stmt_from(start_tok);
    }

    // Variable declaration, tuple destructuring, or expression; no trailing ';'.
    std::optional<StmtPtr> parse_simple_statement() {
        size_t m = mark();
        SourcePos start = peek().span.begin;

        // Tuple destructuring declaration: (bool ok, ) = expr
        if (peek().is_punct("(")) {
            auto s = try_parse_tuple_decl();
            if (s) {
                (*s)->span = span_from(start);
                return s;
            }
            rewind(m);
        }

        // Local variable declaration: Type [location] name [= expr]
        {
            auto type = try_parse_type_text();
            if (type) {
                while (peek().is_ident("memory") || peek().is_ident("calldata") ||
                       peek().is_ident("storage"))
                    advance();
                if (peek().is(TokenKind::Identifier) && !is_keyword(peek().text)) {
                    auto s = std::make_unique<Stmt>();
                    s->kind = StmtKind::VarDecl;
                    s->type_text = *type;
                    s->text = advance().text;
                    if (accept_punct("=")) {
                        auto init = parse_expression();
                        if (!init) {
                            rewind(m);
                            return std::nullopt;
                        }
                        s->exprs.push_back(std::move(init));
                    }
                    if (peek().is_punct(";") || peek().is_punct(")")) {
                        s->span = span_from(start);
                        return s;
                    }
                }
            }
            rewind(m);
        }

        auto e = parse_expression();
        if (!e)
            return std::nullopt;
        auto s = std::make_unique<Stmt>();
        s->kind = StmtKind::ExprStmt;
        s->exprs.push_back(std::move(e));
        s->span = span_from(start);
        return s;
    }

    std::optional<StmtPtr> try_parse_tuple_decl() {
        size_t m = mark();
        if (!accept_punct("("))
            return std::nullopt;
        std::vector<std::string> names, types;
        while (!at_end() && !peek().is_punct(")")) {
            if (peek().is_punct(",")) {
                names.emplace_back();
                types.emplace_back();
                advance();
                continue;
            }
            auto type = try_parse_type_text();
            if (!type) {
                rewind(m);
                return std::nullopt;
            }
            while (peek().is_ident("memory") || peek().is_ident("calldata") ||
                   peek().is_ident("storage"))
                advance();
            if (!peek().is(TokenKind::Identifier) || is_keyword(peek().text)) {
                rewind(m);
                return std::nullopt;
            }
            types.push_back(*type);
            names.push_back(advance().text);
            if (!peek().is_punct(")") && !accept_punct(",")) {
                rewind(m);
                return std::nullopt;
            }
        }
        if (!accept_punct(")") || !accept_punct("=")) {
            rewind(m);
            return std::nullopt;
        }
        auto init = parse_expression();
        if (!init) {
            rewind(m);
            return std::nullopt;
        }
        if (names.empty()) {
            rewind(m);
            return std::nullopt;
        }
        auto s = std::make_unique<Stmt>();
        s->kind = StmtKind::TupleDecl;
        s->tuple_names = std::move(names);
        s->tuple_types = std::move(types);
        s->exprs.push_back(std::move(init));
        return s;
    }

    // ---- expressions (precedence climbing) ----

    ExprPtr parse_expression() { return parse_assignment(); }

    ExprPtr make_expr(ExprKind k, SourcePos start) {
        auto e = std::make_unique<Expr>();
        e->kind = k;
        e->span = span_from(start);
        return e;
    }

    ExprPtr parse_assignment() {
        SourcePos start = peek().span.begin;
        auto lhs = parse_binary(0);
        if (!lhs)
            return nullptr;
        const Token& t = peek();
        if (t.is_punct("=") || t.is_punct("+=") || t.is_punct("-=") || t.is_punct("*=") ||
            t.is_punct("/=") || t.is_punct("%=") || t.is_punct("|=") || t.is_punct("&=") ||
            t.is_punct("^=")) {
            std::string op = advance().text;
            auto rhs = parse_assignment();
            if (!rhs)
                return nullptr;
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::Assign;
            e->text = op;
            e->kids.push_back(std::move(lhs));
            e->kids.push_back(std::move(rhs));
            e->span = span_from(start);
            return e;
        }
        return lhs;
    }

    static int binary_prec(const Token& t) {
        if (t.kind != TokenKind::Punct)
            return -1;
        const std::string& p = t.text;
        if (p == "||") return 1;
        if (p == "&&") return 2;
        if (p == "|") return 3;
        if (p == "^") return 4;
        if (p == "&") return 5;
        if (p == "==" || p == "!=") return 6;
        if (p == "<" || p == ">" || p == "<=" || p == ">=") return 7;
        if (p == "<<" || p == ">>") return 8;
        if (p == "+" || p == "-") return 9;
        if (p == "*" || p == "/" || p == "%") return 10;
        if (p == "**") return 11;
        return -1;
    }

    ExprPtr parse_binary(int min_prec) {
        SourcePos start = peek().span.begin;
        auto lhs = parse_unary();
        if (!lhs)
            return nullptr;
        while (true) {
            int prec = binary_prec(peek());
            if (prec < 0 || prec < min_prec)
                break;
            std::string op = advance().text;
            auto rhs = parse_binary(prec + 1);
            if (!rhs)
                return nullptr;
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::Binary;
            e->text = op;
            e->kids.push_back(std::move(lhs));
            e->kids.push_back(std::move(rhs));
            e->span = span_from(start);
            lhs = std::move(e);
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        SourcePos start = peek().span.begin;
        const Token& t = peek();
        if (t.is_punct("!") || t.is_punct("-") || t.is_punct("~") || t.is_punct("++") ||
            t.is_punct("--")) {
            std::string op = advance().text;
            auto operand = parse_unary();
            if (!operand)
                return nullptr;
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::Unary;
            e->text = op;
            e->kids.push_back(std::move(operand));
            e->span = span_from(start);
            return e;
        }
        if (t.is_ident("new")) {
            advance();
            auto type = parse_postfix();
            if (!type)
                return nullptr;
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::New;
            e->kids.push_back(std::move(type));
            e->span = span_from(start);
            return e;
        }
        if (t.is_ident("delete")) {
            advance();
            auto target = parse_postfix();
            if (!target)
                return nullptr;
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::Unary;
            e->text = "delete";
            e->kids.push_back(std::move(target));
            e->span = span_from(start);
            return e;
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        SourcePos start = peek().span.begin;
        auto e = parse_primary();
        if (!e)
            return nullptr;
        while (true) {
            if (peek().is_punct(".")) {
                if (!peek(1).is(TokenKind::Identifier))
                    return nullptr;
                advance();
                auto member = std::make_unique<Expr>();
                member->kind = ExprKind::Member;
                member->text = advance().text;
                member->kids.push_back(std::move(e));
                member->span = span_from(start);
                e = std::move(member);
            } else if (peek().is_punct("[")) {
                advance();
                auto idx = parse_expression();
                if (!idx || !accept_punct("]"))
                    return nullptr;
                auto index = std::make_unique<Expr>();
                index->kind = ExprKind::Index;
                index->kids.push_back(std::move(e));
                index->kids.push_back(std::move(idx));
                index->span = span_from(start);
                e = std::move(index);
            } else if (peek().is_punct("{")) {
                // Call options `{value: x, gas: y}` must be followed by an
                // argument list; otherwise this '{' belongs to a block.
                size_t m = mark();
                auto options = try_parse_call_options();
                if (!options || !peek().is_punct("(")) {
                    rewind(m);
                    break;
                }
                auto call = parse_call_args(std::move(e), start);
                if (!call)
                    return nullptr;
                call->call_options = std::move(*options);
                e = std::move(call);
            } else if (peek().is_punct("(")) {
                auto call = parse_call_args(std::move(e), start);
                if (!call)
                    return nullptr;
                e = std::move(call);
            } else if (peek().is_punct("++") || peek().is_punct("--")) {
                auto post = std::make_unique<Expr>();
                post->kind = ExprKind::Unary;
                post->text = advance().text;
                post->postfix = true;
                post->kids.push_back(std::move(e));
                post->span = span_from(start);
                e = std::move(post);
            } else {
                break;
            }
        }
        return e;
    }

    std::optional<std::vector<std::pair<std::string, ExprPtr>>> try_parse_call_options() {
        if (!accept_punct("{"))
            return std::nullopt;
        std::vector<std::pair<std::string, ExprPtr>> options;
        while (!at_end() && !peek().is_punct("}")) {
            if (!peek().is(TokenKind::Identifier))
                return std::nullopt;
            std::string name = advance().text;
            if (!accept_punct(":"))
                return std::nullopt;
            auto value = parse_expression();
            if (!value)
                return std::nullopt;
            options.emplace_back(std::move(name), std::move(value));
            if (!accept_punct(","))
                break;
        }
        if (!accept_punct("}"))
            return std::nullopt;
        return options;
    }

    ExprPtr parse_call_args(ExprPtr callee, SourcePos start) {
        accept_punct("(");
        auto call = std::make_unique<Expr>();
        call->kind = ExprKind::Call;
        call->kids.push_back(std::move(callee));
        while (!at_end() && !peek().is_punct(")")) {
            auto arg = parse_expression();
            if (!arg)
                return nullptr;
            call->kids.push_back(std::move(arg));
            if (!accept_punct(","))
                break;
        }
        if (!accept_punct(")"))
            return nullptr;
        call->span = span_from(start);
        return call;
    }

    ExprPtr parse_primary() {
        SourcePos start = peek().span.begin;
        const Token& t = peek();
        if (t.is(TokenKind::Number)) {
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::NumberLit;
            e->text = advance().text;
            if (peek().is(TokenKind::Identifier) && is_denomination(peek().text))
                e->text += " " + advance().text;
            e->span = span_from(start);
            return e;
        }
        if (t.is(TokenKind::AddressLit)) {
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::AddressLit;
            e->text = advance().text;
            e->span = span_from(start);
            return e;
        }
        if (t.is(TokenKind::StringLit)) {
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::StringLit;
            e->text = advance().text;
            e->span = span_from(start);
            return e;
        }
        if (t.is_ident("true") || t.is_ident("false")) {
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::BoolLit;
            e->text = advance().text;
            e->span = span_from(start);
            return e;
        }
        if (t.is_punct("(")) {
            advance();
            std::vector<ExprPtr> elems;
            while (!at_end() && !peek().is_punct(")")) {
                if (peek().is_punct(",")) {
                    advance();
                    continue;
                }
                auto e = parse_expression();
                if (!e)
                    return nullptr;
                elems.push_back(std::move(e));
                if (!peek().is_punct(")") && !accept_punct(","))
                    return nullptr;
            }
            if (!accept_punct(")"))
                return nullptr;
            if (elems.size() == 1)
                return std::move(elems[0]);
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::Tuple;
            e->kids = std::move(elems);
            e->span = span_from(start);
            return e;
        }
        if (t.is(TokenKind::Identifier)) {
            // Elementary types and `payable` in call position act as casts.
            if (is_elementary_type(t.text) || t.is_ident("payable") || t.is_ident("type")) {
                auto e = std::make_unique<Expr>();
                e->kind = ExprKind::TypeName;
                e->text = advance().text;
                e->span = span_from(start);
                return e;
            }
            if (is_keyword(t.text) && t.text != "this" && t.text != "msg" && t.text != "block" &&
                t.text != "tx" && t.text != "abi" && t.text != "super")
                return nullptr;
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::Identifier;
            e->text = advance().text;
            e->span = span_from(start);
            return e;
        }
        return nullptr;
    }
};

}  // namespace parser_detail

// Parses one source file into a ContractUnit. Throws LexError only; grammar
// gaps become opaque statements/members with exact spans.
inline ContractUnit parse_source(const SourceFile& file) {
    auto tokens = lex(file);
    parser_detail::Parser p(file, std::move(tokens));
    return p.parse_unit();
}

inline ContractUnit parse_source_text(std::string path, std::string text) {
    return parse_source(SourceFile::from_text(std::move(path), std::move(text)));
}

}  // namespace lisa
