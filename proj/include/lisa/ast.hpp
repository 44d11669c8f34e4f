// AST for the supported Solidity subset. Constructs outside the subset are
// kept as opaque statements with exact spans so downstream passes stay sound.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lisa/semver.hpp"
#include "lisa/source.hpp"

namespace lisa {

enum class ExprKind {
    Identifier,
    Member,      // kids[0] = base, text = member name
    Index,       // kids[0] = base, kids[1] = index
    Call,        // kids[0] = callee, kids[1..] = args; call_options for {value: ...}
    Binary,      // text = operator, kids[0], kids[1]
    Unary,       // text = operator ("!", "-", "~", "++", "--"); postfix flag for ++/--
    Assign,      // text = operator ("=", "+=", ...), kids[0] = lhs, kids[1] = rhs
    NumberLit,   // text = literal (unit suffix folded in)
    AddressLit,
    StringLit,
    BoolLit,
    Tuple,       // kids = elements (empty slots omitted)
    New,         // kids[0] = type expression
    TypeName,    // elementary or user type used in expression position (casts)
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    ExprKind kind{};
    Span span{};
    std::string text;
    std::vector<ExprPtr> kids;
    std::vector<std::pair<std::string, ExprPtr>> call_options;  // e.g. {value: bal}
    bool postfix = false;
};

enum class StmtKind {
    Block,        // sub = statements
    If,           // exprs[0] = condition, sub[0] = then, optional sub[1] = else
    For,          // sub[0] = init (may be Empty), exprs[0] = cond?, exprs[1] = post?, sub.back() = body
    While,        // exprs[0] = condition, sub[0] = body
    Return,       // optional exprs[0]
    Require,      // exprs[0] = condition, optional exprs[1] = message
    Assert,       // exprs[0] = condition
    Emit,         // exprs[0] = event call
    VarDecl,      // text = name, type_text, optional exprs[0] = init
    TupleDecl,    // tuple_names/tuple_types (empty string = skipped slot), exprs[0] = init
    ExprStmt,     // exprs[0]
    Placeholder,  // `_;` inside modifier bodies
    Break,
    Continue,
    Empty,        // bare `;` (also empty for-init slot)
    Opaque,       // unparsed construct; text = raw source slice
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
    StmtKind kind{};
    Span span{};
    std::string text;
    std::string type_text;
    std::vector<std::string> tuple_names;
    std::vector<std::string> tuple_types;
    std::vector<ExprPtr> exprs;
    std::vector<StmtPtr> sub;
};

struct Param {
    std::string type_text;
    std::string location;  // memory / calldata / storage, or empty
    std::string name;      // may be empty
    Span span{};
};

enum class Visibility { Public, External, Internal, Private };
enum class Mutability { NonPayable, Payable, View, Pure };

inline const char* to_string(Visibility v) {
    switch (v) {
        case Visibility::Public: return "public";
        case Visibility::External: return "external";
        case Visibility::Internal: return "internal";
        case Visibility::Private: return "private";
    }
    return "?";
}

inline const char* to_string(Mutability m) {
    switch (m) {
        case Mutability::NonPayable: return "nonpayable";
        case Mutability::Payable: return "payable";
        case Mutability::View: return "view";
        case Mutability::Pure: return "pure";
    }
    return "?";
}

struct ModifierInvocation {
    std::string name;
    Span span{};
};

struct FunctionDecl {
    std::string name;  // "constructor", "receive", "fallback" for special functions
    bool is_constructor = false;
    Visibility visibility = Visibility::Public;
    Mutability mutability = Mutability::NonPayable;
    std::vector<ModifierInvocation> modifiers;
    std::vector<Param> params;
    std::vector<Param> returns;
    std::vector<StmtPtr> body;  // empty when body is absent (interface / abstract)
    bool has_body = false;
    Span span{};
    Span body_span{};
};

struct ModifierDecl {
    std::string name;
    std::vector<Param> params;
    std::vector<StmtPtr> body;
    Span span{};
};

struct StateVarDecl {
    std::string type_text;
    std::string name;
    std::string visibility;  // raw keyword or empty
    bool is_constant = false;
    ExprPtr init;            // may be null
    Span span{};
};

struct EventDecl {
    std::string name;
    std::vector<Param> params;
    Span span{};
};

enum class ContractKind { Contract, Interface, Library };

inline const char* to_string(ContractKind k) {
    switch (k) {
        case ContractKind::Contract: return "contract";
        case ContractKind::Interface: return "interface";
        case ContractKind::Library: return "library";
    }
    return "?";
}

struct ContractDecl {
    std::string name;
    ContractKind kind = ContractKind::Contract;
    std::vector<std::string> bases;
    std::vector<StateVarDecl> state_vars;
    std::vector<FunctionDecl> functions;
    std::vector<ModifierDecl> modifiers;
    std::vector<EventDecl> events;
    Span span{};

    const StateVarDecl* find_state_var(std::string_view name_) const {
        for (const auto& v : state_vars)
            if (v.name == name_)
                return &v;
        return nullptr;
    }
};

struct ContractUnit {
    SourceFilePtr file;
    std::optional<VersionRange> pragma_version;
    std::string pragma_text;  // raw constraint text, empty when absent
    std::vector<ContractDecl> contracts;
};

// ---- structural serialization (tests, `explain`, debugging) ----

namespace detail {

inline nlohmann::json span_json(const Span& s) {
    return {{"bl", s.begin.line}, {"bc", s.begin.column}, {"el", s.end.line}, {"ec", s.end.column}};
}

inline nlohmann::json expr_json(const Expr& e, bool with_spans) {
    nlohmann::json j;
    j["kind"] = static_cast<int>(e.kind);
    if (!e.text.empty())
        j["text"] = e.text;
    if (e.postfix)
        j["postfix"] = true;
    if (with_spans)
        j["span"] = span_json(e.span);
    if (!e.kids.empty()) {
        auto arr = nlohmann::json::array();
        for (const auto& k : e.kids)
            arr.push_back(expr_json(*k, with_spans));
        j["kids"] = arr;
    }
    if (!e.call_options.empty()) {
        auto arr = nlohmann::json::array();
        for (const auto& [name, value] : e.call_options)
            arr.push_back({{"name", name}, {"value", expr_json(*value, with_spans)}});
        j["options"] = arr;
    }
    return j;
}

inline nlohmann::json stmt_json(const Stmt& s, bool with_spans) {
    nlohmann::json j;
    j["kind"] = static_cast<int>(s.kind);
    // Opaque raw text depends on surrounding whitespace; keep structure only.
    if (!s.text.empty() && s.kind != StmtKind::Opaque)
        j["text"] = s.text;
    if (!s.type_text.empty())
        j["type"] = s.type_text;
    if (!s.tuple_names.empty())
        j["tuple_names"] = s.tuple_names;
    if (!s.tuple_types.empty())
        j["tuple_types"] = s.tuple_types;
    if (with_spans)
        j["span"] = span_json(s.span);
    if (!s.exprs.empty()) {
        auto arr = nlohmann::json::array();
        for (const auto& e : s.exprs)
            arr.push_back(expr_json(*e, with_spans));
        j["exprs"] = arr;
    }
    if (!s.sub.empty()) {
        auto arr = nlohmann::json::array();
        for (const auto& c : s.sub)
            arr.push_back(stmt_json(*c, with_spans));
        j["sub"] = arr;
    }
    return j;
}

}  // namespace detail

inline nlohmann::json unit_to_json(const ContractUnit& unit, bool with_spans = true) {
    nlohmann::json j;
    j["pragma"] = unit.pragma_text;
    auto contracts = nlohmann::json::array();
    for (const auto& c : unit.contracts) {
        nlohmann::json cj;
        cj["name"] = c.name;
        cj["kind"] = to_string(c.kind);
        cj["bases"] = c.bases;
        auto vars = nlohmann::json::array();
        for (const auto& v : c.state_vars) {
            nlohmann::json vj{{"type", v.type_text}, {"name", v.name}};
            if (!v.visibility.empty())
                vj["visibility"] = v.visibility;
            if (v.is_constant)
                vj["constant"] = true;
            if (v.init)
                vj["init"] = detail::expr_json(*v.init, with_spans);
            if (with_spans)
                vj["span"] = detail::span_json(v.span);
            vars.push_back(vj);
        }
        cj["state_vars"] = vars;
        auto fns = nlohmann::json::array();
        for (const auto& f : c.functions) {
            nlohmann::json fj;
            fj["name"] = f.name;
            fj["visibility"] = to_string(f.visibility);
            fj["mutability"] = to_string(f.mutability);
            auto mods = nlohmann::json::array();
            for (const auto& m : f.modifiers)
                mods.push_back(m.name);
            fj["modifiers"] = mods;
            auto ps = nlohmann::json::array();
            for (const auto& p : f.params)
                ps.push_back({{"type", p.type_text}, {"name", p.name}});
            fj["params"] = ps;
            if (with_spans)
                fj["span"] = detail::span_json(f.span);
            auto body = nlohmann::json::array();
            for (const auto& s : f.body)
                body.push_back(detail::stmt_json(*s, with_spans));
            fj["body"] = body;
            fns.push_back(fj);
        }
        cj["functions"] = fns;
        auto mods = nlohmann::json::array();
        for (const auto& m : c.modifiers) {
            nlohmann::json mj{{"name", m.name}};
            auto body = nlohmann::json::array();
            for (const auto& s : m.body)
                body.push_back(detail::stmt_json(*s, with_spans));
            mj["body"] = body;
            mods.push_back(mj);
        }
        cj["modifiers"] = mods;
        contracts.push_back(cj);
    }
    j["contracts"] = contracts;
    return j;
}

// ---- traversal helpers ----

template <typename Fn>
void walk_expr(const Expr& e, Fn&& fn) {
    fn(e);
    for (const auto& k : e.kids)
        walk_expr(*k, fn);
    for (const auto& [name, value] : e.call_options)
        walk_expr(*value, fn);
}

template <typename Fn>
void walk_stmts(const std::vector<StmtPtr>& stmts, Fn&& fn) {
    for (const auto& s : stmts) {
        fn(*s);
        walk_stmts(s->sub, fn);
    }
}

// Visits every expression in a statement tree together with its owning statement.
template <typename Fn>
void walk_stmt_exprs(const std::vector<StmtPtr>& stmts, Fn&& fn) {
    walk_stmts(stmts, [&](const Stmt& s) {
        for (const auto& e : s.exprs)
            walk_expr(*e, [&](const Expr& x) { fn(s, x); });
    });
}

}  // namespace lisa
