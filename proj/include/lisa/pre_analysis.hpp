// Syntactic pre-analysis over parsed units: function call graph, external
// call sites, state writes, guard facts, randomness and loop sites. All
// resolution is project-local and purely syntactic.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lisa/ast.hpp"
#include "lisa/parser.hpp"

namespace lisa {

class DuplicateContractName : public Error {
  public:
    explicit DuplicateContractName(const std::string& name)
        : Error("duplicate contract name in project: " + name) {}
};

enum class CallKind { LowLevelCall, DelegateCall, Send, Transfer, InterfaceCall };

inline const char* to_string(CallKind k) {
    switch (k) {
        case CallKind::LowLevelCall: return "low_level_call";
        case CallKind::DelegateCall: return "delegatecall";
        case CallKind::Send: return "send";
        case CallKind::Transfer: return "transfer";
        case CallKind::InterfaceCall: return "interface_call";
    }
    return "?";
}

struct ExternalCallSite {
    std::string function_id;
    Span span;
    CallKind kind = CallKind::InterfaceCall;
    bool checked_return = false;
    std::string callee_text;  // member name or qualified target, informational
};

struct CallEdge {
    std::string caller;
    std::string callee;
    Span site;
};

struct CallGraph {
    std::vector<std::string> nodes;  // fully qualified function ids, sorted
    std::vector<CallEdge> edges;
    std::vector<ExternalCallSite> external_call_sites;
};

struct StateWriteSite {
    std::string function_id;
    std::string variable;
    Span span;
    bool arithmetic = false;  // raw arithmetic in the written value (no safe-math wrapper)
};

enum class GuardKind { ReentrancyGuard, OwnerModifier, SenderRequire };

inline const char* to_string(GuardKind g) {
    switch (g) {
        case GuardKind::ReentrancyGuard: return "reentrancy_guard";
        case GuardKind::OwnerModifier: return "owner_modifier";
        case GuardKind::SenderRequire: return "sender_require";
    }
    return "?";
}

enum class RandomnessContext { Assignment, BranchCondition, GuardCondition, EmitArg, Other };

inline const char* to_string(RandomnessContext c) {
    switch (c) {
        case RandomnessContext::Assignment: return "assignment";
        case RandomnessContext::BranchCondition: return "branch_condition";
        case RandomnessContext::GuardCondition: return "guard_condition";
        case RandomnessContext::EmitArg: return "emit_arg";
        case RandomnessContext::Other: return "other";
    }
    return "?";
}

struct RandomnessSite {
    std::string function_id;
    Span span;
    RandomnessContext context = RandomnessContext::Other;
    std::string source_text;  // e.g. "block.timestamp", "blockhash"
};

struct LoopSite {
    std::string function_id;
    Span span;       // whole loop statement
    Span body_span;  // loop body
    bool dynamic_bound = false;
};

struct ParamStoreSite {
    std::string function_id;
    std::string parameter;
    Span span;
    bool validated = false;  // some require/assert in the function mentions the parameter
};

struct ProjectMetadata {
    uint32_t file_count = 0;
    uint32_t total_lines = 0;
    std::vector<std::string> pragma_versions;
};

struct FunctionInfo {
    std::string id;  // Contract.function[#n]
    std::string contract;
    std::string file;
    const FunctionDecl* decl = nullptr;
    const ContractDecl* owner = nullptr;
};

struct PreAnalysis {
    std::vector<ContractUnit> units;
    CallGraph call_graph;
    std::vector<StateWriteSite> state_write_sites;
    std::map<std::string, std::set<GuardKind>> guard_facts;  // function id -> guards
    std::vector<RandomnessSite> randomness_sites;
    std::vector<LoopSite> loop_sites;
    std::vector<ParamStoreSite> param_store_sites;
    std::map<std::string, std::set<std::string>> privileged_state_vars;  // contract -> vars
    ProjectMetadata metadata;

    // ---- lookups ----
    std::map<std::string, FunctionInfo> functions;  // id -> info

    const FunctionInfo* find_function(const std::string& id) const {
        auto it = functions.find(id);
        return it == functions.end() ? nullptr : &it->second;
    }

    const ContractUnit* find_unit(const std::string& path) const {
        for (const auto& u : units)
            if (u.file->path == path)
                return &u;
        return nullptr;
    }

    std::set<std::string> function_ids() const {
        std::set<std::string> out;
        for (const auto& [id, info] : functions)
            out.insert(id);
        return out;
    }

    bool has_guard(const std::string& fid, GuardKind g) const {
        auto it = guard_facts.find(fid);
        return it != guard_facts.end() && it->second.contains(g);
    }

    bool pragma_proven_below_0_8(const std::string& fid) const {
        const FunctionInfo* info = find_function(fid);
        if (!info)
            return false;
        const ContractUnit* unit = find_unit(info->file);
        return unit && unit->pragma_version && unit->pragma_version->proven_below_0_8();
    }

    std::vector<const ExternalCallSite*> calls_in(const std::string& fid) const {
        std::vector<const ExternalCallSite*> out;
        for (const auto& s : call_graph.external_call_sites)
            if (s.function_id == fid)
                out.push_back(&s);
        return out;
    }

    std::vector<const StateWriteSite*> writes_in(const std::string& fid) const {
        std::vector<const StateWriteSite*> out;
        for (const auto& s : state_write_sites)
            if (s.function_id == fid)
                out.push_back(&s);
        return out;
    }
};

namespace pre_detail {

inline bool is_builtin_global(std::string_view name) {
    return name == "msg" || name == "block" || name == "tx" || name == "abi" ||
           name == "this" || name == "super" || name == "now";
}

// Member functions of builtin types that are not external calls.
inline bool is_builtin_member_fn(std::string_view name) {
    return name == "push" || name == "pop" || name == "encode" || name == "encodePacked" ||
           name == "encodeWithSelector" || name == "encodeWithSignature" || name == "decode" ||
           name == "add" || name == "sub" || name == "mul" || name == "div" || name == "mod";
}

inline bool is_reentrancy_modifier_name(std::string_view name) {
    std::string n = to_lower(name);
    return n == "nonreentrant" || n == "noreentrant" || n == "noreentrancy" ||
           n == "nonreentrancy" || n == "reentrancyguard";
}

inline bool is_owner_modifier_name(std::string_view name) {
    return starts_with(to_lower(name), "only");
}

inline const Expr* leftmost_base(const Expr& e) {
    const Expr* cur = &e;
    while (cur->kind == ExprKind::Index || cur->kind == ExprKind::Member)
        cur = cur->kids[0].get();
    return cur;
}

inline bool expr_mentions_identifier(const Expr& e, std::string_view name) {
    bool found = false;
    walk_expr(e, [&](const Expr& x) {
        if (x.kind == ExprKind::Identifier && x.text == name)
            found = true;
    });
    return found;
}

inline bool expr_contains_arithmetic(const Expr& e) {
    bool found = false;
    walk_expr(e, [&](const Expr& x) {
        if (x.kind == ExprKind::Binary &&
            (x.text == "+" || x.text == "-" || x.text == "*" || x.text == "/" ||
             x.text == "%" || x.text == "**"))
            found = true;
    });
    return found;
}

// Safe-math style wrapper: the value expression is a member call to
// add/sub/mul/div/mod.
inline bool is_safe_math_call(const Expr& e) {
    return e.kind == ExprKind::Call && !e.kids.empty() &&
           e.kids[0]->kind == ExprKind::Member && is_builtin_member_fn(e.kids[0]->text) &&
           (e.kids[0]->text == "add" || e.kids[0]->text == "sub" || e.kids[0]->text == "mul" ||
            e.kids[0]->text == "div" || e.kids[0]->text == "mod");
}

// Local declarations (with positions) inside a function body, used for
// shadow-aware state-variable resolution.
struct LocalScope {
    std::vector<std::pair<std::string, uint32_t>> decls;  // name, decl offset

    void add(const std::string& name, uint32_t offset) {
        if (!name.empty())
            decls.emplace_back(name, offset);
    }
    bool shadows(std::string_view name, uint32_t use_offset) const {
        for (const auto& [n, off] : decls)
            if (n == name && off <= use_offset)
                return true;
        return false;
    }
};

struct FunctionIndexEntry {
    const ContractDecl* contract = nullptr;
    const FunctionDecl* fn = nullptr;
    std::string id;
};

struct ProjectIndex {
    std::map<std::string, const ContractDecl*> contracts;
    // contract name -> function name -> id
    std::map<std::string, std::map<std::string, std::string>> fn_by_name;

    // Resolves a function name within contract `c` (direct base lookup only).
    std::optional<std::string> resolve(const ContractDecl& c, const std::string& name) const {
        auto cit = fn_by_name.find(c.name);
        if (cit != fn_by_name.end()) {
            auto fit = cit->second.find(name);
            if (fit != cit->second.end())
                return fit->second;
        }
        for (const auto& base : c.bases) {
            auto bit = fn_by_name.find(base);
            if (bit != fn_by_name.end()) {
                auto fit = bit->second.find(name);
                if (fit != bit->second.end())
                    return fit->second;
            }
        }
        return std::nullopt;
    }

    // State variable lookup with direct base fallback.
    const StateVarDecl* find_state_var(const ContractDecl& c, std::string_view name) const {
        if (const auto* v = c.find_state_var(name))
            return v;
        for (const auto& base : c.bases) {
            auto bit = contracts.find(base);
            if (bit != contracts.end())
                if (const auto* v = bit->second->find_state_var(name))
                    return v;
        }
        return nullptr;
    }
};

// Classification of one call expression.
struct CallClass {
    bool external = false;
    CallKind kind = CallKind::InterfaceCall;
    std::optional<std::string> internal_target;  // resolved function id
    std::string callee_text;
    bool is_relevant = false;  // true if this is a tracked call at all
};

inline CallClass classify_call(const Expr& call, const ContractDecl& contract,
                               const ProjectIndex& index) {
    CallClass out;
    if (call.kind != ExprKind::Call || call.kids.empty())
        return out;
    const Expr& callee = *call.kids[0];
    size_t arg_count = call.kids.size() - 1;

    if (callee.kind == ExprKind::Identifier) {
        // Direct call: resolve within the contract (and direct bases).
        if (auto target = index.resolve(contract, callee.text)) {
            out.is_relevant = true;
            out.internal_target = target;
            out.callee_text = callee.text;
        }
        // Unresolved direct identifiers (builtins like keccak256, events,
        // internal helpers we did not parse) are not call sites.
        return out;
    }
    if (callee.kind != ExprKind::Member)
        return out;  // casts, nested calls etc.

    const std::string& member = callee.text;
    const Expr& base = *callee.kids[0];

    if (base.kind == ExprKind::Identifier && is_builtin_global(base.text)) {
        // msg.*, abi.*, this.* ... -- only `this.f()` is an external dispatch.
        if (base.text == "this") {
            out.is_relevant = true;
            out.external = true;
            out.kind = CallKind::InterfaceCall;
            out.callee_text = "this." + member;
        }
        return out;
    }

    if (member == "call" || member == "staticcall") {
        out.is_relevant = true;
        out.external = true;
        out.kind = CallKind::LowLevelCall;
        out.callee_text = member;
        return out;
    }
    if (member == "delegatecall") {
        out.is_relevant = true;
        out.external = true;
        out.kind = CallKind::DelegateCall;
        out.callee_text = member;
        return out;
    }
    if (member == "send" && arg_count == 1) {
        out.is_relevant = true;
        out.external = true;
        out.kind = CallKind::Send;
        out.callee_text = member;
        return out;
    }
    if (member == "transfer" && arg_count == 1) {
        out.is_relevant = true;
        out.external = true;
        out.kind = CallKind::Transfer;
        out.callee_text = member;
        return out;
    }
    if (is_builtin_member_fn(member))
        return out;  // push/pop/abi helpers/safe-math wrappers

    // Qualified call on a project contract or library: internal edge.
    if (base.kind == ExprKind::Identifier) {
        auto cit = index.contracts.find(base.text);
        if (cit != index.contracts.end()) {
            auto target = index.resolve(*cit->second, member);
            if (target) {
                out.is_relevant = true;
                out.internal_target = target;
                out.callee_text = base.text + "." + member;
                return out;
            }
        }
    }

    // Anything else is a call into code outside the project.
    out.is_relevant = true;
    out.external = true;
    out.kind = CallKind::InterfaceCall;
    out.callee_text = member;
    return out;
}

// The randomness source forms: block.<attr>, blockhash(...).
inline bool is_randomness_source(const Expr& e, std::string* text_out) {
    if (e.kind == ExprKind::Member && e.kids[0]->kind == ExprKind::Identifier &&
        e.kids[0]->text == "block") {
        static const std::set<std::string> attrs = {"timestamp", "number",  "difficulty",
                                                    "prevrandao", "coinbase", "basefee"};
        if (attrs.contains(e.text)) {
            if (text_out)
                *text_out = "block." + e.text;
            return true;
        }
    }
    if (e.kind == ExprKind::Call && !e.kids.empty() &&
        e.kids[0]->kind == ExprKind::Identifier && e.kids[0]->text == "blockhash") {
        if (text_out)
            *text_out = "blockhash";
        return true;
    }
    return false;
}

// Records outermost randomness sources in `e`; does not descend into a match.
template <typename Fn>
void find_randomness(const Expr& e, Fn&& record) {
    std::string text;
    if (is_randomness_source(e, &text)) {
        record(e.span, text);
        return;
    }
    for (const auto& k : e.kids)
        find_randomness(*k, record);
    for (const auto& [name, value] : e.call_options)
        find_randomness(*value, record);
}

}  // namespace pre_detail

// Builds the project-wide pre-analysis. Throws DuplicateContractName.
inline PreAnalysis build_pre_analysis(std::vector<ContractUnit> units) {
    using namespace pre_detail;
    PreAnalysis pre;

    // Deterministic order regardless of input order.
    std::sort(units.begin(), units.end(), [](const ContractUnit& a, const ContractUnit& b) {
        return a.file->path < b.file->path;
    });
    pre.units = std::move(units);

    // ---- project index ----
    ProjectIndex index;
    for (const auto& unit : pre.units) {
        pre.metadata.file_count += 1;
        pre.metadata.total_lines += unit.file->line_count();
        if (!unit.pragma_text.empty())
            pre.metadata.pragma_versions.push_back(unit.pragma_text);
        for (const auto& c : unit.contracts) {
            if (index.contracts.contains(c.name))
                throw DuplicateContractName(c.name);
            index.contracts[c.name] = &c;
        }
    }
    for (const auto& unit : pre.units) {
        for (const auto& c : unit.contracts) {
            std::map<std::string, int> name_counts;
            for (const auto& f : c.functions) {
                std::string id = c.name + "." + f.name;
                int n = ++name_counts[f.name];
                if (n > 1)
                    id += "#" + std::to_string(n);
                index.fn_by_name[c.name].emplace(f.name, c.name + "." + f.name);
                FunctionInfo info;
                info.id = id;
                info.contract = c.name;
                info.file = unit.file->path;
                info.decl = &f;
                info.owner = &c;
                pre.functions.emplace(id, std::move(info));
                pre.call_graph.nodes.push_back(id);
            }
        }
    }
    std::sort(pre.call_graph.nodes.begin(), pre.call_graph.nodes.end());

    // ---- per-function facts ----
    for (const auto& unit : pre.units) {
        for (const auto& c : unit.contracts) {
            std::map<std::string, int> name_counts;
            for (const auto& f : c.functions) {
                std::string id = c.name + "." + f.name;
                int n = ++name_counts[f.name];
                if (n > 1)
                    id += "#" + std::to_string(n);

                // Local scope: parameters + declared locals.
                LocalScope locals;
                for (const auto& p : f.params)
                    locals.add(p.name, f.span.begin.offset);
                for (const auto& r : f.returns)
                    locals.add(r.name, f.span.begin.offset);
                walk_stmts(f.body, [&](const Stmt& s) {
                    if (s.kind == StmtKind::VarDecl)
                        locals.add(s.text, s.span.begin.offset);
                    if (s.kind == StmtKind::TupleDecl)
                        for (const auto& nm : s.tuple_names)
                            locals.add(nm, s.span.begin.offset);
                });

                auto resolve_state_var =
                    [&](const Expr& lhs_base, uint32_t use_offset) -> const StateVarDecl* {
                    if (lhs_base.kind != ExprKind::Identifier)
                        return nullptr;
                    if (locals.shadows(lhs_base.text, use_offset))
                        return nullptr;
                    return index.find_state_var(c, lhs_base.text);
                };

                // --- guard facts from modifiers ---
                for (const auto& m : f.modifiers) {
                    if (is_reentrancy_modifier_name(m.name))
                        pre.guard_facts[id].insert(GuardKind::ReentrancyGuard);
                    else if (is_owner_modifier_name(m.name))
                        pre.guard_facts[id].insert(GuardKind::OwnerModifier);
                }

                // --- statement walk ---
                walk_stmts(f.body, [&](const Stmt& s) {
                    // guard facts from requires
                    if (s.kind == StmtKind::Require || s.kind == StmtKind::Assert) {
                        const Expr& cond = *s.exprs[0];
                        bool mentions_sender = false;
                        walk_expr(cond, [&](const Expr& x) {
                            if (x.kind == ExprKind::Member && x.text == "sender" &&
                                x.kids[0]->kind == ExprKind::Identifier && x.kids[0]->text == "msg")
                                mentions_sender = true;
                        });
                        if (mentions_sender)
                            pre.guard_facts[id].insert(GuardKind::SenderRequire);
                        // mutex-style reentrancy lock: require(!lockedStateVar)
                        if (cond.kind == ExprKind::Unary && cond.text == "!" &&
                            cond.kids[0]->kind == ExprKind::Identifier) {
                            const StateVarDecl* v =
                                resolve_state_var(*cond.kids[0], cond.span.begin.offset);
                            if (v && starts_with(v->type_text, "bool"))
                                pre.guard_facts[id].insert(GuardKind::ReentrancyGuard);
                        }
                    }

                    // loops
                    if (s.kind == StmtKind::For || s.kind == StmtKind::While) {
                        LoopSite loop;
                        loop.function_id = id;
                        loop.span = s.span;
                        loop.body_span = s.sub.empty() ? s.span : s.sub.back()->span;
                        const Expr* cond = nullptr;
                        if (s.kind == StmtKind::While)
                            cond = s.exprs.empty() ? nullptr : s.exprs[0].get();
                        else
                            cond = s.exprs.empty() ? nullptr : s.exprs[0].get();
                        if (cond) {
                            bool dynamic = false;
                            walk_expr(*cond, [&](const Expr& x) {
                                if (x.kind == ExprKind::Member && x.text == "length")
                                    dynamic = true;
                                if (x.kind == ExprKind::Identifier &&
                                    !locals.shadows(x.text, x.span.begin.offset) &&
                                    index.find_state_var(c, x.text))
                                    dynamic = true;
                            });
                            loop.dynamic_bound = dynamic;
                        }
                        pre.loop_sites.push_back(std::move(loop));
                    }

                    // randomness, by statement context
                    RandomnessContext ctx = RandomnessContext::Other;
                    std::vector<const Expr*> roots;
                    switch (s.kind) {
                        case StmtKind::VarDecl:
                        case StmtKind::TupleDecl:
                            ctx = RandomnessContext::Assignment;
                            for (const auto& e : s.exprs)
                                roots.push_back(e.get());
                            break;
                        case StmtKind::If:
                        case StmtKind::While:
                        case StmtKind::For:
                            ctx = RandomnessContext::BranchCondition;
                            for (const auto& e : s.exprs)
                                roots.push_back(e.get());
                            break;
                        case StmtKind::Require:
                        case StmtKind::Assert:
                            ctx = RandomnessContext::GuardCondition;
                            roots.push_back(s.exprs[0].get());
                            break;
                        case StmtKind::Emit:
                            ctx = RandomnessContext::EmitArg;
                            for (const auto& e : s.exprs)
                                roots.push_back(e.get());
                            break;
                        case StmtKind::ExprStmt: {
                            const Expr& e = *s.exprs[0];
                            ctx = e.kind == ExprKind::Assign ? RandomnessContext::Assignment
                                                             : RandomnessContext::Other;
                            roots.push_back(&e);
                            break;
                        }
                        case StmtKind::Return:
                            ctx = RandomnessContext::Other;
                            for (const auto& e : s.exprs)
                                roots.push_back(e.get());
                            break;
                        default:
                            break;
                    }
                    for (const Expr* root : roots)
                        find_randomness(*root, [&](Span span, const std::string& text) {
                            pre.randomness_sites.push_back({id, span, ctx, text});
                        });

                    // state writes + calls live in expressions of this statement
                    for (const auto& root : s.exprs) {
                        walk_expr(*root, [&](const Expr& x) {
                            if (x.kind == ExprKind::Assign) {
                                const Expr* base = leftmost_base(*x.kids[0]);
                                const StateVarDecl* v =
                                    resolve_state_var(*base, x.span.begin.offset);
                                if (v) {
                                    bool arith = x.text != "=";
                                    const Expr& rhs = *x.kids[1];
                                    if (!arith && !is_safe_math_call(rhs) &&
                                        expr_contains_arithmetic(rhs))
                                        arith = true;
                                    if (x.text != "=" &&
                                        (x.text == "|=" || x.text == "&=" || x.text == "^="))
                                        arith = false;
                                    pre.state_write_sites.push_back(
                                        {id, v->name, x.span, arith});
                                }
                            }
                            if (x.kind == ExprKind::Unary &&
                                (x.text == "++" || x.text == "--" || x.text == "delete")) {
                                const Expr* base = leftmost_base(*x.kids[0]);
                                const StateVarDecl* v =
                                    resolve_state_var(*base, x.span.begin.offset);
                                if (v)
                                    pre.state_write_sites.push_back(
                                        {id, v->name, x.span, x.text != "delete"});
                            }
                            // push/pop mutate state arrays
                            if (x.kind == ExprKind::Call && !x.kids.empty() &&
                                x.kids[0]->kind == ExprKind::Member &&
                                (x.kids[0]->text == "push" || x.kids[0]->text == "pop")) {
                                const Expr* base = leftmost_base(*x.kids[0]->kids[0]);
                                const StateVarDecl* v =
                                    resolve_state_var(*base, x.span.begin.offset);
                                if (v)
                                    pre.state_write_sites.push_back({id, v->name, x.span, false});
                            }
                            if (x.kind == ExprKind::Call) {
                                CallClass cls = classify_call(x, c, index);
                                if (cls.is_relevant) {
                                    if (cls.internal_target) {
                                        pre.call_graph.edges.push_back(
                                            {id, *cls.internal_target, x.span});
                                    } else if (cls.external) {
                                        ExternalCallSite site;
                                        site.function_id = id;
                                        site.span = x.span;
                                        site.kind = cls.kind;
                                        site.callee_text = cls.callee_text;
                                        pre.call_graph.external_call_sites.push_back(
                                            std::move(site));
                                    }
                                }
                            }
                        });
                    }
                });

                // --- checked_return for this function's external sites ---
                {
                    // Bound results: variable name -> offset of binding whose init
                    // contains the call site.
                    struct Binding {
                        std::string name;
                        Span init_span;
                    };
                    std::vector<Binding> bindings;
                    walk_stmts(f.body, [&](const Stmt& s) {
                        if ((s.kind == StmtKind::VarDecl || s.kind == StmtKind::TupleDecl) &&
                            !s.exprs.empty()) {
                            if (s.kind == StmtKind::VarDecl)
                                bindings.push_back({s.text, s.exprs[0]->span});
                            else
                                for (const auto& nm : s.tuple_names)
                                    if (!nm.empty())
                                        bindings.push_back({nm, s.exprs[0]->span});
                        }
                    });
                    std::vector<const Expr*> check_conditions;
                    std::vector<const Stmt*> check_stmts;
                    walk_stmts(f.body, [&](const Stmt& s) {
                        if (s.kind == StmtKind::Require || s.kind == StmtKind::Assert ||
                            s.kind == StmtKind::If)
                            check_stmts.push_back(&s);
                    });

                    for (auto& site : pre.call_graph.external_call_sites) {
                        if (site.function_id != id)
                            continue;
                        bool checked = false;
                        for (const Stmt* chk : check_stmts) {
                            const Expr& cond = *chk->exprs[0];
                            // the call itself (or under one leading '!') is the condition
                            const Expr* root = &cond;
                            if (root->kind == ExprKind::Unary && root->text == "!")
                                root = root->kids[0].get();
                            if (root->span == site.span) {
                                checked = true;
                                break;
                            }
                        }
                        if (!checked) {
                            for (const auto& b : bindings) {
                                if (!b.init_span.contains(site.span))
                                    continue;
                                for (const Stmt* chk : check_stmts) {
                                    if (expr_mentions_identifier(*chk->exprs[0], b.name)) {
                                        checked = true;
                                        break;
                                    }
                                }
                                if (checked)
                                    break;
                            }
                        }
                        site.checked_return = checked;
                    }
                }

                // --- parameter store sites ---
                {
                    std::vector<const Stmt*> validations;
                    walk_stmts(f.body, [&](const Stmt& s) {
                        if (s.kind == StmtKind::Require || s.kind == StmtKind::Assert)
                            validations.push_back(&s);
                    });
                    for (const auto& p : f.params) {
                        if (p.name.empty())
                            continue;
                        bool is_addr_or_amount = starts_with(p.type_text, "address") ||
                                                 starts_with(p.type_text, "uint") ||
                                                 starts_with(p.type_text, "int");
                        if (!is_addr_or_amount)
                            continue;
                        bool validated = false;
                        for (const Stmt* v : validations)
                            if (expr_mentions_identifier(*v->exprs[0], p.name))
                                validated = true;
                        // stored into state?
                        for (const auto& w : pre.state_write_sites) {
                            if (w.function_id != id)
                                continue;
                            // find the assignment expression again to test RHS mention
                            bool stores_param = false;
                            walk_stmt_exprs(f.body, [&](const Stmt&, const Expr& x) {
                                if (x.span == w.span) {
                                    if (x.kind == ExprKind::Assign &&
                                        expr_mentions_identifier(*x.kids[1], p.name))
                                        stores_param = true;
                                    if (x.kind == ExprKind::Call &&
                                        x.kids.size() > 1 &&
                                        expr_mentions_identifier(*x.kids[1], p.name))
                                        stores_param = true;  // push(param)
                                }
                            });
                            if (stores_param) {
                                pre.param_store_sites.push_back({id, p.name, w.span, validated});
                                break;
                            }
                        }
                    }
                }

                // --- privileged state vars (written in constructor) ---
                if (f.is_constructor) {
                    for (const auto& w : pre.state_write_sites)
                        if (w.function_id == id)
                            pre.privileged_state_vars[c.name].insert(w.variable);
                }
            }
        }
    }

    // Deterministic site order: by file path handled via unit order; within a
    // project, order by (function id, offset).
    auto site_less = [](const auto& a, const auto& b) {
        return std::tie(a.function_id, a.span.begin.offset) <
               std::tie(b.function_id, b.span.begin.offset);
    };
    std::stable_sort(pre.call_graph.external_call_sites.begin(),
                     pre.call_graph.external_call_sites.end(), site_less);
    std::stable_sort(pre.state_write_sites.begin(), pre.state_write_sites.end(), site_less);
    std::stable_sort(pre.randomness_sites.begin(), pre.randomness_sites.end(), site_less);
    std::stable_sort(pre.loop_sites.begin(), pre.loop_sites.end(), site_less);
    std::stable_sort(pre.param_store_sites.begin(), pre.param_store_sites.end(), site_less);
    std::stable_sort(pre.call_graph.edges.begin(), pre.call_graph.edges.end(),
                     [](const CallEdge& a, const CallEdge& b) {
                         return std::tie(a.caller, a.callee, a.site.begin.offset) <
                                std::tie(b.caller, b.callee, b.site.begin.offset);
                     });
    return pre;
}

// ---- trace resolution (merger stage 1 support) ----

enum class TraceFailure { None, MissingFile, UnknownFunction, SpanOutOfRange };

inline const char* to_string(TraceFailure f) {
    switch (f) {
        case TraceFailure::None: return "ok";
        case TraceFailure::MissingFile: return "missing_file";
        case TraceFailure::UnknownFunction: return "unknown_function";
        case TraceFailure::SpanOutOfRange: return "span_out_of_range";
    }
    return "?";
}

struct TraceResolution {
    bool resolved = false;
    TraceFailure reason = TraceFailure::None;
    const FunctionInfo* function = nullptr;
    std::vector<const Stmt*> statements;  // innermost statement covering each span
};

struct TraceRef {
    std::string file;
    std::string function_id;
    std::vector<Span> spans;
};

inline const Stmt* innermost_statement(const std::vector<StmtPtr>& body, const Span& span) {
    const Stmt* best = nullptr;
    walk_stmts(body, [&](const Stmt& s) {
        if (s.span.contains(span)) {
            if (!best || best->span.contains(s.span))
                best = &s;
        }
    });
    return best;
}

inline TraceResolution resolve_trace(const TraceRef& trace, const PreAnalysis& pre) {
    TraceResolution res;
    if (!pre.find_unit(trace.file)) {
        res.reason = TraceFailure::MissingFile;
        return res;
    }
    const FunctionInfo* fn = pre.find_function(trace.function_id);
    if (!fn || fn->file != trace.file) {
        res.reason = TraceFailure::UnknownFunction;
        return res;
    }
    for (const Span& span : trace.spans) {
        if (!fn->decl->span.contains(span)) {
            res.reason = TraceFailure::SpanOutOfRange;
            return res;
        }
        res.statements.push_back(innermost_statement(fn->decl->body, span));
    }
    res.resolved = true;
    res.function = fn;
    return res;
}

}  // namespace lisa
