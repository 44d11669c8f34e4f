// Syntactic feature tags shared by the knowledge base (template metadata,
// plausibility scoring) and the scheduler (routing triggers).
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "lisa/pre_analysis.hpp"

namespace lisa {

enum class FeatureTag {
    ExternalCall,
    ExternalCallBeforeStateWrite,
    UncheckedReturn,
    LowLevelCall,
    StateWrite,
    StateArithmetic,
    LowPragma,  // pragma proves compiler < 0.8
    BlockRandomness,
    UnguardedPrivilegedWrite,
    DynamicLoopWithEffects,
    UnvalidatedParamStore,
    ReservesPriceDependency,
};

inline const char* to_string(FeatureTag t) {
    switch (t) {
        case FeatureTag::ExternalCall: return "external_call";
        case FeatureTag::ExternalCallBeforeStateWrite: return "external_call_before_state_write";
        case FeatureTag::UncheckedReturn: return "unchecked_return";
        case FeatureTag::LowLevelCall: return "low_level_call";
        case FeatureTag::StateWrite: return "state_write";
        case FeatureTag::StateArithmetic: return "state_arithmetic";
        case FeatureTag::LowPragma: return "low_pragma";
        case FeatureTag::BlockRandomness: return "block_randomness";
        case FeatureTag::UnguardedPrivilegedWrite: return "unguarded_privileged_write";
        case FeatureTag::DynamicLoopWithEffects: return "dynamic_loop_with_effects";
        case FeatureTag::UnvalidatedParamStore: return "unvalidated_param_store";
        case FeatureTag::ReservesPriceDependency: return "reserves_price_dependency";
    }
    return "?";
}

inline std::optional<FeatureTag> tag_from_string(std::string_view s) {
    static const std::map<std::string, FeatureTag, std::less<>> table = {
        {"external_call", FeatureTag::ExternalCall},
        {"external_call_before_state_write", FeatureTag::ExternalCallBeforeStateWrite},
        {"unchecked_return", FeatureTag::UncheckedReturn},
        {"low_level_call", FeatureTag::LowLevelCall},
        {"state_write", FeatureTag::StateWrite},
        {"state_arithmetic", FeatureTag::StateArithmetic},
        {"low_pragma", FeatureTag::LowPragma},
        {"block_randomness", FeatureTag::BlockRandomness},
        {"unguarded_privileged_write", FeatureTag::UnguardedPrivilegedWrite},
        {"dynamic_loop_with_effects", FeatureTag::DynamicLoopWithEffects},
        {"unvalidated_param_store", FeatureTag::UnvalidatedParamStore},
        {"reserves_price_dependency", FeatureTag::ReservesPriceDependency},
    };
    auto it = table.find(s);
    if (it == table.end())
        return std::nullopt;
    return it->second;
}

namespace tag_detail {

// Spot-price reads that back balance/reserve based pricing.
inline bool is_reserves_read(const ExternalCallSite& site) {
    return starts_with(site.callee_text, "getReserves") || site.callee_text == "balanceOf";
}

inline bool function_is_public(const PreAnalysis& pre, const std::string& fid) {
    const FunctionInfo* info = pre.find_function(fid);
    if (!info)
        return false;
    return info->decl->visibility == Visibility::Public ||
           info->decl->visibility == Visibility::External;
}

inline bool writes_privileged_unguarded(const PreAnalysis& pre, const std::string& fid,
                                        std::string* var_out = nullptr, Span* span_out = nullptr) {
    const FunctionInfo* info = pre.find_function(fid);
    if (!info || info->decl->is_constructor || !function_is_public(pre, fid))
        return false;
    if (pre.has_guard(fid, GuardKind::OwnerModifier) ||
        pre.has_guard(fid, GuardKind::SenderRequire))
        return false;
    auto pit = pre.privileged_state_vars.find(info->contract);
    if (pit == pre.privileged_state_vars.end())
        return false;
    for (const auto* w : pre.writes_in(fid)) {
        if (pit->second.contains(w->variable)) {
            if (var_out)
                *var_out = w->variable;
            if (span_out)
                *span_out = w->span;
            return true;
        }
    }
    return false;
}

inline bool call_before_write_unguarded(const PreAnalysis& pre, const std::string& fid) {
    if (pre.has_guard(fid, GuardKind::ReentrancyGuard))
        return false;
    auto calls = pre.calls_in(fid);
    auto writes = pre.writes_in(fid);
    for (const auto* c : calls)
        for (const auto* w : writes)
            if (c->span.precedes(w->span))
                return true;
    return false;
}

inline bool loop_has_effects(const PreAnalysis& pre, const LoopSite& loop) {
    for (const auto& c : pre.call_graph.external_call_sites)
        if (c.function_id == loop.function_id && loop.body_span.contains(c.span))
            return true;
    for (const auto& w : pre.state_write_sites)
        if (w.function_id == loop.function_id && loop.body_span.contains(w.span))
            return true;
    return false;
}

}  // namespace tag_detail

// Tags exhibited by one function (project-level tags like low_pragma excluded).
inline std::set<FeatureTag> derive_function_tags(const PreAnalysis& pre, const std::string& fid) {
    using namespace tag_detail;
    std::set<FeatureTag> tags;
    auto calls = pre.calls_in(fid);
    auto writes = pre.writes_in(fid);
    if (!calls.empty())
        tags.insert(FeatureTag::ExternalCall);
    if (!writes.empty())
        tags.insert(FeatureTag::StateWrite);
    for (const auto* c : calls) {
        if (c->kind == CallKind::LowLevelCall || c->kind == CallKind::DelegateCall)
            tags.insert(FeatureTag::LowLevelCall);
        if (!c->checked_return &&
            (c->kind == CallKind::LowLevelCall || c->kind == CallKind::Send))
            tags.insert(FeatureTag::UncheckedReturn);
        if (is_reserves_read(*c))
            tags.insert(FeatureTag::ReservesPriceDependency);
    }
    if (call_before_write_unguarded(pre, fid))
        tags.insert(FeatureTag::ExternalCallBeforeStateWrite);
    for (const auto* w : writes)
        if (w->arithmetic)
            tags.insert(FeatureTag::StateArithmetic);
    for (const auto& r : pre.randomness_sites)
        if (r.function_id == fid && (r.context == RandomnessContext::Assignment ||
                                     r.context == RandomnessContext::BranchCondition))
            tags.insert(FeatureTag::BlockRandomness);
    if (writes_privileged_unguarded(pre, fid))
        tags.insert(FeatureTag::UnguardedPrivilegedWrite);
    for (const auto& l : pre.loop_sites)
        if (l.function_id == fid && l.dynamic_bound && loop_has_effects(pre, l))
            tags.insert(FeatureTag::DynamicLoopWithEffects);
    for (const auto& p : pre.param_store_sites)
        if (p.function_id == fid && !p.validated && function_is_public(pre, fid))
            tags.insert(FeatureTag::UnvalidatedParamStore);
    return tags;
}

// Project-level tag set: union over functions plus pragma-derived tags.
inline std::set<FeatureTag> derive_project_tags(const PreAnalysis& pre) {
    std::set<FeatureTag> tags;
    for (const auto& [fid, info] : pre.functions) {
        auto f = derive_function_tags(pre, fid);
        tags.insert(f.begin(), f.end());
    }
    for (const auto& unit : pre.units)
        if (unit.pragma_version && unit.pragma_version->proven_below_0_8())
            tags.insert(FeatureTag::LowPragma);
    return tags;
}

// Trigger tags per category: a function must exhibit all of them (project
// level tags count for every function) to be routed to that category's
// specialist.
inline const std::map<std::string, std::set<FeatureTag>>& category_trigger_tags() {
    static const std::map<std::string, std::set<FeatureTag>> table = {
        {"SC01", {FeatureTag::UnguardedPrivilegedWrite}},
        {"SC02", {FeatureTag::ReservesPriceDependency}},
        {"SC03", {FeatureTag::StateArithmetic}},
        {"SC04", {FeatureTag::UnvalidatedParamStore}},
        {"SC05", {FeatureTag::ExternalCallBeforeStateWrite}},
        {"SC06", {FeatureTag::UncheckedReturn}},
        {"SC08", {FeatureTag::LowPragma, FeatureTag::StateArithmetic}},
        {"SC09", {FeatureTag::BlockRandomness}},
        {"SC10", {FeatureTag::DynamicLoopWithEffects}},
    };
    return table;
}

inline bool function_exhibits_category(const PreAnalysis& pre, const std::string& fid,
                                       const std::string& category,
                                       const std::set<FeatureTag>& project_tags) {
    auto it = category_trigger_tags().find(category);
    if (it == category_trigger_tags().end())
        return false;
    auto fn_tags = derive_function_tags(pre, fid);
    for (FeatureTag t : it->second) {
        if (t == FeatureTag::LowPragma) {
            if (!project_tags.contains(t))
                return false;
        } else if (!fn_tags.contains(t)) {
            return false;
        }
    }
    return true;
}

}  // namespace lisa
