// Findings: one candidate vulnerability with category, severity, confidence,
// a machine-checkable trace, and provenance.
#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lisa/source.hpp"
#include "lisa/util.hpp"

namespace lisa {

enum class Severity { Informational = 0, Low = 1, Medium = 2, High = 3 };

inline const char* to_string(Severity s) {
    switch (s) {
        case Severity::Informational: return "Informational";
        case Severity::Low: return "Low";
        case Severity::Medium: return "Medium";
        case Severity::High: return "High";
    }
    return "?";
}

inline std::optional<Severity> severity_from_string(std::string_view s) {
    std::string lower = to_lower(s);
    if (lower == "informational" || lower == "info")
        return Severity::Informational;
    if (lower == "low")
        return Severity::Low;
    if (lower == "medium" || lower == "median")
        return Severity::Medium;
    if (lower == "high")
        return Severity::High;
    return std::nullopt;
}

inline Severity raise_one(Severity s) {
    return s == Severity::High ? Severity::High : static_cast<Severity>(static_cast<int>(s) + 1);
}

inline Severity lower_one(Severity s) {
    return s == Severity::Informational ? Severity::Informational
                                        : static_cast<Severity>(static_cast<int>(s) - 1);
}

// Machine-checkable assertion carried by a finding. `spans` must be a subset
// of the owning trace's spans; `args` name variables/parameters/tags.
struct Predicate {
    std::string id;
    std::vector<Span> spans;
    std::vector<std::string> args;
};

// Predicate ids understood by the merger's factual check.
namespace predicate_ids {
inline constexpr const char* call_before_write = "call_before_write";
inline constexpr const char* unchecked_return = "unchecked_return";
inline constexpr const char* unchecked_arithmetic = "unchecked_arithmetic";
inline constexpr const char* entropy_from_block = "entropy_from_block";
inline constexpr const char* unguarded_privileged_write = "unguarded_privileged_write";
inline constexpr const char* unbounded_loop_with_effects = "unbounded_loop_with_effects";
inline constexpr const char* unvalidated_param_store = "unvalidated_param_store";
inline constexpr const char* tag_evidence = "tag_evidence";
inline constexpr const char* supply_write = "supply_write";
inline constexpr const char* logic_claim = "logic_claim";  // not mechanically checkable
}  // namespace predicate_ids

struct FindingTrace {
    std::string file;
    std::string function_id;
    std::vector<Span> spans;  // ordered by position
    Predicate predicate;
};

struct Finding {
    std::string id;  // content hash over identity fields
    std::string category;
    Severity severity = Severity::Low;
    double confidence = 0.0;
    FindingTrace trace;
    std::vector<std::string> matched_templates;
    std::string explanation;
    std::string agent_id;                 // emitting agent
    std::vector<std::string> agent_ids;   // provenance after dedup (includes agent_id)
    bool needs_manual_review = false;
    bool from_reasoning_agent = false;
    int merge_stage = 0;  // 0 raw, 1 factual-checked, 2 cross-validated, 3 final

    void compute_id() {
        std::string key = category + "|" + trace.file + "|" + trace.function_id + "|" +
                          trace.predicate.id;
        for (const Span& s : trace.spans)
            key += "|" + span_to_string(s);
        for (const std::string& a : trace.predicate.args)
            key += "|" + a;
        id = content_hash(key);
    }

    std::set<uint32_t> line_set() const {
        std::set<uint32_t> lines;
        for (const Span& s : trace.spans)
            for (uint32_t l = s.begin.line; l <= s.end.line; ++l)
                lines.insert(l);
        return lines;
    }
};

inline Finding make_finding(std::string category, Severity severity, double confidence,
                            FindingTrace trace, std::string explanation, std::string agent_id) {
    Finding f;
    f.category = std::move(category);
    f.severity = severity;
    f.confidence = confidence;
    f.trace = std::move(trace);
    f.explanation = std::move(explanation);
    f.agent_id = std::move(agent_id);
    f.agent_ids = {f.agent_id};
    f.compute_id();
    return f;
}

inline nlohmann::json span_json(const Span& s) {
    return {{"start_line", s.begin.line},
            {"start_col", s.begin.column},
            {"end_line", s.end.line},
            {"end_col", s.end.column}};
}

inline nlohmann::json finding_to_json(const Finding& f) {
    nlohmann::json j;
    j["id"] = f.id;
    j["category"] = f.category;
    j["severity"] = to_string(f.severity);
    j["confidence"] = f.confidence;
    j["file"] = f.trace.file;
    j["function"] = f.trace.function_id;
    auto spans = nlohmann::json::array();
    for (const Span& s : f.trace.spans)
        spans.push_back(span_json(s));
    j["spans"] = spans;
    j["predicate"] = {{"id", f.trace.predicate.id}, {"args", f.trace.predicate.args}};
    j["matched_templates"] = f.matched_templates;
    j["explanation"] = f.explanation;
    j["agents"] = f.agent_ids;
    j["needs_manual_review"] = f.needs_manual_review;
    j["merge_stage"] = f.merge_stage;
    return j;
}

}  // namespace lisa
