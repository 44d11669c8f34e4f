// Knowledge base of generalized vulnerability templates distilled from audit
// findings: anonymized fragments, feature tags, severity gradings, reasoning
// annotations, and shingle-based similarity retrieval.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lisa/tags.hpp"
#include "lisa/token.hpp"

namespace lisa {

class EmptyExcerpt : public Error {
  public:
    EmptyExcerpt() : Error("audit entry has an empty code excerpt") {}
};

class UnclassifiableEntry : public Error {
  public:
    explicit UnclassifiableEntry(const std::string& title)
        : Error("audit entry cannot be classified (no category hint, no mapped tag): " + title) {}
};

class FormatError : public Error {
  public:
    FormatError(const std::string& msg, int line)
        : Error("kb format error at line " + std::to_string(line) + ": " + msg), line_number(line) {}
    int line_number;
};

enum class TemplateKind { RuleBased, LogicBased };

inline const char* to_string(TemplateKind k) {
    return k == TemplateKind::RuleBased ? "rule_based" : "logic_based";
}

struct TemplateMetadata {
    std::string size_bucket;        // small (<=5 files) / medium (<=25) / large
    std::string complexity_bucket;  // simple (<=10 fns) / moderate (<=50) / complex
    std::string version_range;      // raw pragma-style text, may be empty
};

inline std::string size_bucket_for(uint32_t file_count) {
    return file_count <= 5 ? "small" : file_count <= 25 ? "medium" : "large";
}
inline std::string complexity_bucket_for(uint32_t function_count) {
    return function_count <= 10 ? "simple" : function_count <= 50 ? "moderate" : "complex";
}

struct VulnerabilityTemplate {
    std::string id;  // content hash of (category, fragment)
    std::string category;
    TemplateKind kind = TemplateKind::RuleBased;
    std::string fragment;   // anonymized
    std::string reasoning;  // human annotation, free text
    Severity severity_grading = Severity::Medium;
    std::set<FeatureTag> feature_tags;
    TemplateMetadata metadata;
};

struct TemplateMatch {
    std::string template_id;
    double similarity = 0.0;
    std::set<FeatureTag> matched_tags;
};

struct AuditReportEntry {
    std::string title;
    std::string category_hint;  // may be empty
    std::string excerpt;
    std::string reasoning;
    Severity severity = Severity::Medium;
    uint32_t project_files = 1;
    uint32_t project_functions = 1;
    std::string version_range;
};

// ---- anonymization ----

namespace kb_detail {

// Identifiers that survive anonymization: language keywords, builtin globals
// and members, well-known library calls. Everything else is renamed into the
// placeholder alphabet.
inline bool is_reserved_identifier(std::string_view s) {
    if (is_keyword(s) || is_elementary_type(s) || is_denomination(s))
        return true;
    static const std::set<std::string, std::less<>> reserved = {
        // builtin globals and their members
        "msg", "block", "tx", "abi", "this", "super", "now", "sender", "value", "origin",
        "data", "sig", "gas", "timestamp", "number", "difficulty", "prevrandao", "coinbase",
        "gaslimit", "basefee", "chainid",
        // call members and address members
        "call", "delegatecall", "staticcall", "send", "transfer", "balance", "code", "codehash",
        // builtin functions
        "keccak256", "sha256", "ripemd160", "ecrecover", "addmod", "mulmod", "blockhash",
        "selfdestruct", "gasleft",
        // array/bytes members and abi helpers
        "push", "pop", "length", "encode", "encodePacked", "encodeWithSelector",
        "encodeWithSignature", "decode",
        // safe-math style wrappers
        "add", "sub", "mul", "div", "mod",
        // modifier body placeholder
        "_",
    };
    return reserved.contains(s);
}

// VAR12 / FN3 / C1 / NUM2 / STR1 / ADDR1
inline bool is_placeholder(std::string_view s) {
    static const std::vector<std::string_view> prefixes = {"VAR", "FN", "NUM", "STR", "ADDR", "C"};
    for (std::string_view p : prefixes) {
        if (s.size() > p.size() && starts_with(s, p)) {
            bool digits = true;
            for (char c : s.substr(p.size()))
                if (c < '0' || c > '9')
                    digits = false;
            if (digits)
                return true;
        }
    }
    return false;
}

// Canonical spacing when re-rendering a token stream.
inline bool no_space_before(const std::string& t) {
    return t == ";" || t == "," || t == ")" || t == "]" || t == "." || t == "(" || t == "[" ||
           t == "++" || t == "--";
}
inline bool no_space_after(const std::string& t) {
    return t == "(" || t == "[" || t == "." || t == "!" || t == "~";
}

inline std::string render_tokens(const std::vector<Token>& tokens) {
    std::string out;
    for (size_t i = 0; i + 1 < tokens.size(); ++i) {  // last token is End
        const std::string& text = tokens[i].text;
        if (!out.empty() && !no_space_before(text) &&
            !(i > 0 && no_space_after(tokens[i - 1].text)))
            out += ' ';
        out += text;
    }
    return out;
}

}  // namespace kb_detail

// Consistent first-occurrence renaming of identifiers and literals into the
// placeholder alphabet. Keywords, builtins and operators are preserved.
// Idempotent: placeholders map to themselves.
inline std::string anonymize_fragment(const std::string& code) {
    using namespace kb_detail;
    std::vector<Token> tokens = lex_text(code);

    // Seed class counters above any placeholder already present so fresh
    // names never collide (keeps re-anonymization the identity).
    std::map<std::string, int> counters = {{"VAR", 0}, {"FN", 0},  {"C", 0},
                                           {"NUM", 0}, {"STR", 0}, {"ADDR", 0}};
    static const std::vector<std::string> classes = {"VAR", "FN", "NUM", "STR", "ADDR", "C"};
    for (const Token& t : tokens) {
        if (t.kind != TokenKind::Identifier || !is_placeholder(t.text))
            continue;
        for (const std::string& cls : classes) {
            if (starts_with(t.text, cls)) {  // classes are prefix-free apart from order
                int n = std::atoi(t.text.c_str() + cls.size());
                counters[cls] = std::max(counters[cls], n);
                break;
            }
        }
    }

    std::map<std::string, std::string> mapping;  // original -> placeholder

    auto fresh = [&](const std::string& cls) {
        int n = ++counters[cls];
        return cls + std::to_string(n);
    };

    for (size_t i = 0; i + 1 < tokens.size(); ++i) {
        Token& t = tokens[i];
        switch (t.kind) {
            case TokenKind::Identifier: {
                if (is_reserved_identifier(t.text))
                    break;
                if (is_placeholder(t.text)) {
                    mapping.emplace(t.text, t.text);
                    break;
                }
                auto it = mapping.find(t.text);
                if (it != mapping.end()) {
                    t.text = it->second;
                    break;
                }
                // Classify by syntactic position at first occurrence.
                std::string cls = "VAR";
                bool after_contract_kw =
                    i > 0 && tokens[i - 1].kind == TokenKind::Identifier &&
                    (tokens[i - 1].text == "contract" || tokens[i - 1].text == "interface" ||
                     tokens[i - 1].text == "library" || tokens[i - 1].text == "is" ||
                     tokens[i - 1].text == "new");
                if (after_contract_kw)
                    cls = "C";
                else if (tokens[i + 1].is_punct("("))
                    cls = "FN";
                std::string placeholder = fresh(cls);
                mapping.emplace(t.text, placeholder);
                t.text = placeholder;
                break;
            }
            case TokenKind::Number: {
                auto it = mapping.find("#n#" + t.text);
                if (it != mapping.end()) {
                    t.text = it->second;
                } else {
                    std::string placeholder = fresh("NUM");
                    mapping.emplace("#n#" + t.text, placeholder);
                    t.text = placeholder;
                }
                break;
            }
            case TokenKind::StringLit: {
                auto it = mapping.find("#s#" + t.text);
                if (it != mapping.end()) {
                    t.text = it->second;
                } else {
                    std::string placeholder = fresh("STR");
                    mapping.emplace("#s#" + t.text, placeholder);
                    t.text = placeholder;
                }
                break;
            }
            case TokenKind::AddressLit: {
                auto it = mapping.find("#a#" + t.text);
                if (it != mapping.end()) {
                    t.text = it->second;
                } else {
                    std::string placeholder = fresh("ADDR");
                    mapping.emplace("#a#" + t.text, placeholder);
                    t.text = placeholder;
                }
                break;
            }
            default:
                break;
        }
    }
    return kb_detail::render_tokens(tokens);
}

// 3-token shingles over an anonymized fragment. Fragments shorter than three
// tokens contribute a single shingle so identical short fragments still score 1.
inline std::set<std::string> fragment_shingles(const std::string& anonymized) {
    std::vector<Token> tokens = lex_text(anonymized);
    std::vector<std::string> texts;
    for (const Token& t : tokens)
        if (t.kind != TokenKind::End)
            texts.push_back(t.text);
    std::set<std::string> shingles;
    if (texts.empty())
        return shingles;
    if (texts.size() < 3) {
        shingles.insert(join(texts, "\x1f"));
        return shingles;
    }
    for (size_t i = 0; i + 3 <= texts.size(); ++i)
        shingles.insert(texts[i] + "\x1f" + texts[i + 1] + "\x1f" + texts[i + 2]);
    return shingles;
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty())
        return 1.0;
    if (a.empty() || b.empty())
        return 0.0;
    size_t inter = 0;
    for (const auto& s : a)
        if (b.contains(s))
            ++inter;
    size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// ---- the knowledge base ----

struct QueryFilters {
    std::optional<std::string> category;
    std::optional<std::string> size_bucket;
    std::optional<std::string> complexity_bucket;
    std::optional<TemplateKind> kind;

    bool accepts(const VulnerabilityTemplate& t) const {
        if (category && t.category != *category)
            return false;
        if (size_bucket && t.metadata.size_bucket != *size_bucket)
            return false;
        if (complexity_bucket && t.metadata.complexity_bucket != *complexity_bucket)
            return false;
        if (kind && t.kind != *kind)
            return false;
        return true;
    }
};

class KnowledgeBase {
  public:
    const std::vector<VulnerabilityTemplate>& templates() const { return templates_; }
    bool empty() const { return templates_.empty(); }
    size_t size() const { return templates_.size(); }

    const VulnerabilityTemplate* find(const std::string& id) const {
        for (const auto& t : templates_)
            if (t.id == id)
                return &t;
        return nullptr;
    }

    // Inserts or replaces by id; keeps templates sorted by id.
    void add(VulnerabilityTemplate t) {
        auto it = std::find_if(templates_.begin(), templates_.end(),
                               [&](const auto& x) { return x.id == t.id; });
        if (it != templates_.end())
            *it = std::move(t);
        else
            templates_.push_back(std::move(t));
        std::sort(templates_.begin(), templates_.end(),
                  [](const auto& a, const auto& b) { return a.id < b.id; });
        rebuild_shingles();
    }

    void remove(const std::string& id) {
        std::erase_if(templates_, [&](const auto& t) { return t.id == id; });
        rebuild_shingles();
    }

    // Distills an audit entry into a template. The excerpt is anonymized and
    // its feature tags derived syntactically; entries that cannot be
    // classified are rejected, never guessed.
    VulnerabilityTemplate ingest_entry(const AuditReportEntry& entry) {
        if (trim(entry.excerpt).empty())
            throw EmptyExcerpt();

        VulnerabilityTemplate t;
        t.fragment = anonymize_fragment(entry.excerpt);  // LexError passes through
        t.reasoning = entry.reasoning;
        t.severity_grading = entry.severity;
        t.feature_tags = derive_excerpt_tags(entry.excerpt, entry.version_range);
        t.metadata.size_bucket = size_bucket_for(entry.project_files);
        t.metadata.complexity_bucket = complexity_bucket_for(entry.project_functions);
        t.metadata.version_range = entry.version_range;

        if (!entry.category_hint.empty()) {
            t.category = entry.category_hint;
        } else {
            t.category = classify_by_tags(t.feature_tags);
            if (t.category.empty())
                throw UnclassifiableEntry(entry.title);
        }
        t.kind = kind_for_category(t.category);
        if (t.feature_tags.empty()) {
            // A classified entry always records at least the tag that backs
            // its category; hint-only entries with no syntactic evidence keep
            // the category's trigger tags.
            auto it = category_trigger_tags().find(t.category);
            if (it != category_trigger_tags().end())
                t.feature_tags = it->second;
        }
        if (t.feature_tags.empty())
            throw UnclassifiableEntry(entry.title);
        t.id = content_hash(t.category + "\x1f" + t.fragment);
        add(t);
        return t;
    }

    // Ranked similarity query: Jaccard over 3-token shingles of anonymized
    // fragments, ties broken by template id ascending, filters applied first.
    std::vector<TemplateMatch> query_similar(const std::string& fragment,
                                             const QueryFilters& filters = {}) const {
        std::set<std::string> q = fragment_shingles(anonymize_fragment(fragment));
        std::vector<TemplateMatch> out;
        for (size_t i = 0; i < templates_.size(); ++i) {
            const auto& t = templates_[i];
            if (!filters.accepts(t))
                continue;
            TemplateMatch m;
            m.template_id = t.id;
            m.similarity = jaccard(q, shingles_[i]);
            out.push_back(std::move(m));
        }
        std::sort(out.begin(), out.end(), [](const TemplateMatch& a, const TemplateMatch& b) {
            if (a.similarity != b.similarity)
                return a.similarity > b.similarity;
            return a.template_id < b.template_id;
        });
        return out;
    }

    // Plausibility per category: max over that category's templates of the
    // fraction of template feature tags present in the project's tag set.
    std::map<std::string, double> plausible_categories(const PreAnalysis& pre) const {
        std::set<FeatureTag> present = derive_project_tags(pre);
        std::map<std::string, double> out;
        for (const auto& t : templates_) {
            if (t.feature_tags.empty())
                continue;
            size_t hit = 0;
            for (FeatureTag tag : t.feature_tags)
                if (present.contains(tag))
                    ++hit;
            double score = static_cast<double>(hit) / static_cast<double>(t.feature_tags.size());
            auto [it, inserted] = out.emplace(t.category, score);
            if (!inserted)
                it->second = std::max(it->second, score);
        }
        return out;
    }

    // Highest severity grading among a category's templates; used by the
    // scheduler for priorities.
    std::optional<Severity> category_severity(const std::string& category) const {
        std::optional<Severity> out;
        for (const auto& t : templates_)
            if (t.category == category)
                out = out ? std::max(*out, t.severity_grading) : t.severity_grading;
        return out;
    }

    // Matched tags for a template against a function's tag set (explanations).
    std::set<FeatureTag> matched_tags(const std::string& template_id,
                                      const std::set<FeatureTag>& present) const {
        std::set<FeatureTag> out;
        if (const auto* t = find(template_id))
            for (FeatureTag tag : t->feature_tags)
                if (present.contains(tag))
                    out.insert(tag);
        return out;
    }

    // ---- persistence: one JSON record per line, sorted by id ----

    std::string serialize() const {
        std::string out;
        for (const auto& t : templates_) {
            nlohmann::json j;
            j["id"] = t.id;
            j["category"] = t.category;
            j["kind"] = to_string(t.kind);
            j["fragment"] = t.fragment;
            j["reasoning"] = t.reasoning;
            j["severity"] = to_string(t.severity_grading);
            std::vector<std::string> tags;
            for (FeatureTag tag : t.feature_tags)
                tags.push_back(to_string(tag));
            j["tags"] = tags;
            j["size_bucket"] = t.metadata.size_bucket;
            j["complexity_bucket"] = t.metadata.complexity_bucket;
            j["versions"] = t.metadata.version_range;
            out += j.dump();
            out += '\n';
        }
        return out;
    }

    void save(const std::filesystem::path& path) const { write_file(path, serialize()); }

    static KnowledgeBase deserialize(const std::string& text) {
        KnowledgeBase kb;
        int line_no = 0;
        for (const std::string& line : split(text, '\n')) {
            ++line_no;
            if (trim(line).empty())
                continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object())
                throw FormatError("malformed record", line_no);
            VulnerabilityTemplate t;
            try {
                t.id = j.at("id").get<std::string>();
                t.category = j.at("category").get<std::string>();
                t.kind = j.at("kind").get<std::string>() == "logic_based" ? TemplateKind::LogicBased
                                                                          : TemplateKind::RuleBased;
                t.fragment = j.at("fragment").get<std::string>();
                t.reasoning = j.at("reasoning").get<std::string>();
                auto sev = severity_from_string(j.at("severity").get<std::string>());
                if (!sev)
                    throw FormatError("bad severity", line_no);
                t.severity_grading = *sev;
                for (const auto& tag_name : j.at("tags")) {
                    auto tag = tag_from_string(tag_name.get<std::string>());
                    if (!tag)
                        throw FormatError("unknown tag " + tag_name.get<std::string>(), line_no);
                    t.feature_tags.insert(*tag);
                }
                t.metadata.size_bucket = j.value("size_bucket", "");
                t.metadata.complexity_bucket = j.value("complexity_bucket", "");
                t.metadata.version_range = j.value("versions", "");
            } catch (const nlohmann::json::exception& e) {
                throw FormatError(e.what(), line_no);
            }
            if (t.feature_tags.empty())
                throw FormatError("template has no feature tags", line_no);
            kb.templates_.push_back(std::move(t));
        }
        std::sort(kb.templates_.begin(), kb.templates_.end(),
                  [](const auto& a, const auto& b) { return a.id < b.id; });
        kb.rebuild_shingles();
        return kb;
    }

    static KnowledgeBase load(const std::filesystem::path& path) {
        return deserialize(read_file(path));
    }

    bool operator==(const KnowledgeBase& other) const {
        if (templates_.size() != other.templates_.size())
            return false;
        for (size_t i = 0; i < templates_.size(); ++i) {
            const auto& a = templates_[i];
            const auto& b = other.templates_[i];
            if (a.id != b.id || a.category != b.category || a.kind != b.kind ||
                a.fragment != b.fragment || a.reasoning != b.reasoning ||
                a.severity_grading != b.severity_grading || a.feature_tags != b.feature_tags ||
                a.metadata.size_bucket != b.metadata.size_bucket ||
                a.metadata.complexity_bucket != b.metadata.complexity_bucket ||
                a.metadata.version_range != b.metadata.version_range)
                return false;
        }
        return true;
    }

    // Syntactic tags of a free-standing excerpt: parse (wrapping fragments
    // into a contract/function as needed) and reuse the project-level
    // derivation. Metadata version range stands in for a missing pragma.
    static std::set<FeatureTag> derive_excerpt_tags(const std::string& excerpt,
                                                    const std::string& version_range) {
        ContractUnit unit = parse_source_text("<excerpt>", excerpt);
        if (unit.contracts.empty()) {
            std::string wrapped = "contract C0 {\n" + excerpt + "\n}\n";
            unit = parse_source_text("<excerpt>", wrapped);
            bool has_fn = false;
            for (const auto& c : unit.contracts)
                has_fn = has_fn || !c.functions.empty();
            if (!has_fn) {
                wrapped = "contract C0 { function f0() public {\n" + excerpt + "\n} }\n";
                unit = parse_source_text("<excerpt>", wrapped);
            }
        }
        std::vector<ContractUnit> units;
        units.push_back(std::move(unit));
        PreAnalysis pre = build_pre_analysis(std::move(units));
        std::set<FeatureTag> tags = derive_project_tags(pre);
        if (tags.contains(FeatureTag::StateArithmetic) || !pre.state_write_sites.empty()) {
            if (!version_range.empty()) {
                auto range = VersionRange::parse(version_range);
                if (range && range->proven_below_0_8())
                    tags.insert(FeatureTag::LowPragma);
            }
        }
        return tags;
    }

    // Tag -> category classification for entries without a hint.
    static std::string classify_by_tags(const std::set<FeatureTag>& tags) {
        // Most specific first.
        static const std::vector<std::pair<FeatureTag, std::string>> order = {
            {FeatureTag::ExternalCallBeforeStateWrite, "SC05"},
            {FeatureTag::UncheckedReturn, "SC06"},
            {FeatureTag::BlockRandomness, "SC09"},
            {FeatureTag::DynamicLoopWithEffects, "SC10"},
            {FeatureTag::UnguardedPrivilegedWrite, "SC01"},
            {FeatureTag::ReservesPriceDependency, "SC02"},
            {FeatureTag::UnvalidatedParamStore, "SC04"},
        };
        for (const auto& [tag, category] : order)
            if (tags.contains(tag))
                return category;
        if (tags.contains(FeatureTag::LowPragma) && tags.contains(FeatureTag::StateArithmetic))
            return "SC08";
        return {};
    }

    static TemplateKind kind_for_category(const std::string& category) {
        if (category == "SC02" || category == "SC03" || category == "SC07")
            return TemplateKind::LogicBased;
        return TemplateKind::RuleBased;
    }

  private:
    std::vector<VulnerabilityTemplate> templates_;  // sorted by id
    std::vector<std::set<std::string>> shingles_;   // parallel to templates_

    void rebuild_shingles() {
        shingles_.clear();
        shingles_.reserve(templates_.size());
        for (const auto& t : templates_)
            shingles_.push_back(fragment_shingles(t.fragment));
    }
};

// ---- audit entries from Markdown with front matter ----
//
//   ---
//   title: ...
//   category: SC05          (optional)
//   severity: High
//   kind: rule_based        (optional)
//   project_files: 14
//   project_functions: 52
//   solidity: ">=0.6.0 <0.8.0"
//   ---
//   prose ... ```solidity fenced excerpt ``` ... prose (prose = reasoning)
inline AuditReportEntry parse_audit_entry_markdown(const std::string& text) {
    AuditReportEntry entry;
    std::vector<std::string> lines = split(text, '\n');
    size_t i = 0;
    if (i < lines.size() && trim(lines[i]) == "---") {
        ++i;
        for (; i < lines.size() && trim(lines[i]) != "---"; ++i) {
            std::string line = lines[i];
            size_t colon = line.find(':');
            if (colon == std::string::npos)
                continue;
            std::string key = trim(line.substr(0, colon));
            std::string value = trim(line.substr(colon + 1));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
                value = value.substr(1, value.size() - 2);
            if (key == "title")
                entry.title = value;
            else if (key == "category")
                entry.category_hint = value;
            else if (key == "severity")
                entry.severity = severity_from_string(value).value_or(Severity::Medium);
            else if (key == "project_files")
                entry.project_files = static_cast<uint32_t>(std::atoi(value.c_str()));
            else if (key == "project_functions")
                entry.project_functions = static_cast<uint32_t>(std::atoi(value.c_str()));
            else if (key == "solidity")
                entry.version_range = value;
        }
        if (i < lines.size())
            ++i;  // closing ---
    }
    // Body: first fenced code block is the excerpt, the rest is reasoning.
    std::string reasoning;
    bool in_fence = false;
    bool excerpt_done = false;
    for (; i < lines.size(); ++i) {
        std::string t = trim(lines[i]);
        if (starts_with(t, "```")) {
            if (!in_fence && !excerpt_done) {
                in_fence = true;
            } else if (in_fence) {
                in_fence = false;
                excerpt_done = true;
            }
            continue;
        }
        if (in_fence) {
            entry.excerpt += lines[i];
            entry.excerpt += '\n';
        } else {
            if (!t.empty()) {
                if (!reasoning.empty())
                    reasoning += ' ';
                reasoning += t;
            }
        }
    }
    entry.reasoning = reasoning;
    return entry;
}

}  // namespace lisa
