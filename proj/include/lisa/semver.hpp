// Minimal semantic-version constraint handling for `pragma solidity` lines.
// Enough to answer the one question the detectors ask: does the pragma prove
// the compiler is older than 0.8 (no built-in overflow checks)?
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lisa/util.hpp"

namespace lisa {

struct SemVer {
    int major = 0, minor = 0, patch = 0;

    auto operator<=>(const SemVer&) const = default;

    static std::optional<SemVer> parse(std::string_view s) {
        SemVer v;
        int part = 0;
        int value = 0;
        bool any = false;
        for (char c : s) {
            if (c >= '0' && c <= '9') {
                value = value * 10 + (c - '0');
                any = true;
            } else if (c == '.') {
                if (!any || part >= 2)
                    return std::nullopt;
                (part == 0 ? v.major : v.minor) = value;
                value = 0;
                any = false;
                ++part;
            } else {
                return std::nullopt;
            }
        }
        if (!any)
            return std::nullopt;
        (part == 0 ? v.major : part == 1 ? v.minor : v.patch) = value;
        return v;
    }

    std::string str() const {
        return std::to_string(major) + "." + std::to_string(minor) + "." + std::to_string(patch);
    }
};

struct VersionConstraint {
    std::string op;  // "^", "~", ">=", ">", "<=", "<", "="
    SemVer version;
};

struct VersionRange {
    std::vector<VersionConstraint> constraints;
    std::string text;

    // Parses constraint lists like "^0.7.0", ">=0.6.0 <0.8.0", "0.7.6".
    // Returns nullopt when any piece is unparseable.
    static std::optional<VersionRange> parse(std::string_view s) {
        VersionRange r;
        r.text = trim(s);
        size_t i = 0;
        auto skip_ws = [&] {
            while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
                ++i;
        };
        skip_ws();
        while (i < s.size()) {
            std::string op = "=";
            if (s[i] == '^' || s[i] == '~') {
                op = s[i];
                ++i;
            } else if (s[i] == '>' || s[i] == '<') {
                op = s[i];
                ++i;
                if (i < s.size() && s[i] == '=') {
                    op += '=';
                    ++i;
                }
            } else if (s[i] == '=') {
                ++i;
            }
            skip_ws();
            size_t start = i;
            while (i < s.size() && s[i] != ' ' && s[i] != '\t')
                ++i;
            auto v = SemVer::parse(s.substr(start, i - start));
            if (!v)
                return std::nullopt;
            r.constraints.push_back({op, *v});
            skip_ws();
        }
        if (r.constraints.empty())
            return std::nullopt;
        return r;
    }

    bool allows(const SemVer& v) const {
        for (const auto& c : constraints) {
            if (c.op == "^") {
                SemVer upper = c.version.major > 0 ? SemVer{c.version.major + 1, 0, 0}
                                                   : SemVer{0, c.version.minor + 1, 0};
                if (v < c.version || v >= upper)
                    return false;
            } else if (c.op == "~") {
                SemVer upper{c.version.major, c.version.minor + 1, 0};
                if (v < c.version || v >= upper)
                    return false;
            } else if (c.op == ">=") {
                if (v < c.version)
                    return false;
            } else if (c.op == ">") {
                if (v <= c.version)
                    return false;
            } else if (c.op == "<=") {
                if (v > c.version)
                    return false;
            } else if (c.op == "<") {
                if (v >= c.version)
                    return false;
            } else {  // "="
                if (v != c.version)
                    return false;
            }
        }
        return true;
    }

    // True when no version >= 0.8.0 can satisfy the range, i.e. the pragma
    // proves a compiler without checked arithmetic.
    bool proven_below_0_8() const {
        // The interesting boundary versions: 0.8.0 itself and the lower edges
        // of every plausible later release line.
        for (int major = 0; major <= 2; ++major) {
            for (int minor = 0; minor <= 40; ++minor) {
                if (major == 0 && minor < 8)
                    continue;
                for (int patch : {0, 1, 5, 30}) {
                    if (allows(SemVer{major, minor, patch}))
                        return false;
                }
            }
        }
        return true;
    }
};

}  // namespace lisa
