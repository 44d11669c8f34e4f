// Source files, positions and spans. Spans carry both line/column (1-based,
// for reports) and byte offsets (for exact slicing).
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lisa/util.hpp"

namespace lisa {

struct SourcePos {
    uint32_t line = 1;    // 1-based
    uint32_t column = 1;  // 1-based
    uint32_t offset = 0;  // byte offset into the file text

    bool operator==(const SourcePos&) const = default;
};

// Half-open [begin, end) over the file text.
struct Span {
    SourcePos begin;
    SourcePos end;

    bool operator==(const Span&) const = default;
    bool valid() const { return end.offset >= begin.offset; }
    bool contains(const Span& inner) const {
        return begin.offset <= inner.begin.offset && inner.end.offset <= end.offset;
    }
    bool precedes(const Span& other) const { return begin.offset < other.begin.offset; }
    bool overlaps_lines(const Span& other) const {
        return begin.line <= other.end.line && other.begin.line <= end.line;
    }
};

inline std::string span_to_string(const Span& s) {
    return std::to_string(s.begin.line) + ":" + std::to_string(s.begin.column) + "-" +
           std::to_string(s.end.line) + ":" + std::to_string(s.end.column);
}

struct SourceFile {
    std::string path;                  // project-relative, '/' separated
    std::string text;
    std::vector<uint32_t> line_index;  // byte offset of each line start; strictly increasing

    static SourceFile from_text(std::string path, std::string text) {
        SourceFile f;
        f.path = std::move(path);
        f.text = std::move(text);
        f.line_index.push_back(0);
        for (uint32_t i = 0; i < f.text.size(); ++i)
            if (f.text[i] == '\n' && i + 1 <= f.text.size())
                f.line_index.push_back(i + 1);
        return f;
    }

    uint32_t line_count() const {
        if (text.empty())
            return 0;
        uint32_t n = static_cast<uint32_t>(line_index.size());
        // A trailing newline opens an empty line at EOF; don't count it.
        return text.back() == '\n' ? n - 1 : n;
    }

    std::string slice(const Span& s) const {
        if (s.begin.offset > text.size() || s.end.offset > text.size() || !s.valid())
            return {};
        return text.substr(s.begin.offset, s.end.offset - s.begin.offset);
    }

    bool line_in_range(uint32_t line) const { return line >= 1 && line <= line_count(); }

    // Span covering a whole 1-based line range [first, last]; caller checks line_in_range.
    Span line_span(uint32_t first, uint32_t last) const {
        Span s;
        s.begin = SourcePos{first, 1, line_index[first - 1]};
        uint32_t end_off =
            last < line_index.size() ? line_index[last] : static_cast<uint32_t>(text.size());
        s.end = SourcePos{last, end_off - line_index[last - 1] + 1, end_off};
        return s;
    }
};

using SourceFilePtr = std::shared_ptr<const SourceFile>;

}  // namespace lisa
