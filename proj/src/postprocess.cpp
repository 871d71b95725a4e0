#include "trace/postprocess.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "trace/error.hpp"

namespace trace {

namespace {

std::string trim_copy(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n\f\v");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n\f\v");
    return s.substr(begin, end - begin + 1);
}

std::string lower_copy(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            if (!current.empty() && current.back() == '\r') current.pop_back();
            lines.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    lines.push_back(std::move(current));
    return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out += lines[i];
    }
    return out;
}

bool is_fence_line(const std::string& line, std::string* marker) {
    const std::string t = trim_copy(line);
    if (t.starts_with("```")) {
        *marker = "```";
        return true;
    }
    if (t.starts_with("\"\"\"")) {
        *marker = "\"\"\"";
        return true;
    }
    return false;
}

void erase_all(std::string& s, const std::string& needle) {
    std::size_t pos = 0;
    while ((pos = s.find(needle, pos)) != std::string::npos) s.erase(pos, needle.size());
}

struct RuleLog {
    std::set<std::string> rules;
    void add(const std::string& name) { rules.insert(name); }
    std::vector<std::string> ordered() const { return {rules.begin(), rules.end()}; }
};

std::string code_pass(const std::string& raw, RuleLog& log) {
    const std::vector<std::string> lines = split_lines(raw);
    std::vector<std::string> blocks;
    std::string current_marker;
    std::vector<std::string> current;
    bool inside = false;
    bool any_fence = false;

    for (const std::string& line : lines) {
        std::string marker;
        if (is_fence_line(line, &marker)) {
            any_fence = true;
            if (!inside) {
                inside = true;
                current_marker = marker;
                current.clear();
                // the rest of the opening line is the language tag; dropped
                if (trim_copy(line) != marker) log.add("language-tag-strip");
            } else {
                // any fence marker line closes the open block
                blocks.push_back(join_lines(current));
                current.clear();
                inside = false;
            }
            continue;
        }
        if (inside) current.push_back(line);
    }
    if (inside) {
        blocks.push_back(join_lines(current));
        log.add("unterminated-fence");
    }

    std::string out;
    if (any_fence) {
        log.add("fence-extraction");
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const std::string body = trim_copy(blocks[i]);
            if (body.empty()) continue;
            if (!out.empty()) out += "\n\n";
            out += body;
        }
    } else {
        log.add("no-fence-passthrough");
        out = raw;
    }

    if (out.find("```") != std::string::npos || out.find("\"\"\"") != std::string::npos) {
        erase_all(out, "```");
        erase_all(out, "\"\"\"");
        log.add("stray-fence-strip");
    }
    return trim_copy(out);
}

bool line_starts_with_keyword(const std::string& line, const std::vector<std::string>& keywords) {
    const std::string probe = lower_copy(trim_copy(line));
    for (const std::string& kw : keywords) {
        if (probe.starts_with(lower_copy(kw))) return true;
    }
    return false;
}

std::string strip_markdown_line(const std::string& line, RuleLog& log) {
    std::string out = line;
    if (out.find('`') != std::string::npos) {
        erase_all(out, "`");
        log.add("markdown-strip");
    }
    if (out.find("**") != std::string::npos) {
        erase_all(out, "**");
        log.add("markdown-strip");
    }
    std::size_t indent = out.find_first_not_of(" \t");
    if (indent == std::string::npos) return out;
    if (out[indent] == '#') {
        std::size_t pos = indent;
        while (pos < out.size() && out[pos] == '#') ++pos;
        while (pos < out.size() && (out[pos] == ' ' || out[pos] == '\t')) ++pos;
        out = out.substr(0, indent) + out.substr(pos);
        log.add("markdown-strip");
    } else if ((out[indent] == '*' || out[indent] == '-') && indent + 1 < out.size() &&
               (out[indent + 1] == ' ' || out[indent + 1] == '\t')) {
        std::size_t pos = indent + 1;
        while (pos < out.size() && (out[pos] == ' ' || out[pos] == '\t')) ++pos;
        out = out.substr(0, indent) + out.substr(pos);
        log.add("markdown-strip");
    }
    return out;
}

std::string requirement_pass(const std::string& raw, const CleaningConfig& cfg, RuleLog& log) {
    std::vector<std::string> lines = split_lines(raw);

    // preamble keywords on the first two lines
    std::vector<std::size_t> drop;
    for (std::size_t i = 0; i < lines.size() && i < 2; ++i) {
        if (line_starts_with_keyword(lines[i], cfg.preamble_keywords)) drop.push_back(i);
    }
    // summary keywords on the last two lines
    for (std::size_t back = 0; back < 2 && back < lines.size(); ++back) {
        const std::size_t i = lines.size() - 1 - back;
        if (std::find(drop.begin(), drop.end(), i) != drop.end()) continue;
        if (line_starts_with_keyword(lines[i], cfg.summary_keywords)) drop.push_back(i);
    }
    if (!drop.empty()) {
        std::sort(drop.begin(), drop.end(), std::greater<>());
        for (std::size_t i : drop) {
            if (i < 2) log.add("preamble-removal");
            else log.add("summary-removal");
            lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(i));
        }
    }

    for (std::string& line : lines) line = strip_markdown_line(line, log);

    return trim_copy(join_lines(lines));
}

}  // namespace

CleanedOutput extract_code(const std::string& raw) {
    RuleLog log;
    std::string text = code_pass(raw, log);
    // second pass only to guarantee idempotence on pathological inputs; its
    // rules count only if it actually changed the text
    RuleLog second;
    std::string again = code_pass(text, second);
    if (again != text) {
        text = std::move(again);
        for (const std::string& rule : second.ordered()) log.add(rule);
    }

    if (text.empty()) throw TraceError(Errc::EmptyGeneration, "code output empty after cleaning");
    CleanedOutput out;
    out.text = std::move(text);
    out.kind = CleanKind::Code;
    out.applied_rules = log.ordered();
    return out;
}

CleanedOutput extract_requirement(const std::string& raw, const CleaningConfig& cfg) {
    RuleLog log;
    std::string text = trim_copy(raw);
    // run to a fixpoint; termination holds because any change strictly
    // shortens the text
    while (true) {
        std::string next = requirement_pass(text, cfg, log);
        if (next == text) break;
        text = std::move(next);
    }
    if (text.empty()) throw TraceError(Errc::EmptyGeneration, "requirement output empty after cleaning");
    CleanedOutput out;
    out.text = std::move(text);
    out.kind = CleanKind::Requirement;
    out.applied_rules = log.ordered();
    return out;
}

}  // namespace trace
