// SPDX-License-Identifier: Apache-2.0

#include "pfv/retrieval.hpp"

#include <algorithm>
#include <cctype>

namespace pfv::retrieval {

const char* symbol_kind_text(SymbolKind k) {
    switch (k) {
        case SymbolKind::Function: return "function";
        case SymbolKind::Type: return "type";
        case SymbolKind::Macro: return "macro";
        case SymbolKind::Global: return "global";
    }
    return "?";
}

namespace {

const std::set<std::string>& c_keywords() {
    static const std::set<std::string> kw = {
        "auto",     "break",    "case",     "char",   "const",    "continue", "default",
        "do",       "double",   "else",     "enum",   "extern",   "float",    "for",
        "goto",     "if",       "inline",   "int",    "long",     "register", "restrict",
        "return",   "short",    "signed",   "sizeof", "static",   "struct",   "switch",
        "typedef",  "union",    "unsigned", "void",   "volatile", "while",    "_Bool",
        "bool",     "true",     "false",    "NULL",   "nullptr",  "offsetof", "alignof",
        "__attribute__", "__extension__", "__typeof__", "typeof"};
    return kw;
}

const std::set<std::string>& builtin_allowlist() {
    static const std::set<std::string> allow = {
        // <string.h>, <stdlib.h>, <stdio.h>
        "memcpy", "memmove", "memset", "memcmp", "memchr", "strlen", "strcmp", "strncmp",
        "strcpy", "strncpy", "strcat", "strchr", "strstr", "snprintf", "sprintf", "printf",
        "fprintf", "fputs", "puts", "putchar", "fflush", "fread", "fwrite", "fopen",
        "fclose", "malloc", "calloc", "realloc", "free", "abort", "exit", "assert",
        "abs", "labs", "atoi", "strtol", "strtoul", "qsort", "bsearch",
        // common integer/typedef names
        "size_t", "ssize_t", "ptrdiff_t", "intptr_t", "uintptr_t", "int8_t", "int16_t",
        "int32_t", "int64_t", "uint8_t", "uint16_t", "uint32_t", "uint64_t", "FILE",
        "va_list", "time_t", "socklen_t",
        // network/system calls visible in parsing code
        "htons", "htonl", "ntohs", "ntohl", "recv", "recvfrom", "recvmsg", "send",
        "sendto", "sendmsg", "socket", "bind", "close", "read", "write", "ioctl",
        "getsockopt", "setsockopt", "errno", "stdin", "stdout", "stderr",
        // common system structs
        "sockaddr", "sockaddr_in", "sockaddr_in6", "in_addr", "in6_addr", "msghdr",
        "cmsghdr", "iovec", "timeval", "timespec"};
    return allow;
}

struct CTok {
    enum class Kind { Ident, Number, Punct, String };
    Kind kind = Kind::Punct;
    std::string text;
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Directive spans (full logical lines including continuations) are cut out
// before tokenizing; #define bodies are indexed separately.
struct DirectiveScan {
    struct Directive {
        std::size_t begin = 0, end = 0;
        int line = 1;
        std::string text;
    };
    std::vector<Directive> defines;
    std::vector<std::pair<std::size_t, std::size_t>> cuts;
};

DirectiveScan scan_directives(std::string_view src) {
    DirectiveScan out;
    std::size_t pos = 0;
    int line = 1;
    bool at_line_start = true;
    while (pos < src.size()) {
        char c = src[pos];
        if (at_line_start) {
            std::size_t p = pos;
            while (p < src.size() && (src[p] == ' ' || src[p] == '\t')) ++p;
            if (p < src.size() && src[p] == '#') {
                std::size_t start = pos;
                int start_line = line;
                std::size_t q = p;
                while (q < src.size()) {
                    if (src[q] == '\n') {
                        if (q > 0 && src[q - 1] == '\\') {
                            ++line;
                            ++q;
                            continue;
                        }
                        break;
                    }
                    ++q;
                }
                out.cuts.emplace_back(start, q);
                std::string text(src.substr(start, q - start));
                std::size_t h = text.find('#');
                std::size_t w = h + 1;
                while (w < text.size() && std::isspace(static_cast<unsigned char>(text[w])))
                    ++w;
                if (text.compare(w, 6, "define") == 0)
                    out.defines.push_back({start, q, start_line, text});
                pos = q;
                at_line_start = false;
                continue;
            }
        }
        if (c == '\n') {
            ++line;
            at_line_start = true;
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            at_line_start = false;
        }
        ++pos;
    }
    return out;
}

bool in_cuts(std::size_t pos, const std::vector<std::pair<std::size_t, std::size_t>>& cuts,
             std::size_t& cut_end) {
    for (const auto& [b, e] : cuts)
        if (pos >= b && pos < e) {
            cut_end = e;
            return true;
        }
    return false;
}

std::vector<CTok> c_tokenize(std::string_view src,
                             const std::vector<std::pair<std::size_t, std::size_t>>& cuts) {
    std::vector<CTok> out;
    std::size_t pos = 0;
    while (pos < src.size()) {
        std::size_t cut_end;
        if (in_cuts(pos, cuts, cut_end)) {
            pos = cut_end;
            continue;
        }
        char c = src[pos];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
            continue;
        }
        // comments
        if (c == '/' && pos + 1 < src.size()) {
            if (src[pos + 1] == '/') {
                while (pos < src.size() && src[pos] != '\n') ++pos;
                continue;
            }
            if (src[pos + 1] == '*') {
                pos += 2;
                while (pos + 1 < src.size() && !(src[pos] == '*' && src[pos + 1] == '/'))
                    ++pos;
                pos = std::min(pos + 2, src.size());
                continue;
            }
        }
        if (c == '"' || c == '\'') {
            char quote = c;
            std::size_t start = pos++;
            while (pos < src.size() && src[pos] != quote) {
                if (src[pos] == '\\') ++pos;
                ++pos;
            }
            pos = std::min(pos + 1, src.size());
            out.push_back({CTok::Kind::String, std::string(src.substr(start, pos - start)),
                           start, pos});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos;
            while (pos < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
                ++pos;
            out.push_back(
                {CTok::Kind::Ident, std::string(src.substr(start, pos - start)), start, pos});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) ||
                                        src[pos] == '.' || src[pos] == '_'))
                ++pos;
            out.push_back(
                {CTok::Kind::Number, std::string(src.substr(start, pos - start)), start, pos});
            continue;
        }
        out.push_back({CTok::Kind::Punct, std::string(1, c), pos, pos + 1});
        ++pos;
    }
    return out;
}

int line_of(std::string_view src, std::size_t pos) {
    int line = 1;
    for (std::size_t i = 0; i < pos && i < src.size(); ++i)
        if (src[i] == '\n') ++line;
    return line;
}

// Heuristic declarator name of a typedef statement.
std::string typedef_name(const std::vector<CTok>& toks, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
        if (toks[i].kind == CTok::Kind::Punct && toks[i].text == "(" && i + 1 < end &&
            toks[i + 1].text == "*" && i + 2 < end &&
            toks[i + 2].kind == CTok::Kind::Ident)
            return toks[i + 2].text;  // typedef ret (*name)(args)
    }
    std::string last;
    int depth = 0;
    for (std::size_t i = begin; i < end; ++i) {
        const auto& t = toks[i];
        if (t.kind == CTok::Kind::Punct) {
            if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
            if (t.text == ")" || t.text == "]" || t.text == "}") --depth;
        }
        if (depth == 0 && t.kind == CTok::Kind::Ident && !c_keywords().count(t.text))
            last = t.text;
    }
    return last;
}

std::size_t stmt_start(const std::vector<CTok>& toks, std::size_t at);

void scan_file(const std::filesystem::path& root, const std::string& rel,
               const std::string& src, std::map<std::string, std::vector<SymbolDef>>& out) {
    (void)root;
    DirectiveScan dirs = scan_directives(src);

    for (const auto& d : dirs.defines) {
        // name = first identifier after "define"
        std::size_t p = d.text.find("define");
        p += 6;
        while (p < d.text.size() && std::isspace(static_cast<unsigned char>(d.text[p]))) ++p;
        std::size_t q = p;
        while (q < d.text.size() && (std::isalnum(static_cast<unsigned char>(d.text[q])) ||
                                     d.text[q] == '_'))
            ++q;
        if (q > p) {
            SymbolDef def;
            def.name = d.text.substr(p, q - p);
            def.kind = SymbolKind::Macro;
            def.file = rel;
            def.begin = d.begin;
            def.end = d.end;
            def.line = d.line;
            def.text = d.text;
            out[def.name].push_back(std::move(def));
        }
    }

    std::vector<CTok> toks = c_tokenize(src, dirs.cuts);

    auto matching_brace = [&](std::size_t open) -> std::size_t {
        int depth = 0;
        for (std::size_t i = open; i < toks.size(); ++i) {
            if (toks[i].kind != CTok::Kind::Punct) continue;
            if (toks[i].text == "{") ++depth;
            if (toks[i].text == "}") {
                --depth;
                if (depth == 0) return i;
            }
        }
        return toks.size() - 1;
    };

    auto add = [&](const std::string& name, SymbolKind kind, std::size_t tok_begin,
                   std::size_t tok_end) {
        if (name.empty() || c_keywords().count(name)) return;
        SymbolDef def;
        def.name = name;
        def.kind = kind;
        def.file = rel;
        def.begin = toks[tok_begin].begin;
        def.end = toks[tok_end].end;
        def.line = line_of(src, def.begin);
        def.text = src.substr(def.begin, def.end - def.begin);
        out[name].push_back(std::move(def));
    };

    std::size_t i = 0;
    while (i < toks.size()) {
        std::size_t stmt = i;

        // typedef ... ;
        if (toks[i].kind == CTok::Kind::Ident && toks[i].text == "typedef") {
            std::size_t j = i;
            int depth = 0;
            while (j < toks.size()) {
                if (toks[j].kind == CTok::Kind::Punct) {
                    if (toks[j].text == "{" || toks[j].text == "(") ++depth;
                    if (toks[j].text == "}" || toks[j].text == ")") --depth;
                    if (toks[j].text == ";" && depth == 0) break;
                }
                ++j;
            }
            if (j >= toks.size()) break;
            add(typedef_name(toks, i + 1, j), SymbolKind::Type, stmt, j);
            i = j + 1;
            continue;
        }

        // struct|union|enum NAME { ... } [declarator] ;
        if (toks[i].kind == CTok::Kind::Ident &&
            (toks[i].text == "struct" || toks[i].text == "union" || toks[i].text == "enum") &&
            i + 2 < toks.size() && toks[i + 1].kind == CTok::Kind::Ident &&
            toks[i + 2].text == "{") {
            // Only a definition when it starts the statement (not a return
            // type or member); approximated by checking the previous token.
            bool at_stmt = i == 0 || (toks[i - 1].kind == CTok::Kind::Punct &&
                                      (toks[i - 1].text == ";" || toks[i - 1].text == "}")) ||
                           (toks[i - 1].kind == CTok::Kind::Ident &&
                            (toks[i - 1].text == "static" || toks[i - 1].text == "const"));
            std::size_t close = matching_brace(i + 2);
            std::size_t j = close;
            while (j + 1 < toks.size() && toks[j + 1].text != ";") ++j;
            std::size_t semi = std::min(j + 1, toks.size() - 1);
            if (at_stmt) {
                add(toks[i + 1].text, SymbolKind::Type, i, semi);
                // trailing declarator doubles as a global
                if (semi > close + 1 && toks[semi - 1].kind == CTok::Kind::Ident)
                    add(toks[semi - 1].text, SymbolKind::Global, i, semi);
                i = semi + 1;
                continue;
            }
        }

        // function definition: IDENT ( ... ) { ... } at top level
        if (toks[i].kind == CTok::Kind::Punct && toks[i].text == "(") {
            if (i > 0 && toks[i - 1].kind == CTok::Kind::Ident &&
                !c_keywords().count(toks[i - 1].text)) {
                int depth = 1;
                std::size_t j = i + 1;
                while (j < toks.size() && depth > 0) {
                    if (toks[j].text == "(") ++depth;
                    if (toks[j].text == ")") --depth;
                    ++j;
                }
                // skip qualifiers between ) and { or ;
                std::size_t k = j;
                while (k < toks.size() && toks[k].kind == CTok::Kind::Ident) ++k;
                if (k < toks.size() && toks[k].text == "{") {
                    std::size_t close = matching_brace(k);
                    add(toks[i - 1].text, SymbolKind::Function, stmt_start(toks, i - 1),
                        close);
                    i = close + 1;
                    continue;
                }
            }
        }

        // global: statement ending ';' with a declarator
        if (toks[i].kind == CTok::Kind::Punct && toks[i].text == ";") {
            std::size_t start = stmt_start(toks, i);
            if (start < i) {
                std::string name;
                for (std::size_t j = start; j < i; ++j) {
                    if (toks[j].kind != CTok::Kind::Ident || c_keywords().count(toks[j].text))
                        continue;
                    const auto& next = toks[j + 1];
                    if (next.kind == CTok::Kind::Punct &&
                        (next.text == "=" || next.text == ";" || next.text == "[" ||
                         next.text == ",")) {
                        name = toks[j].text;
                        break;
                    }
                }
                bool has_paren = false;
                for (std::size_t j = start; j < i; ++j)
                    if (toks[j].text == "(") has_paren = true;
                if (!name.empty() && !has_paren) add(name, SymbolKind::Global, start, i);
            }
        }

        if (toks[i].text == "{")
            i = matching_brace(i) + 1;
        else
            ++i;
    }
}

// Start of the current top-level statement: just after the previous ';' or
// '}' at depth zero.
std::size_t stmt_start(const std::vector<CTok>& toks, std::size_t at) {
    int depth = 0;
    std::size_t i = at;
    while (i > 0) {
        const auto& t = toks[i - 1];
        if (t.kind == CTok::Kind::Punct) {
            if (t.text == ")" || t.text == "}" || t.text == "]") ++depth;
            if (t.text == "(" || t.text == "{" || t.text == "[") --depth;
            if (depth == 0 && (t.text == ";" || t.text == "}")) return i;
        }
        --i;
    }
    return 0;
}

}  // namespace

SourceIndex index_repo(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path) || !std::filesystem::is_directory(path))
        throw Error("retrieval", "repository path does not exist: " + path.string());
    static const std::set<std::string> exts = {".c", ".h", ".cc", ".hh", ".cpp", ".hpp",
                                               ".cxx"};
    SourceIndex index;
    index.root = path;
    std::set<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(path))
        if (e.is_regular_file() && exts.count(e.path().extension().string()))
            files.insert(e.path());
    if (files.empty()) throw Error("retrieval", "no source files under " + path.string());
    for (const auto& f : files) {
        std::string rel = std::filesystem::relative(f, path).generic_string();
        try {
            std::string src = read_file(f);
            scan_file(path, rel, src, index.symbols);
            index.files.push_back(rel);
        } catch (const Error& e) {
            index.warnings.push_back(rel + ": " + e.what());
        }
    }
    return index;
}

std::vector<SymbolDef> lookup_definition(const SourceIndex& index, const std::string& name) {
    auto it = index.symbols.find(name);
    if (it == index.symbols.end()) return {};
    std::vector<SymbolDef> out = it->second;
    std::sort(out.begin(), out.end(), [](const SymbolDef& a, const SymbolDef& b) {
        return std::tie(a.file, a.begin) < std::tie(b.file, b.begin);
    });
    return out;
}

namespace {

const std::set<std::string>& type_words() {
    static const std::set<std::string> tw = {"void",     "char", "short", "int",
                                             "long",     "float", "double", "signed",
                                             "unsigned", "const", "static", "register",
                                             "volatile", "struct", "union", "enum",
                                             "bool",     "_Bool"};
    return tw;
}

bool all_caps(const std::string& s) {
    if (s.size() < 2) return false;
    bool has_alpha = false;
    for (char c : s) {
        if (std::islower(static_cast<unsigned char>(c))) return false;
        if (std::isupper(static_cast<unsigned char>(c))) has_alpha = true;
    }
    return has_alpha;
}

bool is_type_start(const std::string& word, const SourceIndex& index) {
    if (type_words().count(word)) return true;
    if (builtin_allowlist().count(word)) return true;  // size_t etc.
    auto it = index.symbols.find(word);
    if (it != index.symbols.end())
        for (const auto& d : it->second)
            if (d.kind == SymbolKind::Type) return true;
    return false;
}

}  // namespace

std::set<std::string> expand_dependencies(const SourceIndex& index,
                                          std::string_view snippet) {
    DirectiveScan dirs = scan_directives(snippet);
    std::vector<CTok> toks = c_tokenize(snippet, dirs.cuts);
    if (toks.empty() && dirs.defines.empty())
        throw Error("retrieval", "snippet has no parseable content");

    std::set<std::string> defined;   // names the snippet itself declares
    std::set<std::string> candidates;

    for (const auto& d : dirs.defines) {
        std::size_t p = d.text.find("define") + 6;
        while (p < d.text.size() && std::isspace(static_cast<unsigned char>(d.text[p]))) ++p;
        std::size_t q = p;
        while (q < d.text.size() && (std::isalnum(static_cast<unsigned char>(d.text[q])) ||
                                     d.text[q] == '_'))
            ++q;
        if (q > p) defined.insert(d.text.substr(p, q - p));
        // macro body identifiers become candidates too
        std::vector<CTok> body = c_tokenize(d.text.substr(q), {});
        for (std::size_t i = 0; i < body.size(); ++i) {
            const auto& t = body[i];
            if (t.kind != CTok::Kind::Ident) continue;
            if (c_keywords().count(t.text) || builtin_allowlist().count(t.text)) continue;
            bool call = i + 1 < body.size() && body[i + 1].text == "(";
            if (call || all_caps(t.text) || index.symbols.count(t.text))
                candidates.insert(t.text);
        }
    }

    // function definition shape: name + params
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
        if (toks[i].kind == CTok::Kind::Ident && toks[i + 1].text == "(" &&
            !c_keywords().count(toks[i].text)) {
            // find matching ')' then check '{' => this is the def header
            int depth = 1;
            std::size_t j = i + 2;
            std::size_t last_ident = 0;
            while (j < toks.size() && depth > 0) {
                if (toks[j].text == "(") ++depth;
                if (toks[j].text == ")") --depth;
                if (depth == 1 && toks[j].kind == CTok::Kind::Ident) last_ident = j;
                if (depth == 1 && (toks[j].text == "," || toks[j].text == ")") &&
                    last_ident > 0 && toks[last_ident].kind == CTok::Kind::Ident &&
                    !c_keywords().count(toks[last_ident].text)) {
                    defined.insert(toks[last_ident].text);
                    last_ident = 0;
                }
                ++j;
            }
            if (j < toks.size() && toks[j].text == "{") {
                defined.insert(toks[i].text);
                break;  // only the outermost definition header
            }
        }
    }

    // local declarations: TYPE ... name [=,;[]
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].kind != CTok::Kind::Ident || !is_type_start(toks[i].text, index))
            continue;
        std::size_t j = i + 1;
        // skip further type words, struct tags and '*'
        while (j < toks.size() &&
               ((toks[j].kind == CTok::Kind::Ident &&
                 (is_type_start(toks[j].text, index) || type_words().count(toks[j].text))) ||
                toks[j].text == "*"))
            ++j;
        // declarators separated by commas until ';'
        while (j < toks.size()) {
            if (toks[j].kind == CTok::Kind::Ident && j + 1 < toks.size() &&
                toks[j + 1].kind == CTok::Kind::Punct &&
                (toks[j + 1].text == "=" || toks[j + 1].text == ";" ||
                 toks[j + 1].text == "," || toks[j + 1].text == "[")) {
                defined.insert(toks[j].text);
                // skip to ',' or ';' at depth 0
                int depth = 0;
                ++j;
                while (j < toks.size()) {
                    if (toks[j].text == "(" || toks[j].text == "[") ++depth;
                    if (toks[j].text == ")" || toks[j].text == "]") --depth;
                    if (depth == 0 && (toks[j].text == "," || toks[j].text == ";")) break;
                    ++j;
                }
                if (j < toks.size() && toks[j].text == ",") {
                    ++j;
                    while (j < toks.size() && toks[j].text == "*") ++j;
                    continue;
                }
            }
            break;
        }
    }

    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (t.kind != CTok::Kind::Ident) continue;
        const std::string& w = t.text;
        if (c_keywords().count(w) || builtin_allowlist().count(w)) continue;
        bool member = i > 0 && (toks[i - 1].text == "." ||
                                (i > 1 && toks[i - 1].text == ">" && toks[i - 2].text == "-"));
        if (member) continue;
        bool call = i + 1 < toks.size() && toks[i + 1].text == "(";
        bool tagged = i > 0 && toks[i - 1].kind == CTok::Kind::Ident &&
                      (toks[i - 1].text == "struct" || toks[i - 1].text == "union" ||
                       toks[i - 1].text == "enum");
        if (call || tagged || all_caps(w) || index.symbols.count(w)) candidates.insert(w);
    }

    std::set<std::string> out;
    for (const auto& c : candidates)
        if (!defined.count(c)) out.insert(c);
    return out;
}

ContextBundle closure_from_entry(const SourceIndex& index, const std::string& entry,
                                 std::size_t budget) {
    std::vector<SymbolDef> entry_defs;
    for (const auto& d : lookup_definition(index, entry))
        if (d.kind == SymbolKind::Function) entry_defs.push_back(d);
    if (entry_defs.empty())
        throw Error("retrieval", "entry function not found: " + entry);
    if (entry_defs.size() > 1) {
        std::string msg = "entry is ambiguous: " + entry + " defined in";
        for (const auto& d : entry_defs) msg += " " + d.file;
        throw Error("retrieval", msg);
    }

    ContextBundle bundle;
    bundle.entries.push_back(entry_defs[0]);
    std::set<std::string> resolved{entry};
    std::set<std::pair<std::string, SymbolKind>> in_bundle{{entry, SymbolKind::Function}};
    std::set<std::string> unresolved;
    std::set<std::string> frontier = expand_dependencies(index, entry_defs[0].text);

    while (!frontier.empty() && bundle.entries.size() < budget) {
        std::set<std::string> next;
        for (const auto& name : frontier) {
            if (bundle.entries.size() >= budget) {
                next.insert(name);
                continue;
            }
            if (resolved.count(name) || unresolved.count(name)) continue;
            std::vector<SymbolDef> defs = lookup_definition(index, name);
            if (defs.empty()) {
                unresolved.insert(name);
                continue;
            }
            resolved.insert(name);
            for (const auto& d : defs) {
                if (!in_bundle.insert({d.name, d.kind}).second) continue;
                if (bundle.entries.size() >= budget) break;
                bundle.entries.push_back(d);
                for (const auto& dep : expand_dependencies(index, d.text))
                    if (!resolved.count(dep) && !unresolved.count(dep)) next.insert(dep);
            }
        }
        std::set<std::string> pruned;
        for (const auto& n : next)
            if (!resolved.count(n)) pruned.insert(n);
        if (pruned == frontier) break;
        frontier = std::move(pruned);
    }

    for (const auto& u : unresolved) bundle.frontier.insert(u);
    for (const auto& f : frontier)
        if (!resolved.count(f)) bundle.frontier.insert(f);
    return bundle;
}

nlohmann::json bundle_to_json(const ContextBundle& bundle) {
    nlohmann::json j;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : bundle.entries) {
        j["entries"].push_back({{"name", e.name},
                                {"kind", symbol_kind_text(e.kind)},
                                {"file", e.file},
                                {"begin", e.begin},
                                {"end", e.end},
                                {"line", e.line},
                                {"text", e.text}});
    }
    j["frontier"] = bundle.frontier;
    return j;
}

}  // namespace pfv::retrieval
