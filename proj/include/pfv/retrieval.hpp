// SPDX-License-Identifier: Apache-2.0
//
// Syntax-tree-flavored source indexing for C-family repositories: top-level
// definition lookup plus iterative dependency closure from an entry parsing
// function. The shipped profile covers function definitions, #define
// macros, aggregates/typedefs and file-scope globals; preprocessor
// conditionals are indexed under all branches.

#ifndef PFV_RETRIEVAL_HPP
#define PFV_RETRIEVAL_HPP

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pfv/util.hpp"

namespace pfv::retrieval {

enum class SymbolKind { Function, Type, Macro, Global };

const char* symbol_kind_text(SymbolKind k);

struct SymbolDef {
    std::string name;
    SymbolKind kind = SymbolKind::Function;
    std::string file;       // repo-relative path
    std::size_t begin = 0;  // byte span within the file
    std::size_t end = 0;
    int line = 1;
    std::string text;       // exact source slice [begin, end)
};

struct SourceIndex {
    std::filesystem::path root;
    std::map<std::string, std::vector<SymbolDef>> symbols;
    std::vector<std::string> files;     // indexed files, repo-relative, sorted
    std::vector<std::string> warnings;  // unreadable/skipped files
};

// Indexes *.c/*.h (and C++ spellings) under path. Unreadable files are
// skipped with a warning; a repo without source files is an error.
SourceIndex index_repo(const std::filesystem::path& path);

// All definitions of a name, with provenance; empty when unknown.
std::vector<SymbolDef> lookup_definition(const SourceIndex& index, const std::string& name);

// Identifiers a snippet uses but does not define, filtered against language
// keywords and the standard-header allowlist.
std::set<std::string> expand_dependencies(const SourceIndex& index,
                                          std::string_view snippet);

struct ContextBundle {
    std::vector<SymbolDef> entries;
    std::set<std::string> frontier;  // names left unresolved
};

// Breadth-first closure from the entry function: expand, resolve, repeat
// until the frontier drains or the bundle reaches `budget` symbols. The
// frontier is processed in sorted order, so the result is deterministic.
ContextBundle closure_from_entry(const SourceIndex& index, const std::string& entry,
                                 std::size_t budget = 200);

nlohmann::json bundle_to_json(const ContextBundle& bundle);

}  // namespace pfv::retrieval

#endif
