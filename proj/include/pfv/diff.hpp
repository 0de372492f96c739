// SPDX-License-Identifier: Apache-2.0
//
// Differential comparison of two FormatSpecs (the code-derived spec vs the
// document-derived spec). Fields are matched by resolved bit position per
// branch-consistent path, never by name; constraints are compared per
// aligned field group by bounded-domain implication checking; each
// constraint discrepancy gets a witness packet when one can be found.

#ifndef PFV_DIFF_HPP
#define PFV_DIFF_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfv/ast.hpp"
#include "pfv/eval.hpp"

namespace pfv::diff {

inline constexpr int kReportSchemaVersion = 1;

enum class DiscrepancyKind {
    TypeMismatch,
    MissingFieldInCode,
    MissingFieldInDoc,
    ConstraintMissingInCode,
    ConstraintMissingInDoc,
    ConstraintConflict,
};

const char* kind_text(DiscrepancyKind k);
std::optional<DiscrepancyKind> kind_from_text(const std::string& s);

enum class Side { Code, Doc };

struct Witness {
    std::vector<std::uint8_t> bytes;
    Side accepted_by = Side::Code;  // the other side rejects
};

struct Discrepancy {
    DiscrepancyKind kind = DiscrepancyKind::TypeMismatch;
    std::string code_location;  // structural path on the code side ("" when absent)
    std::string doc_location;
    std::string code_detail;
    std::string doc_detail;
    std::optional<std::string> constraint_id;
    std::optional<Witness> witness;
};

struct ValidationReport {
    std::string code_name;
    std::string doc_name;
    std::string code_digest;
    std::string doc_digest;
    std::vector<Discrepancy> discrepancies;
    std::map<std::string, std::size_t> summary;  // kind text -> count
};

// --- field alignment ---

struct FieldKey {
    std::string path;  // structural declaration path
    std::string name;
    auto operator<=>(const FieldKey&) const = default;
};

struct AlignmentGroup {
    std::vector<FieldKey> code_fields;
    std::vector<FieldKey> doc_fields;
    bool width_mismatch = false;
};

struct Alignment {
    std::vector<AlignmentGroup> groups;          // unique across paths
    std::vector<FieldKey> unmatched_code;        // never matched on any path
    std::vector<FieldKey> unmatched_doc;
};

Alignment align_fields(const dsl::FormatSpec& code, const dsl::FormatSpec& doc);

// --- constraint equivalence ---

enum class EquivRelation { Equivalent, FirstImpliesSecond, SecondImpliesFirst, Incomparable };

const char* relation_text(EquivRelation r);

struct EquivResult {
    EquivRelation relation = EquivRelation::Incomparable;
    bool exhaustive = false;
    // Assignment where the first holds and the second does not / vice versa.
    std::optional<dsl::Env> first_not_second;
    std::optional<dsl::Env> second_not_first;
};

// Decides the relation over the joint domain of the referenced fields.
// Domains up to 2^20 joint assignments are enumerated exhaustively; larger
// ones are sampled (2^16 draws plus all per-field boundary combinations).
// `widths` maps field name to bit width; "total_len" may be included to
// bound the builtin (16 bits by default).
EquivResult constraints_equivalent(const dsl::ExprPtr& c1, const dsl::ExprPtr& c2,
                                   const std::map<std::string, int>& widths);

// --- the differ ---

struct DiffOptions {
    bool witnesses = true;
    int witness_budget = 64;
    std::uint64_t witness_seed = 0x77;
};

ValidationReport diff_specs(const dsl::FormatSpec& code, const dsl::FormatSpec& doc,
                            const DiffOptions& opts = {});

nlohmann::json report_to_json(const ValidationReport& report);
ValidationReport report_from_json(const nlohmann::json& j);

// --- catalog-aware rendering ---

struct CatalogEntry {
    std::string id;
    std::string status;  // known | new
    std::string description;
    std::string expect_kind;
    std::string path_contains;
    std::string detail_contains;  // optional extra filter
};

std::vector<CatalogEntry> load_catalog(const std::filesystem::path& path);

// entry id -> indices into report.discrepancies
std::map<std::string, std::vector<std::size_t>> catalog_coverage(
    const ValidationReport& report, const std::vector<CatalogEntry>& entries);

std::string render_text(const ValidationReport& report,
                        const std::vector<CatalogEntry>* catalog = nullptr);

}  // namespace pfv::diff

#endif
