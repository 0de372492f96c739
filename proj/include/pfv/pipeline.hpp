// SPDX-License-Identifier: Apache-2.0
//
// End-to-end pipeline: isolate the parser, extract the code-side and
// doc-side specs, diff them, and persist every intermediate artifact under
// the configured output directory.

#ifndef PFV_PIPELINE_HPP
#define PFV_PIPELINE_HPP

#include <filesystem>

#include "pfv/config.hpp"
#include "pfv/diff.hpp"

namespace pfv {

struct PipelineOutcome {
    diff::ValidationReport report;
    std::filesystem::path out_dir;
    // 0: no discrepancies, 2: discrepancies found
    int exit_code = 0;
};

// Runs isolate -> spec-from-code -> spec-from-doc -> diff. On a stage
// error, a manifest of the artifacts produced so far is still written
// before the error propagates.
PipelineOutcome run_pipeline(const PipelineConfig& config);

// Writes out/manifest.json listing every artifact with a content digest.
void write_manifest(const std::filesystem::path& out_dir);

}  // namespace pfv

#endif
