#pragma once

#include <map>
#include <string>
#include <vector>

#include "codeshift/corpus.hpp"
#include "codeshift/cst.hpp"
#include "codeshift/lexer.hpp"
#include "codeshift/split_config.hpp"

namespace codeshift {

enum class Partition { train, id_test, ood_test };

std::string_view partition_name(Partition p);
Partition partition_from_name(std::string_view name);

// One train / ID-test / OOD-test assignment. Files not in `assignments`
// were left out by the quotas. For every shift except task both label
// spaces are the same task list; the task shift keeps them disjoint.
struct SplitManifest {
    ShiftType shift = ShiftType::random;
    SplitConfig config;
    std::map<std::string, Partition> assignments; // file_id -> partition
    std::vector<std::string> label_space_id;      // sorted
    std::vector<std::string> label_space_ood;     // sorted

    std::vector<std::string> files_in(Partition p) const; // sorted file_ids

    friend bool operator==(const SplitManifest&, const SplitManifest&) = default;
};

// Every splitter is a pure function of (manifest, auxiliary inputs, config
// incl. seed). Per-task randomness comes from a stream seeded by
// hash(seed, task_id), so task processing order can never leak into the
// result. All ranking ties break on file_id.

// Uniform per-task shuffle, then quota assignment.
// Throws InsufficientFiles.
SplitManifest split_random(const CorpusManifest& m, const SplitConfig& cfg);

// Disjoint ID/OOD label spaces: a seeded task shuffle picks n_id_classes ID
// tasks and n_ood_classes OOD tasks, then files are drawn per task.
// Throws InsufficientTasks, InsufficientFiles.
SplitManifest split_task(const CorpusManifest& m, const SplitConfig& cfg);

// OOD files come from whole held-out programmers; remaining programmers
// with at least two submissions form the ID pool.
// Throws InsufficientProgrammers, InsufficientFiles.
SplitManifest split_programmer(const CorpusManifest& m, const SplitConfig& cfg);

// Newest files per task become OOD; earlier files shuffle into train/ID.
// Throws MissingTimestamps, InsufficientFiles.
SplitManifest split_time(const CorpusManifest& m, const SplitConfig& cfg);

// Files ranked by token_rarity against the per-task histogram; the rarest
// become OOD. Histograms must cover every file of each task.
// Throws InsufficientFiles, HistogramMismatch.
SplitManifest split_token(const CorpusManifest& m,
                          const std::map<std::string, TokenHistogram>& histograms,
                          const std::map<std::string, TokenSeq>& seqs, const SplitConfig& cfg,
                          const HistogramOptions& options = {});

// Files ranked by mean normalized tree distance to the rest of the task;
// the most distant become OOD.
// Throws InsufficientFiles, MatrixMismatch.
SplitManifest split_cst(const CorpusManifest& m,
                        const std::map<std::string, DistanceMatrix>& matrices,
                        const SplitConfig& cfg);

// {"shift", "config", "label_space_id", "label_space_ood", "assignments"}
// with keys sorted.
std::string serialize_split(const SplitManifest& s);
SplitManifest parse_split(const std::string& json_text);

} // namespace codeshift
