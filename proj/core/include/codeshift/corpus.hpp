#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "codeshift/split_config.hpp"

namespace codeshift {

enum class Language { python, java, other };

std::string_view language_name(Language lang);
Language language_from_name(std::string_view name);

// One source file plus the metadata every shift keys on. `timestamp` is
// epoch seconds and optional: some corpora carry no time tags.
struct CodeFile {
    std::string file_id;
    std::filesystem::path path; // relative to the corpus root
    Language language = Language::other;
    std::string task_id;
    std::string programmer_id;
    std::optional<std::int64_t> timestamp;
    std::string source; // UTF-8, non-empty

    friend bool operator==(const CodeFile&, const CodeFile&) = default;
};

// Files in canonical order (ascending file_id). That ordering is the
// determinism anchor for every seeded operation downstream.
struct CorpusManifest {
    std::string corpus_id;
    Language language_default = Language::other;
    std::vector<CodeFile> files;

    const CodeFile* find(const std::string& file_id) const;
    std::vector<std::string> task_ids() const; // distinct, sorted

    friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

// Reads the JSONL manifest, loads every referenced file under root_dir and
// returns the validated corpus. Parallel reads are fine: the result is
// sorted afterwards, so it does not depend on read order.
//
// Throws: MissingFile, DuplicateId, InvalidEncoding, EmptyTask, SchemaError.
CorpusManifest ingest_corpus(const std::filesystem::path& root_dir,
                             const std::filesystem::path& manifest_path,
                             const std::string& corpus_id = "corpus",
                             unsigned jobs = 1);

// JSONL with one object per line:
//   {"file_id","path","language","task_id","programmer_id","timestamp","corpus_id"}
// Sources are referenced by path, not embedded.
std::string serialize_corpus(const CorpusManifest& m);

// Report-only feasibility check: can this corpus fill cfg's quotas for the
// requested shift? Callers decide whether to abort.
struct TaskValidation {
    std::string task_id;
    bool feasible = false;
    std::string reason; // empty when feasible
};

struct ValidationReport {
    bool feasible = false;           // all tasks (and corpus-level checks) pass
    std::vector<std::string> notes;  // corpus-level findings
    std::vector<TaskValidation> tasks;
};

ValidationReport validate_manifest(const CorpusManifest& m, ShiftType shift,
                                   const SplitConfig& cfg);

} // namespace codeshift
