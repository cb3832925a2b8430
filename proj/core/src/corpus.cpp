#include "codeshift/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "codeshift/error.hpp"
#include "codeshift/io.hpp"
#include "codeshift/parallel.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace codeshift {

std::string_view language_name(Language lang) {
    switch (lang) {
    case Language::python: return "python";
    case Language::java: return "java";
    case Language::other: return "other";
    }
    return "other";
}

Language language_from_name(std::string_view name) {
    if (name == "python") return Language::python;
    if (name == "java") return Language::java;
    if (name == "other") return Language::other;
    throw Error(Errc::schema_error, "unknown language \"" + std::string(name) + "\"");
}

const CodeFile* CorpusManifest::find(const std::string& file_id) const {
    auto it = std::lower_bound(files.begin(), files.end(), file_id,
                               [](const CodeFile& f, const std::string& id) { return f.file_id < id; });
    if (it != files.end() && it->file_id == file_id) return &*it;
    return nullptr;
}

std::vector<std::string> CorpusManifest::task_ids() const {
    std::set<std::string> tasks;
    for (const auto& f : files) tasks.insert(f.task_id);
    return {tasks.begin(), tasks.end()};
}

namespace {

CodeFile parse_manifest_line(const std::string& line, std::size_t lineno) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(Errc::schema_error,
                    "manifest line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!obj.is_object())
        throw Error(Errc::schema_error, "manifest line " + std::to_string(lineno) + ": not an object");

    CodeFile f;
    try {
        f.file_id = obj.at("file_id").get<std::string>();
        f.path = fs::path(obj.at("path").get<std::string>());
        f.language = language_from_name(obj.at("language").get<std::string>());
        f.task_id = obj.at("task_id").get<std::string>();
        f.programmer_id = obj.at("programmer_id").get<std::string>();
        if (obj.contains("timestamp") && !obj.at("timestamp").is_null())
            f.timestamp = obj.at("timestamp").get<std::int64_t>();
    } catch (const json::exception& e) {
        throw Error(Errc::schema_error,
                    "manifest line " + std::to_string(lineno) + ": " + e.what());
    }
    return f;
}

} // namespace

CorpusManifest ingest_corpus(const fs::path& root_dir, const fs::path& manifest_path,
                             const std::string& corpus_id, unsigned jobs) {
    const std::string manifest_text = read_file(manifest_path);

    CorpusManifest m;
    m.corpus_id = corpus_id;

    std::size_t lineno = 0;
    for (const auto& line : split_lines(manifest_text)) {
        ++lineno;
        if (line.empty()) continue;
        m.files.push_back(parse_manifest_line(line, lineno));
    }

    // Load sources; order-independent because every slot is its own file.
    parallel_for(m.files.size(), jobs, [&](std::size_t i) {
        CodeFile& f = m.files[i];
        const fs::path full = root_dir / f.path;
        if (!fs::exists(full)) {
            throw Error(Errc::missing_file, f.file_id + ": " + full.string());
        }
        f.source = read_file(full);
    });

    for (const auto& f : m.files) {
        if (f.task_id.empty()) throw Error(Errc::empty_task, "file " + f.file_id);
        if (f.source.empty())
            throw Error(Errc::invalid_encoding, "file " + f.file_id + ": empty source");
        if (!is_valid_utf8(f.source))
            throw Error(Errc::invalid_encoding, "file " + f.file_id + ": not valid UTF-8");
    }

    std::sort(m.files.begin(), m.files.end(),
              [](const CodeFile& a, const CodeFile& b) { return a.file_id < b.file_id; });
    for (std::size_t i = 1; i < m.files.size(); ++i) {
        if (m.files[i].file_id == m.files[i - 1].file_id)
            throw Error(Errc::duplicate_id, m.files[i].file_id);
    }

    std::size_t default_counts[3] = {0, 0, 0};
    for (const auto& f : m.files) default_counts[static_cast<int>(f.language)]++;
    if (default_counts[0] >= default_counts[1] && default_counts[0] >= default_counts[2] &&
        !m.files.empty())
        m.language_default = Language::python;
    else if (default_counts[1] >= default_counts[2] && !m.files.empty())
        m.language_default = Language::java;
    return m;
}

std::string serialize_corpus(const CorpusManifest& m) {
    std::string out;
    for (const auto& f : m.files) {
        json obj;
        obj["file_id"] = f.file_id;
        obj["path"] = f.path.generic_string();
        obj["language"] = std::string(language_name(f.language));
        obj["task_id"] = f.task_id;
        obj["programmer_id"] = f.programmer_id;
        if (f.timestamp)
            obj["timestamp"] = *f.timestamp;
        else
            obj["timestamp"] = nullptr;
        obj["corpus_id"] = m.corpus_id;
        out += obj.dump();
        out += '\n';
    }
    return out;
}

ValidationReport validate_manifest(const CorpusManifest& m, ShiftType shift,
                                   const SplitConfig& cfg) {
    ValidationReport report;
    report.feasible = true;

    std::map<std::string, std::vector<const CodeFile*>> by_task;
    for (const auto& f : m.files) by_task[f.task_id].push_back(&f);

    const long quota_all = static_cast<long>(cfg.n_train_per_class) + cfg.n_id_test_per_class +
                           cfg.n_ood_test_per_class;

    if (shift == ShiftType::task) {
        const long total_tasks = static_cast<long>(by_task.size());
        if (cfg.n_id_classes + cfg.n_ood_classes > total_tasks) {
            report.feasible = false;
            report.notes.push_back("corpus has " + std::to_string(total_tasks) +
                                   " tasks, config needs " +
                                   std::to_string(cfg.n_id_classes + cfg.n_ood_classes));
        }
        // Task roles are seed-dependent, so every task must be able to play
        // either role.
        for (const auto& [task, files] : by_task) {
            TaskValidation tv{task, true, ""};
            const long need_id = static_cast<long>(cfg.n_train_per_class) + cfg.n_id_test_per_class;
            const long have = static_cast<long>(files.size());
            if (have < need_id || have < cfg.n_ood_test_per_class) {
                tv.feasible = false;
                tv.reason = "has " + std::to_string(have) + " files, needs " +
                            std::to_string(std::max<long>(need_id, cfg.n_ood_test_per_class));
            }
            report.feasible = report.feasible && tv.feasible;
            report.tasks.push_back(std::move(tv));
        }
        return report;
    }

    if (cfg.n_id_classes > 0 &&
        static_cast<std::size_t>(cfg.n_id_classes) != by_task.size()) {
        report.notes.push_back("config declares " + std::to_string(cfg.n_id_classes) +
                               " classes, corpus has " + std::to_string(by_task.size()));
    }

    for (const auto& [task, files] : by_task) {
        TaskValidation tv{task, true, ""};
        const long have = static_cast<long>(files.size());

        if (have < quota_all) {
            tv.feasible = false;
            tv.reason = "has " + std::to_string(have) + " files, quotas need " +
                        std::to_string(quota_all);
        }

        if (tv.feasible && shift == ShiftType::time) {
            bool all_stamped = std::all_of(files.begin(), files.end(),
                                           [](const CodeFile* f) { return f->timestamp.has_value(); });
            if (!all_stamped) {
                tv.feasible = false;
                tv.reason = "files without timestamps";
            }
        }

        if (tv.feasible && shift == ShiftType::programmer) {
            std::map<std::string, long> per_prog;
            for (const CodeFile* f : files) per_prog[f->programmer_id]++;
            if (per_prog.size() < 2) {
                tv.feasible = false;
                tv.reason = "only " + std::to_string(per_prog.size()) + " distinct programmer(s)";
            } else {
                // Worst case: the seeded walk consumes the largest programmers
                // first. The check here is the cheap necessary condition; the
                // splitter still errors precisely when a draw cannot be filled.
                long eligible_files = 0;
                for (const auto& [prog, cnt] : per_prog)
                    if (cnt >= 2) eligible_files += cnt;
                if (eligible_files < cfg.n_train_per_class + cfg.n_id_test_per_class) {
                    tv.feasible = false;
                    tv.reason = "not enough files from programmers with >= 2 submissions";
                }
            }
        }

        report.feasible = report.feasible && tv.feasible;
        report.tasks.push_back(std::move(tv));
    }
    return report;
}

} // namespace codeshift
