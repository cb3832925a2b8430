#include "codeshift/splitgen.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "codeshift/error.hpp"
#include "codeshift/rng.hpp"

using json = nlohmann::json;

namespace codeshift {

std::string_view partition_name(Partition p) {
    switch (p) {
    case Partition::train: return "train";
    case Partition::id_test: return "id_test";
    case Partition::ood_test: return "ood_test";
    }
    return "train";
}

Partition partition_from_name(std::string_view name) {
    if (name == "train") return Partition::train;
    if (name == "id_test") return Partition::id_test;
    if (name == "ood_test") return Partition::ood_test;
    throw Error(Errc::schema_error, "unknown partition \"" + std::string(name) + "\"");
}

std::vector<std::string> SplitManifest::files_in(Partition p) const {
    std::vector<std::string> out;
    for (const auto& [id, part] : assignments)
        if (part == p) out.push_back(id);
    return out; // map iteration is already sorted
}

namespace {

void check_counts(const SplitConfig& cfg, bool task_shift) {
    if (cfg.n_train_per_class <= 0 || cfg.n_id_test_per_class <= 0 ||
        cfg.n_ood_test_per_class <= 0)
        throw Error(Errc::config_error, "all per-class counts must be > 0");
    if (task_shift && (cfg.n_id_classes <= 0 || cfg.n_ood_classes <= 0))
        throw Error(Errc::config_error, "task shift needs n_id_classes and n_ood_classes > 0");
}

// Sorted file_ids per task; map order fixes the task processing order.
std::map<std::string, std::vector<const CodeFile*>> group_by_task(const CorpusManifest& m) {
    std::map<std::string, std::vector<const CodeFile*>> by_task;
    for (const auto& f : m.files) by_task[f.task_id].push_back(&f);
    return by_task; // files already sorted by file_id within the manifest
}

Rng task_rng(const SplitConfig& cfg, const std::string& task_id) {
    return Rng(derive_stream_seed(cfg.seed, "task:" + task_id));
}

// Seeded shuffle of the remaining pool, then train/id_test quota cuts.
void assign_id_pool(std::vector<std::string> pool, const SplitConfig& cfg,
                    const std::string& task_id, Rng& rng,
                    std::map<std::string, Partition>& assignments) {
    const std::size_t need = static_cast<std::size_t>(cfg.n_train_per_class) +
                             static_cast<std::size_t>(cfg.n_id_test_per_class);
    if (pool.size() < need)
        throw Error(Errc::insufficient_files,
                    "task " + task_id + ": ID pool has " + std::to_string(pool.size()) +
                        " files, quotas need " + std::to_string(need));
    std::sort(pool.begin(), pool.end());
    deterministic_shuffle(pool, rng);
    for (std::size_t i = 0; i < need; ++i)
        assignments[pool[i]] = i < static_cast<std::size_t>(cfg.n_train_per_class)
                                   ? Partition::train
                                   : Partition::id_test;
}

std::vector<std::string> same_label_space(
    const std::map<std::string, std::vector<const CodeFile*>>& by_task) {
    std::vector<std::string> tasks;
    tasks.reserve(by_task.size());
    for (const auto& [task, files] : by_task) tasks.push_back(task);
    return tasks;
}

} // namespace

SplitManifest split_random(const CorpusManifest& m, const SplitConfig& cfg) {
    check_counts(cfg, false);
    SplitManifest out;
    out.shift = ShiftType::random;
    out.config = cfg;

    auto by_task = group_by_task(m);
    out.label_space_id = same_label_space(by_task);
    out.label_space_ood = out.label_space_id;

    for (const auto& [task, files] : by_task) {
        const std::size_t quota = static_cast<std::size_t>(cfg.n_train_per_class) +
                                  cfg.n_id_test_per_class + cfg.n_ood_test_per_class;
        if (files.size() < quota)
            throw Error(Errc::insufficient_files,
                        "task " + task + ": has " + std::to_string(files.size()) +
                            " files, quotas need " + std::to_string(quota));
        std::vector<std::string> ids;
        ids.reserve(files.size());
        for (const CodeFile* f : files) ids.push_back(f->file_id);

        Rng rng = task_rng(cfg, task);
        deterministic_shuffle(ids, rng);
        std::size_t i = 0;
        for (; i < static_cast<std::size_t>(cfg.n_train_per_class); ++i)
            out.assignments[ids[i]] = Partition::train;
        for (; i < quota - cfg.n_ood_test_per_class; ++i)
            out.assignments[ids[i]] = Partition::id_test;
        for (; i < quota; ++i) out.assignments[ids[i]] = Partition::ood_test;
    }
    return out;
}

SplitManifest split_task(const CorpusManifest& m, const SplitConfig& cfg) {
    check_counts(cfg, true);
    SplitManifest out;
    out.shift = ShiftType::task;
    out.config = cfg;

    auto by_task = group_by_task(m);
    const std::size_t wanted =
        static_cast<std::size_t>(cfg.n_id_classes) + static_cast<std::size_t>(cfg.n_ood_classes);
    if (by_task.size() < wanted)
        throw Error(Errc::insufficient_tasks, "corpus has " + std::to_string(by_task.size()) +
                                                  " tasks, config needs " + std::to_string(wanted));

    std::vector<std::string> tasks = same_label_space(by_task);
    Rng rng(derive_stream_seed(cfg.seed, "tasks"));
    deterministic_shuffle(tasks, rng);

    std::vector<std::string> id_tasks(tasks.begin(), tasks.begin() + cfg.n_id_classes);
    std::vector<std::string> ood_tasks(tasks.begin() + cfg.n_id_classes,
                                       tasks.begin() + wanted);
    std::sort(id_tasks.begin(), id_tasks.end());
    std::sort(ood_tasks.begin(), ood_tasks.end());

    for (const auto& task : id_tasks) {
        std::vector<std::string> ids;
        for (const CodeFile* f : by_task.at(task)) ids.push_back(f->file_id);
        Rng trng = task_rng(cfg, task);
        assign_id_pool(std::move(ids), cfg, task, trng, out.assignments);
    }
    for (const auto& task : ood_tasks) {
        std::vector<std::string> ids;
        for (const CodeFile* f : by_task.at(task)) ids.push_back(f->file_id);
        if (ids.size() < static_cast<std::size_t>(cfg.n_ood_test_per_class))
            throw Error(Errc::insufficient_files,
                        "task " + task + ": has " + std::to_string(ids.size()) +
                            " files, OOD quota is " + std::to_string(cfg.n_ood_test_per_class));
        Rng trng = task_rng(cfg, task);
        deterministic_shuffle(ids, trng);
        for (int i = 0; i < cfg.n_ood_test_per_class; ++i)
            out.assignments[ids[static_cast<std::size_t>(i)]] = Partition::ood_test;
    }

    out.label_space_id = std::move(id_tasks);
    out.label_space_ood = std::move(ood_tasks);
    return out;
}

SplitManifest split_programmer(const CorpusManifest& m, const SplitConfig& cfg) {
    check_counts(cfg, false);
    SplitManifest out;
    out.shift = ShiftType::programmer;
    out.config = cfg;

    auto by_task = group_by_task(m);
    out.label_space_id = same_label_space(by_task);
    out.label_space_ood = out.label_space_id;

    for (const auto& [task, files] : by_task) {
        std::map<std::string, std::vector<std::string>> by_prog; // sorted both ways
        for (const CodeFile* f : files) by_prog[f->programmer_id].push_back(f->file_id);
        if (by_prog.size() < 2)
            throw Error(Errc::insufficient_programmers,
                        "task " + task + ": only " + std::to_string(by_prog.size()) +
                            " distinct programmer(s)");

        std::vector<std::string> progs;
        for (const auto& [prog, ids] : by_prog) progs.push_back(prog);
        Rng rng = task_rng(cfg, task);
        deterministic_shuffle(progs, rng);

        // Walk shuffled programmers, taking whole submission sets until the
        // OOD quota is reached; the final programmer is truncated in file_id
        // order to land exactly on the quota.
        const std::size_t ood_quota = static_cast<std::size_t>(cfg.n_ood_test_per_class);
        std::size_t taken = 0;
        std::size_t next_prog = 0;
        while (taken < ood_quota) {
            if (next_prog >= progs.size())
                throw Error(Errc::insufficient_files,
                            "task " + task + ": ran out of programmers at " +
                                std::to_string(taken) + "/" + std::to_string(ood_quota) +
                                " OOD files");
            const auto& ids = by_prog.at(progs[next_prog]);
            for (const auto& id : ids) {
                if (taken == ood_quota) break;
                out.assignments[id] = Partition::ood_test;
                ++taken;
            }
            ++next_prog;
        }

        // Remaining programmers with >= 2 submissions form the ID pool.
        std::vector<std::string> pool;
        bool any_remaining = false;
        for (std::size_t p = next_prog; p < progs.size(); ++p) {
            any_remaining = true;
            const auto& ids = by_prog.at(progs[p]);
            if (ids.size() < 2) continue;
            if (cfg.dedup_per_programmer) {
                pool.push_back(ids.front()); // smallest file_id survives
            } else {
                pool.insert(pool.end(), ids.begin(), ids.end());
            }
        }
        if (!any_remaining)
            throw Error(Errc::insufficient_programmers,
                        "task " + task + ": OOD selection consumed every programmer");
        assign_id_pool(std::move(pool), cfg, task, rng, out.assignments);
    }
    return out;
}

SplitManifest split_time(const CorpusManifest& m, const SplitConfig& cfg) {
    check_counts(cfg, false);
    for (const auto& f : m.files)
        if (!f.timestamp)
            throw Error(Errc::missing_timestamps, "file " + f.file_id + " has no timestamp");

    SplitManifest out;
    out.shift = ShiftType::time;
    out.config = cfg;

    auto by_task = group_by_task(m);
    out.label_space_id = same_label_space(by_task);
    out.label_space_ood = out.label_space_id;

    for (const auto& [task, files] : by_task) {
        const std::size_t quota = static_cast<std::size_t>(cfg.n_train_per_class) +
                                  cfg.n_id_test_per_class + cfg.n_ood_test_per_class;
        if (files.size() < quota)
            throw Error(Errc::insufficient_files,
                        "task " + task + ": has " + std::to_string(files.size()) +
                            " files, quotas need " + std::to_string(quota));

        std::vector<const CodeFile*> order(files);
        std::sort(order.begin(), order.end(), [](const CodeFile* a, const CodeFile* b) {
            if (*a->timestamp != *b->timestamp) return *a->timestamp > *b->timestamp;
            return a->file_id > b->file_id;
        });

        std::vector<std::string> pool;
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (i < static_cast<std::size_t>(cfg.n_ood_test_per_class))
                out.assignments[order[i]->file_id] = Partition::ood_test;
            else
                pool.push_back(order[i]->file_id);
        }
        Rng rng = task_rng(cfg, task);
        assign_id_pool(std::move(pool), cfg, task, rng, out.assignments);
    }
    return out;
}

namespace {

// Shared by the token and cst shifts: rank descending by (score, file_id),
// peel the OOD quota off the top, shuffle the rest into train/id_test.
void assign_by_score(const std::string& task,
                     std::vector<std::pair<double, std::string>> scored, const SplitConfig& cfg,
                     std::map<std::string, Partition>& assignments) {
    const std::size_t quota = static_cast<std::size_t>(cfg.n_train_per_class) +
                              cfg.n_id_test_per_class + cfg.n_ood_test_per_class;
    if (scored.size() < quota)
        throw Error(Errc::insufficient_files,
                    "task " + task + ": has " + std::to_string(scored.size()) +
                        " files, quotas need " + std::to_string(quota));
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    });

    std::vector<std::string> pool;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        if (i < static_cast<std::size_t>(cfg.n_ood_test_per_class))
            assignments[scored[i].second] = Partition::ood_test;
        else
            pool.push_back(scored[i].second);
    }
    Rng rng = task_rng(cfg, task);
    assign_id_pool(std::move(pool), cfg, task, rng, assignments);
}

} // namespace

SplitManifest split_token(const CorpusManifest& m,
                          const std::map<std::string, TokenHistogram>& histograms,
                          const std::map<std::string, TokenSeq>& seqs, const SplitConfig& cfg,
                          const HistogramOptions& options) {
    check_counts(cfg, false);
    SplitManifest out;
    out.shift = ShiftType::token;
    out.config = cfg;

    auto by_task = group_by_task(m);
    out.label_space_id = same_label_space(by_task);
    out.label_space_ood = out.label_space_id;

    for (const auto& [task, files] : by_task) {
        auto hist_it = histograms.find(task);
        if (hist_it == histograms.end())
            throw Error(Errc::histogram_mismatch, "no histogram for task " + task);
        const TokenHistogram& h = hist_it->second;
        if (h.n_files != files.size())
            throw Error(Errc::histogram_mismatch,
                        "task " + task + ": histogram covers " + std::to_string(h.n_files) +
                            " files, corpus has " + std::to_string(files.size()));

        std::vector<std::pair<double, std::string>> scored;
        scored.reserve(files.size());
        for (const CodeFile* f : files) {
            auto seq_it = seqs.find(f->file_id);
            if (seq_it == seqs.end())
                throw Error(Errc::histogram_mismatch, "no token sequence for file " + f->file_id);
            try {
                scored.emplace_back(token_rarity(h, seq_it->second, options), f->file_id);
            } catch (const Error& e) {
                if (e.code() == Errc::unknown_token)
                    throw Error(Errc::histogram_mismatch,
                                "file " + f->file_id + ": " + e.what());
                throw;
            }
        }
        assign_by_score(task, std::move(scored), cfg, out.assignments);
    }
    return out;
}

SplitManifest split_cst(const CorpusManifest& m,
                        const std::map<std::string, DistanceMatrix>& matrices,
                        const SplitConfig& cfg) {
    check_counts(cfg, false);
    SplitManifest out;
    out.shift = ShiftType::cst;
    out.config = cfg;

    auto by_task = group_by_task(m);
    out.label_space_id = same_label_space(by_task);
    out.label_space_ood = out.label_space_id;

    for (const auto& [task, files] : by_task) {
        auto mat_it = matrices.find(task);
        if (mat_it == matrices.end())
            throw Error(Errc::matrix_mismatch, "no distance matrix for task " + task);
        const DistanceMatrix& dm = mat_it->second;

        std::map<std::string, double> avg_by_id;
        for (std::size_t i = 0; i < dm.file_ids.size(); ++i) avg_by_id[dm.file_ids[i]] = dm.avg[i];

        std::vector<std::pair<double, std::string>> scored;
        scored.reserve(files.size());
        for (const CodeFile* f : files) {
            auto it = avg_by_id.find(f->file_id);
            if (it == avg_by_id.end())
                throw Error(Errc::matrix_mismatch,
                            "task " + task + ": matrix has no entry for file " + f->file_id);
            scored.emplace_back(it->second, f->file_id);
        }
        assign_by_score(task, std::move(scored), cfg, out.assignments);
    }
    return out;
}

// ---- serialization -----------------------------------------------------------

std::string serialize_split(const SplitManifest& s) {
    json cfg;
    cfg["n_id_classes"] = s.config.n_id_classes;
    cfg["n_ood_classes"] = s.config.n_ood_classes;
    cfg["n_train_per_class"] = s.config.n_train_per_class;
    cfg["n_id_test_per_class"] = s.config.n_id_test_per_class;
    cfg["n_ood_test_per_class"] = s.config.n_ood_test_per_class;
    cfg["seed"] = s.config.seed;
    cfg["dedup_per_programmer"] = s.config.dedup_per_programmer;

    json assignments = json::object();
    for (const auto& [id, part] : s.assignments)
        assignments[id] = std::string(partition_name(part));

    json obj;
    obj["shift"] = std::string(shift_name(s.shift));
    obj["config"] = std::move(cfg);
    obj["label_space_id"] = s.label_space_id;
    obj["label_space_ood"] = s.label_space_ood;
    obj["assignments"] = std::move(assignments);
    return obj.dump(2) + "\n";
}

SplitManifest parse_split(const std::string& json_text) {
    SplitManifest s;
    try {
        json obj = json::parse(json_text);
        s.shift = shift_from_name(obj.at("shift").get<std::string>());
        const json& cfg = obj.at("config");
        s.config.n_id_classes = cfg.at("n_id_classes").get<int>();
        s.config.n_ood_classes = cfg.at("n_ood_classes").get<int>();
        s.config.n_train_per_class = cfg.at("n_train_per_class").get<int>();
        s.config.n_id_test_per_class = cfg.at("n_id_test_per_class").get<int>();
        s.config.n_ood_test_per_class = cfg.at("n_ood_test_per_class").get<int>();
        s.config.seed = cfg.at("seed").get<std::uint64_t>();
        s.config.dedup_per_programmer = cfg.at("dedup_per_programmer").get<bool>();
        s.label_space_id = obj.at("label_space_id").get<std::vector<std::string>>();
        s.label_space_ood = obj.at("label_space_ood").get<std::vector<std::string>>();
        for (const auto& [id, part] : obj.at("assignments").items())
            s.assignments[id] = partition_from_name(part.get<std::string>());
    } catch (const json::exception& e) {
        throw Error(Errc::schema_error, std::string("split manifest: ") + e.what());
    }
    return s;
}

} // namespace codeshift
