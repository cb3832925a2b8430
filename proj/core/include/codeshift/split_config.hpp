#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace codeshift {

// The five shift constructions plus the random baseline.
enum class ShiftType { random, task, programmer, time, token, cst };

std::string_view shift_name(ShiftType s);
ShiftType shift_from_name(std::string_view name);

// Sizing parameters for one split. n_ood_classes only matters for the task
// shift; every other shift keeps the full label space and n_id_classes is
// informational (the validator reports when it disagrees with the corpus).
struct SplitConfig {
    int n_id_classes = 0;
    int n_ood_classes = 0;
    int n_train_per_class = 0;
    int n_id_test_per_class = 0;
    int n_ood_test_per_class = 0;
    std::uint64_t seed = 0;
    bool dedup_per_programmer = false;

    friend bool operator==(const SplitConfig&, const SplitConfig&) = default;
};

// A named sizing preset: one variant for the task shift, one for the rest.
struct SplitProfile {
    std::string name;
    SplitConfig non_task;
    SplitConfig task;
};

// Presets "python75", "java250s", "python800s". Throws ConfigError on an
// unknown name. Seed and dedup flag are left at defaults for the caller.
SplitProfile named_profile(std::string_view name);

// Picks the profile variant for a shift and stamps the seed in.
SplitConfig resolve_profile(const SplitProfile& profile, ShiftType shift, std::uint64_t seed);

} // namespace codeshift
