#include "codeshift/split_config.hpp"

#include "codeshift/error.hpp"

namespace codeshift {

std::string_view shift_name(ShiftType s) {
    switch (s) {
    case ShiftType::random: return "random";
    case ShiftType::task: return "task";
    case ShiftType::programmer: return "programmer";
    case ShiftType::time: return "time";
    case ShiftType::token: return "token";
    case ShiftType::cst: return "cst";
    }
    return "random";
}

ShiftType shift_from_name(std::string_view name) {
    if (name == "random") return ShiftType::random;
    if (name == "task") return ShiftType::task;
    if (name == "programmer") return ShiftType::programmer;
    if (name == "time") return ShiftType::time;
    if (name == "token") return ShiftType::token;
    if (name == "cst") return ShiftType::cst;
    throw Error(Errc::config_error, "unknown shift type \"" + std::string(name) + "\"");
}

namespace {

SplitConfig make_config(int id_classes, int ood_classes, int train, int id_test, int ood_test) {
    SplitConfig c;
    c.n_id_classes = id_classes;
    c.n_ood_classes = ood_classes;
    c.n_train_per_class = train;
    c.n_id_test_per_class = id_test;
    c.n_ood_test_per_class = ood_test;
    return c;
}

} // namespace

SplitProfile named_profile(std::string_view name) {
    SplitProfile p;
    p.name = std::string(name);
    if (name == "python75") {
        p.non_task = make_config(75, 75, 732, 134, 134);
        p.task = make_config(65, 10, 846, 154, 1000);
    } else if (name == "java250s") {
        p.non_task = make_config(250, 250, 180, 60, 60);
        p.task = make_config(200, 50, 225, 75, 300);
    } else if (name == "python800s") {
        p.non_task = make_config(800, 800, 180, 60, 60);
        p.task = make_config(640, 160, 225, 75, 300);
    } else {
        throw Error(Errc::config_error, "unknown profile \"" + std::string(name) + "\"");
    }
    return p;
}

SplitConfig resolve_profile(const SplitProfile& profile, ShiftType shift, std::uint64_t seed) {
    SplitConfig cfg = (shift == ShiftType::task) ? profile.task : profile.non_task;
    cfg.seed = seed;
    return cfg;
}

} // namespace codeshift
