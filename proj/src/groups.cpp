#include "gmc/groups.hpp"

namespace gmc {

PromptGroup PromptGroup::named(const std::string& group) {
    return {group, [group](const Sample& x) { return x.in_group(group); }, 0.0, true};
}

std::vector<PromptGroup> named_groups(const std::vector<std::string>& names) {
    std::vector<PromptGroup> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(PromptGroup::named(n));
    return out;
}

double group_mass(const PromptGroup& group, const Dataset& data) {
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "group mass on empty dataset");
    double count = 0.0;
    for (const auto& x : data.samples) count += group.contains(x) ? 1.0 : 0.0;
    return count / static_cast<double>(data.size());
}

FunctionClass group_indicator_class(const std::vector<PromptGroup>& groups) {
    if (groups.empty()) throw Error(ErrorCode::EmptyClass, "no groups given");
    FunctionClass out;
    for (const auto& a : groups) {
        for (double sign : {1.0, -1.0}) {
            GroupFunction g;
            g.id = (sign > 0 ? "+" : "-") + a.id;
            g.dim = 1;
            g.norm_bound = 1.0;
            g.description = (sign > 0 ? "+1{x in " : "-1{x in ") + a.id + "}";
            g.reads_f = false;
            g.groups_only = a.membership_only;
            auto contains = a.contains;
            g.eval = [contains, sign](const FValue&, const Sample& x, Eigen::Ref<Vector> out) {
                out(0) = contains(x) ? sign : 0.0;
            };
            out.push_back(std::move(g));
        }
    }
    return out;
}

}  // namespace gmc
