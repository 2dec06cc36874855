#pragma once

#include "gmc/core.hpp"
#include "gmc/functional.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gmc {

// A subgroup A of the input space, given as a membership predicate over the
// sample's group memberships.
struct PromptGroup {
    std::string id;
    std::function<bool(const Sample&)> contains;
    double gamma = 0.0;  // declared minimum group mass (metadata only)
    // Predicate reads only the membership list (enables pattern replay).
    bool membership_only = false;

    // Members are the samples listing `group` in their memberships.
    static PromptGroup named(const std::string& group);
};

std::vector<PromptGroup> named_groups(const std::vector<std::string>& names);

// Empirical P(x in A).
double group_mass(const PromptGroup& group, const Dataset& data);

// {+1{x in A}, -1{x in A}} for every group: scalar functions of memberships only.
FunctionClass group_indicator_class(const std::vector<PromptGroup>& groups);

}  // namespace gmc
