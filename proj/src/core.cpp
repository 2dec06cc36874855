#include "gmc/core.hpp"

#include <algorithm>
#include <cmath>

namespace gmc {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::InsufficientFolds: return "InsufficientFolds";
        case ErrorCode::NonPositiveAlpha: return "NonPositiveAlpha";
        case ErrorCode::InvalidDelta: return "InvalidDelta";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::UnknownGroupId: return "UnknownGroupId";
        case ErrorCode::KindMismatch: return "KindMismatch";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::InvalidBox: return "InvalidBox";
        case ErrorCode::EmptyClass: return "EmptyClass";
        case ErrorCode::NonPositiveGamma: return "NonPositiveGamma";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::EmptyCalibration: return "EmptyCalibration";
        case ErrorCode::NoPositivePixels: return "NoPositivePixels";
        case ErrorCode::DimensionNotOne: return "DimensionNotOne";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

int label_index(const Label& label) {
    if (auto c = std::get_if<ClassIndex>(&label)) return c->value;
    if (auto t = std::get_if<TokenIndex>(&label)) return t->value;
    throw Error(ErrorCode::KindMismatch, "label is a binary vector, expected an index");
}

const BinaryVector& label_bits(const Label& label) {
    if (auto b = std::get_if<BinaryVector>(&label)) return *b;
    throw Error(ErrorCode::KindMismatch, "label is an index, expected a binary vector");
}

bool Sample::in_group(const std::string& group) const {
    return std::binary_search(groups.begin(), groups.end(), group);
}

const char* to_string(DataKind kind) {
    switch (kind) {
        case DataKind::TextGen: return "textgen";
        case DataKind::Hierarchy: return "hierarchy";
        case DataKind::Segmentation: return "segmentation";
        case DataKind::Generic: return "generic";
    }
    return "generic";
}

DataKind data_kind_from_string(const std::string& name) {
    if (name == "textgen") return DataKind::TextGen;
    if (name == "hierarchy") return DataKind::Hierarchy;
    if (name == "segmentation") return DataKind::Segmentation;
    if (name == "generic" || name == "generic-preset") return DataKind::Generic;
    throw Error(ErrorCode::InvalidConfig, "unknown data kind '" + name + "'");
}

void Dataset::validate() const {
    if (samples.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no samples");
    if (score_dim <= 0) throw Error(ErrorCode::DimensionMismatch, "score_dim must be positive");
    for (const auto& s : samples) {
        if (s.scores.size() != score_dim)
            throw Error(ErrorCode::DimensionMismatch,
                        "sample '" + s.id + "' has " + std::to_string(s.scores.size()) +
                            " scores, expected " + std::to_string(score_dim));
        if (!s.scores.allFinite())
            throw Error(ErrorCode::NonFiniteInput, "sample '" + s.id + "' has non-finite scores");
        for (const auto& g : s.groups)
            if (!std::binary_search(group_universe.begin(), group_universe.end(), g))
                throw Error(ErrorCode::UnknownGroupId,
                            "sample '" + s.id + "' references undeclared group '" + g + "'");
    }
}

void Dataset::refresh_universe() {
    std::vector<std::string> all;
    for (const auto& s : samples) all.insert(all.end(), s.groups.begin(), s.groups.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    group_universe = std::move(all);
}

bool FValue::operator==(const FValue& other) const {
    if (kind != other.kind || value.size() != other.value.size()) return false;
    for (Eigen::Index i = 0; i < value.size(); ++i)
        if (value(i) != other.value(i)) return false;
    return true;
}

}  // namespace gmc
