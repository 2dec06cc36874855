#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gmc {

using Vector = Eigen::VectorXd;

enum class ErrorCode {
    DimensionMismatch,
    EmptyDataset,
    InsufficientFolds,
    NonPositiveAlpha,
    InvalidDelta,
    InvalidArgument,
    UnknownGroupId,
    KindMismatch,
    NonFiniteInput,
    InvalidBox,
    EmptyClass,
    NonPositiveGamma,
    UnknownNode,
    EmptyCalibration,
    NoPositivePixels,
    DimensionNotOne,
    SchemaError,
    InvariantViolation,
    InvalidSpec,
    InvalidConfig,
    IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

struct ClassIndex {
    int value = 0;
    bool operator==(const ClassIndex&) const = default;
};

struct TokenIndex {
    int value = 0;
    bool operator==(const TokenIndex&) const = default;
};

struct BinaryVector {
    std::vector<std::uint8_t> bits;
    bool operator==(const BinaryVector&) const = default;
};

using Label = std::variant<ClassIndex, BinaryVector, TokenIndex>;

// Integer value of a ClassIndex / TokenIndex label; throws on BinaryVector.
int label_index(const Label& label);
const BinaryVector& label_bits(const Label& label);

struct Sample {
    std::string id;
    std::vector<std::string> groups;  // sorted, unique
    Vector scores;
    Label label = ClassIndex{0};
    std::uint64_t noise_seed = 0;

    // Cache of application-specific quantities that are a deterministic
    // function of the fields above (e.g. noisy cumulative tree scores).
    // Empty unless an application prepared the sample; never serialized.
    Vector derived;

    bool in_group(const std::string& group) const;
};

enum class DataKind { TextGen, Hierarchy, Segmentation, Generic };

const char* to_string(DataKind kind);
DataKind data_kind_from_string(const std::string& name);

struct Dataset {
    std::vector<Sample> samples;
    int score_dim = 0;
    std::vector<std::string> group_universe;  // sorted, unique
    DataKind kind = DataKind::Generic;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }

    // Checks the non-empty / shared-dimension / finite / universe invariants.
    void validate() const;
    // Recomputes group_universe as the sorted union of the samples' groups.
    void refresh_universe();
};

// One value of the learned function f: a distribution or a scalar threshold
// (stored as a length-1 vector so both share the update arithmetic).
struct FValue {
    enum class Kind { Distribution, Threshold };
    Kind kind = Kind::Threshold;
    Vector value;

    static FValue distribution(Vector p) { return {Kind::Distribution, std::move(p)}; }
    static FValue threshold(double lambda) { return {Kind::Threshold, Vector::Constant(1, lambda)}; }

    double lambda() const { return value(0); }
    Eigen::Index dim() const { return value.size(); }
    bool operator==(const FValue& other) const;
};

}  // namespace gmc
