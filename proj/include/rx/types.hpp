// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace rx {

/// The indexed value. 32-bit keys are zero-extended.
using Key = std::uint64_t;

/// Position of a key in the indexed column; what a secondary index returns.
using RowId = std::uint32_t;

/// Reserved row id written for lookups without any result.
inline constexpr RowId kMissRowId = std::numeric_limits<RowId>::max();

struct Vertex3 {
    float x = 0.0f;
    float y = 0.0f;
    float z = 0.0f;

    constexpr float operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
    float& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

    friend constexpr bool operator==(const Vertex3&, const Vertex3&) = default;
};

enum class ErrorCode {
    KeyOutOfDomain,
    NotAValidEncoding,
    InvalidDecomposition,
    EmptyInput,
    RefittableNotCompactable,
    NotRefittable,
    CountMismatch,
    UnsupportedPrimitiveForMode,
    RayFanTooLarge,
    CapacityExceeded,
    DomainOverflow,
    ExactHitCountNeedsDenseKeys,
    OracleMismatch,
    DegenerateSystem,
    AggregateOverflow,
    Unsupported,
    InvalidArgument,
    BadFormat,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace rx
