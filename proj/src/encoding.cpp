// SPDX-License-Identifier: Apache-2.0

#include "rx/encoding.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace rx {

namespace {

constexpr std::uint64_t low_mask(unsigned bits) {
    return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

constexpr std::uint64_t shift_right(std::uint64_t v, unsigned bits) { return bits >= 64 ? 0 : v >> bits; }
constexpr std::uint64_t shift_left(std::uint64_t v, unsigned bits) { return bits >= 64 ? 0 : v << bits; }

constexpr std::uint64_t kExactLimit = std::uint64_t{1} << kMaxExactBits;

// Accepts only finite, non-negative, integral values below 2^23.
bool exact_component(float f, std::uint64_t& out) {
    if (!std::isfinite(f) || f < 0.0f || f >= static_cast<float>(kExactLimit) || std::trunc(f) != f) {
        return false;
    }
    out = static_cast<std::uint64_t>(f);
    return true;
}

[[noreturn]] void out_of_domain(Key k, const EncodingMode& mode) {
    throw Error(ErrorCode::KeyOutOfDomain, "key " + std::to_string(k) + " not encodable in mode " + mode.name());
}

} // namespace

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::KeyOutOfDomain: return "KeyOutOfDomain";
    case ErrorCode::NotAValidEncoding: return "NotAValidEncoding";
    case ErrorCode::InvalidDecomposition: return "InvalidDecomposition";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::RefittableNotCompactable: return "RefittableNotCompactable";
    case ErrorCode::NotRefittable: return "NotRefittable";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::UnsupportedPrimitiveForMode: return "UnsupportedPrimitiveForMode";
    case ErrorCode::RayFanTooLarge: return "RayFanTooLarge";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::DomainOverflow: return "DomainOverflow";
    case ErrorCode::ExactHitCountNeedsDenseKeys: return "ExactHitCountNeedsDenseKeys";
    case ErrorCode::OracleMismatch: return "OracleMismatch";
    case ErrorCode::DegenerateSystem: return "DegenerateSystem";
    case ErrorCode::AggregateOverflow: return "AggregateOverflow";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BadFormat: return "BadFormat";
    }
    return "Unknown";
}

Decomposition Decomposition::make(unsigned bits_x, unsigned bits_y, unsigned bits_z) {
    if (bits_x + bits_y + bits_z != 64) {
        throw Error(ErrorCode::InvalidDecomposition, "bit counts must sum to 64");
    }
    if (bits_x > kMaxExactBits) {
        throw Error(ErrorCode::InvalidDecomposition, "x component limited to 23 bits");
    }
    return {static_cast<std::uint8_t>(bits_x), static_cast<std::uint8_t>(bits_y), static_cast<std::uint8_t>(bits_z)};
}

std::string_view to_string(ModeKind kind) {
    switch (kind) {
    case ModeKind::Naive: return "naive";
    case ModeKind::Extended: return "extended";
    case ModeKind::ThreeD: return "3d";
    }
    return "?";
}

std::string EncodingMode::name() const {
    std::string s(to_string(kind_));
    if (kind_ == ModeKind::ThreeD) {
        s += "(" + std::to_string(decomposition_.bits_x) + "," + std::to_string(decomposition_.bits_y) + "," +
             std::to_string(decomposition_.bits_z) + ")";
    }
    return s;
}

bool EncodingMode::in_domain(Key k) const {
    switch (kind_) {
    case ModeKind::Naive: return k < kNaiveKeyLimit;
    case ModeKind::Extended: return k < kExtendedKeyLimit;
    case ModeKind::ThreeD: {
        const KeyParts p = split_key(k, decomposition_);
        return p.x < kExactLimit && p.y < kExactLimit && p.z < kExactLimit;
    }
    }
    return false;
}

KeyParts split_key(Key k, const Decomposition& d) {
    KeyParts p;
    p.x = k & low_mask(d.bits_x);
    p.y = shift_right(k, d.bits_x) & low_mask(d.bits_y);
    p.z = shift_right(k, d.bits_x + d.bits_y) & low_mask(d.bits_z);
    return p;
}

Key join_key(const KeyParts& p, const Decomposition& d) {
    return p.x | shift_left(p.y, d.bits_x) | shift_left(p.z, d.bits_x + d.bits_y);
}

CoordTriple encode(Key k, const EncodingMode& mode) {
    if (!mode.in_domain(k)) {
        out_of_domain(k, mode);
    }
    switch (mode.kind()) {
    case ModeKind::Naive: return {static_cast<float>(k), 0.0f, 0.0f};
    case ModeKind::Extended: {
        const auto bits = static_cast<std::uint32_t>(2 * k + kExtendedOffset);
        return {std::bit_cast<float>(bits), 0.0f, 0.0f};
    }
    case ModeKind::ThreeD: {
        const KeyParts p = split_key(k, mode.decomposition());
        return {static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z)};
    }
    }
    out_of_domain(k, mode);
}

Key decode(const CoordTriple& c, const EncodingMode& mode) {
    auto invalid = [&]() -> Key {
        throw Error(ErrorCode::NotAValidEncoding, "coordinate is not an encoding under mode " + mode.name());
    };
    switch (mode.kind()) {
    case ModeKind::Naive: {
        std::uint64_t x = 0;
        if (c.y != 0.0f || c.z != 0.0f || !exact_component(c.x, x)) {
            return invalid();
        }
        return x;
    }
    case ModeKind::Extended: {
        if (c.y != 0.0f || c.z != 0.0f || !std::isfinite(c.x)) {
            return invalid();
        }
        const auto bits = std::bit_cast<std::uint32_t>(c.x);
        if (bits < kExtendedOffset || ((bits - kExtendedOffset) & 1u) != 0) {
            return invalid();
        }
        const Key k = (bits - kExtendedOffset) / 2;
        if (k >= kExtendedKeyLimit) {
            return invalid();
        }
        return k;
    }
    case ModeKind::ThreeD: {
        const Decomposition& d = mode.decomposition();
        KeyParts p;
        if (!exact_component(c.x, p.x) || !exact_component(c.y, p.y) || !exact_component(c.z, p.z)) {
            return invalid();
        }
        if (p.x > low_mask(d.bits_x) || p.y > low_mask(d.bits_y) || p.z > low_mask(d.bits_z)) {
            return invalid();
        }
        return join_key(p, d);
    }
    }
    return invalid();
}

std::pair<float, float> gap_bounds(Key k, const EncodingMode& mode) {
    const CoordTriple c = encode(k, mode);
    if (mode.kind() == ModeKind::Extended) {
        return {std::nextafter(c.x, -INFINITY), std::nextafter(c.x, INFINITY)};
    }
    return {c.x - 0.5f, c.x + 0.5f};
}

Key normalize_to_u64(float value) {
    const auto bits = std::bit_cast<std::uint32_t>(value);
    const std::uint32_t flipped = (bits & 0x80000000u) != 0 ? ~bits : (bits | 0x80000000u);
    return flipped;
}

Key normalize_to_u64(double value) {
    const auto bits = std::bit_cast<std::uint64_t>(value);
    constexpr std::uint64_t sign = std::uint64_t{1} << 63;
    return (bits & sign) != 0 ? ~bits : (bits | sign);
}

Key normalize_to_u64(std::string_view bytes) {
    Key k = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        const auto byte = i < bytes.size() ? static_cast<unsigned char>(bytes[i]) : 0u;
        k = (k << 8) | byte;
    }
    return k;
}

} // namespace rx
