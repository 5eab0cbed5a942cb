// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rx/types.hpp"

#include <cstdint>
#include <string_view>
#include <type_traits>
#include <utility>

namespace rx {

/// Largest number of bits a coordinate component may carry so that the
/// component and its +-0.5 gap values stay exact in single precision.
inline constexpr unsigned kMaxExactBits = 23;

/// Split of a 64-bit key into x (least significant), y and z bits.
///
/// The x component must fit in single precision (bits_x <= 23). The y and z
/// components may be declared wider; keys whose y or z value does not fit in
/// 23 bits are then simply outside the encodable domain.
struct Decomposition {
    std::uint8_t bits_x = 23;
    std::uint8_t bits_y = 23;
    std::uint8_t bits_z = 18;

    /// Validating factory; throws InvalidDecomposition.
    static Decomposition make(unsigned bits_x, unsigned bits_y, unsigned bits_z);

    friend constexpr bool operator==(const Decomposition&, const Decomposition&) = default;
};

enum class ModeKind : std::uint8_t { Naive = 0, Extended = 1, ThreeD = 2 };

std::string_view to_string(ModeKind kind);

class EncodingMode {
public:
    static EncodingMode naive() { return EncodingMode(ModeKind::Naive, {}); }
    static EncodingMode extended() { return EncodingMode(ModeKind::Extended, {}); }
    static EncodingMode three_d(Decomposition decomposition = {}) {
        return EncodingMode(ModeKind::ThreeD, Decomposition::make(decomposition.bits_x, decomposition.bits_y,
                                                                   decomposition.bits_z));
    }

    ModeKind kind() const { return kind_; }
    const Decomposition& decomposition() const { return decomposition_; }

    /// Whether `k` can be encoded under this mode.
    bool in_domain(Key k) const;

    /// Short tag such as "naive", "extended" or "3d(23,23,18)".
    std::string name() const;

    friend bool operator==(const EncodingMode&, const EncodingMode&) = default;

private:
    EncodingMode(ModeKind kind, Decomposition decomposition) : kind_(kind), decomposition_(decomposition) {}

    ModeKind kind_;
    Decomposition decomposition_;
};

/// Exclusive key limits of the one-dimensional modes.
inline constexpr Key kNaiveKeyLimit = Key{1} << 23;
inline constexpr Key kExtendedKeyLimit = Key{1} << 29;

/// Bit pattern of 0.5f; offset added to 2k before the Extended bit cast.
inline constexpr std::uint32_t kExtendedOffset = 0x3F000000u;

/// Scene position of a key. Every component is a non-negative value that is
/// exactly representable in single precision.
struct CoordTriple {
    float x = 0.0f;
    float y = 0.0f;
    float z = 0.0f;

    Vertex3 point() const { return {x, y, z}; }

    friend constexpr bool operator==(const CoordTriple&, const CoordTriple&) = default;
};

/// The decomposed integer parts of a ThreeD key.
struct KeyParts {
    std::uint64_t x = 0;
    std::uint64_t y = 0;
    std::uint64_t z = 0;
};

KeyParts split_key(Key k, const Decomposition& decomposition);
Key join_key(const KeyParts& parts, const Decomposition& decomposition);

/// Order-preserving key to coordinate conversion. Throws KeyOutOfDomain.
CoordTriple encode(Key k, const EncodingMode& mode);

/// Inverse of encode. Throws NotAValidEncoding.
Key decode(const CoordTriple& c, const EncodingMode& mode);

/// Open interval on the x axis around encode(k).x that contains no other key.
/// Naive and ThreeD use +-0.5, Extended the adjacent representable floats.
std::pair<float, float> gap_bounds(Key k, const EncodingMode& mode);

// Order-preserving normalization of other scalar types to Key.

template <typename T>
    requires std::is_integral_v<T>
constexpr Key normalize_to_u64(T value) {
    if constexpr (std::is_signed_v<T>) {
        return static_cast<Key>(static_cast<std::int64_t>(value)) ^ (Key{1} << 63);
    } else {
        return static_cast<Key>(value);
    }
}

Key normalize_to_u64(float value);
Key normalize_to_u64(double value);

/// Big-endian pack of the first eight bytes; shorter inputs are zero padded.
/// Order is preserved for the covered prefix only.
Key normalize_to_u64(std::string_view bytes);

} // namespace rx
