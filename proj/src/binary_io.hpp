// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rx/types.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string_view>

namespace rx::detail {

template <typename T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T> && (sizeof(T) == 1 || sizeof(T) == 4 || sizeof(T) == 8));
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
    auto bits = std::bit_cast<U>(value);
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bytes[i] = static_cast<char>(bits & 0xFFu);
        if constexpr (sizeof(T) > 1) {
            bits >>= 8;
        }
    }
    out.write(bytes.data(), bytes.size());
}

template <typename T>
T read_le(std::istream& in) {
    static_assert(std::is_trivially_copyable_v<T> && (sizeof(T) == 1 || sizeof(T) == 4 || sizeof(T) == 8));
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
    std::array<char, sizeof(T)> bytes{};
    if (!in.read(bytes.data(), bytes.size())) {
        throw Error(ErrorCode::BadFormat, "unexpected end of input");
    }
    U bits = 0;
    for (std::size_t i = sizeof(T); i-- > 0;) {
        bits = static_cast<U>((bits << (sizeof(T) > 1 ? 8 : 0)) | static_cast<std::uint8_t>(bytes[i]));
    }
    return std::bit_cast<T>(bits);
}

inline void write_magic(std::ostream& out, std::string_view magic) { out.write(magic.data(), magic.size()); }

inline void expect_magic(std::istream& in, std::string_view magic) {
    std::array<char, 16> buf{};
    if (magic.size() > buf.size() || !in.read(buf.data(), magic.size()) ||
        std::string_view(buf.data(), magic.size()) != magic) {
        throw Error(ErrorCode::BadFormat, "missing magic " + std::string(magic));
    }
}

} // namespace rx::detail
