#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mucos {

// 64-bit FNV-1a. Used for dataset/config identity, not for security.
class Fnv1a64 {
public:
    void update(std::string_view bytes) noexcept {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
    }

    // Length-prefixed so that ("ab","c") and ("a","bc") hash differently.
    void update_field(std::string_view field) noexcept {
        const std::uint64_t n = field.size();
        for (int i = 0; i < 8; ++i) {
            const char byte = static_cast<char>((n >> (8 * i)) & 0xffU);
            update(std::string_view(&byte, 1));
        }
        update(field);
    }

    std::uint64_t digest() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    Fnv1a64 h;
    h.update(bytes);
    return h.digest();
}

std::string to_hex(std::uint64_t value);

// Hash of a file's raw bytes; throws mucos::Error if it cannot be read.
std::uint64_t hash_file(const std::string& path);

}  // namespace mucos
