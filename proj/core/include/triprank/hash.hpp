#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace triprank {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = kFnvOffset) noexcept;

/// FNV-1a-64 of a whole file. Throws InputError if unreadable.
std::uint64_t file_digest(const std::filesystem::path& path);

std::string to_hex(std::uint64_t value);
std::uint64_t from_hex(std::string_view text);

}  // namespace triprank
