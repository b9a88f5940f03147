#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace tagprof {

/// 64-bit FNV-1a content digest, rendered as 16 hex digits. Used to detect
/// stale artifacts, not for any security purpose.
class Digest {
public:
    Digest& update(std::string_view bytes) noexcept;
    std::uint64_t value() const noexcept { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string digest_of(std::string_view bytes);

/// Throws std::runtime_error if the file cannot be read.
std::string digest_of_file(const std::filesystem::path& path);

}  // namespace tagprof
