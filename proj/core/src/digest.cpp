#include "tagprof/digest.hpp"

#include <array>
#include <fstream>
#include <stdexcept>

namespace tagprof {

Digest& Digest::update(std::string_view bytes) noexcept {
    for (const unsigned char c : bytes) {
        state_ ^= c;
        state_ *= 0x100000001b3ULL;
    }
    return *this;
}

std::string Digest::hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t v = state_;
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
        v >>= 4;
    }
    return out;
}

std::string digest_of(std::string_view bytes) {
    return Digest{}.update(bytes).hex();
}

std::string digest_of_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    Digest digest;
    std::array<char, 1 << 16> buffer{};
    while (in) {
        in.read(buffer.data(), buffer.size());
        digest.update(std::string_view(buffer.data(), static_cast<std::size_t>(in.gcount())));
    }
    return digest.hex();
}

}  // namespace tagprof
