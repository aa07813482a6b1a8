#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>

namespace laser {

// BLAKE2s-256, unkeyed and sequential (RFC 7693). Self-contained so the
// library stays header-only; validated against external reference vectors
// in the test suite.
class Blake2s {
public:
    static constexpr std::size_t kDigestSize = 32;
    static constexpr std::size_t kBlockSize = 64;
    using Digest = std::array<std::uint8_t, kDigestSize>;

    Blake2s() { reset(); }

    void reset() {
        h_ = kIv;
        h_[0] ^= 0x01010000u ^ static_cast<std::uint32_t>(kDigestSize);
        t_[0] = t_[1] = 0;
        buf_len_ = 0;
    }

    void update(std::span<const std::uint8_t> in) {
        std::size_t inlen = in.size();
        const std::uint8_t* p = in.data();
        if (inlen == 0) return;
        const std::size_t left = buf_len_;
        const std::size_t fill = kBlockSize - left;
        // The last block is always held back so finish() can mark it final.
        if (inlen > fill) {
            std::memcpy(buf_.data() + left, p, fill);
            buf_len_ = 0;
            bump_counter(kBlockSize);
            compress(buf_.data(), false);
            p += fill;
            inlen -= fill;
            while (inlen > kBlockSize) {
                bump_counter(kBlockSize);
                compress(p, false);
                p += kBlockSize;
                inlen -= kBlockSize;
            }
        }
        std::memcpy(buf_.data() + buf_len_, p, inlen);
        buf_len_ += inlen;
    }

    Digest finish() {
        bump_counter(static_cast<std::uint32_t>(buf_len_));
        std::memset(buf_.data() + buf_len_, 0, kBlockSize - buf_len_);
        compress(buf_.data(), true);
        Digest out{};
        for (std::size_t i = 0; i < 8; ++i) {
            out[4 * i + 0] = static_cast<std::uint8_t>(h_[i]);
            out[4 * i + 1] = static_cast<std::uint8_t>(h_[i] >> 8);
            out[4 * i + 2] = static_cast<std::uint8_t>(h_[i] >> 16);
            out[4 * i + 3] = static_cast<std::uint8_t>(h_[i] >> 24);
        }
        return out;
    }

private:
    static constexpr std::array<std::uint32_t, 8> kIv = {
        0x6A09E667u, 0xBB67AE85u, 0x3C6EF372u, 0xA54FF53Au,
        0x510E527Fu, 0x9B05688Cu, 0x1F83D9ABu, 0x5BE0CD19u,
    };

    static constexpr std::uint8_t kSigma[10][16] = {
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15},
        {14, 10, 4, 8, 9, 15, 13, 6, 1, 12, 0, 2, 11, 7, 5, 3},
        {11, 8, 12, 0, 5, 2, 15, 13, 10, 14, 3, 6, 7, 1, 9, 4},
        {7, 9, 3, 1, 13, 12, 11, 14, 2, 6, 5, 10, 4, 0, 15, 8},
        {9, 0, 5, 7, 2, 4, 10, 15, 14, 1, 11, 12, 6, 8, 3, 13},
        {2, 12, 6, 10, 0, 11, 8, 3, 4, 13, 7, 5, 15, 14, 1, 9},
        {12, 5, 1, 15, 14, 13, 4, 10, 0, 7, 6, 3, 9, 2, 8, 11},
        {13, 11, 7, 14, 12, 1, 3, 9, 5, 0, 15, 4, 8, 6, 2, 10},
        {6, 15, 14, 9, 11, 3, 0, 8, 12, 2, 13, 7, 1, 4, 10, 5},
        {10, 2, 8, 4, 7, 6, 1, 5, 15, 11, 9, 14, 3, 12, 13, 0},
    };

    void bump_counter(std::uint32_t n) {
        t_[0] += n;
        if (t_[0] < n) ++t_[1];
    }

    static std::uint32_t load32(const std::uint8_t* p) {
        return static_cast<std::uint32_t>(p[0]) |
               (static_cast<std::uint32_t>(p[1]) << 8) |
               (static_cast<std::uint32_t>(p[2]) << 16) |
               (static_cast<std::uint32_t>(p[3]) << 24);
    }

    void compress(const std::uint8_t* block, bool last) {
        std::uint32_t m[16];
        for (int i = 0; i < 16; ++i) m[i] = load32(block + 4 * i);

        std::uint32_t v[16];
        for (int i = 0; i < 8; ++i) v[i] = h_[i];
        for (int i = 0; i < 8; ++i) v[8 + i] = kIv[i];
        v[12] ^= t_[0];
        v[13] ^= t_[1];
        if (last) v[14] = ~v[14];

        auto g = [&](int a, int b, int c, int d, std::uint32_t x, std::uint32_t y) {
            v[a] = v[a] + v[b] + x;
            v[d] = std::rotr(v[d] ^ v[a], 16);
            v[c] = v[c] + v[d];
            v[b] = std::rotr(v[b] ^ v[c], 12);
            v[a] = v[a] + v[b] + y;
            v[d] = std::rotr(v[d] ^ v[a], 8);
            v[c] = v[c] + v[d];
            v[b] = std::rotr(v[b] ^ v[c], 7);
        };

        for (int r = 0; r < 10; ++r) {
            const std::uint8_t* s = kSigma[r];
            g(0, 4, 8, 12, m[s[0]], m[s[1]]);
            g(1, 5, 9, 13, m[s[2]], m[s[3]]);
            g(2, 6, 10, 14, m[s[4]], m[s[5]]);
            g(3, 7, 11, 15, m[s[6]], m[s[7]]);
            g(0, 5, 10, 15, m[s[8]], m[s[9]]);
            g(1, 6, 11, 12, m[s[10]], m[s[11]]);
            g(2, 7, 8, 13, m[s[12]], m[s[13]]);
            g(3, 4, 9, 14, m[s[14]], m[s[15]]);
        }

        for (int i = 0; i < 8; ++i) h_[i] ^= v[i] ^ v[8 + i];
    }

    std::array<std::uint32_t, 8> h_;
    std::array<std::uint32_t, 2> t_;
    std::array<std::uint8_t, kBlockSize> buf_;
    std::size_t buf_len_ = 0;
};

inline Blake2s::Digest blake2s_256(std::span<const std::uint8_t> data) {
    Blake2s state;
    state.update(data);
    return state.finish();
}

}  // namespace laser
