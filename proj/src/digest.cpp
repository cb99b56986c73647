#include "handsel/digest.hpp"

#include <array>
#include <cstddef>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "handsel/error.hpp"

namespace handsel {

namespace {

struct DigestContext {
    DigestContext() : ctx(EVP_MD_CTX_new()) {
        if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
            throw Error(ErrorCode::io, "cannot initialize SHA-256 context");
        }
    }
    ~DigestContext() { EVP_MD_CTX_free(ctx); }
    DigestContext(const DigestContext&) = delete;
    DigestContext& operator=(const DigestContext&) = delete;

    void update(const char* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx, data, n) != 1) {
            throw Error(ErrorCode::io, "SHA-256 update failed");
        }
    }

    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> raw{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx, raw.data(), &len) != 1) {
            throw Error(ErrorCode::io, "SHA-256 finalization failed");
        }
        static const char* digits = "0123456789abcdef";
        std::string out;
        out.reserve(2 * len);
        for (unsigned int i = 0; i < len; ++i) {
            out.push_back(digits[raw[i] >> 4]);
            out.push_back(digits[raw[i] & 0xf]);
        }
        return out;
    }

    EVP_MD_CTX* ctx;
};

} // namespace

std::string sha256_hex(std::string_view bytes) {
    DigestContext ctx;
    ctx.update(bytes.data(), bytes.size());
    return ctx.hex();
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io, "cannot open for hashing: " + path);
    }
    DigestContext ctx;
    std::array<char, 65536> buffer;
    while (in) {
        in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        ctx.update(buffer.data(), static_cast<std::size_t>(in.gcount()));
    }
    if (in.bad()) {
        throw Error(ErrorCode::io, "read error while hashing: " + path);
    }
    return ctx.hex();
}

} // namespace handsel
