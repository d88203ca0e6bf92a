#pragma once

#include <sodium.h>

#include <initializer_list>
#include <stdexcept>

#include "daledger/bytes.hpp"

namespace daledger {

/// Name of the 256-bit hash every digest in this build is computed with.
inline constexpr const char* kHashName = "sha256";

inline void ensure_sodium()
{
    static const bool ok = [] { return sodium_init() >= 0; }();
    if (!ok) throw std::runtime_error("libsodium initialisation failed");
}

/// Incremental SHA-256 over several byte ranges.
class Sha256 {
public:
    Sha256()
    {
        ensure_sodium();
        crypto_hash_sha256_init(&st_);
    }

    Sha256& update(BytesView data)
    {
        crypto_hash_sha256_update(&st_, data.data(), data.size());
        return *this;
    }

    Sha256& update(Byte b) { return update(BytesView(&b, 1)); }

    Hash32 finish()
    {
        Hash32 out{};
        crypto_hash_sha256_final(&st_, out.data());
        return out;
    }

private:
    crypto_hash_sha256_state st_{};
};

inline Hash32 sha256(BytesView data) { return Sha256().update(data).finish(); }

inline Hash32 sha256(std::initializer_list<BytesView> parts)
{
    Sha256 h;
    for (auto p : parts) h.update(p);
    return h.finish();
}

} // namespace daledger
