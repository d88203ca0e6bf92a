#pragma once

// Fixed-size shares. Each namespace's messages form one stream
//   varint(count) || (varint(len) || payload)*
// which starts on a fresh share and is cut into equal chunks, the last one
// zero-padded. Original shares repeat their namespace in the first 8 data
// bytes so that erasure decoding restores it along with the payload.

#include <string>
#include <vector>

#include "daledger/bytes.hpp"
#include "daledger/errors.hpp"
#include "daledger/nmt.hpp"

namespace daledger {

inline constexpr std::size_t kDefaultSharePayloadSize = 225;
inline constexpr std::size_t kShareNamespacePrefix = 8;

struct Share {
    nmt::NamespaceId ns;
    Bytes data;

    bool operator==(const Share&) const = default;

    /// ns(8B) || data
    Bytes serialize() const
    {
        ByteWriter w(8 + data.size());
        w.u64be(ns.value);
        w.raw(data);
        return std::move(w).take();
    }

    static Share deserialize(BytesView b)
    {
        if (b.size() < 8) throw DecodeError("share shorter than its namespace");
        ByteReader r(b);
        Share s;
        s.ns = nmt::NamespaceId{r.u64be()};
        auto rest = r.raw(r.remaining());
        s.data.assign(rest.begin(), rest.end());
        return s;
    }

    std::size_t serialized_size() const { return 8 + data.size(); }
};

/// Usable stream bytes per share.
inline std::size_t share_capacity(std::size_t share_payload_size)
{
    if (share_payload_size <= kShareNamespacePrefix) {
        throw std::invalid_argument("share payload size must exceed " + std::to_string(kShareNamespacePrefix));
    }
    return share_payload_size - kShareNamespacePrefix;
}

/// Share whose data holds the namespace copy followed by the given chunk,
/// zero-padded to share_payload_size.
inline Share make_original_share(nmt::NamespaceId ns, BytesView chunk, std::size_t share_payload_size)
{
    Share s{ns, Bytes(share_payload_size, 0)};
    auto nsb = ns.bytes();
    std::copy(nsb.begin(), nsb.end(), s.data.begin());
    std::copy(chunk.begin(), chunk.end(), s.data.begin() + kShareNamespacePrefix);
    return s;
}

inline Share make_padding_share(std::size_t share_payload_size)
{
    return make_original_share(nmt::kTailPaddingNamespace, {}, share_payload_size);
}

inline std::vector<Share> split_to_shares(std::span<const nmt::Message> messages,
    std::size_t share_payload_size = kDefaultSharePayloadSize)
{
    std::size_t cap = share_capacity(share_payload_size);
    std::vector<Share> out;
    std::size_t i = 0;
    while (i < messages.size()) {
        nmt::NamespaceId ns = messages[i].ns;
        std::size_t j = i;
        while (j < messages.size() && messages[j].ns == ns) ++j;
        if (j < messages.size() && messages[j].ns < ns) {
            throw UnsortedInput("messages are not sorted by namespace at index " + std::to_string(j));
        }
        ByteWriter w;
        w.varint(j - i);
        for (std::size_t m = i; m < j; ++m) {
            w.varint(messages[m].payload.size());
            w.raw(messages[m].payload);
        }
        const Bytes& stream = w.bytes();
        for (std::size_t off = 0; off < stream.size(); off += cap) {
            std::size_t len = std::min(cap, stream.size() - off);
            out.push_back(make_original_share(ns, BytesView(stream).subspan(off, len), share_payload_size));
        }
        i = j;
    }
    return out;
}

/// Inverse of split_to_shares. Padding-namespace shares are skipped.
inline std::vector<nmt::Message> parse_shares(std::span<const Share> shares)
{
    std::vector<nmt::Message> out;
    if (shares.empty()) return out;
    std::size_t size = shares.front().data.size();
    std::size_t i = 0;
    while (i < shares.size()) {
        nmt::NamespaceId ns = shares[i].ns;
        Bytes stream;
        std::size_t j = i;
        for (; j < shares.size() && shares[j].ns == ns; ++j) {
            const auto& d = shares[j].data;
            if (d.size() != size) throw MalformedShares("shares have differing sizes");
            if (d.size() <= kShareNamespacePrefix
                || nmt::NamespaceId::from_bytes(BytesView(d).first(kShareNamespacePrefix)) != ns) {
                throw MalformedShares("share data does not repeat its namespace");
            }
            stream.insert(stream.end(), d.begin() + kShareNamespacePrefix, d.end());
        }
        if (ns == nmt::kParityNamespace) throw MalformedShares("parity share in original data");
        if (ns != nmt::kTailPaddingNamespace) {
            try {
                ByteReader r(stream);
                std::uint64_t count = r.varint();
                for (std::uint64_t m = 0; m < count; ++m) {
                    std::uint64_t len = r.varint();
                    if (len > r.remaining()) throw DecodeError("message length runs past the data");
                    auto payload = r.raw(static_cast<std::size_t>(len));
                    out.push_back(nmt::Message{ns, Bytes(payload.begin(), payload.end())});
                }
                for (std::size_t rest = r.remaining(); rest > 0; --rest) {
                    if (r.u8() != 0) throw DecodeError("non-zero bytes after the last message");
                }
            } catch (const DecodeError& e) {
                throw MalformedShares(std::string("namespace stream is malformed: ") + e.what());
            }
        }
        i = j;
    }
    return out;
}

} // namespace daledger
