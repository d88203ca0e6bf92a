#pragma once

// Account-based currency with Ed25519 signatures.
//
// Message payloads (big-endian):
//   transfer: body | signature(64)
//     body = u8 1 | sender(32) | recipient(32) | u64 amount | u64 nonce
//            | u8 flags | [feeChild(32) if flags & 1] | u16 memo_len | memo
//   coinbase: u8 2 | producer(32)
// A transfer with a fee child pays `amount` to the block producer named by
// the block's first coinbase, and only if the child leaf is in the block.
// Its recipient must be all zeros.

#include <sodium.h>

#include <array>
#include <optional>

#include "daledger/apps/state.hpp"

namespace daledger::apps {

using PublicKey = std::array<Byte, 32>;
using Signature = std::array<Byte, 64>;

struct Keypair {
    PublicKey pk{};
    std::array<Byte, 64> sk{};

    static Keypair from_seed(const std::array<Byte, 32>& seed)
    {
        ensure_sodium();
        Keypair k;
        crypto_sign_seed_keypair(k.pk.data(), k.sk.data(), seed.data());
        return k;
    }

    /// Deterministic key for tests and scenarios: seed = SHA-256(label).
    static Keypair from_label(std::string_view label) { return from_seed(sha256(to_bytes(label))); }

    Signature sign(BytesView msg) const
    {
        Signature sig{};
        crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), sk.data());
        return sig;
    }
};

inline bool verify_signature(const PublicKey& pk, BytesView msg, const Signature& sig)
{
    ensure_sodium();
    return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), pk.data()) == 0;
}

inline constexpr const char* kSignatureScheme = "ed25519";

inline constexpr Byte kTransferTag = 1;
inline constexpr Byte kCoinbaseTag = 2;

inline const std::string kBalanceStore = "balance";
inline const std::string kNonceStore = "nonce";
inline const std::string kAppliedStore = "applied";

struct CurrencyTx {
    PublicKey sender{};
    PublicKey recipient{};
    std::uint64_t amount = 0;
    std::uint64_t nonce = 0;
    std::optional<Hash32> fee_child;
    Bytes memo;
    Signature signature{};

    Bytes body() const
    {
        ByteWriter w;
        w.u8(kTransferTag);
        w.raw(sender);
        w.raw(recipient);
        w.u64be(amount);
        w.u64be(nonce);
        w.u8(fee_child ? 1 : 0);
        if (fee_child) w.raw(*fee_child);
        w.u16be(static_cast<std::uint16_t>(memo.size()));
        w.raw(memo);
        return std::move(w).take();
    }

    Bytes encode() const
    {
        Bytes b = body();
        b.insert(b.end(), signature.begin(), signature.end());
        return b;
    }

    static std::optional<CurrencyTx> decode(BytesView b)
    {
        try {
            ByteReader r(b);
            if (r.u8() != kTransferTag) return std::nullopt;
            CurrencyTx tx;
            tx.sender = r.fixed<32>();
            tx.recipient = r.fixed<32>();
            tx.amount = r.u64be();
            tx.nonce = r.u64be();
            Byte flags = r.u8();
            if (flags > 1) return std::nullopt;
            if (flags & 1) tx.fee_child = r.fixed<32>();
            auto memo = r.raw(r.u16be());
            tx.memo.assign(memo.begin(), memo.end());
            tx.signature = r.fixed<64>();
            if (!r.empty()) return std::nullopt;
            return tx;
        } catch (const DecodeError&) {
            return std::nullopt;
        }
    }

    bool signature_valid() const { return verify_signature(sender, body(), signature); }

    static CurrencyTx make(const Keypair& from, const PublicKey& to, std::uint64_t amount, std::uint64_t nonce,
        Bytes memo = {}, std::optional<Hash32> fee_child = std::nullopt)
    {
        CurrencyTx tx;
        tx.sender = from.pk;
        tx.recipient = fee_child ? PublicKey{} : to;
        tx.amount = amount;
        tx.nonce = nonce;
        tx.fee_child = fee_child;
        tx.memo = std::move(memo);
        tx.signature = from.sign(tx.body());
        return tx;
    }
};

inline Bytes coinbase_payload(const PublicKey& producer)
{
    Bytes b{kCoinbaseTag};
    b.insert(b.end(), producer.begin(), producer.end());
    return b;
}

/// Hash a fee transaction names its child by: the child's leaf digest.
inline Hash32 child_hash(const nmt::Message& m) { return nmt::Hasher(SIZE_MAX).hash_leaf(m).hash; }

/// Identifier of a transfer in the applied log.
inline Hash32 tx_id(BytesView payload) { return sha256(payload); }

/// Applied-log record: sender | recipient | u64 amount | memo.
struct AppliedTransfer {
    PublicKey sender{};
    PublicKey recipient{};
    std::uint64_t amount = 0;
    Bytes memo;

    Bytes encode() const
    {
        ByteWriter w;
        w.raw(sender);
        w.raw(recipient);
        w.u64be(amount);
        w.raw(memo);
        return std::move(w).take();
    }

    static std::optional<AppliedTransfer> decode(BytesView b)
    {
        if (b.size() < 72) return std::nullopt;
        ByteReader r(b);
        AppliedTransfer t;
        t.sender = r.fixed<32>();
        t.recipient = r.fixed<32>();
        t.amount = r.u64be();
        auto rest = r.raw(r.remaining());
        t.memo.assign(rest.begin(), rest.end());
        return t;
    }
};

inline std::optional<AppliedTransfer> find_transfer(const AppState& currency, const Hash32& id)
{
    auto rec = currency.get(kAppliedStore, id);
    if (!rec) return std::nullopt;
    return AppliedTransfer::decode(*rec);
}

inline std::uint64_t balance_of(const AppState& s, const PublicKey& pk) { return s.get_u64(kBalanceStore, pk); }

inline AppState currency_genesis(const std::vector<std::pair<PublicKey, std::uint64_t>>& allocations)
{
    AppState s;
    for (const auto& [pk, amount] : allocations) s.put_u64(kBalanceStore, pk, amount);
    return s;
}

namespace detail {

// Debit/credit plus nonce bump and log entry; caller has checked validity.
inline void settle(AppState& state, const CurrencyTx& tx, const PublicKey& to, const Hash32& id)
{
    if (to != tx.sender && balance_of(state, to) > UINT64_MAX - tx.amount) return;
    state.put_u64(kBalanceStore, tx.sender, balance_of(state, tx.sender) - tx.amount);
    state.put_u64(kBalanceStore, to, balance_of(state, to) + tx.amount);
    state.put_u64(kNonceStore, tx.sender, tx.nonce + 1);
    state.put(kAppliedStore, id, AppliedTransfer{tx.sender, to, tx.amount, tx.memo}.encode());
}

inline bool spendable(const AppState& state, const CurrencyTx& tx)
{
    return tx.signature_valid() && state.get_u64(kNonceStore, tx.sender) == tx.nonce
        && balance_of(state, tx.sender) >= tx.amount;
}

} // namespace detail

/// Plain transfer. Invalid, replayed or underfunded transfers are no-ops.
inline void apply_currency(AppState& state, const CurrencyTx& tx, const Hash32& id)
{
    if (tx.fee_child || !detail::spendable(state, tx)) return;
    detail::settle(state, tx, tx.recipient, id);
}

/// Fee payment to `producer`, only if `proof` shows a leaf whose hash is the
/// fee child in the block committed to by m_root.
inline void collect_fee(AppState& state, const CurrencyTx& tx, const Hash32& id, const PublicKey& producer,
    const nmt::NamespacedDigest& m_root, const std::optional<nmt::InclusionProof>& proof)
{
    if (!tx.fee_child || tx.recipient != PublicKey{}) return;
    if (!proof || proof->leaf.hash != *tx.fee_child || !proof->verify(m_root)) return;
    if (!detail::spendable(state, tx)) return;
    detail::settle(state, tx, producer, id);
}

inline void apply_currency_message(AppState& state, const nmt::Message& m, BlockContext& ctx)
{
    if (m.payload.empty()) return;
    if (m.payload[0] == kCoinbaseTag) {
        if (m.payload.size() != 33) return;
        if (!ctx.scratch.count("producer")) ctx.scratch["producer"] = Bytes(m.payload.begin() + 1, m.payload.end());
        return;
    }
    auto tx = CurrencyTx::decode(m.payload);
    if (!tx) return;
    Hash32 id = tx_id(m.payload);
    if (!tx->fee_child) {
        apply_currency(state, *tx, id);
        return;
    }
    auto producer = ctx.scratch.find("producer");
    if (producer == ctx.scratch.end() || !ctx.leaf_proof) return;
    PublicKey p{};
    std::copy(producer->second.begin(), producer->second.end(), p.begin());
    collect_fee(state, *tx, id, p, ctx.m_root, ctx.leaf_proof(*tx->fee_child));
}

inline AppDescriptor currency_app(nmt::NamespaceId ns, const std::vector<std::pair<PublicKey, std::uint64_t>>& allocations)
{
    return AppDescriptor{ns, "currency", {}, apply_currency_message, currency_genesis(allocations)};
}

} // namespace daledger::apps
