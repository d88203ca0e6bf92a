#pragma once

// Name registrar depending on the currency app.
//
//   top-up:   u8 1 | currency txid(32)
//   register: u8 2 | registrant pk(32) | u16 name_len | name | signature(64)
// The register signature covers everything before it plus the registrar's
// 8-byte namespace, so it cannot be replayed against another instance.
// A top-up counts when the referenced transfer paid the registrar key with
// the registrar namespace as memo.

#include "daledger/apps/currency.hpp"

namespace daledger::apps {

inline constexpr std::uint64_t kDefaultNamePrice = 10;

inline constexpr Byte kTopUpTag = 1;
inline constexpr Byte kRegisterTag = 2;

inline const std::string kUsedStore = "used";
inline const std::string kNamesStore = "names";

struct RegistrarConfig {
    nmt::NamespaceId ns;
    nmt::NamespaceId currency_ns;
    PublicKey registrar_pk{};
    std::uint64_t price = kDefaultNamePrice;
};

inline Bytes topup_payload(const Hash32& currency_txid)
{
    Bytes b{kTopUpTag};
    b.insert(b.end(), currency_txid.begin(), currency_txid.end());
    return b;
}

/// Memo a currency transfer carries to top up the registrar at `ns`.
inline Bytes topup_memo(nmt::NamespaceId ns)
{
    auto b = ns.bytes();
    return Bytes(b.begin(), b.end());
}

namespace detail {

inline Bytes register_body(const PublicKey& pk, BytesView name)
{
    ByteWriter w;
    w.u8(kRegisterTag);
    w.raw(pk);
    w.u16be(static_cast<std::uint16_t>(name.size()));
    w.raw(name);
    return std::move(w).take();
}

} // namespace detail

inline Bytes register_payload(const Keypair& registrant, BytesView name, nmt::NamespaceId registrar_ns)
{
    Bytes body = detail::register_body(registrant.pk, name);
    Bytes preimage = body;
    auto nsb = registrar_ns.bytes();
    preimage.insert(preimage.end(), nsb.begin(), nsb.end());
    auto sig = registrant.sign(preimage);
    body.insert(body.end(), sig.begin(), sig.end());
    return body;
}

inline std::optional<PublicKey> name_owner(const AppState& s, BytesView name)
{
    auto v = s.get(kNamesStore, name);
    if (!v || v->size() != 32) return std::nullopt;
    PublicKey pk{};
    std::copy(v->begin(), v->end(), pk.begin());
    return pk;
}

inline void apply_topup(AppState& state, const RegistrarConfig& cfg, const Hash32& txid, const AppState* currency)
{
    if (!currency || state.has(kUsedStore, txid)) return;
    auto t = find_transfer(*currency, txid);
    if (!t || t->recipient != cfg.registrar_pk || t->memo != topup_memo(cfg.ns)) return;
    std::uint64_t bal = state.get_u64(kBalanceStore, t->sender);
    if (bal > UINT64_MAX - t->amount) return;
    state.put_u64(kBalanceStore, t->sender, bal + t->amount);
    state.put(kUsedStore, txid, Bytes{1});
}

inline void apply_register(AppState& state, const RegistrarConfig& cfg, BytesView payload)
{
    try {
        ByteReader r(payload);
        r.u8();
        auto pk = r.fixed<32>();
        auto name = r.raw(r.u16be());
        auto sig = r.fixed<64>();
        if (!r.empty() || name.empty()) return;
        Bytes preimage = detail::register_body(pk, name);
        auto nsb = cfg.ns.bytes();
        preimage.insert(preimage.end(), nsb.begin(), nsb.end());
        if (!verify_signature(pk, preimage, sig)) return;
        if (state.has(kNamesStore, name)) return;
        std::uint64_t bal = state.get_u64(kBalanceStore, pk);
        if (bal < cfg.price) return;
        state.put_u64(kBalanceStore, pk, bal - cfg.price);
        state.put(kNamesStore, name, pk);
    } catch (const DecodeError&) {
    }
}

inline void apply_registrar(AppState& state, const RegistrarConfig& cfg, const nmt::Message& m, const AppState* currency)
{
    if (m.payload.empty()) return;
    if (m.payload[0] == kTopUpTag && m.payload.size() == 33) {
        Hash32 txid{};
        std::copy(m.payload.begin() + 1, m.payload.end(), txid.begin());
        apply_topup(state, cfg, txid, currency);
    } else if (m.payload[0] == kRegisterTag) {
        apply_register(state, cfg, m.payload);
    }
}

inline AppDescriptor registrar_app(const RegistrarConfig& cfg)
{
    return AppDescriptor{cfg.ns, "registrar", {cfg.currency_ns},
        [cfg](AppState& s, const nmt::Message& m, BlockContext& ctx) { apply_registrar(s, cfg, m, ctx.dep(cfg.currency_ns)); },
        AppState{}};
}

} // namespace daledger::apps
