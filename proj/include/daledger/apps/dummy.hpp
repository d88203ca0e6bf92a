#pragma once

// Key-value app with no semantics: u16 key_len | key | value.

#include "daledger/apps/state.hpp"

namespace daledger::apps {

inline const std::string kKvStore = "kv";

inline Bytes dummy_payload(BytesView key, BytesView value)
{
    ByteWriter w;
    w.u16be(static_cast<std::uint16_t>(key.size()));
    w.raw(key);
    w.raw(value);
    return std::move(w).take();
}

inline void apply_dummy(AppState& state, const nmt::Message& m)
{
    if (m.payload.size() < 2) return;
    std::size_t klen = std::size_t{m.payload[0]} << 8 | m.payload[1];
    if (m.payload.size() < 2 + klen) return;
    BytesView p(m.payload);
    state.put(kKvStore, p.subspan(2, klen), p.subspan(2 + klen));
}

inline AppDescriptor dummy_app(nmt::NamespaceId ns)
{
    return AppDescriptor{ns, "dummy", {}, [](AppState& s, const nmt::Message& m, BlockContext&) { apply_dummy(s, m); }, AppState{}};
}

} // namespace daledger::apps
