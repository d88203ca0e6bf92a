#pragma once

// Application state and the transition contract. Transitions mutate a
// state in place and must leave it untouched on any invalid input.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "daledger/errors.hpp"
#include "daledger/hash.hpp"
#include "daledger/nmt.hpp"

namespace daledger::apps {

/// Named key-value stores with a content commitment.
class AppState {
public:
    using Store = std::map<Bytes, Bytes>;

    std::optional<Bytes> get(const std::string& store, BytesView key) const
    {
        auto s = stores_.find(store);
        if (s == stores_.end()) return std::nullopt;
        auto it = s->second.find(Bytes(key.begin(), key.end()));
        if (it == s->second.end()) return std::nullopt;
        return it->second;
    }

    bool has(const std::string& store, BytesView key) const { return get(store, key).has_value(); }

    void put(const std::string& store, BytesView key, BytesView value)
    {
        stores_[store][Bytes(key.begin(), key.end())] = Bytes(value.begin(), value.end());
    }

    void erase(const std::string& store, BytesView key)
    {
        auto s = stores_.find(store);
        if (s == stores_.end()) return;
        s->second.erase(Bytes(key.begin(), key.end()));
        if (s->second.empty()) stores_.erase(s);
    }

    std::uint64_t get_u64(const std::string& store, BytesView key) const
    {
        auto v = get(store, key);
        if (!v || v->size() != 8) return 0;
        std::uint64_t out = 0;
        for (Byte b : *v) out = out << 8 | b;
        return out;
    }

    void put_u64(const std::string& store, BytesView key, std::uint64_t value)
    {
        ByteWriter w(8);
        w.u64be(value);
        put(store, key, w.bytes());
    }

    std::size_t entry_count() const
    {
        std::size_t n = 0;
        for (const auto& [name, s] : stores_) n += s.size();
        return n;
    }

    std::size_t entry_count(const std::string& store) const
    {
        auto s = stores_.find(store);
        return s == stores_.end() ? 0 : s->second.size();
    }

    /// Sum of key and value bytes.
    std::size_t byte_size() const
    {
        std::size_t n = 0;
        for (const auto& [name, s] : stores_)
            for (const auto& [k, v] : s) n += k.size() + v.size();
        return n;
    }

    const std::map<std::string, Store>& stores() const { return stores_; }

    /// SHA-256 over (u32 len | store | u32 len | key | u32 len | value) for
    /// every entry in lexicographic (store, key) order.
    Hash32 commitment() const
    {
        Sha256 h;
        for (const auto& [name, s] : stores_) {
            for (const auto& [k, v] : s) {
                ByteWriter w;
                w.u32be(static_cast<std::uint32_t>(name.size()));
                w.raw(BytesView(reinterpret_cast<const Byte*>(name.data()), name.size()));
                w.u32be(static_cast<std::uint32_t>(k.size()));
                w.raw(k);
                w.u32be(static_cast<std::uint32_t>(v.size()));
                w.raw(v);
                h.update(w.bytes());
            }
        }
        return h.finish();
    }

    bool operator==(const AppState&) const = default;

private:
    std::map<std::string, Store> stores_;
};

/// Everything a transition may consult besides its own state.
struct BlockContext {
    std::uint64_t height = 0;
    nmt::NamespacedDigest m_root;
    /// Inclusion proof for a leaf with the given hash in this block, if any
    /// peer can supply one.
    std::function<std::optional<nmt::InclusionProof>(const Hash32&)> leaf_proof;
    /// Dependency states as of the end of this block.
    std::map<nmt::NamespaceId, const AppState*> deps;
    /// Working memory for one app within one block; never persisted.
    std::map<std::string, Bytes> scratch;

    const AppState* dep(nmt::NamespaceId ns) const
    {
        auto it = deps.find(ns);
        return it == deps.end() ? nullptr : it->second;
    }
};

using Transition = std::function<void(AppState&, const nmt::Message&, BlockContext&)>;

struct AppDescriptor {
    nmt::NamespaceId ns;
    std::string name;
    std::vector<nmt::NamespaceId> dependencies;
    Transition transition;
    AppState genesis;
};

/// Applications by namespace, with dependency ordering.
class AppRegistry {
public:
    void add(AppDescriptor app)
    {
        auto ns = app.ns;
        apps_[ns] = std::move(app);
        // Reject cycles eagerly.
        for (const auto& [id, a] : apps_) closure(id);
    }

    const AppDescriptor& at(nmt::NamespaceId ns) const
    {
        auto it = apps_.find(ns);
        if (it == apps_.end()) throw ConfigError("unknown application namespace " + std::to_string(ns.value));
        return it->second;
    }

    bool contains(nmt::NamespaceId ns) const { return apps_.count(ns) != 0; }

    const std::map<nmt::NamespaceId, AppDescriptor>& all() const { return apps_; }

    /// The app and its transitive dependencies, dependencies first.
    std::vector<nmt::NamespaceId> closure(nmt::NamespaceId root) const
    {
        std::vector<nmt::NamespaceId> order;
        std::map<nmt::NamespaceId, int> mark;
        std::function<void(nmt::NamespaceId)> visit = [&](nmt::NamespaceId ns) {
            if (mark[ns] == 2) return;
            if (mark[ns] == 1) throw ConfigError("application dependency cycle through " + std::to_string(ns.value));
            mark[ns] = 1;
            for (auto d : at(ns).dependencies) visit(d);
            mark[ns] = 2;
            order.push_back(ns);
        };
        visit(root);
        return order;
    }

private:
    std::map<nmt::NamespaceId, AppDescriptor> apps_;
};

} // namespace daledger::apps
