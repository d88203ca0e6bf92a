#pragma once

// Deterministic message workloads over the three example applications,
// shared by the simulator, the benchmarks and the tests.

#include <random>

#include "daledger/apps/currency.hpp"
#include "daledger/apps/dummy.hpp"
#include "daledger/apps/registrar.hpp"

namespace daledger::workload {

using apps::Keypair;
using apps::PublicKey;
using nmt::Message;
using nmt::NamespaceId;

inline constexpr NamespaceId kCurrencyNs{1};
/// Registrar instance i lives at kRegistrarNs + i; instance 0 is "the" registrar.
inline constexpr NamespaceId kRegistrarNs{2};
inline constexpr NamespaceId kDummyNs{1000};

inline NamespaceId registrar_ns(std::size_t instance) { return NamespaceId{kRegistrarNs.value + instance}; }

/// Messages of one block, by kind.
struct BlockWorkload {
    std::size_t transfers = 0;
    std::size_t dummy = 0;
    std::size_t dummy_size = 256;
    std::size_t topups = 0;
    /// Top-ups paid to the other registrar instances.
    std::size_t other_topups = 0;
    std::size_t registrations = 0;
    /// Registrations spread over the other registrar instances.
    std::size_t other_registrations = 0;
    /// Fee transactions, each paying for a fresh dummy child.
    std::size_t fees = 0;
};

inline constexpr std::uint64_t kGenesisBalance = 1'000'000'000;

class Generator {
public:
    explicit Generator(std::uint64_t seed, std::size_t accounts = 8, std::size_t registrars = 3)
        : rng_(seed), registrars_(registrars)
    {
        if (accounts == 0 || registrars == 0) throw ConfigError("workload needs at least one account and registrar");
        for (std::size_t i = 0; i < accounts; ++i) keys_.push_back(Keypair::from_label("account-" + std::to_string(i)));
        registrar_key_ = Keypair::from_label("registrar");
        nonces_.assign(accounts, 0);

        std::vector<std::pair<PublicKey, std::uint64_t>> alloc;
        for (const auto& k : keys_) alloc.emplace_back(k.pk, kGenesisBalance);
        registry_.add(apps::currency_app(kCurrencyNs, alloc));
        for (std::size_t r = 0; r < registrars; ++r) {
            auto app = apps::registrar_app({registrar_ns(r), kCurrencyNs, registrar_key_.pk, apps::kDefaultNamePrice});
            // Other instances start funded so their traffic never touches
            // the currency namespace.
            if (r > 0)
                for (const auto& k : keys_) app.genesis.put_u64(apps::kBalanceStore, k.pk, kGenesisBalance);
            registry_.add(std::move(app));
        }
        registry_.add(apps::dummy_app(kDummyNs));
    }

    const apps::AppRegistry& registry() const { return registry_; }
    const std::vector<Keypair>& accounts() const { return keys_; }
    const Keypair& registrar_key() const { return registrar_key_; }

    /// Messages for one block; a coinbase is added when a producer is given.
    std::vector<Message> body(const BlockWorkload& w, const std::optional<PublicKey>& producer = std::nullopt)
    {
        std::vector<Message> out;
        if (producer) out.push_back(Message{kCurrencyNs, apps::coinbase_payload(*producer)});
        for (std::size_t i = 0; i < w.transfers; ++i) {
            std::size_t from = pick();
            std::size_t to = pick();
            out.push_back(currency(apps::CurrencyTx::make(keys_[from], keys_[to].pk, 1 + rng_() % 100, nonces_[from]++)));
        }
        for (std::size_t i = 0; i < w.topups; ++i) topup(out, kRegistrarNs);
        for (std::size_t i = 0; i < w.other_topups; ++i) topup(out, other_instance(i));
        for (std::size_t i = 0; i < w.registrations; ++i) {
            out.push_back(Message{kRegistrarNs, apps::register_payload(keys_[pick()], fresh_name(), kRegistrarNs)});
        }
        for (std::size_t i = 0; i < w.other_registrations; ++i) {
            auto ns = other_instance(i);
            out.push_back(Message{ns, apps::register_payload(keys_[pick()], fresh_name(), ns)});
        }
        for (std::size_t i = 0; i < w.dummy; ++i) out.push_back(dummy(w.dummy_size));
        for (std::size_t i = 0; i < w.fees; ++i) {
            auto child = dummy(w.dummy_size);
            std::size_t from = pick();
            out.push_back(currency(apps::CurrencyTx::make(keys_[from], PublicKey{}, 1, nonces_[from]++, {}, apps::child_hash(child))));
            out.push_back(std::move(child));
        }
        return out;
    }

private:
    std::size_t pick() { return rng_() % keys_.size(); }

    Message currency(const apps::CurrencyTx& tx) { return Message{kCurrencyNs, tx.encode()}; }

    NamespaceId other_instance(std::size_t i) const
    {
        return registrars_ > 1 ? registrar_ns(1 + i % (registrars_ - 1)) : kRegistrarNs;
    }

    void topup(std::vector<Message>& out, NamespaceId registrar)
    {
        std::size_t from = pick();
        auto tx = apps::CurrencyTx::make(keys_[from], registrar_key_.pk, apps::kDefaultNamePrice, nonces_[from]++,
            apps::topup_memo(registrar));
        out.push_back(currency(tx));
        out.push_back(Message{registrar, apps::topup_payload(apps::tx_id(tx.encode()))});
    }

    Message dummy(std::size_t size)
    {
        Bytes key(8);
        for (auto& b : key) b = static_cast<Byte>(rng_());
        std::size_t value_size = size > 10 ? size - 10 : 0;
        Bytes value(value_size);
        for (auto& b : value) b = static_cast<Byte>(rng_());
        return Message{kDummyNs, apps::dummy_payload(key, value)};
    }

    Bytes fresh_name() { return to_bytes("name-" + std::to_string(name_counter_++)); }

    std::mt19937_64 rng_;
    std::size_t registrars_;
    std::vector<Keypair> keys_;
    Keypair registrar_key_;
    std::vector<std::uint64_t> nonces_;
    std::uint64_t name_counter_ = 0;
    apps::AppRegistry registry_;
};

/// Namespace of an application by its config name.
inline NamespaceId app_namespace(const std::string& name)
{
    if (name == "currency") return kCurrencyNs;
    if (name == "registrar") return kRegistrarNs;
    if (name == "dummy") return kDummyNs;
    throw ConfigError("unknown application '" + name + "'");
}

} // namespace daledger::workload
