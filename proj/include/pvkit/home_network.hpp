#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pvkit/crypto.hpp"
#include "pvkit/events.hpp"
#include "pvkit/result.hpp"
#include "pvkit/tokens.hpp"
#include "pvkit/wire.hpp"

namespace pvkit {

/// The identity provider. Registers mobile users (an offline, assumed-secure
/// step that provisions the smart card), vouches for its users during visa
/// acquisition, and originates passport revocation.
class HomeNetwork {
public:
    /// Everything the smart card needs, handed over at registration.
    struct Provisioning {
        SealedPassport passport;
        SymmetricKey k_mu_hn;
        std::uint64_t pass_no = 0;
        Certificate cert_hn;
    };

    HomeNetwork(std::string id, KeyPair keys, Certificate cert, Bytes ca_public_key,
                const CryptoSuite& suite, std::unique_ptr<Rng> rng, const Clock& clock,
                EventSink* events = nullptr,
                std::uint64_t freshness_window_ms = kDefaultFreshnessWindowMs);

    /// K_MU-HN = kdf([sc_id, biometric]); the passport seals the key so the
    /// visa-acquisition handler can recover it statelessly. Throws
    /// DuplicateRegistration for a repeated (id_MU, sc_id) pair.
    Provisioning register_mobile_user(const std::string& id_mu, BytesView sc_id,
                                      BytesView biometric, std::uint64_t validity_ms);

    /// Visa-acquisition verdict. Checks run in a fixed order so the reject
    /// reason tells the caller exactly which gate failed: timestamps, FN
    /// certificate, passport, and finally the id binding inside
    /// cipher_to_hn against the certificate's subject.
    Result<HNDecision, Reject> handle_forward(const ForwardToHN& msg);

    /// Marks the passport revoked and produces one sealed, signed revocation
    /// order per recipient FN (the protocol does not say which FNs hold
    /// visas, so the recipient set is explicit). Throws UnknownPassport.
    std::vector<std::pair<std::string, PassportRevoke>>
    revoke_passport(std::uint64_t pass_no,
                    const std::vector<std::pair<std::string, Bytes>>& known_fns);

    const std::string& id() const { return id_; }
    const Certificate& certificate() const { return cert_; }
    const Bytes& public_key() const { return keys_.public_key; }
    const KeyPair& keys() const { return keys_; }
    ActorCrypto& crypto() { return crypto_; }
    const ActorCrypto& crypto() const { return crypto_; }

    bool passport_revoked(std::uint64_t pass_no) const;
    std::optional<std::uint64_t> pass_no_of(const std::string& id_mu) const;

private:
    struct PassportRecord {
        std::string id_mu;
        Bytes sc_id;
        SymmetricKey k_mu_hn;
        Timestamp expiry;
        bool revoked = false;
    };

    std::string id_;
    KeyPair keys_;
    Certificate cert_;
    Bytes ca_pk_;
    ActorCrypto crypto_;
    const Clock* clock_;
    EventSink* events_;
    std::uint64_t window_;
    std::map<std::uint64_t, PassportRecord> issued_;
    std::uint64_t next_pass_no_ = 1;
};

} // namespace pvkit
