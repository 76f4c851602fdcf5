#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "pvkit/crypto.hpp"
#include "pvkit/result.hpp"

namespace pvkit {

// Passport and Visa tokens plus CA certificates. A token is its body's
// canonical encoding, signed by the issuer and sealed under the issuer's
// own public key, so it is opaque to everyone but the issuer.

enum class Role : std::uint8_t {
    NetworkProvider = 1,
    IdentityProvider = 2,
};

const char* to_string(Role role);

struct Certificate {
    std::string subject_id;
    Bytes subject_public_key;
    Role role = Role::NetworkProvider;
    Timestamp expiry;
    Bytes ca_signature;

    Bytes signed_preimage() const;
    Bytes encode() const;
    static std::optional<Certificate> decode(BytesView data);

    friend bool operator==(const Certificate&, const Certificate&) = default;
};

struct PassportBody {
    std::string id_mu;
    std::uint64_t pass_no = 0;
    Timestamp expiry;
    std::map<std::string, std::string> data;
    SymmetricKey k_mu_hn;

    Bytes encode() const;
    static std::optional<PassportBody> decode(BytesView data);

    friend bool operator==(const PassportBody&, const PassportBody&) = default;
};

struct SealedPassport {
    Bytes ciphertext;

    friend bool operator==(const SealedPassport&, const SealedPassport&) = default;
};

struct VisaBody {
    std::uint64_t pass_no = 0;
    std::uint64_t visa_no = 0;
    Timestamp expiry;
    std::map<std::string, std::string> data;
    SymmetricKey k_mu_fn;

    Bytes encode() const;
    static std::optional<VisaBody> decode(BytesView data);

    friend bool operator==(const VisaBody&, const VisaBody&) = default;
};

struct SealedVisa {
    Bytes ciphertext;

    friend bool operator==(const SealedVisa&, const SealedVisa&) = default;
};

enum class TokenError {
    DecryptFailed,
    BadSignature,
    Expired,
};

const char* to_string(TokenError err);

SealedPassport make_passport(ActorCrypto& crypto, const KeyPair& hn_keys, const PassportBody& body);

/// Returns the body only when the seal opens under hn_keys, the embedded
/// issuer signature verifies and expiry >= now.
Result<PassportBody, TokenError> open_passport(ActorCrypto& crypto, const KeyPair& hn_keys,
                                               const SealedPassport& sp, Timestamp now);

SealedVisa make_visa(ActorCrypto& crypto, const KeyPair& fn_keys, const VisaBody& body);

Result<VisaBody, TokenError> open_visa(ActorCrypto& crypto, const KeyPair& fn_keys,
                                       const SealedVisa& sv, Timestamp now);

Certificate issue_certificate(ActorCrypto& crypto, const KeyPair& ca_keys,
                              const std::string& subject_id, const Bytes& subject_public_key,
                              Role role, Timestamp expiry);

/// Accepts iff the CA signature verifies, the certificate is unexpired and
/// its role equals required_role.
bool check_certificate(ActorCrypto& crypto, const Bytes& ca_public_key, const Certificate& cert,
                       Role required_role, Timestamp now);

} // namespace pvkit
