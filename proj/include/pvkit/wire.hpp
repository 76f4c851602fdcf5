#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "pvkit/tokens.hpp"

namespace pvkit {

// Wire format: one variant tag byte, then the variant's fields in protocol
// order, each 4-byte big-endian length-prefixed. Unsigned 64-bit values and
// timestamps travel as 8-byte fields, nonces as 16-byte fields. Decoding is
// strict: unknown tag, short read or trailing bytes all fail.

enum class RejectReason : std::uint8_t {
    Stale = 1,
    BadCert,
    BadPassport,
    IdMismatch,
    PolicyDenied,
    BadSignature,
    NonceMismatch,
    InvalidUser,
    BadVisa,
    Revoked,
    Expired,
    BadProof,
    BadRevoke,
    InvalidFn,
    BadKeyDelivery,
    BadResponse,
    PassMismatch,
    NoPending,
    Malformed,
};

const char* to_string(RejectReason reason);

/// MU -> FN: sealed Passport, a channel to the HN only the HN can read,
/// the claimed passport number, timestamp, the HN's certificate, the visa
/// request descriptor and the MU's second nonce.
struct VisaRequest {
    SealedPassport passport;
    Bytes cipher_to_hn; // enc_sym(SK_MU-HN, (id_FN, r_MU, T_MU))
    std::uint64_t pass_no = 0;
    Timestamp t_mu;
    Certificate cert_hn;
    std::string descriptor;
    Nonce r2_mu;

    friend bool operator==(const VisaRequest&, const VisaRequest&) = default;
};

/// FN -> HN: relays the Passport and the MU's HN-channel verbatim, adds the
/// FN's certificate, a fresh timestamp and the FN nonce sealed for the HN.
struct ForwardToHN {
    SealedPassport passport;
    Bytes cipher_to_hn;
    Timestamp t_mu;
    Certificate cert_fn;
    Timestamp t_fn;
    Bytes sealed_r_fn; // seal_asym(PK_HN, r_FN)

    friend bool operator==(const ForwardToHN&, const ForwardToHN&) = default;
};

/// HN -> FN: the FN's part sealed under PK_FN and signed inside, plus the
/// MU's part encrypted under SK_MU-HN, relayed onward untouched.
struct HNDecision {
    Bytes for_fn; // seal_asym(PK_FN, (Pass_No, valid_MU, r_MU, r_FN, sig))
    Bytes for_mu; // enc_sym(SK_MU-HN, (id_FN, valid_FN, r_FN, r_MU, T_HN))

    friend bool operator==(const HNDecision&, const HNDecision&) = default;
};

/// FN -> MU: the sealed Visa, the HN's MU-part verbatim, the master key
/// delivery under the just-derived SK_MU-FN, and the FN's second nonce.
struct VisaGrant {
    SealedVisa visa;
    Bytes for_mu;
    Bytes key_delivery; // enc_sym(SK_MU-FN, (K_MU-FN, Visa_No, expiry))
    Nonce r2_fn;

    friend bool operator==(const VisaGrant&, const VisaGrant&) = default;
};

/// MU -> FN: service descriptor, the Visa, and proof of Visa knowledge
/// under the session key derived from the current chain key.
struct ServiceRequest {
    std::string descriptor;
    SealedVisa visa;
    Bytes cipher1; // enc_sym(SK', (r'_MU, Visa_No))

    friend bool operator==(const ServiceRequest&, const ServiceRequest&) = default;
};

/// FN -> MU: nonce echo under SK'' and the service payload under SK'''.
struct ServiceResponse {
    Bytes cipher2; // enc_sym(SK'', (r'_FN, Pass_No))
    Bytes payload; // enc_sym(SK''', service bytes)

    friend bool operator==(const ServiceResponse&, const ServiceResponse&) = default;
};

/// HN -> FN: sealed, signed passport revocation order.
struct PassportRevoke {
    Bytes sealed; // seal_asym(PK_FN, (Pass_No, RevOke, Sig_HN(Pass_No, RevOke)))

    friend bool operator==(const PassportRevoke&, const PassportRevoke&) = default;
};

/// MU -> FN: nested visa revocation, outer layer under the chain key,
/// inner layer under SK' derived from it.
struct VisaRevoke {
    Bytes outer;

    friend bool operator==(const VisaRevoke&, const VisaRevoke&) = default;
};

struct Reject {
    RejectReason reason = RejectReason::Malformed;

    friend bool operator==(const Reject&, const Reject&) = default;
};

using ProtocolMessage =
    std::variant<VisaRequest, ForwardToHN, HNDecision, VisaGrant, ServiceRequest, ServiceResponse,
                 PassportRevoke, VisaRevoke, Reject>;

Bytes encode(const ProtocolMessage& msg);

/// Total over all byte strings; empty result = MalformedMessage.
std::optional<ProtocolMessage> decode(BytesView data);

/// One-line decoded view for traces and the hex dumper.
std::string describe(const ProtocolMessage& msg);

const char* variant_name(const ProtocolMessage& msg);

// ---------------------------------------------------------------------------
// Plaintext layouts of the encrypted fields above. These share the canonical
// length-prefixed encoding so both endpoints (and the oracle in the tests)
// produce identical bytes.

inline constexpr std::string_view kRevokeLiteral = "RevOke";

struct CipherToHnPlain {
    std::string id_fn;
    Nonce r_mu;
    Timestamp t_mu;

    Bytes encode() const;
    static std::optional<CipherToHnPlain> decode(BytesView data);
};

struct ForFnPlain {
    std::uint64_t pass_no = 0;
    bool valid_mu = false;
    Nonce r_mu;
    Nonce r_fn;
    Bytes sig; // Sig_HN over signed_preimage()

    Bytes signed_preimage() const;
    Bytes encode() const;
    static std::optional<ForFnPlain> decode(BytesView data);
};

struct ForMuPlain {
    std::string id_fn;
    bool valid_fn = false;
    Nonce r_fn;
    Nonce r_mu;
    Timestamp t_hn;

    Bytes encode() const;
    static std::optional<ForMuPlain> decode(BytesView data);
};

/// The Visa is opaque to the MU, so the grant's key delivery also carries
/// the Visa number and expiry the MU needs for service requests.
struct KeyDeliveryPlain {
    SymmetricKey k_mu_fn;
    std::uint64_t visa_no = 0;
    Timestamp expiry;

    Bytes encode() const;
    static std::optional<KeyDeliveryPlain> decode(BytesView data);
};

struct ServiceProofPlain {
    Nonce r_mu_prime;
    std::uint64_t visa_no = 0;

    Bytes encode() const;
    static std::optional<ServiceProofPlain> decode(BytesView data);
};

struct ServiceEchoPlain {
    Nonce r_fn_prime;
    std::uint64_t pass_no = 0;

    Bytes encode() const;
    static std::optional<ServiceEchoPlain> decode(BytesView data);
};

struct PassportRevokePlain {
    std::uint64_t pass_no = 0;
    Bytes sig; // Sig_HN over signed_preimage()

    Bytes signed_preimage() const;
    Bytes encode() const;
    static std::optional<PassportRevokePlain> decode(BytesView data);
};

struct VisaRevokePlain {
    std::uint64_t pass_no = 0;
    std::uint64_t visa_no = 0;
    Bytes inner; // enc_sym(SK', inner triple) on the outer layer; absent inside

    Bytes encode(bool with_inner) const;
    static std::optional<VisaRevokePlain> decode(BytesView data, bool with_inner);
};

} // namespace pvkit
