#include "pvkit/tokens.hpp"

#include "pvkit/encode.hpp"

namespace pvkit {

namespace {

void put_data_map(ByteWriter& w, const std::map<std::string, std::string>& data) {
    w.put_u32(static_cast<std::uint32_t>(data.size()));
    for (const auto& [key, value] : data) {
        w.put_field(key);
        w.put_field(value);
    }
}

bool read_data_map(ByteReader& r, std::map<std::string, std::string>& out) {
    std::uint32_t count = 0;
    if (!r.read_u32(count)) return false;
    out.clear();
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string key;
        std::string value;
        if (!r.read_field(key) || !r.read_field(value)) return false;
        out.emplace(std::move(key), std::move(value));
    }
    return true;
}

// body bytes || issuer signature, sealed under the issuer's public key
Bytes seal_signed(ActorCrypto& crypto, const KeyPair& issuer, const Bytes& body_bytes) {
    ByteWriter w;
    w.put_field(BytesView(body_bytes));
    w.put_field(BytesView(crypto.sign(issuer.private_key, body_bytes)));
    return crypto.seal_asym(issuer.public_key, w.bytes());
}

template <typename Body>
Result<Body, TokenError> open_signed(ActorCrypto& crypto, const KeyPair& issuer,
                                     BytesView ciphertext, Timestamp now) {
    auto plain = crypto.unseal_asym(issuer.private_key, ciphertext);
    if (!plain) return TokenError::DecryptFailed;

    ByteReader r(*plain);
    Bytes body_bytes;
    Bytes sig;
    if (!r.read_field(body_bytes) || !r.read_field(sig) || !r.at_end())
        return TokenError::DecryptFailed;

    if (!crypto.verify(issuer.public_key, body_bytes, sig)) return TokenError::BadSignature;

    auto body = Body::decode(body_bytes);
    if (!body) return TokenError::BadSignature;
    if (body->expiry < now) return TokenError::Expired;
    return *body;
}

} // namespace

const char* to_string(Role role) {
    switch (role) {
        case Role::NetworkProvider: return "network-provider";
        case Role::IdentityProvider: return "identity-provider";
    }
    return "?";
}

const char* to_string(TokenError err) {
    switch (err) {
        case TokenError::DecryptFailed: return "decrypt-failed";
        case TokenError::BadSignature: return "bad-signature";
        case TokenError::Expired: return "expired";
    }
    return "?";
}

Bytes Certificate::signed_preimage() const {
    ByteWriter w;
    w.put_field(subject_id);
    w.put_field(BytesView(subject_public_key));
    w.put_u8(static_cast<std::uint8_t>(role));
    w.put_u64(expiry.ticks);
    return w.take();
}

Bytes Certificate::encode() const {
    ByteWriter w;
    w.put_field(subject_id);
    w.put_field(BytesView(subject_public_key));
    w.put_u8(static_cast<std::uint8_t>(role));
    w.put_u64(expiry.ticks);
    w.put_field(BytesView(ca_signature));
    return w.take();
}

std::optional<Certificate> Certificate::decode(BytesView data) {
    ByteReader r(data);
    Certificate cert;
    std::uint8_t role_byte = 0;
    if (!r.read_field(cert.subject_id) || !r.read_field(cert.subject_public_key) ||
        !r.read_u8(role_byte) || !r.read_u64(cert.expiry.ticks) ||
        !r.read_field(cert.ca_signature) || !r.at_end())
        return std::nullopt;
    if (role_byte != static_cast<std::uint8_t>(Role::NetworkProvider) &&
        role_byte != static_cast<std::uint8_t>(Role::IdentityProvider))
        return std::nullopt;
    cert.role = static_cast<Role>(role_byte);
    return cert;
}

Bytes PassportBody::encode() const {
    ByteWriter w;
    w.put_field(id_mu);
    w.put_u64(pass_no);
    w.put_u64(expiry.ticks);
    put_data_map(w, data);
    w.put_field(BytesView(k_mu_hn.bytes));
    return w.take();
}

std::optional<PassportBody> PassportBody::decode(BytesView data) {
    ByteReader r(data);
    PassportBody body;
    if (!r.read_field(body.id_mu) || !r.read_u64(body.pass_no) || !r.read_u64(body.expiry.ticks) ||
        !read_data_map(r, body.data) || !r.read_field(body.k_mu_hn.bytes) || !r.at_end())
        return std::nullopt;
    return body;
}

Bytes VisaBody::encode() const {
    ByteWriter w;
    w.put_u64(pass_no);
    w.put_u64(visa_no);
    w.put_u64(expiry.ticks);
    put_data_map(w, data);
    w.put_field(BytesView(k_mu_fn.bytes));
    return w.take();
}

std::optional<VisaBody> VisaBody::decode(BytesView data) {
    ByteReader r(data);
    VisaBody body;
    if (!r.read_u64(body.pass_no) || !r.read_u64(body.visa_no) || !r.read_u64(body.expiry.ticks) ||
        !read_data_map(r, body.data) || !r.read_field(body.k_mu_fn.bytes) || !r.at_end())
        return std::nullopt;
    return body;
}

SealedPassport make_passport(ActorCrypto& crypto, const KeyPair& hn_keys,
                             const PassportBody& body) {
    return SealedPassport{seal_signed(crypto, hn_keys, body.encode())};
}

Result<PassportBody, TokenError> open_passport(ActorCrypto& crypto, const KeyPair& hn_keys,
                                               const SealedPassport& sp, Timestamp now) {
    return open_signed<PassportBody>(crypto, hn_keys, sp.ciphertext, now);
}

SealedVisa make_visa(ActorCrypto& crypto, const KeyPair& fn_keys, const VisaBody& body) {
    return SealedVisa{seal_signed(crypto, fn_keys, body.encode())};
}

Result<VisaBody, TokenError> open_visa(ActorCrypto& crypto, const KeyPair& fn_keys,
                                       const SealedVisa& sv, Timestamp now) {
    return open_signed<VisaBody>(crypto, fn_keys, sv.ciphertext, now);
}

Certificate issue_certificate(ActorCrypto& crypto, const KeyPair& ca_keys,
                              const std::string& subject_id, const Bytes& subject_public_key,
                              Role role, Timestamp expiry) {
    Certificate cert;
    cert.subject_id = subject_id;
    cert.subject_public_key = subject_public_key;
    cert.role = role;
    cert.expiry = expiry;
    cert.ca_signature = crypto.sign(ca_keys.private_key, cert.signed_preimage());
    return cert;
}

bool check_certificate(ActorCrypto& crypto, const Bytes& ca_public_key, const Certificate& cert,
                       Role required_role, Timestamp now) {
    if (cert.role != required_role) return false;
    if (cert.expiry < now) return false;
    return crypto.verify(ca_public_key, cert.signed_preimage(), cert.ca_signature);
}

} // namespace pvkit
