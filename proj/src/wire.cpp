#include "pvkit/wire.hpp"

#include <sstream>

#include "pvkit/encode.hpp"

namespace pvkit {
namespace {

constexpr std::uint8_t kTagVisaRequest = 0x01;
constexpr std::uint8_t kTagForwardToHN = 0x02;
constexpr std::uint8_t kTagHNDecision = 0x03;
constexpr std::uint8_t kTagVisaGrant = 0x04;
constexpr std::uint8_t kTagServiceRequest = 0x05;
constexpr std::uint8_t kTagServiceResponse = 0x06;
constexpr std::uint8_t kTagPassportRevoke = 0x07;
constexpr std::uint8_t kTagVisaRevoke = 0x08;
constexpr std::uint8_t kTagReject = 0x09;

void put_u64_field(ByteWriter& w, std::uint64_t v) {
    ByteWriter inner;
    inner.put_u64(v);
    w.put_field(inner.bytes());
}

void put_time_field(ByteWriter& w, Timestamp t) { put_u64_field(w, t.ticks); }

void put_nonce_field(ByteWriter& w, const Nonce& n) { w.put_field(BytesView{n.bytes}); }

void put_bool_field(ByteWriter& w, bool b) {
    Bytes one{static_cast<std::uint8_t>(b ? 1 : 0)};
    w.put_field(BytesView{one});
}

void put_key_field(ByteWriter& w, const SymmetricKey& k) { w.put_field(BytesView{k.bytes}); }

bool read_u64_field(ByteReader& r, std::uint64_t& out) {
    Bytes f;
    if (!r.read_field(f) || f.size() != 8) return false;
    ByteReader inner{BytesView{f}};
    return inner.read_u64(out);
}

bool read_time_field(ByteReader& r, Timestamp& out) { return read_u64_field(r, out.ticks); }

bool read_nonce_field(ByteReader& r, Nonce& out) {
    Bytes f;
    if (!r.read_field(f) || f.size() != kNonceLen) return false;
    out.bytes = std::move(f);
    return true;
}

bool read_bool_field(ByteReader& r, bool& out) {
    Bytes f;
    if (!r.read_field(f) || f.size() != 1 || f[0] > 1) return false;
    out = f[0] == 1;
    return true;
}

bool read_key_field(ByteReader& r, SymmetricKey& out) {
    Bytes f;
    if (!r.read_field(f) || f.size() != kDigestLen) return false;
    out.bytes = std::move(f);
    return true;
}

bool read_string_field(ByteReader& r, std::string& out) {
    Bytes f;
    if (!r.read_field(f)) return false;
    out = to_string(BytesView{f});
    return true;
}

bool read_cert_field(ByteReader& r, Certificate& out) {
    Bytes f;
    if (!r.read_field(f)) return false;
    auto cert = Certificate::decode(BytesView{f});
    if (!cert) return false;
    out = std::move(*cert);
    return true;
}

struct Encoder {
    ByteWriter w;

    Bytes operator()(const VisaRequest& m) {
        w.put_u8(kTagVisaRequest);
        w.put_field(BytesView{m.passport.ciphertext});
        w.put_field(BytesView{m.cipher_to_hn});
        put_u64_field(w, m.pass_no);
        put_time_field(w, m.t_mu);
        w.put_field(BytesView{m.cert_hn.encode()});
        w.put_field(m.descriptor);
        put_nonce_field(w, m.r2_mu);
        return w.take();
    }

    Bytes operator()(const ForwardToHN& m) {
        w.put_u8(kTagForwardToHN);
        w.put_field(BytesView{m.passport.ciphertext});
        w.put_field(BytesView{m.cipher_to_hn});
        put_time_field(w, m.t_mu);
        w.put_field(BytesView{m.cert_fn.encode()});
        put_time_field(w, m.t_fn);
        w.put_field(BytesView{m.sealed_r_fn});
        return w.take();
    }

    Bytes operator()(const HNDecision& m) {
        w.put_u8(kTagHNDecision);
        w.put_field(BytesView{m.for_fn});
        w.put_field(BytesView{m.for_mu});
        return w.take();
    }

    Bytes operator()(const VisaGrant& m) {
        w.put_u8(kTagVisaGrant);
        w.put_field(BytesView{m.visa.ciphertext});
        w.put_field(BytesView{m.for_mu});
        w.put_field(BytesView{m.key_delivery});
        put_nonce_field(w, m.r2_fn);
        return w.take();
    }

    Bytes operator()(const ServiceRequest& m) {
        w.put_u8(kTagServiceRequest);
        w.put_field(m.descriptor);
        w.put_field(BytesView{m.visa.ciphertext});
        w.put_field(BytesView{m.cipher1});
        return w.take();
    }

    Bytes operator()(const ServiceResponse& m) {
        w.put_u8(kTagServiceResponse);
        w.put_field(BytesView{m.cipher2});
        w.put_field(BytesView{m.payload});
        return w.take();
    }

    Bytes operator()(const PassportRevoke& m) {
        w.put_u8(kTagPassportRevoke);
        w.put_field(BytesView{m.sealed});
        return w.take();
    }

    Bytes operator()(const VisaRevoke& m) {
        w.put_u8(kTagVisaRevoke);
        w.put_field(BytesView{m.outer});
        return w.take();
    }

    Bytes operator()(const Reject& m) {
        w.put_u8(kTagReject);
        Bytes one{static_cast<std::uint8_t>(m.reason)};
        w.put_field(BytesView{one});
        return w.take();
    }
};

std::optional<ProtocolMessage> decode_visa_request(ByteReader& r) {
    VisaRequest m;
    Bytes pass, cipher;
    if (!r.read_field(pass)) return std::nullopt;
    if (!r.read_field(cipher)) return std::nullopt;
    m.passport.ciphertext = std::move(pass);
    m.cipher_to_hn = std::move(cipher);
    if (!read_u64_field(r, m.pass_no)) return std::nullopt;
    if (!read_time_field(r, m.t_mu)) return std::nullopt;
    if (!read_cert_field(r, m.cert_hn)) return std::nullopt;
    if (!read_string_field(r, m.descriptor)) return std::nullopt;
    if (!read_nonce_field(r, m.r2_mu)) return std::nullopt;
    return ProtocolMessage{std::move(m)};
}

std::optional<ProtocolMessage> decode_forward(ByteReader& r) {
    ForwardToHN m;
    Bytes pass, cipher, sealed;
    if (!r.read_field(pass)) return std::nullopt;
    if (!r.read_field(cipher)) return std::nullopt;
    m.passport.ciphertext = std::move(pass);
    m.cipher_to_hn = std::move(cipher);
    if (!read_time_field(r, m.t_mu)) return std::nullopt;
    if (!read_cert_field(r, m.cert_fn)) return std::nullopt;
    if (!read_time_field(r, m.t_fn)) return std::nullopt;
    if (!r.read_field(sealed)) return std::nullopt;
    m.sealed_r_fn = std::move(sealed);
    return ProtocolMessage{std::move(m)};
}

std::optional<ProtocolMessage> decode_decision(ByteReader& r) {
    HNDecision m;
    if (!r.read_field(m.for_fn)) return std::nullopt;
    if (!r.read_field(m.for_mu)) return std::nullopt;
    return ProtocolMessage{std::move(m)};
}

std::optional<ProtocolMessage> decode_grant(ByteReader& r) {
    VisaGrant m;
    Bytes visa;
    if (!r.read_field(visa)) return std::nullopt;
    m.visa.ciphertext = std::move(visa);
    if (!r.read_field(m.for_mu)) return std::nullopt;
    if (!r.read_field(m.key_delivery)) return std::nullopt;
    if (!read_nonce_field(r, m.r2_fn)) return std::nullopt;
    return ProtocolMessage{std::move(m)};
}

std::optional<ProtocolMessage> decode_service_request(ByteReader& r) {
    ServiceRequest m;
    Bytes visa;
    if (!read_string_field(r, m.descriptor)) return std::nullopt;
    if (!r.read_field(visa)) return std::nullopt;
    m.visa.ciphertext = std::move(visa);
    if (!r.read_field(m.cipher1)) return std::nullopt;
    return ProtocolMessage{std::move(m)};
}

std::optional<ProtocolMessage> decode_service_response(ByteReader& r) {
    ServiceResponse m;
    if (!r.read_field(m.cipher2)) return std::nullopt;
    if (!r.read_field(m.payload)) return std::nullopt;
    return ProtocolMessage{std::move(m)};
}

std::optional<ProtocolMessage> decode_passport_revoke(ByteReader& r) {
    PassportRevoke m;
    if (!r.read_field(m.sealed)) return std::nullopt;
    return ProtocolMessage{std::move(m)};
}

std::optional<ProtocolMessage> decode_visa_revoke(ByteReader& r) {
    VisaRevoke m;
    if (!r.read_field(m.outer)) return std::nullopt;
    return ProtocolMessage{std::move(m)};
}

std::optional<ProtocolMessage> decode_reject(ByteReader& r) {
    Bytes f;
    if (!r.read_field(f) || f.size() != 1) return std::nullopt;
    auto code = f[0];
    if (code < static_cast<std::uint8_t>(RejectReason::Stale) ||
        code > static_cast<std::uint8_t>(RejectReason::Malformed)) {
        return std::nullopt;
    }
    return ProtocolMessage{Reject{static_cast<RejectReason>(code)}};
}

} // namespace

const char* to_string(RejectReason reason) {
    switch (reason) {
    case RejectReason::Stale: return "stale";
    case RejectReason::BadCert: return "bad_cert";
    case RejectReason::BadPassport: return "bad_passport";
    case RejectReason::IdMismatch: return "id_mismatch";
    case RejectReason::PolicyDenied: return "policy_denied";
    case RejectReason::BadSignature: return "bad_signature";
    case RejectReason::NonceMismatch: return "nonce_mismatch";
    case RejectReason::InvalidUser: return "invalid_user";
    case RejectReason::BadVisa: return "bad_visa";
    case RejectReason::Revoked: return "revoked";
    case RejectReason::Expired: return "expired";
    case RejectReason::BadProof: return "bad_proof";
    case RejectReason::BadRevoke: return "bad_revoke";
    case RejectReason::InvalidFn: return "invalid_fn";
    case RejectReason::BadKeyDelivery: return "bad_key_delivery";
    case RejectReason::BadResponse: return "bad_response";
    case RejectReason::PassMismatch: return "pass_mismatch";
    case RejectReason::NoPending: return "no_pending";
    case RejectReason::Malformed: return "malformed";
    }
    return "unknown";
}

Bytes encode(const ProtocolMessage& msg) { return std::visit(Encoder{}, msg); }

std::optional<ProtocolMessage> decode(BytesView data) {
    ByteReader r{data};
    std::uint8_t tag = 0;
    if (!r.read_u8(tag)) return std::nullopt;

    std::optional<ProtocolMessage> msg;
    switch (tag) {
    case kTagVisaRequest: msg = decode_visa_request(r); break;
    case kTagForwardToHN: msg = decode_forward(r); break;
    case kTagHNDecision: msg = decode_decision(r); break;
    case kTagVisaGrant: msg = decode_grant(r); break;
    case kTagServiceRequest: msg = decode_service_request(r); break;
    case kTagServiceResponse: msg = decode_service_response(r); break;
    case kTagPassportRevoke: msg = decode_passport_revoke(r); break;
    case kTagVisaRevoke: msg = decode_visa_revoke(r); break;
    case kTagReject: msg = decode_reject(r); break;
    default: return std::nullopt;
    }
    if (!msg || !r.at_end()) return std::nullopt;
    return msg;
}

const char* variant_name(const ProtocolMessage& msg) {
    struct Namer {
        const char* operator()(const VisaRequest&) { return "VisaRequest"; }
        const char* operator()(const ForwardToHN&) { return "ForwardToHN"; }
        const char* operator()(const HNDecision&) { return "HNDecision"; }
        const char* operator()(const VisaGrant&) { return "VisaGrant"; }
        const char* operator()(const ServiceRequest&) { return "ServiceRequest"; }
        const char* operator()(const ServiceResponse&) { return "ServiceResponse"; }
        const char* operator()(const PassportRevoke&) { return "PassportRevoke"; }
        const char* operator()(const VisaRevoke&) { return "VisaRevoke"; }
        const char* operator()(const Reject&) { return "Reject"; }
    };
    return std::visit(Namer{}, msg);
}

std::string describe(const ProtocolMessage& msg) {
    struct Describer {
        std::ostringstream out;

        std::string operator()(const VisaRequest& m) {
            out << "VisaRequest{pass_no=" << m.pass_no << " t_mu=" << m.t_mu.ticks
                << " cert_hn=" << m.cert_hn.subject_id << " descriptor=\"" << m.descriptor
                << "\" passport=" << m.passport.ciphertext.size() << "B cipher_to_hn="
                << m.cipher_to_hn.size() << "B r2_mu=" << to_hex(BytesView{m.r2_mu.bytes}) << "}";
            return out.str();
        }
        std::string operator()(const ForwardToHN& m) {
            out << "ForwardToHN{t_mu=" << m.t_mu.ticks << " t_fn=" << m.t_fn.ticks
                << " cert_fn=" << m.cert_fn.subject_id << " passport="
                << m.passport.ciphertext.size() << "B cipher_to_hn=" << m.cipher_to_hn.size()
                << "B sealed_r_fn=" << m.sealed_r_fn.size() << "B}";
            return out.str();
        }
        std::string operator()(const HNDecision& m) {
            out << "HNDecision{for_fn=" << m.for_fn.size() << "B for_mu=" << m.for_mu.size()
                << "B}";
            return out.str();
        }
        std::string operator()(const VisaGrant& m) {
            out << "VisaGrant{visa=" << m.visa.ciphertext.size() << "B for_mu=" << m.for_mu.size()
                << "B key_delivery=" << m.key_delivery.size()
                << "B r2_fn=" << to_hex(BytesView{m.r2_fn.bytes}) << "}";
            return out.str();
        }
        std::string operator()(const ServiceRequest& m) {
            out << "ServiceRequest{descriptor=\"" << m.descriptor
                << "\" visa=" << m.visa.ciphertext.size() << "B cipher1=" << m.cipher1.size()
                << "B}";
            return out.str();
        }
        std::string operator()(const ServiceResponse& m) {
            out << "ServiceResponse{cipher2=" << m.cipher2.size()
                << "B payload=" << m.payload.size() << "B}";
            return out.str();
        }
        std::string operator()(const PassportRevoke& m) {
            out << "PassportRevoke{sealed=" << m.sealed.size() << "B}";
            return out.str();
        }
        std::string operator()(const VisaRevoke& m) {
            out << "VisaRevoke{outer=" << m.outer.size() << "B}";
            return out.str();
        }
        std::string operator()(const Reject& m) {
            out << "Reject{" << to_string(m.reason) << "}";
            return out.str();
        }
    };
    return std::visit(Describer{}, msg);
}

// ---------------------------------------------------------------------------
// Encrypted payload layouts.

Bytes CipherToHnPlain::encode() const {
    ByteWriter w;
    w.put_field(id_fn);
    put_nonce_field(w, r_mu);
    put_time_field(w, t_mu);
    return w.take();
}

std::optional<CipherToHnPlain> CipherToHnPlain::decode(BytesView data) {
    ByteReader r{data};
    CipherToHnPlain p;
    if (!read_string_field(r, p.id_fn)) return std::nullopt;
    if (!read_nonce_field(r, p.r_mu)) return std::nullopt;
    if (!read_time_field(r, p.t_mu)) return std::nullopt;
    if (!r.at_end()) return std::nullopt;
    return p;
}

Bytes ForFnPlain::signed_preimage() const {
    ByteWriter w;
    put_u64_field(w, pass_no);
    put_bool_field(w, valid_mu);
    put_nonce_field(w, r_mu);
    put_nonce_field(w, r_fn);
    return w.take();
}

Bytes ForFnPlain::encode() const {
    ByteWriter w;
    w.put_raw(BytesView{signed_preimage()});
    w.put_field(BytesView{sig});
    return w.take();
}

std::optional<ForFnPlain> ForFnPlain::decode(BytesView data) {
    ByteReader r{data};
    ForFnPlain p;
    if (!read_u64_field(r, p.pass_no)) return std::nullopt;
    if (!read_bool_field(r, p.valid_mu)) return std::nullopt;
    if (!read_nonce_field(r, p.r_mu)) return std::nullopt;
    if (!read_nonce_field(r, p.r_fn)) return std::nullopt;
    if (!r.read_field(p.sig)) return std::nullopt;
    if (!r.at_end()) return std::nullopt;
    return p;
}

Bytes ForMuPlain::encode() const {
    ByteWriter w;
    w.put_field(id_fn);
    put_bool_field(w, valid_fn);
    put_nonce_field(w, r_fn);
    put_nonce_field(w, r_mu);
    put_time_field(w, t_hn);
    return w.take();
}

std::optional<ForMuPlain> ForMuPlain::decode(BytesView data) {
    ByteReader r{data};
    ForMuPlain p;
    if (!read_string_field(r, p.id_fn)) return std::nullopt;
    if (!read_bool_field(r, p.valid_fn)) return std::nullopt;
    if (!read_nonce_field(r, p.r_fn)) return std::nullopt;
    if (!read_nonce_field(r, p.r_mu)) return std::nullopt;
    if (!read_time_field(r, p.t_hn)) return std::nullopt;
    if (!r.at_end()) return std::nullopt;
    return p;
}

Bytes KeyDeliveryPlain::encode() const {
    ByteWriter w;
    put_key_field(w, k_mu_fn);
    put_u64_field(w, visa_no);
    put_time_field(w, expiry);
    return w.take();
}

std::optional<KeyDeliveryPlain> KeyDeliveryPlain::decode(BytesView data) {
    ByteReader r{data};
    KeyDeliveryPlain p;
    if (!read_key_field(r, p.k_mu_fn)) return std::nullopt;
    if (!read_u64_field(r, p.visa_no)) return std::nullopt;
    if (!read_time_field(r, p.expiry)) return std::nullopt;
    if (!r.at_end()) return std::nullopt;
    return p;
}

Bytes ServiceProofPlain::encode() const {
    ByteWriter w;
    put_nonce_field(w, r_mu_prime);
    put_u64_field(w, visa_no);
    return w.take();
}

std::optional<ServiceProofPlain> ServiceProofPlain::decode(BytesView data) {
    ByteReader r{data};
    ServiceProofPlain p;
    if (!read_nonce_field(r, p.r_mu_prime)) return std::nullopt;
    if (!read_u64_field(r, p.visa_no)) return std::nullopt;
    if (!r.at_end()) return std::nullopt;
    return p;
}

Bytes ServiceEchoPlain::encode() const {
    ByteWriter w;
    put_nonce_field(w, r_fn_prime);
    put_u64_field(w, pass_no);
    return w.take();
}

std::optional<ServiceEchoPlain> ServiceEchoPlain::decode(BytesView data) {
    ByteReader r{data};
    ServiceEchoPlain p;
    if (!read_nonce_field(r, p.r_fn_prime)) return std::nullopt;
    if (!read_u64_field(r, p.pass_no)) return std::nullopt;
    if (!r.at_end()) return std::nullopt;
    return p;
}

Bytes PassportRevokePlain::signed_preimage() const {
    ByteWriter w;
    put_u64_field(w, pass_no);
    w.put_field(kRevokeLiteral);
    return w.take();
}

Bytes PassportRevokePlain::encode() const {
    ByteWriter w;
    w.put_raw(BytesView{signed_preimage()});
    w.put_field(BytesView{sig});
    return w.take();
}

std::optional<PassportRevokePlain> PassportRevokePlain::decode(BytesView data) {
    ByteReader r{data};
    PassportRevokePlain p;
    if (!read_u64_field(r, p.pass_no)) return std::nullopt;
    std::string literal;
    if (!read_string_field(r, literal) || literal != kRevokeLiteral) return std::nullopt;
    if (!r.read_field(p.sig)) return std::nullopt;
    if (!r.at_end()) return std::nullopt;
    return p;
}

Bytes VisaRevokePlain::encode(bool with_inner) const {
    ByteWriter w;
    put_u64_field(w, pass_no);
    put_u64_field(w, visa_no);
    w.put_field(kRevokeLiteral);
    if (with_inner) w.put_field(BytesView{inner});
    return w.take();
}

std::optional<VisaRevokePlain> VisaRevokePlain::decode(BytesView data, bool with_inner) {
    ByteReader r{data};
    VisaRevokePlain p;
    if (!read_u64_field(r, p.pass_no)) return std::nullopt;
    if (!read_u64_field(r, p.visa_no)) return std::nullopt;
    std::string literal;
    if (!read_string_field(r, literal) || literal != kRevokeLiteral) return std::nullopt;
    if (with_inner && !r.read_field(p.inner)) return std::nullopt;
    if (!r.at_end()) return std::nullopt;
    return p;
}

} // namespace pvkit
