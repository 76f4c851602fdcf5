#include "pvkit/foreign_network.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pvkit/encode.hpp"

namespace pvkit {

ForeignNetwork::ForeignNetwork(std::string id, KeyPair keys, Certificate cert,
                               Bytes ca_public_key, const CryptoSuite& suite,
                               std::unique_ptr<Rng> rng, const Clock& clock, EventSink* events,
                               std::uint64_t freshness_window_ms, std::uint64_t visa_validity_ms)
    : id_(std::move(id)),
      keys_(std::move(keys)),
      cert_(std::move(cert)),
      ca_pk_(std::move(ca_public_key)),
      crypto_(suite, std::move(rng)),
      clock_(&clock),
      events_(events),
      window_(freshness_window_ms),
      visa_validity_(visa_validity_ms) {}

void ForeignNetwork::prune_pending(Timestamp now) {
    for (auto it = pending_.begin(); it != pending_.end();) {
        if (abs_delta(now, it->second.created) > window_)
            it = pending_.erase(it);
        else
            ++it;
    }
}

Result<ForwardToHN, Reject> ForeignNetwork::handle_visa_request(const VisaRequest& msg) {
    const Timestamp now = clock_->now();
    prune_pending(now);

    if (abs_delta(now, msg.t_mu) > window_) return Reject{RejectReason::Stale};

    if (!check_certificate(crypto_, ca_pk_, msg.cert_hn, Role::IdentityProvider, now))
        return Reject{RejectReason::BadCert};

    if (policy_ && !policy_(msg)) return Reject{RejectReason::PolicyDenied};

    if (revoked_passports_.contains(msg.pass_no)) return Reject{RejectReason::Revoked};

    known_hn_keys_[msg.cert_hn.subject_id] = msg.cert_hn.subject_public_key;

    Nonce r_fn = crypto_.make_nonce();
    pending_[r_fn.bytes] = Pending{msg.r2_mu, msg.t_mu, msg.pass_no, msg.cert_hn, now};
    if (events_) events_->nonce(id_, "r_fn", "acquire:" + id_, 0, r_fn);

    ForwardToHN out;
    out.passport = msg.passport;
    out.cipher_to_hn = msg.cipher_to_hn;
    out.t_mu = msg.t_mu;
    out.cert_fn = cert_;
    out.t_fn = now;
    out.sealed_r_fn = crypto_.seal_asym(msg.cert_hn.subject_public_key, BytesView{r_fn.bytes});
    return out;
}

Result<VisaGrant, Reject> ForeignNetwork::handle_hn_decision(const HNDecision& msg) {
    const Timestamp now = clock_->now();
    prune_pending(now);

    auto plain = crypto_.unseal_asym(keys_.private_key, BytesView{msg.for_fn});
    if (!plain) return Reject{RejectReason::BadSignature};
    auto verdict = ForFnPlain::decode(BytesView{*plain});
    if (!verdict) return Reject{RejectReason::BadSignature};

    auto pit = pending_.find(verdict->r_fn.bytes);
    if (pit == pending_.end()) return Reject{RejectReason::NoPending};
    const Pending pending = pit->second;

    if (!crypto_.verify(pending.cert_hn.subject_public_key, verdict->signed_preimage(),
                        verdict->sig))
        return Reject{RejectReason::BadSignature};
    if (verdict->pass_no != pending.pass_no_claimed) return Reject{RejectReason::NonceMismatch};
    if (!verdict->valid_mu) return Reject{RejectReason::InvalidUser};
    if (revoked_passports_.contains(verdict->pass_no)) return Reject{RejectReason::Revoked};

    SymmetricKey k_mu_fn = crypto_.fresh_key();
    Nonce r2_fn = crypto_.make_nonce();
    SymmetricKey sk_mu_fn =
        crypto_.kdf({u64_be(verdict->pass_no), to_bytes(id_), verdict->r_mu.bytes,
                     verdict->r_fn.bytes, pending.r2_mu.bytes, r2_fn.bytes});

    VisaBody body;
    body.pass_no = verdict->pass_no;
    body.visa_no = next_visa_no_++;
    body.expiry = Timestamp{now.ticks + visa_validity_};
    body.data = {
        {"visa-type", "service"},
        {"number-of-accesses", "unlimited"},
        {"duration", std::to_string(visa_validity_)},
        {"issuer-place", id_},
        {"issuer-id", id_},
        {"issuer-name", id_},
        {"issued-time", std::to_string(now.ticks)},
        {"service-type", "network-access"},
        {"service-name", "roaming"},
        {"times-of-access", "unbounded"},
    };
    body.k_mu_fn = k_mu_fn;

    SealedVisa visa = make_visa(crypto_, keys_, body);

    ledger_[body.visa_no] = VisaRecord{body.pass_no, body.visa_no, body.expiry, true, false};
    chain_keys_[body.visa_no] = sk_mu_fn;
    session_count_[body.visa_no] = 0;

    KeyDeliveryPlain delivery{k_mu_fn, body.visa_no, body.expiry};

    VisaGrant out;
    out.visa = visa;
    out.for_mu = msg.for_mu;
    out.key_delivery = crypto_.enc_sym(sk_mu_fn, BytesView{delivery.encode()});
    out.r2_fn = r2_fn;

    pending_.erase(verdict->r_fn.bytes);

    if (events_) {
        const std::string scope = "visa:" + std::to_string(body.visa_no);
        events_->key(id_, "k_mu_fn", scope, 0, k_mu_fn);
        events_->key(id_, "sk_mu_fn", scope, 0, sk_mu_fn);
        events_->nonce(id_, "r2_fn", scope, 0, r2_fn);
        events_->belief(id_, "fn_authenticated_mu", 0);
    }
    return out;
}

Result<ServiceResponse, Reject> ForeignNetwork::handle_service_request(const ServiceRequest& msg,
                                                                       BytesView service_bytes) {
    const Timestamp now = clock_->now();

    auto opened = open_visa(crypto_, keys_, msg.visa, now);
    if (!opened.ok()) {
        return Reject{opened.error() == TokenError::Expired ? RejectReason::Expired
                                                            : RejectReason::BadVisa};
    }
    const VisaBody& body = opened.value();

    auto row = ledger_.find(body.visa_no);
    if (row == ledger_.end() || row->second.pass_no != body.pass_no)
        return Reject{RejectReason::BadVisa};
    if (!row->second.valid) return Reject{RejectReason::Revoked};
    if (row->second.expiry < now) return Reject{RejectReason::Expired};

    const bool first_use = !row->second.first_use_seen;

    const SymmetricKey chain = chain_keys_.at(body.visa_no);
    SymmetricKey sk1 = crypto_.kdf({chain.bytes, u64_be(body.visa_no), u64_be(body.pass_no)});

    auto proof_plain = crypto_.dec_sym(sk1, BytesView{msg.cipher1});
    if (!proof_plain) return Reject{RejectReason::BadProof};
    auto proof = ServiceProofPlain::decode(BytesView{*proof_plain});
    if (!proof || proof->visa_no != body.visa_no) return Reject{RejectReason::BadProof};

    SymmetricKey sk2 = crypto_.kdf({sk1.bytes, body.k_mu_fn.bytes, proof->r_mu_prime.bytes});
    Nonce r_fn_prime = crypto_.make_nonce();
    SymmetricKey sk3 = crypto_.kdf({sk2.bytes, sk1.bytes, r_fn_prime.bytes});

    ServiceEchoPlain echo{r_fn_prime, body.pass_no};
    ServiceResponse out;
    out.cipher2 = crypto_.enc_sym(sk2, BytesView{echo.encode()});
    out.payload = crypto_.enc_sym(sk3, service_bytes);

    row->second.first_use_seen = true;
    chain_keys_[body.visa_no] = sk3;
    const std::uint64_t session = ++session_count_[body.visa_no];

    if (events_) {
        const std::string scope = "visa:" + std::to_string(body.visa_no);
        events_->key(id_, "sk1", scope, session, sk1);
        events_->key(id_, "sk2", scope, session, sk2);
        events_->key(id_, "sk3", scope, session, sk3);
        events_->nonce(id_, "r_fn_prime", scope, session, r_fn_prime);
        events_->belief(id_, first_use ? "visa_first_use" : "visa_reuse", session);
        events_->belief(id_, "fn_session_key_established", session);
    }
    return out;
}

ForeignNetwork::RevokeOutcome ForeignNetwork::handle_passport_revoke(const PassportRevoke& msg) {
    auto plain = crypto_.unseal_asym(keys_.private_key, BytesView{msg.sealed});
    if (!plain) return RevokeOutcome::Dropped;
    auto order = PassportRevokePlain::decode(BytesView{*plain});
    if (!order) return RevokeOutcome::Dropped;

    bool verified = false;
    for (const auto& [hn_id, hn_pk] : known_hn_keys_) {
        if (crypto_.verify(hn_pk, order->signed_preimage(), order->sig)) {
            verified = true;
            break;
        }
    }
    if (!verified) return RevokeOutcome::Dropped;

    revoked_passports_.insert(order->pass_no);

    bool any = false;
    for (auto& [visa_no, rec] : ledger_) {
        if (rec.pass_no != order->pass_no || !rec.valid) continue;
        rec.valid = false;
        chain_keys_.erase(visa_no);
        session_count_.erase(visa_no);
        any = true;
        if (events_) events_->belief(id_, "visa_invalidated:" + std::to_string(visa_no), 0);
    }
    if (events_) events_->belief(id_, "passport_blocked:" + std::to_string(order->pass_no), 0);
    return any ? RevokeOutcome::Applied : RevokeOutcome::RecordedOnly;
}

Result<std::uint64_t, Reject> ForeignNetwork::handle_visa_revoke(const VisaRevoke& msg) {
    for (const auto& [visa_no, chain] : chain_keys_) {
        auto outer_plain = crypto_.dec_sym(chain, BytesView{msg.outer});
        if (!outer_plain) continue;
        const std::uint64_t matched = visa_no;

        auto outer = VisaRevokePlain::decode(BytesView{*outer_plain}, true);
        if (!outer || outer->visa_no != matched) return Reject{RejectReason::BadRevoke};

        auto row = ledger_.find(matched);
        if (row == ledger_.end() || row->second.pass_no != outer->pass_no)
            return Reject{RejectReason::BadRevoke};

        SymmetricKey sk1 =
            crypto_.kdf({chain.bytes, u64_be(outer->visa_no), u64_be(outer->pass_no)});
        auto inner_plain = crypto_.dec_sym(sk1, BytesView{outer->inner});
        if (!inner_plain) return Reject{RejectReason::BadRevoke};
        auto inner = VisaRevokePlain::decode(BytesView{*inner_plain}, false);
        if (!inner || inner->pass_no != outer->pass_no || inner->visa_no != outer->visa_no)
            return Reject{RejectReason::BadRevoke};

        row->second.valid = false;
        chain_keys_.erase(matched);
        session_count_.erase(matched);
        if (events_) events_->belief(id_, "visa_revoked:" + std::to_string(matched), 0);
        return matched;
    }
    return Reject{RejectReason::BadRevoke};
}

std::string ForeignNetwork::ledger_text() const {
    std::ostringstream out;
    for (const auto& [visa_no, rec] : ledger_) {
        out << rec.pass_no << '\t' << rec.visa_no << '\t' << rec.expiry.ticks << '\t'
            << (rec.valid ? "TRUE" : "FALSE") << '\n';
    }
    return out.str();
}

void ForeignNetwork::save_ledger(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << ledger_text();
    if (!out) throw IoError("write failed: " + path);
}

void ForeignNetwork::load_ledger(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);

    std::map<std::uint64_t, VisaRecord> loaded;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        VisaRecord rec;
        std::string valid;
        if (!(fields >> rec.pass_no >> rec.visa_no >> rec.expiry.ticks >> valid) ||
            (valid != "TRUE" && valid != "FALSE")) {
            throw IoError("malformed ledger line " + std::to_string(line_no) + " in " + path);
        }
        rec.valid = valid == "TRUE";
        loaded[rec.visa_no] = rec;
    }
    ledger_ = std::move(loaded);
}

std::optional<SymmetricKey> ForeignNetwork::chain_key(std::uint64_t visa_no) const {
    auto it = chain_keys_.find(visa_no);
    if (it == chain_keys_.end()) return std::nullopt;
    return it->second;
}

void ForeignNetwork::audit_state() const {
    for (const auto& [visa_no, key] : chain_keys_) {
        auto row = ledger_.find(visa_no);
        if (row == ledger_.end() || !row->second.valid)
            throw std::logic_error("chain key without valid ledger row: " +
                                   std::to_string(visa_no));
    }
    for (const auto& [visa_no, rec] : ledger_) {
        if (rec.valid && !chain_keys_.contains(visa_no))
            throw std::logic_error("valid ledger row without chain key: " +
                                   std::to_string(visa_no));
    }
}

} // namespace pvkit
