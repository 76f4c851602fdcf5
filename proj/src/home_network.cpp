#include "pvkit/home_network.hpp"

#include <stdexcept>

#include "pvkit/encode.hpp"

namespace pvkit {

HomeNetwork::HomeNetwork(std::string id, KeyPair keys, Certificate cert, Bytes ca_public_key,
                         const CryptoSuite& suite, std::unique_ptr<Rng> rng, const Clock& clock,
                         EventSink* events, std::uint64_t freshness_window_ms)
    : id_(std::move(id)),
      keys_(std::move(keys)),
      cert_(std::move(cert)),
      ca_pk_(std::move(ca_public_key)),
      crypto_(suite, std::move(rng)),
      clock_(&clock),
      events_(events),
      window_(freshness_window_ms) {}

HomeNetwork::Provisioning HomeNetwork::register_mobile_user(const std::string& id_mu,
                                                            BytesView sc_id, BytesView biometric,
                                                            std::uint64_t validity_ms) {
    if (id_mu.empty()) throw std::invalid_argument("id_mu must be non-empty");
    if (validity_ms == 0) throw std::invalid_argument("validity must be positive");

    Bytes sc(sc_id.begin(), sc_id.end());
    for (const auto& [no, rec] : issued_) {
        if (rec.id_mu == id_mu && rec.sc_id == sc)
            throw DuplicateRegistration("already registered: " + id_mu);
    }

    SymmetricKey k_mu_hn = crypto_.kdf({sc, Bytes(biometric.begin(), biometric.end())});
    const Timestamp now = clock_->now();

    PassportBody body;
    body.id_mu = id_mu;
    body.pass_no = next_pass_no_++;
    body.expiry = Timestamp{now.ticks + validity_ms};
    body.data = {
        {"passport-type", "roaming"},
        {"mu-type", "subscriber"},
        {"mu-name", id_mu},
        {"date-of-birth", "unspecified"},
        {"date-of-issue", std::to_string(now.ticks)},
        {"place-of-issue", id_},
        {"issuer-id", id_},
        {"issuer-name", id_},
    };
    body.k_mu_hn = k_mu_hn;

    issued_.emplace(body.pass_no, PassportRecord{id_mu, std::move(sc), k_mu_hn, body.expiry, false});
    if (events_) events_->belief(id_, "registered:" + id_mu, 0);

    return {make_passport(crypto_, keys_, body), k_mu_hn, body.pass_no, cert_};
}

Result<HNDecision, Reject> HomeNetwork::handle_forward(const ForwardToHN& msg) {
    const Timestamp now = clock_->now();

    if (abs_delta(now, msg.t_mu) > window_ || abs_delta(now, msg.t_fn) > window_)
        return Reject{RejectReason::Stale};

    if (!check_certificate(crypto_, ca_pk_, msg.cert_fn, Role::NetworkProvider, now))
        return Reject{RejectReason::BadCert};

    auto opened = open_passport(crypto_, keys_, msg.passport, now);
    if (!opened.ok()) return Reject{RejectReason::BadPassport};
    const PassportBody& body = opened.value();

    auto rec = issued_.find(body.pass_no);
    if (rec == issued_.end() || rec->second.revoked || rec->second.id_mu != body.id_mu)
        return Reject{RejectReason::BadPassport};

    const std::string& id_fn = msg.cert_fn.subject_id;
    SymmetricKey sk_mu_hn =
        crypto_.kdf({body.k_mu_hn.bytes, to_bytes(body.id_mu), to_bytes(id_fn)});

    // The key itself carries the id binding: a ciphertext produced for a
    // different id_FN cannot decrypt here.
    auto plain = crypto_.dec_sym(sk_mu_hn, BytesView{msg.cipher_to_hn});
    if (!plain) return Reject{RejectReason::IdMismatch};
    auto inner = CipherToHnPlain::decode(BytesView{*plain});
    if (!inner || inner->id_fn != id_fn) return Reject{RejectReason::IdMismatch};
    if (inner->t_mu != msg.t_mu) return Reject{RejectReason::Stale};

    auto r_fn_plain = crypto_.unseal_asym(keys_.private_key, BytesView{msg.sealed_r_fn});
    if (!r_fn_plain || r_fn_plain->size() != kNonceLen) return Reject{RejectReason::Malformed};
    Nonce r_fn{std::move(*r_fn_plain)};

    ForFnPlain for_fn;
    for_fn.pass_no = body.pass_no;
    for_fn.valid_mu = true;
    for_fn.r_mu = inner->r_mu;
    for_fn.r_fn = r_fn;
    for_fn.sig = crypto_.sign(keys_.private_key, for_fn.signed_preimage());

    ForMuPlain for_mu;
    for_mu.id_fn = id_fn;
    for_mu.valid_fn = true;
    for_mu.r_fn = r_fn;
    for_mu.r_mu = inner->r_mu;
    for_mu.t_hn = now;

    HNDecision out;
    out.for_fn = crypto_.seal_asym(msg.cert_fn.subject_public_key, BytesView{for_fn.encode()});
    out.for_mu = crypto_.enc_sym(sk_mu_hn, BytesView{for_mu.encode()});

    if (events_) {
        events_->key(id_, "sk_mu_hn", "acquire:" + id_fn, 0, sk_mu_hn);
        events_->belief(id_, "hn_authenticated_mu", 0);
        events_->belief(id_, "hn_authenticated_fn", 0);
    }
    return out;
}

std::vector<std::pair<std::string, PassportRevoke>> HomeNetwork::revoke_passport(
    std::uint64_t pass_no, const std::vector<std::pair<std::string, Bytes>>& known_fns) {
    auto rec = issued_.find(pass_no);
    if (rec == issued_.end()) throw UnknownPassport("pass_no " + std::to_string(pass_no));
    rec->second.revoked = true;

    PassportRevokePlain plain;
    plain.pass_no = pass_no;
    plain.sig = crypto_.sign(keys_.private_key, plain.signed_preimage());
    const Bytes encoded = plain.encode();

    std::vector<std::pair<std::string, PassportRevoke>> out;
    out.reserve(known_fns.size());
    for (const auto& [fn_id, fn_pk] : known_fns)
        out.emplace_back(fn_id, PassportRevoke{crypto_.seal_asym(fn_pk, BytesView{encoded})});

    if (events_) events_->belief(id_, "passport_revoked:" + std::to_string(pass_no), 0);
    return out;
}

bool HomeNetwork::passport_revoked(std::uint64_t pass_no) const {
    auto rec = issued_.find(pass_no);
    return rec != issued_.end() && rec->second.revoked;
}

std::optional<std::uint64_t> HomeNetwork::pass_no_of(const std::string& id_mu) const {
    for (const auto& [no, rec] : issued_)
        if (rec.id_mu == id_mu) return no;
    return std::nullopt;
}

} // namespace pvkit
