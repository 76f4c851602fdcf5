#include "pvkit/mobile_user.hpp"

#include <fstream>

#include "pvkit/encode.hpp"

namespace pvkit {

Bytes SmartCard::encode() const {
    ByteWriter w;
    w.put_field(BytesView{sc_id});
    w.put_field(BytesView{k_mu_hn.bytes});
    w.put_field(BytesView{passport.ciphertext});
    w.put_u64(pass_no);
    w.put_field(BytesView{cert_hn.encode()});
    return w.take();
}

std::optional<SmartCard> SmartCard::decode(BytesView data) {
    ByteReader r(data);
    SmartCard card;
    Bytes cert_bytes;
    if (!r.read_field(card.sc_id) || !r.read_field(card.k_mu_hn.bytes) ||
        !r.read_field(card.passport.ciphertext) || !r.read_u64(card.pass_no) ||
        !r.read_field(cert_bytes) || !r.at_end())
        return std::nullopt;
    auto cert = Certificate::decode(BytesView{cert_bytes});
    if (!cert) return std::nullopt;
    card.cert_hn = std::move(*cert);
    return card;
}

void save_smart_card(const std::string& path, const SmartCard& card) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    const Bytes data = card.encode();
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed: " + path);
}

SmartCard load_smart_card(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto card = SmartCard::decode(BytesView{data});
    if (!card) throw IoError("malformed smart-card file: " + path);
    return *card;
}

MobileUser::MobileUser(std::string id, const CryptoSuite& suite, std::unique_ptr<Rng> rng,
                       const Clock& clock, EventSink* events, std::uint64_t freshness_window_ms)
    : id_(std::move(id)),
      crypto_(suite, std::move(rng)),
      clock_(&clock),
      events_(events),
      window_(freshness_window_ms) {}

void MobileUser::provision(SmartCard card) { card_ = std::move(card); }

const SmartCard& MobileUser::smart_card() const {
    if (!card_) throw NotProvisioned("no smart card: " + id_);
    return *card_;
}

VisaRequest MobileUser::begin_visa_acquisition(const std::string& id_fn,
                                               const std::string& descriptor) {
    if (!card_) throw NotProvisioned("no smart card: " + id_);

    SymmetricKey sk_mu_hn = crypto_.kdf({card_->k_mu_hn.bytes, to_bytes(id_), to_bytes(id_fn)});
    Nonce r_mu = crypto_.make_nonce();
    Nonce r2_mu = crypto_.make_nonce();
    const Timestamp t_mu = clock_->now();

    CipherToHnPlain inner{id_fn, r_mu, t_mu};

    VisaRequest out;
    out.passport = card_->passport;
    out.cipher_to_hn = crypto_.enc_sym(sk_mu_hn, BytesView{inner.encode()});
    out.pass_no = card_->pass_no;
    out.t_mu = t_mu;
    out.cert_hn = card_->cert_hn;
    out.descriptor = descriptor;
    out.r2_mu = r2_mu;

    in_flight_[id_fn] = InFlightAcquisition{r_mu, r2_mu, sk_mu_hn};

    if (events_) {
        const std::string scope = "acquire:" + id_fn;
        events_->key(id_, "sk_mu_hn", scope, 0, sk_mu_hn);
        events_->nonce(id_, "r_mu", scope, 0, r_mu);
        events_->nonce(id_, "r2_mu", scope, 0, r2_mu);
    }
    return out;
}

Result<std::uint64_t, Reject> MobileUser::complete_visa_acquisition(const std::string& id_fn,
                                                                    const VisaGrant& msg) {
    if (!card_) throw NotProvisioned("no smart card: " + id_);

    auto flight = in_flight_.find(id_fn);
    if (flight == in_flight_.end()) return Reject{RejectReason::NoPending};
    const InFlightAcquisition fl = flight->second;
    const Timestamp now = clock_->now();

    auto plain = crypto_.dec_sym(fl.sk_mu_hn, BytesView{msg.for_mu});
    if (!plain) return Reject{RejectReason::IdMismatch};
    auto verdict = ForMuPlain::decode(BytesView{*plain});
    if (!verdict || verdict->id_fn != id_fn) return Reject{RejectReason::IdMismatch};
    if (verdict->r_mu != fl.r_mu) return Reject{RejectReason::NonceMismatch};
    if (abs_delta(now, verdict->t_hn) > window_) return Reject{RejectReason::Stale};
    if (!verdict->valid_fn) return Reject{RejectReason::InvalidFn};

    SymmetricKey sk_mu_fn =
        crypto_.kdf({u64_be(card_->pass_no), to_bytes(id_fn), fl.r_mu.bytes, verdict->r_fn.bytes,
                     fl.r2_mu.bytes, msg.r2_fn.bytes});

    auto delivery_plain = crypto_.dec_sym(sk_mu_fn, BytesView{msg.key_delivery});
    if (!delivery_plain) return Reject{RejectReason::BadKeyDelivery};
    auto delivery = KeyDeliveryPlain::decode(BytesView{*delivery_plain});
    if (!delivery) return Reject{RejectReason::BadKeyDelivery};

    visas_[delivery->visa_no] = VisaHolding{msg.visa,           id_fn,
                                            delivery->k_mu_fn,  sk_mu_fn,
                                            card_->pass_no,     delivery->visa_no,
                                            delivery->expiry,   0};
    in_flight_.erase(flight);

    if (events_) {
        const std::string scope = "visa:" + std::to_string(delivery->visa_no);
        events_->key(id_, "sk_mu_fn", scope, 0, sk_mu_fn);
        events_->key(id_, "k_mu_fn", scope, 0, delivery->k_mu_fn);
        events_->belief(id_, "mu_authenticated_hn", 0);
        events_->belief(id_, "mu_authenticated_fn", 0);
    }
    return delivery->visa_no;
}

ServiceRequest MobileUser::begin_service(std::uint64_t visa_no, const std::string& descriptor) {
    auto it = visas_.find(visa_no);
    if (it == visas_.end()) throw UnknownVisa("visa " + std::to_string(visa_no));
    VisaHolding& holding = it->second;
    if (holding.expiry < clock_->now())
        throw LocallyExpired("visa " + std::to_string(visa_no) + " expired");

    SymmetricKey sk1 =
        crypto_.kdf({holding.chain_key.bytes, u64_be(holding.visa_no), u64_be(holding.pass_no)});
    Nonce r_mu_prime = crypto_.make_nonce();
    ServiceProofPlain proof{r_mu_prime, holding.visa_no};

    ServiceRequest out;
    out.descriptor = descriptor;
    out.visa = holding.visa;
    out.cipher1 = crypto_.enc_sym(sk1, BytesView{proof.encode()});

    service_flight_[visa_no] = InFlightService{sk1, r_mu_prime};

    if (events_) {
        const std::string scope = "visa:" + std::to_string(visa_no);
        events_->key(id_, "sk1", scope, holding.sessions_completed + 1, sk1);
        events_->nonce(id_, "r_mu_prime", scope, holding.sessions_completed + 1, r_mu_prime);
    }
    return out;
}

Result<Bytes, Reject> MobileUser::complete_service(const std::string& id_fn,
                                                   const ServiceResponse& msg) {
    for (auto it = service_flight_.begin(); it != service_flight_.end(); ++it) {
        auto vit = visas_.find(it->first);
        if (vit == visas_.end() || vit->second.id_fn != id_fn) continue;

        VisaHolding& holding = vit->second;
        const InFlightService fl = it->second;

        SymmetricKey sk2 = crypto_.kdf({fl.sk1.bytes, holding.k_mu_fn.bytes, fl.r_mu_prime.bytes});
        auto echo_plain = crypto_.dec_sym(sk2, BytesView{msg.cipher2});
        if (!echo_plain) return Reject{RejectReason::BadResponse};
        auto echo = ServiceEchoPlain::decode(BytesView{*echo_plain});
        if (!echo) return Reject{RejectReason::BadResponse};
        if (echo->pass_no != holding.pass_no) return Reject{RejectReason::PassMismatch};

        SymmetricKey sk3 = crypto_.kdf({sk2.bytes, fl.sk1.bytes, echo->r_fn_prime.bytes});
        auto payload = crypto_.dec_sym(sk3, BytesView{msg.payload});
        if (!payload) return Reject{RejectReason::BadResponse};

        holding.chain_key = sk3;
        holding.sessions_completed += 1;
        service_flight_.erase(it);

        if (events_) {
            const std::string scope = "visa:" + std::to_string(holding.visa_no);
            events_->key(id_, "sk2", scope, holding.sessions_completed, sk2);
            events_->key(id_, "sk3", scope, holding.sessions_completed, sk3);
            events_->belief(id_, "mutual_auth_achieved", holding.sessions_completed);
        }
        return *payload;
    }
    return Reject{RejectReason::NoPending};
}

VisaRevoke MobileUser::revoke_visa(std::uint64_t visa_no) {
    auto it = visas_.find(visa_no);
    if (it == visas_.end()) throw UnknownVisa("visa " + std::to_string(visa_no));
    const VisaHolding holding = it->second;

    SymmetricKey sk1 =
        crypto_.kdf({holding.chain_key.bytes, u64_be(holding.visa_no), u64_be(holding.pass_no)});

    VisaRevokePlain inner{holding.pass_no, holding.visa_no, {}};
    VisaRevokePlain outer{holding.pass_no, holding.visa_no,
                          crypto_.enc_sym(sk1, BytesView{inner.encode(false)})};
    VisaRevoke out{crypto_.enc_sym(holding.chain_key, BytesView{outer.encode(true)})};

    visas_.erase(it);
    service_flight_.erase(visa_no);
    if (events_) events_->belief(id_, "visa_dropped:" + std::to_string(visa_no), 0);
    return out;
}

std::vector<std::uint64_t> MobileUser::visa_nos() const {
    std::vector<std::uint64_t> out;
    out.reserve(visas_.size());
    for (const auto& [no, holding] : visas_) out.push_back(no);
    return out;
}

std::optional<SymmetricKey> MobileUser::chain_key(std::uint64_t visa_no) const {
    auto it = visas_.find(visa_no);
    if (it == visas_.end()) return std::nullopt;
    return it->second.chain_key;
}

std::optional<SymmetricKey> MobileUser::visa_master_key(std::uint64_t visa_no) const {
    auto it = visas_.find(visa_no);
    if (it == visas_.end()) return std::nullopt;
    return it->second.k_mu_fn;
}

std::optional<std::string> MobileUser::visa_issuer(std::uint64_t visa_no) const {
    auto it = visas_.find(visa_no);
    if (it == visas_.end()) return std::nullopt;
    return it->second.id_fn;
}

std::uint64_t MobileUser::sessions_completed(std::uint64_t visa_no) const {
    auto it = visas_.find(visa_no);
    return it == visas_.end() ? 0 : it->second.sessions_completed;
}

} // namespace pvkit
