#include "pvkit/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include "pvkit/encode.hpp"
#include "pvkit/errors.hpp"

namespace pvkit {

namespace {

std::string fmt_u64(std::uint64_t v) { return std::to_string(v); }

std::string event_scope_text(const std::string& scope, std::uint64_t session) {
    return "scope=" + scope + " session=" + fmt_u64(session);
}

} // namespace

const char* to_string(TrustLevel level) {
    switch (level) {
    case TrustLevel::None: return "none";
    case TrustLevel::Partial: return "partial";
    case TrustLevel::Full: return "full";
    }
    return "none";
}

std::optional<TrustLevel> trust_level_from_string(std::string_view name) {
    if (name == "none") return TrustLevel::None;
    if (name == "partial") return TrustLevel::Partial;
    if (name == "full") return TrustLevel::Full;
    return std::nullopt;
}

std::optional<RejectReason> reject_reason_from_string(std::string_view name) {
    for (int code = 1; code <= static_cast<int>(RejectReason::Malformed); ++code) {
        auto reason = static_cast<RejectReason>(code);
        if (name == to_string(reason)) return reason;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Trace

void Trace::add(Timestamp at, std::string kind, std::string text, Bytes raw) {
    entries.push_back({entries.size(), at.ticks, std::move(kind), std::move(text), std::move(raw)});
}

std::string Trace::to_text() const {
    std::ostringstream out;
    for (const auto& e : entries) {
        char head[48];
        std::snprintf(head, sizeof(head), "%04llu [t=%08llu] %-7s ",
                      static_cast<unsigned long long>(e.index),
                      static_cast<unsigned long long>(e.at_ms), e.kind.c_str());
        out << head << e.text << '\n';
        if (!e.raw.empty()) out << "     raw " << to_hex(e.raw) << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// TrustAudit

TrustLevel TrustAudit::level(const std::string& from, const std::string& to) const {
    auto it = levels_.find({from, to});
    return it == levels_.end() ? TrustLevel::None : it->second;
}

void TrustAudit::raise(const std::string& from, const std::string& to, TrustLevel lv,
                       Timestamp at, Trace& trace) {
    TrustLevel& cur = levels_[{from, to}];
    if (static_cast<int>(lv) <= static_cast<int>(cur)) return;
    cur = lv;
    trace.add(at, "trust", from + " -> " + to + " now " + to_string(lv));
}

// ---------------------------------------------------------------------------
// SimWorld

SimWorld::SimWorld(std::uint64_t seed)
    : seed_(seed), master_(u64_be(seed)), suite_(&default_suite()) {
    trace_.add(clock_.now(), "note", "world seed=" + fmt_u64(seed));
}

DeterministicRng SimWorld::fork_rng(const std::string& label) const {
    return master_.fork(label);
}

void SimWorld::add_ca(const std::string& id) {
    if (directory_.contains(id)) throw ScenarioError("duplicate actor id: " + id);
    if (!ca_id_.empty()) throw ScenarioError("a certificate authority already exists");
    DeterministicRng keygen = fork_rng("keys:" + id);
    ca_keys_ = suite_->generate_keypair(id, keygen);
    ca_crypto_ = std::make_unique<ActorCrypto>(
        *suite_, std::make_unique<DeterministicRng>(fork_rng("actor:" + id)));
    ca_id_ = id;
    directory_[id] = Kind::Ca;
    trace_.add(clock_.now(), "note", "ca " + id);
}

void SimWorld::add_hn(const std::string& id) {
    if (directory_.contains(id)) throw ScenarioError("duplicate actor id: " + id);
    if (ca_id_.empty()) throw ScenarioError("declare the certificate authority first");
    DeterministicRng keygen = fork_rng("keys:" + id);
    KeyPair keys = suite_->generate_keypair(id, keygen);
    Certificate cert =
        issue_certificate(*ca_crypto_, *ca_keys_, id, keys.public_key, Role::IdentityProvider,
                          Timestamp{clock_.now().ticks + kCertValidityMs});
    hns_[id] = std::make_unique<HomeNetwork>(
        id, std::move(keys), std::move(cert), ca_keys_->public_key, *suite_,
        std::make_unique<DeterministicRng>(fork_rng("actor:" + id)), clock_, &events_);
    directory_[id] = Kind::Hn;
    trace_.add(clock_.now(), "note", "hn " + id);
}

void SimWorld::add_fn(const std::string& id) {
    if (directory_.contains(id)) throw ScenarioError("duplicate actor id: " + id);
    if (ca_id_.empty()) throw ScenarioError("declare the certificate authority first");
    DeterministicRng keygen = fork_rng("keys:" + id);
    KeyPair keys = suite_->generate_keypair(id, keygen);
    Certificate cert =
        issue_certificate(*ca_crypto_, *ca_keys_, id, keys.public_key, Role::NetworkProvider,
                          Timestamp{clock_.now().ticks + kCertValidityMs});
    fns_[id] = std::make_unique<ForeignNetwork>(
        id, std::move(keys), std::move(cert), ca_keys_->public_key, *suite_,
        std::make_unique<DeterministicRng>(fork_rng("actor:" + id)), clock_, &events_);
    directory_[id] = Kind::Fn;
    trace_.add(clock_.now(), "note", "fn " + id);
}

void SimWorld::add_mu(const std::string& id, const std::string& home_hn) {
    if (directory_.contains(id)) throw ScenarioError("duplicate actor id: " + id);
    if (!hns_.contains(home_hn)) throw ScenarioError("unknown home network: " + home_hn);
    mus_[id] = std::make_unique<MobileUser>(
        id, *suite_, std::make_unique<DeterministicRng>(fork_rng("actor:" + id)), clock_,
        &events_);
    mu_home_[id] = home_hn;
    directory_[id] = Kind::Mu;
    trace_.add(clock_.now(), "note", "mu " + id + " home=" + home_hn);
}

void SimWorld::register_mu(const std::string& mu_id) {
    MobileUser& user = mu(mu_id);
    HomeNetwork& home = hn(mu_home_.at(mu_id));
    DeterministicRng enroll = fork_rng("register:" + mu_id);
    Bytes sc_id = enroll.bytes(16);
    Bytes biometric = enroll.bytes(16);
    HomeNetwork::Provisioning prov =
        home.register_mobile_user(mu_id, sc_id, biometric, kPassportValidityMs);
    user.provision(SmartCard{std::move(sc_id), prov.k_mu_hn, prov.passport, prov.pass_no,
                             prov.cert_hn});
    trust_.raise(mu_id, home.id(), TrustLevel::Full, clock_.now(), trace_);
    trust_.raise(home.id(), mu_id, TrustLevel::Full, clock_.now(), trace_);
    trace_.add(clock_.now(), "note",
               "registered " + mu_id + " at " + home.id() + " pass_no=" + fmt_u64(prov.pass_no));
    drain_events();
}

void SimWorld::enqueue(const std::string& from, const std::string& to, Bytes bytes,
                       const std::string& note) {
    std::string label = "bytes(" + fmt_u64(bytes.size()) + ")";
    if (auto msg = decode(bytes)) label = variant_name(*msg);
    trace_.add(clock_.now(), "send",
               "capture #" + fmt_u64(captures_.size()) + " " + from + " -> " + to + " " + label +
                   " (" + note + ")",
               bytes);
    captures_.push_back({from, to, bytes});
    queue_.push_back({from, to, std::move(bytes)});
}

void SimWorld::start_acquisition(const std::string& mu_id, const std::string& fn_id,
                                 const std::string& descriptor) {
    MobileUser& user = mu(mu_id);
    if (!fns_.contains(fn_id)) throw ScenarioError("unknown foreign network: " + fn_id);
    clock_.advance(1);
    VisaRequest msg = user.begin_visa_acquisition(fn_id, descriptor);
    enqueue(mu_id, fn_id, encode(ProtocolMessage{msg}), "visa acquisition");
    drain_events();
}

void SimWorld::start_service(const std::string& mu_id, std::uint64_t visa_no,
                             const std::string& descriptor) {
    MobileUser& user = mu(mu_id);
    auto issuer = user.visa_issuer(visa_no);
    clock_.advance(1);
    ServiceRequest msg = user.begin_service(visa_no, descriptor);
    enqueue(mu_id, *issuer, encode(ProtocolMessage{msg}), "service session");
    drain_events();
}

void SimWorld::start_visa_revoke(const std::string& mu_id, std::uint64_t visa_no) {
    MobileUser& user = mu(mu_id);
    auto issuer = user.visa_issuer(visa_no);
    if (!issuer) throw UnknownVisa("no visa " + fmt_u64(visa_no) + " held by " + mu_id);
    clock_.advance(1);
    VisaRevoke msg = user.revoke_visa(visa_no);
    enqueue(mu_id, *issuer, encode(ProtocolMessage{msg}), "visa revocation");
    drain_events();
}

void SimWorld::start_passport_revoke(const std::string& hn_id, const std::string& mu_id) {
    HomeNetwork& home = hn(hn_id);
    auto pass_no = home.pass_no_of(mu_id);
    if (!pass_no) throw UnknownPassport("no passport issued to " + mu_id);
    std::vector<std::pair<std::string, Bytes>> recipients;
    for (const auto& [id, net] : fns_) recipients.emplace_back(id, net->public_key());
    clock_.advance(1);
    auto orders = home.revoke_passport(*pass_no, recipients);
    for (auto& [fn_id, order] : orders)
        enqueue(hn_id, fn_id, encode(ProtocolMessage{order}), "passport revocation");
    trace_.add(clock_.now(), "note",
               hn_id + " revoked passport " + fmt_u64(*pass_no) + " of " + mu_id);
    drain_events();
}

SimWorld::Envelope& SimWorld::front_or_throw() {
    if (queue_.empty()) throw ScenarioError("queue is empty");
    return queue_.front();
}

void SimWorld::drop_next() {
    Envelope e = front_or_throw();
    queue_.pop_front();
    trace_.add(clock_.now(), "note", "dropped " + e.from + " -> " + e.to);
}

void SimWorld::duplicate_next() {
    Envelope e = front_or_throw();
    enqueue(e.from, e.to, e.bytes, "duplicate");
}

void SimWorld::tamper_next(std::size_t byte_index) {
    Envelope& e = front_or_throw();
    if (byte_index >= e.bytes.size())
        throw ScenarioError("tamper index " + fmt_u64(byte_index) + " out of range (size " +
                            fmt_u64(e.bytes.size()) + ")");
    e.bytes[byte_index] ^= 0xFF;
    trace_.add(clock_.now(), "note",
               "tampered byte " + fmt_u64(byte_index) + " of " + e.from + " -> " + e.to);
}

void SimWorld::redirect_next(const std::string& new_to) {
    if (!directory_.contains(new_to)) throw ScenarioError("unknown actor: " + new_to);
    Envelope& e = front_or_throw();
    trace_.add(clock_.now(), "note", "redirected " + e.from + " -> " + e.to + " to " + new_to);
    e.to = new_to;
}

void SimWorld::delay_next(std::size_t positions) {
    Envelope e = front_or_throw();
    queue_.pop_front();
    std::size_t pos = std::min(positions, queue_.size());
    queue_.insert(queue_.begin() + static_cast<std::ptrdiff_t>(pos), std::move(e));
    trace_.add(clock_.now(), "note", "delayed head by " + fmt_u64(positions));
}

void SimWorld::inject(const std::string& from, const std::string& to, Bytes raw) {
    if (!directory_.contains(to)) throw ScenarioError("unknown actor: " + to);
    enqueue(from, to, std::move(raw), "injected");
}

void SimWorld::replay(std::size_t capture_index, const std::string& to, bool to_front) {
    if (capture_index >= captures_.size())
        throw ScenarioError("capture #" + fmt_u64(capture_index) + " does not exist");
    if (!directory_.contains(to)) throw ScenarioError("unknown actor: " + to);
    // copy: enqueue appends to captures_, which may invalidate references
    const Captured c = captures_[capture_index];
    enqueue(c.from, to, c.bytes, "replay of #" + fmt_u64(capture_index));
    if (to_front && queue_.size() > 1) {
        Envelope e = std::move(queue_.back());
        queue_.pop_back();
        queue_.push_front(std::move(e));
    }
}

void SimWorld::advance_clock(std::uint64_t ms) {
    clock_.advance(ms);
    trace_.add(clock_.now(), "note", "clock +" + fmt_u64(ms) + "ms");
}

void SimWorld::drain_events() {
    for (auto& e : events_.drain_keys()) {
        trace_.add(clock_.now(), "event",
                   "key " + e.actor + " " + e.kind + " " + event_scope_text(e.scope, e.session) +
                       " " + to_hex(e.key.bytes));
        trace_.keys.push_back(std::move(e));
    }
    for (auto& e : events_.drain_nonces()) {
        trace_.add(clock_.now(), "event",
                   "nonce " + e.actor + " " + e.kind + " " + event_scope_text(e.scope, e.session) +
                       " " + to_hex(e.nonce.bytes));
        trace_.nonces.push_back(std::move(e));
    }
    for (auto& e : events_.drain_beliefs()) {
        trace_.add(clock_.now(), "event",
                   "belief " + e.actor + " " + e.belief + " session=" + fmt_u64(e.session));
        trace_.beliefs.push_back(std::move(e));
    }
    auto drain_uses = [&](const std::string& actor, ActorCrypto& crypto) {
        for (auto& u : crypto.drain_key_uses()) {
            trace_.add(clock_.now(), "event",
                       "keyuse " + actor + " " + u.op + " " + to_hex(u.key_fingerprint));
            trace_.key_uses.push_back({actor, std::move(u.op), std::move(u.key_fingerprint)});
        }
    };
    if (ca_crypto_) drain_uses(ca_id_, *ca_crypto_);
    for (auto& [id, actor] : hns_) drain_uses(id, actor->crypto());
    for (auto& [id, actor] : fns_) drain_uses(id, actor->crypto());
    for (auto& [id, actor] : mus_) drain_uses(id, actor->crypto());
}

SimWorld::DeliveryOutcome SimWorld::deliver_next() {
    Envelope env = front_or_throw();
    queue_.pop_front();
    clock_.advance(1);

    DeliveryOutcome out;
    out.from = env.from;
    out.to = env.to;

    auto dir = directory_.find(env.to);
    if (dir == directory_.end()) throw ScenarioError("delivery to unknown actor: " + env.to);

    // Replies go to the claimed sender when it exists; injected senders
    // receive nothing.
    auto respond = [&](const ProtocolMessage& msg, const std::string& to) {
        if (!directory_.contains(to)) {
            trace_.add(clock_.now(), "note", "reply to unknown actor " + to + " discarded");
            return;
        }
        enqueue(env.to, to, encode(msg), "response");
        out.response_enqueued = true;
    };
    auto rejected = [&](const Reject& rej, const std::string& to) {
        out.reject = rej.reason;
        out.summary = std::string("reject ") + to_string(rej.reason);
        respond(ProtocolMessage{rej}, to);
    };

    std::optional<ProtocolMessage> decoded = decode(env.bytes);
    std::string label = decoded ? variant_name(*decoded) : "garbage";
    if (!decoded) {
        out.reject = RejectReason::Malformed;
        out.summary = "undecodable bytes";
    } else {
        out.delivered = true;
        switch (dir->second) {
        case Kind::Fn: {
            ForeignNetwork& net = fn(env.to);
            if (auto* req = std::get_if<VisaRequest>(&*decoded)) {
                if (mus_.contains(env.from)) acquiring_mu_[env.to] = env.from;
                auto res = net.handle_visa_request(*req);
                if (res.ok()) {
                    const std::string& hn_id = req->cert_hn.subject_id;
                    out.summary = "relayed to " + hn_id;
                    respond(ProtocolMessage{res.value()}, hn_id);
                    trust_.raise(env.to, hn_id, TrustLevel::Partial, clock_.now(), trace_);
                } else {
                    rejected(res.error(), env.from);
                }
            } else if (std::get_if<HNDecision>(&*decoded)) {
                auto res = net.handle_hn_decision(std::get<HNDecision>(*decoded));
                auto who = acquiring_mu_.find(env.to);
                if (res.ok()) {
                    out.summary = "visa granted";
                    if (who != acquiring_mu_.end()) {
                        respond(ProtocolMessage{res.value()}, who->second);
                        trust_.raise(env.to, who->second, TrustLevel::Partial, clock_.now(),
                                     trace_);
                    }
                } else {
                    rejected(res.error(), env.from);
                }
            } else if (auto* sreq = std::get_if<ServiceRequest>(&*decoded)) {
                if (mus_.contains(env.from)) serving_mu_[env.to] = env.from;
                Bytes payload = to_bytes("svc:" + sreq->descriptor);
                auto res = net.handle_service_request(*sreq, payload);
                auto who = serving_mu_.find(env.to);
                if (res.ok()) {
                    out.summary = "service session established";
                    if (who != serving_mu_.end()) {
                        respond(ProtocolMessage{res.value()}, who->second);
                        trust_.raise(env.to, who->second, TrustLevel::Full, clock_.now(), trace_);
                    }
                } else {
                    rejected(res.error(), env.from);
                }
            } else if (auto* pr = std::get_if<PassportRevoke>(&*decoded)) {
                switch (net.handle_passport_revoke(*pr)) {
                case ForeignNetwork::RevokeOutcome::Applied:
                    out.summary = "passport revocation applied";
                    break;
                case ForeignNetwork::RevokeOutcome::RecordedOnly:
                    out.summary = "passport revocation recorded";
                    break;
                case ForeignNetwork::RevokeOutcome::Dropped:
                    out.reject = RejectReason::BadSignature;
                    out.summary = "passport revocation dropped";
                    break;
                }
            } else if (auto* vr = std::get_if<VisaRevoke>(&*decoded)) {
                auto res = net.handle_visa_revoke(*vr);
                if (res.ok()) {
                    out.summary = "visa " + fmt_u64(res.value()) + " revoked";
                } else {
                    rejected(res.error(), env.from);
                }
            } else if (auto* rej = std::get_if<Reject>(&*decoded)) {
                out.summary = std::string("saw reject ") + to_string(rej->reason);
            } else {
                out.delivered = false;
                out.reject = RejectReason::Malformed;
                out.summary = label + std::string(" not consumed by a foreign network");
            }
            break;
        }
        case Kind::Hn: {
            HomeNetwork& home = hn(env.to);
            if (auto* fwd = std::get_if<ForwardToHN>(&*decoded)) {
                auto res = home.handle_forward(*fwd);
                if (res.ok()) {
                    out.summary = "verdict issued";
                    respond(ProtocolMessage{res.value()}, env.from);
                    trust_.raise(env.to, fwd->cert_fn.subject_id, TrustLevel::Partial,
                                 clock_.now(), trace_);
                } else {
                    rejected(res.error(), env.from);
                }
            } else if (auto* rej = std::get_if<Reject>(&*decoded)) {
                out.summary = std::string("saw reject ") + to_string(rej->reason);
            } else {
                out.delivered = false;
                out.reject = RejectReason::Malformed;
                out.summary = label + std::string(" not consumed by a home network");
            }
            break;
        }
        case Kind::Mu: {
            MobileUser& user = mu(env.to);
            if (auto* grant = std::get_if<VisaGrant>(&*decoded)) {
                auto res = user.complete_visa_acquisition(env.from, *grant);
                if (res.ok()) {
                    out.summary = "acquired visa " + fmt_u64(res.value());
                    trust_.raise(env.to, env.from, TrustLevel::Partial, clock_.now(), trace_);
                } else {
                    out.reject = res.error().reason;
                    out.summary = std::string("reject ") + to_string(res.error().reason);
                }
            } else if (auto* resp = std::get_if<ServiceResponse>(&*decoded)) {
                auto res = user.complete_service(env.from, *resp);
                if (res.ok()) {
                    out.summary = "service payload (" + fmt_u64(res.value().size()) + " bytes)";
                    trust_.raise(env.to, env.from, TrustLevel::Full, clock_.now(), trace_);
                } else {
                    out.reject = res.error().reason;
                    out.summary = std::string("reject ") + to_string(res.error().reason);
                }
            } else if (auto* rej = std::get_if<Reject>(&*decoded)) {
                out.summary = std::string("saw reject ") + to_string(rej->reason);
            } else {
                out.delivered = false;
                out.reject = RejectReason::Malformed;
                out.summary = label + std::string(" not consumed by a mobile user");
            }
            break;
        }
        case Kind::Ca:
            out.delivered = false;
            out.reject = RejectReason::Malformed;
            out.summary = "the certificate authority is offline";
            break;
        }
    }

    trace_.add(clock_.now(), "deliver",
               env.from + " -> " + env.to + " " + label + ": " + out.summary, env.bytes);
    drain_events();
    return out;
}

std::vector<SimWorld::DeliveryOutcome> SimWorld::pump(std::size_t max_deliveries) {
    std::vector<DeliveryOutcome> outcomes;
    while (!queue_.empty()) {
        if (outcomes.size() >= max_deliveries)
            throw ScenarioError("pump exceeded " + fmt_u64(max_deliveries) + " deliveries");
        outcomes.push_back(deliver_next());
    }
    return outcomes;
}

MobileUser& SimWorld::mu(const std::string& id) {
    auto it = mus_.find(id);
    if (it == mus_.end()) throw ScenarioError("unknown mobile user: " + id);
    return *it->second;
}

HomeNetwork& SimWorld::hn(const std::string& id) {
    auto it = hns_.find(id);
    if (it == hns_.end()) throw ScenarioError("unknown home network: " + id);
    return *it->second;
}

ForeignNetwork& SimWorld::fn(const std::string& id) {
    auto it = fns_.find(id);
    if (it == fns_.end()) throw ScenarioError("unknown foreign network: " + id);
    return *it->second;
}

std::vector<std::string> SimWorld::fn_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : fns_) out.push_back(id);
    return out;
}

const Bytes& SimWorld::ca_public_key() const {
    if (!ca_keys_) throw ScenarioError("no certificate authority");
    return ca_keys_->public_key;
}

KeyPair SimWorld::make_attacker_keys(const std::string& label) {
    DeterministicRng keygen = fork_rng("attacker:" + label);
    return suite_->generate_keypair(label, keygen);
}

std::optional<std::uint64_t> SimWorld::visa_of(const std::string& mu_id,
                                               const std::string& fn_id) const {
    auto it = mus_.find(mu_id);
    if (it == mus_.end()) return std::nullopt;
    for (std::uint64_t v : it->second->visa_nos())
        if (it->second->visa_issuer(v) == fn_id) return v;
    return std::nullopt;
}

SimWorld::DeliveryOutcome adversary_replay(SimWorld& world, std::size_t capture_index,
                                           const std::string& deliver_to) {
    world.replay(capture_index, deliver_to, true);
    return world.deliver_next();
}

// ---------------------------------------------------------------------------
// Scenario runner

namespace {

std::uint64_t parse_u64(const std::string& s) { return std::stoull(s); }

} // namespace

RunResult run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed_override,
                       const CryptoSuite* suite) {
    SimWorld world(seed_override.value_or(scenario.seed));
    if (suite) world.use_suite(*suite);

    RunResult rr;
    auto fail = [&](const ScenarioStep& st, const std::string& what) {
        rr.failures.push_back("line " + std::to_string(st.line_no) + ": " + what);
        world.trace().add(world.clock().now(), "note", "FAILED expectation: " + what);
    };
    auto check_outcome = [&](const ScenarioStep& st, const SimWorld::DeliveryOutcome& out) {
        switch (st.expect) {
        case ScenarioStep::Expect::None: break;
        case ScenarioStep::Expect::Ok:
            if (out.reject)
                fail(st, "expected ok, got reject " + std::string(to_string(*out.reject)));
            break;
        case ScenarioStep::Expect::RejectWith:
            if (!out.reject)
                fail(st, "expected reject " + std::string(to_string(st.expect_reason)) +
                             ", got ok (" + out.summary + ")");
            else if (*out.reject != st.expect_reason)
                fail(st, "expected reject " + std::string(to_string(st.expect_reason)) +
                             ", got reject " + std::string(to_string(*out.reject)));
            break;
        case ScenarioStep::Expect::Silent:
            if (out.reject || out.response_enqueued)
                fail(st, "expected a silent delivery, got " + out.summary);
            break;
        }
    };

    for (const auto& st : scenario.steps) {
        try {
            using Op = ScenarioStep::Op;
            switch (st.op) {
            case Op::AddCa: world.add_ca(st.args[0]); break;
            case Op::AddHn: world.add_hn(st.args[0]); break;
            case Op::AddFn: world.add_fn(st.args[0]); break;
            case Op::AddMu: world.add_mu(st.args[0], st.args[1]); break;
            case Op::Register: world.register_mu(st.args[0]); break;
            case Op::Acquire: world.start_acquisition(st.args[0], st.args[1], st.args[2]); break;
            case Op::Service: {
                auto visa = world.visa_of(st.args[0], st.args[1]);
                if (!visa) {
                    fail(st, st.args[0] + " holds no visa from " + st.args[1]);
                    break;
                }
                world.start_service(st.args[0], *visa, st.args[2]);
                break;
            }
            case Op::RevokeVisa: {
                auto visa = world.visa_of(st.args[0], st.args[1]);
                if (!visa) {
                    fail(st, st.args[0] + " holds no visa from " + st.args[1]);
                    break;
                }
                world.start_visa_revoke(st.args[0], *visa);
                break;
            }
            case Op::RevokePassport: world.start_passport_revoke(st.args[0], st.args[1]); break;
            case Op::Deliver: check_outcome(st, world.deliver_next()); break;
            case Op::Pump: {
                auto outcomes = world.pump();
                std::vector<RejectReason> rejects;
                for (const auto& o : outcomes)
                    if (o.reject) rejects.push_back(*o.reject);
                if (st.expect == ScenarioStep::Expect::Ok && !rejects.empty())
                    fail(st, "expected a clean pump, got reject " +
                                 std::string(to_string(rejects.front())));
                if (st.expect == ScenarioStep::Expect::RejectWith) {
                    bool hit = false;
                    for (RejectReason r : rejects) {
                        if (r == st.expect_reason)
                            hit = true;
                        else
                            fail(st, "unexpected reject " + std::string(to_string(r)));
                    }
                    if (!hit)
                        fail(st, "expected reject " + std::string(to_string(st.expect_reason)) +
                                     " during pump, saw none");
                }
                break;
            }
            case Op::Drop: world.drop_next(); break;
            case Op::Dup: world.duplicate_next(); break;
            case Op::Tamper: world.tamper_next(parse_u64(st.args[0])); break;
            case Op::Delay: world.delay_next(parse_u64(st.args[0])); break;
            case Op::Advance: world.advance_clock(parse_u64(st.args[0])); break;
            case Op::Replay: world.replay(parse_u64(st.args[0]), st.args[1]); break;
            case Op::Redirect: world.redirect_next(st.args[0]); break;
            case Op::Inject: {
                Bytes raw;
                from_hex(st.args[2], raw);
                world.inject(st.args[0], st.args[1], std::move(raw));
                break;
            }
            case Op::ExpectTrust: {
                TrustLevel want = *trust_level_from_string(st.args[2]);
                TrustLevel got = world.trust().level(st.args[0], st.args[1]);
                if (got != want)
                    fail(st, "trust " + st.args[0] + " -> " + st.args[1] + " is " +
                                 to_string(got) + ", expected " + to_string(want));
                break;
            }
            case Op::ExpectQueue: {
                std::uint64_t want = parse_u64(st.args[0]);
                if (world.queue_size() != want)
                    fail(st, "queue holds " + std::to_string(world.queue_size()) +
                                 " messages, expected " + st.args[0]);
                break;
            }
            case Op::ExpectMuAsymZero: {
                std::uint64_t n = world.mu(st.args[0]).crypto().counters().asym_total();
                if (n != 0)
                    fail(st, st.args[0] + " performed " + std::to_string(n) +
                                 " asymmetric operations, expected none");
                break;
            }
            case Op::ExpectKeysAgree: {
                MobileUser& user = world.mu(st.args[0]);
                ForeignNetwork& net = world.fn(st.args[1]);
                std::size_t compared = 0;
                for (std::uint64_t v : user.visa_nos()) {
                    if (user.visa_issuer(v) != st.args[1]) continue;
                    auto mine = user.chain_key(v);
                    auto theirs = net.chain_key(v);
                    if (!theirs) continue;
                    ++compared;
                    if (!(mine && mine->bytes == theirs->bytes))
                        fail(st, "chain keys for visa " + std::to_string(v) + " disagree");
                }
                if (compared == 0)
                    fail(st, "no shared visa between " + st.args[0] + " and " + st.args[1]);
                break;
            }
            }
        } catch (const ScenarioError&) {
            throw;
        } catch (const std::exception& e) {
            fail(st, e.what());
        }
    }

    rr.trace = std::move(world.trace());
    return rr;
}

// ---------------------------------------------------------------------------
// Trace audits

std::string FreshnessReport::to_text() const {
    std::ostringstream out;
    out << "sessions=" << sessions << '\n';
    for (const auto& e : session_keys)
        out << e.actor << ' ' << e.kind << ' ' << e.scope << " session=" << e.session << ' '
            << e.key_hex << '\n';
    return out.str();
}

FreshnessReport audit_key_freshness(const Trace& trace, const CryptoSuite& suite) {
    FreshnessReport rep;

    auto is_session_kind = [](const std::string& k) {
        return k == "sk1" || k == "sk2" || k == "sk3";
    };

    std::map<std::tuple<std::string, std::uint64_t, std::string>, std::map<std::string, Bytes>>
        grouped;
    std::map<std::string, std::vector<const KeyEvent*>> by_actor;
    std::set<std::pair<std::string, std::uint64_t>> sessions;

    for (const KeyEvent& e : trace.keys) {
        if (!is_session_kind(e.kind)) continue;
        rep.session_keys.push_back({e.actor, e.kind, e.scope, e.session, to_hex(e.key.bytes)});
        grouped[{e.scope, e.session, e.kind}][e.actor] = e.key.bytes;
        by_actor[e.actor].push_back(&e);
        sessions.insert({e.scope, e.session});
    }
    rep.sessions = sessions.size();
    if (rep.sessions < 2)
        throw std::invalid_argument("key-freshness audit needs at least two service sessions");

    for (const auto& [actor, events] : by_actor) {
        for (std::size_t i = 0; i < events.size(); ++i) {
            for (std::size_t j = i + 1; j < events.size(); ++j) {
                if (events[i]->key.bytes == events[j]->key.bytes)
                    throw FreshnessViolation(
                        events[i]->session, events[j]->session,
                        actor + " derived the same " + events[i]->kind + "/" + events[j]->kind +
                            " in sessions " + std::to_string(events[i]->session) + " and " +
                            std::to_string(events[j]->session));
            }
        }
    }

    for (const auto& [group, values] : grouped) {
        const Bytes* first = nullptr;
        for (const auto& [actor, key] : values) {
            if (!first) {
                first = &key;
            } else if (*first != key) {
                throw FreshnessViolation(std::get<1>(group), std::get<1>(group),
                                         "the two sides disagree on " + std::get<2>(group) +
                                             " for " + std::get<0>(group) + " session " +
                                             std::to_string(std::get<1>(group)));
            }
        }
    }

    std::set<Bytes> master_fingerprints;
    for (const KeyEvent& e : trace.keys) {
        if (e.kind != "k_mu_fn") continue;
        Bytes fp = suite.hash(e.key.bytes);
        fp.resize(8);
        master_fingerprints.insert(std::move(fp));
    }
    for (const KeyUseRecord& u : trace.key_uses) {
        if (master_fingerprints.contains(u.fingerprint))
            throw FreshnessViolation(0, 0,
                                     "a visa master key keyed traffic encryption at " + u.actor);
    }

    return rep;
}

bool mutual_auth_beliefs_held(const Trace& trace, const std::string& mu_id,
                              const std::string& fn_id) {
    std::set<std::pair<std::string, std::string>> held;
    for (const BeliefEvent& e : trace.beliefs) held.insert({e.actor, e.belief});
    return held.contains({mu_id, "mu_authenticated_hn"}) &&
           held.contains({mu_id, "mu_authenticated_fn"}) &&
           held.contains({mu_id, "mutual_auth_achieved"}) &&
           held.contains({fn_id, "fn_authenticated_mu"}) &&
           held.contains({fn_id, "fn_session_key_established"});
}

} // namespace pvkit
