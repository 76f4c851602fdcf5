#include "pvkit/scenario_text.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "pvkit/errors.hpp"

namespace pvkit {

namespace {

std::vector<std::string> tokenize(const std::string& line, std::size_t line_no) {
    std::vector<std::string> tokens;
    std::string cur;
    bool in_token = false;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == '#') break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (in_token) {
                tokens.push_back(std::move(cur));
                cur.clear();
                in_token = false;
            }
            ++i;
            continue;
        }
        if (c == '"') {
            in_token = true;
            ++i;
            bool closed = false;
            while (i < line.size()) {
                char q = line[i];
                if (q == '\\' && i + 1 < line.size() &&
                    (line[i + 1] == '"' || line[i + 1] == '\\')) {
                    cur.push_back(line[i + 1]);
                    i += 2;
                    continue;
                }
                if (q == '"') {
                    closed = true;
                    ++i;
                    break;
                }
                cur.push_back(q);
                ++i;
            }
            if (!closed) throw ScenarioParseError(line_no, "unterminated quote");
            continue;
        }
        in_token = true;
        cur.push_back(c);
        ++i;
    }
    if (in_token) tokens.push_back(std::move(cur));
    return tokens;
}

std::uint64_t require_number(const std::string& tok, std::size_t line_no,
                             const std::string& what) {
    if (tok.empty()) throw ScenarioParseError(line_no, what + " must be a number");
    for (char c : tok)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ScenarioParseError(line_no, what + " must be a number, got '" + tok + "'");
    try {
        return std::stoull(tok);
    } catch (const std::out_of_range&) {
        throw ScenarioParseError(line_no, what + " is out of range");
    }
}

std::string require_prefixed(const std::string& tok, const std::string& prefix,
                             std::size_t line_no) {
    if (!tok.starts_with(prefix) || tok.size() == prefix.size())
        throw ScenarioParseError(line_no, "expected " + prefix + "<value>, got '" + tok + "'");
    return tok.substr(prefix.size());
}

void require_arity(const std::vector<std::string>& t, std::size_t n, std::size_t line_no) {
    if (t.size() != n)
        throw ScenarioParseError(line_no, "'" + t[0] + "' takes " + std::to_string(n - 1) +
                                              " arguments, got " + std::to_string(t.size() - 1));
}

void parse_expectation(ScenarioStep& step, const std::vector<std::string>& t, std::size_t from,
                       bool allow_silent, std::size_t line_no) {
    if (t.size() == from) return;
    if (t[from] != "expect")
        throw ScenarioParseError(line_no, "expected 'expect', got '" + t[from] + "'");
    if (t.size() < from + 2) throw ScenarioParseError(line_no, "'expect' needs an outcome");
    const std::string& kind = t[from + 1];
    if (kind == "ok") {
        require_arity(t, from + 2, line_no);
        step.expect = ScenarioStep::Expect::Ok;
    } else if (kind == "silent" && allow_silent) {
        require_arity(t, from + 2, line_no);
        step.expect = ScenarioStep::Expect::Silent;
    } else if (kind == "reject") {
        require_arity(t, from + 3, line_no);
        auto reason = reject_reason_from_string(t[from + 2]);
        if (!reason)
            throw ScenarioParseError(line_no, "unknown reject reason '" + t[from + 2] + "'");
        step.expect = ScenarioStep::Expect::RejectWith;
        step.expect_reason = *reason;
    } else {
        throw ScenarioParseError(line_no, "unknown expectation '" + kind + "'");
    }
}

} // namespace

Scenario parse_scenario(const std::string& text) {
    Scenario sc;
    bool seed_seen = false;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::vector<std::string> t = tokenize(line, line_no);
        if (t.empty()) continue;

        ScenarioStep step;
        step.line_no = line_no;
        const std::string& op = t[0];
        using Op = ScenarioStep::Op;

        if (op == "seed") {
            require_arity(t, 2, line_no);
            if (seed_seen) throw ScenarioParseError(line_no, "seed already set");
            seed_seen = true;
            sc.seed = require_number(t[1], line_no, "seed");
            continue;
        }
        if (op == "ca" || op == "hn" || op == "fn") {
            require_arity(t, 2, line_no);
            step.op = op == "ca" ? Op::AddCa : op == "hn" ? Op::AddHn : Op::AddFn;
            step.args = {t[1]};
        } else if (op == "mu") {
            require_arity(t, 3, line_no);
            step.op = Op::AddMu;
            step.args = {t[1], require_prefixed(t[2], "home=", line_no)};
        } else if (op == "register") {
            require_arity(t, 2, line_no);
            step.op = Op::Register;
            step.args = {t[1]};
        } else if (op == "acquire" || op == "service") {
            require_arity(t, 4, line_no);
            step.op = op == "acquire" ? Op::Acquire : Op::Service;
            step.args = {t[1], t[2], t[3]};
        } else if (op == "revoke-visa") {
            require_arity(t, 3, line_no);
            step.op = Op::RevokeVisa;
            step.args = {t[1], t[2]};
        } else if (op == "revoke-passport") {
            require_arity(t, 3, line_no);
            step.op = Op::RevokePassport;
            step.args = {t[1], t[2]};
        } else if (op == "deliver") {
            step.op = Op::Deliver;
            parse_expectation(step, t, 1, true, line_no);
        } else if (op == "pump") {
            step.op = Op::Pump;
            parse_expectation(step, t, 1, false, line_no);
        } else if (op == "drop" || op == "dup") {
            require_arity(t, 1, line_no);
            step.op = op == "drop" ? Op::Drop : Op::Dup;
        } else if (op == "tamper" || op == "delay" || op == "advance") {
            require_arity(t, 2, line_no);
            require_number(t[1], line_no, op);
            step.op = op == "tamper" ? Op::Tamper : op == "delay" ? Op::Delay : Op::Advance;
            step.args = {t[1]};
        } else if (op == "replay") {
            require_arity(t, 3, line_no);
            require_number(t[1], line_no, "capture index");
            step.op = Op::Replay;
            step.args = {t[1], require_prefixed(t[2], "to=", line_no)};
        } else if (op == "redirect") {
            require_arity(t, 2, line_no);
            step.op = Op::Redirect;
            step.args = {t[1]};
        } else if (op == "inject") {
            require_arity(t, 4, line_no);
            Bytes scratch;
            if (!from_hex(t[3], scratch))
                throw ScenarioParseError(line_no, "inject payload must be hex");
            step.op = Op::Inject;
            step.args = {t[1], t[2], t[3]};
        } else if (op == "expect") {
            if (t.size() < 2) throw ScenarioParseError(line_no, "'expect' needs a subject");
            const std::string& what = t[1];
            if (what == "trust") {
                require_arity(t, 5, line_no);
                if (!trust_level_from_string(t[4]))
                    throw ScenarioParseError(line_no, "unknown trust level '" + t[4] + "'");
                step.op = Op::ExpectTrust;
                step.args = {t[2], t[3], t[4]};
            } else if (what == "queue") {
                require_arity(t, 3, line_no);
                require_number(t[2], line_no, "queue size");
                step.op = Op::ExpectQueue;
                step.args = {t[2]};
            } else if (what == "mu-asym-zero") {
                require_arity(t, 3, line_no);
                step.op = Op::ExpectMuAsymZero;
                step.args = {t[2]};
            } else if (what == "keys-agree") {
                require_arity(t, 4, line_no);
                step.op = Op::ExpectKeysAgree;
                step.args = {t[2], t[3]};
            } else {
                throw ScenarioParseError(line_no, "unknown expectation '" + what + "'");
            }
        } else {
            throw ScenarioParseError(line_no, "unknown step '" + op + "'");
        }
        sc.steps.push_back(std::move(step));
    }
    return sc;
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

} // namespace pvkit
