#pragma once

#include <string>

#include "pvkit/harness.hpp"

namespace pvkit {

/// Parses the line-oriented scenario language. One step per line; `#`
/// starts a comment; double quotes group a descriptor into one token
/// (\" and \\ escape). Arity, numbers, reason names and trust levels are
/// validated here; actor ids only at run time.
///
///   seed N
///   ca ID | hn ID | fn ID | mu ID home=HN
///   register MU
///   acquire MU FN "descriptor"
///   service MU FN "descriptor"
///   revoke-visa MU FN
///   revoke-passport HN MU
///   deliver [expect ok | expect silent | expect reject REASON]
///   pump    [expect ok | expect reject REASON]
///   drop | dup | tamper N | delay N | advance MS
///   replay N to=ID | redirect ID | inject FROM TO HEXBYTES
///   expect trust A B none|partial|full
///   expect queue N
///   expect mu-asym-zero MU
///   expect keys-agree MU FN
///
/// Throws ScenarioParseError with the offending line number.
Scenario parse_scenario(const std::string& text);

/// Reads and parses a scenario file. Throws IoError when unreadable.
Scenario parse_scenario_file(const std::string& path);

} // namespace pvkit
