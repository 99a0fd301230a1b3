#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bnc/bayesnet.hpp"

namespace bnc {

enum class Severity { Warning, Error };

struct ParseDiagnostic {
    Severity severity = Severity::Error;
    int line = 0;
    std::string message;
};

/// Opaque `property` strings carried through a parse/serialize round trip.
/// Keys: "" for network-level properties, variable names otherwise.
using BifProperties = std::map<std::string, std::vector<std::string>>;

struct BifParseResult {
    std::optional<BayesNet> net; // absent when any error diagnostic was produced
    std::vector<ParseDiagnostic> diagnostics;
    std::string network_name;
    BifProperties properties;

    bool ok() const { return net.has_value(); }
    std::vector<const ParseDiagnostic*> errors() const;
};

/// Parses the textual BIF 0.15 subset: `network`, `variable` (discrete),
/// and `probability` blocks with `table` rows (child state fastest) or
/// per-parent-instantiation rows. Never throws on malformed input.
BifParseResult parse_bif(const std::string& text);

/// Emits BIF text such that parse_bif(serialize_bif(net)) reproduces the net
/// exactly (CPT values as shortest round-trip decimals).
std::string serialize_bif(const BayesNet& net, const std::string& network_name = "net",
                          const BifProperties& properties = {});

} // namespace bnc
