#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bnc/bayesnet.hpp"
#include "bnc/nnf.hpp"

namespace bnc {

struct OracleReport {
    std::string object;
    bool pass = false;
    std::optional<Instantiation> counterexample; // first mismatch, lexicographic
    std::vector<size_t> class_counts;

    std::string to_record() const; // key=value line
};

struct OracleSettings {
    size_t instance_cap = size_t{1} << 20;
};

/// Exhaustive classification of every feature instance using joint_query;
/// shares nothing with the jointree/compiler path. Zero-probability instances
/// land in the class the compiler's leaf rule selects (class 0 under argmax).
std::vector<std::vector<Instantiation>> oracle_classify_all(const ClassifierSpec& spec,
                                                            const OracleSettings& settings = {});

/// Model set of the circuit vs. the oracle's instance set for the class.
/// Store variables are matched to features by name.
OracleReport check_class_formula(const ClassifierSpec& spec, int class_i, const NnfStore& store,
                                 NodeId class_root, const OracleSettings& settings = {});

/// Complement variant: the circuit must hold exactly the instances NOT in
/// class_i.
OracleReport check_complement_formula(const ClassifierSpec& spec, int class_i,
                                      const NnfStore& store, NodeId root,
                                      const OracleSettings& settings = {});

/// Definitional brute-force reasons, built in the same store so results can
/// be compared with `equivalent`. The instantiation uses store indices.
NodeId oracle_complete_reason(NnfStore& store, NodeId class_root, const Instantiation& x,
                              const OracleSettings& settings = {});
NodeId oracle_general_reason(NnfStore& store, NodeId class_root, const Instantiation& x,
                             const OracleSettings& settings = {});

} // namespace bnc
