#pragma once

// Hand-built circuit fixtures used by the explanation tests: the binary
// three-feature example and the multi-valued diagnosis example.

#include "bnc/nnf.hpp"

namespace testsupport {

// D, E, F binary with states {f, t}.
inline bnc::NnfStore def_store() {
    bnc::NnfStore store;
    store.add_variable("D", {"f", "t"});
    store.add_variable("E", {"f", "t"});
    store.add_variable("F", {"f", "t"});
    return store;
}

// (D or not E) and (not D or not E or F), as a nested OR-decomposable circuit.
inline bnc::NodeId pi1_circuit(bnc::NnfStore& store) {
    using bnc::NodeId;
    NodeId d = store.add_literal(0, 0b10);
    NodeId nd = store.add_literal(0, 0b01);
    NodeId ne = store.add_literal(1, 0b01);
    NodeId f = store.add_literal(2, 0b10);
    NodeId c1 = store.add_or({d, ne});
    NodeId c2 = store.add_or({nd, store.add_or({ne, f})});
    return store.add_and({c1, c2});
}

// AND-decomposable circuit for the negative instances of the same class:
// (not D and E) or (D and (E and not F)).
inline bnc::NodeId pi1_negative_circuit(bnc::NnfStore& store) {
    using bnc::NodeId;
    NodeId nd = store.add_literal(0, 0b01);
    NodeId d = store.add_literal(0, 0b10);
    NodeId e = store.add_literal(1, 0b10);
    NodeId nf = store.add_literal(2, 0b01);
    NodeId a1 = store.add_and({nd, e});
    NodeId a2 = store.add_and({d, store.add_and({e, nf})});
    return store.add_or({a1, a2});
}

// CT binary {f,t}; BP, HR ternary {Low, Normal, High}.
inline bnc::NnfStore disease_store() {
    bnc::NnfStore store;
    store.add_variable("CT", {"f", "t"});
    store.add_variable("BP", {"Low", "Normal", "High"});
    store.add_variable("HR", {"Low", "Normal", "High"});
    return store;
}

// Class formula of disease type 2:
// [HR in {Normal,High} or (CT and BP=High)] and [BP in {Low,High} or HR=Low]
inline bnc::NodeId disease_type2_circuit(bnc::NnfStore& store) {
    using bnc::NodeId;
    NodeId hr_nh = store.add_literal(2, 0b110);
    NodeId ct = store.add_literal(0, 0b10);
    NodeId bp_high = store.add_literal(1, 0b100);
    NodeId bp_lh = store.add_literal(1, 0b101);
    NodeId hr_low = store.add_literal(2, 0b001);
    NodeId left = store.add_or({hr_nh, store.add_and({ct, bp_high})});
    NodeId right = store.add_or({bp_lh, hr_low});
    return store.add_and({left, right});
}

// Complement formula of disease type 0:
// [BP in {Normal,High} or HR in {Normal,High}]
//   and [BP in {Low,High} or ((not CT or HR in {Normal,High}) and (CT or HR=High))]
//   and [BP in {Low,Normal} or CT or HR in {Normal,High}]
inline bnc::NodeId disease_not0_circuit(bnc::NnfStore& store) {
    using bnc::NodeId;
    NodeId bp_nh = store.add_literal(1, 0b110);
    NodeId hr_nh = store.add_literal(2, 0b110);
    NodeId bp_lh = store.add_literal(1, 0b101);
    NodeId nct = store.add_literal(0, 0b01);
    NodeId ct = store.add_literal(0, 0b10);
    NodeId hr_high = store.add_literal(2, 0b100);
    NodeId bp_ln = store.add_literal(1, 0b011);
    NodeId c1 = store.add_or({bp_nh, hr_nh});
    NodeId inner = store.add_and({store.add_or({nct, hr_nh}), store.add_or({ct, hr_high})});
    NodeId c2 = store.add_or({bp_lh, inner});
    NodeId c3 = store.add_or({bp_ln, ct, hr_nh});
    return store.add_and({c1, c2, c3});
}

// Instance (BP=High, CT, HR=Normal) over the disease store.
inline bnc::Instantiation disease_instance() {
    bnc::Instantiation x;
    x.set(0, 1); // CT = t
    x.set(1, 2); // BP = High
    x.set(2, 1); // HR = Normal
    return x;
}

} // namespace testsupport
