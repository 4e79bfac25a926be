#include <map>

#include "conelab/scenario.hpp"

namespace conelab {

namespace {

// G = F2 x| Z2, t swapping a and b.
constexpr const char* kMinasyanOsin = R"json({
  "schema": "conelab-scenario/1",
  "name": "minasyan-osin",
  "seed": 1,
  "groups": {
    "G": {"kind": "semidirect", "base": {"kind": "free", "rank": 2}, "permutation": [1, 0], "generator": "t"}
  },
  "families": {
    "T": {"group": "G", "atoms": ["b"], "powers": ["a"], "k": 8},
    "S": {"group": "G", "atoms": ["b", "t"], "powers": ["a"], "k": 8},
    "Tab": {"group": "G", "atoms": ["a", "b"]},
    "Sstd": {"group": "G", "standard": true}
  },
  "pairs": {
    "HG": {"group": "G", "subgroup": {"id": "H", "letters": ["a", "b"]}, "transversal": ["e", "t"]}
  },
  "maps": [
    {"id": "q", "kind": "projection", "pair": "HG"},
    {"id": "q_t", "kind": "induced", "map": "q", "g": "t"}
  ],
  "analyses": [
    {"id": "dist-H-T", "type": "distances", "side": {"family": "T", "k": 8},
     "elements": ["b", "b^2", "b^3", "b^4", "b^5", "b^6", "b^7", "b^8"],
     "expect": {"distances": {"b": 1, "b^2": 2, "b^3": 3, "b^4": 4, "b^5": 5, "b^6": 6, "b^7": 7, "b^8": 8}}},
    {"id": "dist-G-S", "type": "distances", "side": {"family": "S", "k": 8},
     "elements": ["b", "b^2", "b^3", "b^4", "b^5", "b^6", "b^7", "b^8"],
     "expect": {"distances": {"b": 1, "b^2": 2, "b^3": 3, "b^4": 3, "b^5": 3, "b^6": 3, "b^7": 3, "b^8": 3}}},
    {"id": "conjugation-by-t", "type": "distortion_table", "map": "q_t",
     "source": {"family": "T", "k": 8}, "target": {"family": "T", "k": 8},
     "elements": ["a", "a^2", "a^3", "a^4", "a^5", "a^6", "a^7", "a^8"],
     "expect": {"ratios": {"a": 1, "a^2": 2, "a^3": 3, "a^4": 4, "a^5": 5, "a^6": 6, "a^7": 7, "a^8": 8}}},
    {"id": "uniformity-T", "type": "uniformity", "map": "q", "target": {"family": "T", "k": 8},
     "levels": [2, 4, 8], "radius": 2,
     "expect": {"verdict": "non-uniform", "witness_g": "t", "witness.x": "e", "witness.source": 1,
                "witness.target": 8, "witness_ratio": {">=": 8}}},
    {"id": "uniformity-finite", "type": "uniformity", "map": "q", "target": "Tab", "radius": 2,
     "expect": {"verdict": "uniform-to-sample", "levels.0.fit.L": 1, "levels.0.fit.C": 0,
                "levels.0.quasi_action_k": 0}},
    {"id": "lemma-T", "type": "lemma", "map": "q", "source0": "Sstd", "target0": "Tab",
     "target": {"family": "T", "k": 8}, "L0": 1, "C0": 2, "L1": 8, "C1": 0,
     "expect": {"contains_s0": true, "lower.violations": 0, "upper.violations": 0}}
  ]
})json";

constexpr const char* kF2SemidirectZ2 = R"json({
  "schema": "conelab-scenario/1",
  "name": "f2-semidirect-z2",
  "seed": 1,
  "groups": {
    "G": {"kind": "semidirect", "base": {"kind": "free", "rank": 2}, "permutation": [1, 0], "generator": "t"}
  },
  "families": {
    "Tab": {"group": "G", "atoms": ["a", "b"]},
    "S": {"group": "G", "standard": true}
  },
  "collections": {
    "AB": {"group": "G", "members": [{"id": "A", "cyclic": "a"}, {"id": "B", "cyclic": "b"}]},
    "A0": {"group": "G", "members": [{"id": "A", "cyclic": "a"}]}
  },
  "pairs": {
    "HG": {"group": "G", "subgroup": {"id": "H", "letters": ["a", "b"]}, "transversal": ["e", "t"]}
  },
  "maps": [
    {"id": "q", "kind": "projection", "pair": "HG"},
    {"id": "incl", "kind": "inclusion", "pair": "HG"}
  ],
  "analyses": [
    {"id": "refine", "type": "refine", "side": "S", "collection": "AB", "radius": 6, "m": 4,
     "expect": {"refined": ["A"], "merges.0.member": "B", "merges.0.representative": "A",
                "merges.0.conjugator": "t"}},
    {"id": "invariance-AB", "type": "invariance", "pair": "HG", "collection": "AB", "radius": 6,
     "expect": {"holds": true}},
    {"id": "invariance-A", "type": "invariance", "pair": "HG", "collection": "A0", "radius": 6,
     "expect": {"holds": false, "witness": {"g": "t", "q": "A"}}},
    {"id": "inclusion-constants", "type": "qi_constants", "map": "incl", "source": "Tab", "target": "S",
     "radius": 6, "expect": {"fit.L": {"<=": 2}, "fit.C": {"<=": 2}}},
    {"id": "projection-constants", "type": "qi_constants", "map": "q", "source": "S", "target": "Tab",
     "radius": 6, "expect": {"fit.L": 1, "fit.C": 1, "density": 0}},
    {"id": "inclusion-relation", "type": "relation", "map": "incl", "source": "Tab", "P": "AB",
     "target": "S", "Q": "AB", "radius": 8,
     "expect": {"M": 1, "left_surjective": true, "right_surjective": true}},
    {"id": "transfer", "type": "transfer", "map": "q", "source": "S", "P": "AB", "target": "Tab", "Q": "AB",
     "refine_source": true, "invariance_pair": "HG", "reduced_radius": 6,
     "expect": {"certified": true, "source_used": ["A"], "target_used": ["A", "B"]}},
    {"id": "transfer-sabotaged", "type": "transfer", "map": "q", "source": "S", "P": "A0", "target": "Tab",
     "Q": "AB", "refine_source": true, "invariance_pair": "HG", "reduced_radius": 6,
     "expect": {"certified": false, "checks.4.name": "conjugation-invariance", "checks.4.passed": false,
                "checks.4.detail": "(t,A)"}}
  ]
})json";

// (B1*B2*B3) x| Z3, s cyclically permuting the factors.
constexpr const char* kFreeProductZn = R"json({
  "schema": "conelab-scenario/1",
  "name": "free-product-zn",
  "seed": 1,
  "groups": {
    "G": {"kind": "semidirect", "base": {"kind": "free_product", "factors": 3}, "permutation": [1, 2, 0],
          "generator": "s"}
  },
  "families": {
    "T": {"group": "G", "atoms": ["b1", "b2", "b3"]},
    "S": {"group": "G", "standard": true}
  },
  "collections": {
    "H": {"group": "G", "members": [{"id": "B1", "factor": 0}, {"id": "B2", "factor": 1}, {"id": "B3", "factor": 2}]},
    "HF": {"group": "G", "members": [{"id": "B1", "factor": 0}]}
  },
  "maps": [
    {"id": "retract", "kind": "retraction", "group": "G"},
    {"id": "section", "kind": "section", "group": "G"}
  ],
  "analyses": [
    {"id": "orbits", "type": "orbits", "collection": "H",
     "expect": {"verdict": "free", "representatives": ["B1"]}},
    {"id": "retraction-lipschitz", "type": "lipschitz", "map": "retract", "source": "S", "target": "T",
     "radius": 6, "samples": 1000, "seed": 7, "L": 1,
     "expect": {"violations": 0, "inverse_defect": {"<=": 1}}},
    {"id": "retraction-constants", "type": "qi_constants", "map": "retract", "source": "S", "target": "T",
     "radius": 4, "expect": {"fit.bounded": true}},
    {"id": "relation", "type": "relation", "map": "section", "source": "T", "P": "H", "target": "S", "Q": "HF",
     "radius": 6, "expect": {"M": {"<=": 1}, "left_surjective": true, "right_surjective": true}},
    {"id": "coned-delta", "type": "delta", "side": "T", "collection": "H", "radius": 3,
     "expect": {"delta": {"<=": 2}}},
    {"id": "transfer", "type": "transfer", "map": "retract", "source": "S", "P": "HF", "target": "T", "Q": "H",
     "qi_radius": 3, "relation_radius": 5, "reduced_radius": 3, "coned_radius": 3,
     "expect": {"certified": true}}
  ]
})json";

constexpr const char* kFreeGroupBaseline = R"json({
  "schema": "conelab-scenario/1",
  "name": "free-group-baseline",
  "seed": 1,
  "groups": {"F": {"kind": "free", "rank": 2}},
  "families": {"T": {"group": "F", "standard": true}},
  "collections": {
    "AB": {"group": "F", "members": [{"id": "A", "cyclic": "a"}, {"id": "B", "cyclic": "b"}]}
  },
  "maps": [{"id": "id", "kind": "identity", "group": "F"}],
  "analyses": [
    {"id": "ball", "type": "ball", "side": "T", "radius": 8, "check_letter_length": true,
     "expect": {"vertices": 13121, "letter_length_mismatches": 0}},
    {"id": "tree-delta", "type": "delta", "side": "T", "radius": 6, "expect": {"twice_delta": 0}},
    {"id": "coned-delta", "type": "delta", "side": "T", "collection": "AB", "radius": 5,
     "expect": {"delta": {"<=": 2}}},
    {"id": "fineness", "type": "fineness", "side": "T", "collection": "AB", "cone": "A", "radius": 8,
     "theta_max": 3, "expect": {"count": 7}},
    {"id": "identity-constants", "type": "qi_constants", "map": "id", "source": "T", "target": "T", "radius": 5,
     "expect": {"fit.L": 1, "fit.C": 0}},
    {"id": "identity-relation", "type": "relation", "map": "id", "source": "T", "P": "AB", "target": "T",
     "Q": "AB", "radius": 6, "expect": {"M": 0, "bijective": true}},
    {"id": "lemma", "type": "lemma", "map": "id", "source0": "T", "target0": "T", "target": "T", "L0": 1, "C0": 1,
     "expect": {"k0": 3, "contains_s0": true, "lower.violations": 0, "upper.violations": 0,
                "reestimated.L": 1, "reestimated.C": {"<=": 6}}},
    {"id": "transfer", "type": "transfer", "map": "id", "source": "T", "P": "AB", "target": "T", "Q": "AB",
     "expect": {"certified": true, "relation.bijective": true, "coned_source.delta": {"<=": 2}}}
  ]
})json";

constexpr const char* kZ2NegativeControl = R"json({
  "schema": "conelab-scenario/1",
  "name": "z2-negative-control",
  "seed": 1,
  "groups": {"Z": {"kind": "free_abelian", "rank": 2}},
  "families": {"T": {"group": "Z", "standard": true}},
  "collections": {"A": {"group": "Z", "members": [{"id": "A", "cyclic": "a"}]}},
  "maps": [{"id": "id", "kind": "identity", "group": "Z"}],
  "analyses": [
    {"id": "delta-growth", "type": "delta", "side": "T", "radii": [4, 8],
     "expect": {"strictly_increasing": true, "delta": {">=": 2}}},
    {"id": "fineness-r8", "type": "fineness", "side": "T", "collection": "A", "cone": "A", "radius": 8,
     "theta_max": 4, "expect": {"count": 15}},
    {"id": "fineness-r12", "type": "fineness", "side": "T", "collection": "A", "cone": "A", "radius": 12,
     "theta_max": 4, "expect": {"count": {">": 15}}},
    {"id": "transfer", "type": "transfer", "map": "id", "source": "T", "P": "A", "target": "T", "Q": "A",
     "theta_max": 4, "coned_radius": 6,
     "expect": {"certified": false, "coned_source.fineness_stable": false}}
  ]
})json";

const std::map<std::string, const char*>& table() {
  static const std::map<std::string, const char*> t{
      {"minasyan-osin", kMinasyanOsin},
      {"f2-semidirect-z2", kF2SemidirectZ2},
      {"free-product-zn", kFreeProductZn},
      {"free-group-baseline", kFreeGroupBaseline},
      {"z2-negative-control", kZ2NegativeControl},
  };
  return t;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"minasyan-osin", "f2-semidirect-z2", "free-product-zn", "free-group-baseline", "z2-negative-control"};
}

ScenarioConfig builtin_scenario(const std::string& name) {
  auto it = table().find(name);
  if (it == table().end()) throw ConfigError("unknown built-in scenario '" + name + "'");
  return ScenarioConfig::from_json(Json::parse(it->second));
}

}  // namespace conelab
