#include "conelab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "conelab/cayley.hpp"
#include "conelab/conedoff.hpp"
#include "conelab/qi.hpp"
#include "conelab/subgroup.hpp"

namespace conelab {

std::string to_string(ExitStatus s) {
  switch (s) {
    case ExitStatus::AllCertified: return "all-certified";
    case ExitStatus::ViolationsFound: return "violations-found";
    case ExitStatus::TruncationLimited: return "truncation-limited";
  }
  return "?";
}

int exit_code(ExitStatus s) { return static_cast<int>(s); }

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

std::int64_t get_int(const Json& j, const char* key, const std::string& where, std::optional<std::int64_t> def = {}) {
  if (!j.contains(key)) {
    if (def) return *def;
    fail(where, std::string("missing field '") + key + "'");
  }
  const auto& v = j.at(key);
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
  return v.get<std::int64_t>();
}

std::int64_t get_positive(const Json& j, const char* key, const std::string& where,
                          std::optional<std::int64_t> def = {}) {
  const auto v = get_int(j, key, where, def);
  if (v < 1) fail(where + "." + key, "must be >= 1");
  return v;
}

// Absent keys return def unchecked, so -1 can mean "use the default".
std::int64_t get_nonneg(const Json& j, const char* key, const std::string& where,
                        std::optional<std::int64_t> def = {}) {
  const auto v = get_int(j, key, where, def);
  if (j.contains(key) && v < 0) fail(where + "." + key, "must be >= 0");
  return v;
}

std::int32_t get_radius(const Json& j, const char* key, const std::string& where,
                        std::optional<std::int64_t> def = {}) {
  const auto r = get_int(j, key, where, def);
  if (r < 1 || r > 64) fail(where + "." + key, "radius must lie in 1..64");
  return static_cast<std::int32_t>(r);
}

std::uint64_t get_seed(const Json& j, const std::string& where) {
  const auto& v = field(j, "seed", where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    fail(where + ".seed", "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

bool get_bool(const Json& j, const char* key, const std::string& where, bool def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean()) fail(where + "." + key, "expected a boolean");
  return j.at(key).get<bool>();
}

std::string get_string(const Json& j, const char* key, const std::string& where,
                       std::optional<std::string> def = {}) {
  if (!j.contains(key)) {
    if (def) return *def;
    fail(where, std::string("missing field '") + key + "'");
  }
  if (!j.at(key).is_string()) fail(where + "." + key, "expected a string");
  return j.at(key).get<std::string>();
}

// L given as a number; it must be a multiple of 1/4.
std::int32_t get_quarters(const Json& j, const char* key, const std::string& where, double def) {
  double v = def;
  if (j.contains(key)) {
    if (!j.at(key).is_number()) fail(where + "." + key, "expected a number");
    v = j.at(key).get<double>();
  }
  const double q = v * 4.0;
  if (v < 1.0 || std::abs(q - std::round(q)) > 1e-9) fail(where + "." + key, "must be >= 1 and a multiple of 1/4");
  return static_cast<std::int32_t>(std::round(q));
}

Element parse_element(const Group& g, const Json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected an element string");
  try {
    return g.parse(v.get<std::string>());
  } catch (const GroupError& e) {
    fail(where, e.what());
  }
}

std::int32_t parse_letter(const Group& g, const Json& v, const std::string& where) {
  if (v.is_number_integer()) {
    const auto i = v.get<std::int32_t>();
    if (i < 0 || i >= g.letter_count()) fail(where, "letter index out of range");
    return i;
  }
  if (v.is_string())
    if (auto l = g.find_letter(v.get<std::string>())) return *l;
  fail(where, "unknown letter");
}

GroupSpec group_spec_from_json(const Json& j, const std::string& where) {
  const auto kind = get_string(j, "kind", where);
  GroupSpec spec;
  if (kind == "free") {
    spec = GroupSpec::free_group(static_cast<std::int32_t>(get_int(j, "rank", where)));
  } else if (kind == "free_abelian") {
    spec = GroupSpec::free_abelian(static_cast<std::int32_t>(get_int(j, "rank", where)));
  } else if (kind == "free_product") {
    spec = GroupSpec::free_product(static_cast<std::int32_t>(get_int(j, "factors", where)),
                                   static_cast<std::int32_t>(get_int(j, "factor_rank", where, 1)));
  } else if (kind == "semidirect") {
    auto base = group_spec_from_json(field(j, "base", where), where + ".base");
    const auto& perm = field(j, "permutation", where);
    if (!perm.is_array()) fail(where + ".permutation", "expected an array");
    std::vector<std::int32_t> p;
    for (const auto& x : perm) {
      if (!x.is_number_integer()) fail(where + ".permutation", "expected integers");
      p.push_back(x.get<std::int32_t>());
    }
    spec = GroupSpec::semidirect(std::move(base),
                                 FiniteActionSpec::cyclic_permutation(p, get_string(j, "generator", where, "t")));
  } else {
    fail(where + ".kind", "unknown group kind '" + kind + "'");
  }
  if (j.contains("letters")) {
    spec.letter_names.clear();
    for (const auto& n : j.at("letters")) {
      if (!n.is_string()) fail(where + ".letters", "expected strings");
      spec.letter_names.push_back(n.get<std::string>());
    }
  }
  return spec;
}

Group build_group(const Json& j, const std::string& where) {
  auto spec = group_spec_from_json(j, where);
  try {
    return Group::build(spec);
  } catch (const GroupError& e) {
    fail(where, e.what());
  }
}

struct FamilyRef {
  std::string group;
  GeneratorFamily family;
};

struct Context {
  std::map<std::string, Group> groups;
  std::map<std::string, FamilyRef> families;
  std::map<std::string, std::pair<std::string, Collection>> collections;
  std::map<std::string, FiniteIndexPair> pairs;
  std::map<std::string, QiMap> maps;
  std::size_t max_vertices = kDefaultVertexCap;
  std::uint64_t seed = 1;
  bool has_seed = false;

  const Group& group(const std::string& id, const std::string& where) const {
    auto it = groups.find(id);
    if (it == groups.end()) fail(where, "unknown group '" + id + "'");
    return it->second;
  }
  const FiniteIndexPair& pair(const std::string& id, const std::string& where) const {
    auto it = pairs.find(id);
    if (it == pairs.end()) fail(where, "unknown pair '" + id + "'");
    return it->second;
  }
  const QiMap& map(const std::string& id, const std::string& where) const {
    auto it = maps.find(id);
    if (it == maps.end()) fail(where, "unknown map '" + id + "'");
    return it->second;
  }
  /// {"family": id, "k": n} or a bare family id.
  Side side(const Json& j, const std::string& where) const {
    const auto id = j.is_string() ? j.get<std::string>() : get_string(j, "family", where);
    auto it = families.find(id);
    if (it == families.end()) fail(where, "unknown family '" + id + "'");
    const auto k = j.is_object() ? get_int(j, "k", where, it->second.family.k) : it->second.family.k;
    if (k < 1) fail(where + ".k", "k must be >= 1");
    return {group(it->second.group, where), it->second.family, static_cast<std::int32_t>(k)};
  }
  const Collection& collection(const std::string& id, const Group& g, const std::string& where) const {
    auto it = collections.find(id);
    if (it == collections.end()) fail(where, "unknown collection '" + id + "'");
    if (!(groups.at(it->second.first) == g)) fail(where, "collection '" + id + "' lives in another group");
    return it->second.second;
  }
};

GeneratorFamily family_from_json(const Group& g, const Json& j, const std::string& where) {
  if (get_bool(j, "standard", where, false)) {
    auto fam = GeneratorFamily::standard(g);
    fam.k = static_cast<std::int32_t>(get_int(j, "k", where, 1));
    return fam;
  }
  GeneratorFamily fam;
  auto list = [&](const char* key, std::vector<Element>& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_array()) fail(where + "." + key, "expected an array");
    for (std::size_t i = 0; i < j.at(key).size(); ++i)
      out.push_back(parse_element(g, j.at(key)[i], where + "." + key + "[" + std::to_string(i) + "]"));
  };
  list("atoms", fam.atoms);
  list("powers", fam.powers);
  if (j.contains("factors"))
    for (const auto& f : j.at("factors")) {
      if (!f.is_number_integer() || f.get<std::int32_t>() < 0 || f.get<std::int32_t>() >= g.factor_count())
        fail(where + ".factors", "factor index out of range");
      fam.factors.push_back(f.get<std::int32_t>());
    }
  fam.finite_elements = get_bool(j, "finite_elements", where, false);
  fam.symmetric = get_bool(j, "symmetric", where, true);
  fam.k = static_cast<std::int32_t>(get_int(j, "k", where, 1));
  if (fam.k < 1) fail(where + ".k", "k must be >= 1");
  if (fam.enumerate(g, 1).empty() && fam.is_finite()) fail(where, "empty generating family");
  return fam;
}

SubgroupSpec subgroup_from_json(const Group& g, const Json& j, const std::string& where) {
  const auto id = get_string(j, "id", where);
  if (j.contains("cyclic")) return SubgroupSpec::cyclic(id, parse_element(g, j.at("cyclic"), where + ".cyclic"));
  if (j.contains("factor")) {
    const auto f = get_int(j, "factor", where);
    if (f < 0 || f >= g.factor_count()) fail(where + ".factor", "factor index out of range");
    return SubgroupSpec::factor_subgroup(id, static_cast<std::int32_t>(f));
  }
  if (j.contains("letters")) {
    std::vector<std::int32_t> letters;
    for (const auto& l : j.at("letters")) letters.push_back(parse_letter(g, l, where + ".letters"));
    return SubgroupSpec::letter_subgroup(id, letters);
  }
  if (get_bool(j, "whole", where, false)) return SubgroupSpec::whole(id);
  fail(where, "subgroup needs one of cyclic, factor, letters, whole");
}

template <class F>
auto wrap(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const GroupError& e) {
    fail(where, e.what());
  }
}

QiMap build_map(const Context& c, const Json& j, const std::string& where) {
  const auto kind = get_string(j, "kind", where);
  if (kind == "identity") return identity_map(c.group(get_string(j, "group", where), where));
  if (kind == "projection") return finite_index_projection(c.pair(get_string(j, "pair", where), where));
  if (kind == "inclusion") return inclusion_map(c.pair(get_string(j, "pair", where), where));
  if (kind == "retraction" || kind == "section") {
    const auto& g = c.group(get_string(j, "group", where), where);
    auto r = wrap(where, [&] { return semidirect_retraction(g); });
    return kind == "retraction" ? r : r.quasi_inverse(QiKind::Inclusion, "section");
  }
  if (kind == "induced") {
    const auto& q = c.map(get_string(j, "map", where), where);
    return induced_map(q, parse_element(q.source(), field(j, "g", where), where + ".g"));
  }
  if (kind == "compose")
    return compose(c.map(get_string(j, "outer", where), where), c.map(get_string(j, "inner", where), where));
  fail(where + ".kind", "unknown map kind '" + kind + "'");
}

Context build_context(const Json& doc) {
  Context c;
  if (doc.contains("seed")) {
    c.seed = get_seed(doc, "config");
    c.has_seed = true;
  }
  if (doc.contains("max_vertices")) {
    const auto mv = get_int(doc, "max_vertices", "config");
    if (mv < 1) fail("max_vertices", "must be >= 1");
    c.max_vertices = static_cast<std::size_t>(mv);
  }
  auto section = [&](const char* key) -> const Json& {
    static const Json empty = Json::object();
    if (!doc.contains(key)) return empty;
    if (!doc.at(key).is_object()) fail(key, "expected an object keyed by id");
    return doc.at(key);
  };
  for (const auto& [id, j] : section("groups").items()) c.groups.emplace(id, build_group(j, "groups." + id));
  for (const auto& [id, j] : section("families").items()) {
    const auto where = "families." + id;
    const auto gid = get_string(j, "group", where);
    const auto& g = c.group(gid, where);
    c.families.emplace(id, FamilyRef{gid, wrap(where, [&] { return family_from_json(g, j, where); })});
  }
  for (const auto& [id, j] : section("collections").items()) {
    const auto where = "collections." + id;
    const auto gid = get_string(j, "group", where);
    const auto& g = c.group(gid, where);
    std::vector<SubgroupSpec> specs;
    const auto& members = field(j, "members", where);
    if (!members.is_array()) fail(where + ".members", "expected an array");
    for (std::size_t i = 0; i < members.size(); ++i)
      specs.push_back(subgroup_from_json(g, members[i], where + ".members[" + std::to_string(i) + "]"));
    c.collections.emplace(id, std::pair{gid, wrap(where, [&] { return Collection(g, specs); })});
  }
  for (const auto& [id, j] : section("pairs").items()) {
    const auto where = "pairs." + id;
    const auto& g = c.group(get_string(j, "group", where), where);
    const auto spec = subgroup_from_json(g, field(j, "subgroup", where), where + ".subgroup");
    std::vector<Element> transversal;
    for (const auto& t : field(j, "transversal", where))
      transversal.push_back(parse_element(g, t, where + ".transversal"));
    c.pairs.emplace(id, wrap(where, [&] { return FiniteIndexPair(g, Subgroup(g, spec), transversal); }));
  }
  // Maps may refer to earlier maps, so they are declared as an ordered list.
  if (doc.contains("maps")) {
    const auto& maps = doc.at("maps");
    if (!maps.is_array()) fail("maps", "expected an array of {id, kind, ...}");
    for (std::size_t i = 0; i < maps.size(); ++i) {
      const auto where = "maps[" + std::to_string(i) + "]";
      const auto id = get_string(maps[i], "id", where);
      if (c.maps.contains(id)) fail(where, "duplicate map id '" + id + "'");
      c.maps.emplace(id, build_map(c, maps[i], where));
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Result helpers

Json witness_json(const Group& g, const PairWitness& w) {
  return Json{{"x", g.to_string(w.x)}, {"y", g.to_string(w.y)}, {"source", w.source}, {"target", w.target}};
}

Json opt_witness(const Group& g, const std::optional<PairWitness>& w) {
  return w ? witness_json(g, *w) : Json(nullptr);
}

Json fit_json(const Group& g, const QiFit& f) {
  Json j;
  j["bounded"] = f.bounded;
  if (f.bounded) {
    j["L"] = f.L();
    j["C"] = f.c;
    j["l_witness"] = opt_witness(g, f.l_witness);
    j["c_witness"] = opt_witness(g, f.c_witness);
  } else {
    j["witness"] = opt_witness(g, f.unbounded_witness);
  }
  return j;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Json ids_json(const Collection& c) { return Json(c.ids()); }

struct Run {
  const Json& spec;
  const Context& ctx;
  std::string where;
  AnalysisOutcome* out;  ///< null: validate only
  std::string intrinsic = "certified";
};

using Analysis = std::function<void(Run&)>;

void analysis_ball(Run& r) {
  const auto side = r.ctx.side(field(r.spec, "side", r.where), r.where + ".side");
  const auto radius = get_radius(r.spec, "radius", r.where);
  const bool check = get_bool(r.spec, "check_letter_length", r.where, false);
  if (!r.out) return;
  const auto ball = build_ball(side.group, side.family, side.k, radius, {}, r.ctx.max_vertices);
  auto& res = r.out->result;
  res["radius"] = radius;
  res["vertices"] = ball.size();
  res["edges"] = ball.edge_count();
  if (check) {
    std::size_t bad = 0;
    for (std::size_t i = 0; i < ball.size(); ++i)
      if (ball.vertices[i].letter_length() != ball.dist[i]) ++bad;
    res["letter_length_mismatches"] = bad;
    if (bad) r.intrinsic = "violation";
  }
  r.out->headline = std::to_string(ball.size()) + " vertices, " + std::to_string(ball.edge_count()) + " edges";
}

void analysis_distances(Run& r) {
  const auto side = r.ctx.side(field(r.spec, "side", r.where), r.where + ".side");
  const auto from = parse_element(side.group, r.spec.value("from", Json("e")), r.where + ".from");
  std::vector<Element> xs;
  for (const auto& e : field(r.spec, "elements", r.where)) xs.push_back(parse_element(side.group, e, r.where));
  if (!r.out) return;
  const WordMetric m(side.group, side.generators());
  Json d = Json::object();
  std::string head;
  for (const auto& x : xs) {
    const auto v = m.distance(from, x);
    d[side.group.to_string(x)] = v;
    head += (head.empty() ? "" : " ") + std::to_string(v);
  }
  r.out->result["from"] = side.group.to_string(from);
  r.out->result["k"] = side.k;
  r.out->result["distances"] = d;
  r.out->headline = "d = " + head;
}

DeltaOptions delta_options(Run& r) {
  DeltaOptions o;
  const auto mode = get_string(r.spec, "mode", r.where, "exhaustive");
  if (mode == "sampled") {
    o.mode = DeltaMode::Sampled;
    if (!r.spec.contains("seed") && !r.ctx.has_seed) fail(r.where, "sampled mode needs a seed");
    o.seed = r.spec.contains("seed") ? get_seed(r.spec, r.where) : r.ctx.seed;
    o.samples = static_cast<std::uint64_t>(get_positive(r.spec, "samples", r.where, 200000));
  } else if (mode != "exhaustive") {
    fail(r.where + ".mode", "expected exhaustive or sampled");
  }
  if (r.spec.contains("max_tuples")) o.max_tuples = static_cast<std::uint64_t>(get_positive(r.spec, "max_tuples", r.where));
  return o;
}

void analysis_delta(Run& r) {
  const auto side = r.ctx.side(field(r.spec, "side", r.where), r.where + ".side");
  const Collection* coll = nullptr;
  if (r.spec.contains("collection"))
    coll = &r.ctx.collection(get_string(r.spec, "collection", r.where), side.group, r.where);
  std::vector<std::int32_t> radii;
  if (r.spec.contains("radii")) {
    if (!r.spec.at("radii").is_array() || r.spec.at("radii").empty()) fail(r.where + ".radii", "expected a non-empty array");
    for (std::size_t i = 0; i < r.spec.at("radii").size(); ++i) {
      const Json one{{"r", r.spec.at("radii")[i]}};
      radii.push_back(get_radius(one, "r", r.where + ".radii"));
    }
  } else {
    radii.push_back(get_radius(r.spec, "radius", r.where));
  }
  const auto opt = delta_options(r);
  if (!r.out) return;
  Json runs = Json::array();
  std::vector<std::int64_t> twice;
  for (auto radius : radii) {
    auto ball = std::make_shared<const BallGraph>(
        build_ball(side.group, side.family, side.k, radius, {}, r.ctx.max_vertices));
    DeltaEstimate est;
    Json witness = Json::array();
    if (coll) {
      const auto cb = build_coned_off(ball, *coll);
      est = four_point_delta(cb.adj, opt);
      for (auto v : est.witness)
        if (v >= 0) witness.push_back(cb.vertex_label(v));
    } else {
      est = four_point_delta(ball->adj, opt);
      for (auto v : est.witness)
        if (v >= 0) witness.push_back(side.group.to_string(ball->vertices[v]));
    }
    twice.push_back(est.twice_delta);
    Json run{{"radius", radius},  {"vertices", est.vertices},       {"blocks", est.blocks},
             {"tuples", est.tuples}, {"twice_delta", est.twice_delta}, {"delta", est.delta()},
             {"witness", witness}};
    if (est.largest_component_only) run["largest_component_only"] = true;
    runs.push_back(run);
  }
  auto& res = r.out->result;
  res["mode"] = opt.mode == DeltaMode::Exhaustive ? "exhaustive" : "sampled";
  if (opt.mode == DeltaMode::Sampled) {
    res["seed"] = opt.seed;
    res["samples"] = opt.samples;
  }
  if (coll) res["collection"] = ids_json(*coll);
  res["runs"] = runs;
  res["twice_delta"] = twice.back();
  res["delta"] = static_cast<double>(twice.back()) / 2.0;
  if (twice.size() > 1) {
    bool inc = true;
    for (std::size_t i = 1; i < twice.size(); ++i) inc = inc && twice[i] > twice[i - 1];
    res["strictly_increasing"] = inc;
  }
  std::string head = "delta";
  for (std::size_t i = 0; i < radii.size(); ++i)
    head += " r" + std::to_string(radii[i]) + "=" + fmt(static_cast<double>(twice[i]) / 2.0);
  r.out->headline = head;
}

void analysis_fineness(Run& r) {
  const auto side = r.ctx.side(field(r.spec, "side", r.where), r.where + ".side");
  const auto& coll = r.ctx.collection(get_string(r.spec, "collection", r.where), side.group, r.where);
  const auto cone = get_string(r.spec, "cone", r.where);
  if (!coll.find(cone)) fail(r.where + ".cone", "no member '" + cone + "'");
  const auto at = parse_element(side.group, r.spec.value("at", Json("e")), r.where + ".at");
  const auto nb = parse_element(side.group, r.spec.value("neighbor", Json(side.group.to_string(at))),
                                r.where + ".neighbor");
  const auto radius = get_radius(r.spec, "radius", r.where);
  const auto theta = get_radius(r.spec, "theta_max", r.where, 3);
  if (!r.out) return;
  auto ball = std::make_shared<const BallGraph>(
      build_ball(side.group, side.family, side.k, radius, {}, r.ctx.max_vertices));
  const auto cb = build_coned_off(ball, coll);
  const auto v = cb.cone_of(at, cone);
  const auto x = ball->find(nb);
  if (!v || !x) fail(r.where, "cone or neighbor lies outside the ball");
  const auto prof = fineness_profile(cb, *v, theta, std::vector<std::int32_t>{*x});
  Json counts = Json::array();
  for (const auto& c : prof.counts) counts.push_back({{"theta", c.theta}, {"count", c.count}, {"exact", c.exact}});
  const auto* last = prof.at(*x, theta);
  auto& res = r.out->result;
  res["cone"] = cb.vertex_label(*v);
  res["neighbor"] = side.group.to_string(nb);
  res["radius"] = radius;
  res["counts"] = counts;
  res["count"] = last->count;
  res["exact"] = last->exact;
  if (!last->exact) r.intrinsic = "truncation-limited";
  r.out->headline = "count " + std::to_string(last->count) + " at theta " + std::to_string(theta) +
                    (last->exact ? " (exact)" : " (lower bound)");
}

void analysis_refine(Run& r) {
  const auto side = r.ctx.side(field(r.spec, "side", r.where), r.where + ".side");
  const auto& coll = r.ctx.collection(get_string(r.spec, "collection", r.where), side.group, r.where);
  const auto radius = get_radius(r.spec, "radius", r.where);
  const auto m = get_radius(r.spec, "m", r.where, 4);
  if (!r.out) return;
  const auto ball = build_ball(side.group, side.family, side.k, radius, {}, r.ctx.max_vertices);
  const auto ref = refine(ball, coll, m);
  Json merges = Json::array();
  for (const auto& mg : ref.merges)
    merges.push_back({{"member", mg.member},
                      {"representative", mg.representative},
                      {"conjugator", side.group.to_string(mg.conjugator)}});
  Json comm = Json::object();
  for (const auto& [id, est] : ref.commensurators) {
    Json extra = Json::array();
    for (const auto& e : est.extra) extra.push_back(side.group.to_string(e));
    comm[id] = {{"form", to_string(est.form)}, {"verdict", to_string(est.verdict)}, {"extra", extra}};
  }
  auto& res = r.out->result;
  res["refined"] = ids_json(ref.refined);
  res["merges"] = merges;
  res["commensurators"] = comm;
  res["truncation_limited"] = ref.truncation_limited;
  if (ref.truncation_limited) r.intrinsic = "truncation-limited";
  std::string head = "refined {";
  for (const auto& id : ref.refined.ids()) head += (head.back() == '{' ? "" : ",") + id;
  r.out->headline = head + "}";
}

void analysis_reduced(Run& r) {
  const auto side = r.ctx.side(field(r.spec, "side", r.where), r.where + ".side");
  const auto& coll = r.ctx.collection(get_string(r.spec, "collection", r.where), side.group, r.where);
  const auto radius = get_radius(r.spec, "radius", r.where);
  const auto m = get_radius(r.spec, "m", r.where, 4);
  if (!r.out) return;
  const auto ball = build_ball(side.group, side.family, side.k, radius, {}, r.ctx.max_vertices);
  const auto rc = is_reduced_check(ball, coll, m);
  auto& res = r.out->result;
  res["reduced"] = rc.reduced;
  if (!rc.reduced) {
    res["p"] = rc.p;
    res["q"] = rc.q;
    res["g"] = side.group.to_string(rc.g);
    r.intrinsic = "violation";
  }
  r.out->headline = rc.reduced ? "reduced" : "not reduced: " + rc.p + " ~ " + rc.q;
}

void analysis_invariance(Run& r) {
  const auto& pair = r.ctx.pair(get_string(r.spec, "pair", r.where), r.where);
  const auto& g = pair.group();
  const auto& coll = r.ctx.collection(get_string(r.spec, "collection", r.where), g, r.where);
  const auto radius = get_radius(r.spec, "radius", r.where);
  if (!r.out) return;
  const auto ball = build_ball(g, GeneratorFamily::standard(g), 1, radius, {}, r.ctx.max_vertices);
  const auto chk = conjugation_invariance_check(ball, pair, coll);
  Json entries = Json::array();
  Json witness = nullptr;
  for (const auto& e : chk.entries) {
    Json j{{"g", g.to_string(e.g)}, {"q", e.q}, {"covered", e.covered}};
    if (e.covered) {
      j["h"] = g.to_string(e.h);
      j["q_prime"] = e.q_prime;
    } else if (witness.is_null()) {
      witness = {{"g", g.to_string(e.g)}, {"q", e.q}};
    }
    entries.push_back(j);
  }
  auto& res = r.out->result;
  res["holds"] = chk.holds;
  res["witness"] = witness;
  res["entries"] = entries;
  if (!chk.holds) r.intrinsic = "violation";
  r.out->headline = chk.holds ? "invariant"
                              : "fails at (" + witness["g"].get<std::string>() + "," +
                                    witness["q"].get<std::string>() + ")";
}

void analysis_orbits(Run& r) {
  const auto id = get_string(r.spec, "collection", r.where);
  auto it = r.ctx.collections.find(id);
  if (it == r.ctx.collections.end()) fail(r.where, "unknown collection '" + id + "'");
  const auto& g = r.ctx.groups.at(it->second.first);
  if (!r.out) return;
  const auto orb = f_orbit_representatives(g, it->second.second);
  auto& res = r.out->result;
  res["representatives"] = ids_json(orb.representatives);
  res["verdict"] = to_string(orb.verdict);
  res["orbits"] = orb.orbits;
  r.out->headline = to_string(orb.verdict) + ", " + std::to_string(orb.representatives.size()) + " representatives";
}

void analysis_qi_constants(Run& r) {
  const auto& q = r.ctx.map(get_string(r.spec, "map", r.where), r.where);
  const auto src = r.ctx.side(field(r.spec, "source", r.where), r.where + ".source");
  const auto tgt = r.ctx.side(field(r.spec, "target", r.where), r.where + ".target");
  ScanOptions o;
  o.radius = get_radius(r.spec, "radius", r.where);
  o.margin = static_cast<std::int32_t>(get_nonneg(r.spec, "margin", r.where, -1));
  o.max_vertices = r.ctx.max_vertices;
  if (!r.out) return;
  const auto c = estimate_qi_constants(q, src, tgt, o);
  auto& res = r.out->result;
  res["map"] = q.label();
  res["radius"] = c.radius;
  res["margin"] = c.margin;
  res["pairs"] = c.pairs;
  res["fit"] = fit_json(tgt.group, c.fit);
  Json pareto = Json::array();
  for (const auto& [lq, cc] : c.fit.pareto) pareto.push_back({quarters(lq), cc});
  res["pareto"] = pareto;
  res["density"] = c.density;
  res["density_certified"] = c.density_certified;
  res["worst_ratio"] = opt_witness(tgt.group, c.worst_ratio);
  if (!c.fit.bounded) r.intrinsic = "violation";
  r.out->headline = c.fit.bounded ? "L=" + fmt(c.fit.L()) + " C=" + std::to_string(c.fit.c) +
                                        " density=" + std::to_string(c.density)
                                  : "unbounded distortion";
}

std::vector<Element> elements_of(const Group& g, const Json& j, const std::string& where) {
  std::vector<Element> out;
  if (!j.is_array()) fail(where, "expected an array of elements");
  for (const auto& e : j) out.push_back(parse_element(g, e, where));
  return out;
}

void analysis_uniformity(Run& r) {
  const auto& q = r.ctx.map(get_string(r.spec, "map", r.where), r.where);
  const auto tgt = r.ctx.side(field(r.spec, "target", r.where), r.where + ".target");
  std::vector<std::int32_t> levels;
  if (r.spec.contains("levels"))
    for (const auto& l : r.spec.at("levels")) {
      if (!l.is_number_integer() || l.get<std::int32_t>() < 1) fail(r.where + ".levels", "levels must be >= 1");
      levels.push_back(l.get<std::int32_t>());
    }
  ScanOptions o;
  o.radius = get_radius(r.spec, "radius", r.where, 2);
  o.max_vertices = r.ctx.max_vertices;
  const auto gs = r.spec.contains("g_sample") ? elements_of(q.source(), r.spec.at("g_sample"), r.where + ".g_sample")
                                              : default_g_sample(q.source());
  if (!r.out) return;
  const auto rep = uniformity_report(q, gs, tgt, levels, o);
  const auto& g = q.target();
  Json lv = Json::array();
  for (const auto& l : rep.levels)
    lv.push_back({{"k", l.k},
                  {"fit", fit_json(g, l.fit)},
                  {"worst_g", q.source().to_string(l.worst_g)},
                  {"worst_ratio", l.worst_ratio},
                  {"worst", opt_witness(g, l.worst)},
                  {"quasi_action_k", l.quasi_action_k},
                  {"pairs", l.pairs}});
  auto& res = r.out->result;
  res["verdict"] = to_string(rep.verdict);
  res["g_sample"] = gs.size();
  res["witness_g"] = q.source().to_string(rep.witness_g);
  res["witness"] = opt_witness(g, rep.witness);
  res["witness_ratio"] = rep.witness_ratio;
  res["levels"] = lv;
  r.out->headline = to_string(rep.verdict) + ", worst g=" + q.source().to_string(rep.witness_g) +
                    " ratio " + fmt(rep.witness_ratio);
}

void analysis_distortion_table(Run& r) {
  const auto& base = r.ctx.map(get_string(r.spec, "map", r.where), r.where);
  const auto src = r.ctx.side(field(r.spec, "source", r.where), r.where + ".source");
  const auto tgt = r.ctx.side(field(r.spec, "target", r.where), r.where + ".target");
  const auto from = parse_element(src.group, r.spec.value("from", Json("e")), r.where + ".from");
  const auto xs = elements_of(src.group, field(r.spec, "elements", r.where), r.where + ".elements");
  if (!r.out) return;
  const WordMetric ms(src.group, src.generators()), mt(tgt.group, tgt.generators());
  Json rows = Json::array();
  Json ratios = Json::object();
  double worst = 0;
  for (const auto& x : xs) {
    const auto ds = ms.distance(from, x);
    const auto dt = mt.distance(base(from), base(x));
    const double ratio = ds ? static_cast<double>(dt) / static_cast<double>(ds) : 0.0;
    worst = std::max(worst, ratio);
    rows.push_back({{"x", src.group.to_string(x)}, {"qx", tgt.group.to_string(base(x))}, {"source", ds},
                    {"target", dt}, {"ratio", ratio}});
    ratios[src.group.to_string(x)] = ratio;
  }
  r.out->result["map"] = base.label();
  r.out->result["rows"] = rows;
  r.out->result["ratios"] = ratios;
  r.out->headline = "max ratio " + fmt(worst);
}

void analysis_lipschitz(Run& r) {
  const auto& q = r.ctx.map(get_string(r.spec, "map", r.where), r.where);
  const auto src = r.ctx.side(field(r.spec, "source", r.where), r.where + ".source");
  const auto tgt = r.ctx.side(field(r.spec, "target", r.where), r.where + ".target");
  const auto radius = get_radius(r.spec, "radius", r.where);
  const auto samples = get_positive(r.spec, "samples", r.where, 1000);
  const auto seed = r.spec.contains("seed") ? get_seed(r.spec, r.where) : r.ctx.seed;
  const auto lq = get_quarters(r.spec, "L", r.where, 1.0);
  if (!r.out) return;
  const auto ball = build_ball(src.group, src.family, src.k, radius, {}, r.ctx.max_vertices);
  const auto gens = src.generators();
  const WordMetric ms(src.group, gens), mt(tgt.group, tgt.generators());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pv(0, ball.size() - 1), pg(0, gens.size() - 1);
  std::int64_t violations = 0, defect = 0;
  Json witness = nullptr;
  for (std::int64_t i = 0; i < samples; ++i) {
    const auto& u = ball.vertices[pv(rng)];
    const auto v = src.group.multiply(u, gens[pg(rng)]);
    const auto ds = ms.distance(u, v);
    const auto dt = mt.distance(q(u), q(v));
    if (4 * dt > lq * ds) {
      if (!violations) witness = witness_json(src.group, {u, v, ds, dt});
      ++violations;
    }
    defect = std::max(defect, ms.distance(u, q.backward(q(u))));
  }
  auto& res = r.out->result;
  res["map"] = q.label();
  res["L"] = quarters(lq);
  res["samples"] = samples;
  res["seed"] = seed;
  res["violations"] = violations;
  res["witness"] = witness;
  res["inverse_defect"] = defect;
  if (violations) r.intrinsic = "violation";
  r.out->headline = std::to_string(violations) + " violations in " + std::to_string(samples) +
                    " adjacent pairs, inverse defect " + std::to_string(defect);
}

void analysis_lemma(Run& r) {
  const auto& q = r.ctx.map(get_string(r.spec, "map", r.where), r.where);
  const auto s0 = r.ctx.side(field(r.spec, "source0", r.where), r.where + ".source0");
  const auto t0 = r.ctx.side(field(r.spec, "target0", r.where), r.where + ".target0");
  const auto t = r.ctx.side(field(r.spec, "target", r.where), r.where + ".target");
  LemmaOptions o;
  o.l0_quarters = get_quarters(r.spec, "L0", r.where, 1.0);
  o.c0 = get_nonneg(r.spec, "C0", r.where, 0);
  o.l1_quarters = get_quarters(r.spec, "L1", r.where, 1.0);
  o.c1 = get_nonneg(r.spec, "C1", r.where, 0);
  o.pair_radius = get_radius(r.spec, "pair_radius", r.where, 2);
  o.check_radius = get_radius(r.spec, "check_radius", r.where, 6);
  o.reestimate_radius = get_radius(r.spec, "reestimate_radius", r.where, 3);
  if (!r.out) return;
  const auto& g = s0.group;
  auto& res = r.out->result;
  try {
    const auto lr = lemma_generating_set(q, s0, t0, t, o);
    Json missing = Json::array();
    for (const auto& m : lr.missing_s0) missing.push_back(g.to_string(m));
    res["k0"] = lr.k0;
    res["generators"] = lr.generators.size();
    res["contains_s0"] = lr.contains_s0;
    res["missing_s0"] = missing;
    res["base_fit"] = fit_json(t0.group, lr.base_fit);
    res["l_bar"] = lr.l_bar;
    res["lower"] = {{"pairs", lr.lower_pairs},
                    {"violations", lr.lower_violations},
                    {"coverage", lr.coverage},
                    {"witness", opt_witness(g, lr.lower_witness)}};
    res["upper"] = {{"steps", lr.upper_steps},
                    {"violations", lr.upper_violations},
                    {"max", lr.upper_max},
                    {"witness", opt_witness(g, lr.upper_witness)}};
    res["reestimated"] = fit_json(t.group, lr.reestimated.fit);
    const bool ok = lr.contains_s0 && lr.lower_violations == 0 && lr.upper_violations == 0;
    if (!ok) r.intrinsic = "violation";
    r.out->headline = "|S|=" + std::to_string(lr.generators.size()) + " K0=" + std::to_string(lr.k0) +
                      ", violations lower " + std::to_string(lr.lower_violations) +
                      " upper " + std::to_string(lr.upper_violations);
  } catch (const QiPreconditionFailed& e) {
    res["precondition"] = e.what();
    res["witness"] = witness_json(g, e.witness);
    r.intrinsic = "violation";
    r.out->headline = "precondition fails";
  }
}

RelationOptions relation_options(Run& r, const char* radius_key, const char* search_key) {
  RelationOptions o;
  o.radius = get_radius(r.spec, radius_key, r.where, 6);
  o.margin = static_cast<std::int32_t>(get_nonneg(r.spec, "margin", r.where, -1));
  o.search_radius = get_radius(r.spec, search_key, r.where, 3);
  if (r.spec.contains("m_bound")) o.m_bound = static_cast<std::int32_t>(get_nonneg(r.spec, "m_bound", r.where));
  o.max_vertices = r.ctx.max_vertices;
  return o;
}

Json relation_json(const CosetRelation& rel) {
  Json j;
  j["radius"] = rel.radius;
  j["margin"] = rel.margin;
  j["search_radius"] = rel.search_radius;
  j["M"] = rel.m ? Json(*rel.m) : Json(nullptr);
  j["established"] = rel.established;
  j["left_surjective"] = rel.left_surjective;
  j["right_surjective"] = rel.right_surjective;
  j["functional"] = rel.functional;
  j["injective"] = rel.injective;
  j["bijective"] = rel.bijective;
  j["source_cosets"] = rel.source_matches.size();
  j["target_cosets"] = rel.target_matches.size();
  j["pairs"] = rel.pairs.size();
  return j;
}

void analysis_relation(Run& r) {
  const auto& q = r.ctx.map(get_string(r.spec, "map", r.where), r.where);
  const auto src = r.ctx.side(field(r.spec, "source", r.where), r.where + ".source");
  const auto tgt = r.ctx.side(field(r.spec, "target", r.where), r.where + ".target");
  const auto& P = r.ctx.collection(get_string(r.spec, "P", r.where), src.group, r.where);
  const auto& Q = r.ctx.collection(get_string(r.spec, "Q", r.where), tgt.group, r.where);
  const auto o = relation_options(r, "radius", "search_radius");
  if (!r.out) return;
  const auto rel = coset_relation_dotq(q, src, P, tgt, Q, o);
  r.out->result = relation_json(rel);
  Json unmatched = Json::array();
  for (const auto& m : rel.source_matches)
    if (!m.partner && unmatched.size() < 5) unmatched.push_back(coset_label(src.group, P, m.coset));
  for (const auto& m : rel.target_matches)
    if (!m.partner && unmatched.size() < 5) unmatched.push_back(coset_label(tgt.group, Q, m.coset));
  r.out->result["unmatched"] = unmatched;
  if (!rel.established)
    r.intrinsic = "truncation-limited";
  else if (!rel.left_surjective || !rel.right_surjective)
    r.intrinsic = "violation";
  r.out->headline = (rel.m ? "M=" + std::to_string(*rel.m) : std::string("M unresolved")) +
                    (rel.bijective                                      ? ", bijective"
                     : rel.left_surjective && rel.right_surjective ? ", both projections surjective"
                                                                    : ", not surjective");
}

Json coned_json(const ConedSummary& s) {
  Json fin = Json::object();
  for (std::size_t i = 0; i < s.fineness.size(); ++i) {
    const auto& [id, c] = s.fineness[i];
    fin[id] = {{"count", c.count}, {"exact", c.exact}};
    if (i < s.fineness_wider.size()) fin[id]["count_wider"] = s.fineness_wider[i].second.count;
  }
  return {{"radius", s.radius}, {"delta", s.delta.delta()}, {"fineness", fin}, {"fineness_stable", s.fineness_stable}};
}

void analysis_transfer(Run& r) {
  const auto& q = r.ctx.map(get_string(r.spec, "map", r.where), r.where);
  const auto src = r.ctx.side(field(r.spec, "source", r.where), r.where + ".source");
  const auto tgt = r.ctx.side(field(r.spec, "target", r.where), r.where + ".target");
  const auto& P = r.ctx.collection(get_string(r.spec, "P", r.where), src.group, r.where);
  const auto& Q = r.ctx.collection(get_string(r.spec, "Q", r.where), tgt.group, r.where);
  TransferConfig cfg;
  cfg.qi_radius = get_radius(r.spec, "qi_radius", r.where, 4);
  cfg.relation = relation_options(r, "relation_radius", "search_radius");
  cfg.m = get_radius(r.spec, "m", r.where, 4);
  cfg.reduced_radius = get_radius(r.spec, "reduced_radius", r.where, 4);
  cfg.refine_source = get_bool(r.spec, "refine_source", r.where, false);
  if (r.spec.contains("invariance_pair"))
    cfg.invariance_pair = r.ctx.pair(get_string(r.spec, "invariance_pair", r.where), r.where);
  cfg.coned_radius = get_radius(r.spec, "coned_radius", r.where, 4);
  cfg.theta_max = get_radius(r.spec, "theta_max", r.where, 3);
  if (r.spec.contains("delta_bound")) {
    const auto& b = r.spec.at("delta_bound");
    if (!b.is_number() || b.get<double>() < 0) fail(r.where + ".delta_bound", "expected a non-negative number");
    cfg.delta_bound = b.get<double>();
  }
  cfg.delta = delta_options(r);
  if (!r.out) return;
  const auto rep = pair_transfer_report(q, src, P, tgt, Q, cfg);
  auto& res = r.out->result;
  res["certified"] = rep.certified;
  Json checks = Json::array();
  std::string failed;
  for (const auto& c : rep.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    if (!c.passed && failed.empty()) failed = c.name + (c.detail.empty() ? "" : " " + c.detail);
  }
  res["checks"] = checks;
  res["source_used"] = ids_json(rep.source_used);
  res["target_used"] = ids_json(rep.target_used);
  res["dropped_finite"] = rep.dropped_finite;
  res["constants"] = fit_json(tgt.group, rep.constants.fit);
  res["relation"] = relation_json(rep.relation);
  res["coned_source"] = coned_json(rep.coned_source);
  res["coned_target"] = coned_json(rep.coned_target);
  if (!rep.certified) r.intrinsic = "violation";
  r.out->headline = rep.certified ? "all " + std::to_string(rep.checks.size()) + " checks pass" : "fails: " + failed;
}

const std::map<std::string, Analysis>& analyses() {
  static const std::map<std::string, Analysis> table{
      {"ball", analysis_ball},
      {"distances", analysis_distances},
      {"delta", analysis_delta},
      {"fineness", analysis_fineness},
      {"refine", analysis_refine},
      {"reduced", analysis_reduced},
      {"invariance", analysis_invariance},
      {"orbits", analysis_orbits},
      {"qi_constants", analysis_qi_constants},
      {"uniformity", analysis_uniformity},
      {"distortion_table", analysis_distortion_table},
      {"lipschitz", analysis_lipschitz},
      {"lemma", analysis_lemma},
      {"relation", analysis_relation},
      {"transfer", analysis_transfer},
  };
  return table;
}

// ---------------------------------------------------------------------------
// Expectations: {"path.to.field": value} or {"path": {"<=": value, ...}}.

const Json* lookup(const Json& j, const std::string& path) {
  const Json* cur = &j;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto dot = path.find('.', start);
    const auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (cur->is_object()) {
      if (!cur->contains(key)) return nullptr;
      cur = &cur->at(key);
    } else if (cur->is_array() && !key.empty() && std::ranges::all_of(key, ::isdigit)) {
      const auto i = std::stoul(key);
      if (i >= cur->size()) return nullptr;
      cur = &(*cur)[i];
    } else {
      return nullptr;
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return cur;
}

const std::vector<std::string> kOps{"==", "!=", "<", "<=", ">", ">=", "contains"};

bool is_op_object(const Json& v) {
  if (!v.is_object() || v.empty()) return false;
  for (const auto& [k, x] : v.items())
    if (std::ranges::find(kOps, k) == kOps.end()) return false;
  return true;
}

bool apply_op(const std::string& op, const Json& got, const Json& want) {
  if (op == "==") return got == want;
  if (op == "!=") return got != want;
  if (op == "contains") {
    if (got.is_array()) return std::ranges::find(got, want) != got.end();
    if (got.is_string() && want.is_string()) return got.get<std::string>().find(want.get<std::string>()) != std::string::npos;
    return false;
  }
  if (!got.is_number() || !want.is_number()) return false;
  const auto a = got.get<double>(), b = want.get<double>();
  if (op == "<") return a < b;
  if (op == "<=") return a <= b;
  if (op == ">") return a > b;
  return a >= b;
}

void validate_expect(const Json& expect, const std::string& where) {
  if (!expect.is_object()) fail(where, "expect must be an object keyed by result path");
  for (const auto& [path, want] : expect.items()) {
    if (path.empty()) fail(where, "empty result path");
    if (!want.is_object() || is_op_object(want)) continue;
    for (const auto& [k, x] : want.items())
      if (std::ranges::find(kOps, k) != kOps.end()) fail(where + "." + path, "operator '" + k + "' mixed with plain keys");
  }
}

std::vector<std::string> check_expect(const Json& result, const Json& expect) {
  std::vector<std::string> out;
  for (const auto& [path, want] : expect.items()) {
    const auto* got = lookup(result, path);
    if (!got) {
      out.push_back(path + ": missing from the result");
      continue;
    }
    if (is_op_object(want)) {
      for (const auto& [op, v] : want.items())
        if (!apply_op(op, *got, v)) out.push_back(path + ": expected " + op + " " + v.dump() + ", got " + got->dump());
    } else if (*got != want) {
      out.push_back(path + ": expected " + want.dump() + ", got " + got->dump());
    }
  }
  return out;
}

void for_each_analysis(const Json& doc, const std::function<void(const Json&, const std::string&)>& f) {
  const auto& list = field(doc, "analyses", "config");
  if (!list.is_array()) fail("analyses", "expected an array");
  for (std::size_t i = 0; i < list.size(); ++i) f(list[i], "analyses[" + std::to_string(i) + "]");
}

}  // namespace

Group group_from_json(const Json& j) { return build_group(j, "group"); }

ScenarioConfig ScenarioConfig::from_json(const Json& doc) {
  if (!doc.is_object()) fail("config", "expected a JSON object");
  const auto schema = get_string(doc, "schema", "config");
  if (schema != kConfigSchema) fail("schema", "unsupported schema '" + schema + "', expected " + kConfigSchema);
  ScenarioConfig cfg;
  cfg.doc = doc;
  cfg.name = get_string(doc, "name", "config");
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) fail("name", "must be a plain file stem");
  cfg.output_dir = get_string(doc, "output_dir", "config", "");
  const auto ctx = build_context(doc);
  cfg.seed = ctx.seed;
  cfg.max_vertices = ctx.max_vertices;
  std::set<std::string> ids;
  for_each_analysis(doc, [&](const Json& a, const std::string& where) {
    const auto id = get_string(a, "id", where);
    if (!ids.insert(id).second) fail(where, "duplicate analysis id '" + id + "'");
    const auto type = get_string(a, "type", where);
    auto it = analyses().find(type);
    if (it == analyses().end()) fail(where + ".type", "unknown analysis type '" + type + "'");
    if (a.contains("expect")) validate_expect(a.at("expect"), where + ".expect");
    Run run{a, ctx, where + " (" + id + ")", nullptr};
    it->second(run);
  });
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
  ScenarioReport rep;
  rep.name = config.name;
  const auto ctx = build_context(config.doc);
  rep.seed = ctx.seed;
  bool violation = false, truncated = false;
  for_each_analysis(config.doc, [&](const Json& a, const std::string& where) {
    AnalysisOutcome out;
    out.id = a.at("id").get<std::string>();
    out.type = a.at("type").get<std::string>();
    out.result = Json::object();
    Run run{a, ctx, where, &out};
    try {
      analyses().at(out.type)(run);
      out.verdict = run.intrinsic;
      if (a.contains("expect")) {
        out.expect = a.at("expect");
        out.mismatches = check_expect(out.result, out.expect);
        out.verdict = out.mismatches.empty() ? "certified" : "violation";
      }
    } catch (const VertexCapExceeded& e) {
      out.verdict = "truncation-limited";
      out.result["error"] = e.what();
      out.headline = "vertex cap reached";
    } catch (const TupleLimitExceeded& e) {
      out.verdict = "truncation-limited";
      out.result["error"] = e.what();
      out.headline = "tuple limit reached";
    } catch (const SearchLimitExceeded& e) {
      out.verdict = "truncation-limited";
      out.result["error"] = e.what();
      out.headline = "word length search limit reached";
    }
    violation = violation || out.verdict == "violation";
    truncated = truncated || out.verdict == "truncation-limited";
    rep.analyses.push_back(std::move(out));
  });
  rep.status = violation ? ExitStatus::ViolationsFound
               : truncated ? ExitStatus::TruncationLimited
                           : ExitStatus::AllCertified;
  return rep;
}

Json ScenarioReport::to_json() const {
  Json j;
  j["schema"] = kReportSchema;
  j["scenario"] = name;
  j["seed"] = seed;
  j["status"] = to_string(status);
  Json list = Json::array();
  std::map<std::string, int> counts;
  for (const auto& a : analyses) {
    Json x;
    x["id"] = a.id;
    x["type"] = a.type;
    x["verdict"] = a.verdict;
    x["headline"] = a.headline;
    if (!a.expect.is_null()) {
      x["expect"] = a.expect;
      x["mismatches"] = a.mismatches;
    }
    x["result"] = a.result;
    list.push_back(x);
    ++counts[a.verdict];
  }
  j["verdict_counts"] = counts;
  j["analyses"] = list;
  return j;
}

std::string ScenarioReport::summary() const {
  std::size_t wid = 2, wtype = 4, wverdict = 7;
  for (const auto& a : analyses) {
    wid = std::max(wid, a.id.size());
    wtype = std::max(wtype, a.type.size());
    wverdict = std::max(wverdict, a.verdict.size());
  }
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
  std::ostringstream os;
  os << "scenario " << name << " (seed " << seed << ")\n";
  os << pad("id", wid) << "  " << pad("type", wtype) << "  " << pad("verdict", wverdict) << "  result\n";
  for (const auto& a : analyses) {
    os << pad(a.id, wid) << "  " << pad(a.type, wtype) << "  " << pad(a.verdict, wverdict) << "  " << a.headline
       << "\n";
    for (const auto& m : a.mismatches) os << std::string(wid + 2, ' ') << "! " << m << "\n";
  }
  os << "status: " << to_string(status) << "\n";
  return os.str();
}

std::filesystem::path write_report(const ScenarioReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto json_path = dir / (report.name + ".json");
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw ConfigError("cannot write " + json_path.string());
  js << report.to_json().dump(2) << "\n";
  std::ofstream txt(dir / (report.name + ".txt"), std::ios::binary);
  if (!txt) throw ConfigError("cannot write " + (dir / (report.name + ".txt")).string());
  txt << report.summary();
  return json_path;
}

}  // namespace conelab
