// conelab: command-line driver for balls, coned-off graphs, four-point delta,
// fineness profiles, quasi-isometry-of-pairs reports and built-in scenarios.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conelab/cayley.hpp"
#include "conelab/conedoff.hpp"
#include "conelab/scenario.hpp"

using namespace conelab;
namespace fs = std::filesystem;

namespace {

constexpr int kUsageError = 3;

struct Globals {
  std::uint64_t seed = 1;
  std::size_t max_vertices = kDefaultVertexCap;
  std::string out;
};

struct GraphArgs {
  std::string group = "f2";
  std::vector<std::string> gens, powers, subgroups;
  std::int32_t k = 1;
  std::int32_t radius = 4;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, sep);)
    if (!part.empty()) out.push_back(part);
  return out;
}

Json semidirect_json(Json base, std::vector<int> perm, const char* gen) {
  return {{"kind", "semidirect"}, {"base", std::move(base)}, {"permutation", perm}, {"generator", gen}};
}

// Aliases, kind:n shorthands, inline JSON or @file.json.
Json group_json(const std::string& text) {
  static const std::map<std::string, Json> aliases{
      {"f2", {{"kind", "free"}, {"rank", 2}}},
      {"z2", {{"kind", "free_abelian"}, {"rank", 2}}},
      {"fp3", {{"kind", "free_product"}, {"factors", 3}}},
      {"f2z2", semidirect_json({{"kind", "free"}, {"rank", 2}}, {1, 0}, "t")},
      {"fp3z3", semidirect_json({{"kind", "free_product"}, {"factors", 3}}, {1, 2, 0}, "s")},
  };
  if (auto it = aliases.find(text); it != aliases.end()) return it->second;
  if (!text.empty() && text[0] == '{') return Json::parse(text);
  if (!text.empty() && text[0] == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw ConfigError("cannot read " + text.substr(1));
    return Json::parse(in);
  }
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const auto kind = text.substr(0, colon);
    const auto n = std::stoi(text.substr(colon + 1));
    if (kind == "free") return {{"kind", "free"}, {"rank", n}};
    if (kind == "abelian") return {{"kind", "free_abelian"}, {"rank", n}};
    if (kind == "freeproduct") return {{"kind", "free_product"}, {"factors", n}};
  }
  throw ConfigError("unknown group '" + text + "' (try f2, z2, fp3, f2z2, fp3z3, free:N, abelian:N, freeproduct:N)");
}

Json family_json(const GraphArgs& a) {
  Json f{{"group", "G"}, {"k", a.k}};
  if (a.gens.empty() && a.powers.empty()) {
    f["standard"] = true;
  } else {
    f["atoms"] = a.gens;
    f["powers"] = a.powers;
  }
  return f;
}

// ID=word (cyclic), ID=factor:i, ID=letters:a,b, ID=whole.
Json subgroup_json(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("subgroup '" + text + "' is not ID=rule");
  const auto id = text.substr(0, eq);
  const auto rule = text.substr(eq + 1);
  if (rule.rfind("factor:", 0) == 0) return {{"id", id}, {"factor", std::stoi(rule.substr(7))}};
  if (rule.rfind("letters:", 0) == 0) return {{"id", id}, {"letters", split(rule.substr(8), ',')}};
  if (rule == "whole") return {{"id", id}, {"whole", true}};
  return {{"id", id}, {"cyclic", rule}};
}

// A one-group scenario document for the graph arguments.
Json base_doc(const GraphArgs& a, const Globals& g, const std::string& name) {
  Json doc{{"schema", kConfigSchema}, {"name", name}, {"seed", g.seed}, {"max_vertices", g.max_vertices}};
  doc["groups"] = {{"G", group_json(a.group)}};
  doc["families"] = {{"T", family_json(a)}};
  if (!a.subgroups.empty()) {
    Json members = Json::array();
    for (const auto& s : a.subgroups) members.push_back(subgroup_json(s));
    doc["collections"] = {{"P", {{"group", "G"}, {"members", members}}}};
  }
  return doc;
}

struct Built {
  Group group;
  GeneratorFamily family;
  std::shared_ptr<const BallGraph> ball;
  std::optional<ConedOffBall> coned;
};

// Resolves the arguments through the scenario loader so the CLI and configs agree.
Built build_graph(const GraphArgs& a, const Globals& g) {
  auto doc = base_doc(a, g, "cli");
  doc["analyses"] = Json::array();
  const auto cfg = ScenarioConfig::from_json(doc);
  Built b{group_from_json(cfg.doc["groups"]["G"]), {}, nullptr, std::nullopt};
  Json fam = cfg.doc["families"]["T"];
  if (fam.value("standard", false)) {
    b.family = GeneratorFamily::standard(b.group);
  } else {
    for (const auto& x : fam["atoms"]) b.family.atoms.push_back(b.group.parse(x.get<std::string>()));
    for (const auto& x : fam["powers"]) b.family.powers.push_back(b.group.parse(x.get<std::string>()));
  }
  b.family.k = a.k;
  b.ball = std::make_shared<const BallGraph>(build_ball(b.group, b.family, a.k, a.radius, {}, g.max_vertices));
  if (!a.subgroups.empty()) {
    std::vector<SubgroupSpec> specs;
    for (const auto& m : cfg.doc["collections"]["P"]["members"]) {
      const auto id = m["id"].get<std::string>();
      if (m.contains("factor"))
        specs.push_back(SubgroupSpec::factor_subgroup(id, m["factor"].get<std::int32_t>()));
      else if (m.contains("letters")) {
        std::vector<std::int32_t> letters;
        for (const auto& l : m["letters"]) letters.push_back(*b.group.find_letter(l.get<std::string>()));
        specs.push_back(SubgroupSpec::letter_subgroup(id, letters));
      } else if (m.contains("whole"))
        specs.push_back(SubgroupSpec::whole(id));
      else
        specs.push_back(SubgroupSpec::cyclic(id, b.group.parse(m["cyclic"].get<std::string>())));
    }
    b.coned = build_coned_off(b.ball, Collection(b.group, specs));
  }
  return b;
}

void add_graph_options(CLI::App* cmd, GraphArgs& a, bool subgroups) {
  cmd->add_option("-g,--group", a.group, "f2, z2, fp3, f2z2, fp3z3, free:N, abelian:N, freeproduct:N, JSON or @file")
      ->capture_default_str();
  cmd->add_option("--gens", a.gens, "generator words (default: standard generators)")->delimiter(',');
  cmd->add_option("--powers", a.powers, "elements whose powers up to k are generators")->delimiter(',');
  cmd->add_option("-k", a.k, "truncation level")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("-r,--radius", a.radius, "ball radius")->capture_default_str()->check(CLI::Range(1, 64));
  if (subgroups)
    cmd->add_option("-s,--subgroup", a.subgroups, "ID=word | ID=factor:i | ID=letters:a,b | ID=whole (repeatable)");
}

fs::path out_dir(const Globals& g, const std::string& fallback = "") {
  if (!g.out.empty()) return g.out;
  if (const char* env = std::getenv("CONELAB_OUT"); env && *env) return env;
  if (!fallback.empty()) return fallback;
  return ".";
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << text;
  if (!os) throw ConfigError("cannot write " + path.string());
}

int run_ball(const GraphArgs& a, const Globals& g) {
  const auto b = build_graph(a, g);
  std::vector<std::size_t> sphere(a.radius + 1, 0);
  for (auto d : b.ball->dist) ++sphere[d];
  std::cout << "vertices " << b.ball->size() << "\nedges " << b.ball->edge_count() << "\ngenerators "
            << b.ball->generators.size() << "\nspheres";
  for (auto s : sphere) std::cout << ' ' << s;
  std::cout << "\n";
  return 0;
}

int run_conedoff(const GraphArgs& a, const Globals& g, const std::string& from, const std::string& to) {
  if (a.subgroups.empty()) throw ConfigError("conedoff needs at least one --subgroup");
  const auto b = build_graph(a, g);
  const auto& cb = *b.coned;
  std::cout << "group_vertices " << cb.group_vertex_count() << "\ncones " << cb.cones.size() << "\nvertices "
            << cb.size() << "\n";
  std::size_t edges = 0;
  for (const auto& n : cb.adj) edges += n.size();
  std::cout << "edges " << edges / 2 << "\n";
  if (!from.empty() || !to.empty()) {
    const auto x = b.ball->find(b.group.parse(from.empty() ? "e" : from));
    const auto y = b.ball->find(b.group.parse(to.empty() ? "e" : to));
    if (!x || !y) throw ConfigError("--from/--to must lie in the ball");
    const auto d = coned_distance(cb, *x, *y);
    std::cout << "distance " << (d ? std::to_string(*d) : "unreachable") << "\n";
  }
  return 0;
}

int run_delta(const GraphArgs& a, const Globals& g, bool sampled, std::uint64_t samples, unsigned workers) {
  const auto b = build_graph(a, g);
  DeltaOptions o;
  o.mode = sampled ? DeltaMode::Sampled : DeltaMode::Exhaustive;
  o.seed = g.seed;
  o.samples = samples;
  o.workers = workers;
  const auto est = four_point_delta(b.coned ? b.coned->adj : b.ball->adj, o);
  auto label = [&](std::int32_t v) {
    return b.coned ? b.coned->vertex_label(v) : b.group.to_string(b.ball->vertices[v]);
  };
  std::cout << "mode " << (sampled ? "sampled" : "exhaustive") << "\n";
  if (sampled) std::cout << "seed " << o.seed << "\nsamples " << est.samples << "\n";
  std::cout << "vertices " << est.vertices << "\nblocks " << est.blocks << "\ntwice_delta " << est.twice_delta
            << "\ndelta " << est.delta() << "\nwitness";
  for (auto v : est.witness)
    if (v >= 0) std::cout << ' ' << label(v);
  std::cout << "\n";
  if (est.largest_component_only) std::cout << "note: graph is disconnected; largest component only\n";
  return 0;
}

int run_fineness(const GraphArgs& a, const Globals& g, std::string cone, const std::string& at,
                 const std::string& neighbor, std::int32_t theta, bool all_neighbors) {
  if (a.subgroups.empty()) throw ConfigError("fineness needs at least one --subgroup");
  const auto b = build_graph(a, g);
  const auto& cb = *b.coned;
  if (cone.empty()) cone = cb.collection[0].id();
  const auto v = cb.cone_of(b.group.parse(at), cone);
  if (!v) throw ConfigError("cone " + at + "*" + cone + " is not in the ball");
  std::optional<std::vector<std::int32_t>> nbs;
  if (!all_neighbors) {
    const auto x = b.ball->find(b.group.parse(neighbor.empty() ? at : neighbor));
    if (!x) throw ConfigError("neighbor is not in the ball");
    nbs = std::vector<std::int32_t>{*x};
  }
  const auto prof = fineness_profile(cb, *v, theta, nbs);
  std::ostringstream os;
  write_fineness_csv(cb, prof, os);
  if (!g.out.empty()) {
    const auto path = out_dir(g) / "fineness.csv";
    write_file(path, os.str());
    std::cerr << "wrote " << path.string() << "\n";
  } else {
    std::cout << os.str();
  }
  return 0;
}

int run_export(const GraphArgs& a, const Globals& g, const std::string& format, std::string path) {
  const auto b = build_graph(a, g);
  std::ostringstream os;
  if (format == "dot") {
    if (b.coned)
      write_dot(*b.coned, os);
    else
      write_dot(*b.ball, os);
  } else if (format == "csv") {
    if (b.coned) throw ConfigError("csv export covers plain balls; use 'fineness' for coned-off CSV");
    write_edge_csv(*b.ball, os);
  } else if (format == "vertices") {
    write_vertex_csv(*b.ball, os);
  } else {
    throw ConfigError("unknown format '" + format + "'");
  }
  if (path.empty()) path = (out_dir(g) / (std::string(b.coned ? "coned" : "ball") + "." +
                                          (format == "dot" ? "dot" : "csv"))).string();
  write_file(path, os.str());
  std::cout << path << "\n";
  return 0;
}

int finish(const ScenarioReport& rep, const Globals& g, const std::string& cfg_dir, bool quiet) {
  if (!quiet) std::cout << rep.summary();
  const auto path = write_report(rep, out_dir(g, cfg_dir.empty() ? "reports" : cfg_dir));
  std::cerr << "report " << path.string() << "\n";
  return exit_code(rep.status);
}

ScenarioConfig apply_globals(ScenarioConfig cfg, const Globals& g, bool seed_set, bool cap_set) {
  if (!seed_set && !cap_set) return cfg;
  auto doc = cfg.doc;
  if (seed_set) doc["seed"] = g.seed;
  if (cap_set) doc["max_vertices"] = g.max_vertices;
  return ScenarioConfig::from_json(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conelab: coned-off Cayley graphs and quasi-isometries of group pairs"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "seed for sampled analyses")->capture_default_str();
  auto* cap_opt =
      app.add_option("--max-vertices", g.max_vertices, "vertex cap for every ball")->capture_default_str();
  app.add_option("--out", g.out, "output directory (default: $CONELAB_OUT, then the config output_dir, then reports/ for scenarios and . otherwise)");

  GraphArgs ball_a, coned_a, delta_a, fine_a, export_a, qp_a;

  auto* ball = app.add_subcommand("ball", "Cayley ball statistics");
  add_graph_options(ball, ball_a, false);

  auto* coned = app.add_subcommand("conedoff", "coned-off ball statistics and distances");
  add_graph_options(coned, coned_a, true);
  std::string from, to;
  coned->add_option("--from", from, "distance source (default e)");
  coned->add_option("--to", to, "distance target");

  auto* delta = app.add_subcommand("delta", "Gromov four-point delta of a ball or coned-off ball");
  add_graph_options(delta, delta_a, true);
  bool sampled = false;
  std::uint64_t samples = 200000;
  unsigned workers = 0;
  delta->add_flag("--sampled", sampled, "sample 4-tuples instead of scanning all");
  delta->add_option("--samples", samples, "sample count")->capture_default_str();
  delta->add_option("--workers", workers, "worker threads (0: hardware)")->capture_default_str();

  auto* fine = app.add_subcommand("fineness", "angle counts at a cone vertex (CSV)");
  add_graph_options(fine, fine_a, true);
  std::string cone, at = "e", neighbor;
  std::int32_t theta = 3;
  bool all_neighbors = false;
  fine->add_option("--cone", cone, "subgroup id of the cone (default: first member)");
  fine->add_option("--at", at, "coset representative of the cone")->capture_default_str();
  fine->add_option("--neighbor", neighbor, "profiled neighbor (default: --at)");
  fine->add_option("--theta", theta, "theta_max")->capture_default_str()->check(CLI::Range(1, 64));
  fine->add_flag("--all", all_neighbors, "profile every neighbor of the cone in the ball");

  auto* qp = app.add_subcommand("qipairs", "quasi-isometry-of-pairs transfer report");
  add_graph_options(qp, qp_a, true);
  std::string qp_config;
  qp->add_option("--config", qp_config, "scenario file; runs its qi analyses instead of the identity report");

  auto* sc = app.add_subcommand("scenario", "run a built-in or configured scenario");
  std::string sc_name, sc_config;
  bool list = false, print = false, quiet = false;
  sc->add_option("name", sc_name, "built-in scenario name");
  sc->add_option("--config", sc_config, "scenario JSON file");
  sc->add_flag("--list", list, "list built-in scenarios");
  sc->add_flag("--print", print, "print the scenario config instead of running it");
  sc->add_flag("-q,--quiet", quiet, "do not print the summary table");

  auto* ex = app.add_subcommand("export", "write a ball or coned-off ball as DOT or CSV");
  add_graph_options(ex, export_a, true);
  std::string format = "dot", path;
  ex->add_option("-f,--format", format, "dot | csv (edge list) | vertices")->capture_default_str();
  ex->add_option("-p,--path", path, "output file (default: <out>/ball.<ext>)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }
  const bool seed_set = seed_opt->count() > 0, cap_set = cap_opt->count() > 0;

  try {
    if (*ball) return run_ball(ball_a, g);
    if (*coned) return run_conedoff(coned_a, g, from, to);
    if (*delta) return run_delta(delta_a, g, sampled, samples, workers);
    if (*fine) return run_fineness(fine_a, g, cone, at, neighbor, theta, all_neighbors);
    if (*ex) return run_export(export_a, g, format, path);
    if (*qp) {
      if (!qp_config.empty()) {
        auto cfg = apply_globals(ScenarioConfig::load(qp_config), g, seed_set, cap_set);
        auto doc = cfg.doc;
        Json kept = Json::array();
        for (const auto& a : doc["analyses"]) {
          const auto t = a["type"].get<std::string>();
          if (t == "transfer" || t == "relation" || t == "qi_constants" || t == "uniformity" || t == "lemma" ||
              t == "lipschitz" || t == "distortion_table")
            kept.push_back(a);
        }
        doc["analyses"] = kept;
        return finish(run_scenario(ScenarioConfig::from_json(doc)), g, cfg.output_dir, false);
      }
      if (qp_a.subgroups.empty()) throw ConfigError("qipairs needs --subgroup or --config");
      auto doc = base_doc(qp_a, g, "qipairs");
      doc["maps"] = Json::array({{{"id", "id"}, {"kind", "identity"}, {"group", "G"}}});
      doc["analyses"] = Json::array({{{"id", "transfer"},
                                      {"type", "transfer"},
                                      {"map", "id"},
                                      {"source", {{"family", "T"}, {"k", qp_a.k}}},
                                      {"P", "P"},
                                      {"target", {{"family", "T"}, {"k", qp_a.k}}},
                                      {"Q", "P"},
                                      {"qi_radius", qp_a.radius},
                                      {"relation_radius", qp_a.radius},
                                      {"coned_radius", qp_a.radius}}});
      return finish(run_scenario(ScenarioConfig::from_json(doc)), g, "", false);
    }
    if (*sc) {
      if (list) {
        for (const auto& n : builtin_names()) std::cout << n << "\n";
        return 0;
      }
      if (sc_name.empty() == sc_config.empty()) throw ConfigError("give a built-in name or --config, not both");
      auto cfg = sc_config.empty() ? builtin_scenario(sc_name) : ScenarioConfig::load(sc_config);
      cfg = apply_globals(std::move(cfg), g, seed_set, cap_set);
      if (print) {
        std::cout << cfg.doc.dump(2) << "\n";
        return 0;
      }
      return finish(run_scenario(cfg), g, cfg.output_dir, quiet);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const VertexCapExceeded& e) {
    std::cerr << "truncation limit: " << e.what() << "\n";
    return exit_code(ExitStatus::TruncationLimited);
  } catch (const GroupError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  }
  return 0;
}
