// fracmax: build domains, evaluate operators, run checks and the acceptance
// suite. Exit 0 on pass or informative, 1 on a failed check, 2 on a
// configuration or runtime error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fracmax/fracmax.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fracmax;

namespace {

struct Param {
  std::string name;
  std::string fallback;  // empty: check default / unset
  std::string help;
};

const std::map<std::string, std::vector<Param>>& parameter_table() {
  static const std::vector<Param> grid{
      {"domain", "ball", "ball | square | interval | JSON descriptor | JSON file"},
      {"h", "1/128", "grid spacing"},
      {"u", "const:1", "const:c | affine | bump_a | bump_b | band:seed | singular:p,beta | csv:path"},
      {"policy", "lattice", "radius grid: lattice | uniform"},
      {"granularity", "0", "uniform radius step (0: h/2)"},
  };
  auto with = [](std::vector<Param> base, std::vector<Param> extra) {
    base.insert(base.end(), extra.begin(), extra.end());
    return base;
  };
  static const std::map<std::string, std::vector<Param>> t{
      {"maximal", with(grid, {{"alpha", "1", "fractional order"},
                              {"variant", "local", "local | restricted | global"},
                              {"beta", "24", "restriction factor for the restricted variant"},
                              {"r_cap", "3", "radius cap for the global variant"}})},
      {"spherical", with(grid, {{"alpha", "1", "fractional order"}})},
      {"cube", with(grid, {{"alpha", "1", "fractional order"}})},
      {"average", with(grid, {{"alpha", "1", "fractional order"},
                              {"t", "1/2", "scale in (0, 1)"},
                              {"rule", "cell_center", "ball rule: cell_center | coverage"}})},
      {"gradient", with(grid, {{"alpha", "1", "fractional order"},
                               {"t", "1/2", "scale in (0, 1)"},
                               {"form", "lp", "lp | sobolev | fd"}})},
      {"whitney", with(grid, {{"t", "1/2", "scale in (0, 1)"},
                              {"distances", "", "explicit backend: N x N distance CSV"},
                              {"weights", "", "explicit backend: weights CSV (weight,omega)"},
                              {"Q", "2", "explicit backend: measure exponent"}})},
      {"example", {{"name", "ball_singular", "ball_singular | rooms_corridors | cube_aniso | punctured"},
                   {"h", "", "grid spacing"},
                   {"p", "", "integrability exponent"},
                   {"pprime", "", "rooms_corridors: p'"},
                   {"beta", "", "ball_singular: singularity exponent"},
                   {"alpha", "", "fractional order"},
                   {"K", "", "number of rooms or shells"},
                   {"r", "", "punctured: radius exponent"},
                   {"profile", "", "cube_aniso: const:c | affine:a,b"}}},
      {"verify", {{"check", "", "check id (see --help of verify)"},
                  {"battery", "", "all | smooth | band | metric | single field spec"},
                  {"h", "", "grid spacing, or comma list for multi-resolution checks"},
                  {"alpha", "", "fractional order, or comma list for exact_identity"},
                  {"p", "", "integrability exponent"},
                  {"pprime", "", "rooms_corridors: p'"},
                  {"beta", "", "ball_singular: singularity exponent"},
                  {"t", "", "gradient_identities: scale"},
                  {"K", "", "rooms_corridors / punctured: count"},
                  {"r", "", "punctured: radius exponent"},
                  {"profile", "", "cube_aniso: profiles separated by ;"},
                  {"min_delta", "", "exact_identity: probe threshold"}}},
      {"suite", {{"only", "", "comma list of criterion numbers (default all)"}}},
  };
  return t;
}

const std::set<std::string> kChecks{"exact_identity", "gradient_identities", "pointwise_bounds", "exact_inequalities",
                                    "boundary_decay", "norm_bounds", "ball_singular", "rooms_corridors",
                                    "cube_aniso", "punctured", "whitney", "comparability", "upper_gradient",
                                    "weak_type", "hardy"};

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<double> numbers(const std::string& s) {
  std::vector<double> out;
  for (auto& part : split(s)) out.push_back(parse_number(part));
  return out;
}

/// Resolved string parameters: command line, then config file, then default.
struct Resolved {
  std::string subcommand;
  std::map<std::string, std::string> values;
  std::string out = ".";
  int threads = 1;

  bool has(const std::string& k) const { return values.count(k) && !values.at(k).empty(); }
  const std::string& str(const std::string& k) const { return values.at(k); }
  double num(const std::string& k) const { return parse_number(values.at(k)); }
  double num_or(const std::string& k, double d) const { return has(k) ? num(k) : d; }
  int integer_or(const std::string& k, int d) const {
    if (!has(k)) return d;
    double v = num(k);
    if (v != std::floor(v)) throw ConfigError(k + " must be an integer");
    return static_cast<int>(v);
  }
};

std::string config_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + config_string(e);
    return s;
  }
  if (v.is_object()) return v.dump();
  return v.dump();
}

void require_alpha(double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("alpha must be a finite number >= 0");
}
void require_t(double t) {
  if (!(t > 0.0 && t < 1.0)) throw ConfigError("t must lie in (0, 1)");
}
void require_h(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("h must be positive");
}

RadiusGrid radius_grid(const Resolved& r) {
  RadiusGrid rg;
  if (r.str("policy") == "lattice") rg.policy = RadiusPolicy::lattice;
  else if (r.str("policy") == "uniform") rg.policy = RadiusPolicy::uniform;
  else throw ConfigError("policy must be lattice or uniform");
  rg.granularity = r.num("granularity");
  if (!(rg.granularity >= 0.0)) throw ConfigError("granularity must be >= 0");
  return rg;
}

/// Checks every parameter the subcommand will use; nothing is computed.
void validate(const Resolved& r) {
  const std::string& s = r.subcommand;
  if (parameter_table().count(s) == 0) throw ConfigError("unknown subcommand '" + s + "'");
  if (r.values.count("domain")) {
    auto desc = domain_descriptor(r.str("domain"));
    make_shape(desc);
    require_h(r.num("h"));
    radius_grid(r);
    const std::string u = r.str("u");
    if (u.rfind("csv:", 0) == 0) {
      if (!fs::exists(u.substr(4))) throw ConfigError("field file not found: " + u.substr(4));
    } else {
      member_from_spec(u);
    }
  }
  if (s == "maximal" || s == "spherical" || s == "cube" || s == "average" || s == "gradient") require_alpha(r.num("alpha"));
  if (s == "average" || s == "gradient" || s == "whitney") require_t(r.num("t"));
  if (s == "maximal") {
    const auto& v = r.str("variant");
    if (v != "local" && v != "restricted" && v != "global") throw ConfigError("variant must be local, restricted or global");
    if (v == "restricted" && !(r.num("beta") >= 1.0)) throw ConfigError("beta must be >= 1");
    if (v == "global" && !(r.num("r_cap") > 0.0)) throw ConfigError("R_cap must be positive");
  }
  if (s == "average" && r.str("rule") != "cell_center" && r.str("rule") != "coverage")
    throw ConfigError("rule must be cell_center or coverage");
  if (s == "gradient") {
    const auto& f = r.str("form");
    if (f != "lp" && f != "sobolev" && f != "fd") throw ConfigError("form must be lp, sobolev or fd");
    if (f == "sobolev") {
      if (r.str("u").rfind("csv:", 0) == 0) throw ConfigError("the sobolev form needs an analytic field");
      if (!member_from_spec(r.str("u")).gradient) throw ConfigError("field has no analytic gradient");
    }
  }
  if (s == "whitney") {
    if (r.has("distances") != r.has("weights")) throw ConfigError("explicit backend needs both distances and weights");
    if (r.has("distances")) {
      if (!fs::exists(r.str("distances"))) throw ConfigError("distance file not found: " + r.str("distances"));
      if (!fs::exists(r.str("weights"))) throw ConfigError("weights file not found: " + r.str("weights"));
      if (!(r.num("Q") > 0.0)) throw ConfigError("Q must be positive");
    }
  }
  if (s == "example") {
    const auto& n = r.str("name");
    if (n != "ball_singular" && n != "rooms_corridors" && n != "cube_aniso" && n != "punctured")
      throw ConfigError("unknown example '" + n + "'");
    for (const char* k : {"h", "p", "pprime", "beta", "alpha", "r"})
      if (r.has(k)) r.num(k);
    if (r.has("h")) require_h(r.num("h"));
    r.integer_or("K", 0);
    if (r.has("profile")) parse_profile(r.str("profile"));
  }
  if (s == "verify") {
    if (!r.has("check")) throw ConfigError("verify needs --check");
    std::string c = r.str("check");
    if (c.rfind("refinement:", 0) == 0) {
      c = c.substr(11);
      if (c != "exact_identity" && c != "gradient_identities" && c != "pointwise_bounds")
        throw ConfigError("refinement supports exact_identity, gradient_identities and pointwise_bounds");
      if (!r.has("h") || numbers(r.str("h")).size() < 2) throw ConfigError("refinement needs at least two values of h");
    } else if (!kChecks.count(c)) {
      throw ConfigError("unknown check '" + c + "'");
    }
    if (r.has("battery")) battery_from_spec(r.str("battery"));
    if (r.has("h"))
      for (double h : numbers(r.str("h"))) require_h(h);
    if (r.has("alpha"))
      for (double a : numbers(r.str("alpha"))) require_alpha(a);
    for (const char* k : {"p", "pprime", "beta", "t", "r", "min_delta"})
      if (r.has(k)) r.num(k);
    if (r.has("t")) require_t(r.num("t"));
    r.integer_or("K", 0);
    if (r.has("profile"))
      for (auto& p : split(r.str("profile"), ';')) parse_profile(p);
  }
  if (s == "suite" && r.has("only"))
    for (double k : numbers(r.str("only")))
      if (k != std::floor(k) || k < 1 || k > 14) throw ConfigError("criteria are numbered 1 to 14");
}

json resolved_json(const Resolved& r) {
  json j;
  j["subcommand"] = r.subcommand;
  j["out"] = r.out;
  j["threads"] = r.threads;
  json p = json::object();
  for (const auto& [k, v] : r.values)
    if (!v.empty()) p[k] = v;
  j["parameters"] = p;
  return j;
}

DomainPtr grid_domain(const Resolved& r) { return build_domain(domain_descriptor(r.str("domain")), r.num("h")); }

json field_summary(const ScalarField& f) {
  std::size_t valid = 0, starved = 0, under = 0;
  for (auto c : f.domain->cells) {
    valid += f.valid(c);
    starved += (f.flags[c] & kRadiusStarved) != 0;
    under += (f.flags[c] & kUnderResolved) != 0;
  }
  return {{"max", f.max_value()}, {"valid_cells", valid}, {"radius_starved_cells", starved}, {"under_resolved_cells", under}};
}

void emit_field(const Resolved& r, const std::string& stem, const ScalarField& f) {
  fs::path dir(r.out);
  write_with(dir / (stem + ".csv"), [&](std::ostream& os) { f.write_csv(os); });
  json meta = resolved_json(r);
  meta["grid"] = f.header();
  meta["summary"] = field_summary(f);
  write_json(dir / (stem + ".json"), meta);
  std::cout << "wrote " << (dir / (stem + ".csv")).string() << "\n";
}

int run_operator(const Resolved& r) {
  auto dom = grid_domain(r);
  auto u = field_from_spec(dom, r.str("u"));
  auto rg = radius_grid(r);
  const std::string& s = r.subcommand;
  if (s == "maximal") {
    const double a = r.num("alpha");
    const auto& v = r.str("variant");
    ScalarField m = v == "local"        ? local_fractional_maximal(u, a, rg)
                    : v == "restricted" ? restricted_maximal(u, a, r.num("beta"), rg)
                                        : global_fractional_maximal(u, a, r.num("r_cap"), rg);
    emit_field(r, "maximal", m);
  } else if (s == "spherical") {
    emit_field(r, "spherical", local_spherical_maximal(u, r.num("alpha"), rg));
  } else if (s == "cube") {
    emit_field(r, "cube", cube_maximal(u, r.num("alpha")));
  } else if (s == "average") {
    auto rule = r.str("rule") == "coverage" ? BallRule::coverage : BallRule::cell_center;
    emit_field(r, "average", fractional_average(u, r.num("alpha"), r.num("t"), nullptr, rule));
  } else {
    const double a = r.num("alpha"), t = r.num("t");
    VectorField g;
    if (r.str("form") == "lp") g = analytic_gradient_uta_Lp_form(u, a, t);
    else if (r.str("form") == "sobolev") g = analytic_gradient_uta_Sobolev_form(u, member_from_spec(r.str("u")).gradient_on(dom), a, t);
    else g = fd_gradient(fractional_average(u, a, t));
    fs::path dir(r.out);
    write_with(dir / "gradient.csv", [&](std::ostream& os) { g.write_csv(os); });
    json meta = resolved_json(r);
    meta["grid"] = dom->metadata();
    meta["summary"] = field_summary(g.magnitude());
    write_json(dir / "gradient.json", meta);
    std::cout << "wrote " << (dir / "gradient.csv").string() << "\n";
  }
  return 0;
}

int run_whitney(const Resolved& r) {
  MetricMeasureSpace space;
  if (r.has("distances")) {
    std::ifstream d(r.str("distances")), w(r.str("weights"));
    space = MetricMeasureSpace::from_csv(d, w, r.num("Q"));
  } else {
    space = MetricMeasureSpace::from_grid(grid_domain(r));
  }
  auto cov = build_whitney(space, r.num("t"));
  auto pou = build_partition(space, cov);
  json j = resolved_json(r);
  j["space"] = {{"points", space.size()}, {"Q", space.Q}, {"c_l", space.c_l}, {"c_d", space.c_d}};
  j["cover"] = cov.to_json();
  j["partition"] = {{"nu", pou.nu},
                    {"L_bound", pou.L_bound},
                    {"L_emp", pou.L_emp},
                    {"sum_error", pou.sum_error},
                    {"lower_violations", pou.lower_violations},
                    {"range_violations", pou.range_violations},
                    {"lipschitz_pairs", pou.lipschitz_pairs},
                    {"certified", pou.certified}};
  fs::path path = fs::path(r.out) / "whitney.json";
  write_json(path, j);
  std::cout << "wrote " << path.string() << " (" << cov.size() << " balls, overlap " << cov.overlap << ")\n";
  const bool ok = cov.coverage == 1.0 && cov.sandwich_violations == 0 && cov.neighbor_violations == 0 &&
                  pou.sum_error <= 1e-10 && pou.lower_violations == 0;
  return ok ? 0 : 1;
}

int run_example(const Resolved& r) {
  const std::string& n = r.str("name");
  GeneratedExample g;
  if (n == "ball_singular") {
    g = gen_ball_singular(r.num_or("p", 2.0), r.num_or("beta", 0.5), r.num_or("h", 0x1p-7));
  } else if (n == "rooms_corridors") {
    g = gen_rooms_corridors(r.num_or("pprime", 2.5), r.num_or("p", 1.25), r.num_or("alpha", 1.5), r.integer_or("K", 3),
                            r.num_or("h", 0x1p-9));
  } else if (n == "cube_aniso") {
    g = gen_cube_aniso(parse_profile(r.has("profile") ? r.str("profile") : "const:1"), r.num_or("alpha", 1.5),
                       r.num_or("h", 0x1p-7));
  } else {
    g = gen_punctured(r.num_or("alpha", 0.5), r.num_or("r", 1.0), r.integer_or("K", 3), r.num_or("h", 0x1p-12));
  }
  fs::path dir(r.out);
  json j = resolved_json(r);
  j["example"] = {{"id", g.spec.id}, {"params", g.spec.params}, {"predictions", g.spec.predictions},
                  {"under_resolved", g.spec.under_resolved}};
  j["grid"] = g.domain->metadata();
  write_json(dir / "example.json", j);
  write_with(dir / "example_u.csv", [&](std::ostream& os) { g.u.write_csv(os); });
  write_with(dir / "example_delta.csv", [&](std::ostream& os) { g.domain->write_delta_csv(os); });
  std::cout << "wrote " << (dir / "example.json").string() << "\n";
  return 0;
}

std::vector<ExperimentReport> verify_reports(const Resolved& r) {
  std::string c = r.str("check");
  auto hs = r.has("h") ? numbers(r.str("h")) : std::vector<double>{};
  auto h1 = [&](double d) { return hs.empty() ? d : hs.front(); };
  auto hl = [&](std::vector<double> d) { return hs.empty() ? d : hs; };
  auto alphas = r.has("alpha") ? numbers(r.str("alpha")) : std::vector<double>{};
  auto a1 = [&](double d) { return alphas.empty() ? d : alphas.front(); };
  auto members = [&](const std::string& d) { return battery_from_spec(r.has("battery") ? r.str("battery") : d); };

  if (c.rfind("refinement:", 0) == 0) return {refinement_study(c.substr(11), hs)};
  if (c == "exact_identity")
    return {check_exact_identity(h1(0x1p-8), alphas.empty() ? std::vector<double>{0.5, 1.0, 1.5} : alphas,
                                 r.num_or("min_delta", 0.1))};
  if (c == "gradient_identities") {
    auto m = r.has("battery") ? battery_from_spec(r.str("battery")).front() : bump_a();
    return {check_gradient_identities(m, a1(1.0), r.num_or("t", 0.5), hl({0x1p-8, 0x1p-9}))};
  }
  if (c == "pointwise_bounds") {
    auto pr = check_pointwise_bounds(members("band"), a1(1.0), hl({0x1p-7, 0x1p-8}));
    return {pr.first, pr.second};
  }
  if (c == "exact_inequalities") return {check_exact_inequalities(members("all"), h1(0x1p-6))};
  if (c == "boundary_decay") return {check_boundary_decay(members("all"), a1(1.0), h1(0x1p-6))};
  if (c == "norm_bounds")
    return {check_norm_bounds(members("all"), OperatorParams(a1(0.5), r.num_or("p", 2.0), 2), hl({0x1p-6, 0x1p-7}))};
  if (c == "ball_singular") return {check_ball_singular(r.num_or("p", 2.0), r.num_or("beta", 0.5), h1(0x1p-9))};
  if (c == "rooms_corridors")
    return {check_rooms_corridors(r.num_or("pprime", 2.5), r.num_or("p", 1.25), a1(1.5), r.integer_or("K", 3), h1(0x1p-11))};
  if (c == "cube_aniso") {
    std::vector<std::string> profiles{"const:1", "affine:1,1"};
    if (r.has("profile")) profiles = split(r.str("profile"), ';');
    return {check_cube_aniso(profiles, a1(1.5), h1(0x1p-7))};
  }
  if (c == "punctured") return {check_punctured(a1(0.5), r.num_or("r", 1.0), r.integer_or("K", 6), h1(0x1p-22), 3)};

  MetricStudyOptions mo;
  if (!hs.empty()) mo.h_list = hs;
  mo.alpha = a1(1.0);
  auto levels = run_metric_study(members("all"), mo);
  if (c == "whitney") return {check_whitney_invariants(levels)};
  if (c == "comparability") return {check_comparability(levels, mo)};
  if (c == "upper_gradient") return {check_upper_gradient(levels, mo)};
  if (c == "weak_type") return {check_weak_type(levels, mo)};
  return {check_hardy(levels, r.num_or("p", 2.0), mo)};
}

int run_verify(const Resolved& r) {
  auto reports = verify_reports(r);
  fs::path dir(r.out);
  json arr = json::array();
  for (const auto& rep : reports) arr.push_back(rep.to_json());
  json j = resolved_json(r);
  j["reports"] = arr;
  write_json(dir / "report.json", j);
  write_with(dir / "report.csv", [&](std::ostream& os) { write_reports_csv(os, reports); });
  bool failed = false;
  for (const auto& rep : reports) {
    std::cout << rep.id << ": " << to_string(rep.verdict()) << "\n";
    for (const auto& c : rep.conditions)
      std::cout << "  " << (c.binding ? "" : "(info) ") << c.name << " = " << num(c.value) << " " << c.relation << " "
                << num(c.limit) << (c.holds() ? "" : "  <-- violated") << "\n";
    failed = failed || rep.verdict() == Verdict::fail;
  }
  return failed ? 1 : 0;
}

int run_suite_cmd(const Resolved& r) {
  SuiteOptions so;
  if (r.has("only"))
    for (double k : numbers(r.str("only"))) so.only.insert(static_cast<int>(k));
  auto results = run_suite(so, [](const CriterionResult& c) { std::cout << c.summary_line() << std::endl; });
  fs::path dir(r.out);
  write_json(dir / "suite.json", suite_to_json(results));
  std::vector<ExperimentReport> reps;
  for (const auto& c : results) reps.push_back(c.report);
  write_with(dir / "suite.csv", [&](std::ostream& os) { write_reports_csv(os, reps); });
  bool all = true;
  for (const auto& c : results) all = all && c.passed();
  std::cout << (all ? "suite: all criteria pass" : "suite: some criteria fail") << "\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional maximal operators on discretized domains"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  app.set_help_flag("--help", "print this help and exit");
  std::string config_path, out;
  int threads = 0;
  bool dry_run = false;
  app.add_option("--config", config_path, "JSON config; flags take precedence")->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory (default .)");
  app.add_option("--threads", threads, "worker count (default FRACMAX_THREADS or 1)")->check(CLI::NonNegativeNumber);
  app.add_flag("--dry-run", dry_run, "validate and print the resolved parameters without computing");

  std::map<std::string, std::map<std::string, std::string>> flag_values;
  std::map<std::string, std::map<std::string, CLI::Option*>> flag_opts;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, params] : parameter_table()) {
    auto* sub = app.add_subcommand(name, name == "verify" ? "run one check and write report.json / report.csv"
                                         : name == "suite" ? "run the acceptance criteria"
                                         : name == "example" ? "generate a closed-form example"
                                         : name == "whitney" ? "build a Whitney cover and partition of unity"
                                                             : "evaluate an operator on a grid field");
    sub->set_help_flag("--help", "print this help and exit");
    subs[name] = sub;
    for (const auto& p : params) {
      std::string help = p.help + (p.fallback.empty() ? "" : " [" + p.fallback + "]");
      flag_opts[name][p.name] = sub->add_option("--" + p.name, flag_values[name][p.name], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    json config = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      try {
        config = json::parse(in);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
      if (!config.is_object()) throw ConfigError("config must be a JSON object");
    }

    Resolved r;
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) r.subcommand = name;
    if (r.subcommand.empty()) {
      if (!config.contains("subcommand")) throw ConfigError("no subcommand given (flag or config key 'subcommand')");
      r.subcommand = config["subcommand"].get<std::string>();
      if (!parameter_table().count(r.subcommand)) throw ConfigError("unknown subcommand '" + r.subcommand + "'");
    }
    for (const auto& [key, _] : config.items()) {
      bool known = key == "subcommand" || key == "out" || key == "threads";
      for (const auto& p : parameter_table().at(r.subcommand)) known = known || p.name == key;
      if (!known) throw ConfigError("unknown config key '" + key + "' for " + r.subcommand);
    }
    for (const auto& p : parameter_table().at(r.subcommand)) {
      std::string v = p.fallback;
      if (config.contains(p.name)) v = config_string(config[p.name]);
      if (flag_opts[r.subcommand][p.name]->count() > 0) v = flag_values[r.subcommand][p.name];
      r.values[p.name] = v;
    }
    r.out = !out.empty() ? out : config.contains("out") ? config["out"].get<std::string>() : ".";
    r.threads = threads > 0 ? threads : config.contains("threads") ? config["threads"].get<int>() : worker_count();
    if (r.threads < 1) throw ConfigError("threads must be >= 1");

    validate(r);
    if (dry_run) {
      std::cout << resolved_json(r).dump(2) << "\n";
      return 0;
    }
    worker_count() = r.threads;

    const std::string& s = r.subcommand;
    if (s == "whitney") return run_whitney(r);
    if (s == "example") return run_example(r);
    if (s == "verify") return run_verify(r);
    if (s == "suite") return run_suite_cmd(r);
    return run_operator(r);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
