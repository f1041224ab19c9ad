#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "uvnet/estimate.hpp"
#include "uvnet/filters.hpp"
#include "uvnet/model_io.hpp"

namespace uvnet::cli {

namespace {

struct Options {
  std::string file;
  std::string vars;
  std::string query;
  std::string a;
  std::string b;
  std::string c;
  std::string mode = "pairwise";
  std::string figure;
  std::vector<std::string> evidence;
  std::uint64_t seed = 0;
  std::size_t samples = 50;
  std::string format = "text";
  std::string output;
  bool posterior = false;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Result of a command: text plus whether an empty posterior was reported.
struct Outcome {
  std::ostringstream text;
  bool empty = false;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::pair<std::string, Vector> split_evidence(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw UsageError("evidence '" + spec + "' must look like node=v1,v2");
  }
  const auto values = split_list(spec.substr(eq + 1));
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) {
    try {
      v(static_cast<Eigen::Index>(k)) = parse_number(values[k], 0);
    } catch (const ParseError&) {
      throw UsageError("evidence '" + spec + "' has an invalid number '" + values[k] + "'");
    }
  }
  return {spec.substr(0, eq), v};
}

std::string verdict_word(Verdict v) {
  switch (v) {
    case Verdict::True: return "yes";
    case Verdict::False: return "no";
    case Verdict::SampledTrue: return "yes (sampled)";
  }
  return "unknown";
}

NodeId resolve_node(const Dag& g, const std::map<NodeId, VariableSignature>& vars, const std::string& token) {
  NodeId id = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), id);
  if (res.ec == std::errc() && res.ptr == token.data() + token.size() && g.has(id)) return id;
  for (const auto& [i, v] : vars)
    if (v.name == token) return i;
  throw UsageError("unknown node '" + token + "'");
}

NodeSet resolve_nodes(const NetworkFile& f, const std::string& list) {
  NodeSet out;
  for (const auto& t : split_list(list)) out.insert(resolve_node(f.dag, f.variables, t));
  return out;
}

// Command-line evidence merged with the file's; the file wins.
NodeEvidence network_evidence(const NetworkFile& f, const Options& o, std::ostream& err) {
  NodeEvidence out;
  for (const auto& spec : o.evidence) {
    auto [token, v] = split_evidence(spec);
    out[resolve_node(f.dag, f.variables, token)] = v;
  }
  for (const auto& [i, y] : f.evidence) {
    if (out.count(i)) err << "warning: evidence for node " << i << " from the file overrides the command line\n";
    out[i] = y;
  }
  return out;
}

Names resolve_names(const JointVariable& j, const std::string& list) {
  Names out;
  for (const auto& t : split_list(list)) {
    if (!j.has(t)) throw UsageError("unknown variable '" + t + "'");
    out.push_back(t);
  }
  return out;
}

// Uniform view of a model file as a joint plus, when available, a network.
struct Model {
  std::optional<NetworkFile> file;
  std::optional<UncertaintyNetwork> network;
  JointVariable joint;
};

Model load_model(const Options& o, std::ostream& err) {
  std::istringstream in(read_text_file(o.file));
  ModelFile m = read_model(in);
  if (auto* j = std::get_if<JointVariable>(&m)) return {std::nullopt, std::nullopt, *j};
  NetworkFile f = std::get<NetworkFile>(std::move(m));
  UncertaintyNetwork n = f.network();
  for (const auto& [i, v] : n.definiteness()) {
    if (v == Verdict::SampledTrue) {
      err << "warning: factor of node " << i << " was checked for definiteness by sampling only\n";
    }
  }
  JointVariable j = joint(n);
  return {std::move(f), std::move(n), std::move(j)};
}

// Variable names for a list of node ids or names.
Names model_names(const Model& m, const std::string& list) {
  if (!m.network) return resolve_names(m.joint, list);
  Names out;
  for (const auto& t : split_list(list)) out.push_back(m.file->variables.at(resolve_node(m.file->dag, m.file->variables, t)).name);
  return out;
}

std::string pt(double x, double y) { return "(" + format_number(x) + "," + format_number(y) + ")"; }

void dump_vertices(std::ostream& os, const Region& r, const std::string& label) {
  if (r.dim() != 2 || !r.is_polytopic()) {
    os << "# vertex dump skipped: region is not a planar polytope\n";
    return;
  }
  for (const auto& piece : polytope_pieces(r)) {
    const auto vs = polygon_vertices(piece);
    if (vs.empty()) continue;
    os << "vertices" << label;
    for (const auto& v : vs) os << ' ' << pt(v(0), v(1));
    os << '\n';
  }
}

// Polytopic regions lose redundant rows and empty pieces before printing.
Region tidy(const Region& r) {
  if (const auto* p = r.as<HPolytope>()) return Region::polytope(remove_redundancy(*p));
  if (const auto* u = r.as<PolytopeUnion>()) {
    std::vector<HPolytope> pieces;
    for (const auto& piece : u->pieces)
      if (is_empty(Region::polytope(piece)) != Verdict::True) pieces.push_back(remove_redundancy(piece));
    return Region::union_of(std::move(pieces), r.dim());
  }
  return r;
}

void emit_region(Outcome& out, const Region& region, const Options& o, const std::string& label = "") {
  if (is_empty(region, {o.seed, kDefaultSampleCount}) == Verdict::True) {
    out.text << "EMPTY\n";
    out.empty = true;
    return;
  }
  const Region r = tidy(region);
  write_region(out.text, r);
  if (o.format == "vertices") dump_vertices(out.text, r, label);
}

std::string interval(const Region& r) {
  if (is_empty(r) == Verdict::True) return "empty";
  const auto b = bounding_box(r);
  return "[" + format_number(b->lower(0)) + ", " + format_number(b->upper(0)) + "]";
}

// Commands ------------------------------------------------------------------------

void cmd_marginal(const Options& o, Outcome& out, std::ostream& err) {
  const Model m = load_model(o, err);
  const Names names = model_names(m, o.vars);
  if (names.empty()) throw UsageError("--vars needs at least one variable");
  emit_region(out, marginal(m.joint, names), o);
}

void cmd_condition(const Options& o, Outcome& out, std::ostream& err) {
  const Model m = load_model(o, err);
  Evidence ev;
  for (const auto& spec : o.evidence) {
    auto [token, v] = split_evidence(spec);
    ev[model_names(m, token).front()] = v;
  }
  if (m.file) {
    for (const auto& [i, y] : m.file->evidence) {
      const std::string& name = m.network->variable(i).name;
      if (ev.count(name)) err << "warning: evidence for node " << i << " from the file overrides the command line\n";
      ev[name] = y;
    }
  }
  if (ev.empty()) throw UsageError("condition needs --evidence");
  const JointVariable c = condition_joint(m.joint, ev);
  const Region r = o.vars.empty() ? c.uncertainty() : marginal(c, model_names(m, o.vars));
  emit_region(out, r, o);
}

void cmd_posterior(const Options& o, Outcome& out, std::ostream& err) {
  std::istringstream in(read_text_file(o.file));
  const NetworkFile f = read_network(in);
  const UncertaintyNetwork n = f.network();
  const NodeEvidence ev = network_evidence(f, o, err);
  NodeSet query = resolve_nodes(f, o.query);
  if (query.empty())
    for (NodeId i : n.dag().nodes())
      if (!ev.count(i)) query.insert(i);
  emit_region(out, network_posterior(n, ev, query), o);
}

void cmd_dsep(const Options& o, Outcome& out, std::ostream&) {
  std::istringstream in(read_text_file(o.file));
  const NetworkFile f = read_network(in);
  const DSepQuery q{resolve_nodes(f, o.a), resolve_nodes(f, o.b), resolve_nodes(f, o.c)};
  out.text << (d_separated(f.dag, q) ? "separated" : "connected") << '\n';
}

void cmd_independence(const Options& o, Outcome& out, std::ostream& err) {
  const Model m = load_model(o, err);
  const SampleOptions z{o.seed, o.samples};
  const SampleOptions sample{o.seed, kDefaultSampleCount};
  if (o.mode == "pairwise" || o.mode == "total") {
    out.text << "pairwise: " << verdict_word(pairwise_independent(m.joint, sample)) << '\n';
    if (o.mode == "total") out.text << "total: " << verdict_word(totally_independent(m.joint, sample)) << '\n';
  } else if (o.mode == "conditional") {
    const Verdict v = check_conditional_independence(m.joint, model_names(m, o.a), model_names(m, o.b),
                                                     model_names(m, o.c), z);
    out.text << "independent: " << verdict_word(v) << '\n';
  } else if (o.mode == "local") {
    if (!m.network) throw UsageError("--mode local needs a network file");
    for (const auto& [i, v] : verify_local_independence(*m.network, m.joint, z)) {
      out.text << "node " << i << ": " << verdict_word(v) << '\n';
    }
  } else if (o.mode == "global") {
    if (!m.network) throw UsageError("--mode global needs a network file");
    const DSepQuery q{resolve_nodes(*m.file, o.a), resolve_nodes(*m.file, o.b), resolve_nodes(*m.file, o.c)};
    const auto v = verify_global_independence(*m.network, m.joint, q, z);
    out.text << "global: " << (v ? verdict_word(*v) : "not-applicable") << '\n';
  } else {
    throw UsageError("unknown mode '" + o.mode + "'");
  }
}

void cmd_estimate(const Options& o, Outcome& out, std::ostream& err) {
  std::istringstream in(read_text_file(o.file));
  const NetworkFile f = read_network(in);
  const NodeEvidence ev = network_evidence(f, o, err);
  if (f.is_gaussian()) {
    out.text << format_estimate(point_estimate_gaussian(f.gaussian_network(), ev));
    if (o.posterior) err << "warning: Gaussian networks have no posterior set\n";
    return;
  }
  const UncertaintyNetwork n = f.network();
  const EstimateResult r = point_estimate_lp(n, ev);
  out.text << format_estimate(r);
  if (r.status == EstimateStatus::InfeasibleEvidence) out.empty = true;
  if (o.posterior) {
    out.text << "posterior\n";
    emit_region(out, posterior_set(n, ev), o);
  }
}

void cmd_filter(const Options& o, Outcome& out, std::ostream&) {
  std::istringstream in(read_text_file(o.file));
  const ScenarioFile s = read_scenario(in);
  const DynamicsModel d = build_tracking_model(s.scenario, s.motion, s.measurements.size());
  const FilterResult f = set_membership_filter(d, s.measurements);
  for (std::size_t t = 1; t <= f.posteriors.size(); ++t) {
    out.text << "step " << t << '\n';
    emit_region(out, f.posteriors[t - 1], o, " t=" + std::to_string(t));
  }
}

void figure_fig2(const Options& o, Outcome& out) {
  const Region d = Region::polytope(
      (Matrix(4, 2) << -1, -1, -1, 1, 1, -1, 1, 1).finished(), (Vector(4) << -2.5, 2.5, 2.5, 7.5).finished());
  const JointVariable j = otimes(Region::interval(0, 5), ConditionalMap({"x", 1}, {"y", 1}, d));
  out.text << "joint\n";
  write_region(out.text, j.uncertainty());
  dump_vertices(out.text, j.uncertainty(), "");
  out.text << "marginal x " << interval(marginal(j, {"x"})) << '\n';
  out.text << "marginal y " << interval(marginal(j, {"y"})) << '\n';
  out.text << "conditional y given x=1 " << interval(condition(j, {{"x", Vector::Constant(1, 1.0)}})) << '\n';
  out.text << "independent " << verdict_word(is_independent(j, {"x"}, {"y"}, {o.seed, kDefaultSampleCount}))
           << '\n';
}

void figure_fig4(const Options& o, Outcome& out) {
  NaiveBayesModel m{Region::full(2), {}};
  for (int k = 0; k < 3; ++k) m.observations.emplace_back(VariableSignature{"x", 2}, VariableSignature{"y", 2}, box_relation(2, 1.0));
  const UncertaintyNetwork n = star_network(m);
  NodeEvidence ev;
  const double readings[3][2] = {{0, 0}, {1, 0}, {5, 4}};
  for (int k = 0; k < 3; ++k) ev[k + 2] = (Vector(2) << readings[k][0], readings[k][1]).finished();
  const EstimateResult r = point_estimate_lp(n, ev);
  out.text << format_estimate(r);
  const Region post = posterior_set(n, ev);
  out.text << "posterior " << (is_empty(post) == Verdict::True ? "empty" : "nonempty") << '\n';
  if (o.format != "vertices") return;
  for (const auto& [i, y] : ev) {
    const double s = r.beta.at(i);
    out.text << "vertices reading=" << i;
    for (const auto& [dx, dy] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) out.text << ' ' << pt(y(0) + dx, y(1) + dy);
    out.text << '\n' << "vertices scaled=" << i;
    for (const auto& [dx, dy] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}})
      out.text << ' ' << pt(y(0) + s * dx, y(1) + s * dy);
    out.text << '\n';
  }
}

void figure_fig1b(const Options& o, Outcome& out) {
  Scenario s;
  s.world = Box((Vector(2) << 0, 0).finished(), (Vector(2) << 10, 4).finished());
  s.obstacles = {Box((Vector(2) << 4, 0).finished(), (Vector(2) << 6, 3).finished())};
  s.sensors = {{Vector::Zero(2), 3.0}, {Vector::Zero(2), 4.0}, {(Vector(2) << 10, 4).finished(), 5.0}};
  const std::vector<Vector> ys{(Vector(2) << 5, -0.5).finished(), (Vector(2) << 5, 1).finished(),
                               (Vector(2) << -5, -3).finished()};
  const Region post = naive_bayes_posterior(build_localization_scenario(s), ys);
  out.text << "components " << connected_components(post).size() << '\n';
  write_region(out.text, tidy(post));
  if (o.format == "vertices") dump_vertices(out.text, post, "");
}

void figure_thm3(const Options& o, Outcome& out) {
  const Region tet = Region::polytope((Matrix(4, 3) << 1, 1, 1, -1, -1, 1, -1, 1, -1, 1, -1, -1).finished(),
                                      (Vector(4) << 2, 0, 0, 0).finished());
  const JointVariable j({{"x1", 1}, {"x2", 1}, {"x3", 1}}, tet);
  const SampleOptions sample{o.seed, kDefaultSampleCount};
  out.text << "pairwise: " << verdict_word(pairwise_independent(j, sample)) << '\n';
  out.text << "total: " << verdict_word(totally_independent(j, sample)) << '\n';
}

void cmd_figures(const Options& o, Outcome& out, std::ostream&) {
  if (o.figure == "fig2") return figure_fig2(o, out);
  if (o.figure == "fig4") return figure_fig4(o, out);
  if (o.figure == "fig1b") return figure_fig1b(o, out);
  if (o.figure == "thm3") return figure_thm3(o, out);
  throw UsageError("unknown figure '" + o.figure + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Set-valued inference over uncertainty variables and networks", "uvnet"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--seed", o.seed, "Seed for sampled checks")->capture_default_str();
  app.add_option("--samples", o.samples, "Conditioning values drawn by sampled independence checks")
      ->capture_default_str();
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "vertices"}))->capture_default_str();
  app.add_option("-o,--output", o.output, "Write results to this file instead of standard output");

  using Command = void (*)(const Options&, Outcome&, std::ostream&);
  std::vector<std::pair<CLI::App*, Command>> commands;
  auto add = [&](const std::string& name, const std::string& help, Command fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    commands.emplace_back(sub, fn);
    return sub;
  };
  auto file_arg = [&](CLI::App* sub, const std::string& what) {
    sub->add_option("file", o.file, what)->required();
  };
  const std::string evidence_help = "Observation node=v1,v2 (repeatable); file evidence takes precedence";

  CLI::App* sub = add("marginal", "Project a joint or network onto variables", cmd_marginal);
  file_arg(sub, "Joint or network file");
  sub->add_option("--vars", o.vars, "Comma-separated variables or node ids")->required();

  sub = add("condition", "Slice a joint or network at observed values", cmd_condition);
  file_arg(sub, "Joint or network file");
  sub->add_option("--evidence", o.evidence, evidence_help);
  sub->add_option("--vars", o.vars, "Report only these variables");

  sub = add("posterior", "Posterior set of a network given evidence", cmd_posterior);
  file_arg(sub, "Network file");
  sub->add_option("--evidence", o.evidence, evidence_help);
  sub->add_option("--query", o.query, "Query nodes (default: every unobserved node)");

  sub = add("dsep", "Test d-separation of A and B given C", cmd_dsep);
  file_arg(sub, "Network file");
  sub->add_option("--a", o.a, "Node set A")->required();
  sub->add_option("--b", o.b, "Node set B")->required();
  sub->add_option("--c", o.c, "Node set C");

  sub = add("independence", "Independence checks on a joint or network", cmd_independence);
  file_arg(sub, "Joint or network file");
  sub->add_option("--mode", o.mode, "pairwise, total, conditional, local or global")
      ->check(CLI::IsMember({"pairwise", "total", "conditional", "local", "global"}))
      ->capture_default_str();
  sub->add_option("--a", o.a, "Variables A (conditional and global modes)");
  sub->add_option("--b", o.b, "Variables B (conditional and global modes)");
  sub->add_option("--c", o.c, "Conditioning variables C");

  sub = add("estimate", "Point estimate of the unobserved nodes", cmd_estimate);
  file_arg(sub, "Network file");
  sub->add_option("--evidence", o.evidence, evidence_help);
  sub->add_flag("--posterior", o.posterior, "Also print the posterior set");

  sub = add("filter", "Recursive set-membership filter on a scenario", cmd_filter);
  file_arg(sub, "Scenario file");

  sub = add("figures", "Reproduce a worked example", cmd_figures);
  sub->add_option("name", o.figure, "fig1b, fig2, fig4 or thm3")
      ->required()
      ->check(CLI::IsMember({"fig1b", "fig2", "fig4", "thm3"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Outcome result;
  try {
    for (const auto& [cmd, fn] : commands) {
      if (cmd->parsed()) fn(o, result, err);
    }
  } catch (const ParseError& e) {
    err << "error: " << o.file << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (o.output.empty()) {
    out << result.text.str();
  } else {
    std::ofstream file(o.output);
    if (!file) {
      err << "error: cannot write '" << o.output << "'\n";
      return kExitUsage;
    }
    file << result.text.str();
  }
  return result.empty ? kExitEmpty : kExitOk;
}

}  // namespace uvnet::cli
