#include "uvnet/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace uvnet {

namespace {

bool is_network_keyword(const std::string& w) {
  return w == "nodes" || w == "edges" || w == "factor" || w == "evidence";
}

std::string first_word(const std::string& line) {
  const auto words = split_words(line);
  return words.empty() ? std::string() : words.front();
}

// Reads body lines until the next line whose first word satisfies `is_key`.
template <class Pred, class Fn>
void read_section(LineReader& r, Pred is_key, Fn on_line) {
  while (const std::string* next = r.peek()) {
    if (is_key(first_word(*next))) return;
    const std::string line = *r.next();
    on_line(split_words(line), r.line_number());
  }
}

NodeId parse_node(const std::string& token, std::size_t line) {
  NodeId v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw ParseError(line, "invalid node id '" + token + "'");
  }
  return v;
}

std::size_t parse_dim(const std::string& token, std::size_t line) {
  std::size_t v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size() || v == 0) {
    throw ParseError(line, "invalid dimension '" + token + "'");
  }
  return v;
}

Vector numbers_from(const std::vector<std::string>& words, std::size_t begin, std::size_t line) {
  Vector v(static_cast<Eigen::Index>(words.size() - begin));
  for (std::size_t k = begin; k < words.size(); ++k) v(static_cast<Eigen::Index>(k - begin)) = parse_number(words[k], line);
  return v;
}

Vector read_row(LineReader& r, std::size_t expected, const std::string& what) {
  const std::string line = r.expect(what);
  const auto values = parse_numbers(line, r.line_number());
  if (values.size() != expected) {
    throw ParseError(r.line_number(), what + ": expected " + std::to_string(expected) + " numbers, found " +
                                          std::to_string(values.size()));
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string join(const Vector& v) {
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k > 0) out += ' ';
    out += format_number(v(k));
  }
  return out;
}

NetworkFile read_network_from(LineReader& r) {
  NetworkFile f;
  NodeList nodes;
  std::vector<Edge> edges;
  bool have_nodes = false;
  bool have_dag = false;
  std::map<NodeId, std::size_t> factor_line;
  auto build_dag = [&](std::size_t line) {
    if (have_dag) return;
    if (!have_nodes) throw ParseError(line, "the nodes section must come first");
    try {
      f.dag = Dag(nodes, edges);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line, e.what());
    }
    have_dag = true;
  };
  auto known = [&](NodeId i, std::size_t line) {
    if (!f.variables.count(i)) throw ParseError(line, "unknown node " + std::to_string(i));
  };

  while (const auto header = r.next()) {
    const std::size_t line = r.line_number();
    const auto words = split_words(*header);
    const std::string& key = words.front();
    if (key == "nodes") {
      if (have_nodes) throw ParseError(line, "duplicate nodes section");
      have_nodes = true;
      read_section(r, is_network_keyword, [&](const std::vector<std::string>& w, std::size_t ln) {
        if (w.size() != 3) throw ParseError(ln, "expected '<id> <name> <dim>'");
        const NodeId id = parse_node(w[0], ln);
        if (f.variables.count(id)) throw ParseError(ln, "duplicate node " + w[0]);
        f.variables[id] = {w[1], parse_dim(w[2], ln)};
        nodes.push_back(id);
      });
    } else if (key == "edges") {
      if (have_dag) throw ParseError(line, "edges must precede factors and evidence");
      read_section(r, is_network_keyword, [&](const std::vector<std::string>& w, std::size_t ln) {
        if (w.size() != 2) throw ParseError(ln, "expected '<parent> <child>'");
        edges.emplace_back(parse_node(w[0], ln), parse_node(w[1], ln));
      });
    } else if (key == "factor") {
      build_dag(line);
      if (words.size() < 2 || words.size() > 3) throw ParseError(line, "expected 'factor <id> [gaussian|gaussian-flat]'");
      const NodeId id = parse_node(words[1], line);
      known(id, line);
      if (factor_line.count(id)) throw ParseError(line, "duplicate factor for node " + words[1]);
      factor_line[id] = line;
      const std::size_t d = f.variables.at(id).dim;
      std::size_t pd = 0;
      for (NodeId p : f.dag.parents(id)) pd += f.variables.at(p).dim;
      if (words.size() == 2) {
        Region reg = read_region(r);
        if (reg.dim() != d + pd) {
          throw ParseError(line, "factor of node " + words[1] + " has dimension " + std::to_string(reg.dim()) +
                                     ", expected " + std::to_string(d + pd) + " (parents ascending, then the node)");
        }
        f.regions.emplace(id, std::move(reg));
      } else if (words[2] == "gaussian") {
        Matrix fm(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(pd));
        if (pd > 0)
          for (std::size_t k = 0; k < d; ++k)
            fm.row(static_cast<Eigen::Index>(k)) = read_row(r, pd, "gain row").transpose();
        const Vector c = read_row(r, d, "mean offset");
        Matrix sigma(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (std::size_t k = 0; k < d; ++k)
          sigma.row(static_cast<Eigen::Index>(k)) = read_row(r, d, "covariance row").transpose();
        try {
          f.gaussians.emplace(id, GaussianFactor::proper(fm, c, sigma));
        } catch (const Error& e) {
          throw ParseError(line, e.what());
        }
      } else if (words[2] == "gaussian-flat") {
        f.gaussians.emplace(id, GaussianFactor::flat(d, pd));
      } else {
        throw ParseError(line, "unknown factor kind '" + words[2] + "'");
      }
    } else if (key == "evidence") {
      build_dag(line);
      read_section(r, is_network_keyword, [&](const std::vector<std::string>& w, std::size_t ln) {
        if (w.size() < 2) throw ParseError(ln, "expected '<id> <values...>'");
        const NodeId id = parse_node(w[0], ln);
        known(id, ln);
        Vector y = numbers_from(w, 1, ln);
        if (static_cast<std::size_t>(y.size()) != f.variables.at(id).dim) {
          throw ParseError(ln, "evidence for node " + w[0] + " has the wrong length");
        }
        f.evidence[id] = std::move(y);
      });
    } else {
      throw ParseError(line, "unknown section '" + key + "'");
    }
  }
  build_dag(r.line_number());
  if (!f.regions.empty() && !f.gaussians.empty()) {
    throw ParseError(r.line_number(), "factors must be all regions or all Gaussian");
  }
  for (NodeId i : f.dag.nodes())
    if (!factor_line.count(i)) throw ParseError(r.line_number(), "node " + std::to_string(i) + " has no factor");
  return f;
}

JointVariable read_joint_from(LineReader& r) {
  std::vector<VariableSignature> sigs;
  std::optional<Region> region;
  std::size_t region_line = 0;
  auto is_key = [](const std::string& w) { return w == "variables" || w == "region"; };
  while (const auto header = r.next()) {
    const std::size_t line = r.line_number();
    const std::string key = first_word(*header);
    if (key == "variables") {
      read_section(r, is_key, [&](const std::vector<std::string>& w, std::size_t ln) {
        if (w.size() != 2) throw ParseError(ln, "expected '<name> <dim>'");
        sigs.push_back({w[0], parse_dim(w[1], ln)});
      });
    } else if (key == "region") {
      if (region) throw ParseError(line, "duplicate region section");
      region = read_region(r);
      region_line = line;
    } else {
      throw ParseError(line, "unknown section '" + key + "'");
    }
  }
  if (sigs.empty()) throw ParseError(r.line_number(), "missing variables section");
  if (!region) throw ParseError(r.line_number(), "missing region section");
  try {
    return JointVariable(sigs, *region);
  } catch (const Error& e) {
    throw ParseError(region_line, e.what());
  }
}

}  // namespace

UncertaintyNetwork NetworkFile::network(DefinitenessPolicy policy) const {
  if (is_gaussian()) throw Error("network has Gaussian factors; use the Gaussian backend");
  return UncertaintyNetwork(dag, variables, regions, policy);
}

GaussianNetwork NetworkFile::gaussian_network() const {
  if (!is_gaussian()) throw Error("network has region factors, not Gaussian ones");
  return GaussianNetwork(dag, variables, gaussians);
}

NetworkFile read_network(std::istream& in) {
  LineReader r(in);
  return read_network_from(r);
}

NetworkFile parse_network(const std::string& text) {
  std::istringstream in(text);
  return read_network(in);
}

void write_network(std::ostream& out, const UncertaintyNetwork& n, const NodeEvidence& evidence) {
  out << "nodes\n";
  for (NodeId i : n.dag().nodes()) out << i << ' ' << n.variable(i).name << ' ' << n.variable(i).dim << '\n';
  out << "edges\n";
  for (const auto& [p, c] : n.dag().edges()) out << p << ' ' << c << '\n';
  for (NodeId i : n.dag().nodes()) {
    out << "factor " << i << '\n';
    write_region(out, n.factor(i));
  }
  if (!evidence.empty()) {
    out << "evidence\n";
    for (const auto& [i, y] : evidence) out << i << ' ' << join(y) << '\n';
  }
}

JointVariable read_joint(std::istream& in) {
  LineReader r(in);
  return read_joint_from(r);
}

JointVariable parse_joint(const std::string& text) {
  std::istringstream in(text);
  return read_joint(in);
}

void write_joint(std::ostream& out, const JointVariable& j) {
  out << "variables\n";
  for (const auto& s : j.signatures()) out << s.name << ' ' << s.dim << '\n';
  out << "region\n";
  write_region(out, j.uncertainty());
}

ScenarioFile read_scenario(std::istream& in) {
  LineReader r(in);
  ScenarioFile f;
  bool have_world = false;
  std::size_t n = 0;
  auto is_key = [](const std::string& w) {
    return w == "world" || w == "sensors" || w == "measurements" || w == "motion" || w == "octagon";
  };
  auto box_from = [&](const std::vector<std::string>& w, std::size_t ln) {
    const Vector v = numbers_from(w, 1, ln);
    if (v.size() == 0 || v.size() % 2 != 0) throw ParseError(ln, "expected lower corner then upper corner");
    const auto d = v.size() / 2;
    if (n != 0 && static_cast<std::size_t>(d) != n) throw ParseError(ln, "box dimension differs from the world");
    Box b(v.head(d), v.tail(d));
    if ((b.lower.array() > b.upper.array()).any()) throw ParseError(ln, "box has lower corner above upper corner");
    return b;
  };
  while (const auto header = r.next()) {
    const std::size_t line = r.line_number();
    const auto words = split_words(*header);
    const std::string& key = words.front();
    if (key == "world") {
      if (have_world) throw ParseError(line, "duplicate world section");
      read_section(r, is_key, [&](const std::vector<std::string>& w, std::size_t ln) {
        if (w[0] == "bounds") {
          if (have_world) throw ParseError(ln, "duplicate bounds");
          f.scenario.world = box_from(w, ln);
          n = f.scenario.world.dim();
          have_world = true;
        } else if (w[0] == "obstacle") {
          if (!have_world) throw ParseError(ln, "bounds must precede obstacles");
          f.scenario.obstacles.push_back(box_from(w, ln));
        } else {
          throw ParseError(ln, "expected 'bounds' or 'obstacle'");
        }
      });
      if (!have_world) throw ParseError(line, "world section needs a bounds line");
    } else if (key == "sensors") {
      if (!have_world) throw ParseError(line, "the world section must come first");
      read_section(r, is_key, [&](const std::vector<std::string>& w, std::size_t ln) {
        const Vector v = numbers_from(w, 0, ln);
        if (static_cast<std::size_t>(v.size()) != n + 1) {
          throw ParseError(ln, "expected beacon coordinates then the noise bound");
        }
        if (!(v(v.size() - 1) > 0)) throw ParseError(ln, "noise bound must be positive");
        f.scenario.sensors.push_back({v.head(static_cast<Eigen::Index>(n)), v(v.size() - 1)});
      });
    } else if (key == "measurements") {
      read_section(r, is_key, [&](const std::vector<std::string>& w, std::size_t ln) {
        const std::size_t t = parse_dim(w[0], ln);
        if (t != f.measurements.size() + 1) throw ParseError(ln, "measurement steps must be numbered 1, 2, ...");
        const Vector v = numbers_from(w, 1, ln);
        if (static_cast<std::size_t>(v.size()) != n * f.scenario.sensors.size()) {
          throw ParseError(ln, "expected " + std::to_string(n * f.scenario.sensors.size()) +
                                   " values (one reading per sensor)");
        }
        f.measurements.push_back(v);
      });
    } else if (key == "motion") {
      if (words.size() != 2) throw ParseError(line, "expected 'motion <bound>'");
      f.motion = parse_number(words[1], line);
      if (!(f.motion >= 0)) throw ParseError(line, "motion bound must be nonnegative");
    } else if (key == "octagon") {
      f.scenario.octagon = true;
    } else {
      throw ParseError(line, "unknown section '" + key + "'");
    }
  }
  if (!have_world) throw ParseError(r.line_number(), "missing world section");
  if (f.scenario.sensors.empty()) throw ParseError(r.line_number(), "missing sensors section");
  if (f.scenario.octagon && n != 2) throw ParseError(r.line_number(), "octagon readings need a planar world");
  return f;
}

ScenarioFile parse_scenario(const std::string& text) {
  std::istringstream in(text);
  return read_scenario(in);
}

ModelFile read_model(std::istream& in) {
  LineReader r(in);
  const std::string* first = r.peek();
  if (!first) throw ParseError(r.line_number(), "empty model file");
  const std::string key = first_word(*first);
  if (key == "variables" || key == "region") return read_joint_from(r);
  return read_network_from(r);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace uvnet
