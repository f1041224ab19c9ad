#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "uvnet/estimate.hpp"
#include "uvnet/filters.hpp"
#include "uvnet/io.hpp"

namespace uvnet {

/// Contents of a network file. Factors are either all regions or all
/// Gaussian.
struct NetworkFile {
  Dag dag;
  std::map<NodeId, VariableSignature> variables;
  std::map<NodeId, Region> regions;
  std::map<NodeId, GaussianFactor> gaussians;
  NodeEvidence evidence;

  bool is_gaussian() const { return !gaussians.empty(); }
  UncertaintyNetwork network(DefinitenessPolicy policy = DefinitenessPolicy::Reject) const;
  GaussianNetwork gaussian_network() const;
};

NetworkFile read_network(std::istream& in);
NetworkFile parse_network(const std::string& text);
void write_network(std::ostream& out, const UncertaintyNetwork& n, const NodeEvidence& evidence = {});

JointVariable read_joint(std::istream& in);
JointVariable parse_joint(const std::string& text);
void write_joint(std::ostream& out, const JointVariable& j);

struct ScenarioFile {
  Scenario scenario;
  std::vector<Vector> measurements;  // one stacked reading per step
  double motion = 0.0;
};

ScenarioFile read_scenario(std::istream& in);
ScenarioFile parse_scenario(const std::string& text);

/// Either kind of model file, told apart by its first section.
using ModelFile = std::variant<NetworkFile, JointVariable>;
ModelFile read_model(std::istream& in);

/// Whole contents of a file.
std::string read_text_file(const std::string& path);

}  // namespace uvnet
