#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "uvnet/core.hpp"
#include "uvnet/model_io.hpp"

using namespace uvnet;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(UVNET_DATA_DIR) + "/" + name; }

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("uvnet_cli_" + name);
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

}  // namespace

TEST_CASE("dsep on the collider") {
  auto r = run({"dsep", data("collider.net"), "--a", "1", "--b", "2"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out == "separated\n");
  r = run({"dsep", data("collider.net"), "--a", "1", "--b", "2", "--c", "3"});
  CHECK(r.out == "connected\n");
  r = run({"dsep", data("collider.net"), "--a", "x1", "--b", "x2", "--c", "x3"});
  CHECK(r.out == "connected\n");
}

TEST_CASE("total independence on the tetrahedron") {
  const auto r = run({"independence", data("tetrahedron.joint"), "--mode", "total"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out == "pairwise: yes\ntotal: no\n");
}

TEST_CASE("figures") {
  auto r = run({"figures", "fig2"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("vertices (0,2.5) (2.5,0) (5,2.5) (2.5,5)") != std::string::npos);
  CHECK(r.out.find("independent no") != std::string::npos);

  r = run({"figures", "thm3"});
  CHECK(r.out.find("pairwise: yes") != std::string::npos);
  CHECK(r.out.find("total: no") != std::string::npos);

  r = run({"figures", "fig4"});
  CHECK(r.out.find("objective 5") != std::string::npos);
  CHECK(r.out.find("beta 4 4") != std::string::npos);

  r = run({"figures", "fig1b"});
  CHECK(r.out.find("components 2") != std::string::npos);

  CHECK(run({"figures", "fig9"}).code == cli::kExitUsage);
}

TEST_CASE("marginal and condition on the diamond") {
  auto r = run({"marginal", data("diamond.joint"), "--vars", "y"});
  CHECK(r.code == cli::kExitOk);
  const Region m = parse_region(r.out);
  CHECK(is_subset(m, Region::interval(0, 5)) == Verdict::True);
  CHECK(is_subset(Region::interval(0, 5), m) == Verdict::True);

  r = run({"condition", data("diamond.joint"), "--evidence", "x=1"});
  const Region c = parse_region(r.out);
  CHECK(is_subset(c, Region::interval(1.5, 3.5)) == Verdict::True);
  CHECK(is_subset(Region::interval(1.5, 3.5), c) == Verdict::True);
}

TEST_CASE("empty results exit with 2") {
  auto r = run({"posterior", data("chain.net"), "--evidence", "2=5", "--query", "1"});
  CHECK(r.code == cli::kExitEmpty);
  CHECK(r.out == "EMPTY\n");
  r = run({"condition", data("diamond.joint"), "--evidence", "x=9"});
  CHECK(r.code == cli::kExitEmpty);
  r = run({"estimate", data("squares.net"), "--posterior"});
  CHECK(r.code == cli::kExitEmpty);
  CHECK(r.out.find("status optimal") == 0);
}

TEST_CASE("errors exit with 1") {
  const auto bad = scratch("bad.net");
  write_file(bad, "nodes\n1 x 1\nedges\nfoo\n");
  auto r = run({"dsep", bad.string(), "--a", "1", "--b", "1"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("line 4") != std::string::npos);
  std::filesystem::remove(bad);

  CHECK(run({"dsep", data("nonexistent.net"), "--a", "1", "--b", "2"}).code == cli::kExitUsage);
  CHECK(run({"bogus"}).code == cli::kExitUsage);
  CHECK(run({"independence", data("tetrahedron.joint"), "--mode", "sideways"}).code == cli::kExitUsage);
  CHECK(run({"dsep", data("collider.net"), "--a", "1", "--b", "9"}).code == cli::kExitUsage);
  CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("file evidence overrides flags") {
  const auto r = run({"posterior", data("squares.net"), "--evidence", "2=0,0"});
  CHECK(r.err.find("warning") != std::string::npos);
  CHECK(r.code == cli::kExitEmpty);
}

TEST_CASE("estimate") {
  auto r = run({"estimate", data("squares.net")});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("objective 5\n") != std::string::npos);
  CHECK(r.out.find("beta 2 1\n") != std::string::npos);
  r = run({"estimate", data("gaussian.net")});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("x 1 1\n") != std::string::npos);
}

TEST_CASE("independence modes on the collider") {
  auto r = run({"independence", data("collider.net"), "--mode", "local"});
  CHECK(r.out == "node 1: yes\nnode 2: yes\nnode 3: yes\n");
  r = run({"independence", data("collider.net"), "--mode", "global", "--a", "1", "--b", "2"});
  CHECK(r.out == "global: yes\n");
  r = run({"independence", data("collider.net"), "--mode", "global", "--a", "1", "--b", "2", "--c", "3"});
  CHECK(r.out == "global: not-applicable\n");
}

TEST_CASE("filter output") {
  const auto r = run({"filter", data("corridor.scn"), "--format", "vertices"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("step 3") != std::string::npos);
  CHECK(r.out.find("vertices t=3") != std::string::npos);
}

TEST_CASE("output file and determinism") {
  const auto path = scratch("out.txt");
  const auto first = run({"--seed", "7", "-o", path.string(), "posterior", data("chain.net"), "--evidence", "2=1.5"});
  CHECK(first.code == cli::kExitOk);
  CHECK(first.out.empty());
  const Region saved = parse_region(read_text_file(path.string()));
  const auto second = run({"--seed", "7", "posterior", data("chain.net"), "--evidence", "2=1.5"});
  CHECK(read_text_file(path.string()) == second.out);
  CHECK(saved.dim() == 1);
  std::filesystem::remove(path);
}

TEST_CASE("network files round-trip") {
  for (const char* name : {"collider.net", "chain.net", "squares.net"}) {
    const NetworkFile f = parse_network(read_text_file(data(name)));
    const UncertaintyNetwork n = f.network();
    std::ostringstream text;
    write_network(text, n, f.evidence);
    const NetworkFile g = parse_network(text.str());
    CHECK(g.evidence == f.evidence);
    for (const auto& [id, region] : f.regions) {
      CHECK(is_subset(region, g.regions.at(id)) == Verdict::True);
      CHECK(is_subset(g.regions.at(id), region) == Verdict::True);
    }
  }
  const JointVariable j = parse_joint(read_text_file(data("tetrahedron.joint")));
  std::ostringstream text;
  write_joint(text, j);
  const JointVariable k = parse_joint(text.str());
  CHECK(k.names() == j.names());
  CHECK(is_subset(j.uncertainty(), k.uncertainty()) == Verdict::True);
}
