#include "doctest.h"

#include "mpbcfw/data.hpp"
#include "mpbcfw/solver.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mpbcfw;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mpbcfw_test_data";
  fs::create_directories(dir);
  return dir / name;
}

MulticlassTask parse_mc(const std::string& text) {
  std::istringstream in(text);
  return read_multiclass(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("multiclass text format") {
  SUBCASE("minimal file") {
    const auto t = parse_mc("#multiclass 2 3\n0 1:1.0\n");
    REQUIRE(t.size() == 1);
    CHECK(t.num_classes() == 2);
    CHECK(t.examples()[0].features == (VectorD(3) << 1, 0, 0).finished());
    CHECK(t.examples()[0].label == 0);
  }
  SUBCASE("blank lines are skipped") {
    CHECK(parse_mc("\n#multiclass 3 2\n\n1 2:-0.5\n2\n").size() == 2);
  }
  SUBCASE("format errors") {
    CHECK_THROWS_AS(parse_mc("#multiclass 2 3\n0 2:1 1:1\n"), ParseError);
    CHECK_THROWS_AS(parse_mc("#multiclass 2 3\n0 1:1 1:2\n"), ParseError);
    CHECK_THROWS_AS(parse_mc("#multiclass 2 3\n0 4:1\n"), ParseError);
    CHECK_THROWS_AS(parse_mc("#multiclass 2 3\n0 0:1\n"), ParseError);
    CHECK_THROWS_AS(parse_mc("#multiclass 2 3\n2 1:1\n"), ParseError);
    CHECK_THROWS_AS(parse_mc("#multiclass 2 3\nx 1:1\n"), ParseError);
    CHECK_THROWS_AS(parse_mc("#multiclass 2 3\n0 1=1\n"), ParseError);
    CHECK_THROWS_AS(parse_mc("0 1:1\n"), ParseError);
    CHECK_THROWS_AS(parse_mc("#multiclass 1 3\n0 1:1\n"), ParseError);
    CHECK_THROWS_AS(parse_mc("#multiclass 2 3\n"), ParseError);
  }
  SUBCASE("errors carry the line number") {
    try {
      parse_mc("#multiclass 2 3\n0 1:1\n1 3:1 2:1\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
}

TEST_CASE("JSON dataset validation") {
  auto chain = [](const std::string& examples) {
    std::istringstream in(R"({"header":{"task":"chain","version":1,"n":1,"num_labels":2,"unary_dim":1},"examples":)" +
                          examples + "}");
    return read_chain(in);
  };
  auto potts = [](const std::string& edges) {
    std::istringstream in(
        R"({"header":{"task":"binary-potts","version":1,"n":1,"unary_dim":1},"examples":[{"labels":[0,1,0],"features":[[1],[2],[3]],"edges":)" +
        edges + "}]}");
    return read_binary_potts(in);
  };
  CHECK(chain(R"([{"labels":[0,1],"features":[[1],[2]]}])").size() == 1);
  CHECK_THROWS_AS(chain(R"([{"labels":[0,1],"features":[[1]]}])"), ParseError);
  CHECK_THROWS_AS(chain(R"([{"labels":[0,2],"features":[[1],[2]]}])"), ParseError);
  CHECK_THROWS_AS(chain(R"([{"labels":[0,1],"features":[[1,1],[2,2]]}])"), ParseError);
  CHECK_THROWS_AS(chain(R"([])"), ParseError);
  CHECK_THROWS_AS(chain(R"([{"labels":[0,1]}])"), ParseError);

  CHECK(potts("[[0,1],[1,2]]").size() == 1);
  CHECK_THROWS_AS(potts("[[1,1]]"), ParseError);
  CHECK_THROWS_AS(potts("[[1,0]]"), ParseError);
  CHECK_THROWS_AS(potts("[[0,3]]"), ParseError);
  CHECK_THROWS_AS(potts("[[0,1],[0,1]]"), ParseError);
  CHECK_THROWS_AS(potts("[[0,1,2]]"), ParseError);

  std::istringstream wrong_version(R"({"header":{"task":"chain","version":2,"n":0},"examples":[]})");
  CHECK_THROWS_AS(read_chain(wrong_version), ParseError);
  std::istringstream garbage("{not json");
  CHECK_THROWS_AS(read_binary_potts(garbage), ParseError);
}

TEST_CASE("dataset round trips are bit-exact") {
  const auto mc = generate_multiclass({12, 4, 5, 3.0, 1.0}, 3);
  ChainGenParams cp;
  cp.n = 7;
  const auto chain = generate_chain(cp, 4);
  GridGenParams gp;
  gp.n = 3;
  const auto potts = generate_binary_potts(gp, 5);

  save_dataset(mc, scratch("mc.txt").string());
  save_dataset(chain, scratch("chain.json").string());
  save_dataset(potts, scratch("potts.json").string());

  CHECK(detect_task_kind(scratch("mc.txt").string()) == TaskKind::Multiclass);
  CHECK(detect_task_kind(scratch("chain.json").string()) == TaskKind::Chain);
  CHECK(detect_task_kind(scratch("potts.json").string()) == TaskKind::BinaryPotts);

  const auto mc2 = load_multiclass(scratch("mc.txt").string());
  REQUIRE(mc2.size() == mc.size());
  for (std::size_t i = 0; i < mc.size(); ++i) {
    CHECK(mc2.examples()[i].features == mc.examples()[i].features);
    CHECK(mc2.examples()[i].label == mc.examples()[i].label);
  }
  const auto chain2 = load_chain(scratch("chain.json").string());
  REQUIRE(chain2.size() == chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) {
    CHECK(chain2.examples()[i].features == chain.examples()[i].features);
    CHECK(chain2.examples()[i].labels == chain.examples()[i].labels);
  }
  const auto potts2 = load_binary_potts(scratch("potts.json").string());
  REQUIRE(potts2.size() == potts.size());
  for (std::size_t i = 0; i < potts.size(); ++i) {
    CHECK(potts2.examples()[i].features == potts.examples()[i].features);
    CHECK(potts2.examples()[i].labels == potts.examples()[i].labels);
    CHECK(potts2.examples()[i].edges == potts.examples()[i].edges);
  }

  const auto any = load_dataset(scratch("chain.json").string());
  CHECK(any->kind() == TaskKind::Chain);
  CHECK_THROWS_AS(load_dataset(scratch("chain.json").string(), TaskKind::BinaryPotts), ParseError);
  CHECK_THROWS(load_dataset(scratch("missing.json").string()));
}

TEST_CASE("generators") {
  SUBCASE("deterministic in the seed") {
    const auto a = generate_multiclass({}, 9), b = generate_multiclass({}, 9), c = generate_multiclass({}, 10);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.examples()[i].features == b.examples()[i].features);
    CHECK(a.examples()[0].features != c.examples()[0].features);

    std::ostringstream s1, s2;
    write_chain(s1, generate_chain({}, 3));
    write_chain(s2, generate_chain({}, 3));
    CHECK(s1.str() == s2.str());
    std::ostringstream g1, g2;
    write_binary_potts(g1, generate_binary_potts({}, 3));
    write_binary_potts(g2, generate_binary_potts({}, 3));
    CHECK(g1.str() == g2.str());
  }
  SUBCASE("shapes") {
    const auto chain = generate_chain({}, 1);
    CHECK(chain.size() == 30);
    CHECK(chain.dim() == 3 * 4 + 9);
    for (const auto& ex : chain.examples()) CHECK(ex.labels.size() == 5);

    const auto potts = generate_binary_potts({}, 1);
    CHECK(potts.size() == 15);
    for (const auto& ex : potts.examples()) {
      CHECK(ex.labels.size() == 16);
      CHECK(ex.edges.size() == 24);
    }
    CHECK(grid_edges(4, 4).size() == 24);
    CHECK(grid_edges(1, 5).size() == 4);
    CHECK(grid_edges(3, 2).size() == 7);
  }
  SUBCASE("maximum smoothing gives constant ground truth") {
    GridGenParams p;
    p.smoothing = 1.0;
    const auto potts = generate_binary_potts(p, 11);
    for (const auto& ex : potts.examples())
      for (int y : ex.labels) CHECK(y == ex.labels.front());
  }
  SUBCASE("default grids are not constant") {
    const auto potts = generate_binary_potts({}, 11);
    std::size_t mixed = 0;
    for (const auto& ex : potts.examples())
      mixed += std::any_of(ex.labels.begin(), ex.labels.end(), [&](int y) { return y != ex.labels.front(); });
    CHECK(mixed > 0);
  }
  SUBCASE("bad sizes") {
    CHECK_THROWS_AS(generate_multiclass({0, 3, 2, 1.0, 1.0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_multiclass({5, 1, 2, 1.0, 1.0}, 1), std::invalid_argument);
    ChainGenParams cp;
    cp.length = 0;
    CHECK_THROWS_AS(generate_chain(cp, 1), std::invalid_argument);
    GridGenParams gp;
    gp.smoothing = 1.5;
    CHECK_THROWS_AS(generate_binary_potts(gp, 1), std::invalid_argument);
  }
  SUBCASE("multiclass clusters are linearly separable") {
    const auto task = generate_multiclass({}, 0);
    SolverConfig config;
    config.algorithm = Algorithm::BCFW;
    config.stopping.gap_tolerance = 1e-6;
    config.stopping.max_iterations = 500;
    SimulatedClock clock(1, 1);
    const auto r = train(task, config, clock);
    REQUIRE(r.trace.back().gap);
    CHECK(*r.trace.back().gap < 1e-6);
    for (std::size_t i = 0; i < task.size(); ++i) {
      const VectorD& x = task.examples()[i].features;
      const int y = task.examples()[i].label;
      const double truth_score = r.weights.segment(y * x.size(), x.size()).dot(x);
      for (int k = 0; k < task.num_classes(); ++k)
        if (k != y) CHECK(r.weights.segment(k * x.size(), x.size()).dot(x) < truth_score);
    }
  }
}

TEST_CASE("model persistence") {
  const auto task = generate_multiclass({}, 2);
  SolverConfig config;
  config.algorithm = Algorithm::BCFW;
  config.stopping.max_iterations = 30;
  SimulatedClock clock(1, 1);
  const auto r = train(task, config, clock);

  Model m{r.weights, describe_task(task)};
  m.meta.algorithm = "bcfw";
  m.meta.lambda = r.lambda;
  m.meta.seed = 42;
  m.weights[0] = -0.0;
  m.weights[1] = 1e-310;
  save_model(m, scratch("model.json").string());
  const Model back = load_model(scratch("model.json").string());
  CHECK(back.weights.size() == m.weights.size());
  CHECK(std::memcmp(back.weights.data(), m.weights.data(), sizeof(double) * m.weights.size()) == 0);
  CHECK(back.meta.algorithm == "bcfw");
  CHECK(back.meta.lambda == m.meta.lambda);
  CHECK(back.meta.seed == 42);
  CHECK(back.meta.task == TaskKind::Multiclass);
  CHECK_NOTHROW(check_compatible(back, task));

  SUBCASE("reloaded weights reproduce the primal") {
    Model trained{r.weights, describe_task(task)};
    save_model(trained, scratch("trained.json").string());
    const Model again = load_model(scratch("trained.json").string());
    CHECK(primal_objective(task, again.weights, r.lambda) == primal_objective(task, r.weights, r.lambda));
  }
  SUBCASE("task-kind mismatch") {
    const auto chain = generate_chain({}, 1);
    CHECK_THROWS_WITH_AS(check_compatible(back, chain), doctest::Contains("task-kind mismatch"), std::invalid_argument);
    const auto other = generate_multiclass({5, 4, 2, 1.0, 1.0}, 1);
    CHECK_THROWS_AS(check_compatible(back, other), std::invalid_argument);
  }
  SUBCASE("version and corruption") {
    std::string text = slurp(scratch("model.json"));
    std::string bumped = text;
    bumped.replace(bumped.find("\"version\": 1"), 12, "\"version\": 2");
    std::istringstream v(bumped);
    CHECK_THROWS_WITH_AS(read_model(v), doctest::Contains("version"), ParseError);
    std::string corrupt = text;
    corrupt.replace(corrupt.find("weights_hex\": \"") + 15, 1, "z");
    std::istringstream c(corrupt);
    CHECK_THROWS_AS(read_model(c), ParseError);
    std::istringstream truncated(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(read_model(truncated), ParseError);
  }
}
