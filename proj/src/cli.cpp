#include "mpbcfw/cli.hpp"

#include "mpbcfw/data.hpp"
#include "mpbcfw/solver.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace mpbcfw::cli {

namespace {

struct TrainArgs {
  std::string data;
  std::string task;
  std::string algo = "mp-bcfw";
  std::string lambda = "auto";
  std::optional<std::size_t> passes;
  std::optional<double> gap_tol;
  std::optional<double> time_budget_ms;
  std::uint64_t seed = 0;
  std::size_t cache_size = 1000;
  std::size_t max_approx_passes = 1000;
  std::size_t inactivity = 10;
  std::string approx_policy = "auto";
  std::size_t primal_every = 1;
  std::string log;
  std::string log_format = "csv";
  std::string out;
};

struct GenArgs {
  std::string task;
  std::size_t n = 20;
  std::size_t len = 5;
  int labels = 3;
  long long dim = -1;
  std::string grid = "4x4";
  double separation = -1.0;
  double noise = 1.0;
  double smoothing = 0.3;
  double signal = 1.0;
  double stickiness = 2.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct EvalArgs {
  std::string model;
  std::string data;
  std::string task;
};

const std::vector<std::string> kTasks = {"multiclass", "chain", "binary-potts"};
const std::vector<std::string> kAlgorithms = {"fw", "bcfw", "bcfw-avg", "mp-bcfw", "mp-bcfw-avg"};

std::optional<TaskKind> optional_kind(const std::string& name) {
  if (name.empty()) return std::nullopt;
  return task_kind_from_string(name);
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw CLI::ValidationError("--grid", "expected HxW, e.g. 4x4");
  try {
    std::size_t used_h = 0, used_w = 0;
    const std::string hs = text.substr(0, x), ws = text.substr(x + 1);
    const long long h = std::stoll(hs, &used_h);
    const long long w = std::stoll(ws, &used_w);
    if (used_h != hs.size() || used_w != ws.size() || h < 1 || w < 1) throw std::invalid_argument("grid");
    return {static_cast<std::size_t>(h), static_cast<std::size_t>(w)};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--grid", "expected HxW with positive integers");
  }
}

SolverConfig make_config(const TrainArgs& a) {
  SolverConfig c;
  c.algorithm = algorithm_from_string(a.algo);
  if (a.lambda != "auto") {
    try {
      std::size_t used = 0;
      const double v = std::stod(a.lambda, &used);
      if (used != a.lambda.size() || !(v > 0.0)) throw std::invalid_argument("lambda");
      c.lambda = v;
    } catch (const std::exception&) {
      throw CLI::ValidationError("--lambda", "must be 'auto' or a positive number");
    }
  }
  c.cache_capacity = a.cache_size;
  c.max_approx_passes = a.max_approx_passes;
  c.inactivity = a.inactivity;
  try {
    c.approx_policy = ApproxPolicy::parse(a.approx_policy);
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError("--approx-policy", e.what());
  }
  c.seed = a.seed;
  c.primal_every = a.primal_every;
  c.stopping.max_iterations = a.passes;
  c.stopping.gap_tolerance = a.gap_tol;
  if (a.time_budget_ms) c.stopping.time_budget_seconds = *a.time_budget_ms / 1000.0;
  if (!c.stopping.max_iterations && !c.stopping.gap_tolerance && !c.stopping.time_budget_seconds)
    c.stopping.max_iterations = 100;
  if (c.stopping.gap_tolerance && c.primal_every == 0)
    throw CLI::ValidationError("--gap-tol", "requires --primal-every > 0");
  return c;
}

int cmd_train(const TrainArgs& a, const SolverConfig& config, std::ostream& out) {
  const auto task = load_dataset(a.data, optional_kind(a.task));
  SteadyClock clock;
  const TrainResult r = train(*task, config, clock);

  if (!a.log.empty()) {
    std::ofstream log(a.log, std::ios::trunc);
    if (!log) throw std::runtime_error("cannot open '" + a.log + "' for writing");
    if (a.log_format == "json")
      write_trace_jsonl(log, r.trace);
    else
      write_trace_csv(log, r.trace);
  }
  if (!a.out.empty()) {
    Model model{r.weights, describe_task(*task)};
    model.meta.algorithm = a.algo;
    model.meta.lambda = r.lambda;
    model.meta.seed = a.seed;
    save_model(model, a.out);
  }

  out << "task=" << to_string(task->kind()) << " n=" << task->size() << " d=" << task->dim()
      << " algorithm=" << a.algo << " lambda=" << fmt(r.lambda) << '\n';
  out << "iterations=" << r.iterations << " exact_calls=" << r.exact_calls << " approx_calls=" << r.approx_calls
      << '\n';
  out << "dual=" << fmt(r.final_dual);
  if (r.final_primal) out << " primal=" << fmt(*r.final_primal) << " gap=" << fmt(*r.final_primal - r.final_dual);
  out << '\n';
  return kExitOk;
}

int cmd_gen(const GenArgs& a, std::ostream& out) {
  const TaskKind kind = task_kind_from_string(a.task);
  std::unique_ptr<StructuredTask> task;
  switch (kind) {
    case TaskKind::Multiclass: {
      MulticlassGenParams p;
      p.n = a.n;
      p.num_classes = a.labels;
      if (a.dim > 0) p.dim = a.dim;
      if (a.separation >= 0.0) p.separation = a.separation;
      p.noise = a.noise;
      task = std::make_unique<MulticlassTask>(generate_multiclass(p, a.seed));
      break;
    }
    case TaskKind::Chain: {
      ChainGenParams p;
      p.n = a.n;
      p.length = a.len;
      p.num_labels = a.labels;
      if (a.dim > 0) p.dim = a.dim;
      if (a.separation >= 0.0) p.separation = a.separation;
      p.noise = a.noise;
      p.stickiness = a.stickiness;
      task = std::make_unique<ChainTask>(generate_chain(p, a.seed));
      break;
    }
    case TaskKind::BinaryPotts: {
      GridGenParams p;
      p.n = a.n;
      std::tie(p.height, p.width) = parse_grid(a.grid);
      if (a.dim > 0) p.dim = a.dim;
      p.smoothing = a.smoothing;
      p.signal = a.signal;
      p.noise = a.noise;
      task = std::make_unique<BinaryPottsTask>(generate_binary_potts(p, a.seed));
      break;
    }
  }
  save_dataset(*task, a.out);
  out << "wrote " << to_string(kind) << " dataset n=" << task->size() << " d=" << task->dim() << " to " << a.out
      << '\n';
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Model model = load_model(a.model);
  const auto task = load_dataset(a.data, optional_kind(a.task));
  check_compatible(model, *task);
  const double primal = primal_objective(*task, model.weights, model.meta.lambda);
  double error = 0.0;
  for (std::size_t i = 0; i < task->size(); ++i) error += task->loss(i, task->predict(i, model.weights));
  error /= static_cast<double>(task->size());
  out << "task=" << to_string(task->kind()) << " n=" << task->size() << " lambda=" << fmt(model.meta.lambda) << '\n';
  out << "primal=" << fmt(primal) << '\n';
  out << "error=" << fmt(error) << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structural SVM training with Frank-Wolfe, BCFW and multi-plane BCFW", "mpbcfw"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train a model and log a convergence trace");
  train_cmd->add_option("--data", ta.data, "Dataset file")->required();
  train_cmd->add_option("--task", ta.task, "Task kind (default: detected from the file)")
      ->check(CLI::IsMember(kTasks));
  train_cmd->add_option("--algo", ta.algo, "Algorithm")->check(CLI::IsMember(kAlgorithms))->capture_default_str();
  train_cmd->add_option("--lambda", ta.lambda, "Regularization: 'auto' (1/n) or a positive number")
      ->capture_default_str();
  train_cmd->add_option("--passes", ta.passes, "Maximum outer iterations");
  train_cmd->add_option("--gap-tol", ta.gap_tol, "Stop once the duality gap is below this value")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--time-budget-ms", ta.time_budget_ms, "Wall-time budget")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", ta.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--cache-size", ta.cache_size, "Working-set capacity N")->capture_default_str();
  train_cmd->add_option("--max-approx-passes", ta.max_approx_passes, "Approximate passes per iteration, at most M")
      ->capture_default_str();
  train_cmd->add_option("--inactivity", ta.inactivity, "Inactivity horizon T in outer iterations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--approx-policy", ta.approx_policy, "'auto' or 'fixed:K'")->capture_default_str();
  train_cmd->add_option("--primal-every", ta.primal_every, "Evaluate the primal every k iterations (0 = never)")
      ->capture_default_str();
  train_cmd->add_option("--log", ta.log, "Trace output file");
  train_cmd->add_option("--log-format", ta.log_format, "Trace format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  train_cmd->add_option("--out", ta.out, "Model output file");

  GenArgs ga;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen_cmd->add_option("--task", ga.task, "Task kind")->required()->check(CLI::IsMember(kTasks));
  gen_cmd->add_option("--n", ga.n, "Number of examples")->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--len", ga.len, "Chain length")->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--labels", ga.labels, "Number of classes / chain labels")
      ->check(CLI::Range(2, 1 << 16))
      ->capture_default_str();
  gen_cmd->add_option("--dim", ga.dim, "Feature dimension per class / position / node")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--grid", ga.grid, "Grid size HxW for binary-potts")->capture_default_str();
  gen_cmd->add_option("--separation", ga.separation, "Class-mean radius")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--noise", ga.noise, "Feature noise standard deviation")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  gen_cmd->add_option("--smoothing", ga.smoothing, "Ground-truth smoothing in [0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  gen_cmd->add_option("--signal", ga.signal, "Unary signal strength (binary-potts)")->capture_default_str();
  gen_cmd->add_option("--stickiness", ga.stickiness, "Self-transition bonus (chain)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  gen_cmd->add_option("--seed", ga.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--out", ga.out, "Output file")->required();

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a dataset");
  eval_cmd->add_option("--model", ea.model, "Model file")->required();
  eval_cmd->add_option("--data", ea.data, "Dataset file")->required();
  eval_cmd->add_option("--task", ea.task, "Task kind (default: detected from the file)")
      ->check(CLI::IsMember(kTasks));

  std::vector<const char*> argv{"mpbcfw"};
  for (const auto& a : args) argv.push_back(a.c_str());

  SolverConfig config;
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (train_cmd->parsed()) config = make_config(ta);
    if (gen_cmd->parsed() && ga.task == "binary-potts") parse_grid(ga.grid);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failing = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << failing->help();
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(ta, config, out);
    if (gen_cmd->parsed()) return cmd_gen(ga, out);
    return cmd_eval(ea, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace mpbcfw::cli
