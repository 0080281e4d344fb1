#include "ssbm/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>

#include "ssbm/ssbm.hpp"

namespace ssbm::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int env_threads() {
  const char* text = std::getenv("SSBM_THREADS");
  if (text == nullptr || *text == '\0') return 1;
  const char* end = text + std::strlen(text);
  int threads = 0;
  auto [ptr, ec] = std::from_chars(text, end, threads);
  if (ec != std::errc{} || ptr != end || threads < 1) {
    throw UsageError("SSBM_THREADS must be a positive integer");
  }
  return threads;
}

std::string num(double v) { return format_double(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }

// ---- shared flags

struct FitFlags {
  int restarts = 10;
  double tol = 1e-8;
  int max_iters = 500;
  std::uint64_t seed = 1;
  std::string init = "spectral";
  int threads = 0;  // 0: take SSBM_THREADS

  void resolve() {
    if (threads == 0) threads = env_threads();
  }

  FitConfig config(Mode mode) const {
    FitConfig cfg;
    cfg.restarts = restarts;
    cfg.rel_tol = tol;
    cfg.max_iters = max_iters;
    cfg.seed = seed;
    cfg.mode = mode;
    cfg.threads = threads;
    cfg.init = init_from_string(init);
    return cfg;
  }

  json to_json() const {
    return {{"restarts", restarts}, {"tol", tol},   {"max_iters", max_iters},
            {"seed", seed},         {"init", init}, {"threads", threads}};
  }

  void append(std::vector<std::string>& argv) const {
    argv.insert(argv.end(), {"--restarts", num(restarts), "--tol", num(tol), "--max-iters",
                             num(max_iters), "--seed", num(seed), "--init", init, "--threads",
                             num(threads)});
  }
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--restarts", f.restarts, "EM restarts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--tol", f.tol, "relative change in log-likelihood that stops EM")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-iters", f.max_iters, "EM iteration cap per restart")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "restart k is seeded with seed + k")->capture_default_str();
  cmd->add_option("--init", f.init, "starting points")
      ->check(CLI::IsMember({"spectral", "random"}))
      ->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker threads (default: $SSBM_THREADS or 1)")
      ->check(CLI::PositiveNumber);
}

// ---- output helpers

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw DataError("error writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) {
  write_file(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

struct Manifest {
  std::string command;
  json inputs = json::array();
  json config = json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> argv;
};

void write_manifest(const fs::path& dir, const Manifest& m,
                    std::chrono::steady_clock::time_point started) {
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_json(dir / "manifest.json", {{"tool", "ssbm"},
                                     {"version", kVersion},
                                     {"command", m.command},
                                     {"inputs", m.inputs},
                                     {"config", m.config},
                                     {"seed", m.seed},
                                     {"argv", m.argv},
                                     {"wall_time_seconds", seconds}});
}

void write_fit_artifacts(const fs::path& dir, const SignedGraph& g, const FitResult& r) {
  write_json(dir / "params.json", to_json(r));
  write_file(dir / "membership.csv",
             [&](std::ostream& o) { write_membership_csv(o, g, r.params); });
  write_json(dir / "block_image.json", to_json(block_image(r.params)));
  const auto hard = hard_partition(soft_membership(r.params), Side::outgoing);
  write_file(dir / "partition.labels",
             [&](std::ostream& o) { write_labels(o, g, hard.partition); });
}

SignedGraph load_graph(const std::string& path, bool directed) {
  try {
    return read_edge_list(path, directed);
  } catch (const std::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = w; k < count; k += workers) body(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---- fit

struct FitArgs {
  std::string graph;
  int groups = 0;
  bool directed = true;
  bool require_converged = false;
  std::string out;
  FitFlags flags;
};

int cmd_fit(FitArgs a, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  a.flags.resolve();
  const Mode mode = a.directed ? Mode::directed : Mode::undirected;
  const auto cfg = a.flags.config(mode);
  const auto g = load_graph(a.graph, a.directed);
  if (static_cast<std::size_t>(a.groups) > g.vertex_count()) {
    throw UsageError("--groups " + num(a.groups) + " exceeds the " +
                     std::to_string(g.vertex_count()) + " vertices in " + a.graph);
  }
  if (g.edge_count() == 0) throw DataError(a.graph + ": no edges");
  if (a.out.empty()) a.out = "ssbm_fit_seed" + num(a.flags.seed);
  const auto dir = prepare_dir(a.out);

  const FitResult r = fit(g, a.groups, cfg);
  write_fit_artifacts(dir, g, r);

  Manifest m;
  m.command = "fit";
  m.inputs.push_back(a.graph);
  m.config = a.flags.to_json();
  m.config["groups"] = a.groups;
  m.config["mode"] = to_string(mode);
  m.config["require_converged"] = a.require_converged;
  m.seed = a.flags.seed;
  m.argv = {"fit", a.graph, "--groups", num(a.groups), a.directed ? "--directed" : "--undirected"};
  a.flags.append(m.argv);
  if (a.require_converged) m.argv.push_back("--require-converged");
  m.argv.insert(m.argv.end(), {"--out", a.out});
  write_manifest(dir, m, started);

  out << "groups " << a.groups << " log_likelihood " << num(r.log_likelihood) << " iterations "
      << r.iterations << " converged " << (r.converged ? "yes" : "no") << " restart "
      << r.restart_index << '\n';
  if (!r.converged) {
    err << "warning: best restart stopped at --max-iters " << a.flags.max_iters
        << " without converging\n";
    if (a.require_converged) return kConvergence;
  }
  return kOk;
}

// ---- select

struct SelectArgs {
  std::string graph;
  int min_groups = 1;
  int max_groups = 0;
  bool directed = true;
  double coding_floor = kCodingFloor;
  std::string zeros = "clamp";
  std::string out;
  FitFlags flags;
};

int cmd_select(SelectArgs a, std::ostream& out, std::ostream&) {
  const auto started = std::chrono::steady_clock::now();
  a.flags.resolve();
  if (a.min_groups > a.max_groups) throw UsageError("--min-groups exceeds --max-groups");
  const Mode mode = a.directed ? Mode::directed : Mode::undirected;
  const auto cfg = a.flags.config(mode);
  MdlOptions opts;
  opts.coding_floor = a.coding_floor;
  opts.zeros = zero_entries_from_string(a.zeros);
  try {
    opts.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto g = load_graph(a.graph, a.directed);
  if (static_cast<std::size_t>(a.max_groups) > g.vertex_count()) {
    throw UsageError("--max-groups " + num(a.max_groups) + " exceeds the " +
                     std::to_string(g.vertex_count()) + " vertices in " + a.graph);
  }
  if (g.edge_count() == 0) throw DataError(a.graph + ": no edges");
  if (a.out.empty()) a.out = "ssbm_select_seed" + num(a.flags.seed);
  const auto dir = prepare_dir(a.out);

  const auto report = select_groups(g, a.min_groups, a.max_groups, cfg, opts);
  write_file(dir / "mdl.csv", [&](std::ostream& o) { write_mdl_csv(o, report); });
  write_json(dir / "mdl.json", to_json(report));
  write_fit_artifacts(dir, g, *report.best().fit);

  Manifest m;
  m.command = "select";
  m.inputs.push_back(a.graph);
  m.config = a.flags.to_json();
  m.config["min_groups"] = a.min_groups;
  m.config["max_groups"] = a.max_groups;
  m.config["mode"] = to_string(mode);
  m.config["coding_floor"] = a.coding_floor;
  m.config["zero_entries"] = a.zeros;
  m.seed = a.flags.seed;
  m.argv = {"select",         a.graph,           "--min-groups",
            num(a.min_groups), "--max-groups",   num(a.max_groups),
            a.directed ? "--directed" : "--undirected"};
  a.flags.append(m.argv);
  m.argv.insert(m.argv.end(),
                {"--coding-floor", num(a.coding_floor), "--zero-entries", a.zeros, "--out", a.out});
  write_manifest(dir, m, started);

  out << "best_groups " << report.best_groups << '\n';
  return kOk;
}

// ---- generate

struct GenerateArgs {
  std::string mode = "community";
  GeneratorConfig cfg;
  std::string out;
};

int cmd_generate(GenerateArgs a, std::ostream& out, std::ostream&) {
  const auto started = std::chrono::steady_clock::now();
  Manifest m;
  m.command = "generate";
  m.seed = a.cfg.seed;
  LabeledNetwork net;
  if (a.mode == "mixed") {
    const auto design = default_mixed_design();
    net = generate_mixed_blocks(a.cfg.seed, design);
    m.config = {{"mode", "mixed"}, {"seed", a.cfg.seed}, {"design", to_json(design)}};
    m.argv = {"generate", "--mode", "mixed", "--seed", num(a.cfg.seed)};
  } else {
    a.cfg.mode = structure_from_string(a.mode);
    try {
      a.cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    net = generate(a.cfg);
    m.config = a.cfg.to_json();
    m.argv = {"generate",     "--mode",          a.mode,
              "--n",          num(static_cast<std::uint64_t>(a.cfg.n)),
              "--groups",     num(a.cfg.groups), "--avg-degree",
              num(a.cfg.avg_degree), "--p-in",   num(a.cfg.p_in),
              "--p-plus",     num(a.cfg.p_plus), "--p-minus",
              num(a.cfg.p_minus), "--seed",      num(a.cfg.seed)};
  }
  if (a.out.empty()) a.out = "ssbm_generate_seed" + num(a.cfg.seed);
  m.argv.insert(m.argv.end(), {"--out", a.out});
  const auto dir = prepare_dir(a.out);
  write_file(dir / "graph.edges", [&](std::ostream& o) { emit_edge_list(o, net.graph); });
  write_file(dir / "truth.labels",
             [&](std::ostream& o) { write_labels(o, net.graph, net.truth); });
  write_manifest(dir, m, started);
  out << graph_summary(net.graph).dump() << '\n';
  return kOk;
}

// ---- eval

int cmd_eval(const std::string& truth_path, const std::string& predicted_path, std::ostream& out,
             std::ostream&) {
  auto load = [](const std::string& path) {
    try {
      return read_labels(path);
    } catch (const std::exception& e) {
      throw DataError(path + ": " + e.what());
    }
  };
  const auto truth = load(truth_path);
  const auto predicted = load(predicted_path);
  try {
    const auto [a, b] = align_labels(truth, predicted);
    out << num(nmi(a, b)) << '\n';
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  } catch (const std::domain_error& e) {
    throw DataError(e.what());
  }
  return kOk;
}

// ---- sweep

struct Grid {
  std::vector<double> p_in;
  std::vector<double> p_plus;
  std::vector<double> p_minus;

  std::string to_string() const {
    auto list = [](const std::vector<double>& v) {
      std::string s;
      for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + num(v[k]);
      return s;
    };
    return "p_in=" + list(p_in) + ";p_plus=" + list(p_plus) + ";p_minus=" + list(p_minus);
  }
};

double parse_number(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw UsageError("--grid: '" + text + "' is not a number");
  }
  return v;
}

Grid parse_grid(const std::string& grid_text, const GeneratorConfig& base) {
  Grid grid;
  std::set<std::string> seen;
  std::stringstream fields(grid_text);
  std::string field;
  while (std::getline(fields, field, ';')) {
    if (field.empty()) continue;
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw UsageError("--grid: expected key=values in '" + field + "'");
    const std::string key = field.substr(0, eq);
    std::vector<double>* target = key == "p_in"      ? &grid.p_in
                                  : key == "p_plus"  ? &grid.p_plus
                                  : key == "p_minus" ? &grid.p_minus
                                                     : nullptr;
    if (target == nullptr) throw UsageError("--grid: unknown key '" + key + "'");
    if (!seen.insert(key).second) throw UsageError("--grid: key '" + key + "' repeated");
    std::stringstream values(field.substr(eq + 1));
    std::string value;
    while (std::getline(values, value, ',')) target->push_back(parse_number(value));
    if (target->empty()) throw UsageError("--grid: no values for '" + key + "'");
  }
  if (seen.empty()) throw UsageError("--grid: empty specification");
  if (grid.p_in.empty()) grid.p_in = {base.p_in};
  if (grid.p_plus.empty()) grid.p_plus = {base.p_plus};
  if (grid.p_minus.empty()) grid.p_minus = {base.p_minus};
  return grid;
}

struct SweepArgs {
  std::string grid;
  int realizations = 10;
  std::string mode = "community";
  GeneratorConfig base;
  std::string out;
  FitFlags flags;
};

int cmd_sweep(SweepArgs a, std::ostream& out, std::ostream&) {
  const auto started = std::chrono::steady_clock::now();
  a.flags.resolve();
  a.base.mode = structure_from_string(a.mode);
  a.base.seed = a.flags.seed;
  if (a.base.groups < 2) throw UsageError("sweep needs --groups >= 2");
  const Grid grid = parse_grid(a.grid, a.base);

  std::vector<GeneratorConfig> cells;
  for (double p_in : grid.p_in) {
    for (double p_plus : grid.p_plus) {
      for (double p_minus : grid.p_minus) {
        GeneratorConfig c = a.base;
        c.p_in = p_in;
        c.p_plus = p_plus;
        c.p_minus = p_minus;
        try {
          c.validate();
        } catch (const std::invalid_argument& e) {
          throw UsageError(e.what());
        }
        cells.push_back(c);
      }
    }
  }

  FitFlags inner = a.flags;
  inner.threads = 1;
  const auto reps = static_cast<std::size_t>(a.realizations);
  std::vector<double> scores(cells.size() * reps);
  parallel_for(scores.size(), a.flags.threads, [&](std::size_t k) {
    GeneratorConfig gen = cells[k / reps];
    gen.seed = a.flags.seed + k % reps;
    const auto net = generate(gen);
    auto cfg = inner.config(Mode::undirected);
    cfg.seed = gen.seed;
    const auto r = fit(net.graph, gen.groups, cfg);
    const auto hard = hard_partition(soft_membership(r.params), Side::outgoing);
    try {
      scores[k] = nmi(net.truth, hard.partition);
    } catch (const std::domain_error&) {
      scores[k] = 0.0;  // fit collapsed to one group
    }
  });

  if (a.out.empty()) a.out = "ssbm_sweep_seed" + num(a.flags.seed);
  const auto dir = prepare_dir(a.out);
  std::ostringstream csv;
  csv << "p_in,p_plus,p_minus,realizations,mean_nmi,std_nmi\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < reps; ++r) mean += scores[c * reps + r];
    mean /= static_cast<double>(reps);
    double var = 0.0;
    for (std::size_t r = 0; r < reps; ++r) var += std::pow(scores[c * reps + r] - mean, 2);
    const double sd = reps > 1 ? std::sqrt(var / static_cast<double>(reps - 1)) : 0.0;
    csv << num(cells[c].p_in) << ',' << num(cells[c].p_plus) << ',' << num(cells[c].p_minus)
        << ',' << reps << ',' << num(mean) << ',' << num(sd) << '\n';
  }
  write_file(dir / "sweep.csv", [&](std::ostream& o) { o << csv.str(); });

  Manifest m;
  m.command = "sweep";
  m.config = a.flags.to_json();
  m.config["grid"] = grid.to_string();
  m.config["realizations"] = a.realizations;
  m.config["generator"] = a.base.to_json();
  m.seed = a.flags.seed;
  m.argv = {"sweep",  "--grid",     grid.to_string(),  "--realizations", num(a.realizations),
            "--mode", a.mode,       "--n",             num(static_cast<std::uint64_t>(a.base.n)),
            "--groups", num(a.base.groups), "--avg-degree", num(a.base.avg_degree)};
  a.flags.append(m.argv);
  m.argv.insert(m.argv.end(), {"--out", a.out});
  write_manifest(dir, m, started);
  out << csv.str();
  return kOk;
}

void add_generator_flags(CLI::App* cmd, GeneratorConfig& cfg) {
  cmd->add_option("--n", cfg.n, "vertex count")->capture_default_str();
  cmd->add_option("--groups", cfg.groups, "planted group count")->capture_default_str();
  cmd->add_option("--avg-degree", cfg.avg_degree, "expected degree")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Signed stochastic block model fitting and benchmarks", "ssbm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "fit the model with a fixed group count");
  fit_cmd->add_option("graph", fit_args.graph, "edge list")->required();
  fit_cmd->add_option("-c,--groups", fit_args.groups, "group count")
      ->required()
      ->check(CLI::PositiveNumber);
  fit_cmd->add_flag("--directed,!--undirected", fit_args.directed,
                    "read the edge list as directed (default) or undirected");
  fit_cmd->add_flag("--require-converged", fit_args.require_converged,
                    "exit 4 if the best restart hit --max-iters");
  fit_cmd->add_option("-o,--out", fit_args.out, "output directory");
  add_fit_flags(fit_cmd, fit_args.flags);

  SelectArgs sel_args;
  auto* sel_cmd = app.add_subcommand("select", "choose the group count by description length");
  sel_cmd->add_option("graph", sel_args.graph, "edge list")->required();
  sel_cmd->add_option("--min-groups", sel_args.min_groups)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sel_cmd->add_option("--max-groups", sel_args.max_groups)->required()->check(CLI::PositiveNumber);
  sel_cmd->add_flag("--directed,!--undirected", sel_args.directed);
  sel_cmd->add_option("--coding-floor", sel_args.coding_floor,
                      "parameter entries below this are clamped or skipped")
      ->capture_default_str();
  sel_cmd->add_option("--zero-entries", sel_args.zeros)
      ->check(CLI::IsMember({"clamp", "skip"}))
      ->capture_default_str();
  sel_cmd->add_option("-o,--out", sel_args.out, "output directory");
  add_fit_flags(sel_cmd, sel_args.flags);

  GenerateArgs gen_args;
  auto* gen_cmd = app.add_subcommand("generate", "write a benchmark network and its truth labels");
  gen_cmd->add_option("--mode", gen_args.mode)
      ->check(CLI::IsMember({"community", "disassortative", "mixed"}))
      ->capture_default_str();
  add_generator_flags(gen_cmd, gen_args.cfg);
  gen_cmd->add_option("--p-in", gen_args.cfg.p_in)->capture_default_str();
  gen_cmd->add_option("--p-plus", gen_args.cfg.p_plus)->capture_default_str();
  gen_cmd->add_option("--p-minus", gen_args.cfg.p_minus)->capture_default_str();
  gen_cmd->add_option("--seed", gen_args.cfg.seed)->capture_default_str();
  gen_cmd->add_option("-o,--out", gen_args.out, "output directory");

  std::string truth_path, predicted_path;
  auto* eval_cmd = app.add_subcommand("eval", "print the NMI between two label files");
  eval_cmd->add_option("truth", truth_path)->required();
  eval_cmd->add_option("predicted", predicted_path)->required();

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "mean NMI over a grid of benchmark settings");
  sweep_cmd->add_option("--grid", sweep_args.grid, "e.g. \"p_in=0.9,0.5;p_plus=0;p_minus=0\"")
      ->required();
  sweep_cmd->add_option("--realizations", sweep_args.realizations)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep_cmd->add_option("--mode", sweep_args.mode)
      ->check(CLI::IsMember({"community", "disassortative"}))
      ->capture_default_str();
  add_generator_flags(sweep_cmd, sweep_args.base);
  sweep_cmd->add_option("-o,--out", sweep_args.out, "output directory");
  add_fit_flags(sweep_cmd, sweep_args.flags);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit_args, out, err);
    if (*sel_cmd) return cmd_select(sel_args, out, err);
    if (*gen_cmd) return cmd_generate(gen_args, out, err);
    if (*eval_cmd) return cmd_eval(truth_path, predicted_path, out, err);
    if (*sweep_cmd) return cmd_sweep(sweep_args, out, err);
  } catch (const UsageError& e) {
    err << "ssbm: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "ssbm: " << e.what() << '\n';
    return kData;
  } catch (const DegenerateParameters& e) {
    err << "ssbm: " << e.what() << '\n';
    return kConvergence;
  } catch (const std::exception& e) {
    err << "ssbm: " << e.what() << '\n';
    return 1;
  }
  return kUsage;
}

}  // namespace ssbm::cli
