// matchshap: Shapley values of matching games on weighted graphs.
//
// Subcommands: exact, approx, count-matchable, verify-reduction, bench.
// Graphs are read from a file in the edge-list format or from '-' (stdin).
// Exit codes: 0 ok, 1 verification/internal failure, 2 usage or parse
// error, 3 instance outside the capabilities of the requested method.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "matchshap/matchshap.hpp"

namespace {

using nlohmann::json;
using namespace matchshap;

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open input file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

Rational parse_positive_rational(const std::string& text, const char* what) {
  Rational v;
  try {
    v = parse_rational(text);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(what) + " must be a rational number, got '" + text + "'");
  }
  if (v <= 0) throw std::invalid_argument(std::string(what) + " must be positive");
  return v;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
};

// ----- exact ---------------------------------------------------------------

struct ExactArgs {
  std::string input;
  std::string method = "auto";
  int player = -1;
  bool emit_json = false;
  bool timing = false;
  int threads = 1;
};

struct ExactOutcome {
  ShapleyVector phi;
  std::vector<std::string> method_of;  // per vertex
};

ExactOutcome compute_exact(const WeightedGraph& g, const std::string& method, int threads) {
  ExactOutcome out;
  const int n = g.vertex_count();
  out.method_of.assign(static_cast<std::size_t>(n), method);
  if (method == "auto") {
    AutoOptions options;
    options.threads = threads;
    auto result = shapley_auto(g, options);
    out.phi = std::move(result.shapley);
    for (const auto& comp : result.components)
      for (int v : comp.vertices) out.method_of[static_cast<std::size_t>(v)] = method_name(comp.method);
  } else if (method == "bruteforce") {
    out.phi = shapley_brute_force(g, config::max_brute_force_n(), threads);
  } else if (method == "degree2") {
    out.phi = shapley_degree_two(g);
  } else if (method == "modular") {
    TypePartition part = find_modular_decomposition(g, ModuleKind::coclique);
    if (g.is_unweighted()) {
      TypePartition cliques = find_modular_decomposition(g, ModuleKind::clique);
      if (cliques.module_count() < part.module_count()) part = cliques;
    }
    if (part.module_count() > config::kDefaultModularKBound)
      throw CapabilityError("smallest modular decomposition has " + std::to_string(part.module_count()) +
                            " modules, above the player-type DP bound of " +
                            std::to_string(config::kDefaultModularKBound));
    out.phi = shapley_by_player_types(make_matching_profile_oracle(g, part), part);
  } else if (method == "components") {
    out.phi = shapley_by_components(
        g, [&](const WeightedGraph& sub) { return shapley_brute_force(sub, config::max_brute_force_n(), threads); });
  } else {
    throw std::invalid_argument("unknown method '" + method + "'");
  }
  return out;
}

int run_exact(const ExactArgs& args) {
  Timer timer;
  const std::string bytes = read_input(args.input);
  const WeightedGraph g = parse_graph(bytes);
  if (args.player >= g.vertex_count())
    throw std::invalid_argument("player " + std::to_string(args.player) + " out of range");

  ExactOutcome outcome = compute_exact(g, args.method, args.threads);

  // Efficiency invariant: the reported vector must sum to v(N) exactly.
  if (outcome.phi.sum() != max_matching_value(g)) {
    std::cerr << "error: efficiency check failed (sum of values != v(N)); this is a bug\n";
    return 1;
  }

  const double ms = timer.elapsed_ms();
  if (args.emit_json) {
    json results = json::array();
    for (int v = 0; v < g.vertex_count(); ++v) {
      if (args.player >= 0 && v != args.player) continue;
      results.push_back({{"vertex", v},
                         {"value", to_fraction_string(outcome.phi[v])},
                         {"method", outcome.method_of[static_cast<std::size_t>(v)]}});
    }
    json report = {{"command", "exact"},
                   {"input_digest", fnv1a_hex(bytes)},
                   {"vertex_count", g.vertex_count()},
                   {"method", args.method},
                   {"results", results}};
    if (args.timing) report["timing_ms"] = ms;
    std::cout << report.dump(2) << "\n";
  } else {
    for (int v = 0; v < g.vertex_count(); ++v) {
      if (args.player >= 0 && v != args.player) continue;
      std::cout << v << "\t" << to_fraction_string(outcome.phi[v]) << "\t"
                << outcome.method_of[static_cast<std::size_t>(v)] << "\n";
    }
    if (args.timing) std::cerr << "timing: " << ms << " ms\n";
  }
  return 0;
}

// ----- approx ----------------------------------------------------------------

struct ApproxArgs {
  std::string input;
  std::string eps_text;
  std::string delta_text = "1/4";
  std::uint64_t seed = 0;
  int player = -1;
  bool raw = false;
  bool emit_json = false;
  bool timing = false;
  int threads = 1;
};

int run_approx(const ApproxArgs& args) {
  Timer timer;
  const Rational eps = parse_positive_rational(args.eps_text, "--eps");
  Rational delta;
  try {
    delta = parse_rational(args.delta_text);
  } catch (const std::exception&) {
    throw std::invalid_argument("--delta must be a rational number");
  }
  if (delta <= 0 || delta >= 1) throw std::invalid_argument("--delta must lie in (0, 1)");

  const std::string bytes = read_input(args.input);
  const WeightedGraph g = parse_graph(bytes);
  if (args.player >= g.vertex_count())
    throw std::invalid_argument("player " + std::to_string(args.player) + " out of range");

  const EstimateMode mode = args.raw ? EstimateMode::raw : EstimateMode::normalized;
  std::vector<SampleEstimate> estimates;
  if (args.player >= 0) {
    if (args.raw && amplification_runs(delta) == 1)
      estimates.push_back(approx_raw_shapley(g, args.player, eps, args.seed, args.threads));
    else if (args.raw) {
      auto all = approx_shapley_all(g, eps, delta, args.seed, mode, args.threads);
      estimates.push_back(all[static_cast<std::size_t>(args.player)]);
    } else {
      estimates.push_back(approx_shapley(g, args.player, eps, delta, args.seed, args.threads));
    }
  } else {
    estimates = approx_shapley_all(g, eps, delta, args.seed, mode, args.threads);
  }

  std::uint64_t samples = 0, runs = 0;
  for (const auto& e : estimates) {
    samples = std::max(samples, e.samples_used);
    runs = std::max(runs, e.runs);
  }
  const double ms = timer.elapsed_ms();
  if (args.emit_json) {
    json results = json::array();
    for (const auto& e : estimates)
      results.push_back({{"vertex", e.player},
                         {"estimate", to_decimal_string(e.estimate)},
                         {"samples_used", e.samples_used},
                         {"runs", e.runs}});
    json report = {{"command", "approx"},
                   {"input_digest", fnv1a_hex(bytes)},
                   {"vertex_count", g.vertex_count()},
                   {"eps", to_fraction_string(eps)},
                   {"delta", to_fraction_string(delta)},
                   {"seed", args.seed},
                   {"mode", args.raw ? "raw" : "normalized"},
                   {"samples_per_run", samples},
                   {"results", results}};
    if (args.timing) report["timing_ms"] = ms;
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << "# approx eps=" << to_fraction_string(eps) << " delta=" << to_fraction_string(delta)
              << " seed=" << args.seed << " samples=" << samples << " runs=" << runs
              << " mode=" << (args.raw ? "raw" : "normalized") << " digest=" << fnv1a_hex(bytes) << "\n";
    for (const auto& e : estimates)
      std::cout << e.player << "\t" << to_decimal_string(e.estimate) << "\t" << e.samples_used << "\t"
                << e.runs << "\n";
    if (args.timing) std::cerr << "timing: " << ms << " ms\n";
  }
  return 0;
}

// ----- count-matchable ---------------------------------------------------------

struct CountArgs {
  std::string input;
  int k = -1;
  bool all = false;
  bool emit_json = false;
  int threads = 1;  // accepted for interface uniformity; counting is a single pass
};

int run_count(const CountArgs& args) {
  const std::string bytes = read_input(args.input);
  const WeightedGraph g = parse_graph(bytes);
  if (args.all) {
    AlphaVector alpha = alpha_vector(g);
    if (args.emit_json) {
      json values = json::array();
      for (const auto& a : alpha.alpha) values.push_back(a.get_str());
      std::cout << json{{"command", "count-matchable"}, {"input_digest", fnv1a_hex(bytes)}, {"alpha", values}}.dump(2)
                << "\n";
    } else {
      for (std::size_t k = 0; k < alpha.alpha.size(); ++k)
        std::cout << (k ? " " : "") << alpha.alpha[k].get_str();
      std::cout << "\n";
    }
    return 0;
  }
  if (args.k < 0 || args.k > g.vertex_count())
    throw std::invalid_argument("-k must lie in [0, vertex count]");
  if (args.k % 2 != 0) std::cerr << "note: no odd-size vertex set is perfectly matchable\n";
  BigInt count = count_matchable_subsets(g, args.k);
  if (args.emit_json)
    std::cout << json{{"command", "count-matchable"},
                      {"input_digest", fnv1a_hex(bytes)},
                      {"k", args.k},
                      {"alpha_k", count.get_str()}}
                     .dump(2)
              << "\n";
  else
    std::cout << count.get_str() << "\n";
  return 0;
}

// ----- verify-reduction ----------------------------------------------------------

struct VerifyArgs {
  std::string input;
  bool emit_json = false;
  int threads = 1;
};

int run_verify(const VerifyArgs& args) {
  const std::string bytes = read_input(args.input);
  const WeightedGraph g = parse_graph(bytes);
  ReductionReport report = verify_reduction(g, 8, args.threads);
  if (args.emit_json) {
    json rows = json::array();
    for (const auto& row : report.rows)
      rows.push_back({{"k", row.k},
                      {"counted", row.counted.get_str()},
                      {"recovered", row.recovered.get_str()},
                      {"match", row.match}});
    std::cout << json{{"command", "verify-reduction"},
                      {"input_digest", fnv1a_hex(bytes)},
                      {"rows", rows},
                      {"pass", report.pass}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "k\tcounted\trecovered\tstatus\n";
    for (const auto& row : report.rows)
      std::cout << row.k << "\t" << row.counted.get_str() << "\t" << row.recovered.get_str() << "\t"
                << (row.match ? "ok" : "MISMATCH") << "\n";
    std::cout << (report.pass ? "PASS" : "FAIL") << "\n";
  }
  return report.pass ? 0 : 1;
}

// ----- bench ---------------------------------------------------------------------

struct BenchArgs {
  std::string input;
  std::string method = "auto";  // exact methods, or "approx"
  std::string eps_text = "1/2";
  std::uint64_t seed = 0;
  int repeat = 3;
  int threads = 1;
};

int run_bench(const BenchArgs& args) {
  if (args.repeat < 1) throw std::invalid_argument("--repeat must be at least 1");
  std::vector<double> times;
  int rc = 0;
  for (int r = 0; r < args.repeat; ++r) {
    Timer timer;
    // Only the last run prints results, so stdout stays byte-stable.
    std::ostringstream sink;
    std::streambuf* saved = nullptr;
    if (r + 1 < args.repeat) saved = std::cout.rdbuf(sink.rdbuf());
    if (args.method == "approx") {
      ApproxArgs inner;
      inner.input = args.input;
      inner.eps_text = args.eps_text;
      inner.seed = args.seed;
      inner.threads = args.threads;
      rc = run_approx(inner);
    } else {
      ExactArgs inner;
      inner.input = args.input;
      inner.method = args.method;
      inner.threads = args.threads;
      rc = run_exact(inner);
    }
    if (saved) std::cout.rdbuf(saved);
    times.push_back(timer.elapsed_ms());
    std::cerr << "run " << (r + 1) << ": " << times.back() << " ms\n";
    if (rc != 0) return rc;
  }
  std::sort(times.begin(), times.end());
  std::cerr << "median: " << times[times.size() / 2] << " ms over " << args.repeat << " runs\n";
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shapley values of matching games on weighted graphs"};
  app.require_subcommand(1);

  std::function<int()> action;

  ExactArgs exact_args;
  auto* exact = app.add_subcommand("exact", "Exact Shapley values (rational output)");
  exact->add_option("input", exact_args.input, "graph file, or - for stdin")->required();
  exact->add_option("--player", exact_args.player, "restrict output to one vertex")
      ->check(CLI::NonNegativeNumber);
  exact->add_option("--method", exact_args.method, "auto|bruteforce|degree2|modular|components")
      ->check(CLI::IsMember({"auto", "bruteforce", "degree2", "modular", "components"}));
  exact->add_flag("--json", exact_args.emit_json, "emit a JSON run report");
  exact->add_flag("--timing", exact_args.timing, "report wall time");
  exact->add_option("--threads", exact_args.threads, "worker threads (results are independent of this)")
      ->check(CLI::PositiveNumber);
  exact->callback([&] { action = [&] { return run_exact(exact_args); }; });

  ApproxArgs approx_args;
  auto* approx = app.add_subcommand("approx", "FPRAS estimates of Shapley values");
  approx->add_option("input", approx_args.input, "graph file, or - for stdin")->required();
  approx->add_option("--eps", approx_args.eps_text, "precision parameter (positive rational)")->required();
  approx->add_option("--delta", approx_args.delta_text, "failure probability in (0,1), default 1/4");
  approx->add_option("--seed", approx_args.seed, "master seed (64-bit)");
  approx->add_option("--player", approx_args.player, "restrict to one vertex")->check(CLI::NonNegativeNumber);
  approx->add_flag("--raw", approx_args.raw, "estimate raw values (n! times the Shapley value)");
  approx->add_flag("--json", approx_args.emit_json, "emit a JSON run report");
  approx->add_flag("--timing", approx_args.timing, "report wall time");
  approx->add_option("--threads", approx_args.threads, "worker threads (results are independent of this)")
      ->check(CLI::PositiveNumber);
  approx->callback([&] { action = [&] { return run_approx(approx_args); }; });

  CountArgs count_args;
  auto* count = app.add_subcommand("count-matchable", "Count perfectly matchable induced subgraphs");
  count->add_option("input", count_args.input, "graph file, or - for stdin")->required();
  auto* kopt = count->add_option("-k", count_args.k, "subset size");
  auto* allopt = count->add_flag("--all", count_args.all, "full vector alpha_0..alpha_n");
  kopt->excludes(allopt);
  count->add_flag("--json", count_args.emit_json, "emit a JSON run report");
  count->add_option("--threads", count_args.threads, "accepted for uniformity; counting runs one pass")
      ->check(CLI::PositiveNumber);
  count->callback([&] {
    if (!count_args.all && count->count("-k") == 0)
      throw CLI::ValidationError("count-matchable", "need -k <size> or --all");
    action = [&] { return run_count(count_args); };
  });

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify-reduction", "Round-trip the counting reduction on a small graph");
  verify->add_option("input", verify_args.input, "graph file, or - for stdin")->required();
  verify->add_flag("--json", verify_args.emit_json, "emit a JSON run report");
  verify->add_option("--threads", verify_args.threads, "worker threads (results are independent of this)")
      ->check(CLI::PositiveNumber);
  verify->callback([&] { action = [&] { return run_verify(verify_args); }; });

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Time a computation (results to stdout, timings to stderr)");
  bench->add_option("input", bench_args.input, "graph file, or - for stdin")->required();
  bench->add_option("--method", bench_args.method, "auto|bruteforce|degree2|modular|components|approx")
      ->check(CLI::IsMember({"auto", "bruteforce", "degree2", "modular", "components", "approx"}));
  bench->add_option("--eps", bench_args.eps_text, "precision for --method approx");
  bench->add_option("--seed", bench_args.seed, "master seed for --method approx");
  bench->add_option("--repeat", bench_args.repeat, "number of timed runs")->check(CLI::PositiveNumber);
  bench->add_option("--threads", bench_args.threads, "worker threads")->check(CLI::PositiveNumber);
  bench->callback([&] { action = [&] { return run_bench(bench_args); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return action();
  } catch (const matchshap::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const matchshap::CapabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
