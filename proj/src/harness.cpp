#include "spim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <json.hpp>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

#include "spim/baselines.hpp"
#include "spim/encoding.hpp"
#include "spim/instance_io.hpp"

namespace spim {

namespace {

using nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw ConfigError("invalid value '" + value + "' for " + key + ": " + why);
}

template <class T>
T to_number(const std::string& key, const std::string& value) {
  T out{};
  const std::string v = trim(value);
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) bad_value(key, value, "not a number");
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, value, "expected true or false");
}

std::vector<double> to_number_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(to_number<double>(key, item));
  if (out.empty()) bad_value(key, value, "empty list");
  return out;
}

std::string join_numbers(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_double(values[i]);
  return out;
}

std::string join(const std::vector<std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + values[i];
  return out;
}

bool is_known_solver(const std::string& s) { return s == "euler-sim" || s == "sg" || s == "brute" || s == "random"; }

// Keys that change where or how fast results are produced, not what they are.
bool affects_results(const std::string& key) { return key != "output" && key != "workers"; }

std::string setting_value(const ExperimentConfig& c, const std::string& key) {
  const AnnealParams& a = c.anneal;
  if (key == "task") return to_string(c.task);
  if (key == "instance") return c.instance_path;
  if (key == "encoding") return c.encoding_path;
  if (key == "n") return std::to_string(c.n);
  if (key == "density") return format_double(c.density);
  if (key == "sign") return std::to_string(c.sign);
  if (key == "seed") return std::to_string(c.seed);
  if (key == "repetitions") return std::to_string(c.repetitions);
  if (key == "solvers") return join(c.solvers);
  if (key == "reference") return c.reference;
  if (key == "iterations") return std::to_string(a.iterations);
  if (key == "restarts") return std::to_string(a.restarts);
  if (key == "initial_flip_fraction") return format_double(a.initial_flip_fraction);
  if (key == "final_flip_fraction") return a.final_flip_fraction ? format_double(*a.final_flip_fraction) : "auto";
  if (key == "temperature_start") return a.temperature_start ? format_double(*a.temperature_start) : "auto";
  if (key == "warmup_proposals") return std::to_string(a.warmup_proposals);
  if (key == "cooling_rate") return format_double(a.cooling_rate);
  if (key == "backend") return a.backend ? to_string(*a.backend) : "auto";
  if (key == "objective") return to_string(a.objective);
  if (key == "noise_level") return format_double(a.noise.level);
  if (key == "noise_levels") return join_numbers(c.noise_levels);
  if (key == "densities") return join_numbers(c.densities);
  if (key == "sg_starts") return std::to_string(c.sg_starts);
  if (key == "random_samples") return std::to_string(c.random_samples);
  if (key == "slm_cols") return std::to_string(c.geometry.slm_cols);
  if (key == "slm_rows") return std::to_string(c.geometry.slm_rows);
  if (key == "macropixel") return std::to_string(c.geometry.macropixel);
  if (key == "padding") return std::to_string(c.geometry.padding);
  if (key == "bench_repeats") return std::to_string(c.bench_repeats);
  if (key == "verify_cases") return std::to_string(c.verify_cases);
  if (key == "traces") return c.traces ? "true" : "false";
  if (key == "output") return c.output;
  if (key == "workers") return std::to_string(c.workers);
  throw ConfigError("unknown key '" + key + "'");
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t worker_count(const ExperimentConfig& c, std::size_t jobs) {
  std::size_t w = c.workers ? c.workers : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(w, jobs));
}

// Runs body(i) for i in [0, count) on a small pool; rethrows the first failure.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body) {
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto loop = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(loop);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

struct Problem {
  MaxCutInstance instance;
  Rank2Encoding encoding;
  double density = 1.0;
  int sign = 1;
};

Problem make_problem(const ExperimentConfig& c, double density, std::uint64_t seed) {
  if (c.instance_path.empty()) {
    GeneratedInstance g = generate_instance(c.n, density, c.sign, seed);
    return {std::move(g.instance), std::move(g.encoding), density, c.sign};
  }
  Problem p;
  p.instance = read_instance(c.instance_path);
  p.encoding = c.encoding_path.empty() ? fit_rank2(p.instance).encoding : read_encoding(c.encoding_path);
  if (p.encoding.size() != p.instance.size())
    throw std::runtime_error("encoding has " + std::to_string(p.encoding.size()) + " spins, instance has " +
                             std::to_string(p.instance.size()) + " vertices");
  p.density = p.instance.density();
  p.sign = p.encoding.sign;
  return p;
}

struct SolverRun {
  std::string solver;
  std::size_t n = 0;
  double density = 0.0;
  int sign = 1;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  CutReport report;
  std::string trace_jsonl;
};

std::string config_string(const SpinConfig& x) {
  std::string s(x.size(), '+');
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < 0) s[i] = '-';
  return s;
}

std::string trace_lines(const AnnealResult& result, const std::string& hash, std::uint64_t seed) {
  std::string out;
  for (const AnnealTrace& t : result.traces)
    for (const TraceRecord& r : t.records) {
      ordered_json j;
      j["config_hash"] = hash;
      j["seed"] = seed;
      j["restart"] = t.restart;
      j["restart_seed"] = t.seed;
      j["iteration"] = r.iteration;
      j["cost"] = r.cost;
      j["proposed_cost"] = r.proposed_cost;
      j["hamiltonian"] = r.hamiltonian;
      j["cut_value"] = r.cut_value;
      j["best_cut"] = r.best_cut;
      j["temperature"] = r.temperature;
      j["flip_fraction"] = r.flip_fraction;
      j["flips_proposed"] = r.flips_proposed;
      j["accepted"] = r.accepted;
      out += j.dump() + "\n";
    }
  return out;
}

SolverRun solve_one(const ExperimentConfig& c, const Problem& p, const std::string& solver, std::uint64_t seed,
                    double noise_level, const std::string& hash) {
  SolverRun run;
  run.solver = solver;
  run.n = p.instance.size();
  run.density = p.density;
  run.sign = p.sign;
  run.noise_level = noise_level;
  run.seed = seed;
  if (solver == "euler-sim") {
    AnnealParams params = c.anneal;
    params.seed = seed;
    params.noise = NoiseSpec{noise_level, seed};
    const AnnealResult result = anneal(p.instance, p.encoding, build_layout(run.n, c.geometry), params);
    run.report = result.report;
    run.iterations = params.iterations;
    if (c.traces) run.trace_jsonl = trace_lines(result, hash, seed);
  } else if (solver == "sg") {
    run.report = c.sg_starts <= 1 ? sahni_gonzalez(p.instance) : sahni_gonzalez_multistart(p.instance, c.sg_starts, seed);
    run.iterations = c.sg_starts;
  } else if (solver == "brute") {
    run.report = brute_force_maxcut(p.instance);
    run.iterations = std::size_t{1} << (run.n - 1);
  } else {
    run.report = random_cut(p.instance, c.random_samples, seed);
    run.iterations = c.random_samples;
  }
  run.report.seed = seed;
  return run;
}

std::string results_row(const SolverRun& r) {
  return r.solver + "," + std::to_string(r.n) + "," + format_double(r.density) + "," + std::to_string(r.sign) + "," +
         format_double(r.noise_level) + "," + std::to_string(r.seed) + "," + format_double(r.report.cut_value) + "," +
         format_double(r.report.hamiltonian) + "," + std::to_string(r.iterations) + "," +
         format_double(r.report.wall_time_seconds) + "\n";
}

std::string report_line(const SolverRun& r, const std::string& hash) {
  ordered_json j;
  j["config_hash"] = hash;
  j["solver"] = r.solver;
  j["solver_id"] = r.report.solver_id;
  j["n"] = r.n;
  j["density"] = r.density;
  j["sign"] = r.sign;
  j["noise_level"] = r.noise_level;
  j["seed"] = r.seed;
  j["cut_value"] = r.report.cut_value;
  j["hamiltonian"] = r.report.hamiltonian;
  j["wall_time_s"] = r.report.wall_time_seconds;
  j["config"] = config_string(r.report.config);
  return j.dump() + "\n";
}

std::string trace_name(const SolverRun& r) {
  return "traces/" + r.solver + "_n" + std::to_string(r.n) + "_d" + format_double(r.density) + "_L" +
         format_double(r.noise_level) + "_s" + std::to_string(r.seed) + ".jsonl";
}

// results.csv, reports.jsonl and per-run traces, in job order.
void write_runs(const std::filesystem::path& dir, const std::vector<SolverRun>& runs, const std::string& hash) {
  std::string csv = std::string(kResultsHeader) + "\n";
  std::string reports;
  for (const auto& r : runs) {
    csv += results_row(r);
    reports += report_line(r, hash);
  }
  write_file_atomic(dir / "results.csv", csv);
  write_file_atomic(dir / "reports.jsonl", reports);
}

void write_trace(const std::filesystem::path& dir, const SolverRun& r) {
  if (!r.trace_jsonl.empty()) write_file_atomic(dir / trace_name(r), r.trace_jsonl);
}

struct Stats {
  double mean = 0.0, max = 0.0, min = 0.0, mean_wall = 0.0;
};

Stats stats_of(const std::vector<const SolverRun*>& runs) {
  Stats s;
  if (runs.empty()) return s;
  s.max = -INFINITY;
  s.min = INFINITY;
  for (const SolverRun* r : runs) {
    s.mean += r->report.cut_value;
    s.mean_wall += r->report.wall_time_seconds;
    s.max = std::max(s.max, r->report.cut_value);
    s.min = std::min(s.min, r->report.cut_value);
  }
  s.mean /= static_cast<double>(runs.size());
  s.mean_wall /= static_cast<double>(runs.size());
  return s;
}

std::vector<std::uint64_t> seeds_of(const ExperimentConfig& c) {
  std::vector<std::uint64_t> out(c.repetitions);
  std::iota(out.begin(), out.end(), c.seed);
  return out;
}

void write_resolved(const std::filesystem::path& dir, const ExperimentConfig& c, const std::string& hash) {
  write_file_atomic(dir / "config.resolved", "# config_hash: " + hash + "\n" + serialize_config(c));
}

// ---- tasks ----

void run_generate(const ExperimentConfig& c, const std::filesystem::path& dir, std::ostream& log) {
  if (!c.instance_path.empty()) throw ConfigError("generate does not take an instance file");
  const auto seeds = seeds_of(c);
  std::vector<std::string> rows(seeds.size());
  parallel_for(seeds.size(), worker_count(c, seeds.size()), [&](std::size_t i) {
    const GeneratedInstance g = generate_instance(c.n, c.density, c.sign, seeds[i]);
    const std::string stem = "instances/rank2_n" + std::to_string(c.n) + "_d" + format_double(c.density) + "_s" +
                             std::to_string(c.sign) + "_seed" + std::to_string(seeds[i]);
    write_instance(dir / (stem + ".txt"), g.instance);
    write_encoding(dir / (stem + ".json"), g.encoding);
    rows[i] = stem + ".txt," + std::to_string(c.n) + "," + format_double(g.instance.density()) + "," +
              std::to_string(c.sign) + "," + std::to_string(seeds[i]) + "," +
              std::to_string(g.instance.nonzero_pairs()) + "," + format_double(total_weight(g.instance)) + "\n";
  });
  std::string csv = "file,n,density,sign,seed,nonzero_pairs,total_weight\n";
  for (const auto& r : rows) csv += r;
  write_file_atomic(dir / "instances.csv", csv);
  log << "generated " << seeds.size() << " instance(s) in " << (dir / "instances").string() << "\n";
}

void write_solver_summary(const ExperimentConfig& c, const std::filesystem::path& dir,
                          const std::vector<SolverRun>& runs, std::ostream& log) {
  // Runs for the same seed share an instance, so a reference run pairs with each.
  std::map<std::uint64_t, const SolverRun*> reference;
  for (const auto& r : runs)
    if (r.solver == c.reference) reference[r.seed] = &r;

  std::string csv = "solver,runs,mean_cut,max_cut,min_cut,mean_wall_time_s,improvement_pct,matches_reference\n";
  for (const auto& solver : c.solvers) {
    std::vector<const SolverRun*> mine;
    std::size_t matches = 0;
    for (const auto& r : runs)
      if (r.solver == solver) {
        mine.push_back(&r);
        if (reference.count(r.seed) && r.report.cut_value >= reference[r.seed]->report.cut_value) ++matches;
      }
    const Stats s = stats_of(mine);
    std::string pct = "", match = "";
    if (!c.reference.empty()) {
      std::vector<const SolverRun*> refs;
      for (const auto& [seed, r] : reference) refs.push_back(r);
      pct = format_double(improvement_pct(s.mean, stats_of(refs).mean));
      match = std::to_string(matches);
      if (solver != c.reference)
        log << solver << " reached the " << c.reference << " cut on " << matches << "/" << mine.size() << " run(s)"
            << (c.reference == "brute" ? (matches == mine.size() ? " (optimum matched)" : " (optimum missed)") : "")
            << "\n";
    }
    csv += solver + "," + std::to_string(mine.size()) + "," + format_double(s.mean) + "," + format_double(s.max) +
           "," + format_double(s.min) + "," + format_double(s.mean_wall) + "," + pct + "," + match + "\n";
  }
  write_file_atomic(dir / "summary.csv", csv);
}

void run_solve(const ExperimentConfig& c, const std::filesystem::path& dir, const std::string& hash,
               std::ostream& log) {
  const auto seeds = seeds_of(c);
  const std::size_t per_seed = c.solvers.size();
  std::vector<SolverRun> runs(seeds.size() * per_seed);
  // A file instance is loaded (and fitted) once; generated ones depend on the seed.
  std::optional<Problem> shared;
  if (!c.instance_path.empty()) shared = make_problem(c, c.density, c.seed);
  parallel_for(seeds.size(), worker_count(c, seeds.size()), [&](std::size_t i) {
    const Problem p = shared ? *shared : make_problem(c, c.density, seeds[i]);
    for (std::size_t s = 0; s < per_seed; ++s) {
      SolverRun r = solve_one(c, p, c.solvers[s], seeds[i], c.anneal.noise.level, hash);
      write_trace(dir, r);
      runs[i * per_seed + s] = std::move(r);
    }
  });
  write_runs(dir, runs, hash);
  write_solver_summary(c, dir, runs, log);
  for (const auto& r : runs)
    log << r.solver << " seed " << r.seed << ": cut " << format_double(r.report.cut_value) << "\n";
}

void run_sweep_density(const ExperimentConfig& c, const std::filesystem::path& dir, const std::string& hash,
                       std::ostream& log) {
  if (!c.instance_path.empty()) throw ConfigError("sweep-density generates its own instances; drop 'instance'");
  const auto seeds = seeds_of(c);
  const std::size_t per_cell = c.solvers.size();
  const std::size_t cells = c.densities.size() * seeds.size();
  std::vector<SolverRun> runs(cells * per_cell);
  parallel_for(cells, worker_count(c, cells), [&](std::size_t cell) {
    const double density = c.densities[cell / seeds.size()];
    const std::uint64_t seed = seeds[cell % seeds.size()];
    const Problem p = make_problem(c, density, seed);
    for (std::size_t s = 0; s < per_cell; ++s) {
      SolverRun r = solve_one(c, p, c.solvers[s], seed, c.anneal.noise.level, hash);
      write_trace(dir, r);
      runs[cell * per_cell + s] = std::move(r);
    }
  });
  write_runs(dir, runs, hash);

  std::string csv =
      "density,solver,seeds,mean_cut,max_cut,min_cut,mean_wall_time_s,improvement_pct,wins_vs_reference\n";
  for (std::size_t d = 0; d < c.densities.size(); ++d) {
    const SolverRun* base = &runs[d * seeds.size() * per_cell];
    auto run_at = [&](std::size_t seed_index, std::size_t solver) {
      return &base[seed_index * per_cell + solver];
    };
    const auto ref_it = std::find(c.solvers.begin(), c.solvers.end(), c.reference);
    const bool has_ref = ref_it != c.solvers.end();
    const std::size_t ref = has_ref ? static_cast<std::size_t>(ref_it - c.solvers.begin()) : 0;
    std::vector<const SolverRun*> ref_runs;
    if (has_ref)
      for (std::size_t i = 0; i < seeds.size(); ++i) ref_runs.push_back(run_at(i, ref));
    const Stats ref_stats = stats_of(ref_runs);
    for (std::size_t s = 0; s < per_cell; ++s) {
      std::vector<const SolverRun*> mine;
      std::size_t wins = 0;
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        mine.push_back(run_at(i, s));
        if (has_ref && run_at(i, s)->report.cut_value >= run_at(i, ref)->report.cut_value) ++wins;
      }
      const Stats st = stats_of(mine);
      csv += format_double(c.densities[d]) + "," + c.solvers[s] + "," + std::to_string(seeds.size()) + "," +
             format_double(st.mean) + "," + format_double(st.max) + "," + format_double(st.min) + "," +
             format_double(st.mean_wall) + "," + (has_ref ? format_double(improvement_pct(st.mean, ref_stats.mean)) : "") +
             "," + (has_ref ? std::to_string(wins) : "") + "\n";
    }
  }
  write_file_atomic(dir / "summary.csv", csv);
  log << "density sweep: " << c.densities.size() << " densities x " << seeds.size() << " seeds x " << per_cell
      << " solver(s)\n";
}

void run_sweep_noise(const ExperimentConfig& c, const std::filesystem::path& dir, const std::string& hash,
                     std::ostream& log) {
  std::vector<double> levels = c.noise_levels;
  if (std::find(levels.begin(), levels.end(), 0.0) == levels.end()) {
    levels.insert(levels.begin(), 0.0);
    log << "added the noiseless reference level 0\n";
  }
  const auto seeds = seeds_of(c);
  const std::size_t jobs = seeds.size() * levels.size();
  std::vector<SolverRun> runs(jobs);
  std::optional<Problem> shared;
  if (!c.instance_path.empty()) shared = make_problem(c, c.density, c.seed);
  parallel_for(seeds.size(), worker_count(c, seeds.size()), [&](std::size_t i) {
    const Problem p = shared ? *shared : make_problem(c, c.density, seeds[i]);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      SolverRun r = solve_one(c, p, "euler-sim", seeds[i], levels[l], hash);
      write_trace(dir, r);
      runs[l * seeds.size() + i] = std::move(r);
    }
  });
  write_runs(dir, runs, hash);

  const std::size_t zero = static_cast<std::size_t>(std::find(levels.begin(), levels.end(), 0.0) - levels.begin());
  std::vector<double> ref_cuts;
  for (std::size_t i = 0; i < seeds.size(); ++i) ref_cuts.push_back(runs[zero * seeds.size() + i].report.cut_value);
  const double ref_mean = mean_interval(ref_cuts).mean;

  std::string csv =
      "noise_level,seeds,mean_cut,ci95_low,ci95_high,max_cut,min_cut,mean_diff_vs_0,diff_ci95_low,diff_ci95_high,"
      "improvement_pct,mean_wall_time_s\n";
  for (std::size_t l = 0; l < levels.size(); ++l) {
    std::vector<double> cuts, diffs;
    std::vector<const SolverRun*> mine;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const SolverRun& r = runs[l * seeds.size() + i];
      mine.push_back(&r);
      cuts.push_back(r.report.cut_value);
      diffs.push_back(r.report.cut_value - ref_cuts[i]);
    }
    const Stats st = stats_of(mine);
    const MeanInterval ci = mean_interval(cuts);
    const MeanInterval dci = mean_interval(diffs);
    const double pct = improvement_pct(ci.mean, ref_mean);
    csv += format_double(levels[l]) + "," + std::to_string(seeds.size()) + "," + format_double(ci.mean) + "," +
           format_double(ci.low) + "," + format_double(ci.high) + "," + format_double(st.max) + "," +
           format_double(st.min) + "," + format_double(dci.mean) + "," + format_double(dci.low) + "," +
           format_double(dci.high) + "," + format_double(pct) + "," + format_double(st.mean_wall) + "\n";
    log << "noise " << format_double(levels[l]) << ": mean cut " << format_double(ci.mean) << " ("
        << format_double(pct) << "% vs level 0)\n";
  }
  write_file_atomic(dir / "summary.csv", csv);
}

struct CheckResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double max_error = 0.0;
  void record(double error, double tolerance) {
    ++cases;
    max_error = std::max(max_error, error);
    if (!(error <= tolerance)) ++failures;
  }
};

Rank2Encoding random_encoding(std::size_t n, int sign, Rng& rng) {
  std::uniform_real_distribution<double> phase(0.0, std::numbers::pi);
  std::vector<double> a(n), b(n);
  for (std::size_t l = 0; l < n; ++l) {
    a[l] = phase(rng);
    b[l] = phase(rng);
  }
  return Rank2Encoding::from_phases(std::move(a), std::move(b), sign);
}

SpinConfig random_spins(std::size_t n, Rng& rng) {
  std::vector<std::int8_t> x(n);
  std::bernoulli_distribution coin(0.5);
  for (auto& s : x) s = coin(rng) ? 1 : -1;
  return SpinConfig(std::move(x));
}

std::vector<CheckResult> verify_checks(const ExperimentConfig& c) {
  const std::size_t cases = c.verify_cases;
  Rng rng = make_rng(c.seed, 0, 0x766572);
  std::uniform_int_distribution<std::size_t> small_n(2, 20);
  std::uniform_real_distribution<double> weight(-1.0, 1.0);

  CheckResult cut{"cut_identity"}, sym{"flip_symmetry"}, dc{"dc_identity"}, optics{"full_field_equals_closed_form"},
      parseval{"parseval"}, bound{"sg_below_brute_force"}, det{"sg_deterministic"}, fit{"fit_in_family"};

  for (std::size_t t = 0; t < cases; ++t) {
    const std::size_t n = small_n(rng);
    std::vector<Edge> edges;
    for (std::uint32_t l = 0; l < n; ++l)
      for (std::uint32_t k = l + 1; k < n; ++k)
        if (std::bernoulli_distribution(0.6)(rng)) edges.push_back({l, k, weight(rng)});
    const MaxCutInstance inst = MaxCutInstance::from_edges(n, std::move(edges));
    const SpinConfig x = random_spins(n, rng);
    double direct = 0.0, scale = 0.0;
    for (const Edge& e : inst.edges()) {
      if (x[e.l] != x[e.k]) direct += e.w;
      scale += std::abs(e.w);
    }
    const double s = total_weight(inst), h = hamiltonian(inst, x);
    cut.record(std::abs(cut_value(inst, x) - 0.5 * (s - h)) / std::max(1.0, scale), 1e-12);
    cut.record(std::abs(cut_value(inst, x) - direct) / std::max(1.0, scale), 1e-12);
    sym.record(std::abs(cut_value(inst, x) - cut_value(inst, x.negated())), 0.0);

    if (n <= 12) {
      const CutReport sg = sahni_gonzalez(inst);
      bound.record(std::max(0.0, sg.cut_value - brute_force_maxcut(inst).cut_value), 1e-9 * std::max(1.0, scale));
      const CutReport again = sahni_gonzalez(inst);
      det.record(again.config == sg.config && again.cut_value == sg.cut_value ? 0.0 : 1.0, 0.0);
    }

    const Rank2Encoding enc = random_encoding(n, t % 2 ? 1 : -1, rng);
    const DcReadout r = dc_readout(enc, x);
    double cc = 0.0;
    for (std::size_t l = 0; l < n; ++l) cc += enc.eps(l) * enc.eps(l) + enc.eta(l) * enc.eta(l);
    const Rank2Encoding plus = Rank2Encoding::from_phases(enc.alpha, enc.beta, 1);
    dc.record(std::abs(r.total() - (cc - 2.0 * quadrature_hamiltonian_readout(plus, x))) / std::max(1.0, cc), 1e-9);

    if (t < std::max<std::size_t>(1, cases / 4)) {
      const MacropixelLayout layout = build_layout(n, c.geometry);
      const PhaseMask mask = synthesize_mask(enc, x, layout);
      const ComplexField field = propagate(mask, layout.padding);
      const double centre = std::norm(field(field.rows() / 2, field.cols() / 2)) / kCellAreaFactor;
      optics.record(std::abs(centre - r.total()) / std::max(1.0, r.total()), 1e-9);
      double energy = 0.0, live = 0.0;
      for (const auto& v : field.data()) energy += std::norm(v);
      for (auto v : mask.live.data()) live += v;
      const double expected = static_cast<double>(field.size()) * live;
      parseval.record(std::abs(energy - expected) / expected, 1e-9);
    }

    const MaxCutInstance family = weights_from_encoding(enc);
    const Rank2Fit fitted = fit_rank2(family);
    const MaxCutInstance refit = weights_from_encoding(fitted.encoding);
    double err = 0.0;
    const double sc = fitted.scale;
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t k = l + 1; k < n; ++k) err = std::max(err, std::abs(family.weight(l, k) - sc * refit.weight(l, k)));
    fit.record(err, 1e-9);
  }
  return {cut, sym, dc, optics, parseval, bound, det, fit};
}

int run_verify(const ExperimentConfig& c, const std::filesystem::path& dir, std::ostream& log) {
  const auto checks = verify_checks(c);
  std::string csv = "check,cases,failures,max_error,status\n";
  bool ok = true;
  for (const auto& ch : checks) {
    const bool pass = ch.failures == 0 && ch.cases > 0;
    ok = ok && pass;
    csv += ch.name + "," + std::to_string(ch.cases) + "," + std::to_string(ch.failures) + "," +
           format_double(ch.max_error) + "," + (pass ? "pass" : "fail") + "\n";
    log << (pass ? "PASS " : "FAIL ") << ch.name << " (" << ch.cases << " cases, max error " << ch.max_error
        << ")\n";
  }
  write_file_atomic(dir / "verify.csv", csv);
  return ok ? kExitOk : kExitCheckFailed;
}

void run_bench(const ExperimentConfig& c, const std::filesystem::path& dir, std::ostream& log) {
  const Problem p = make_problem(c, c.density, c.seed);
  const std::size_t n = p.instance.size();
  const MacropixelLayout layout = build_layout(n, c.geometry);
  Rng rng = make_rng(c.seed, 0, 0x62656e);
  const std::size_t reps = c.bench_repeats;
  std::string csv = "operation,n,repeats,total_s,per_call_s\n";
  auto time = [&](const std::string& name, std::size_t count, const std::function<void()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < count; ++i) fn();
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    csv += name + "," + std::to_string(n) + "," + std::to_string(count) + "," + format_double(total) + "," +
           format_double(total / static_cast<double>(count)) + "\n";
    log << name << ": " << total / static_cast<double>(count) << " s per call\n";
  };
  const SpinConfig x = random_spins(n, rng);
  double sink = 0.0;
  CostEvaluator closed(p.encoding, layout, CostBackend::closed_form, Objective::hamiltonian, 0.0, Rng(1));
  time("cost_closed_form", reps * 100, [&] { sink += closed(x); });
  CostEvaluator full(p.encoding, layout, CostBackend::full_field, Objective::hamiltonian, 0.0, Rng(1));
  time("cost_full_field", reps, [&] { sink += full(x); });
  time("cut_value", reps * 100, [&] { sink += cut_value(p.instance, x); });
  time("sahni_gonzalez", std::max<std::size_t>(1, reps / 4), [&] { sink += sahni_gonzalez(p.instance).cut_value; });
  time("anneal", std::max<std::size_t>(1, reps / 10), [&] {
    AnnealParams params = c.anneal;
    params.seed = c.seed;
    sink += anneal(p.instance, p.encoding, layout, params).report.cut_value;
  });
  if (!std::isfinite(sink)) log << "non-finite benchmark result\n";
  write_file_atomic(dir / "bench.csv", csv);
}

// Student t 0.975 quantiles for 1..30 degrees of freedom.
constexpr double kT975[] = {12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624, 2.306004,
                            2.262157,  2.228139, 2.200985, 2.178813, 2.160369, 2.144787, 2.131450, 2.119905,
                            2.109816,  2.100922, 2.093024, 2.085963, 2.079614, 2.073873, 2.068658, 2.063899,
                            2.059539,  2.055529, 2.051831, 2.048407, 2.045230, 2.042272};

// Cornish-Fisher expansion of the t quantile around z = 1.959964.
double t975(std::size_t df) {
  if (df <= 30) return kT975[df - 1];
  const double z = 1.959964, v = static_cast<double>(df);
  return z + (z * z * z + z) / (4 * v) + (5 * std::pow(z, 5) + 16 * z * z * z + 3 * z) / (96 * v * v);
}

}  // namespace

std::string to_string(Task task) {
  switch (task) {
    case Task::generate: return "generate";
    case Task::solve: return "solve";
    case Task::sweep_density: return "sweep-density";
    case Task::sweep_noise: return "sweep-noise";
    case Task::verify: return "verify";
    case Task::bench: return "bench";
  }
  return "solve";
}

Task parse_task(const std::string& text) {
  for (Task t : {Task::generate, Task::solve, Task::sweep_density, Task::sweep_noise, Task::verify, Task::bench})
    if (to_string(t) == text) return t;
  throw ConfigError("unknown task '" + text + "'");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "task",         "instance",         "encoding",        "n",
      "density",      "sign",             "seed",            "repetitions",
      "solvers",      "reference",        "iterations",      "restarts",
      "initial_flip_fraction", "final_flip_fraction", "temperature_start", "warmup_proposals",
      "cooling_rate", "backend",          "objective",       "noise_level",
      "noise_levels", "densities",        "sg_starts",       "random_samples",
      "slm_cols",     "slm_rows",         "macropixel",      "padding",
      "bench_repeats", "verify_cases",    "traces",          "output",
      "workers"};
  return keys;
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = trim(raw_value);
  AnnealParams& a = c.anneal;
  try {
    if (key == "task") c.task = parse_task(value);
    else if (key == "instance") c.instance_path = value;
    else if (key == "encoding") c.encoding_path = value;
    else if (key == "n") c.n = to_number<std::size_t>(key, value);
    else if (key == "density") c.density = to_number<double>(key, value);
    else if (key == "sign") c.sign = to_number<int>(key, value);
    else if (key == "seed") c.seed = to_number<std::uint64_t>(key, value);
    else if (key == "repetitions") c.repetitions = to_number<std::size_t>(key, value);
    else if (key == "solvers" || key == "solver") c.solvers = split_list(value);
    else if (key == "reference") c.reference = value == "none" ? "" : value;
    else if (key == "iterations") a.iterations = to_number<std::size_t>(key, value);
    else if (key == "restarts") a.restarts = to_number<std::size_t>(key, value);
    else if (key == "initial_flip_fraction") a.initial_flip_fraction = to_number<double>(key, value);
    else if (key == "final_flip_fraction")
      a.final_flip_fraction = value == "auto" ? std::nullopt : std::optional(to_number<double>(key, value));
    else if (key == "temperature_start")
      a.temperature_start = value == "auto" ? std::nullopt : std::optional(to_number<double>(key, value));
    else if (key == "warmup_proposals") a.warmup_proposals = to_number<std::size_t>(key, value);
    else if (key == "cooling_rate") a.cooling_rate = to_number<double>(key, value);
    else if (key == "backend") a.backend = value == "auto" ? std::nullopt : std::optional(parse_backend(value));
    else if (key == "objective") a.objective = parse_objective(value);
    else if (key == "noise_level") a.noise.level = to_number<double>(key, value);
    else if (key == "noise_levels") c.noise_levels = to_number_list(key, value);
    else if (key == "densities") c.densities = to_number_list(key, value);
    else if (key == "sg_starts") c.sg_starts = to_number<std::size_t>(key, value);
    else if (key == "random_samples") c.random_samples = to_number<std::size_t>(key, value);
    else if (key == "slm_cols") c.geometry.slm_cols = to_number<std::size_t>(key, value);
    else if (key == "slm_rows") c.geometry.slm_rows = to_number<std::size_t>(key, value);
    else if (key == "macropixel") c.geometry.macropixel = to_number<std::size_t>(key, value);
    else if (key == "padding") c.geometry.padding = to_number<std::size_t>(key, value);
    else if (key == "bench_repeats") c.bench_repeats = to_number<std::size_t>(key, value);
    else if (key == "verify_cases") c.verify_cases = to_number<std::size_t>(key, value);
    else if (key == "traces") c.traces = to_bool(key, value);
    else if (key == "output") c.output = value;
    else if (key == "workers") c.workers = to_number<std::size_t>(key, value);
    else throw ConfigError("unknown key '" + key + "'");
  } catch (const std::invalid_argument& e) {
    bad_value(key, value, e.what());
  }
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    try {
      apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig read_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, std::move(base));
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& key : config_keys()) out += key + " = " + setting_value(config, key) + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  std::string canonical;
  for (const auto& key : config_keys())
    if (affects_results(key)) canonical += key + "=" + setting_value(config, key) + "\n";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  return buf;
}

std::filesystem::path run_directory(const ExperimentConfig& config) {
  std::filesystem::path root = config.output;
  if (root.empty()) {
    const char* env = std::getenv(kOutputRootEnv);
    root = env && *env ? env : "spim-out";
  }
  return root / (to_string(config.task) + "-" + config_hash(config));
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (repetitions < 1) fail("repetitions must be >= 1");
  if (!instance_path.empty() && !std::filesystem::exists(instance_path))
    fail("instance file '" + instance_path + "' does not exist");
  if (!encoding_path.empty() && !std::filesystem::exists(encoding_path))
    fail("encoding file '" + encoding_path + "' does not exist");
  if (!encoding_path.empty() && instance_path.empty()) fail("'encoding' requires 'instance'");
  if (instance_path.empty() && n < 2) fail("n must be >= 2");
  if (sign != 1 && sign != -1) fail("sign must be 1 or -1");
  if (!(density > 0.0 && density <= 1.0)) fail("density must lie in (0, 1]");
  for (double d : densities)
    if (!(d > 0.0 && d <= 1.0)) fail("densities must lie in (0, 1]");
  for (double l : noise_levels)
    if (!(l >= 0.0 && l < 1.0)) fail("noise levels must lie in [0, 1)");
  if (solvers.empty()) fail("at least one solver is required");
  for (const auto& s : solvers)
    if (!is_known_solver(s)) fail("unknown solver '" + s + "' (euler-sim, sg, brute, random)");
  if (!reference.empty() && std::find(solvers.begin(), solvers.end(), reference) == solvers.end())
    fail("reference solver '" + reference + "' is not among the solvers");
  if (random_samples < 1) fail("random_samples must be >= 1");
  if (sg_starts < 1) fail("sg_starts must be >= 1");
  if (bench_repeats < 1) fail("bench_repeats must be >= 1");
  if (verify_cases < 1) fail("verify_cases must be >= 1");
  const bool brute = std::find(solvers.begin(), solvers.end(), "brute") != solvers.end();
  if (brute && instance_path.empty() && n > kBruteForceMaxVertices)
    fail("brute force is limited to n <= " + std::to_string(kBruteForceMaxVertices));
  try {
    anneal.validate();
    geometry.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

RunOutcome run(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const std::string hash = config_hash(config);
  RunOutcome outcome;
  outcome.directory = run_directory(config);
  std::filesystem::create_directories(outcome.directory);
  write_resolved(outcome.directory, config, hash);
  log << to_string(config.task) << " [" << hash << "] -> " << outcome.directory.string() << "\n";
  switch (config.task) {
    case Task::generate: run_generate(config, outcome.directory, log); break;
    case Task::solve: run_solve(config, outcome.directory, hash, log); break;
    case Task::sweep_density: run_sweep_density(config, outcome.directory, hash, log); break;
    case Task::sweep_noise: run_sweep_noise(config, outcome.directory, hash, log); break;
    case Task::verify: outcome.status = run_verify(config, outcome.directory, log); break;
    case Task::bench: run_bench(config, outcome.directory, log); break;
  }
  return outcome;
}

int run_main(const ExperimentConfig& config, std::ostream& log, std::ostream& err) {
  try {
    return run(config, log).status;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

MeanInterval mean_interval(const std::vector<double>& values) {
  MeanInterval out;
  if (values.empty()) return out;
  const double k = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
  out.low = out.high = out.mean;
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const std::size_t df = values.size() - 1;
  const double t = t975(df);
  const double half = t * std::sqrt(ss / static_cast<double>(df) / k);
  out.low = out.mean - half;
  out.high = out.mean + half;
  return out;
}

double improvement_pct(double value, double reference) {
  if (reference == 0.0) return 0.0;
  return 100.0 * (value - reference) / std::abs(reference);
}

}  // namespace spim
