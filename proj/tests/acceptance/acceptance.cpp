// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "../oracles.hpp"
#include "spim/anneal.hpp"
#include "spim/baselines.hpp"
#include "spim/encoding.hpp"
#include "spim/harness.hpp"
#include "spim/optics.hpp"

using namespace spim;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Verdict& v, double seconds, double budget) {
  const bool ok = v.pass && seconds < budget;
  failures += !ok;
  std::printf("%s %d %s: %s (%.1f s, budget %.0f s)\n", ok ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str(),
              seconds, budget);
  std::fflush(stdout);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(slurp(p));
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(row);
  }
  return rows;
}

std::size_t column(const std::vector<std::vector<std::string>>& t, const std::string& name) {
  const auto& h = t.at(0);
  return static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin());
}

// CSV text with every wall-time column dropped.
std::string without_wall(const std::filesystem::path& p) {
  const auto t = read_csv(p);
  std::vector<bool> keep;
  for (const auto& h : t.at(0)) keep.push_back(h.find("wall") == std::string::npos);
  std::string out;
  for (const auto& row : t) {
    for (std::size_t i = 0; i < row.size(); ++i)
      if (i >= keep.size() || keep[i]) out += row[i] + ",";
    out += "\n";
  }
  return out;
}

RunOutcome run_quiet(const ExperimentConfig& c) {
  std::ostringstream log;
  return run(c, log);
}

double closed_form_constant(const Rank2Encoding& enc) {
  double c = 0.0;
  for (std::size_t l = 0; l < enc.size(); ++l) c += enc.eps(l) * enc.eps(l) + enc.eta(l) * enc.eta(l);
  return c;
}

Verdict dc_identity() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng() % 256;
    Rank2Encoding enc = oracle::random_encoding(n, t % 2 ? 1 : -1, rng, t % 3 == 0);
    const SpinConfig x = oracle::random_config(n, rng);
    const double c = closed_form_constant(enc);
    const double intensity = dc_readout(enc, x).total();
    Rank2Encoding plus = enc;
    plus.sign = 1;
    const double h_lib = quadrature_hamiltonian_readout(plus, x);
    const double h_oracle = -oracle::energy(oracle::encoded_weights(plus), x);
    const double tol = 1e-9 * std::max(1.0, c);
    worst = std::max({worst, std::abs(intensity - (c - 2 * h_lib)) / tol, std::abs(intensity - (c - 2 * h_oracle)) / tol});
  }
  return {worst <= 1.0, "1000 cases, worst error " + std::to_string(worst) + " x tolerance"};
}

Verdict optics_equivalence() {
  std::mt19937_64 rng(202);
  double worst_centre = 0.0, worst_parseval = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng() % 256;
    const Rank2Encoding enc = oracle::random_encoding(n, t % 2 ? 1 : -1, rng, t % 4 == 0);
    const SpinConfig x = oracle::random_config(n, rng);
    const MacropixelLayout layout = build_layout(n);
    const PhaseMask mask = synthesize_mask(enc, x, layout);
    const ComplexField field = propagate(mask, layout.padding);
    const double centre = std::norm(field(field.rows() / 2, field.cols() / 2)) / kCellAreaFactor;
    const double closed = dc_readout(enc, x).total();
    worst_centre = std::max(worst_centre, std::abs(centre - closed) / std::max(1.0, closed));
    double energy = 0.0, live = 0.0;
    for (const auto& v : field.data()) energy += std::norm(v);
    for (auto v : mask.live.data()) live += v;
    const double expected = static_cast<double>(field.size()) * live;
    worst_parseval = std::max(worst_parseval, std::abs(energy - expected) / expected);
  }
  std::ostringstream d;
  d << "100 cases, centre rel err " << worst_centre << ", Parseval rel err " << worst_parseval;
  return {worst_centre <= 1e-9 && worst_parseval <= 1e-9, d.str()};
}

GeneratedInstance small_suite_instance(int i) {
  const std::size_t n = 4 + static_cast<std::size_t>(i) % 13;
  return generate_instance(n, 1.0, i % 2 ? -1 : 1, 1000 + static_cast<std::uint64_t>(i));
}

Verdict ground_truth() {
  int hits = 0;
  for (int i = 0; i < 100; ++i) {
    const auto g = small_suite_instance(i);
    AnnealParams p;
    p.restarts = 20;
    p.seed = static_cast<std::uint64_t>(i);
    const auto r = anneal(g.instance, g.encoding, build_layout(g.instance.size()), p);
    const auto best = brute_force_maxcut(g.instance);
    const double tol = 1e-9 * std::max(1.0, std::abs(best.cut_value));
    hits += r.report.cut_value >= best.cut_value - tol;
  }
  return {hits >= 95, std::to_string(hits) + "/100 instances reach the optimum (need 95)"};
}

Verdict cut_identity() {
  std::mt19937_64 rng(404);
  std::size_t bad = 0;
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 2 + rng() % 40;
    const auto inst = oracle::random_instance(n, 0.2 + 0.8 * static_cast<double>(rng() % 100) / 100.0, rng);
    const auto x = oracle::random_config(n, rng);
    const double c = cut_value(inst, x);
    const double rhs = 0.5 * (total_weight(inst) - hamiltonian(inst, x));
    double scale = 0.0;
    for (const auto& e : inst.edges()) scale += std::abs(e.w);
    const double err = std::abs(c - rhs) / std::max(1.0, scale);
    worst = std::max(worst, err);
    bad += err > 1e-12;
  }
  std::ostringstream d;
  d << "10000 cases, worst rel err " << worst;
  return {bad == 0, d.str()};
}

Verdict convergence_shape() {
  int good = 0;
  std::ostringstream d;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t0 = Clock::now();
    const auto g = generate_instance(20736, 1.0, 1, seed);
    AnnealParams p;
    p.seed = seed;
    p.iterations = 100;
    p.backend = CostBackend::closed_form;
    const auto r = anneal(g.instance, g.encoding, build_layout(20736), p);
    const auto& rec = r.traces.at(0).records;
    bool monotone = true;
    for (std::size_t i = 1; i < rec.size(); ++i) monotone = monotone && rec[i].best_cut >= rec[i - 1].best_cut;
    const double total = rec.back().best_cut - r.traces[0].initial_cut;
    const double tail = rec.back().best_cut - rec[rec.size() - 11].best_cut;
    const double ratio = total > 0 ? tail / total : 1.0;
    const double secs = since(t0);
    const bool ok = monotone && ratio < 0.01 && secs < 60;
    good += ok;
    d << " s" << seed << ":" << ratio << "/" << static_cast<int>(secs * 100) / 100.0 << "s";
  }
  return {good == 5, std::to_string(good) + "/5 seeds settle (tail share/time)" + d.str()};
}

Verdict baseline_comparison(const std::filesystem::path& root) {
  ExperimentConfig c;
  c.task = Task::sweep_density;
  c.n = 1024;
  c.densities = {0.5, 0.75, 1.0};
  c.repetitions = 10;
  c.solvers = {"euler-sim", "sg"};
  c.reference = "sg";
  c.anneal.iterations = 1000;
  c.traces = false;
  c.output = root.string();
  const auto out = run_quiet(c);
  const auto t = read_csv(out.directory / "summary.csv");
  std::size_t wins = 0, cells = 0;
  std::cout << "    density solver     mean_cut       improvement_pct wins\n";
  for (std::size_t i = 1; i < t.size(); ++i) {
    const auto& row = t[i];
    std::printf("    %-7s %-10s %-15s %-15s %s\n", row[column(t, "density")].c_str(), row[column(t, "solver")].c_str(),
                row[column(t, "mean_cut")].c_str(), row[column(t, "improvement_pct")].c_str(),
                row[column(t, "wins_vs_reference")].c_str());
    if (row[column(t, "solver")] == "euler-sim") {
      wins += std::stoul(row[column(t, "wins_vs_reference")]);
      cells += std::stoul(row[column(t, "seeds")]);
    }
  }
  return {cells == 30 && wins * 10 >= cells * 7,
          std::to_string(wins) + "/" + std::to_string(cells) + " cells with annealed >= SG (need 70%)"};
}

Verdict noise_protocol(const std::filesystem::path& root) {
  ExperimentConfig c;
  c.task = Task::sweep_noise;
  c.n = 1024;
  c.density = 1.0;
  c.repetitions = 30;
  c.noise_levels = {0.0, 0.02, 0.03, 0.3};
  c.traces = false;
  c.output = root.string();
  const auto out = run_quiet(c);
  const auto t = read_csv(out.directory / "summary.csv");
  std::map<std::string, std::vector<std::string>> by_level;
  for (std::size_t i = 1; i < t.size(); ++i) by_level[t[i][column(t, "noise_level")]] = t[i];
  const auto mean = [&](const std::string& level) { return std::stod(by_level.at(level)[column(t, "mean_cut")]); };
  for (const std::string level : {"0", "0.02", "0.03", "0.3"}) {
    const auto& row = by_level.at(level);
    std::printf("    level %-5s mean %-12s ci [%s, %s] diff vs 0 %s [%s, %s] pct %s\n", level.c_str(),
                row[column(t, "mean_cut")].c_str(), row[column(t, "ci95_low")].c_str(),
                row[column(t, "ci95_high")].c_str(), row[column(t, "mean_diff_vs_0")].c_str(),
                row[column(t, "diff_ci95_low")].c_str(), row[column(t, "diff_ci95_high")].c_str(),
                row[column(t, "improvement_pct")].c_str());
  }
  const bool reported = by_level.count("0.02") && by_level.count("0.03") &&
                        !by_level.at("0.02")[column(t, "ci95_low")].empty();
  const double drop = 100.0 * (mean("0") - mean("0.3")) / std::abs(mean("0"));
  std::ostringstream d;
  d << "level 0.3 is " << drop << "% below level 0 (need >= 5%), low levels reported: " << (reported ? "yes" : "no");
  return {drop >= 5.0 && reported, d.str()};
}

Verdict sg_determinism_and_bound() {
  std::size_t violations = 0, mismatches = 0, cases = 0;
  auto check = [&](const MaxCutInstance& inst) {
    const auto a = sahni_gonzalez(inst), b = sahni_gonzalez(inst);
    mismatches += !(a.config == b.config && a.cut_value == b.cut_value && a.hamiltonian == b.hamiltonian);
    const double best = oracle::enumerate(oracle::dense(inst)).cut;
    violations += a.cut_value > best + 1e-9 * std::max(1.0, std::abs(best));
    ++cases;
  };
  for (int i = 0; i < 100; ++i) check(small_suite_instance(i).instance);
  std::mt19937_64 rng(808);
  for (int i = 0; i < 200; ++i) check(oracle::random_instance(2 + rng() % 15, 0.6, rng));
  return {violations == 0 && mismatches == 0, std::to_string(cases) + " instances, " + std::to_string(mismatches) +
                                                  " nondeterministic, " + std::to_string(violations) +
                                                  " above the optimum"};
}

Verdict rank2_fit() {
  std::mt19937_64 rng(909);
  double worst_family = 0.0, worst_spectral = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 40;
    const auto enc = oracle::random_encoding(n, t % 2 ? 1 : -1, rng, t % 5 == 0);
    const auto w = oracle::encoded_weights(enc);
    const auto fit = fit_rank2(weights_from_encoding(enc));
    const auto approx = oracle::encoded_weights(fit.encoding);
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t k = l + 1; k < n; ++k)
        worst_family = std::max(worst_family, std::abs(w[l][k] - fit.scale * approx[l][k]));
  }
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 100; ++t) {
    oracle::Matrix w(8, std::vector<double>(8, 0.0));
    std::vector<Edge> edges;
    for (std::uint32_t l = 0; l < 8; ++l)
      for (std::uint32_t k = l + 1; k < 8; ++k) {
        w[l][k] = w[k][l] = u(rng);
        edges.push_back({l, k, w[l][k]});
      }
    const auto fit = fit_rank2(MaxCutInstance::from_edges(8, edges));
    worst_spectral = std::max(worst_spectral, std::abs(fit.residual - oracle::two_term_residual(w)));
  }
  std::ostringstream d;
  d << "in-family max err " << worst_family << ", spectral residual gap " << worst_spectral;
  return {worst_family <= 1e-9 && worst_spectral <= 1e-9, d.str()};
}

Verdict replay(const std::filesystem::path& root) {
  std::vector<ExperimentConfig> configs;
  ExperimentConfig solve;
  solve.task = Task::solve;
  solve.n = 200;
  solve.repetitions = 4;
  solve.solvers = {"euler-sim", "sg", "random"};
  solve.reference = "sg";
  solve.anneal.noise.level = 0.03;
  solve.anneal.restarts = 2;
  configs.push_back(solve);
  ExperimentConfig density;
  density.task = Task::sweep_density;
  density.n = 300;
  density.repetitions = 3;
  density.densities = {0.5, 1.0};
  density.solvers = {"euler-sim", "sg"};
  density.reference = "sg";
  configs.push_back(density);
  ExperimentConfig noise;
  noise.task = Task::sweep_noise;
  noise.n = 256;
  noise.repetitions = 3;
  noise.noise_levels = {0.02, 0.1};
  configs.push_back(noise);

  std::size_t files = 0, differing = 0;
  for (auto c : configs) {
    c.output = (root / "first").string();
    c.workers = 4;
    const auto a = run_quiet(c);
    c.output = (root / "second").string();
    c.workers = 1;
    const auto b = run_quiet(c);
    for (const auto& entry : std::filesystem::directory_iterator(a.directory)) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      differing += without_wall(entry.path()) != without_wall(b.directory / entry.path().filename());
    }
  }
  return {files > 0 && differing == 0,
          std::to_string(files) + " CSV files replayed, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  oracle::TempDir root("acceptance");
  auto timed = [](int id, const std::string& name, double budget, auto&& fn) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    report(id, name, v, since(t0), budget);
  };
  timed(1, "dc-hamiltonian identity", 10, dc_identity);
  timed(2, "optics equivalence", 60, optics_equivalence);
  timed(3, "ground-truth optimality", 300, ground_truth);
  timed(4, "cut identity", 600, cut_identity);
  timed(5, "convergence shape", 300, convergence_shape);
  timed(6, "baseline comparison", 600, [&] { return baseline_comparison(root.path()); });
  timed(7, "noise protocol", 900, [&] { return noise_protocol(root.path()); });
  timed(8, "sg determinism and bound", 600, sg_determinism_and_bound);
  timed(9, "rank-2 fit", 600, rank2_fit);
  timed(10, "replay determinism", 600, [&] { return replay(root.path()); });
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
