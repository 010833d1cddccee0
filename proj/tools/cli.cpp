// Copyright 2026 The Script Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "script/script.hpp"

namespace script::cli {
namespace {

/// Bad flag values noticed after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string millis(double ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", ms);
  return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - since)
      .count();
}

/// Writes `text` to `path`, or to `out` when no path was given.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.close();
  if (!f) throw Error(Errc::kIo, "cannot write '" + path + "'");
}

std::optional<Matrix> read_query(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return read_matrix(path);
}

const Matrix* ptr(const std::optional<Matrix>& m) { return m ? &*m : nullptr; }

const std::vector<std::string> kModes = {"script", "qcsp", "gsp", "random",
                                         "topk",   "diversity"};

Selection select_by_mode(const std::string& mode, const Matrix& h_v,
                         const Matrix* h_q, std::size_t m,
                         const FusionParams& params, std::uint64_t seed) {
  if (mode == "script") return script_select(h_v, h_q, m, params);
  if (mode == "qcsp") return qcsp_only(h_v, h_q, m, params.kernel);
  if (mode == "gsp") return baseline_gsp_only(h_v, m, params.gsp);
  if (mode == "random") return baseline_random(h_v.rows(), m, seed);
  if (mode == "diversity") return baseline_diversity_only(h_v, m, params.kernel);
  if (!h_q) throw UsageError("mode topk needs --query");
  return baseline_topk_relevance(h_v, *h_q, m);
}

// ---------------------------------------------------------------- prune

struct PruneArgs {
  std::string tokens, query, out, mode = "script";
  std::optional<std::size_t> keep;
  std::optional<double> ratio;
  double tau = GspParams{}.tau;
  double gamma = GspParams{}.gamma;
  std::size_t gsp_keep = 0;
  std::uint64_t seed = 0;
};

void add_prune(CLI::App& app, PruneArgs& a) {
  auto* sub = app.add_subcommand("prune", "Select a token subset");
  sub->add_option("--tokens", a.tokens, "Token embeddings (EMB1 or .csv)")->required();
  sub->add_option("--query", a.query, "Query embeddings; omit for diversity-only QCSP");
  auto* keep = sub->add_option("--keep", a.keep, "Number of tokens to keep");
  auto* ratio = sub->add_option("--ratio", a.ratio, "Fraction of tokens to prune");
  keep->excludes(ratio);
  sub->add_option("--mode", a.mode, "Selection mode")
      ->check(CLI::IsMember(kModes))
      ->capture_default_str();
  sub->add_option("--tau", a.tau, "Redundancy threshold")->capture_default_str();
  sub->add_option("--gamma", a.gamma, "Redundancy sharpness")->capture_default_str();
  sub->add_option("--gsp-keep", a.gsp_keep, "GSP candidate pool size (default 2m)");
  sub->add_option("--seed", a.seed, "Seed for the random baseline")->capture_default_str();
  sub->add_option("--out", a.out, "Selection document path")->required();
}

int cmd_prune(const PruneArgs& a, std::ostream& out) {
  if (a.keep.has_value() == a.ratio.has_value())
    throw UsageError("exactly one of --keep and --ratio is required");
  const Matrix h_v = read_matrix(a.tokens);
  const auto h_q = read_query(a.query);
  const std::size_t n = h_v.rows();
  const std::size_t m = a.keep ? *a.keep : keep_count_for_ratio(n, *a.ratio);

  FusionParams params;
  params.gsp = {a.tau, a.gamma};
  validate(params.gsp);
  params.gsp_keep = a.gsp_keep;

  const auto start = std::chrono::steady_clock::now();
  const Selection s = select_by_mode(a.mode, h_v, ptr(h_q), m, params, a.seed);
  const double ms = elapsed_ms(start);
  write_selection(s, a.out);
  out << "n=" << n << " m=" << s.kept.size() << " mode=" << a.mode
      << " elapsed_ms=" << millis(ms) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
  std::string tokens, query, out;
  double tau = GspParams{}.tau;
  double gamma = GspParams{}.gamma;
};

void add_score(CLI::App& app, ScoreArgs& a) {
  auto* sub = app.add_subcommand("score", "Per-token redundancy and relevance CSV");
  sub->add_option("--tokens", a.tokens, "Token embeddings")->required();
  sub->add_option("--query", a.query, "Query embeddings");
  sub->add_option("--tau", a.tau, "Redundancy threshold")->capture_default_str();
  sub->add_option("--gamma", a.gamma, "Redundancy sharpness")->capture_default_str();
  sub->add_option("--out", a.out, "CSV path (default: standard output)");
}

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  const Matrix h_v = read_matrix(a.tokens);
  const auto h_q = read_query(a.query);
  const GspParams params{a.tau, a.gamma};
  const auto scores = redundancy_scores(build_graph(h_v, params));
  std::optional<RelevanceVector> rel;
  if (h_q) rel = query_relevance(h_v, *h_q);

  std::string csv =
      "index,redundancy_score,degree,mean_sim,used_fallback,relevance_raw,"
      "relevance_norm\n";
  for (std::size_t i = 0; i < h_v.rows(); ++i) {
    csv += std::to_string(i) + "," + num(scores.score[i]) + "," +
           std::to_string(scores.degree[i]) + "," + num(scores.mean_sim[i]) +
           "," + (scores.used_fallback[i] ? "1" : "0") + ",";
    if (rel) csv += num(rel->raw[i]) + "," + num(rel->normalized[i]);
    else csv += ",";
    csv += "\n";
  }
  emit(csv, a.out, out);
  return kExitOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::uint64_t seed = 0;
  std::size_t instances = 200;
};

void add_verify(CLI::App& app, VerifyArgs& a) {
  auto* sub = app.add_subcommand("verify", "Run the randomized property suite");
  sub->add_option("--seed", a.seed, "Seed")->capture_default_str();
  sub->add_option("--instances", a.instances, "Random instances per property")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const auto report = verify::run_all({a.seed, a.instances});
  out << report.to_text();
  return report.all_passed() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::size_t n = 576, d = 1024, keep = 64, repeats = 5, query_rows = 8;
  std::vector<std::string> modes = {"script"};
  std::uint64_t seed = 0;
};

void add_bench(CLI::App& app, BenchArgs& a) {
  auto* sub = app.add_subcommand("bench", "Time selection on seeded random embeddings");
  sub->add_option("--n", a.n, "Tokens")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--d", a.d, "Embedding width")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--keep", a.keep, "Budget")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--repeats", a.repeats, "Timed runs per mode")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--query-rows", a.query_rows, "Query rows")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--mode", a.modes, "Modes to time (comma separated)")
      ->delimiter(',')
      ->check(CLI::IsMember(kModes));
  sub->add_option("--seed", a.seed, "Seed")->capture_default_str();
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.keep > a.n) throw UsageError("--keep must not exceed --n");
  const Matrix h_v = synth::random_embeddings(a.n, a.d, a.seed);
  const Matrix h_q = synth::random_embeddings(a.query_rows, a.d, a.seed + 1);
  out << "mode,n,d,keep,repeat,elapsed_ms\n";
  std::vector<std::string> summary;
  for (const auto& mode : a.modes) {
    std::vector<double> times;
    for (std::size_t r = 0; r < a.repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      const Selection s = select_by_mode(mode, h_v, &h_q, a.keep, {}, a.seed);
      times.push_back(elapsed_ms(start));
      if (s.kept.size() != a.keep)
        throw Error(Errc::kInvalidArgument, "mode " + mode + " returned a short selection");
      out << mode << "," << a.n << "," << a.d << "," << a.keep << "," << r
          << "," << millis(times.back()) << "\n";
    }
    std::sort(times.begin(), times.end());
    const std::size_t k = times.size();
    const double median =
        k % 2 ? times[k / 2] : 0.5 * (times[k / 2 - 1] + times[k / 2]);
    summary.push_back("summary mode=" + mode + " median_ms=" + millis(median) +
                      " min_ms=" + millis(times.front()));
  }
  for (const auto& line : summary) out << line << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string pattern, out;
  std::optional<std::size_t> n;
  std::size_t d = 64, block = 4, grid_h = 0, grid_w = 0;
  double rho = 0.5;
  std::uint64_t seed = 0;
};

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* sub = app.add_subcommand("synth", "Write a synthetic embedding matrix");
  sub->add_option("--pattern", a.pattern, "Pattern")
      ->required()
      ->check(CLI::IsMember({"random", "duplicate-blocks", "two-region-grid",
                             "equicorrelated"}));
  sub->add_option("--n", a.n, "Rows (grids default to grid-h * grid-w)");
  sub->add_option("--d", a.d, "Columns")->capture_default_str();
  sub->add_option("--seed", a.seed, "Seed")->capture_default_str();
  sub->add_option("--rho", a.rho, "Pairwise inner product (equicorrelated)")
      ->capture_default_str();
  sub->add_option("--block", a.block, "Repeat count (duplicate-blocks)")
      ->capture_default_str();
  sub->add_option("--grid-h", a.grid_h, "Grid height (two-region-grid)");
  sub->add_option("--grid-w", a.grid_w, "Grid width (two-region-grid)");
  sub->add_option("--out", a.out, "Output path (EMB1, or CSV for .csv)")->required();
}

Matrix make_synth(const SynthArgs& a) {
  switch (synth::pattern_from_string(a.pattern)) {
    case synth::Pattern::kTwoRegionGrid: {
      if (a.grid_h == 0 || a.grid_w == 0)
        throw UsageError("two-region-grid needs --grid-h and --grid-w");
      const GridShape grid{a.grid_h, a.grid_w};
      if (a.n && *a.n != grid.size())
        throw UsageError("--n must equal grid-h * grid-w");
      return synth::two_region_grid(grid, a.d, a.seed);
    }
    case synth::Pattern::kRandom:
      if (!a.n) throw UsageError("--n is required");
      return synth::random_embeddings(*a.n, a.d, a.seed);
    case synth::Pattern::kDuplicateBlocks:
      if (!a.n) throw UsageError("--n is required");
      return synth::duplicate_blocks(*a.n, a.d, a.block, a.seed);
    case synth::Pattern::kEquicorrelated:
      if (!a.n) throw UsageError("--n is required");
      return synth::equicorrelated(*a.n, a.d, a.rho, a.seed);
  }
  throw UsageError("unknown pattern");
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const Matrix m = make_synth(a);
  write_matrix(m, a.out);
  out << "wrote " << m.rows() << "x" << m.cols() << " " << a.pattern << " to "
      << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string tokens, entropy_out, profile_out;
  std::size_t grid_h = 0, grid_w = 0, max_dist = 4;
};

void add_analyze(CLI::App& app, AnalyzeArgs& a) {
  auto* sub = app.add_subcommand("analyze", "Local entropy and similarity-by-distance CSVs");
  sub->add_option("--tokens", a.tokens, "Token embeddings")->required();
  sub->add_option("--grid-h", a.grid_h, "Grid height")->required();
  sub->add_option("--grid-w", a.grid_w, "Grid width")->required();
  sub->add_option("--max-dist", a.max_dist, "Largest Manhattan distance profiled")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--entropy-out", a.entropy_out, "Per-token CSV (default: standard output)");
  sub->add_option("--profile-out", a.profile_out, "Distance CSV (default: standard output)");
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const Matrix h_v = read_matrix(a.tokens);
  const GridShape grid{a.grid_h, a.grid_w};
  const auto entropy = local_entropy_map(h_v, grid);
  const auto sim = local_similarity_map(h_v, grid);
  std::string csv = "index,row,col,entropy,neighbor_similarity\n";
  for (std::size_t i = 0; i < h_v.rows(); ++i)
    csv += std::to_string(i) + "," + std::to_string(i / grid.width) + "," +
           std::to_string(i % grid.width) + "," + num(entropy[i]) + "," +
           num(sim[i]) + "\n";
  emit(csv, a.entropy_out, out);

  std::string prof = "distance,pairs,mean_similarity\n";
  for (const auto& b : similarity_by_distance_profile(h_v, grid, a.max_dist))
    prof += std::to_string(b.distance) + "," + std::to_string(b.pairs) + "," +
            (b.pairs ? num(b.mean_similarity) : "") + "\n";
  emit(prof, a.profile_out, out);
  return kExitOk;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::kIo:
    case Errc::kFormat:
    case Errc::kDimensionMismatch:
      return kExitFailure;
    default:
      return kExitUsage;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Query-aware visual token pruning", "script_prune"};
  app.require_subcommand(1);
  PruneArgs prune;
  ScoreArgs score;
  VerifyArgs verify;
  BenchArgs bench;
  SynthArgs synth_args;
  AnalyzeArgs analyze;
  add_prune(app, prune);
  add_score(app, score);
  add_verify(app, verify);
  add_bench(app, bench);
  add_synth(app, synth_args);
  add_analyze(app, analyze);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand("prune")) return cmd_prune(prune, out);
    if (app.got_subcommand("score")) return cmd_score(score, out);
    if (app.got_subcommand("verify")) return cmd_verify(verify, out);
    if (app.got_subcommand("bench")) return cmd_bench(bench, out);
    if (app.got_subcommand("synth")) return cmd_synth(synth_args, out);
    return cmd_analyze(analyze, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace script::cli
