// tools/rnnt_main.cc
//
// rnnt loss | viz | check | bench
//
// Exit status: 0 ok, 1 numerical failure (no path, failed self-check),
// 2 usage or format error.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rnnt/bench.h"
#include "rnnt/builders.h"
#include "rnnt/errors.h"
#include "rnnt/loss.h"
#include "rnnt/self_check.h"
#include "rnnt/tensor_io.h"
#include "rnnt/wfsa.h"
#include "rnnt/wrnnt.h"

namespace {

using namespace rnnt;

constexpr int kOk = 0;
constexpr int kNumericalFailure = 1;
constexpr int kUsageError = 2;

struct NumericalFailure : Error {
  using Error::Error;
};

const std::map<std::string, Builder> kBuilders = {
    {"grid", Builder::kGrid},
    {"compose", Builder::kCompose},
    {"epsilon", Builder::kEpsilon}};

const std::map<std::string, LossKind> kLossKinds = {
    {"rnnt", LossKind::kRnnt},
    {"wrnnt-force-final", LossKind::kWForceFinal},
    {"wrnnt-allow-ignore", LossKind::kWAllowIgnore}};

const std::map<std::string, WVariant> kVariants = {
    {"force-final", WVariant::kForceFinal},
    {"allow-ignore", WVariant::kAllowIgnore}};

// ---------------------------------------------------------------- loss

struct LossArgs {
  std::string tensor_path;
  std::string targets_path;
  Builder builder = Builder::kGrid;
  LossKind kind = LossKind::kRnnt;
  std::string reduction = "sum";
  std::string grad_out;
  int32_t blank_index = 0;
};

void RunLoss(const LossArgs &args) {
  std::vector<LogProbTensor> tensors = ReadTensorFile(args.tensor_path);
  std::vector<std::vector<int32_t>> targets = ReadTargetsFile(args.targets_path);
  if (tensors.size() != targets.size()) {
    throw ShapeError("tensor file holds " + std::to_string(tensors.size()) +
                     " items but targets file holds " +
                     std::to_string(targets.size()));
  }
  Batch batch;
  for (size_t i = 0; i < tensors.size(); ++i) {
    const int32_t V = tensors[i].Shape().vocab_size;
    if (args.blank_index < 0 || args.blank_index >= V) {
      throw ShapeError("blank index outside the vocabulary");
    }
    batch.Add(RemapBlank(tensors[i], args.blank_index),
              RemapTargets(targets[i], args.blank_index, V));
  }
  const auto results =
      ComputeBatchLoss(batch, args.builder, args.kind, ThreadsFromEnv());
  for (size_t i = 0; i < results.size(); ++i) {
    if (!results[i].result) {
      throw NumericalFailure("batch item " + std::to_string(i) + ": " +
                             results[i].error);
    }
  }

  double sum = 0.0;
  for (size_t i = 0; i < results.size(); ++i) {
    const double loss = results[i].result->loss;
    std::printf("item %zu loss %.17g\n", i, loss);
    sum += loss;
  }
  if (args.reduction == "sum") {
    std::printf("sum %.17g\n", sum);
  } else if (args.reduction == "mean") {
    std::printf("mean %.17g\n", sum / static_cast<double>(results.size()));
  }

  if (!args.grad_out.empty()) {
    std::vector<LogProbTensor> grads;
    for (size_t i = 0; i < results.size(); ++i) {
      grads.push_back(RestoreBlank(results[i].result->grad, args.blank_index)
                          .WithPrecision(tensors[i].GetPrecision()));
    }
    WriteTensorFile(args.grad_out, grads);
  }
}

// ---------------------------------------------------------------- viz

struct VizArgs {
  std::string graph = "lattice";
  std::string targets;
  std::string vocab;
  int32_t num_frames = 1;
  int32_t vocab_size = 0;
  Builder builder = Builder::kGrid;
  WVariant variant = WVariant::kForceFinal;
  bool text = false;
};

std::vector<std::string> SplitVocab(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  return out;
}

// Targets as whitespace-separated tokens: vocabulary names when --vocab is
// given, otherwise integer ids.
std::vector<int32_t> ParseVizTargets(const std::string &text,
                                     const std::vector<std::string> &names) {
  std::vector<int32_t> out;
  std::istringstream in(text);
  for (std::string tok; in >> tok;) {
    auto it = std::find(names.begin(), names.end(), tok);
    if (it != names.end()) {
      out.push_back(static_cast<int32_t>(it - names.begin()));
      continue;
    }
    try {
      size_t used = 0;
      const int value = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(value);
    } catch (const std::logic_error &) {
      throw ShapeError("unknown target token '" + tok + "'");
    }
  }
  return out;
}

void RunViz(const VizArgs &args) {
  std::vector<std::string> names = SplitVocab(args.vocab);
  const std::vector<int32_t> units = ParseVizTargets(args.targets, names);
  int32_t V = args.vocab_size;
  if (V == 0) V = static_cast<int32_t>(names.size());
  if (V == 0) {
    V = 2;
    for (int32_t u : units) V = std::max(V, u + 1);
  }
  if (names.empty()) {
    names.push_back("<b>");
    for (int32_t v = 1; v < V; ++v) names.push_back(std::to_string(v));
  }
  const TargetSeq y(units);
  y.CheckVocab(V);
  const TensorShape shape{args.num_frames, y.Size(), V};
  shape.Check();

  Wfsa g;
  if (args.graph == "unit") {
    g = BuildUnitSchema(y, V).graph;
  } else if (args.graph == "time") {
    g = BuildTimeSchema(args.num_frames, V).graph;
  } else if (args.graph == "w-unit") {
    g = WUnitSchema(y, V, args.variant).graph;
  } else if (args.graph == "w-time") {
    g = WTimeSchema(args.num_frames, V).graph;
  } else {
    // Lattices are shown unpopulated: every arc weight is 0.
    const LogProbTensor zeros = LogProbTensor::Filled(shape, 0.0);
    LossKind kind = LossKind::kRnnt;
    if (args.graph == "w-lattice") {
      kind = args.variant == WVariant::kForceFinal ? LossKind::kWForceFinal
                                                   : LossKind::kWAllowIgnore;
    }
    g = BuildLattice(zeros, y, args.builder, kind).Graph();
  }
  std::string title = args.graph;
  if (args.graph.rfind("w-", 0) == 0) {
    title += std::string(" ") + WVariantName(args.variant);
  }
  std::cout << (args.text ? ToText(g) : ToDot(g, names, title));
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::vector<std::string> shapes = {"64x32"};
  int32_t vocab_size = 128;
  int32_t batch = 4;
  int32_t repetitions = 5;
  std::string precision = "double";
  std::vector<std::string> builders = {"grid", "compose"};
  LossKind kind = LossKind::kRnnt;
  bool sorted = false;
  uint64_t seed = 0;
};

BenchConfig ToBenchConfig(const BenchArgs &args) {
  BenchConfig config;
  config.shapes.clear();
  for (const auto &s : args.shapes) {
    int T = 0, U = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%dx%d%c", &T, &U, &tail) != 2) {
      throw ShapeError("shape must look like TxU, got '" + s + "'");
    }
    config.shapes.emplace_back(T, U);
  }
  config.vocab_size = args.vocab_size;
  config.batch = args.batch;
  config.repetitions = args.repetitions;
  config.precisions.clear();
  if (args.precision != "double") config.precisions.push_back(Precision::kSingle);
  if (args.precision != "single") config.precisions.push_back(Precision::kDouble);
  config.builders.clear();
  for (const auto &b : args.builders) config.builders.push_back(kBuilders.at(b));
  config.kind = args.kind;
  config.sorted_batch = args.sorted;
  config.seed = args.seed;
  config.threads = ThreadsFromEnv();
  return config;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"RNN-T and W-Transducer losses over finite-state lattices"};
  app.require_subcommand(1);

  LossArgs loss;
  auto *loss_cmd = app.add_subcommand("loss", "loss and gradient for a batch");
  loss_cmd->add_option("--tensor", loss.tensor_path, "log-score tensor file")
      ->required()
      ->check(CLI::ExistingFile);
  loss_cmd->add_option("--targets", loss.targets_path, "targets file")
      ->required()
      ->check(CLI::ExistingFile);
  loss_cmd->add_option("--builder", loss.builder, "lattice construction")
      ->transform(CLI::CheckedTransformer(kBuilders, CLI::ignore_case));
  loss_cmd->add_option("--loss", loss.kind, "loss variant")
      ->transform(CLI::CheckedTransformer(kLossKinds, CLI::ignore_case));
  loss_cmd->add_option("--reduction", loss.reduction, "aggregate line")
      ->check(CLI::IsMember({"sum", "mean", "none"}));
  loss_cmd->add_option("--grad-out", loss.grad_out,
                       "gradient output file (.json for JSON)");
  loss_cmd->add_option("--blank-index", loss.blank_index,
                       "vocabulary index of blank in the input");

  VizArgs viz;
  auto *viz_cmd = app.add_subcommand("viz", "print a schema or lattice as DOT");
  viz_cmd->add_option("--graph", viz.graph, "graph to draw")
      ->check(CLI::IsMember(
          {"unit", "time", "w-unit", "w-time", "lattice", "w-lattice"}));
  viz_cmd->add_option("--targets", viz.targets,
                      "target tokens, e.g. \"A C\" or \"1 3\"");
  viz_cmd->add_option("-T,--frames", viz.num_frames, "number of frames")
      ->check(CLI::PositiveNumber);
  viz_cmd->add_option("-V,--vocab-size", viz.vocab_size, "vocabulary size");
  viz_cmd->add_option("--vocab", viz.vocab,
                      "comma-separated label names, blank first");
  viz_cmd->add_option("--builder", viz.builder, "lattice construction")
      ->transform(CLI::CheckedTransformer(kBuilders, CLI::ignore_case));
  viz_cmd->add_option("--variant", viz.variant, "W-Transducer variant")
      ->transform(CLI::CheckedTransformer(kVariants, CLI::ignore_case));
  viz_cmd->add_flag("--text", viz.text, "arc list instead of DOT");

  SelfCheckConfig check;
  auto *check_cmd =
      app.add_subcommand("check", "randomized builder and oracle agreement");
  check_cmd->add_option("--trials", check.trials, "random instances")
      ->check(CLI::PositiveNumber);
  check_cmd->add_option("--seed", check.seed, "random seed");
  check_cmd->add_option("--max-t", check.max_t, "largest T")
      ->check(CLI::PositiveNumber);
  check_cmd->add_option("--max-u", check.max_u, "largest U")
      ->check(CLI::NonNegativeNumber);
  check_cmd->add_option("--max-v", check.max_v, "largest V")
      ->check(CLI::Range(2, 1 << 20));
  check_cmd->add_flag("--inject-fault", check.inject_fault,
                      "perturb the compose builder (tests the checker)");

  BenchArgs bench;
  auto *bench_cmd = app.add_subcommand("bench", "timing on synthetic batches");
  bench_cmd->add_option("--shape", bench.shapes, "TxU, repeatable");
  bench_cmd->add_option("-V,--vocab-size", bench.vocab_size, "vocabulary size");
  bench_cmd->add_option("--batch", bench.batch, "items per batch");
  bench_cmd->add_option("--repetitions", bench.repetitions,
                        "timed runs per row (>= 3)");
  bench_cmd->add_option("--precision", bench.precision, "tensor precision")
      ->check(CLI::IsMember({"single", "double", "both"}));
  bench_cmd->add_option("--builders", bench.builders, "builders to time")
      ->check(CLI::IsMember({"grid", "compose", "epsilon"}))
      ->delimiter(',');
  bench_cmd->add_option("--loss", bench.kind, "loss variant")
      ->transform(CLI::CheckedTransformer(kLossKinds, CLI::ignore_case));
  bench_cmd->add_flag("--sorted", bench.sorted, "sort items by T descending");
  bench_cmd->add_option("--seed", bench.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*loss_cmd) RunLoss(loss);
    if (*viz_cmd) RunViz(viz);
    if (*check_cmd) {
      const SelfCheckReport report = RunSelfCheck(check);
      std::cout << report.Format();
      if (!report.Passed()) return kNumericalFailure;
    }
    if (*bench_cmd) {
      const BenchReport report = RunBenchmark(ToBenchConfig(bench));
      std::cout << report.Format();
    }
  } catch (const NumericalFailure &e) {
    std::cerr << "rnnt: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const NoPathError &e) {
    std::cerr << "rnnt: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception &e) {
    std::cerr << "rnnt: " << e.what() << '\n';
    return kUsageError;
  }
  return kOk;
}
