#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adaptqp/adapt.hpp"
#include "adaptqp/dataio.hpp"
#include "adaptqp/types.hpp"

namespace adaptqp::harness {

enum class Setting { Baseline, SourceOnly, NotTransfer, Mmdt, Mmdtl2 };

std::string to_string(Setting s);
Setting setting_from_string(const std::string& name);  // CLI spelling

struct ExperimentConfig {
  Setting setting = Setting::Mmdtl2;
  int folds = 10;
  HyperParams hyperparams;
  // file-based runs
  std::string source_path;
  std::string target_path;
  io::FileFormat file_format = io::FileFormat::Csv;
  // synthetic runs: "", "shifted" or "toy"
  std::string synthetic;
  Eigen::Index dim = 32;  // feature dimension for synthetic "shifted"
  std::uint64_t seed = 0;
  bool mmdt_augmented = true;

  void validate() const;
};

struct ReportRow {
  std::string setting;
  int fold = 0;
  double accuracy = 0.0;
  double train_seconds = 0.0;
  double eval_seconds = 0.0;
  int dimension = 0;
  std::uint64_t seed = 0;
};

/// Paired stratified split: each domain is partitioned per class into
/// `folds` parts of size differing by at most one, and fold f of the source
/// is paired with fold f of the target. Deterministic under seed; the
/// shuffle stream depends only on (seed, class), so identical datasets
/// receive identical partitions in both roles.
struct PairedFolds {
  std::vector<std::vector<int>> source_folds;  // fold -> sorted sample indices
  std::vector<std::vector<int>> target_folds;
};

PairedFolds kfold_split(const Dataset& source, const Dataset& target,
                        int folds, std::uint64_t seed);

/// Runs one experiment setting under paired k-fold cross validation and
/// returns one row per fold. Per fold:
///   Baseline     train on the other source folds, test the held-out source fold
///   SourceOnly   train on the other source folds, test the paired target fold
///   NotTransfer  train on pooled source+target training folds, test the target fold
///   Mmdt/Mmdtl2  alternate() on the training folds, transform the held-out
///                target fold by W and classify with theta
std::vector<ReportRow> run_setting(const ExperimentConfig& cfg);
std::vector<ReportRow> run_setting(const ExperimentConfig& cfg,
                                   const Dataset& source,
                                   const Dataset& target);

struct BenchRow {
  int dimension = 0;
  std::string path;  // "primal" or "dual"
  double setup_seconds = 0.0;
  double optimization_seconds = 0.0;
  double calculation_seconds = 0.0;  // NaN where the phase does not exist
  double total_seconds = 0.0;
  bool skipped = false;      // primal guard exceeded at this dimension
  double w_agreement = 0.0;  // relative F-norm difference, NaN when unmeasured
};

/// Times one transform step through both formulations on synthetic data of
/// the given dimensions (n_t / n_s are total sample counts over two
/// classes). Phases are measured at coefficient-setup / QP-solve /
/// solution-recovery boundaries, median wall-clock over `repeats`. Dimensions
/// whose primal exceeds the size guard produce a row marked skipped; the
/// dual column always runs. The run is strictly sequential.
std::vector<BenchRow> benchmark_primal_vs_dual(const std::vector<int>& dims,
                                               int n_t, int n_s,
                                               std::uint64_t seed,
                                               int repeats = 3);

enum class ReportFormat { Json, Csv };

/// JSON: array of row objects carrying the ReportRow field names verbatim.
/// CSV: header plus one line per row, fields in declaration order.
void emit_report(const std::vector<ReportRow>& rows, ReportFormat format,
                 const std::string& path);
std::string report_to_string(const std::vector<ReportRow>& rows,
                             ReportFormat format);

void emit_bench(const std::vector<BenchRow>& rows, ReportFormat format,
                const std::string& path);
std::string bench_to_string(const std::vector<BenchRow>& rows,
                            ReportFormat format);

}  // namespace adaptqp::harness
