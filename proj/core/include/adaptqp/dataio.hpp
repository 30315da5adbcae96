#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "adaptqp/types.hpp"

namespace adaptqp::io {

enum class FileFormat { Csv, SvmLight };

/// CSV: one sample per line, first column the label, remaining columns the
/// features; an optional header line is detected by a non-numeric first
/// cell. SvmLight: `label idx:val ...` with 1-based sparse indices densified
/// to the maximum index seen in the file. Labels of either format may be
/// arbitrary numeric or string tokens; they are remapped to dense 1-based
/// class ids by sorted order (numeric when every token parses as a number).
///
/// Throws ParseError (carrying the 1-based line) on ragged rows or non-finite
/// values, std::invalid_argument on an empty file.
Dataset parse_features(const std::string& path, FileFormat format,
                       Domain domain = Domain::Source);

/// Same grammar, reading from an in-memory buffer.
Dataset parse_features_text(const std::string& content, FileFormat format,
                            Domain domain = Domain::Source);

void write_features(const Dataset& ds, const std::string& path,
                    FileFormat format);
std::string write_features_text(const Dataset& ds, FileFormat format);

/// Two-class 2-D toy with a deliberately displaced target domain: source
/// class means (-2,0)/(+2,0), target class means (-1,3)/(+1,3), isotropic
/// spread 0.4, 20 samples per class per domain. Deterministic under seed.
std::pair<Dataset, Dataset> gen_toy_two_class(std::uint64_t seed);

/// Synthetic domain-shift recipe: source samples are Gaussian class clusters
/// in dim_source; target samples are fresh draws from the same clusters
/// pushed through shift_map (the inverse of the transform an adapter should
/// recover), plus isotropic observation noise.
struct ShiftSpec {
  Eigen::Index dim_source = 0;
  Eigen::Index dim_target = 0;
  Matrix class_means;       // K x dim_source, pairwise distinct rows
  double class_spread = 1.0;
  Matrix shift_map;         // dim_target x dim_source
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;

  /// Randomized default recipe at a given dimension: two well-separated
  /// class means, unit spread, a random rotation (plus mild anisotropic
  /// scaling) as the shift, noise 0.1.
  static ShiftSpec defaults(Eigen::Index dim, int n_classes = 2,
                            std::uint64_t seed = 0);
};

/// Per-class sample counts default to the 200/90 split of a 400-sample
/// source and 180-sample target.
std::pair<Dataset, Dataset> gen_shifted(const ShiftSpec& spec,
                                        int n_source_per_class = 200,
                                        int n_target_per_class = 90);

/// The transform that undoes the shift: pinv(shift_map). On noiseless data
/// generated from an invertible square shift_map, the pairwise distance term
/// vanishes at this matrix.
Matrix ground_truth_transform(const ShiftSpec& spec);

}  // namespace adaptqp::io
