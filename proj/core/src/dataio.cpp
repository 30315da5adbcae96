#include "adaptqp/dataio.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "adaptqp/errors.hpp"

namespace adaptqp::io {

namespace {

std::vector<std::string> split_lines(const std::string& content) {
  std::vector<std::string> lines;
  std::string current;
  std::istringstream in(content);
  while (std::getline(in, current)) {
    if (!current.empty() && current.back() == '\r') current.pop_back();
    lines.push_back(current);
  }
  return lines;
}

bool parse_double(const std::string& tok, double* out) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  if (begin != end && *begin == '+') ++begin;  // from_chars rejects '+'
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc() && ptr == end;
}

bool parse_int(const std::string& tok, long* out) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream in(line);
  while (std::getline(in, tok, sep)) out.push_back(tok);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

/// Remaps raw label tokens to dense 1-based ids. Tokens that already form
/// the dense set {1..K} are kept verbatim; anything else is ranked by sorted
/// order, numerically when every token is numeric.
std::vector<int> remap_labels(const std::vector<std::string>& raw) {
  bool all_int = true;
  std::vector<long> as_int(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!parse_int(raw[i], &as_int[i])) {
      all_int = false;
      break;
    }
  }
  if (all_int) {
    std::vector<long> distinct(as_int);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    const bool dense_one_based =
        distinct.front() == 1 &&
        distinct.back() == static_cast<long>(distinct.size());
    std::map<long, int> rank;
    for (std::size_t r = 0; r < distinct.size(); ++r) {
      rank[distinct[r]] = static_cast<int>(r) + 1;
    }
    std::vector<int> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      out[i] = dense_one_based ? static_cast<int>(as_int[i]) : rank[as_int[i]];
    }
    return out;
  }
  std::vector<std::string> distinct(raw);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());
  std::map<std::string, int> rank;
  for (std::size_t r = 0; r < distinct.size(); ++r) {
    rank[distinct[r]] = static_cast<int>(r) + 1;
  }
  std::vector<int> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = rank[raw[i]];
  return out;
}

Dataset parse_csv(const std::vector<std::string>& lines, Domain domain) {
  std::vector<std::string> raw_labels;
  std::vector<std::vector<double>> rows;
  Eigen::Index dim = -1;
  bool first_data_line = true;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const int line_no = static_cast<int>(ln) + 1;
    if (trim(lines[ln]).empty()) continue;
    std::vector<std::string> cells = split(lines[ln], ',');
    if (first_data_line) {
      double probe;
      if (!parse_double(trim(cells[0]), &probe)) continue;  // header line
    }
    first_data_line = false;
    if (cells.size() < 2) {
      throw ParseError("csv: line " + std::to_string(line_no) +
                           ": expected label plus at least one feature",
                       line_no);
    }
    raw_labels.push_back(trim(cells[0]));
    std::vector<double> row(cells.size() - 1);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v;
      if (!parse_double(trim(cells[c]), &v)) {
        throw ParseError("csv: line " + std::to_string(line_no) +
                             ": bad value '" + cells[c] + "'",
                         line_no);
      }
      if (!std::isfinite(v)) {
        throw ParseError("csv: line " + std::to_string(line_no) +
                             ": non-finite value",
                         line_no);
      }
      row[c - 1] = v;
    }
    if (dim < 0) {
      dim = static_cast<Eigen::Index>(row.size());
    } else if (static_cast<Eigen::Index>(row.size()) != dim) {
      throw ParseError("csv: line " + std::to_string(line_no) +
                           ": ragged row (" + std::to_string(row.size()) +
                           " features, expected " + std::to_string(dim) + ")",
                       line_no);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw std::invalid_argument("csv: no data rows");
  }
  Dataset ds;
  ds.domain = domain;
  ds.features.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      ds.features(static_cast<Eigen::Index>(i), c) =
          rows[i][static_cast<std::size_t>(c)];
    }
  }
  ds.labels = remap_labels(raw_labels);
  return ds;
}

Dataset parse_svmlight(const std::vector<std::string>& lines, Domain domain) {
  std::vector<std::string> raw_labels;
  std::vector<std::vector<std::pair<long, double>>> rows;
  long max_index = 0;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const int line_no = static_cast<int>(ln) + 1;
    std::string line = lines[ln];
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    std::istringstream in(line);
    std::string label;
    in >> label;
    raw_labels.push_back(label);
    std::vector<std::pair<long, double>> entries;
    std::string pair;
    while (in >> pair) {
      const std::size_t colon = pair.find(':');
      long idx;
      double val;
      if (colon == std::string::npos ||
          !parse_int(pair.substr(0, colon), &idx) ||
          !parse_double(pair.substr(colon + 1), &val) || idx < 1) {
        throw ParseError("svmlight: line " + std::to_string(line_no) +
                             ": bad entry '" + pair + "'",
                         line_no);
      }
      if (!std::isfinite(val)) {
        throw ParseError("svmlight: line " + std::to_string(line_no) +
                             ": non-finite value",
                         line_no);
      }
      entries.emplace_back(idx, val);
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(entries));
  }
  if (rows.empty()) {
    throw std::invalid_argument("svmlight: no data rows");
  }
  if (max_index == 0) {
    throw std::invalid_argument("svmlight: no feature entries in file");
  }
  Dataset ds;
  ds.domain = domain;
  ds.features = Matrix::Zero(static_cast<Eigen::Index>(rows.size()),
                             static_cast<Eigen::Index>(max_index));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [idx, val] : rows[i]) {
      ds.features(static_cast<Eigen::Index>(i),
                  static_cast<Eigen::Index>(idx - 1)) = val;
    }
  }
  ds.labels = remap_labels(raw_labels);
  return ds;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Dataset parse_features_text(const std::string& content, FileFormat format,
                            Domain domain) {
  const std::vector<std::string> lines = split_lines(content);
  Dataset ds = format == FileFormat::Csv ? parse_csv(lines, domain)
                                         : parse_svmlight(lines, domain);
  ds.validate();
  return ds;
}

Dataset parse_features(const std::string& path, FileFormat format,
                       Domain domain) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("parse_features: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_features_text(buffer.str(), format, domain);
}

std::string write_features_text(const Dataset& ds, FileFormat format) {
  ds.validate();
  std::string out;
  if (format == FileFormat::Csv) {
    for (Eigen::Index i = 0; i < ds.n_samples(); ++i) {
      out += std::to_string(ds.labels[static_cast<std::size_t>(i)]);
      for (Eigen::Index c = 0; c < ds.dim(); ++c) {
        out += ',';
        out += format_value(ds.features(i, c));
      }
      out += '\n';
    }
  } else {
    const Eigen::Index last = ds.dim() - 1;
    for (Eigen::Index i = 0; i < ds.n_samples(); ++i) {
      out += std::to_string(ds.labels[static_cast<std::size_t>(i)]);
      for (Eigen::Index c = 0; c < ds.dim(); ++c) {
        // the final index is always written so the dimension survives
        // densification on read
        if (ds.features(i, c) == 0.0 && c != last) continue;
        out += ' ';
        out += std::to_string(c + 1);
        out += ':';
        out += format_value(ds.features(i, c));
      }
      out += '\n';
    }
  }
  return out;
}

void write_features(const Dataset& ds, const std::string& path,
                    FileFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_features: cannot open " + path);
  out << write_features_text(ds, format);
  if (!out) throw IoError("write_features: write failed for " + path);
}

std::pair<Dataset, Dataset> gen_toy_two_class(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  constexpr int kPerClass = 20;
  constexpr double kSpread = 0.4;
  const double source_means[2][2] = {{-2.0, 0.0}, {2.0, 0.0}};
  const double target_means[2][2] = {{-1.0, 3.0}, {1.0, 3.0}};

  auto make = [&](const double means[2][2], Domain domain) {
    Dataset ds;
    ds.domain = domain;
    ds.features.resize(2 * kPerClass, 2);
    ds.labels.resize(2 * kPerClass);
    Eigen::Index row = 0;
    for (int k = 0; k < 2; ++k) {
      for (int s = 0; s < kPerClass; ++s, ++row) {
        ds.features(row, 0) = means[k][0] + kSpread * gauss(rng);
        ds.features(row, 1) = means[k][1] + kSpread * gauss(rng);
        ds.labels[static_cast<std::size_t>(row)] = k + 1;
      }
    }
    return ds;
  };
  Dataset source = make(source_means, Domain::Source);
  Dataset target = make(target_means, Domain::Target);
  return {std::move(source), std::move(target)};
}

void ShiftSpec::validate() const {
  if (dim_source < 1 || dim_target < 1) {
    throw std::invalid_argument("ShiftSpec: dimensions must be >= 1");
  }
  if (class_means.rows() < 2 || class_means.cols() != dim_source) {
    throw std::invalid_argument(
        "ShiftSpec: class_means must be K x dim_source with K >= 2");
  }
  if (shift_map.rows() != dim_target || shift_map.cols() != dim_source) {
    throw std::invalid_argument(
        "ShiftSpec: shift_map must be dim_target x dim_source");
  }
  if (!(class_spread > 0.0) || noise_sigma < 0.0) {
    throw std::invalid_argument("ShiftSpec: bad spread or noise");
  }
  for (Eigen::Index a = 0; a < class_means.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < class_means.rows(); ++b) {
      if ((class_means.row(a) - class_means.row(b)).norm() == 0.0) {
        throw std::invalid_argument("ShiftSpec: duplicate class means");
      }
    }
  }
}

ShiftSpec ShiftSpec::defaults(Eigen::Index dim, int n_classes,
                              std::uint64_t seed) {
  if (dim < 1 || n_classes < 2 || n_classes > dim) {
    throw std::invalid_argument("ShiftSpec::defaults: need 2 <= K <= dim");
  }
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.8, 1.25);

  ShiftSpec spec;
  spec.dim_source = dim;
  spec.dim_target = dim;
  spec.class_spread = 1.0;
  spec.noise_sigma = 0.1;
  spec.seed = seed;

  // orthonormalized random directions, scaled to keep classes separable
  Matrix dirs(n_classes, dim);
  for (Eigen::Index r = 0; r < dirs.rows(); ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) dirs(r, c) = gauss(rng);
    for (Eigen::Index p = 0; p < r; ++p) {
      dirs.row(r) -= dirs.row(r).dot(dirs.row(p)) * dirs.row(p);
    }
    dirs.row(r).normalize();
  }
  spec.class_means = 3.0 * dirs;

  Matrix raw(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) raw(r, c) = gauss(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(raw);
  Matrix rotation = qr.householderQ();
  Vector scales(dim);
  for (Eigen::Index i = 0; i < dim; ++i) scales[i] = scale(rng);
  spec.shift_map = rotation * scales.asDiagonal();
  return spec;
}

std::pair<Dataset, Dataset> gen_shifted(const ShiftSpec& spec,
                                        int n_source_per_class,
                                        int n_target_per_class) {
  spec.validate();
  if (n_source_per_class < 1 || n_target_per_class < 1) {
    throw std::invalid_argument("gen_shifted: per-class counts must be >= 1");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int k_max = static_cast<int>(spec.class_means.rows());

  Dataset source;
  source.domain = Domain::Source;
  source.features.resize(static_cast<Eigen::Index>(k_max) * n_source_per_class,
                         spec.dim_source);
  Eigen::Index row = 0;
  for (int k = 0; k < k_max; ++k) {
    for (int s = 0; s < n_source_per_class; ++s, ++row) {
      for (Eigen::Index c = 0; c < spec.dim_source; ++c) {
        source.features(row, c) =
            spec.class_means(k, c) + spec.class_spread * gauss(rng);
      }
      source.labels.push_back(k + 1);
    }
  }

  Dataset target;
  target.domain = Domain::Target;
  target.features.resize(static_cast<Eigen::Index>(k_max) * n_target_per_class,
                         spec.dim_target);
  row = 0;
  Vector draw(spec.dim_source);
  for (int k = 0; k < k_max; ++k) {
    for (int s = 0; s < n_target_per_class; ++s, ++row) {
      for (Eigen::Index c = 0; c < spec.dim_source; ++c) {
        draw[c] = spec.class_means(k, c) + spec.class_spread * gauss(rng);
      }
      Vector t = spec.shift_map * draw;
      for (Eigen::Index c = 0; c < spec.dim_target; ++c) {
        target.features(row, c) = t[c] + spec.noise_sigma * gauss(rng);
      }
      target.labels.push_back(k + 1);
    }
  }
  return {std::move(source), std::move(target)};
}

Matrix ground_truth_transform(const ShiftSpec& spec) {
  spec.validate();
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(spec.shift_map);
  return cod.pseudoInverse();
}

}  // namespace adaptqp::io
