#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evidential/cell_layout.hpp"
#include "evidential/linear_model.hpp"

namespace evidential::cli {

/// Comma-separated table with a header row. Cells are trimmed of blanks.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a column; throws LoadError when absent.
  std::size_t column(const std::string& name) const;
};

/// Throws LoadError for unreadable files, ragged rows or an empty header.
Table read_csv(const std::string& path);
Table parse_csv(const std::string& text, const std::string& source = "<input>");

/// Parses a finite double; throws LoadError mentioning `where` on failure.
double parse_number(const std::string& text, const std::string& where);

struct ModelConfig {
  std::string response;
  std::vector<std::string> factors;
  std::vector<std::string> covariates;
  /// "interaction", "drop:<labels or terms>" or "contrast:<file>".
  std::string test = "interaction";
  /// Suppresses the interaction of a two-factor model.
  bool additive = false;
};

/// A column block of the design that shares one model term.
struct Term {
  std::string name;
  std::vector<Index> columns;
};

struct LoadedModel {
  DesignMatrix X;
  ResponseVector y;
  CellLayout layout;
  ComparisonSpec spec;
  std::vector<Term> terms;
};

/**
 * Builds the design from a table.
 *
 * Columns are the intercept, then per factor (in config order) one indicator
 * for every level except the last, then covariates, then, for exactly two
 * factors and no `additive`, the products of the two indicator blocks with
 * the first factor varying slowest. Levels are ordered by first appearance.
 * Cells are the crossed factor levels in order of first appearance.
 */
LoadedModel build_model(const Table& table, const ModelConfig& config);

LoadedModel load_csv(const std::string& path, const ModelConfig& config);

/// Parses the --test value against a built design.
ComparisonSpec parse_test(const std::string& test, const DesignMatrix& X, const std::vector<Term>& terms);

}  // namespace evidential::cli
