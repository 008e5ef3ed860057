#include "evidential/cli/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "evidential/error.hpp"

namespace evidential::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const std::string& cell_text(const Table& t, std::size_t row, std::size_t col) {
  const std::string& v = t.rows[row][col];
  if (v.empty() || v == "NA") {
    throw LoadError("missing value in column '" + t.header[col] + "' at data row " + std::to_string(row + 1));
  }
  return v;
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw LoadError("column '" + name + "' not found (have: " + join(header, ", ") + ")");
  return static_cast<std::size_t>(it - header.begin());
}

Table parse_csv(const std::string& text, const std::string& source) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (t.header.empty()) {
      if (line_no == 1 && cells.front().rfind("\xEF\xBB\xBF", 0) == 0) cells.front().erase(0, 3);
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw LoadError(source + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw LoadError(source + ": no header row");
  return t;
}

Table read_csv(const std::string& path) { return parse_csv(read_file(path), path); }

double parse_number(const std::string& text, const std::string& where) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw LoadError("non-numeric value '" + text + "' in " + where);
  }
  return v;
}

LoadedModel build_model(const Table& table, const ModelConfig& config) {
  const std::size_t n = table.rows.size();
  if (n < 2) throw LoadError("data must contain at least 2 rows (found " + std::to_string(n) + ")");
  if (config.response.empty()) throw LoadError("no response column given");

  const std::size_t ycol = table.column(config.response);
  Eigen::VectorXd y(static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    y(static_cast<Index>(i)) = parse_number(cell_text(table, i, ycol), "response column '" + config.response + "'");
  }

  struct Factor {
    std::string name;
    std::vector<std::string> levels;
    std::vector<int> code;
  };
  std::vector<Factor> factors;
  for (const auto& name : config.factors) {
    if (name == config.response) throw LoadError("column '" + name + "' is both the response and a factor");
    const std::size_t col = table.column(name);
    Factor f{name, {}, {}};
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& v = cell_text(table, i, col);
      auto it = std::find(f.levels.begin(), f.levels.end(), v);
      if (it == f.levels.end()) {
        f.levels.push_back(v);
        it = f.levels.end() - 1;
      }
      f.code.push_back(static_cast<int>(it - f.levels.begin()));
    }
    if (f.levels.size() < 2) throw LoadError("factor '" + name + "' has a single level");
    factors.push_back(std::move(f));
  }

  std::vector<std::pair<std::string, Eigen::VectorXd>> covariates;
  for (const auto& name : config.covariates) {
    const std::size_t col = table.column(name);
    Eigen::VectorXd v(static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      v(static_cast<Index>(i)) = parse_number(cell_text(table, i, col), "covariate column '" + name + "'");
    }
    covariates.emplace_back(name, std::move(v));
  }

  std::vector<Eigen::VectorXd> columns;
  std::vector<std::string> labels;
  std::vector<Term> terms;
  auto add_column = [&](Eigen::VectorXd v, std::string label) {
    columns.push_back(std::move(v));
    labels.push_back(std::move(label));
    return static_cast<Index>(columns.size() - 1);
  };
  terms.push_back({"(Intercept)", {add_column(Eigen::VectorXd::Ones(static_cast<Index>(n)), "(Intercept)")}});

  std::vector<std::vector<Index>> indicator_cols(factors.size());
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const Factor& f = factors[k];
    Term term{f.name, {}};
    for (std::size_t lvl = 0; lvl + 1 < f.levels.size(); ++lvl) {
      Eigen::VectorXd v(static_cast<Index>(n));
      for (std::size_t i = 0; i < n; ++i) v(static_cast<Index>(i)) = f.code[i] == static_cast<int>(lvl) ? 1.0 : 0.0;
      const Index j = add_column(std::move(v), f.name + f.levels[lvl]);
      term.columns.push_back(j);
      indicator_cols[k].push_back(j);
    }
    terms.push_back(std::move(term));
  }
  for (auto& [name, v] : covariates) terms.push_back({name, {add_column(v, name)}});

  if (factors.size() == 2 && !config.additive) {
    Term term{factors[0].name + ":" + factors[1].name, {}};
    for (Index a : indicator_cols[0]) {
      for (Index b : indicator_cols[1]) {
        const Eigen::VectorXd v = columns[static_cast<std::size_t>(a)].cwiseProduct(columns[static_cast<std::size_t>(b)]);
        term.columns.push_back(add_column(v, labels[static_cast<std::size_t>(a)] + ":" + labels[static_cast<std::size_t>(b)]));
      }
    }
    terms.push_back(std::move(term));
  }

  Eigen::MatrixXd X(static_cast<Index>(n), static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) X.col(static_cast<Index>(j)) = columns[j];

  std::vector<int> cell_of;
  std::vector<std::string> cell_names;
  std::map<std::vector<int>, int> cell_index;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> key;
    for (const auto& f : factors) key.push_back(f.code[i]);
    auto [it, inserted] = cell_index.try_emplace(key, static_cast<int>(cell_names.size()));
    if (inserted) {
      std::vector<std::string> parts;
      for (const auto& f : factors) parts.push_back(f.name + "=" + f.levels[static_cast<std::size_t>(f.code[i])]);
      cell_names.push_back(parts.empty() ? std::string("all") : "cell " + join(parts, ","));
    }
    cell_of.push_back(it->second);
  }

  DesignMatrix design(std::move(X), std::move(labels));
  ComparisonSpec spec = parse_test(config.test, design, terms);
  return LoadedModel{std::move(design), ResponseVector(std::move(y)), CellLayout(std::move(cell_of), std::move(cell_names)),
                     std::move(spec), std::move(terms)};
}

LoadedModel load_csv(const std::string& path, const ModelConfig& config) { return build_model(read_csv(path), config); }

ComparisonSpec parse_test(const std::string& test, const DesignMatrix& X, const std::vector<Term>& terms) {
  const auto& labels = X.labels();
  if (test == "interaction") {
    for (const auto& t : terms) {
      if (t.name.find(':') != std::string::npos) return ComparisonSpec::drop(t.columns);
    }
    throw SpecError("--test interaction needs exactly two factors and a model with their interaction");
  }
  if (test.rfind("drop:", 0) == 0) {
    std::vector<Index> cols;
    for (const auto& raw : split(test.substr(5), ',')) {
      if (raw.empty()) continue;
      const auto term = std::find_if(terms.begin(), terms.end(), [&](const Term& t) { return t.name == raw; });
      if (term != terms.end()) {
        cols.insert(cols.end(), term->columns.begin(), term->columns.end());
        continue;
      }
      const auto label = std::find(labels.begin(), labels.end(), raw);
      if (label == labels.end()) {
        throw SpecError("--test drop: '" + raw + "' is neither a term nor a design column (columns: " +
                        join(labels, ", ") + ")");
      }
      cols.push_back(static_cast<Index>(label - labels.begin()));
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    auto spec = ComparisonSpec::drop(std::move(cols));
    spec.validate(X.cols());
    return spec;
  }
  if (test.rfind("contrast:", 0) == 0) {
    const std::string path = test.substr(9);
    const Table t = read_csv(path);
    std::vector<std::string> expected = labels;
    expected.push_back("h");
    if (t.header != expected) {
      throw SpecError("contrast file '" + path + "' header must be: " + join(expected, ","));
    }
    if (t.rows.empty()) throw SpecError("contrast file '" + path + "' has no rows");
    const Index q = static_cast<Index>(t.rows.size());
    const Index r = X.cols();
    Eigen::MatrixXd L(q, r);
    Eigen::VectorXd h(q);
    for (Index i = 0; i < q; ++i) {
      const auto& row = t.rows[static_cast<std::size_t>(i)];
      const std::string where = "contrast file '" + path + "' row " + std::to_string(i + 1);
      for (Index j = 0; j < r; ++j) L(i, j) = parse_number(row[static_cast<std::size_t>(j)], where);
      h(i) = parse_number(row.back(), where);
    }
    auto spec = ComparisonSpec::contrast(std::move(L), std::move(h));
    spec.validate(r);
    return spec;
  }
  throw SpecError("unrecognized --test '" + test + "' (expected interaction, drop:<columns> or contrast:<file>)");
}

}  // namespace evidential::cli
