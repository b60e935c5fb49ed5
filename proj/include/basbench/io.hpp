#pragma once

// Serialization: DiscreteModel JSON, CSV tables, numeric formatting.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "basbench/discretize.hpp"
#include "basbench/error.hpp"
#include "basbench/reach.hpp"
#include "basbench/simulate.hpp"
#include "json.hpp"

namespace basbench {

/// 17 significant digits: every double survives a text round trip.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& context = "") {
  if (s.empty() || s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || used == 0) {
    throw Error(ErrorCode::ParseError, "not a number: '" + s + "'" + (context.empty() ? "" : " (" + context + ")"));
  }
  return v;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(std::move(row));
  }
  return j;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols,
                                        const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw Error(ErrorCode::ParseError, "matrix '" + what + "' must have " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::ParseError, "matrix '" + what + "' row " + std::to_string(r) + " must have " +
                                             std::to_string(cols) + " entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

inline nlohmann::json space_json(const ChannelSpace& s) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : s) j.push_back({{"name", c.name}, {"unit", std::string(to_string(c.unit))}});
  return j;
}

inline ChannelSpace space_from_json(const nlohmann::json& j) {
  std::vector<Channel> cs;
  for (const auto& e : j) {
    const auto unit_s = e.at("unit").get<std::string>();
    auto unit = unit_from_string(unit_s);
    if (!unit) throw Error(ErrorCode::ParseError, "unknown unit '" + unit_s + "'");
    cs.push_back({e.at("name").get<std::string>(), *unit});
  }
  return ChannelSpace(std::move(cs));
}

}  // namespace detail

inline nlohmann::json to_json(const DiscreteModel& m) {
  nlohmann::json j;
  j["id"] = m.id;
  j["delta_minutes"] = m.delta_minutes;
  j["states"] = detail::space_json(m.states);
  j["inputs"] = detail::space_json(m.inputs);
  j["disturbances"] = detail::space_json(m.disturbances);
  j["A"] = detail::matrix_json(m.A);
  j["B"] = detail::matrix_json(m.B);
  j["F"] = detail::matrix_json(m.F);
  j["Q"] = std::vector<double>(m.Q.data(), m.Q.data() + m.Q.size());
  j["Sigma"] = detail::matrix_json(m.Sigma);
  j["C"] = detail::matrix_json(m.C);
  return j;
}

inline DiscreteModel discrete_model_from_json(const nlohmann::json& j) {
  DiscreteModel m;
  try {
    m.id = j.value("id", "");
    m.delta_minutes = j.at("delta_minutes").get<double>();
    m.states = detail::space_from_json(j.at("states"));
    m.inputs = detail::space_from_json(j.at("inputs"));
    m.disturbances = detail::space_from_json(j.at("disturbances"));
    m.A = detail::matrix_from_json(j.at("A"), m.n(), m.n(), "A");
    m.B = detail::matrix_from_json(j.at("B"), m.n(), m.m(), "B");
    m.F = detail::matrix_from_json(j.at("F"), m.n(), m.p(), "F");
    const auto q = j.at("Q").get<std::vector<double>>();
    m.Q = Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
    m.Sigma = detail::matrix_from_json(j.at("Sigma"), m.n(), m.n(), "Sigma");
    const auto& c = j.at("C");
    m.C = detail::matrix_from_json(c, static_cast<Eigen::Index>(c.size()), m.n(), "C");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed model document: ") + e.what());
  }
  m.validate();
  return m;
}

inline nlohmann::json to_json(const TemplatePolytope& p) {
  return {{"directions", detail::matrix_json(p.directions)},
          {"bounds", std::vector<double>(p.bounds.data(), p.bounds.data() + p.bounds.size())}};
}

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(ErrorCode::MissingKey, "no column '" + name + "'");
  }

  Eigen::MatrixXd numeric() const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < header.size(); ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            parse_double(rows[r][c], "row " + std::to_string(r + 2) + ", column " + header[c]);
      }
    }
    return m;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t s = 0;
    while (s < cell.size() && cell[s] == ' ') ++s;
    out.push_back(cell.substr(s));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// Header row plus rows of equal width. Blank lines are skipped.
inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto cells = detail::split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                             " fields, expected " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw Error(ErrorCode::ParseError, "empty CSV document");
  return t;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  return read_csv(in);
}

inline void write_csv(std::ostream& out, const CsvTable& t) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

inline std::string to_csv_string(const CsvTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

/// k,t_min,<states>,<inputs>; the final row has no input.
inline CsvTable trace_table(const Trace& tr, const ChannelSpace& states, const ChannelSpace& inputs) {
  CsvTable t;
  t.header = {"k", "t_min"};
  for (const auto& c : states) t.header.push_back(c.name);
  for (const auto& c : inputs) t.header.push_back(c.name);
  for (Eigen::Index k = 0; k < tr.states.rows(); ++k) {
    std::vector<std::string> row{std::to_string(k), format_double(static_cast<double>(k) * tr.delta_minutes)};
    for (Eigen::Index i = 0; i < tr.states.cols(); ++i) row.push_back(format_double(tr.states(k, i)));
    for (Eigen::Index i = 0; i < tr.inputs.cols(); ++i) {
      row.push_back(k < tr.inputs.rows() ? format_double(tr.inputs(k, i)) : "");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline nlohmann::json trace_metadata(const Trace& tr) {
  return {{"model", tr.model_id},
          {"seed", tr.seed},
          {"trace_index", tr.trace_index},
          {"delta_minutes", tr.delta_minutes},
          {"steps", tr.steps()}};
}

/// d_1,...,d_n,b per facet.
inline CsvTable polytope_table(const TemplatePolytope& p) {
  CsvTable t;
  for (Eigen::Index i = 0; i < p.dim(); ++i) t.header.push_back("d_" + std::to_string(i + 1));
  t.header.push_back("b");
  for (Eigen::Index r = 0; r < p.facets(); ++r) {
    std::vector<std::string> row;
    for (Eigen::Index i = 0; i < p.dim(); ++i) row.push_back(format_double(p.directions(r, i)));
    row.push_back(format_double(p.bounds(r)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline TemplatePolytope polytope_from_table(const CsvTable& t) {
  const Eigen::MatrixXd m = t.numeric();
  if (m.cols() < 2) throw Error(ErrorCode::ParseError, "polytope table needs direction and bound columns");
  TemplatePolytope p{m.leftCols(m.cols() - 1), m.col(m.cols() - 1)};
  p.validate();
  return p;
}

}  // namespace basbench
