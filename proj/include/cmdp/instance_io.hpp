/**
 * @file instance_io.hpp
 * @brief Plain-text instance files: one instance per file, documented layout.
 *
 * Layout (order fixed by the writer; the reader accepts sections in any
 * order after the scalar header):
 *
 *   # comments and blank lines are ignored
 *   format 1
 *   name BD-2
 *   mode backdoor | frontdoor
 *   horizon H
 *   states nS
 *   actions nA
 *   confounders nW
 *   observed nU          (backdoor)      mediators nM   (frontdoor)
 *   obs_map u_0 ... u_{nW-1}             (backdoor)
 *   init p_0 ... p_{nS-1}
 *   begin conf           rows [h][s]       of nW values
 *   begin behavior       rows [h][s][w]    of nA values
 *   begin trans          rows [h][s][a][w] of nS values   (backdoor)
 *   begin reward         rows [h][s][a]    of nW values   (backdoor)
 *   begin itrans         rows [h][s][a]    of nM values   (frontdoor)
 *   begin ftrans         rows [h][s][m][w] of nS values   (frontdoor)
 *   begin freward        rows [h][s]       of nA values   (frontdoor)
 *   end                  closes each section
 *
 * Probability rows whose sum differs from 1 by more than 1e-9 are rejected
 * with the offending line number; rows inside tolerance are renormalized.
 * Reward entries must lie in [0,1] within the same tolerance and are clamped.
 */
#ifndef CMDP_INSTANCE_IO_HPP
#define CMDP_INSTANCE_IO_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cmdp/errors.hpp"
#include "cmdp/mdp.hpp"

namespace cmdp {
namespace io_detail {

inline std::string g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Line {
  std::string text;
  int number = 0;
};

inline std::vector<Line> significant_lines(std::istream& in) {
  std::vector<Line> out;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const size_t a = raw.find_first_not_of(" \t\r");
    if (a == std::string::npos || raw[a] == '#') continue;
    const size_t b = raw.find_last_not_of(" \t\r");
    out.push_back({raw.substr(a, b - a + 1), number});
  }
  return out;
}

inline std::vector<double> parse_row(const Line& ln, const std::string& skip_word = "") {
  std::istringstream ss(ln.text);
  if (!skip_word.empty()) {
    std::string w;
    ss >> w;
  }
  std::vector<double> vals;
  double x;
  while (ss >> x) vals.push_back(x);
  std::string trailing;
  if (ss.clear(), ss >> trailing)
    throw ValidationError("instance file line " + std::to_string(ln.number) +
                          ": non-numeric value '" + trailing + "'");
  return vals;
}

/// Enforce the row-sum contract, then renormalize exactly.
inline void accept_prob_row(std::vector<double>& row, int line_number) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ValidationError("instance file line " + std::to_string(line_number) +
                            ": negative or non-finite probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("instance file line " + std::to_string(line_number) +
                          ": probability row sums to " + g17(sum));
  for (double& p : row) p /= sum;
}

inline void accept_reward_row(std::vector<double>& row, int line_number) {
  for (double& r : row) {
    if (!std::isfinite(r) || r < -1e-9 || r > 1.0 + 1e-9)
      throw ValidationError("instance file line " + std::to_string(line_number) +
                            ": reward outside [0,1]");
    r = std::min(1.0, std::max(0.0, r));
  }
}

}  // namespace io_detail

inline void write_instance(std::ostream& os, const ConfoundedMDP& m) {
  using io_detail::g17;
  os << "# confounded-mdp instance\n";
  os << "format 1\n";
  os << "name " << m.name << "\n";
  os << "mode " << to_string(m.mode) << "\n";
  os << "horizon " << m.H << "\n";
  os << "states " << m.nS << "\n";
  os << "actions " << m.nA << "\n";
  os << "confounders " << m.nW << "\n";
  if (m.backdoor()) {
    os << "observed " << m.nU << "\n";
    os << "obs_map";
    for (int w = 0; w < m.nW; ++w) os << " " << m.obs_map[w];
    os << "\n";
  } else {
    os << "mediators " << m.nM << "\n";
  }
  os << "init";
  for (int s = 0; s < m.nS; ++s) os << " " << g17(m.init[s]);
  os << "\n";
  auto section = [&](const char* name, const Vec& tab, size_t rows, int width) {
    os << "begin " << name << "\n";
    for (size_t r = 0; r < rows; ++r) {
      for (int j = 0; j < width; ++j) os << (j ? " " : "") << g17(tab[r * width + j]);
      os << "\n";
    }
    os << "end\n";
  };
  const size_t hs = static_cast<size_t>(m.H) * m.nS;
  section("conf", m.conf, hs, m.nW);
  section("behavior", m.behavior, hs * m.nW, m.nA);
  if (m.backdoor()) {
    section("trans", m.trans, hs * m.nA * m.nW, m.nS);
    section("reward", m.reward, hs * m.nA, m.nW);
  } else {
    section("itrans", m.itrans, hs * m.nA, m.nM);
    section("ftrans", m.ftrans, hs * m.nM * m.nW, m.nS);
    section("freward", m.freward, hs, m.nA);
  }
}

inline void write_instance_file(const std::string& path, const ConfoundedMDP& m) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open instance file for writing: " + path);
  write_instance(os, m);
  if (!os) throw IoError("failed while writing instance file: " + path);
}

inline ConfoundedMDP read_instance(std::istream& in) {
  using namespace io_detail;
  const std::vector<Line> lines = significant_lines(in);
  ConfoundedMDP m;
  m.nU = 0;
  size_t i = 0;
  bool have_format = false, have_init = false;
  // Scalar header.
  while (i < lines.size()) {
    std::istringstream ss(lines[i].text);
    std::string key;
    ss >> key;
    if (key == "begin") break;
    if (key == "format") {
      int v = 0;
      ss >> v;
      if (v != 1)
        throw ValidationError("instance file line " + std::to_string(lines[i].number) +
                              ": unsupported format " + std::to_string(v));
      have_format = true;
    } else if (key == "name") {
      std::string rest;
      std::getline(ss, rest);
      const size_t a = rest.find_first_not_of(' ');
      m.name = a == std::string::npos ? "" : rest.substr(a);
    } else if (key == "mode") {
      std::string v;
      ss >> v;
      m.mode = adjust_mode_from_string(v);
    } else if (key == "horizon") {
      ss >> m.H;
    } else if (key == "states") {
      ss >> m.nS;
    } else if (key == "actions") {
      ss >> m.nA;
    } else if (key == "confounders") {
      ss >> m.nW;
    } else if (key == "observed") {
      ss >> m.nU;
    } else if (key == "mediators") {
      ss >> m.nM;
    } else if (key == "obs_map") {
      int u;
      while (ss >> u) m.obs_map.push_back(u);
    } else if (key == "init") {
      m.init = parse_row(lines[i], "init");
      have_init = true;
    } else {
      throw ValidationError("instance file line " + std::to_string(lines[i].number) +
                            ": unknown key '" + key + "'");
    }
    if (ss.fail() && key != "name" && key != "obs_map" && key != "init")
      throw ValidationError("instance file line " + std::to_string(lines[i].number) +
                            ": malformed value for '" + key + "'");
    ++i;
  }
  if (!have_format) throw ValidationError("instance file: missing 'format 1' header");
  if (m.H <= 0 || m.nS <= 0 || m.nA <= 0 || m.nW <= 0)
    throw ValidationError("instance file: horizon/states/actions/confounders missing or invalid");
  if (m.backdoor() && m.nU <= 0)
    throw ValidationError("instance file: backdoor instance needs 'observed'");
  if (!m.backdoor() && m.nM <= 0)
    throw ValidationError("instance file: frontdoor instance needs 'mediators'");
  if (!have_init) throw ValidationError("instance file: missing 'init' row");

  const size_t hs = static_cast<size_t>(m.H) * m.nS;
  struct Section {
    const char* name;
    Vec* tab;
    size_t rows;
    int width;
    bool prob;
    bool required;
  };
  std::vector<Section> sections;
  if (m.backdoor()) {
    sections = {
        {"conf", &m.conf, hs, m.nW, true, true},
        {"behavior", &m.behavior, hs * m.nW, m.nA, true, true},
        {"trans", &m.trans, hs * m.nA * m.nW, m.nS, true, true},
        {"reward", &m.reward, hs * m.nA, m.nW, false, true},
    };
  } else {
    sections = {
        {"conf", &m.conf, hs, m.nW, true, true},
        {"behavior", &m.behavior, hs * m.nW, m.nA, true, true},
        {"itrans", &m.itrans, hs * m.nA, m.nM, true, true},
        {"ftrans", &m.ftrans, hs * m.nM * m.nW, m.nS, true, true},
        {"freward", &m.freward, hs, m.nA, false, true},
    };
  }

  while (i < lines.size()) {
    std::istringstream ss(lines[i].text);
    std::string key, name;
    ss >> key >> name;
    if (key != "begin")
      throw ValidationError("instance file line " + std::to_string(lines[i].number) +
                            ": expected 'begin <section>'");
    Section* sec = nullptr;
    for (auto& s : sections)
      if (name == s.name) sec = &s;
    if (!sec)
      throw ValidationError("instance file line " + std::to_string(lines[i].number) +
                            ": unknown section '" + name + "'");
    if (!sec->tab->empty())
      throw ValidationError("instance file line " + std::to_string(lines[i].number) +
                            ": duplicate section '" + name + "'");
    ++i;
    sec->tab->reserve(sec->rows * sec->width);
    for (size_t r = 0; r < sec->rows; ++r, ++i) {
      if (i >= lines.size() || lines[i].text == "end")
        throw ValidationError("instance file: section '" + std::string(sec->name) +
                              "' ended after " + std::to_string(r) + " of " +
                              std::to_string(sec->rows) + " rows");
      auto row = parse_row(lines[i]);
      if (static_cast<int>(row.size()) != sec->width)
        throw ValidationError("instance file line " + std::to_string(lines[i].number) + ": row has " +
                              std::to_string(row.size()) + " values, expected " +
                              std::to_string(sec->width));
      if (sec->prob)
        accept_prob_row(row, lines[i].number);
      else
        accept_reward_row(row, lines[i].number);
      sec->tab->insert(sec->tab->end(), row.begin(), row.end());
    }
    if (i >= lines.size() || lines[i].text != "end")
      throw ValidationError("instance file: section '" + std::string(sec->name) +
                            "' missing 'end'");
    ++i;
  }
  for (const auto& s : sections)
    if (s.required && s.tab->empty())
      throw ValidationError("instance file: missing section '" + std::string(s.name) + "'");

  io_detail::accept_prob_row(m.init, 0);
  validate_or_throw(m);
  return m;
}

inline ConfoundedMDP read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open instance file: " + path);
  return read_instance(in);
}

}  // namespace cmdp

#endif  // CMDP_INSTANCE_IO_HPP
