/**
 * @file plot.hpp
 * @brief SVG charts rendered from sweep CSVs, plus the tidy series behind them.
 *
 * Input is the frozen results.csv / cells.csv schema. Output is
 *   regret_curves.svg  mean cumulative regret per (mode, n) with 95% ribbons
 *   delta_vs_n.svg     replayed information gain against dataset size
 *   plot_data.csv      tidy rows plot,series,x,y,lo,hi for both charts
 *
 * Charts are self-contained hand-written SVG; no renderer dependency.
 */
#ifndef CMDP_PLOT_HPP
#define CMDP_PLOT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cmdp/errors.hpp"

namespace cmdp {

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // rows[i] aligns with header
};

inline Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file: " + path);
  Csv csv;
  std::string line;
  int line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
      if (ch == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    out.push_back(cur);
    return out;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split(line);
    if (csv.header.empty()) {
      csv.header = cells;
      continue;
    }
    if (cells.size() != csv.header.size())
      throw ValidationError(path + " line " + std::to_string(line_no) + ": row has " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(csv.header.size()));
    csv.rows.push_back(std::move(cells));
  }
  if (csv.header.empty()) throw ValidationError(path + ": empty CSV");
  return csv;
}

inline int csv_col(const Csv& csv, const std::string& name, const std::string& path) {
  for (size_t i = 0; i < csv.header.size(); ++i)
    if (csv.header[i] == name) return static_cast<int>(i);
  throw ValidationError(path + ": missing column '" + name + "'");
}

inline double csv_num(const std::string& cell, const std::string& path, size_t row) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size())
    throw ValidationError(path + " data row " + std::to_string(row + 1) +
                          ": non-numeric cell '" + cell + "'");
  return v;
}

namespace plot_detail {

struct Series {
  std::string label;
  std::vector<double> x, y, lo, hi;  // lo/hi may be NaN where no ribbon
};

inline const char* palette(size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  return colors[i % 8];
}

inline std::string fmt_tick(double v) {
  char buf[32];
  if (v != 0.0 && (std::abs(v) >= 1e5 || std::abs(v) < 1e-3))
    std::snprintf(buf, sizeof buf, "%.0e", v);
  else
    std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// ~5 round tick positions covering [lo, hi] in a 1-2-5 progression.
inline std::vector<double> nice_ticks(double lo, double hi) {
  if (!(hi > lo)) hi = lo + 1.0;
  const double span = hi - lo;
  double step = std::pow(10.0, std::floor(std::log10(span / 4.0)));
  for (double mult : {1.0, 2.0, 5.0, 10.0})
    if (span / (step * mult) <= 5.5) {
      step *= mult;
      break;
    }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step)
    ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  return ticks;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

/// Line chart with optional ribbons. When log_x is set, x values are raw n
/// and are placed at log10(n + 1) with ticks at 0, 10, 100, ...
inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& xlabel, const std::string& ylabel,
                             const std::vector<Series>& series, bool log_x) {
  const double W = 880, H = 540;
  const double ml = 78, mr = 210, mt = 48, mb = 62;
  const double pw = W - ml - mr, ph = H - mt - mb;

  auto xpos_raw = [&](double x) { return log_x ? std::log10(x + 1.0) : x; };
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (std::isnan(s.y[i])) continue;
      xlo = std::min(xlo, xpos_raw(s.x[i]));
      xhi = std::max(xhi, xpos_raw(s.x[i]));
      double lo = std::isnan(s.lo[i]) ? s.y[i] : s.lo[i];
      double hi = std::isnan(s.hi[i]) ? s.y[i] : s.hi[i];
      ylo = std::min(ylo, lo);
      yhi = std::max(yhi, hi);
    }
  if (xlo > xhi) {
    xlo = 0;
    xhi = 1;
    ylo = 0;
    yhi = 1;
  }
  if (ylo > 0 && ylo < 0.25 * (yhi - ylo)) ylo = 0;  // anchor near-zero baselines
  if (!(yhi > ylo)) yhi = ylo + 1.0;
  const double ypad = 0.05 * (yhi - ylo);
  yhi += ypad;
  if (ylo != 0) ylo -= ypad;
  if (!(xhi > xlo)) xhi = xlo + 1.0;

  auto X = [&](double x) { return ml + (xpos_raw(x) - xlo) / (xhi - xlo) * pw; };
  auto Y = [&](double y) { return mt + ph - (y - ylo) / (yhi - ylo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"#ffffff\"/>\n";
  os << "<text x=\"" << ml << "\" y=\"28\" font-family=\"sans-serif\" font-size=\"17\" "
        "font-weight=\"bold\" fill=\"#222\">"
     << xml_escape(title) << "</text>\n";

  // Gridlines and y ticks.
  for (double t : nice_ticks(ylo, yhi)) {
    const double y = Y(t);
    os << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw << "\" y2=\"" << y
       << "\" stroke=\"#e4e4e4\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#444\" "
          "text-anchor=\"end\">"
       << fmt_tick(t) << "</text>\n";
  }
  // X ticks.
  std::vector<double> xticks;
  if (log_x) {
    xticks.push_back(0.0);
    for (double n = 1.0; std::log10(n + 1.0) <= xhi + 1e-9; n *= 10.0)
      if (std::log10(n + 1.0) >= xlo - 1e-9) xticks.push_back(n);
  } else {
    xticks = nice_ticks(xlo, xhi);
  }
  for (double t : xticks) {
    const double x = log_x ? X(t) : ml + (t - xlo) / (xhi - xlo) * pw;
    os << "<line x1=\"" << x << "\" y1=\"" << mt + ph << "\" x2=\"" << x << "\" y2=\""
       << mt + ph + 5 << "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << mt + ph + 20
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#444\" "
          "text-anchor=\"middle\">"
       << fmt_tick(t) << "</text>\n";
  }
  // Axes.
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
     << "\" stroke=\"#222\" stroke-width=\"1.2\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
     << mt + ph << "\" stroke=\"#222\" stroke-width=\"1.2\"/>\n";
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 16
     << "\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#222\" "
        "text-anchor=\"middle\">"
     << xml_escape(xlabel) << "</text>\n";
  os << "<text x=\"20\" y=\"" << mt + ph / 2
     << "\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#222\" "
        "text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << mt + ph / 2 << ")\">" << xml_escape(ylabel) << "</text>\n";

  // Ribbons first, lines on top.
  for (size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    std::ostringstream ribbon;
    bool has_ribbon = false;
    for (size_t i = 0; i < s.x.size(); ++i)
      if (!std::isnan(s.hi[i])) {
        ribbon << X(s.x[i]) << "," << Y(s.hi[i]) << " ";
        has_ribbon = true;
      }
    for (size_t i = s.x.size(); i-- > 0;)
      if (!std::isnan(s.lo[i])) ribbon << X(s.x[i]) << "," << Y(s.lo[i]) << " ";
    if (has_ribbon)
      os << "<polygon points=\"" << ribbon.str() << "\" fill=\"" << palette(si)
         << "\" fill-opacity=\"0.14\" stroke=\"none\"/>\n";
  }
  for (size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    std::ostringstream pts;
    for (size_t i = 0; i < s.x.size(); ++i)
      if (!std::isnan(s.y[i])) pts << X(s.x[i]) << "," << Y(s.y[i]) << " ";
    os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << palette(si)
       << "\" stroke-width=\"1.8\"/>\n";
    if (s.x.size() <= 40)
      for (size_t i = 0; i < s.x.size(); ++i)
        if (!std::isnan(s.y[i]))
          os << "<circle cx=\"" << X(s.x[i]) << "\" cy=\"" << Y(s.y[i])
             << "\" r=\"2.6\" fill=\"" << palette(si) << "\"/>\n";
  }
  // Legend.
  for (size_t si = 0; si < series.size(); ++si) {
    const double y = mt + 14 + 20.0 * si;
    os << "<line x1=\"" << ml + pw + 14 << "\" y1=\"" << y << "\" x2=\"" << ml + pw + 38
       << "\" y2=\"" << y << "\" stroke=\"" << palette(si) << "\" stroke-width=\"2.4\"/>\n";
    os << "<text x=\"" << ml + pw + 44 << "\" y=\"" << y + 4
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">"
       << xml_escape(series[si].label) << "</text>\n";
  }
  os << "</svg>\n";

  std::ofstream f(path);
  if (!f) throw IoError("cannot open SVG file for writing: " + path);
  f << os.str();
  if (!f) throw IoError("failed while writing " + path);
}

}  // namespace plot_detail

/**
 * Build both charts and the tidy series file from sweep output. results_csv
 * feeds the regret curves; cells_csv feeds the information-gain chart.
 */
inline void write_plots(const std::string& results_csv, const std::string& cells_csv,
                        const std::string& out_dir) {
  using plot_detail::Series;

  // Regret curves: per (mode, n), mean cumulative regret over seeds by k.
  const Csv res = read_csv(results_csv);
  const int c_mode = csv_col(res, "mode", results_csv);
  const int c_n = csv_col(res, "n", results_csv);
  const int c_seed = csv_col(res, "seed", results_csv);
  const int c_k = csv_col(res, "k", results_csv);
  const int c_cum = csv_col(res, "cum_regret", results_csv);
  std::string instance = "sweep";
  if (!res.rows.empty()) instance = res.rows[0][csv_col(res, "instance", results_csv)];

  std::map<std::pair<std::string, long long>, std::map<long long, std::vector<double>>> curves;
  for (size_t i = 0; i < res.rows.size(); ++i) {
    const auto& row = res.rows[i];
    const long long n = std::llround(csv_num(row[c_n], results_csv, i));
    const long long k = std::llround(csv_num(row[c_k], results_csv, i));
    (void)row[c_seed];
    curves[{row[c_mode], n}][k].push_back(csv_num(row[c_cum], results_csv, i));
  }
  std::vector<Series> regret_series;
  for (const auto& [key, by_k] : curves) {
    Series s;
    char label[96];
    std::snprintf(label, sizeof label, "%s n=%lld", key.first.c_str(), key.second);
    s.label = label;
    for (const auto& [k, vals] : by_k) {
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= vals.size();
      double ci = 0.0;
      if (vals.size() > 1) {
        double ss = 0.0;
        for (double v : vals) ss += (v - mean) * (v - mean);
        ci = 1.96 * std::sqrt(ss / (vals.size() - 1)) / std::sqrt(double(vals.size()));
      }
      s.x.push_back(static_cast<double>(k));
      s.y.push_back(mean);
      s.lo.push_back(vals.size() > 1 ? mean - ci : std::numeric_limits<double>::quiet_NaN());
      s.hi.push_back(vals.size() > 1 ? mean + ci : std::numeric_limits<double>::quiet_NaN());
    }
    regret_series.push_back(std::move(s));
  }

  // Information gain vs dataset size: per mode, replayed delta over n.
  const Csv cells = read_csv(cells_csv);
  const int l_mode = csv_col(cells, "mode", cells_csv);
  const int l_n = csv_col(cells, "n", cells_csv);
  const int l_r1 = csv_col(cells, "replay_delta1", cells_csv);
  const int l_r2 = csv_col(cells, "replay_delta2", cells_csv);
  std::map<std::string, std::map<long long, std::vector<double>>> gains;
  for (size_t i = 0; i < cells.rows.size(); ++i) {
    const auto& row = cells.rows[i];
    const long long n = std::llround(csv_num(row[l_n], cells_csv, i));
    const double r1 = csv_num(row[l_r1], cells_csv, i);
    const double r2 = csv_num(row[l_r2], cells_csv, i);
    if (!std::isnan(r1)) gains[row[l_mode]][n].push_back(r1);
    if (!std::isnan(r2)) gains[row[l_mode] + " stage2"][n].push_back(r2);
  }
  std::vector<Series> gain_series;
  for (const auto& [label, by_n] : gains) {
    Series s;
    s.label = label;
    for (const auto& [n, vals] : by_n) {
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= vals.size();
      double ci = 0.0;
      if (vals.size() > 1) {
        double ss = 0.0;
        for (double v : vals) ss += (v - mean) * (v - mean);
        ci = 1.96 * std::sqrt(ss / (vals.size() - 1)) / std::sqrt(double(vals.size()));
      }
      s.x.push_back(static_cast<double>(n));
      s.y.push_back(mean);
      s.lo.push_back(vals.size() > 1 ? mean - ci : std::numeric_limits<double>::quiet_NaN());
      s.hi.push_back(vals.size() > 1 ? mean + ci : std::numeric_limits<double>::quiet_NaN());
    }
    gain_series.push_back(std::move(s));
  }

  plot_detail::write_line_chart(out_dir + "/regret_curves.svg",
                                instance + ": cumulative regret", "episode k",
                                "cumulative regret", regret_series, /*log_x=*/false);
  plot_detail::write_line_chart(out_dir + "/delta_vs_n.svg",
                                instance + ": online information gain vs offline data",
                                "offline episodes n", "replayed normalized gain", gain_series,
                                /*log_x=*/true);

  std::ofstream tidy(out_dir + "/plot_data.csv");
  if (!tidy) throw IoError("cannot open plot_data.csv for writing in " + out_dir);
  tidy << "plot,series,x,y,lo,hi\n";
  auto emit = [&](const char* plot, const std::vector<Series>& ss) {
    char buf[64];
    auto num = [&](double v) -> std::string {
      if (std::isnan(v)) return "";
      std::snprintf(buf, sizeof buf, "%.12g", v);
      return buf;
    };
    for (const auto& s : ss)
      for (size_t i = 0; i < s.x.size(); ++i)
        tidy << plot << "," << s.label << "," << num(s.x[i]) << "," << num(s.y[i]) << ","
             << num(s.lo[i]) << "," << num(s.hi[i]) << "\n";
  };
  emit("regret_curves", regret_series);
  emit("delta_vs_n", gain_series);
  if (!tidy) throw IoError("failed while writing plot_data.csv in " + out_dir);
}

}  // namespace cmdp

#endif  // CMDP_PLOT_HPP
