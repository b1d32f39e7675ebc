#ifndef TSMCD_CSV_HPP
#define TSMCD_CSV_HPP

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tsmcd/survival_data.hpp"

namespace tsmcd {

struct ingest_options {
  std::string z_column;    ///< regressor column name, or a 0-based index among regressors
  bool intercept = false;  ///< prepend a column of ones to X
  char delimiter = '\0';   ///< '\0' auto-detects comma vs tab from the header
};

/// Parsed dataset plus the column bookkeeping the CLI needs for reports.
struct ingested_dataset {
  survival_dataset data;
  std::vector<std::string> covariate_names;  ///< names of the columns of X
  int z_index = 0;                           ///< column of X bound to z
  bool implicit_intercept = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    if (pos == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(const std::string& field, double& value) {
  if (field.empty()) return false;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto res = std::from_chars(begin, end, value);
  return res.ec == std::errc() && res.ptr == end && std::isfinite(value);
}

}  // namespace detail

inline ingested_dataset ingest_csv_stream(std::istream& in, const ingest_options& opt,
                                          const std::string& name) {
  std::string header;
  if (!std::getline(in, header)) fail(errc::data_format, name + ": empty file");
  const char delim =
      opt.delimiter != '\0' ? opt.delimiter
                            : (header.find('\t') != std::string::npos ? '\t' : ',');
  const std::vector<std::string> cols = detail::split_line(header, delim);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].empty()) fail(errc::data_format, name + ": empty header name");
    for (std::size_t j = i + 1; j < cols.size(); ++j)
      if (cols[i] == cols[j])
        fail(errc::data_format, name + ": duplicate header name '" + cols[i] + "'");
  }
  int y_col = -1;
  int delta_col = -1;
  std::vector<int> reg_cols;
  std::vector<std::string> reg_names;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == "y") {
      y_col = static_cast<int>(i);
    } else if (cols[i] == "delta") {
      delta_col = static_cast<int>(i);
    } else {
      reg_cols.push_back(static_cast<int>(i));
      reg_names.push_back(cols[i]);
    }
  }
  if (y_col < 0) fail(errc::data_format, name + ": missing required column 'y'");
  if (delta_col < 0) fail(errc::data_format, name + ": missing required column 'delta'");
  if (reg_cols.empty()) fail(errc::data_format, name + ": no regressor columns");

  // z designation: regressor name, or a 0-based index among the regressors
  if (opt.z_column.empty()) fail(errc::data_format, name + ": no z column designated");
  int z_reg = -1;
  for (std::size_t i = 0; i < reg_names.size(); ++i)
    if (reg_names[i] == opt.z_column) z_reg = static_cast<int>(i);
  if (z_reg < 0) {
    int idx = -1;
    const auto res = std::from_chars(opt.z_column.data(),
                                     opt.z_column.data() + opt.z_column.size(), idx);
    if (res.ec == std::errc() && res.ptr == opt.z_column.data() + opt.z_column.size() &&
        idx >= 0 && idx < static_cast<int>(reg_cols.size()))
      z_reg = idx;
  }
  if (z_reg < 0)
    fail(errc::data_format, name + ": z column '" + opt.z_column + "' not found");

  std::vector<double> ys;
  std::vector<int> deltas;
  std::vector<double> xs;  // row-major, reg_cols.size() per row
  std::string line;
  int line_no = 1;  // header was line 1
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> fields = detail::split_line(line, delim);
    if (fields.size() != cols.size())
      fail(errc::data_format, name + ": line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(cols.size()) + " fields, found " +
                                  std::to_string(fields.size()));
    double y;
    if (!detail::parse_double(fields[static_cast<std::size_t>(y_col)], y))
      fail(errc::data_format,
           name + ": line " + std::to_string(line_no) + ": column 'y' is not numeric");
    const std::string& df = fields[static_cast<std::size_t>(delta_col)];
    if (df != "0" && df != "1")
      fail(errc::data_format,
           name + ": line " + std::to_string(line_no) + ": delta must be 0 or 1, got '" + df + "'");
    ys.push_back(y);
    deltas.push_back(df == "1" ? 1 : 0);
    for (std::size_t k = 0; k < reg_cols.size(); ++k) {
      double v;
      if (!detail::parse_double(fields[static_cast<std::size_t>(reg_cols[k])], v))
        fail(errc::data_format, name + ": line " + std::to_string(line_no) + ": column '" +
                                    reg_names[k] + "' is missing or not numeric");
      xs.push_back(v);
    }
  }
  const int n = static_cast<int>(ys.size());
  if (n < 1) fail(errc::data_format, name + ": no data rows");
  bool any_event = false;
  for (int d : deltas) any_event = any_event || d == 1;
  if (!any_event) fail(errc::data_format, name + ": every observation is censored");

  ingested_dataset out;
  out.implicit_intercept = opt.intercept;
  const int pr = static_cast<int>(reg_cols.size());
  const int p = pr + (opt.intercept ? 1 : 0);
  out.data.y.resize(n);
  out.data.delta.resize(n);
  out.data.X.resize(n, p);
  out.data.z.resize(n);
  for (int i = 0; i < n; ++i) {
    out.data.y[i] = ys[static_cast<std::size_t>(i)];
    out.data.delta[i] = deltas[static_cast<std::size_t>(i)];
    if (opt.intercept) out.data.X(i, 0) = 1.0;
    for (int k = 0; k < pr; ++k)
      out.data.X(i, k + (opt.intercept ? 1 : 0)) =
          xs[static_cast<std::size_t>(i) * pr + static_cast<std::size_t>(k)];
    out.data.z[i] = out.data.X(i, z_reg + (opt.intercept ? 1 : 0));
  }
  if (opt.intercept) out.covariate_names.push_back("intercept");
  for (const auto& nm : reg_names) out.covariate_names.push_back(nm);
  out.z_index = z_reg + (opt.intercept ? 1 : 0);
  out.data.validate();
  return out;
}

inline ingested_dataset ingest_csv(const std::string& path, const ingest_options& opt) {
  std::ifstream in(path);
  if (!in) fail(errc::data_format, path + ": cannot open file");
  return ingest_csv_stream(in, opt, path);
}

/// Writes the dataset back as delimited text with a header row. An implicit
/// intercept column is skipped so the file round-trips through ingest with
/// the same options. Values print with full precision.
inline void write_dataset_csv(std::ostream& out, const ingested_dataset& ds, char delim = ',') {
  const int skip = ds.implicit_intercept ? 1 : 0;
  out << "y" << delim << "delta";
  for (std::size_t k = static_cast<std::size_t>(skip); k < ds.covariate_names.size(); ++k)
    out << delim << ds.covariate_names[k];
  out << "\n";
  char buf[32];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (int i = 0; i < ds.data.n(); ++i) {
    put(ds.data.y[i]);
    out << delim << ds.data.delta[i];
    for (int k = skip; k < ds.data.p(); ++k) {
      out << delim;
      put(ds.data.X(i, k));
    }
    out << "\n";
  }
}

}  // namespace tsmcd

#endif
