#include "treeffuse/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "treeffuse/rng.hpp"

namespace treeffuse {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_cell(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && begin != end;
}

bool is_missing_cell(const std::string& cell) {
  std::string t;
  for (char c : cell)
    if (c != ' ' && c != '\t' && c != '\r') t += c;
  return t.empty() || t == "NaN" || t == "nan" || t == "NAN";
}

}  // namespace

Dataset load_csv(const std::string& path,
                 const std::vector<std::string>& response_columns) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty file: " + path);
  std::vector<std::string> header = split_line(line);

  std::set<std::string> seen;
  for (const auto& name : header) {
    if (!seen.insert(name).second)
      throw ValidationError("duplicate column label: " + name);
  }

  std::vector<bool> is_response(header.size(), false);
  for (const auto& rc : response_columns) {
    auto it = std::find(header.begin(), header.end(), rc);
    if (it == header.end())
      throw ValidationError("response column not found: " + rc);
    is_response[static_cast<std::size_t>(it - header.begin())] = true;
  }

  std::vector<std::size_t> feat_idx, resp_idx;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (is_response[j])
      resp_idx.push_back(j);
    else
      feat_idx.push_back(j);
  }
  if (feat_idx.empty()) throw ValidationError("no feature columns");

  std::vector<std::vector<double>> feat_rows, resp_rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      throw ValidationError("row " + std::to_string(line_no) +
                            ": wrong number of cells");
    std::vector<double> frow, rrow;
    for (std::size_t j : feat_idx) {
      double v;
      if (is_missing_cell(cells[j])) {
        frow.push_back(std::numeric_limits<double>::quiet_NaN());
      } else if (parse_cell(cells[j], v)) {
        frow.push_back(v);
      } else {
        throw ValidationError("row " + std::to_string(line_no) +
                              ": malformed feature cell '" + cells[j] + "'");
      }
    }
    for (std::size_t j : resp_idx) {
      double v;
      if (!parse_cell(cells[j], v))
        throw ValidationError("row " + std::to_string(line_no) +
                              ": malformed response cell '" + cells[j] + "'");
      rrow.push_back(v);
    }
    feat_rows.push_back(std::move(frow));
    resp_rows.push_back(std::move(rrow));
  }
  if (feat_rows.empty()) throw ValidationError("no data rows in " + path);

  Dataset d;
  d.features = Matrix(feat_rows.size(), feat_idx.size());
  d.responses = Matrix(resp_rows.size(), resp_idx.size());
  for (std::size_t i = 0; i < feat_rows.size(); ++i) {
    std::copy(feat_rows[i].begin(), feat_rows[i].end(),
              d.features.row(i).begin());
    std::copy(resp_rows[i].begin(), resp_rows[i].end(),
              d.responses.row(i).begin());
  }
  for (std::size_t j : feat_idx) d.feature_names.push_back(header[j]);
  for (std::size_t j : resp_idx) d.response_names.push_back(header[j]);
  return d;
}

namespace {

void write_cell(std::ostream& os, double v) {
  if (std::isnan(v)) return;  // missing -> empty cell
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

void save_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (std::size_t j = 0; j < d.feature_names.size(); ++j) {
    if (j) out << ',';
    out << d.feature_names[j];
  }
  for (const auto& name : d.response_names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < d.n(); ++i) {
    for (std::size_t j = 0; j < d.d_x(); ++j) {
      if (j) out << ',';
      write_cell(out, d.features(i, j));
    }
    for (std::size_t j = 0; j < d.d_y(); ++j) {
      out << ',';
      write_cell(out, d.responses(i, j));
    }
    out << '\n';
  }
}

ResponseScaler fit_scaler(const Dataset& d) {
  if (d.n() < 2) throw ValidationError("fit_scaler requires at least 2 rows");
  ResponseScaler s;
  const double n = static_cast<double>(d.n());
  for (std::size_t k = 0; k < d.d_y(); ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i) mean += d.responses(i, k);
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i) {
      double r = d.responses(i, k) - mean;
      ss += r * r;
    }
    double sd = std::sqrt(ss / (n - 1.0));
    s.means.push_back(mean);
    s.scales.push_back(std::max(sd, 1e-8));
  }
  return s;
}

std::vector<double> apply_scaler(const ResponseScaler& s,
                                 std::span<const double> y) {
  if (y.size() != s.means.size())
    throw ValidationError("apply_scaler: dimension mismatch");
  std::vector<double> z(y.size());
  for (std::size_t k = 0; k < y.size(); ++k)
    z[k] = (y[k] - s.means[k]) / s.scales[k];
  return z;
}

std::vector<double> invert_scaler(const ResponseScaler& s,
                                  std::span<const double> z) {
  if (z.size() != s.means.size())
    throw ValidationError("invert_scaler: dimension mismatch");
  std::vector<double> y(z.size());
  for (std::size_t k = 0; k < z.size(); ++k)
    y[k] = z[k] * s.scales[k] + s.means[k];
  return y;
}

namespace {

Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.features = Matrix(idx.size(), d.d_x());
  out.responses = Matrix(idx.size(), d.d_y());
  out.feature_names = d.feature_names;
  out.response_names = d.response_names;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    auto fr = d.features.row(idx[i]);
    auto rr = d.responses.row(idx[i]);
    std::copy(fr.begin(), fr.end(), out.features.row(i).begin());
    std::copy(rr.begin(), rr.end(), out.responses.row(i).begin());
  }
  return out;
}

}  // namespace

std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec) {
  if (!(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0))
    throw ValidationError("validation_fraction must be in (0,1)");
  const std::size_t n = d.n();
  auto n_valid = static_cast<std::size_t>(
      std::llround(spec.validation_fraction * static_cast<double>(n)));
  n_valid = std::clamp<std::size_t>(n_valid, 1, n > 1 ? n - 1 : 0);
  if (n_valid == 0 || n_valid >= n)
    throw ValidationError("dataset too small to split");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(spec.seed, 0x5b1d7));
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = rng.next_u64() % i;
    std::swap(idx[i - 1], idx[j]);
  }
  std::vector<std::size_t> valid_idx(idx.begin(), idx.begin() + n_valid);
  std::vector<std::size_t> train_idx(idx.begin() + n_valid, idx.end());
  return {take_rows(d, train_idx), take_rows(d, valid_idx)};
}

}  // namespace treeffuse
