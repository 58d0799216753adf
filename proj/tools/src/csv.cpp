#include "ksample_cli/csv.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "ksample/errors.hpp"
#include "ksample/numeric.hpp"

namespace ksample::cli {

namespace {

// Metric values of one record, aligned with metric_columns(); NaN if absent.
std::vector<double> metric_values(const MetricsRecord& rec,
                                  const std::vector<std::size_t>& eval_ks) {
  std::vector<double> out{rec.mean_reward, rec.kl};
  for (std::size_t ek : eval_ks) {
    const auto it = rec.pass_at.find(ek);
    out.push_back(it == rec.pass_at.end() ? NAN : it->second);
  }
  for (std::size_t ek : eval_ks) {
    double v = NAN;
    if (rec.majority_at) {
      const auto it = rec.majority_at->find(ek);
      if (it != rec.majority_at->end()) v = it->second;
    }
    out.push_back(v);
  }
  return out;
}

std::string text_field(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::string field(double x) { return std::isnan(x) ? std::string() : format_double(x); }

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(pos));
      return out;
    }
    out.emplace_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> metric_columns(const std::vector<std::size_t>& eval_ks) {
  std::vector<std::string> cols{"mean_reward", "kl"};
  for (std::size_t ek : eval_ks) cols.push_back("pass_at_" + std::to_string(ek));
  for (std::size_t ek : eval_ks) cols.push_back("majority_at_" + std::to_string(ek));
  return cols;
}

std::string metrics_csv(const MetricsLog& log, const CsvRunInfo& info, std::uint64_t seed,
                        const std::vector<std::size_t>& eval_ks) {
  std::ostringstream os;
  os << "# schema=" << kMetricsSchema << "\n";
  os << "step,estimator,aggregator,k,seed";
  for (const auto& c : metric_columns(eval_ks)) os << "," << c;
  os << "\n";
  for (const auto& rec : log) {
    os << rec.step << "," << text_field(info.estimator) << "," << text_field(info.aggregator)
       << "," << info.k << "," << seed;
    for (double v : metric_values(rec, eval_ks)) os << "," << field(v);
    os << "\n";
  }
  return os.str();
}

std::string summary_csv(const std::vector<MetricsLog>& logs, const CsvRunInfo& info,
                        const std::vector<std::size_t>& eval_ks) {
  if (logs.empty()) throw ArgumentError("summary: no runs to summarise");
  const std::size_t n_rows = logs.front().size();
  for (const auto& log : logs) {
    if (log.size() != n_rows) throw ArgumentError("summary: runs have different lengths");
  }
  std::ostringstream os;
  os << "# schema=" << kSummarySchema << "\n";
  os << "step,estimator,aggregator,k,n_seeds";
  for (const auto& c : metric_columns(eval_ks)) os << "," << c << "_mean," << c << "_std";
  os << "\n";
  const double n = static_cast<double>(logs.size());
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t step = logs.front()[r].step;
    std::vector<std::vector<double>> per_seed;
    for (const auto& log : logs) {
      if (log[r].step != step) throw ArgumentError("summary: runs disagree on step numbers");
      per_seed.push_back(metric_values(log[r], eval_ks));
    }
    os << step << "," << text_field(info.estimator) << "," << text_field(info.aggregator)
       << "," << info.k << "," << logs.size();
    for (std::size_t c = 0; c < per_seed.front().size(); ++c) {
      CompensatedSum sum;
      bool absent = false;
      for (const auto& v : per_seed) {
        absent = absent || std::isnan(v[c]);
        sum.add(v[c]);
      }
      if (absent) {
        os << ",,";
        continue;
      }
      const double mean = sum.value() / n;
      CompensatedSum sq;
      for (const auto& v : per_seed) sq.add((v[c] - mean) * (v[c] - mean));
      os << "," << format_double(mean) << "," << format_double(std::sqrt(sq.value() / n));
    }
    os << "\n";
  }
  return os.str();
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("missing column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      t.comments.push_back(line.substr(1));
    } else if (t.header.empty()) {
      t.header = split(line);
    } else {
      t.rows.push_back(split(line));
    }
  }
  return t;
}

}  // namespace ksample::cli
