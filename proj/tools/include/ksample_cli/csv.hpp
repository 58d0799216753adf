#ifndef KSAMPLE_CLI_CSV_HPP_
#define KSAMPLE_CLI_CSV_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ksample/trainer.hpp"

namespace ksample::cli {

inline constexpr const char* kMetricsSchema = "ksample-metrics/1";
inline constexpr const char* kSummarySchema = "ksample-summary/1";

struct CsvRunInfo {
  std::string estimator;
  std::string aggregator;
  std::size_t k = 0;
};

// 17 significant digits, so every double round-trips.
std::string format_double(double x);

// Metric columns in output order: mean_reward, kl, pass_at_<k>..., majority_at_<k>...
std::vector<std::string> metric_columns(const std::vector<std::size_t>& eval_ks);

// Row 1 is "# schema=ksample-metrics/1"; row 2 the header
// step,estimator,aggregator,k,seed,<metric columns>. Absent metrics are empty;
// commas inside names are written as semicolons.
std::string metrics_csv(const MetricsLog& log, const CsvRunInfo& info, std::uint64_t seed,
                        const std::vector<std::size_t>& eval_ks);

// Per-step mean and population standard deviation across seeds, columns
// step,estimator,aggregator,k,n_seeds,<metric>_mean,<metric>_std,...
// All logs must share the same steps.
std::string summary_csv(const std::vector<MetricsLog>& logs, const CsvRunInfo& info,
                        const std::vector<std::size_t>& eval_ks);

struct CsvTable {
  std::vector<std::string> comments;  // lines starting with '#', without it
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws std::out_of_range naming the column.
  std::size_t column(std::string_view name) const;
};

// Plain comma splitting (the writer never quotes).
CsvTable parse_csv(std::string_view text);

}  // namespace ksample::cli

#endif  // KSAMPLE_CLI_CSV_HPP_
