#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace riskcap::panel {

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;
  auto operator<=>(const Date&) const = default;
};

// Accepts ISO "YYYY-MM-DD" or "YYYY-MM" (normalized to day 01).
Date parse_date(std::string_view text);
std::string format_date(const Date& date);

struct Observation {
  Date date;
  std::string security_id;
  double ret = 0.0;  // decimal units
};

// Long-format dated returns, indexed by the panel's global date calendar.
// (date, security) keys are unique; per-security series are date-sorted.
class ReturnPanel {
 public:
  static ReturnPanel from_observations(std::vector<Observation> rows);

  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<std::string>& security_ids() const { return ids_; }
  std::size_t observation_count() const { return observation_count_; }

  // (date index, return) pairs for one security, ascending in date index.
  const std::vector<std::pair<std::size_t, double>>& series(std::size_t security) const {
    return series_[security];
  }

 private:
  std::vector<Date> dates_;
  std::vector<std::string> ids_;
  std::vector<std::vector<std::pair<std::size_t, double>>> series_;
  std::size_t observation_count_ = 0;
};

// CSV `date,security_id,return` with header. Throws std::invalid_argument
// carrying the offending line number on parse errors, duplicate keys, and
// non-finite or <= -1 returns.
ReturnPanel load_panel(std::istream& in);

struct WindowSpec {
  int past_len = 60;    // observations, strict gap-free window ending at as-of
  int future_len = 60;  // maximum future observations used
  int min_future = 2;   // smallest future count with a defined sample std
};
void validate(const WindowSpec& spec);

struct QuantileGroups {
  std::vector<double> breakpoints{0.01, 0.10, 0.90, 0.99};
  std::size_t group_count() const { return breakpoints.size() + 1; }
  std::string label(std::size_t group) const;
};
void validate(const QuantileGroups& groups);

struct SecurityStds {
  std::size_t security = 0;  // index into panel.security_ids()
  double past_std = 0.0;
  double future_std = 0.0;
};

struct StdWindowResult {
  std::vector<SecurityStds> eligible;
  std::size_t present = 0;          // securities observed at the as-of date
  std::size_t excluded_past = 0;    // incomplete past window
  std::size_t excluded_future = 0;  // fewer than min_future future observations
};

// Past std over exactly past_len consecutive panel dates ending at as_of;
// future std over however many of the next future_len dates the security
// has, subject to min_future. Exclusions are counted, not thrown.
StdWindowResult past_future_stds(const ReturnPanel& panel, const WindowSpec& spec,
                                 const Date& as_of);

// Rank-based group assignment: ascending by (past_std, security_id), rank r
// of N lands in the group whose probability interval contains (r-0.5)/N.
// Returns one group index per input entry, aligned with `stds`.
std::vector<std::size_t> assign_quantile_groups(const ReturnPanel& panel,
                                                std::span<const SecurityStds> stds,
                                                const QuantileGroups& groups);

struct DateRange {
  std::optional<Date> first;  // inclusive; unset = panel start
  std::optional<Date> last;   // inclusive; unset = panel end
};

struct RatioReport {
  QuantileGroups groups;
  std::vector<Date> dates;  // as-of dates with at least one eligible security
  // [date][group]; missing marker when a group is empty on that date.
  std::vector<std::vector<std::optional<double>>> mean_ratio;
  std::vector<std::vector<std::size_t>> population;
  // Per-date accounting: present = eligible + excluded_* + zero_past.
  std::vector<std::size_t> present;
  std::vector<std::size_t> excluded_past;
  std::vector<std::size_t> excluded_future;
  std::vector<std::size_t> zero_past;
  // Per-group mean over dates on which the group had members.
  std::vector<std::optional<double>> overall;

  void write_csv(std::ostream& out) const;  // date,group,mean_ratio,count
  nlohmann::json to_json() const;
};

// Per as-of date: group securities by past-std quantile and average the
// future/past std ratio within each group; then average those per-date
// means over dates, weighting each date equally. Dates are processed
// independently (optionally in parallel); assembly is date-ordered, so the
// report does not depend on the thread count.
RatioReport ratio_report(const ReturnPanel& panel, const WindowSpec& spec,
                         const QuantileGroups& groups, const DateRange& range = {},
                         unsigned threads = 1);

// Monthly iid normal panel: m securities, n_dates consecutive months from
// 1990-01, one substream per security. The default sigma is a plausible
// monthly return scale; the ratio pipeline is scale-free.
ReturnPanel synthetic_panel(std::size_t m, std::size_t n_dates, std::uint64_t seed,
                            double sigma = 0.05);

}  // namespace riskcap::panel
