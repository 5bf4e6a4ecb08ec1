#include "riskcap/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "riskcap/format.hpp"
#include "riskcap/montecarlo.hpp"
#include "riskcap/parallel.hpp"

namespace riskcap::panel {

namespace {

bool parse_int(std::string_view s, int& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string percent_label(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p * 100.0);
  return buf;
}

void check_return(double r, const std::string& context) {
  if (!std::isfinite(r)) throw std::invalid_argument(context + ": non-finite return");
  if (!(r > -1.0)) throw std::invalid_argument(context + ": return must be > -1");
}

}  // namespace

Date parse_date(std::string_view text) {
  Date d;
  bool ok = false;
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    ok = parse_int(text.substr(0, 4), d.year) && parse_int(text.substr(5, 2), d.month) &&
         parse_int(text.substr(8, 2), d.day);
  } else if (text.size() == 7 && text[4] == '-') {
    ok = parse_int(text.substr(0, 4), d.year) && parse_int(text.substr(5, 2), d.month);
    d.day = 1;
  }
  if (!ok || d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) {
    throw std::invalid_argument("invalid date '" + std::string(text) +
                                "' (expected YYYY-MM-DD or YYYY-MM)");
  }
  return d;
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", date.year, date.month, date.day);
  return buf;
}

ReturnPanel ReturnPanel::from_observations(std::vector<Observation> rows) {
  ReturnPanel panel;
  panel.observation_count_ = rows.size();

  for (const Observation& row : rows) {
    check_return(row.ret, format_date(row.date) + "," + row.security_id);
    panel.dates_.push_back(row.date);
    panel.ids_.push_back(row.security_id);
  }
  std::sort(panel.dates_.begin(), panel.dates_.end());
  panel.dates_.erase(std::unique(panel.dates_.begin(), panel.dates_.end()), panel.dates_.end());
  std::sort(panel.ids_.begin(), panel.ids_.end());
  panel.ids_.erase(std::unique(panel.ids_.begin(), panel.ids_.end()), panel.ids_.end());

  panel.series_.resize(panel.ids_.size());
  for (const Observation& row : rows) {
    const auto date_it = std::lower_bound(panel.dates_.begin(), panel.dates_.end(), row.date);
    const auto id_it = std::lower_bound(panel.ids_.begin(), panel.ids_.end(), row.security_id);
    const auto date_idx = static_cast<std::size_t>(date_it - panel.dates_.begin());
    const auto id_idx = static_cast<std::size_t>(id_it - panel.ids_.begin());
    panel.series_[id_idx].emplace_back(date_idx, row.ret);
  }
  for (std::size_t s = 0; s < panel.series_.size(); ++s) {
    auto& series = panel.series_[s];
    std::sort(series.begin(), series.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < series.size(); ++i) {
      if (series[i].first == series[i - 1].first) {
        throw std::invalid_argument("duplicate observation for (" +
                                    format_date(panel.dates_[series[i].first]) + ", " +
                                    panel.ids_[s] + ")");
      }
    }
  }
  return panel;
}

ReturnPanel load_panel(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;

  auto fail = [&](const std::string& what) -> std::invalid_argument {
    return std::invalid_argument("line " + std::to_string(line_no) + ": " + what);
  };

  if (!std::getline(in, line)) throw std::invalid_argument("empty input: missing CSV header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "date,security_id,return") {
    throw fail("expected header 'date,security_id,return', got '" + line + "'");
  }

  std::vector<Observation> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
      throw fail("expected 3 comma-separated fields");
    }
    Observation obs;
    try {
      obs.date = parse_date(std::string_view(line).substr(0, c1));
    } catch (const std::invalid_argument& e) {
      throw fail(e.what());
    }
    obs.security_id = line.substr(c1 + 1, c2 - c1 - 1);
    if (obs.security_id.empty()) throw fail("empty security_id");

    const std::string_view ret_text = std::string_view(line).substr(c2 + 1);
    const auto [ptr, ec] =
        std::from_chars(ret_text.data(), ret_text.data() + ret_text.size(), obs.ret);
    if (ec != std::errc{} || ptr != ret_text.data() + ret_text.size()) {
      throw fail("cannot parse return '" + std::string(ret_text) + "'");
    }
    try {
      check_return(obs.ret, "return");
    } catch (const std::invalid_argument& e) {
      throw fail(e.what());
    }
    rows.push_back(std::move(obs));
  }
  return ReturnPanel::from_observations(std::move(rows));
}

void validate(const WindowSpec& spec) {
  if (spec.past_len < 2) throw std::domain_error("WindowSpec: past_len must be >= 2");
  if (spec.min_future < 2) throw std::domain_error("WindowSpec: min_future must be >= 2");
  if (spec.future_len < spec.min_future) {
    throw std::domain_error("WindowSpec: future_len must be >= min_future");
  }
}

void validate(const QuantileGroups& groups) {
  if (groups.breakpoints.empty()) {
    throw std::domain_error("QuantileGroups: need at least one breakpoint");
  }
  double prev = 0.0;
  for (double b : groups.breakpoints) {
    if (!(b > prev && b < 1.0)) {
      throw std::domain_error("QuantileGroups: breakpoints must be strictly increasing in (0,1)");
    }
    prev = b;
  }
}

std::string QuantileGroups::label(std::size_t group) const {
  const double lo = group == 0 ? 0.0 : breakpoints[group - 1];
  const double hi = group == breakpoints.size() ? 1.0 : breakpoints[group];
  return percent_label(lo) + "-" + percent_label(hi) + "%";
}

StdWindowResult past_future_stds(const ReturnPanel& panel, const WindowSpec& spec,
                                 const Date& as_of) {
  validate(spec);
  const auto& dates = panel.dates();
  const auto it = std::lower_bound(dates.begin(), dates.end(), as_of);
  if (it == dates.end() || *it != as_of) {
    throw std::domain_error("past_future_stds: as_of date not present in the panel");
  }
  const auto as_of_idx = static_cast<std::size_t>(it - dates.begin());
  const std::size_t past_len = static_cast<std::size_t>(spec.past_len);

  StdWindowResult result;
  std::vector<double> window;
  for (std::size_t s = 0; s < panel.security_ids().size(); ++s) {
    const auto& series = panel.series(s);
    const auto pos_it = std::lower_bound(
        series.begin(), series.end(), as_of_idx,
        [](const std::pair<std::size_t, double>& e, std::size_t v) { return e.first < v; });
    if (pos_it == series.end() || pos_it->first != as_of_idx) continue;  // not present
    ++result.present;

    // Date indices in a series are strictly increasing, so the past window
    // is gap-free iff the entry past_len-1 places back sits exactly
    // past_len-1 date slots back.
    const auto pos = static_cast<std::size_t>(pos_it - series.begin());
    if (pos + 1 < past_len || series[pos + 1 - past_len].first != as_of_idx + 1 - past_len) {
      ++result.excluded_past;
      continue;
    }

    window.clear();
    for (std::size_t k = pos + 1 - past_len; k <= pos; ++k) window.push_back(series[k].second);
    const double past_std = montecarlo::sample_std(window);

    window.clear();
    const std::size_t future_last = as_of_idx + static_cast<std::size_t>(spec.future_len);
    for (std::size_t k = pos + 1; k < series.size() && series[k].first <= future_last; ++k) {
      window.push_back(series[k].second);
    }
    if (window.size() < static_cast<std::size_t>(spec.min_future)) {
      ++result.excluded_future;
      continue;
    }
    result.eligible.push_back({s, past_std, montecarlo::sample_std(window)});
  }
  return result;
}

std::vector<std::size_t> assign_quantile_groups(const ReturnPanel& panel,
                                                std::span<const SecurityStds> stds,
                                                const QuantileGroups& groups) {
  validate(groups);
  if (stds.empty()) throw std::domain_error("assign_quantile_groups: no securities");

  std::vector<std::size_t> order(stds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (stds[a].past_std != stds[b].past_std) return stds[a].past_std < stds[b].past_std;
    return panel.security_ids()[stds[a].security] < panel.security_ids()[stds[b].security];
  });

  const double n = static_cast<double>(stds.size());
  std::vector<std::size_t> labels(stds.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    const double q = (static_cast<double>(r) + 0.5) / n;
    const auto g = std::upper_bound(groups.breakpoints.begin(), groups.breakpoints.end(), q) -
                   groups.breakpoints.begin();
    labels[order[r]] = static_cast<std::size_t>(g);
  }
  return labels;
}

namespace {

struct DateRow {
  bool has_eligible = false;
  std::vector<std::optional<double>> mean_ratio;
  std::vector<std::size_t> population;
  std::size_t present = 0, excluded_past = 0, excluded_future = 0, zero_past = 0;
};

DateRow compute_date_row(const ReturnPanel& panel, const WindowSpec& spec,
                         const QuantileGroups& groups, const Date& as_of) {
  DateRow row;
  StdWindowResult win = past_future_stds(panel, spec, as_of);
  std::erase_if(win.eligible, [&](const SecurityStds& s) {
    if (s.past_std > 0.0) return false;
    ++row.zero_past;
    return true;
  });
  row.present = win.present;
  row.excluded_past = win.excluded_past;
  row.excluded_future = win.excluded_future;
  if (win.eligible.empty()) return row;

  row.has_eligible = true;
  const std::size_t n_groups = groups.group_count();
  const std::vector<std::size_t> labels = assign_quantile_groups(panel, win.eligible, groups);
  std::vector<double> sum(n_groups, 0.0);
  row.population.assign(n_groups, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sum[labels[i]] += win.eligible[i].future_std / win.eligible[i].past_std;
    ++row.population[labels[i]];
  }
  row.mean_ratio.resize(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) {
    if (row.population[g] > 0) {
      row.mean_ratio[g] = sum[g] / static_cast<double>(row.population[g]);
    }
  }
  return row;
}

}  // namespace

RatioReport ratio_report(const ReturnPanel& panel, const WindowSpec& spec,
                         const QuantileGroups& groups, const DateRange& range,
                         unsigned threads) {
  validate(spec);
  validate(groups);

  std::vector<Date> candidates;
  for (const Date& as_of : panel.dates()) {
    if (range.first && as_of < *range.first) continue;
    if (range.last && *range.last < as_of) continue;
    candidates.push_back(as_of);
  }
  std::vector<DateRow> rows(candidates.size());
  parallel_for(candidates.size(), threads, [&](std::size_t i) {
    rows[i] = compute_date_row(panel, spec, groups, candidates[i]);
  });

  RatioReport report;
  report.groups = groups;
  const std::size_t n_groups = groups.group_count();
  std::vector<double> overall_sum(n_groups, 0.0);
  std::vector<std::size_t> overall_dates(n_groups, 0);

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    DateRow& row = rows[i];
    if (!row.has_eligible) continue;
    report.dates.push_back(candidates[i]);
    report.present.push_back(row.present);
    report.excluded_past.push_back(row.excluded_past);
    report.excluded_future.push_back(row.excluded_future);
    report.zero_past.push_back(row.zero_past);
    for (std::size_t g = 0; g < n_groups; ++g) {
      if (row.mean_ratio[g]) {
        overall_sum[g] += *row.mean_ratio[g];
        ++overall_dates[g];
      }
    }
    report.mean_ratio.push_back(std::move(row.mean_ratio));
    report.population.push_back(std::move(row.population));
  }

  report.overall.resize(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) {
    if (overall_dates[g] > 0) {
      report.overall[g] = overall_sum[g] / static_cast<double>(overall_dates[g]);
    }
  }
  return report;
}

void RatioReport::write_csv(std::ostream& out) const {
  out << "date,group,mean_ratio,count\n";
  for (std::size_t d = 0; d < dates.size(); ++d) {
    for (std::size_t g = 0; g < groups.group_count(); ++g) {
      out << format_date(dates[d]) << ',' << groups.label(g) << ',';
      if (mean_ratio[d][g]) out << fmt_double(*mean_ratio[d][g]);
      out << ',' << population[d][g] << '\n';
    }
  }
}

nlohmann::json RatioReport::to_json() const {
  nlohmann::json j;
  for (std::size_t g = 0; g < groups.group_count(); ++g) {
    j["groups"].push_back(groups.label(g));
    j["overall"].push_back(overall[g] ? nlohmann::json(*overall[g]) : nlohmann::json());
  }
  j["dates"] = nlohmann::json::array();
  for (std::size_t d = 0; d < dates.size(); ++d) {
    nlohmann::json row;
    row["date"] = format_date(dates[d]);
    for (std::size_t g = 0; g < groups.group_count(); ++g) {
      row["mean_ratio"].push_back(mean_ratio[d][g] ? nlohmann::json(*mean_ratio[d][g])
                                                   : nlohmann::json());
      row["count"].push_back(population[d][g]);
    }
    row["present"] = present[d];
    row["excluded_past"] = excluded_past[d];
    row["excluded_future"] = excluded_future[d];
    row["zero_past"] = zero_past[d];
    j["dates"].push_back(std::move(row));
  }
  return j;
}

ReturnPanel synthetic_panel(std::size_t m, std::size_t n_dates, std::uint64_t seed,
                            double sigma) {
  if (m < 1 || n_dates < 1) throw std::domain_error("synthetic_panel: m and n_dates must be >= 1");
  if (!(sigma > 0.0)) throw std::domain_error("synthetic_panel: sigma must be > 0");

  std::vector<Date> dates(n_dates);
  for (std::size_t t = 0; t < n_dates; ++t) {
    const std::size_t months = t;
    dates[t] = Date{1990 + static_cast<int>(months / 12), 1 + static_cast<int>(months % 12), 1};
  }

  std::size_t width = 1;
  for (std::size_t v = m; v >= 10; v /= 10) ++width;

  std::vector<Observation> rows;
  rows.reserve(m * n_dates);
  for (std::size_t s = 0; s < m; ++s) {
    std::string digits = std::to_string(s);
    const std::string id =
        "S" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
    montecarlo::CounterRng rng(seed, s);
    for (std::size_t t = 0; t < n_dates; ++t) {
      rows.push_back({dates[t], id, sigma * rng.next_normal()});
    }
  }
  return ReturnPanel::from_observations(std::move(rows));
}

}  // namespace riskcap::panel
