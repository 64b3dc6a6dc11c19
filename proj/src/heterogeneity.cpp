#include "rankmerge/heterogeneity.hpp"

#include <vector>

#include "rankmerge/error.hpp"

namespace rankmerge {

HeterogeneitySplit heterogeneity_split(const Dataset& ds, std::string_view feature, CorrelationMethod method) {
  const auto row = ds.data().find_row(feature);
  if (!row) throw Error(ErrorKind::unknown_feature, "feature not present: " + std::string(feature));

  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;
  const auto values = ds.data().row(*row);
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (is_missing(values[c])) continue;
    (values[c] >= 0.0 ? positive : negative).push_back(c);
  }
  if (positive.empty() || negative.empty()) {
    throw Error(ErrorKind::degenerate, "feature does not separate samples: " + std::string(feature));
  }

  const auto med_pos = median_column(ds.data().select_columns(positive));
  const auto med_neg = median_column(ds.data().select_columns(negative));

  HeterogeneitySplit out;
  out.correlation = median_correlation(med_pos, med_neg, method);
  out.non_negative = positive.size();
  out.negative = negative.size();
  return out;
}

}  // namespace rankmerge
