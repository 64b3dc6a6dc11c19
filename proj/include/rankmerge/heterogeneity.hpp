#pragma once

#include <cstddef>
#include <string_view>

#include "rankmerge/matrix.hpp"
#include "rankmerge/rstats.hpp"

namespace rankmerge {

struct HeterogeneitySplit {
  double correlation = 0.0;
  std::size_t non_negative = 0;  ///< samples with feature score >= 0
  std::size_t negative = 0;
};

/// Splits the samples of a scored dataset by the sign of one feature and
/// correlates the median columns of the two halves.
/// Throws Error(degenerate) when one side is empty, Error(unknown_feature) when
/// the feature is absent.
HeterogeneitySplit heterogeneity_split(const Dataset& ds, std::string_view feature,
                                       CorrelationMethod method = CorrelationMethod::pearson);

}  // namespace rankmerge
