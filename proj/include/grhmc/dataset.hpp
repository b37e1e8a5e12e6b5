#pragma once

#include "grhmc/targets.hpp"

#include <string>

namespace grhmc {

/**
 * Load a comma-delimited table with a header row into a logistic regression
 * design.
 *
 * Columns whose every value parses as a number are continuous and are
 * standardized to zero mean and unit variance when `standardize` is set.
 * Any other column is categorical: its levels are sorted, the first is
 * dropped and the rest become 0/1 indicator columns. An intercept column of
 * ones is prepended. The response column must contain only 0 and 1.
 *
 * Throws ModelError on a missing file, a malformed table, a non-binary
 * response or a rank-deficient design.
 */
LogisticRegressionData load_csv_dataset(const std::string& path,
                                        const std::string& response_column,
                                        bool standardize,
                                        double prior_variance = 100.0);

}  // namespace grhmc
