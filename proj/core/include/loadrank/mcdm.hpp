#pragma once

#include <cstddef>
#include <vector>

#include "loadrank/domain.hpp"
#include "loadrank/scoring.hpp"

namespace loadrank {

/// Scores of one alternative, one distribution per criterion.
using CriterionScores = std::vector<ScoreDistribution>;

struct PairwiseComparison {
    std::size_t n = 0;
    std::size_t m = 0;
    /// P(E_a^{n>m}) for each criterion a.
    std::vector<double> per_criterion_win_prob;
};

struct OutcomeClassification {
    std::size_t n = 0;
    std::size_t m = 0;
    double p_most_preferable = 0.0;
    double p_indifferent = 0.0;
    double p_not_preferable = 0.0;

    /// Overall superiority r^{n>m} = P(S1) + 0.5 P(S2).
    double superiority() const { return p_most_preferable + 0.5 * p_indifferent; }
};

/// Per-criterion explanation of an alternative's position.
struct CriterionRationale {
    double expected_score = 0.0;
    /// Mean over all other alternatives of P(E_a^{n>m}).
    double mean_win_prob = 0.0;
};

struct AlternativeRationale {
    std::vector<CriterionRationale> criteria;
    /// Number of alternatives this one beats with superiority > 0.5.
    std::size_t majority_wins = 0;
};

struct RankingResult {
    /// Alternative indices by descending fitness; ties keep input order.
    std::vector<std::size_t> order;
    std::vector<double> fitness;
    /// superiority[n][m] = r^{n>m}; the diagonal is 0.
    std::vector<std::vector<double>> superiority;
    std::vector<AlternativeRationale> rationale;
};

/// P(X_n > X_m) + 0.5 P(X_n = X_m) for independent discrete scores.
double win_probability(const ScoreDistribution& d_n, const ScoreDistribution& d_m);

/// Enumerates the 2^A outcome vectors and splits their mass into S1/S2/S3.
OutcomeClassification classify_outcomes(const PairwiseComparison& comp, const CriteriaConfig& config);

/// Pairwise comparison, outcome classification and fitness averaging over all
/// alternatives. Requires at least two alternatives.
RankingResult rank(const std::vector<CriterionScores>& scores, const CriteriaConfig& config);

/// Verification oracle: same quantities by exhaustive enumeration of the joint
/// score outcomes of every pair. Throws ValidationError when a pair's joint
/// outcome space exceeds 1e6 points.
RankingResult brute_force_rank(const std::vector<CriterionScores>& scores, const CriteriaConfig& config);

/// For every alternative, the probability that one joint draw of all scores
/// has it strictly outranking every other alternative (class S1 against each).
/// Exact; enumerates each alternative's own outcomes and conditions on them.
std::vector<double> simultaneous_win_probability(const std::vector<CriterionScores>& scores,
                                                 const CriteriaConfig& config);

}  // namespace loadrank
