#include "loadrank/mcdm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "loadrank/error.hpp"

namespace loadrank {
namespace {

// Weighted sums within this distance of a class boundary count as indifferent
// in both directions, keeping r^{n>m} + r^{m>n} = 1 under rounding.
constexpr double kBoundaryEps = 1e-12;

enum class OutcomeClass { MostPreferable, Indifferent, NotPreferable };

OutcomeClass classify(double weighted, double nu) {
    if (weighted > nu + kBoundaryEps) return OutcomeClass::MostPreferable;
    if (weighted < 1.0 - nu - kBoundaryEps) return OutcomeClass::NotPreferable;
    return OutcomeClass::Indifferent;
}

void validate_scores(const std::vector<CriterionScores>& scores, const CriteriaConfig& config) {
    validate_criteria(config);
    for (std::size_t n = 0; n < scores.size(); ++n) {
        if (scores[n].size() != config.weights.size()) {
            throw ValidationError("alternative " + std::to_string(n) + " has " + std::to_string(scores[n].size()) +
                                  " criterion scores, config has " + std::to_string(config.weights.size()) +
                                  " weights");
        }
    }
}

std::vector<std::size_t> order_by_fitness(const std::vector<double>& fitness) {
    std::vector<std::size_t> order(fitness.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Quantised keys keep exact ties (e.g. twin alternatives) in input order.
    std::vector<long long> key(fitness.size());
    for (std::size_t i = 0; i < fitness.size(); ++i) key[i] = std::llround(fitness[i] * 1e12);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
    return order;
}

void fill_rationale(RankingResult& result, const std::vector<CriterionScores>& scores,
                    const std::vector<std::vector<std::vector<double>>>& win) {
    const auto n_alt = scores.size();
    const auto n_crit = scores.empty() ? 0 : scores.front().size();
    result.rationale.assign(n_alt, {});
    for (std::size_t n = 0; n < n_alt; ++n) {
        auto& r = result.rationale[n];
        r.criteria.resize(n_crit);
        for (std::size_t a = 0; a < n_crit; ++a) {
            r.criteria[a].expected_score = scores[n][a].expected();
            double sum = 0.0;
            for (std::size_t m = 0; m < n_alt; ++m) {
                if (m != n) sum += win[a][n][m];
            }
            r.criteria[a].mean_win_prob = n_alt > 1 ? sum / static_cast<double>(n_alt - 1) : 0.0;
        }
        for (std::size_t m = 0; m < n_alt; ++m) {
            if (m != n && result.superiority[n][m] > 0.5 + 1e-12) ++r.majority_wins;
        }
    }
}

}  // namespace

double win_probability(const ScoreDistribution& d_n, const ScoreDistribution& d_m) {
    double greater = 0.0;
    double equal = 0.0;
    for (const auto& x : d_n.support()) {
        const auto kx = score_key(x.value);
        for (const auto& y : d_m.support()) {
            const auto ky = score_key(y.value);
            if (kx > ky) {
                greater += x.prob * y.prob;
            } else if (kx == ky) {
                equal += x.prob * y.prob;
            }
        }
    }
    return greater + 0.5 * equal;
}

OutcomeClassification classify_outcomes(const PairwiseComparison& comp, const CriteriaConfig& config) {
    validate_criteria(config);
    const auto a_count = config.weights.size();
    if (comp.per_criterion_win_prob.size() != a_count) {
        throw ValidationError("comparison has " + std::to_string(comp.per_criterion_win_prob.size()) +
                              " criteria, config has " + std::to_string(a_count));
    }
    OutcomeClassification out{comp.n, comp.m, 0.0, 0.0, 0.0};
    const std::uint64_t realizations = std::uint64_t{1} << a_count;
    for (std::uint64_t h = 0; h < realizations; ++h) {
        double q = 1.0;
        double weighted = 0.0;
        for (std::size_t a = 0; a < a_count; ++a) {
            const double p = comp.per_criterion_win_prob[a];
            if ((h >> a) & 1U) {
                q *= p;
                weighted += config.weights[a];
            } else {
                q *= 1.0 - p;
            }
        }
        switch (classify(weighted, config.threshold)) {
            case OutcomeClass::MostPreferable: out.p_most_preferable += q; break;
            case OutcomeClass::Indifferent: out.p_indifferent += q; break;
            case OutcomeClass::NotPreferable: out.p_not_preferable += q; break;
        }
    }
    return out;
}

RankingResult rank(const std::vector<CriterionScores>& scores, const CriteriaConfig& config) {
    if (scores.size() < 2) {
        throw ValidationError("ranking needs at least 2 alternatives, got " + std::to_string(scores.size()));
    }
    validate_scores(scores, config);
    const auto n_alt = scores.size();
    const auto n_crit = config.weights.size();

    // win[a][n][m] = P(E_a^{n>m})
    std::vector<std::vector<std::vector<double>>> win(
        n_crit, std::vector<std::vector<double>>(n_alt, std::vector<double>(n_alt, 0.0)));
    for (std::size_t a = 0; a < n_crit; ++a) {
        for (std::size_t n = 0; n < n_alt; ++n) {
            for (std::size_t m = 0; m < n_alt; ++m) {
                if (m != n) win[a][n][m] = win_probability(scores[n][a], scores[m][a]);
            }
        }
    }

    RankingResult result;
    result.superiority.assign(n_alt, std::vector<double>(n_alt, 0.0));
    PairwiseComparison comp;
    comp.per_criterion_win_prob.resize(n_crit);
    for (std::size_t n = 0; n < n_alt; ++n) {
        for (std::size_t m = 0; m < n_alt; ++m) {
            if (m == n) continue;
            comp.n = n;
            comp.m = m;
            for (std::size_t a = 0; a < n_crit; ++a) comp.per_criterion_win_prob[a] = win[a][n][m];
            result.superiority[n][m] = classify_outcomes(comp, config).superiority();
        }
    }
    for (std::size_t n = 0; n < n_alt; ++n) {
        for (std::size_t m = n + 1; m < n_alt; ++m) {
            const double sum = result.superiority[n][m] + result.superiority[m][n];
            if (std::abs(sum - 1.0) > 1e-9) {
                throw std::logic_error("superiority complement violated for pair (" + std::to_string(n) + ", " +
                                       std::to_string(m) + "): sum " + std::to_string(sum));
            }
        }
    }

    result.fitness.resize(n_alt);
    for (std::size_t n = 0; n < n_alt; ++n) {
        double sum = 0.0;
        for (std::size_t m = 0; m < n_alt; ++m) {
            if (m != n) sum += result.superiority[n][m];
        }
        result.fitness[n] = sum / static_cast<double>(n_alt - 1);
    }
    result.order = order_by_fitness(result.fitness);
    fill_rationale(result, scores, win);
    return result;
}

RankingResult brute_force_rank(const std::vector<CriterionScores>& scores, const CriteriaConfig& config) {
    if (scores.size() < 2) {
        throw ValidationError("ranking needs at least 2 alternatives, got " + std::to_string(scores.size()));
    }
    validate_scores(scores, config);
    const auto n_alt = scores.size();
    const auto n_crit = config.weights.size();

    std::vector<double> outcome_space(n_alt, 1.0);
    for (std::size_t n = 0; n < n_alt; ++n) {
        for (const auto& d : scores[n]) outcome_space[n] *= static_cast<double>(d.size());
    }

    RankingResult result;
    result.superiority.assign(n_alt, std::vector<double>(n_alt, 0.0));
    std::vector<std::vector<std::vector<double>>> win(
        n_crit, std::vector<std::vector<double>>(n_alt, std::vector<double>(n_alt, 0.0)));

    // Mixed-radix counters over (criterion of n, criterion of m) support indices.
    std::vector<std::size_t> radix(2 * n_crit);
    std::vector<std::size_t> digit(2 * n_crit);
    for (std::size_t n = 0; n < n_alt; ++n) {
        for (std::size_t m = 0; m < n_alt; ++m) {
            if (m == n) continue;
            if (outcome_space[n] * outcome_space[m] > 1e6) {
                throw ValidationError("brute_force_rank: joint outcome space of pair (" + std::to_string(n) + ", " +
                                      std::to_string(m) + ") exceeds 1e6");
            }
            for (std::size_t a = 0; a < n_crit; ++a) {
                radix[2 * a] = scores[n][a].size();
                radix[2 * a + 1] = scores[m][a].size();
            }
            std::fill(digit.begin(), digit.end(), 0);
            double r = 0.0;
            std::vector<double> won(n_crit, 0.0);
            while (true) {
                double prob = 1.0;
                // Realised indicator per criterion: 1, 0, or a tie (-1).
                std::vector<int> g(n_crit);
                for (std::size_t a = 0; a < n_crit; ++a) {
                    const auto& x = scores[n][a].support()[digit[2 * a]];
                    const auto& y = scores[m][a].support()[digit[2 * a + 1]];
                    prob *= x.prob * y.prob;
                    const auto kx = score_key(x.value);
                    const auto ky = score_key(y.value);
                    g[a] = kx > ky ? 1 : (kx < ky ? 0 : -1);
                }
                for (std::size_t a = 0; a < n_crit; ++a) {
                    if (g[a] == 1) won[a] += prob;
                    if (g[a] == -1) won[a] += 0.5 * prob;
                }
                // A tie realises E with probability 0.5: branch both ways.
                std::vector<std::size_t> ties;
                for (std::size_t a = 0; a < n_crit; ++a) {
                    if (g[a] == -1) ties.push_back(a);
                }
                const std::uint64_t branches = std::uint64_t{1} << ties.size();
                const double branch_prob = prob / static_cast<double>(branches);
                for (std::uint64_t b = 0; b < branches; ++b) {
                    double weighted = 0.0;
                    std::size_t t = 0;
                    for (std::size_t a = 0; a < n_crit; ++a) {
                        int v = g[a];
                        if (v == -1) v = static_cast<int>((b >> t++) & 1U);
                        if (v == 1) weighted += config.weights[a];
                    }
                    if (weighted > config.threshold + kBoundaryEps) {
                        r += branch_prob;
                    } else if (!(weighted < 1.0 - config.threshold - kBoundaryEps)) {
                        r += 0.5 * branch_prob;
                    }
                }
                std::size_t pos = 0;
                while (pos < digit.size() && ++digit[pos] == radix[pos]) digit[pos++] = 0;
                if (pos == digit.size()) break;
            }
            result.superiority[n][m] = r;
            for (std::size_t a = 0; a < n_crit; ++a) win[a][n][m] = won[a];
        }
    }
    result.fitness.resize(n_alt);
    for (std::size_t n = 0; n < n_alt; ++n) {
        double sum = 0.0;
        for (std::size_t m = 0; m < n_alt; ++m) {
            if (m != n) sum += result.superiority[n][m];
        }
        result.fitness[n] = sum / static_cast<double>(n_alt - 1);
    }
    result.order = order_by_fitness(result.fitness);
    fill_rationale(result, scores, win);
    return result;
}

std::vector<double> simultaneous_win_probability(const std::vector<CriterionScores>& scores,
                                                 const CriteriaConfig& config) {
    validate_scores(scores, config);
    const auto n_alt = scores.size();
    const auto n_crit = config.weights.size();

    // Joint outcomes (value keys + probability) of each alternative.
    struct Joint {
        std::vector<std::int64_t> keys;
        double prob;
    };
    std::vector<std::vector<Joint>> joints(n_alt);
    for (std::size_t n = 0; n < n_alt; ++n) {
        std::vector<Joint> acc{{{}, 1.0}};
        for (std::size_t a = 0; a < n_crit; ++a) {
            std::vector<Joint> next;
            for (const auto& j : acc) {
                for (const auto& atom : scores[n][a].support()) {
                    auto keys = j.keys;
                    keys.push_back(score_key(atom.value));
                    next.push_back({std::move(keys), j.prob * atom.prob});
                }
            }
            acc = std::move(next);
        }
        joints[n] = std::move(acc);
    }

    std::vector<double> out(n_alt, 0.0);
    for (std::size_t n = 0; n < n_alt; ++n) {
        for (const auto& xn : joints[n]) {
            double all = xn.prob;
            for (std::size_t m = 0; m < n_alt && all > 0.0; ++m) {
                if (m == n) continue;
                double beat = 0.0;
                for (const auto& xm : joints[m]) {
                    double weighted = 0.0;
                    for (std::size_t a = 0; a < n_crit; ++a) {
                        if (xn.keys[a] > xm.keys[a]) weighted += config.weights[a];
                    }
                    if (weighted > config.threshold + kBoundaryEps) beat += xm.prob;
                }
                all *= beat;
            }
            out[n] += all;
        }
    }
    return out;
}

}  // namespace loadrank
