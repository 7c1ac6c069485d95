#pragma once

#include <optional>
#include <span>

#include "l2m3/backends/types.hpp"

namespace l2m3::metrics {

// correct / total. Throws EmptyInput.
double accuracy(std::span<const bool> outcomes);

// (1/N) * sum(correct ? p_correct : p_wrong). Throws EmptyInput.
double pointwise_score(std::span<const bool> outcomes, double p_correct, double p_wrong);

// Cosine similarity; 0 when either vector has zero norm. Throws DimMismatch.
double semantic_similarity(const backends::EmbeddingVector & a, const backends::EmbeddingVector & b);

struct CompositionEstimate {
    double a_trans = 0.0;
    double a_lm = 0.0;
    double product = 0.0;
    std::optional<double> observed;

    // observed <= product + 1e-9; true when nothing was observed.
    bool within_bound() const noexcept;
    // Product rounded half away from zero to `digits` decimals.
    double rounded(int digits = 2) const;
};

inline constexpr double composition_slack = 1e-9;

// Throws OutOfRange unless every input lies in [0, 1].
CompositionEstimate compose_accuracies(double a_trans, double a_lm, std::optional<double> observed = std::nullopt);

} // namespace l2m3::metrics
