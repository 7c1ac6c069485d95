#include "l2m3/metrics/scores.hpp"

#include <cmath>

#include "l2m3/error.hpp"

namespace l2m3::metrics {

double accuracy(std::span<const bool> outcomes) {
    if (outcomes.empty()) {
        throw Error(Errc::EmptyInput, "accuracy of an empty outcome list");
    }
    std::size_t correct = 0;
    for (bool o : outcomes) {
        correct += o ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(outcomes.size());
}

double pointwise_score(std::span<const bool> outcomes, double p_correct, double p_wrong) {
    if (outcomes.empty()) {
        throw Error(Errc::EmptyInput, "score of an empty outcome list");
    }
    double sum = 0.0;
    for (bool o : outcomes) {
        sum += o ? p_correct : p_wrong;
    }
    return sum / static_cast<double>(outcomes.size());
}

double semantic_similarity(const backends::EmbeddingVector & a, const backends::EmbeddingVector & b) {
    if (a.dim() != b.dim()) {
        throw Error(Errc::DimMismatch, std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

bool CompositionEstimate::within_bound() const noexcept {
    return !observed || *observed <= product + composition_slack;
}

double CompositionEstimate::rounded(int digits) const {
    const double scale = std::pow(10.0, digits);
    return std::round(product * scale) / scale;
}

CompositionEstimate compose_accuracies(double a_trans, double a_lm, std::optional<double> observed) {
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in_unit(a_trans) || !in_unit(a_lm) || (observed && !in_unit(*observed))) {
        throw Error(Errc::OutOfRange, "component accuracies must lie in [0, 1]");
    }
    return {a_trans, a_lm, a_trans * a_lm, observed};
}

} // namespace l2m3::metrics
