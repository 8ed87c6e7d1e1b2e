#include "knn.hpp"

#include "errors.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gridfdd {

void KnnModel::validate() const {
    if (labels.empty()) throw ContractError("knn: model has no exemplars");
    if (k < 1 || static_cast<std::size_t>(k) > labels.size())
        throw ContractError("knn: k must be in [1, exemplar count]");
    if (feature_window < 1) throw ContractError("knn: feature window must be >= 1");
    if (exemplars.size() != labels.size() * static_cast<std::size_t>(dim()))
        throw ContractError("knn: exemplar buffer / label count mismatch");
}

KnnResult knn_classify(const KnnModel& m, const double* feature, int dim) {
    m.validate();
    if (dim != m.dim()) throw ContractError("knn: query dimension mismatch");

    const std::size_t n = m.count();
    const auto k = static_cast<std::size_t>(m.k);

    // Keep the k best (squared distance, index) pairs; the index tiebreak
    // makes the neighbor set independent of scan quirks.
    std::vector<std::pair<double, std::size_t>> best;
    best.reserve(k + 1);
    double worst = std::numeric_limits<double>::infinity();

    for (std::size_t i = 0; i < n; ++i) {
        const double* e = m.exemplar(i);
        double d2 = 0.0;
        for (int j = 0; j < dim; ++j) {
            const double diff = feature[j] - e[j];
            d2 += diff * diff;
        }
        if (best.size() == k && d2 >= worst) continue;
        best.emplace_back(d2, i);
        std::sort(best.begin(), best.end());
        if (best.size() > k) best.pop_back();
        if (best.size() == k) worst = best.back().first;
    }

    // Majority vote, ties by smaller summed distance, then enum order.
    std::array<int, kNumFaultClasses> votes{};
    std::array<double, kNumFaultClasses> dist_sum{};
    for (const auto& [d2, idx] : best) {
        const int c = static_cast<int>(m.labels[idx]);
        ++votes[c];
        dist_sum[c] += std::sqrt(d2);
    }
    int winner = -1;
    for (int c = 0; c < kNumFaultClasses; ++c) {
        if (votes[c] == 0) continue;
        if (winner < 0 || votes[c] > votes[winner] ||
            (votes[c] == votes[winner] && dist_sum[c] < dist_sum[winner]))
            winner = c;
    }

    KnnResult res;
    res.label = static_cast<FaultClass>(winner);
    res.neighbor_distances.reserve(best.size());
    for (const auto& [d2, idx] : best) res.neighbor_distances.push_back(std::sqrt(d2));
    return res;
}

KnnResult knn_classify(const KnnModel& m, const std::vector<double>& feature) {
    return knn_classify(m, feature.data(), static_cast<int>(feature.size()));
}

KnnModel build_knn(int k, int feature_window, const std::vector<double>& features,
                   const std::vector<FaultClass>& labels, std::size_t max_exemplars,
                   std::uint64_t seed) {
    const int dim = 3 * feature_window;
    if (labels.empty()) throw ContractError("build_knn: no exemplars given");
    if (features.size() != labels.size() * static_cast<std::size_t>(dim))
        throw ContractError("build_knn: feature buffer / label count mismatch");
    if (max_exemplars < 1) throw ConfigError("build_knn: exemplar cap must be >= 1");

    std::vector<std::size_t> keep;
    if (labels.size() <= max_exemplars) {
        keep.resize(labels.size());
        std::iota(keep.begin(), keep.end(), 0);
    } else {
        // Proportional per-class quotas (at least one exemplar per class seen).
        std::array<std::vector<std::size_t>, kNumFaultClasses> by_class;
        for (std::size_t i = 0; i < labels.size(); ++i)
            by_class[static_cast<int>(labels[i])].push_back(i);

        Rng rng(seed);
        const double scale =
            static_cast<double>(max_exemplars) / static_cast<double>(labels.size());
        for (auto& members : by_class) {
            if (members.empty()) continue;
            auto quota = static_cast<std::size_t>(
                std::llround(static_cast<double>(members.size()) * scale));
            quota = std::clamp<std::size_t>(quota, 1, members.size());
            rng.shuffle(members);
            members.resize(quota);
            keep.insert(keep.end(), members.begin(), members.end());
        }
        std::sort(keep.begin(), keep.end());
    }

    KnnModel m;
    m.k = k;
    m.feature_window = feature_window;
    m.seed = seed;
    m.labels.reserve(keep.size());
    m.exemplars.reserve(keep.size() * dim);
    for (std::size_t i : keep) {
        m.labels.push_back(labels[i]);
        const double* row = features.data() + i * dim;
        m.exemplars.insert(m.exemplars.end(), row, row + dim);
    }
    m.validate();
    return m;
}

void fill_prediction_feature(const std::vector<ThreePhase>& predictions, std::size_t last,
                             int feature_window, double* out) {
    if (last + 1 < static_cast<std::size_t>(feature_window))
        throw ContractError("prediction feature: not enough history");
    const std::size_t first = last + 1 - static_cast<std::size_t>(feature_window);
    for (int s = 0; s < feature_window; ++s) {
        const ThreePhase& v = predictions[first + s];
        out[3 * s + 0] = v.a;
        out[3 * s + 1] = v.b;
        out[3 * s + 2] = v.c;
    }
}

} // namespace gridfdd
