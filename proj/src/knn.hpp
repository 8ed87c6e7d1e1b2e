#pragma once

#include "fault.hpp"
#include "three_phase.hpp"

#include <cstdint>
#include <vector>

namespace gridfdd {

/// Exemplar-based classifier over flattened predicted-voltage windows
/// (w samples x 3 phases, Euclidean distance, majority vote of the k nearest).
/// Vote ties break by the smallest summed distance among the tied classes,
/// then by class enumeration order.
struct KnnModel {
    int k = 5;
    int feature_window = 20; ///< w samples per feature, dimension = 3 w
    std::vector<double> exemplars; ///< row-major n x dim
    std::vector<FaultClass> labels;
    std::uint64_t seed = 0;

    int dim() const { return 3 * feature_window; }
    std::size_t count() const { return labels.size(); }
    const double* exemplar(std::size_t i) const { return exemplars.data() + i * dim(); }

    /// Throws ContractError on empty or inconsistent contents.
    void validate() const;
};

struct KnnResult {
    FaultClass label;
    std::vector<double> neighbor_distances; ///< the k nearest, ascending
};

/// Brute-force exact classification. Throws ContractError when the model is
/// empty or the feature dimension does not match.
KnnResult knn_classify(const KnnModel& m, const double* feature, int dim);
KnnResult knn_classify(const KnnModel& m, const std::vector<double>& feature);

/// Assemble a model from features and labels, subsampling to at most
/// max_exemplars while preserving class proportions (seeded, deterministic).
KnnModel build_knn(int k, int feature_window, const std::vector<double>& features,
                   const std::vector<FaultClass>& labels, std::size_t max_exemplars,
                   std::uint64_t seed);

/// Flatten w consecutive predictions ending at index `last` into a feature
/// vector (a,b,c per sample, oldest first).
void fill_prediction_feature(const std::vector<ThreePhase>& predictions, std::size_t last,
                             int feature_window, double* out);

} // namespace gridfdd
